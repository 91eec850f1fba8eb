import pytest

from src.core.config import Settings, load_config_file, parse_k_values


@pytest.mark.parametrize(
    "text,expected",
    [
        ("20:40:5", [20, 25, 30, 35, 40]),
        ("6,8,10", [6, 8, 10]),
        ("20:30:5,60", [20, 25, 30, 60]),
        ("3:5", [3, 4, 5]),
        ("10,4,10", [4, 10]),
        (" 7 ", [7]),
    ],
)
def test_parse_k_values(text, expected):
    assert parse_k_values(text) == expected


@pytest.mark.parametrize("text", ["", "0,4", "5:10:0", "1:2:3:4", "a,b"])
def test_parse_k_values_rejects_bad_input(text):
    with pytest.raises(ValueError):
        parse_k_values(text)


def test_load_toml_config(tmp_path):
    path = tmp_path / "sweep.toml"
    path.write_text('experiment = "samples"\nq = 4\nK = "10:20:5"\ntrials = 7\n')
    assert load_config_file(path) == {"experiment": "samples", "q": 4, "K": "10:20:5", "trials": 7}


def test_load_json_config(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text('{"K": [4, 6], "seed": 3}')
    assert load_config_file(path) == {"K": [4, 6], "seed": 3}


def test_load_config_rejects_other_formats(tmp_path):
    path = tmp_path / "sweep.yaml"
    path.write_text("q: 3")
    with pytest.raises(ValueError):
        load_config_file(path)

    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load_config_file(listing)


def test_settings_read_prefixed_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("HOS_WORKERS", "4")
    monkeypatch.setenv("HOS_OUTPUT_DIR", str(tmp_path))
    monkeypatch.setenv("HOS_SUCCESS_THRESHOLD", "1e-3")
    configured = Settings()
    assert configured.workers == 4
    assert configured.output_dir == tmp_path
    assert configured.success_threshold == 1e-3
    assert Settings(_env_file=None).max_spectrum_entries == 2 ** 26
