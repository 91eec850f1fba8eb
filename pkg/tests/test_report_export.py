import json
import math
from pathlib import Path

import jsonschema
import pandas as pd
import pytest
from openpyxl import load_workbook

from src.core.errors import OutputWriteError
from src.schemas.experiments import CSV_COLUMNS, ExperimentKind, ExperimentSpec, SolverConfig, TrialRecord
from src.services.report_export import ReportExporter, build_summary, load_summary

SCHEMA_PATH = Path(__file__).resolve().parents[1] / "src" / "schemas" / "sweep_summary.schema.json"


@pytest.fixture
def spec():
    return ExperimentSpec(experiment=ExperimentKind.SAMPLES, q=4, n=6, k_values=[10, 20], trials=2, base_seed=5)


@pytest.fixture
def records():
    return [
        TrialRecord("samples", 4, 6, 10, 0, 11, 12, 13, 0.5, 0.9, False, 3.0),
        TrialRecord("samples", 4, 6, 10, 1, 21, 22, 23, math.nan, math.nan, False, 1.0, "NonFiniteObjective: boom"),
        TrialRecord("samples", 4, 6, 20, 0, 31, 32, 33, 1e-22, 1e-9, True, 4.0),
        TrialRecord("samples", 4, 6, 20, 1, 41, 42, 43, 1e-21, 2e-9, True, 2.0),
    ]


@pytest.fixture
def table():
    return {10: 0.0, 20: 1.0}


def test_summary_counts_and_failures(spec, table, records):
    summary = build_summary(spec, table, records)
    assert [(row.K, row.trials, row.successes, row.rate) for row in summary.table] == [(10, 2, 0, 0.0), (20, 2, 2, 1.0)]
    assert [(f.K, f.trial, f.cause) for f in summary.failures] == [(10, 1, "NonFiniteObjective: boom")]
    assert summary.seeds["experiment_code"] == 3
    assert summary.seeds["base_seed"] == 5
    assert {"python", "numpy", "scipy"} <= set(summary.environment)


def test_export_all_writes_every_format(tmp_path, spec, table, records):
    paths = ReportExporter().export_all(spec, table, records, tmp_path / "out", excel=True)
    assert {p.name for p in paths.values()} == {
        "samples_q4_N6.csv", "samples_q4_N6.json", "samples_q4_N6.svg", "samples_q4_N6.xlsx",
    }

    frame = pd.read_csv(paths["csv"])
    assert list(frame.columns) == CSV_COLUMNS
    assert frame["success"].tolist() == [False, False, True, True]
    assert math.isnan(frame["error"][1])

    loaded = load_summary(paths["json"])
    assert loaded.rates() == table
    assert loaded.spec == spec


def test_json_summary_validates_against_the_shipped_schema(tmp_path, spec, table, records):
    schema = json.loads(SCHEMA_PATH.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    path = ReportExporter().export_to_json(build_summary(spec, table, records), tmp_path / "s.json")
    data = json.loads(path.read_text())
    jsonschema.validate(data, schema, cls=jsonschema.Draft202012Validator)
    assert data["spec"]["experiment"] == "samples"
    assert data["failures"] == [{"K": 10, "trial": 1, "cause": "NonFiniteObjective: boom"}]


@pytest.mark.parametrize(
    "path,value",
    [
        (("table", 0, "rate"), 1.5),
        (("spec", "experiment"), "bogus"),
        (("spec", "q"), 5),
        (("spec", "solver", "shrink"), 1.0),
        (("failures", 0, "cause"), 7),
    ],
)
def test_schema_rejects_drifted_summaries(tmp_path, spec, table, records, path, value):
    schema = json.loads(SCHEMA_PATH.read_text())
    exported = ReportExporter().export_to_json(build_summary(spec, table, records), tmp_path / "s.json")
    data = json.loads(exported.read_text())
    node = data
    for key in path[:-1]:
        node = node[key]
    node[path[-1]] = value
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(data, schema, cls=jsonschema.Draft202012Validator)


def test_schema_lists_every_solver_setting():
    schema = json.loads(SCHEMA_PATH.read_text())
    solver = schema["properties"]["spec"]["properties"]["solver"]["properties"]
    assert set(solver) == set(SolverConfig.model_fields)


def test_empty_csv_keeps_the_header(tmp_path):
    path = ReportExporter().export_to_csv([], tmp_path / "empty.csv")
    assert path.read_text().strip() == ",".join(CSV_COLUMNS)


def test_svg_marks_the_signal_length(tmp_path, table):
    path = ReportExporter().export_to_svg(table, 6, tmp_path / "plot.svg", title="samples")
    text = path.read_text()
    assert text.lstrip().startswith("<?xml") or "<svg" in text
    assert "#ff0000" in text.lower()


def test_single_k_plot(tmp_path):
    path = ReportExporter().export_to_svg({12: 0.4}, 6, tmp_path / "one.svg")
    assert "#ff0000" in path.read_text().lower()


def test_comparison_plot(tmp_path, spec, table, records):
    exporter = ReportExporter()
    first = build_summary(spec, table, records)
    second = build_summary(spec.model_copy(update={"experiment": ExperimentKind.RANDOM}), {10: 0.5, 20: 1.0}, [])
    path = exporter.export_comparison_svg([first, second], tmp_path / "cmp.svg", title="compare")
    assert "<svg" in path.read_text()


def test_excel_workbook_layout(tmp_path, spec, table, records):
    path = ReportExporter().export_to_excel(build_summary(spec, table, records), records, tmp_path / "book.xlsx")
    wb = load_workbook(path)
    assert wb.sheetnames == ["Success Rates", "Trials"]

    rates = wb["Success Rates"]
    assert [c.value for c in rates[1]] == ["K", "Trials", "Successes", "Rate"]
    assert rates.cell(row=3, column=4).value == 1.0

    trials = wb["Trials"]
    assert [c.value for c in trials[1]] == CSV_COLUMNS + ["cause"]
    assert trials.max_row == 5
    assert trials.cell(row=3, column=CSV_COLUMNS.index("error") + 1).value is None


def test_unwritable_output_raises(tmp_path, spec, table, records):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputWriteError) as excinfo:
        ReportExporter().export_all(spec, table, records, blocker / "sub")
    assert excinfo.value.path == blocker / "sub"
