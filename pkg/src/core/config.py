import json
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()

class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="HOS_", env_file=".env", extra="ignore")

    # Numerics
    max_spectrum_entries: int = 2 ** 26
    rank_rel_tol: float = 1e-8
    success_threshold: float = 5e-5

    # Execution
    workers: int = 1
    batch_size: int = 50

    # Outputs
    output_dir: Path = Path("results")
    results_db_url: Optional[str] = None

    # Application Configuration
    log_level: str = "INFO"
    log_file: Optional[str] = "logs/hos_recover.log"

settings = Settings()


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    Load a TOML or JSON file whose keys mirror the CLI flags

    Args:
        path: Config file path (.toml or .json)

    Returns:
        Flat dictionary of flag values
    """
    suffix = path.suffix.lower()
    if suffix == ".toml":
        with open(path, "rb") as f:
            data = tomllib.load(f)
    elif suffix == ".json":
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    else:
        raise ValueError(f"Unsupported config file type: {path.suffix} (expected .toml or .json)")

    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must hold a key-value table")
    return data


def parse_k_values(text: str) -> List[int]:
    """
    Parse a K sweep such as "20:90:5", "6,8,10" or "20:40:5,60"

    Ranges are inclusive of both ends. The result is sorted and deduplicated.
    """
    values = set()
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            pieces = [int(p) for p in part.split(":")]
            if len(pieces) == 2:
                start, stop, step = pieces[0], pieces[1], 1
            elif len(pieces) == 3:
                start, stop, step = pieces
            else:
                raise ValueError(f"Bad K range: {part!r}")
            if step <= 0:
                raise ValueError(f"K range step must be positive: {part!r}")
            values.update(range(start, stop + 1, step))
        else:
            values.add(int(part))

    if not values:
        raise ValueError(f"No K values in {text!r}")
    if min(values) < 1:
        raise ValueError(f"K values must be positive: {text!r}")
    return sorted(values)
