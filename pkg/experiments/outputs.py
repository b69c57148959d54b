"""
Outputs - CSV and JSON Writers

All floating-point values go out with 17 significant digits so files can be
compared bit for bit. Every experiment directory also gets a metadata.json
sidecar that is itself a valid config for regenerating the run.
"""

import csv
import json
import platform
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np
import scipy

from core import __version__
from core.rng_core import RNG_ALGORITHM
from core.samplers import ChainRun

from .config import ExperimentConfig

TOOL_NAME = "atmcmc-lab"


def format_value(value) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def _to_builtin(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a CSV with a header row."""
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def write_json(path: Path, payload: dict) -> Path:
    """Write indented JSON, converting numpy values."""
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, default=_to_builtin)
        f.write("\n")
    return path


def write_trace(path: Path, run: ChainRun) -> Path:
    """iter,coord_1,...,coord_k,accepted_cum (coordinate labels are 1-based)."""
    header = ["iter"] + [f"coord_{i + 1}" for i in run.coords] + ["accepted_cum"]
    rows = (
        [int(it)] + list(row) + [int(acc)]
        for it, row, acc in zip(run.iterations, run.trace, run.accepted_cum)
    )
    return write_csv(path, header, rows)


def write_metadata(out_dir: Path, config: ExperimentConfig, files: List[Path], streams: dict) -> Path:
    """Sidecar: resolved config, tool and RNG identity, stream layout, files written."""
    payload = {
        "tool": TOOL_NAME,
        "version": __version__,
        "rng_algorithm": RNG_ALGORITHM,
        "seed": config.seed,
        "streams": streams,
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "files": [p.name for p in files],
        "config": config.to_dict(),
    }
    return write_json(out_dir / "metadata.json", payload)
