"""CSV/JSON artifact writing with overwrite protection and metadata sidecars.

CSV dialect: comma separated, ``.`` decimal point, mandatory header row,
LF line endings.  Floats are written with ``repr`` so they round-trip
exactly.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import InvalidParameterError
from .model import EtaSample, FirstColumn, ModelParams

__all__ = [
    "write_csv",
    "read_csv",
    "write_json",
    "read_params",
    "params_hash",
    "tool_version",
    "metadata",
    "write_first_columns",
    "read_first_columns",
    "write_eta_samples",
]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def _target(path, force):
    path = Path(path)
    if path.exists() and not force:
        raise InvalidParameterError(f"{path} exists; pass --force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(path, header, rows, force=False):
    """Write a table to ``path`` (or stdout when ``path`` is None)."""
    if path is None:
        fh, close = sys.stdout, False
    else:
        fh, close = open(_target(path, force), "w", newline=""), True
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    finally:
        if close:
            fh.close()


def read_csv(path):
    """Return ``(header, data)`` with ``data`` a float array of shape (rows, cols)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidParameterError(f"{path} is empty") from None
        rows = [[float(x) for x in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, data


def write_json(path, doc, force=False):
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    _target(path, force).write_text(text)


def read_params(path) -> ModelParams:
    try:
        return ModelParams.from_json(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidParameterError(f"cannot read params file {path}: {exc}") from None


def params_hash(params: ModelParams) -> str:
    return hashlib.sha256(params.to_json(sort_keys=True).encode()).hexdigest()


def tool_version():
    """Package version, suffixed with ``+g<commit>`` when run from a git checkout."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return __version__
    rev = out.stdout.strip()
    return f"{__version__}+g{rev}" if out.returncode == 0 and rev else __version__


def metadata(command, config, seed=None, params=None, extra=None):
    doc = {
        "tool": "circspec",
        "version": tool_version(),
        "command": command,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "seed": seed,
        "config": config,
    }
    if params is not None:
        doc["params"] = params.to_dict()
        doc["params_sha256"] = params_hash(params)
    if extra:
        doc.update(extra)
    return doc


def write_first_columns(path, columns, force=False):
    columns = list(columns)
    n = columns[0].n
    write_csv(path, FirstColumn.csv_header(n), (fc.to_row() for fc in columns), force)


def read_first_columns(path):
    _, data = read_csv(path)
    return [FirstColumn.from_row(row) for row in data]


def write_eta_samples(path, samples, force=False):
    samples = list(samples)
    write_csv(path, EtaSample.csv_header(samples[0].n), (s.to_row() for s in samples), force)
