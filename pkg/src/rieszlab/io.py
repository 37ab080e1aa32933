"""Atomic output files with embedded run metadata."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from typing import Iterable, Sequence

import numpy as np

from . import __version__


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def to_jsonable(x):
    """Convert numpy scalars/arrays recursively; non-finite floats become strings."""
    return _plain(x)


def write_atomic(path: str, data: str | bytes) -> None:
    """Write via a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def meta(config: dict) -> dict:
    return {"version": __version__, "config": to_jsonable(config)}


def json_document(result, config: dict) -> str:
    return json.dumps({**meta(config), "result": to_jsonable(result)}, indent=2, sort_keys=True) + "\n"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def csv_document(rows: Iterable[dict], fieldnames: Sequence[str], config: dict) -> str:
    """A ``# {metadata}`` comment line, the header row, then one row per dict."""
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta(config), sort_keys=True) + "\n")
    wr = csv.DictWriter(buf, fieldnames=list(fieldnames), lineterminator="\n", extrasaction="ignore")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
