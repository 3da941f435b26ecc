"""CSV/JSON writers with full-precision floats and provenance sidecars."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys

import numpy as np


def fmt_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_value(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


class Sink:
    """Where artifacts go: a directory, or stdout when none is given."""

    def __init__(self, out: str | None, provenance: dict):
        self.out = out
        self.provenance = provenance
        self.written = []
        if out:
            os.makedirs(out, exist_ok=True)

    def _write(self, name, text, meta):
        if not self.out:
            return
        path = os.path.join(self.out, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        side = dict(self.provenance)
        side.update(meta or {})
        side["artifact"] = name
        with open(path + ".meta.json", "w", encoding="utf-8") as fh:
            fh.write(json_text(side))
        self.written.append(path)

    def csv(self, name, header, rows, meta=None, echo=None):
        """Write a CSV artifact; ``echo=None`` prints it only when there is no directory."""
        text = csv_text(header, rows)
        self._write(name, text, meta)
        if echo or (echo is None and not self.out):
            sys.stdout.write(text)
        return text

    def json(self, name, obj, meta=None, echo=True):
        text = json_text(obj)
        self._write(name, text, meta)
        if echo:
            sys.stdout.write(text)
        return text
