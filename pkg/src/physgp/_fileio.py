"""CSV/JSON writers shared by the modules: every output file starts with a
metadata comment line so results are self-describing and reproducible."""

from __future__ import annotations

import json

SCHEMA_VERSION = "physgp-v1"


def format_meta(meta=None):
    items = dict(meta or {})
    parts = [SCHEMA_VERSION] + [f"{k}={v}" for k, v in items.items()]
    return "# " + " ".join(parts)


def _cell(v):
    if isinstance(v, float):
        return repr(v)  # shortest round-trip representation
    if hasattr(v, "item"):
        return repr(v.item())
    return str(v)


def write_csv(path, columns, rows, meta=None):
    lines = [format_meta(meta), ",".join(columns)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, payload, meta=None):
    doc = {"meta": dict({"schema": SCHEMA_VERSION}, **(meta or {})), **payload}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_csv_rows(path):
    """Return (header, rows-of-strings), skipping '#' comment lines."""
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    return header, rows
