"""Versioned CSV emission with unit-bearing header comments."""

import csv

SCHEMA_VERSION = 1


def write_csv(path, name, columns, rows, units=None):
    """Write rows (list of dicts) with a schema/version comment header."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# dplac-csv v{SCHEMA_VERSION}: {name}\n")
        if units:
            fh.write("# units: " + " ".join(f"{k}={v}" for k, v in units.items()) + "\n")
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k, "")) for k in columns})


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return v


def read_csv(path):
    """Read a dplac CSV back into (comments, list of dict rows)."""
    comments, rows = [], []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh]
    body = []
    for ln in lines:
        if ln.startswith("#"):
            comments.append(ln.rstrip("\n"))
        else:
            body.append(ln)
    reader = csv.DictReader(body)
    for row in reader:
        rows.append(dict(row))
    return comments, rows
