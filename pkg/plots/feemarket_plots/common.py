"""Shared plumbing: schema-checked CSV loading and figure saving.

Rendered text stays as SVG text elements (not glyph paths), so labels can
be asserted against the file content.
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.fonttype"] = "none"


class InputError(Exception):
    """Bad or unusable input file."""


def read_rows(path, required):
    """Rows of ``path`` as dicts; the header must contain exactly the
    ``required`` columns and at least one data row must be present."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            if header is None:
                raise InputError(f"{path}: empty file, no header row")
            missing = sorted(set(required) - set(header))
            extra = sorted(set(header) - set(required))
            if missing or extra:
                parts = []
                if missing:
                    parts.append(f"missing columns: {', '.join(missing)}")
                if extra:
                    parts.append(f"unexpected columns: {', '.join(extra)}")
                raise InputError(f"{path}: {'; '.join(parts)}")
            rows = list(reader)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None
    if not rows:
        raise InputError(f"{path}: no data rows")
    return rows


def column(rows, name, empty_as_none=False):
    """One column as floats; blank cells become None when allowed."""
    out = []
    for i, row in enumerate(rows, start=1):
        raw = row[name]
        if raw == "" and empty_as_none:
            out.append(None)
            continue
        try:
            out.append(float(raw))
        except ValueError:
            raise InputError(
                f"row {i}: cannot parse {raw!r} in column {name!r}"
            ) from None
    return out


def save(fig, out_path):
    fig.savefig(out_path)
    print(f"wrote {out_path}")


def run_main(render, argv=None):
    """Uniform entry wrapper: 0 ok, 2 unusable input."""
    try:
        render(argv)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0
