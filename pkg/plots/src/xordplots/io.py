"""Schema-checked reading of xordlab CSV outputs.

Every data file begins with ``# schema=xordlab/<name>/v1`` followed by
optional further comment lines and a header row.  The reader validates the
schema name and version and the presence of the expected columns before
anything is drawn.
"""

from __future__ import annotations

import csv
from pathlib import Path

SUPPORTED_VERSION = 1

EXPECTED_COLUMNS = {
    "filters": ["k", "run", "stage", "group", "index", "x", "y"],
    "error-vs-channels": ["gamma", "k", "runs", "zero_train_error_runs",
                          "mean_test_error", "mean_test_error_zero_train"],
    "angle-histogram": ["variant", "filter", "angle_deg"],
    "accuracy-vs-trainsize": ["n_train", "cluster_init_acc",
                              "best_random_acc", "big_net_acc"],
}


class SchemaError(ValueError):
    pass


def read_rows(path, kind: str):
    """Rows of a schema-tagged CSV as dictionaries of strings."""
    expected = EXPECTED_COLUMNS[kind]
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("# schema="):
        raise SchemaError(f"{path}: missing '# schema=' tag; "
                          f"expected xordlab/{kind}/v{SUPPORTED_VERSION} "
                          f"with columns {expected}")
    tag = lines[0].removeprefix("# schema=").strip()
    parts = tag.split("/")
    if len(parts) != 3 or parts[0] != "xordlab":
        raise SchemaError(f"{path}: unrecognized schema tag {tag!r}")
    name, version = parts[1], parts[2]
    if name != kind or version != f"v{SUPPORTED_VERSION}":
        raise SchemaError(
            f"{path}: schema {tag!r} but this renderer draws "
            f"xordlab/{kind}/v{SUPPORTED_VERSION} (columns {expected})")
    body = [ln for ln in lines if not ln.startswith("#")]
    rows = list(csv.DictReader(body))
    header = list(rows[0].keys()) if rows else (body[0].split(",") if body else [])
    missing = [c for c in expected if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}; "
                          f"expected {expected}")
    return rows
