import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

HEADER = ["axis", "axis_value", "observable", "value", "std_error", "provenance"]
PROVENANCE = {"numeric", "analytic"}


class SchemaError(ValueError):
    pass


@dataclass
class Table:
    axis: str
    metadata: dict = field(default_factory=dict)
    config: str = ""
    rows: list = field(default_factory=list)


def read_table(path):
    text = Path(path).read_text(encoding="utf-8")
    if "\r" in text:
        raise SchemaError(f"{path}: CR line endings")
    lines = text.split("\n")
    table = Table(axis="")
    i = 0
    in_config = False
    config = []
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][2:] if lines[i].startswith("# ") else lines[i][1:]
        if lines[i] == "# --- config ---":
            in_config = True
        elif in_config:
            config.append(body)
        elif " = " in body:
            k, v = body.split(" = ", 1)
            table.metadata[k] = v
        i += 1
    table.config = "\n".join(config) + ("\n" if config else "")
    reader = csv.reader(lines[i:])
    header = next(reader, None)
    if header != HEADER:
        raise SchemaError(f"{path}: expected header {','.join(HEADER)}, got {header}")
    for n, rec in enumerate(reader, start=i + 2):
        if not rec:
            continue
        if len(rec) != len(HEADER):
            raise SchemaError(f"{path}:{n}: {len(rec)} fields")
        axis, x, obs, value, err, prov = rec
        if prov not in PROVENANCE:
            raise SchemaError(f"{path}:{n}: provenance {prov!r}")
        nums = [float(x), float(value)] + ([float(err)] if err else [])
        if not all(math.isfinite(v) for v in nums):
            raise SchemaError(f"{path}:{n}: non-finite number")
        table.axis = table.axis or axis
        table.rows.append((float(x), obs, float(value), float(err) if err else None, prov))
    return table
