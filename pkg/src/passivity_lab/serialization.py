"""JSON/CSV persistence: generator documents and provenance-stamped reports.

Generator document::

    {"dim": 3,
     "lamb_shift": [0.0, 0.1, -0.2],
     "dephasing": [[[re, im], [re, im], [re, im]]],
     "jumps": [[[re, im], [re, im]]],
     "energies": [0.0, 1.0, 2.0]}          # optional

Every complex number is a ``[re, im]`` pair. Floats go through ``repr`` so a
dump/load cycle is exact.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .lindblad import LindbladGenerator, build_generator

CSV_FLOAT_FORMAT = "{:.17g}"


def _complex_rows(a) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a)]


def _parse_complex_rows(rows, width, name) -> np.ndarray:
    out = np.zeros((len(rows), width), complex)
    for k, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"{name}[{k}] has {len(row)} entries, expected {width}")
        for i, pair in enumerate(row):
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                raise ValueError(f"{name}[{k}][{i}] must be a [re, im] pair")
            out[k, i] = complex(float(pair[0]), float(pair[1]))
    return out


def generator_to_dict(L: LindbladGenerator) -> dict:
    doc = {
        "dim": L.dim,
        "lamb_shift": [float(v) for v in L.lamb_shift],
        "dephasing": _complex_rows(L.dephasing),
        "jumps": _complex_rows(L.jumps),
    }
    if L.energies is not None:
        doc["energies"] = [float(v) for v in L.energies]
    return doc


def generator_from_dict(doc: dict, *, check_concavity: bool = True) -> LindbladGenerator:
    unknown = set(doc) - {"dim", "lamb_shift", "dephasing", "jumps", "energies", "provenance"}
    if unknown:
        raise ValueError(f"unknown generator fields: {sorted(unknown)}")
    if "dim" not in doc:
        raise ValueError("generator document lacks 'dim'")
    d = int(doc["dim"])
    return build_generator(
        d,
        lamb_shift=doc.get("lamb_shift"),
        dephasing=_parse_complex_rows(doc.get("dephasing", []), d, "dephasing"),
        jumps=_parse_complex_rows(doc.get("jumps", []), d - 1, "jumps"),
        energies=doc.get("energies"),
        check_concavity=check_concavity,
    )


def load_generator(path, **kwargs) -> LindbladGenerator:
    with open(path) as fh:
        return generator_from_dict(json.load(fh), **kwargs)


def dump_generator(L: LindbladGenerator, path, provenance: dict | None = None) -> None:
    doc = generator_to_dict(L)
    if provenance:
        doc["provenance"] = provenance
    write_json(path, doc)


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form of a resolved config.

    Keys naming output locations (``out``, ``out_given``) are left out, so the
    same experiment written to two directories carries the same hash.
    """
    canon = {k: v for k, v in config.items() if not k.startswith("out")}
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":"), default=_jsonable)
    return hashlib.sha256(blob.encode()).hexdigest()


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if hasattr(x, "value"):
        return x.value
    raise TypeError(f"cannot serialize {type(x).__name__}")


def write_json(path, payload: dict, provenance: dict | None = None) -> None:
    if provenance is not None:
        payload = {"provenance": provenance, **payload}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return CSV_FLOAT_FORMAT.format(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


def write_csv(path, rows, columns=None, provenance: dict | None = None) -> None:
    """Write dict rows with '.' decimals and 17 significant digits.

    Provenance goes into a leading ``# key=value ...`` comment line.
    """
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if provenance:
            fh.write("# " + " ".join(f"{k}={provenance[k]}" for k in sorted(provenance)) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row[c]) for c in columns])


def report_rows(report) -> list[dict]:
    return [r._asdict() for r in report.records]
