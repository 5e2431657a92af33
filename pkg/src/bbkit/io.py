"""Serialization: kernels as ``.npy`` plus a JSON sidecar, reports as JSON and CSV."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .funcgrid import Grid, SampledFunction
from .kernels import BivariateKernel
from .reports import jsonable


def dumps(payload: Any) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: str | Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload))
    return path


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in columns})
    return path


def _cell(v: Any) -> Any:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(jsonable(v), sort_keys=True)
    return v


def save_kernel(K: BivariateKernel, path: str | Path) -> tuple[Path, Path]:
    """Write ``<path>.npy`` (complex128 samples) and ``<path>.json`` (grids and factor metadata)."""
    base = Path(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    npy = base.parent / f"{base.name}.npy"
    side = base.parent / f"{base.name}.json"
    np.save(npy, np.asarray(K.values, dtype=np.complex128), allow_pickle=False)
    meta = {
        "grid1": K.grid1.to_dict(),
        "grid2": K.grid2.to_dict(),
        "rank": K.rank,
        "factors": None if K.factors is None else [
            [{"tag": p.tag, "params": p.params}, {"tag": q.tag, "params": q.params}] for p, q in K.factors
        ],
        "data": npy.name,
    }
    write_json(side, meta)
    return npy, side


def load_kernel(path: str | Path) -> BivariateKernel:
    """Inverse of :func:`save_kernel`; factor metadata is informational and not rebuilt."""
    base = Path(path)
    meta = json.loads((base.parent / f"{base.name}.json").read_text())
    values = np.load(base.parent / meta["data"], allow_pickle=False)
    return BivariateKernel(Grid.from_dict(meta["grid1"]), Grid.from_dict(meta["grid2"]), values)


def function_to_dict(f: SampledFunction) -> dict:
    return {"grid": f.grid.to_dict(), "tag": f.tag, "params": f.params, "re": f.values.real.tolist(), "im": f.values.imag.tolist()}
