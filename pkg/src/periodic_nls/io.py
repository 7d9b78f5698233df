"""CSV / JSON emitters and run manifests."""

from __future__ import annotations

import csv
import json
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .grid import Field, Grid

MANIFEST_SCHEMA = "1"


def _fmt(v: float) -> str:
    return f"{v:.15g}"


def write_field_csv(f: Field, path) -> None:
    """Columns ``x, re, im, abs``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "re", "im", "abs"])
        for x, v in zip(f.x, f.values):
            w.writerow([_fmt(x), _fmt(v.real), _fmt(v.imag), _fmt(abs(v))])


def read_field_csv(path, T: float | None = None) -> Field:
    """Inverse of :func:`write_field_csv`; ``T`` defaults to ``L * (x[1] - x[0])``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    L = data.shape[0]
    if T is None:
        T = L * (data[1, 0] - data[0, 0])
    return Field(data[:, 1] + 1j * data[:, 2], Grid(L, T))


def field_to_dict(f: Field) -> dict:
    return {
        "L": f.grid.L,
        "T": f.grid.T,
        "re": [float(_fmt(v)) for v in f.values.real],
        "im": [float(_fmt(v)) for v in f.values.imag],
    }


def write_field_json(f: Field, path) -> None:
    with open(path, "w") as fh:
        json.dump(field_to_dict(f), fh)


def read_field_json(path) -> Field:
    with open(path) as fh:
        d = json.load(fh)
    return Field(np.asarray(d["re"]) + 1j * np.asarray(d["im"]), Grid(d["L"], d["T"]))


def write_history_csv(result, path) -> None:
    """Columns ``iter, mass, momentum, energy, max_modulus_delta[, ref_distance]``."""
    has_ref = bool(result.ref_distances)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "mass", "momentum", "energy", "max_modulus_delta"] + (["ref_distance"] if has_ref else []))
        for n, h in enumerate(result.history):
            delta = result.deltas[n - 1] if n > 0 else float("nan")
            row = [n, _fmt(h.mass), _fmt(h.momentum), _fmt(h.energy), _fmt(delta)]
            if has_ref:
                row.append(_fmt(result.ref_distances[n]))
            w.writerow(row)


def _version() -> str:
    from . import __version__

    return __version__


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    outputs: list = field(default_factory=list)
    deterministic: bool = True
    version: str = field(default_factory=_version)
    schema: str = MANIFEST_SCHEMA
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    python: str = field(default_factory=lambda: sys.version.split()[0])
    platform: str = field(default_factory=platform.platform)
    extra: dict = field(default_factory=dict)

    def write(self, path) -> Path:
        path = Path(path)
        with open(path, "w") as fh:
            json.dump(self.__dict__, fh, indent=2, default=str)
        return path
