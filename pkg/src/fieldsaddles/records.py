"""Saddle records, run manifests and the JSONL store."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List

import numpy as np

from .symmetry import SymmetryLabel, cylindrical


@dataclass(frozen=True)
class SaddleRecord:
    n: int
    nu: int
    energy: float
    n_u: int
    lambda_r: float
    mu: float
    symmetry: SymmetryLabel
    positions: np.ndarray
    hits: int = 0
    seed: int = 0
    lambdas: tuple = ()

    def to_json(self) -> dict:
        # float repr round-trips exactly through json
        return {
            "n": self.n,
            "nu": self.nu,
            "energy": float(self.energy),
            "n_u": int(self.n_u),
            "lambda_r": float(self.lambda_r),
            "mu": float(self.mu),
            "symmetry": str(self.symmetry),
            "positions": [[float(v) for v in row] for row in np.asarray(self.positions)],
            "hits": int(self.hits),
            "seed": int(self.seed),
            "lambdas": [float(v) for v in self.lambdas],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SaddleRecord":
        return cls(
            n=int(data["n"]),
            nu=int(data["nu"]),
            energy=float(data["energy"]),
            n_u=int(data["n_u"]),
            lambda_r=float(data["lambda_r"]),
            mu=float(data["mu"]),
            symmetry=SymmetryLabel.parse(data["symmetry"]),
            positions=np.array(data["positions"], dtype=float),
            hits=int(data.get("hits", 0)),
            seed=int(data.get("seed", 0)),
            lambdas=tuple(float(v) for v in data.get("lambdas", ())),
        )


@dataclass
class RunManifest:
    n: int
    search_params: dict
    model_params: dict
    workers: int
    version: str
    wall_time: float = 0.0
    status_counts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "RunManifest":
        return cls(**data)


def write_store(path, records: Iterable[SaddleRecord]) -> None:
    path = Path(path)
    with path.open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def read_store(path) -> List[SaddleRecord]:
    records = []
    with Path(path).open() as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(SaddleRecord.from_json(json.loads(line)))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad record ({exc})") from exc
    return records


def write_manifest(path, manifest: RunManifest) -> None:
    Path(path).write_text(json.dumps(manifest.to_json(), indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> RunManifest:
    return RunManifest.from_json(json.loads(Path(path).read_text()))


def family(positions, tol: float = 1e-6) -> str:
    """Short description of the structural family of a configuration.

    One of ``"all on a ring"``, ``"ring plus center"``, ``"all on a line"``
    (every electron in one plane through the field axis),
    ``"two in the center"`` (a mirror pair of electrons much closer to the
    axis than the rest) or ``""``.
    """
    pos = np.asarray(positions, dtype=float)
    rho, _, z = cylindrical(pos)
    axial = rho <= tol
    outer = ~axial

    def same(values):
        return values.size > 1 and np.ptp(values) <= tol

    if not axial.any() and same(rho) and same(z):
        return "all on a ring"
    if axial.sum() == 1 and outer.sum() >= 3 and same(rho[outer]) and same(z[outer]):
        return "ring plus center"
    # planar through the axis: the xy projections are collinear with the origin
    if np.linalg.svd(pos[:, :2], compute_uv=False)[-1] <= tol:
        return "all on a line"
    order = np.argsort(rho)
    inner = order[:2]
    if (
        len(pos) > 2
        and rho[order[1]] < 0.5 * rho[order[2]]
        and abs(rho[inner[0]] - rho[inner[1]]) <= tol
        and abs(z[inner[0]] - z[inner[1]]) <= tol
    ):
        return "two in the center"
    return ""
