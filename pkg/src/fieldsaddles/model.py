"""Potential energy surface of N electrons around a nucleus in a static field.

At zero momenta the energy is

    V = -Z sum_i 1/|r_i| + sum_{i<j} 1/|r_i - r_j| - F sum_i z_i

with the field along +z.  All routines accept a configuration as an
``(N, 3)`` array of electron positions (anything ``np.asarray`` turns into
one) and return derivatives flattened in the same electron-major order.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels

SINGULAR_DISTANCE = 1.0e-10


class SingularConfigurationError(ValueError):
    """An electron sits on the nucleus or on top of another electron."""


@dataclass(frozen=True)
class ModelParams:
    """Electron count, nuclear charge and field strength.

    ``nuclear_charge`` defaults to the electron count (neutral atom) and the
    field to 1, the scaled units in which every tabulated value is quoted.
    """

    n_electrons: int
    nuclear_charge: Optional[float] = None
    field: float = 1.0

    def __post_init__(self):
        if int(self.n_electrons) != self.n_electrons or self.n_electrons < 2:
            raise ValueError(f"n_electrons must be an integer >= 2, got {self.n_electrons}")
        object.__setattr__(self, "n_electrons", int(self.n_electrons))
        if self.nuclear_charge is None:
            object.__setattr__(self, "nuclear_charge", float(self.n_electrons))
        if not self.nuclear_charge > 0:
            raise ValueError(f"nuclear_charge must be positive, got {self.nuclear_charge}")
        if not self.field > 0:
            raise ValueError(f"field must be positive, got {self.field}")
        object.__setattr__(self, "nuclear_charge", float(self.nuclear_charge))
        object.__setattr__(self, "field", float(self.field))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def as_configuration(config, n_electrons: Optional[int] = None) -> np.ndarray:
    """Validate and return ``config`` as a float ``(N, 3)`` array (a copy).

    Raises ``ValueError`` for bad shapes or non-finite entries and
    :class:`SingularConfigurationError` for collisions.
    """
    pos = np.array(config, dtype=float)
    if pos.ndim == 1 and pos.size % 3 == 0:
        pos = pos.reshape(-1, 3)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ValueError(f"configuration must have shape (N, 3), got {np.shape(config)}")
    if n_electrons is not None and pos.shape[0] != n_electrons:
        raise ValueError(f"expected {n_electrons} electrons, got {pos.shape[0]}")
    if not np.all(np.isfinite(pos)):
        raise ValueError("configuration contains non-finite coordinates")
    sep = _kernels.min_separation(pos.ravel(), pos.shape[0])
    if sep < SINGULAR_DISTANCE:
        raise SingularConfigurationError(
            f"singular configuration: minimum separation {sep:.3g} < {SINGULAR_DISTANCE:g}"
        )
    return pos


def potential_energy(config, params: Optional[ModelParams] = None) -> float:
    """Potential energy of ``config``.

    ``params`` defaults to Z = N and F = 1.  Without params a single electron
    is accepted too, which is handy for checking the one-electron Stark saddle.
    """
    pos = as_configuration(config)
    charge, field = _charge_field(pos, params)
    return float(_kernels.energy(pos.ravel(), len(pos), charge, field))


def gradient(config, params: Optional[ModelParams] = None) -> np.ndarray:
    """Analytic gradient, shape ``(3N,)``."""
    pos = as_configuration(config)
    charge, field = _charge_field(pos, params)
    g = np.empty(pos.size)
    _kernels.gradient_into(pos.ravel(), len(pos), charge, field, g)
    return g


def hessian(config, params: Optional[ModelParams] = None) -> np.ndarray:
    """Analytic Hessian, shape ``(3N, 3N)``, exactly symmetric."""
    pos = as_configuration(config)
    charge, field = _charge_field(pos, params)
    g = np.empty(pos.size)
    h = np.empty((pos.size, pos.size))
    _kernels.grad_hess_into(pos.ravel(), len(pos), charge, field, g, h)
    return h


def _charge_field(pos, params):
    if params is None:
        return float(len(pos)), 1.0
    if params.n_electrons != len(pos):
        raise ValueError(
            f"params describe {params.n_electrons} electrons, configuration has {len(pos)}"
        )
    return params.nuclear_charge, params.field


def rescale(obj, from_field: float, to_field: float):
    """Map a configuration or record between field strengths.

    With ``s = to_field / from_field`` positions scale by ``s**-0.5``,
    energies by ``s**0.5`` and Lyapunov exponents by ``s**0.75``; threshold
    exponents and unstable counts are unchanged.  Accepts an ``(N, 3)``
    array or any dataclass with some of the fields ``positions``,
    ``energy``, ``lambda_r``, ``lambdas``, ``rho``, ``z``, ``z_c`` (for example
    :class:`~fieldsaddles.records.SaddleRecord`).
    """
    if not (from_field > 0 and to_field > 0):
        raise ValueError("field strengths must be positive")
    s = to_field / from_field
    length = s ** -0.5
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        scales = {
            "positions": length,
            "rho": length,
            "z": length,
            "z_c": length,
            "energy": s ** 0.5,
            "lambda_r": s ** 0.75,
            "lambdas": s ** 0.75,
        }
        changes = {}
        for f in dataclasses.fields(obj):
            if f.name in scales:
                value = getattr(obj, f.name)
                if f.name == "positions":
                    value = np.asarray(value, dtype=float) * length
                elif f.name == "lambdas":
                    value = tuple(v * scales[f.name] for v in value)
                else:
                    value = value * scales[f.name]
                changes[f.name] = value
        if "field" in {f.name for f in dataclasses.fields(obj)}:
            changes["field"] = to_field
        return dataclasses.replace(obj, **changes)
    return np.asarray(obj, dtype=float) * length
