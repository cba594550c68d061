"""Highly symmetric saddle families.

All N electrons on a ring perpendicular to the field has a closed form.
One electron on the axis with the remaining N-1 on a ring has none, so it
is solved by Newton iteration restricted to the three-parameter symmetric
subspace (axial height, ring radius, ring height).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ModelParams, gradient, hessian, potential_energy


@dataclass(frozen=True)
class RingSaddle:
    n: int
    w: float
    rho: float
    z: float
    energy: float

    def positions(self) -> np.ndarray:
        return ring_positions(self.n, self.rho, self.z)


@dataclass(frozen=True)
class RingPlusCenterSaddle:
    n: int
    z_c: float
    rho: float
    z: float
    energy: float
    iterations: int = 0
    residual: float = 0.0

    def positions(self) -> np.ndarray:
        return ring_plus_center_positions(self.n, self.z_c, self.rho, self.z)


class RingConvergenceError(RuntimeError):
    """Newton iteration in the symmetric subspace did not converge."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def repulsion_sum(n: int) -> float:
    """Dimensionless pair repulsion of n unit charges equally spaced on a ring.

    ``sum_{k=1}^{n-1} (n - k) / sin(pi k / n)``, so that the repulsion energy
    of a ring of radius rho is ``W / (2 rho)``.
    """
    if n < 2:
        raise ValueError(f"repulsion_sum needs n >= 2, got {n}")
    k = np.arange(1, n)
    return float(np.sum((n - k) / np.sin(np.pi * k / n)))


def ring_exists(n: int) -> bool:
    return 2.0 * n * n > repulsion_sum(n)


def ring_saddle(n: int) -> Optional[RingSaddle]:
    """Closed-form ring saddle for Z = N, F = 1, or None when none exists."""
    w = repulsion_sum(n)
    ratio = 2.0 * n * n / w
    if ratio <= 1.0:
        return None
    bracket = ratio ** (2.0 / 3.0) - 1.0
    length = math.sqrt(w / (2.0 * n))
    rho = length * bracket ** 0.25
    z = length * bracket ** 0.75
    energy = -(2.0 * n * n * (2.0 / (n * w)) ** (1.0 / 6.0) - math.sqrt(2.0 * n * w)) * bracket ** -0.25
    return RingSaddle(n=n, w=w, rho=rho, z=z, energy=energy)


def max_ring_n(limit: int = 100_000) -> int:
    """Largest electron count for which the ring saddle exists.

    Scans upward by direct summation; ``2 n^2 - W(n)`` changes sign once.
    """
    n = 2
    while n < limit and ring_exists(n + 1):
        n += 1
    if n >= limit:
        raise RuntimeError(f"ring saddle still exists at n={limit}")
    return n


def w_fit(n: int) -> float:
    """Empirical large-n fit ``(0.3 n^2 + 0.3 n - 3.1) ln n``; diagnostic only."""
    if n < 2:
        raise ValueError(f"w_fit needs n >= 2, got {n}")
    return (0.3 * n * n + 0.3 * n - 3.1) * math.log(n)


def ring_positions(n: int, rho: float, z: float, offset: int = 0) -> np.ndarray:
    phi = 2.0 * np.pi * (np.arange(n) + offset) / n
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), np.full(n, float(z))])


def ring_plus_center_positions(n: int, z_c: float, rho: float, z: float) -> np.ndarray:
    ring = ring_positions(n - 1, rho, z)
    return np.vstack([[0.0, 0.0, z_c], ring])


def _ring_plus_center_jacobian(n: int) -> np.ndarray:
    # the embedding is linear in (z_c, rho, z)
    jac = np.zeros((n, 3, 3))
    jac[0, 2, 0] = 1.0
    phi = 2.0 * np.pi * np.arange(n - 1) / (n - 1)
    jac[1:, 0, 1] = np.cos(phi)
    jac[1:, 1, 1] = np.sin(phi)
    jac[1:, 2, 2] = 1.0
    return jac.reshape(3 * n, 3)


def ring_plus_center_saddle(
    n: int, tol: float = 1e-12, max_iters: int = 100, start=None
) -> RingPlusCenterSaddle:
    """Axial electron plus an (n-1)-ring, by Newton in the symmetric subspace.

    The reduced gradient and Hessian are projections of the full ones through
    the (linear) embedding, so the fixed point is a stationary point of the
    full 3N-dimensional potential.  Raises :class:`RingConvergenceError` if the
    reduced gradient norm does not drop below ``tol``.
    """
    if n < 3:
        raise ValueError(f"ring plus center needs n >= 3, got {n}")
    base = ring_saddle(n - 1)
    if start is None:
        if base is None:
            raise ValueError(f"no {n - 1}-ring to start from")
        start = (base.z + 0.5, base.rho, base.z)
    q = np.array(start, dtype=float)
    params = ModelParams(n)
    jac = _ring_plus_center_jacobian(n)
    residual = np.inf
    for it in range(max_iters + 1):
        pos = ring_plus_center_positions(n, *q)
        g = jac.T @ gradient(pos, params)
        residual = float(np.linalg.norm(g))
        if residual < tol:
            return RingPlusCenterSaddle(
                n=n,
                z_c=float(q[0]),
                rho=float(q[1]),
                z=float(q[2]),
                energy=potential_energy(pos, params),
                iterations=it,
                residual=residual,
            )
        if it == max_iters:
            break
        h = jac.T @ hessian(pos, params) @ jac
        step = np.linalg.solve(h, g)
        q -= np.clip(step, -0.5, 0.5)
    raise RingConvergenceError(
        f"ring plus center for n={n} did not converge (residual {residual:.3g})", residual
    )
