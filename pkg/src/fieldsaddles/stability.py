"""Stability of a stationary point from its Hessian spectrum.

With unit masses and kinetic energy p^2/2 the linearised flow at a
stationary point has eigenvalues ``+-sqrt(-h)`` for every Hessian eigenvalue
``h``.  Negative ``h`` are unstable directions with Lyapunov exponent
``sqrt(-h)``.  One of them, the reaction coordinate, moves all electrons the
same way along the field; the others enter the threshold exponent

    mu = sum_i lambda_i / lambda_r.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import ModelParams, as_configuration, gradient, hessian

UNSTABLE = -1
ZERO = 0
STABLE = 1

STATIONARY_TOL = 1e-8
RESIDUAL_TOL = 1e-9


class NotStationaryError(ValueError):
    """Stability analysis requested away from a stationary point."""


class ReactionCoordinateError(ValueError):
    """No unstable direction to serve as reaction coordinate."""


class AmbiguousReactionCoordinate(UserWarning):
    pass


@dataclass(frozen=True)
class StabilitySpectrum:
    """Classified Hessian spectrum (eigenvalues ascending).

    ``lyapunov`` holds ``sqrt(-h)`` for the unstable eigenvalues, in the same
    order as ``unstable_indices``.  ``reaction_index`` indexes into
    ``eigenvalues``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    zero_tol: float
    classes: np.ndarray
    lyapunov: np.ndarray
    n_electrons: int
    reaction_index: Optional[int] = None
    reaction_overlaps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ambiguous: bool = False

    @property
    def unstable_indices(self) -> np.ndarray:
        return np.flatnonzero(self.classes == UNSTABLE)

    @property
    def n_unstable(self) -> int:
        return int(np.sum(self.classes == UNSTABLE))

    @property
    def n_zero(self) -> int:
        return int(np.sum(self.classes == ZERO))

    @property
    def n_stable(self) -> int:
        return int(np.sum(self.classes == STABLE))


@dataclass(frozen=True)
class ExponentReport:
    lambda_r: float
    n_u: int
    mu: float
    lambdas: tuple = ()


def analyze(config, params: Optional[ModelParams] = None, zero_tol: float = 1e-6) -> StabilitySpectrum:
    """Eigen-decompose the Hessian at a stationary point and classify it.

    Raises :class:`NotStationaryError` if the gradient norm exceeds 1e-8 and
    ``numpy.linalg.LinAlgError`` if the decomposition fails or its residual
    exceeds 1e-9.
    """
    if zero_tol <= 0:
        raise ValueError("zero_tol must be positive")
    pos = as_configuration(config)
    params = params or ModelParams(len(pos))
    gnorm = float(np.linalg.norm(gradient(pos, params)))
    if not gnorm < STATIONARY_TOL:
        raise NotStationaryError(f"gradient norm {gnorm:.3g} exceeds {STATIONARY_TOL:g}")
    return spectrum_from_hessian(hessian(pos, params), zero_tol)


def spectrum_from_hessian(h: np.ndarray, zero_tol: float = 1e-6) -> StabilitySpectrum:
    vals, vecs = np.linalg.eigh(h)
    resid = np.linalg.norm(h @ vecs - vecs * vals, axis=0)
    if resid.max(initial=0.0) > RESIDUAL_TOL * max(1.0, np.abs(vals).max(initial=0.0)):
        raise np.linalg.LinAlgError(f"eigen residual {resid.max():.3g} too large")
    classes = np.where(vals < -zero_tol, UNSTABLE, np.where(vals > zero_tol, STABLE, ZERO))
    lyap = np.sqrt(-vals[classes == UNSTABLE])
    spec = StabilitySpectrum(
        eigenvalues=vals,
        eigenvectors=vecs,
        zero_tol=zero_tol,
        classes=classes,
        lyapunov=lyap,
        n_electrons=h.shape[0] // 3,
    )
    if spec.n_unstable == 0:
        return spec
    idx, overlaps, ambiguous = _pick_reaction(spec)
    return StabilitySpectrum(
        eigenvalues=vals,
        eigenvectors=vecs,
        zero_tol=zero_tol,
        classes=classes,
        lyapunov=lyap,
        n_electrons=spec.n_electrons,
        reaction_index=idx,
        reaction_overlaps=overlaps,
        ambiguous=ambiguous,
    )


def _pick_reaction(spec):
    n = spec.n_electrons
    t = np.zeros((n, 3))
    t[:, 2] = 1.0
    t = t.ravel() / np.sqrt(n)
    unstable = spec.unstable_indices
    vecs = spec.eigenvectors[:, unstable]
    overlaps = np.abs(t @ vecs) / np.linalg.norm(vecs, axis=0)
    best = int(np.argmax(overlaps))
    zcomp = vecs[:, best].reshape(n, 3)[:, 2]
    ambiguous = not (np.all(zcomp > 0) or np.all(zcomp < 0))
    return int(unstable[best]), overlaps, ambiguous


def reaction_coordinate(spectrum: StabilitySpectrum) -> int:
    """Index (into ``spectrum.eigenvalues``) of the reaction coordinate.

    The unstable eigenvector with the largest overlap with a uniform
    displacement of all electrons along the field.  Warns with
    :class:`AmbiguousReactionCoordinate` if its z-components do not all share
    one sign.
    """
    if spectrum.n_unstable == 0:
        raise ReactionCoordinateError("no unstable direction")
    idx, _, ambiguous = _pick_reaction(spectrum)
    if ambiguous:
        warnings.warn("reaction coordinate z-components change sign", AmbiguousReactionCoordinate)
    return idx


def exponents(spectrum: StabilitySpectrum) -> ExponentReport:
    if spectrum.reaction_index is None:
        raise ReactionCoordinateError("no unstable direction")
    unstable = spectrum.unstable_indices
    pos = int(np.flatnonzero(unstable == spectrum.reaction_index)[0])
    lambda_r = float(spectrum.lyapunov[pos])
    others = np.delete(spectrum.lyapunov, pos)
    return ExponentReport(
        lambda_r=lambda_r,
        n_u=len(others),
        mu=float(np.sum(others) / lambda_r),
        lambdas=tuple(float(v) for v in others),
    )
