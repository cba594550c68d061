"""Equivalence and symmetry of configurations about the field axis.

The relevant group is generated by rotations about z, reflections through
planes containing z, and relabelling of electrons.  Two tools are used:

* an invariant vector (per-electron ``(z, rho)`` pairs sorted, followed by
  the sorted pair distances) that is cheap to compare and gauge free;
* an explicit alignment that searches rotation/reflection/permutation and is
  run whenever two invariant vectors agree, so that a coincidence of
  invariants cannot merge genuinely different configurations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import as_configuration

DEFAULT_TOL = 1e-5


@dataclass(frozen=True)
class CanonicalForm:
    invariant_key: tuple
    invariants: np.ndarray
    oriented_config: np.ndarray


@dataclass(frozen=True)
class SymmetryLabel:
    rotation_order: int
    has_mirror: bool

    def __str__(self):
        if self.has_mirror:
            return "Cv" if self.rotation_order == 1 else f"C{self.rotation_order}v"
        return f"C{self.rotation_order}"

    @classmethod
    def parse(cls, text: str) -> "SymmetryLabel":
        if not text.startswith("C"):
            raise ValueError(f"not a symmetry label: {text!r}")
        body = text[1:]
        mirror = body.endswith("v")
        digits = body[:-1] if mirror else body
        return cls(int(digits) if digits else 1, mirror)


def cylindrical(pos: np.ndarray):
    pos = np.asarray(pos, dtype=float)
    rho = np.hypot(pos[..., 0], pos[..., 1])
    phi = np.arctan2(pos[..., 1], pos[..., 0])
    return rho, phi, pos[..., 2]


def invariants(pos: np.ndarray) -> np.ndarray:
    """Invariant vector(s) for one ``(N, 3)`` or a batch ``(B, N, 3)``."""
    pos = np.asarray(pos, dtype=float)
    single = pos.ndim == 2
    if single:
        pos = pos[None]
    b, n, _ = pos.shape
    rho, _, z = cylindrical(pos)
    order = np.lexsort((rho, z), axis=-1) if b else np.zeros((0, n), int)
    zs = np.take_along_axis(z, order, axis=1)
    rs = np.take_along_axis(rho, order, axis=1)
    iu, ju = np.triu_indices(n, 1)
    dist = np.linalg.norm(pos[:, iu] - pos[:, ju], axis=-1)
    dist.sort(axis=1)
    out = np.concatenate([zs, rs, dist], axis=1)
    return out[0] if single else out


def _key(inv: np.ndarray, tol: float) -> tuple:
    quantum = tol / 10.0
    return tuple(float(v) for v in np.round(inv / quantum) * quantum)


def _orient(pos: np.ndarray) -> np.ndarray:
    rho, phi, z = cylindrical(pos)
    anchor = max(range(len(pos)), key=lambda i: (rho[i], z[i]))
    rel = phi - phi[anchor]
    choices = []
    for sign in (1.0, -1.0):
        ang = np.mod(sign * rel, 2.0 * np.pi)
        ang[rho == 0.0] = 0.0
        choices.append((tuple(np.sort(ang)), ang))
    ang = min(choices, key=lambda c: c[0])[1]
    out = np.column_stack([rho * np.cos(ang), rho * np.sin(ang), z])
    order = np.lexsort((ang, rho, z))
    return out[order]


def canonicalize(config, tol: float = DEFAULT_TOL) -> CanonicalForm:
    """Gauge-fixed representative and rounded invariant key.

    The invariant key is exactly unchanged by relabelling, rotation about
    the field axis and axial reflection, up to rounding at ``tol / 10``.
    The oriented configuration puts the electron with the largest
    ``(rho, z)`` at azimuth zero and resolves the reflection by the
    lexicographically smaller set of azimuths.
    """
    pos = as_configuration(config)
    inv = invariants(pos)
    return CanonicalForm(invariant_key=_key(inv, tol), invariants=inv, oriented_config=_orient(pos))


def _match_sets(a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    """Batched check that point set ``a[k]`` equals ``b`` (or ``b[k]``) within tol."""
    d = np.linalg.norm(a[:, :, None, :] - b[..., None, :, :], axis=-1)
    nearest = d.argmin(axis=2)
    close = d.min(axis=2).max(axis=1) <= tol
    n = a.shape[1]
    bijective = np.all(np.sort(nearest, axis=1) == np.arange(n), axis=1)
    return close & bijective


def _rotate(pos, angle, sign=1.0):
    """Reflect y -> sign*y, then rotate by ``angle`` (scalar or per batch row)."""
    angle = np.asarray(angle, dtype=float)[..., None]
    x = pos[..., 0]
    y = sign * pos[..., 1]
    c, s = np.cos(angle), np.sin(angle)
    return np.stack([c * x - s * y, s * x + c * y, pos[..., 2]], axis=-1)


def aligned_batch(candidates: np.ndarray, ref: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """For each ``(N, 3)`` candidate, is there a group element mapping it onto ``ref``?"""
    cand = np.asarray(candidates, dtype=float)
    ref = np.asarray(ref, dtype=float)
    b, n, _ = cand.shape
    out = np.zeros(b, bool)
    if b == 0:
        return out
    rho, phi, z = cylindrical(cand)
    rrho, rphi, rz = cylindrical(ref)
    rows = np.arange(b)
    anchor = rho.argmax(axis=1)
    a_rho, a_phi, a_z = rho[rows, anchor], phi[rows, anchor], z[rows, anchor]
    on_axis = a_rho <= tol
    if np.any(on_axis):
        # everything on the axis: only the z values matter
        zs = np.sort(z[on_axis], axis=1)
        same = np.abs(zs - np.sort(rz)).max(axis=1) <= tol
        out[on_axis] = same & (rrho.max() <= tol)
    todo = ~on_axis
    for sign in (1.0, -1.0):
        for j in range(n):
            usable = todo & ~out & (np.abs(rrho[j] - a_rho) <= tol) & (np.abs(rz[j] - a_z) <= tol)
            if not np.any(usable):
                continue
            idx = np.flatnonzero(usable)
            moved = _rotate(cand[idx], rphi[j] - sign * a_phi[idx], sign)
            out[idx] |= _match_sets(moved, ref, tol)
    return out


def equivalent(a, b, tol: float = DEFAULT_TOL) -> bool:
    """True if ``a`` and ``b`` are related by a symmetry operation, within tol."""
    pa = as_configuration(a)
    pb = as_configuration(b)
    if pa.shape != pb.shape:
        return False
    if np.abs(invariants(pa) - invariants(pb)).max() > tol:
        return False
    return bool(aligned_batch(pa[None], pb, tol)[0])


def classify(config, tol: float = DEFAULT_TOL) -> SymmetryLabel:
    """Largest rotation order about the field axis and presence of a mirror plane."""
    pos = as_configuration(config)
    n = len(pos)
    rho, phi, z = cylindrical(pos)
    order = 1
    for k in range(2 * n, 1, -1):
        if _match_sets(_rotate(pos, 2.0 * np.pi / k)[None], pos, tol)[0]:
            order = k
            break
    anchor = int(rho.argmax())
    if rho[anchor] <= tol:
        return SymmetryLabel(order, True)
    mirror = False
    for j in range(n):
        if abs(rho[j] - rho[anchor]) > tol or abs(z[j] - z[anchor]) > tol:
            continue
        # plane at azimuth alpha maps phi -> 2 alpha - phi
        two_alpha = phi[anchor] + phi[j]
        if _match_sets(_rotate(pos, two_alpha, -1.0)[None], pos, tol)[0]:
            mirror = True
            break
    return SymmetryLabel(order, mirror)
