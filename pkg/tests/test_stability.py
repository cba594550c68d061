import warnings

import numpy as np
import pytest

from fieldsaddles.model import ModelParams, hessian
from fieldsaddles.ring import ring_plus_center_saddle, ring_saddle
from fieldsaddles.stability import (
    AmbiguousReactionCoordinate,
    NotStationaryError,
    ReactionCoordinateError,
    analyze,
    exponents,
    reaction_coordinate,
    spectrum_from_hessian,
)

from reference_values import RING, RING_CENTER


def _check_row(rep, row):
    _, n_u, lam, mu = row[:4]
    assert rep.n_u == n_u
    assert rep.lambda_r == pytest.approx(lam, abs=1e-3)
    assert rep.mu == pytest.approx(mu, abs=1e-3)


@pytest.mark.parametrize("n", sorted(RING))
def test_ring_exponents(n):
    spec = analyze(ring_saddle(n).positions())
    _check_row(exponents(spec), RING[n])
    assert spec.n_zero == 1
    assert not spec.ambiguous


@pytest.mark.parametrize("n", sorted(RING_CENTER))
def test_ring_center_exponents(n):
    spec = analyze(ring_plus_center_saddle(n).positions())
    _check_row(exponents(spec), RING_CENTER[n])
    assert spec.n_zero == 1


def test_two_electron_spectrum_counts():
    spec = analyze(ring_saddle(2).positions())
    assert (spec.n_unstable, spec.n_zero, spec.n_stable) == (2, 1, 3)
    rep = exponents(spec)
    # the single non-reaction exponent is mu * lambda_r of the table row
    assert rep.lambdas[0] == pytest.approx(1.2918 * 1.2139, abs=2e-3)
    assert rep.lambdas[0] == pytest.approx(rep.mu * rep.lambda_r, rel=1e-12)


def test_eigen_residuals():
    pos = ring_plus_center_saddle(7).positions()
    h = hessian(pos)
    spec = analyze(pos)
    for val, vec in zip(spec.eigenvalues, spec.eigenvectors.T):
        assert np.linalg.norm(h @ vec - val * vec) < 1e-9
    assert np.all(np.diff(spec.eigenvalues) >= 0)


def test_mu_identity():
    for n in range(2, 9):
        spec = analyze(ring_saddle(n).positions())
        rep = exponents(spec)
        others = [l for i, l in zip(spec.unstable_indices, spec.lyapunov) if i != spec.reaction_index]
        assert rep.mu == pytest.approx(sum(others) / rep.lambda_r, rel=1e-12)
        assert rep.n_u == spec.n_unstable - 1


def test_reaction_coordinate_is_uniform_z():
    spec = analyze(ring_saddle(4).positions())
    idx = reaction_coordinate(spec)
    assert idx == spec.reaction_index
    assert spec.classes[idx] == -1
    vec = spec.eigenvectors[:, idx].reshape(4, 3)
    assert np.all(np.sign(vec[:, 2]) == np.sign(vec[0, 2]))
    assert spec.reaction_overlaps.max() == pytest.approx(
        spec.reaction_overlaps[list(spec.unstable_indices).index(idx)]
    )


def test_spectrum_invariant_under_symmetry():
    pos = ring_plus_center_saddle(6).positions()
    base = analyze(pos).eigenvalues
    c, s = np.cos(0.37), np.sin(0.37)
    moved = pos @ np.array([[c, s, 0], [-s, c, 0], [0, 0, 1]])
    moved[:, 1] *= -1
    moved = moved[np.random.default_rng(0).permutation(6)]
    assert np.abs(analyze(moved).eigenvalues - base).max() < 1e-9


def test_rejects_non_stationary():
    pos = ring_saddle(3).positions() + 1e-3
    with pytest.raises(NotStationaryError):
        analyze(pos)


def test_no_unstable_direction():
    spec = spectrum_from_hessian(np.eye(6))
    assert spec.reaction_index is None
    with pytest.raises(ReactionCoordinateError):
        reaction_coordinate(spec)
    with pytest.raises(ReactionCoordinateError):
        exponents(spec)


def test_ambiguous_reaction_flagged():
    # the single unstable mode moves the two electrons in opposite z directions
    h = np.diag([1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    v = np.zeros(6)
    v[2], v[5] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    h -= 3.0 * np.outer(v, v)
    spec = spectrum_from_hessian(h)
    assert spec.ambiguous
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        reaction_coordinate(spec)
    assert any(issubclass(w.category, AmbiguousReactionCoordinate) for w in caught)


def test_zero_tol_validation():
    with pytest.raises(ValueError):
        analyze(ring_saddle(2).positions(), ModelParams(2), zero_tol=0.0)
