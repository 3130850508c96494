"""Tests for marginal verification and the Dykstra extension search."""

from __future__ import annotations

import numpy as np
import pytest

import bellforge as bf
from bellforge.extensions import (
    _embed_identity_at,
    _project_density,
    _project_marginal,
    _ptrace_raw,
    marginals_satisfied,
)


def random_hermitian(rng: np.random.Generator, side: int) -> np.ndarray:
    g = rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))
    return (g + g.conj().T) / 2.0


def random_density(rng: np.random.Generator, side: int) -> np.ndarray:
    g = rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))
    m = g @ g.conj().T
    return m / np.trace(m).real


# -------------------------------------------------------------------- patterns


def test_pattern_validation():
    w = bf.werner(2)
    with pytest.raises(ValueError, match="between 1 and 3"):
        bf.MarginalPattern(())
    with pytest.raises(ValueError, match="distinct"):
        bf.MarginalPattern(((2, w), (2, w)))
    with pytest.raises(ValueError, match="distinct"):
        bf.MarginalPattern(((4, w), (1, w)))
    with pytest.raises(ValueError, match="different spaces"):
        bf.MarginalPattern(((1, w), (2, bf.werner(3))))


def test_pattern_rejects_non_bipartite_targets():
    tri = bf.DensityOperator((1.0 / 8.0) * bf.identity((2, 2, 2)))
    with pytest.raises(ValueError, match="bipartite"):
        bf.MarginalPattern(((1, tri),))


def test_pattern_helpers():
    w = bf.werner(3)
    sym = bf.pattern_sym3(w)
    right = bf.pattern_right2(w)
    assert [j for j, _ in sym.constraints] == [1, 2, 3]
    assert [j for j, _ in right.constraints] == [2, 3]
    assert sym.local_dim == 3
    assert right.local_dim == 3


# ---------------------------------------------------------- verify_marginals


def test_verify_marginals_on_known_source_operators():
    res2 = bf.verify_marginals(bf.dso_two_qubit().op, bf.pattern_right2(bf.werner(2)))
    assert max(res2) <= 1e-13
    res3 = bf.verify_marginals(bf.dso_general(3).op, bf.pattern_sym3(bf.werner(3)))
    assert max(res3) <= 1e-13
    assert len(res3) == 3


def test_verify_marginals_detects_mismatch():
    t = (1.0 / 27.0) * bf.identity((3, 3, 3))
    res = bf.verify_marginals(t, bf.pattern_sym3(bf.werner(3)))
    assert min(res) > 1e-2


def test_verify_marginals_rejects_wrong_space():
    with pytest.raises(ValueError, match="do not match"):
        bf.verify_marginals(bf.identity((2, 2, 2)), bf.pattern_sym3(bf.werner(3)))


def test_marginals_satisfied():
    assert marginals_satisfied(bf.dso_general(3).op, bf.pattern_sym3(bf.werner(3)))
    shifted = bf.dso_general(3).op + 1e-3 * bf.identity((3, 3, 3))
    assert not marginals_satisfied(shifted, bf.pattern_sym3(bf.werner(3)))


# ------------------------------------------------------------ raw projections


def test_embed_identity_matches_reordered_kron():
    rng = np.random.default_rng(41)
    d = 3
    b = random_hermitian(rng, d * d)
    for slot, order in ((1, (3, 1, 2)), (2, (1, 3, 2)), (3, (1, 2, 3))):
        embedded = _embed_identity_at(b, d, slot)
        reference = bf.reorder_factors(
            bf.kron(bf.TensorOperator(b, (d, d)), bf.identity((d,))), order
        )
        assert np.max(np.abs(embedded - reference.entries)) <= 1e-13
        # tracing the identity slot recovers d * b
        back = _ptrace_raw(embedded, d, slot)
        assert np.max(np.abs(back - d * b)) <= 1e-12


def test_marginal_projection_is_exact_and_idempotent():
    rng = np.random.default_rng(42)
    d = 3
    target = random_density(rng, d * d)
    for j in (1, 2, 3):
        x = random_hermitian(rng, d**3)
        proj = _project_marginal(x, d, j, target)
        assert np.max(np.abs(_ptrace_raw(proj, d, j) - target)) <= 1e-12
        again = _project_marginal(proj, d, j, target)
        assert np.max(np.abs(again - proj)) <= 1e-12


def test_marginal_projection_is_orthogonal():
    """The residual x - P(x) is orthogonal to differences of feasible points."""
    rng = np.random.default_rng(43)
    d = 2
    target = random_density(rng, d * d)
    x = random_hermitian(rng, d**3)
    proj = _project_marginal(x, d, 2, target)
    for _ in range(3):
        u = _project_marginal(random_hermitian(rng, d**3), d, 2, target)
        v = _project_marginal(random_hermitian(rng, d**3), d, 2, target)
        inner = np.trace((x - proj).conj().T @ (u - v))
        assert abs(inner) <= 1e-10


def test_density_projection_returns_density_and_is_idempotent():
    rng = np.random.default_rng(44)
    x = random_hermitian(rng, 8)
    p = _project_density(x)
    asym, trace_err, neg = bf.density_deficits(bf.TensorOperator(p, (2, 2, 2)))
    assert asym <= 1e-13 and trace_err <= 1e-12 and neg <= 1e-12
    again = _project_density(p)
    assert np.max(np.abs(again - p)) <= 1e-12


def test_density_projection_is_nonexpansive_toward_densities():
    rng = np.random.default_rng(45)
    for _ in range(5):
        x = random_hermitian(rng, 6)
        witness = random_density(rng, 6)
        px = _project_density(x)
        assert np.linalg.norm(px - witness) <= np.linalg.norm(x - witness) + 1e-12


def test_density_projection_picks_nearest_point():
    rng = np.random.default_rng(46)
    x = random_hermitian(rng, 5)
    px = _project_density(x)
    for _ in range(10):
        other = random_density(rng, 5)
        assert np.linalg.norm(x - px) <= np.linalg.norm(x - other) + 1e-12


# ------------------------------------------------------------------- dykstra


def test_dykstra_finds_symmetric_extension_of_werner3():
    w = bf.werner(3)
    result = bf.dykstra_find_extension(w, bf.pattern_sym3(w), max_iters=5000, tol=1e-6)
    assert result.converged
    assert result.residual <= 1e-6
    assert result.iterations <= 5000
    assert result.candidate.factor_dims == (3, 3, 3)
    assert max(bf.verify_marginals(result.candidate, bf.pattern_sym3(w))) <= 2e-6
    asym, trace_err, neg = bf.density_deficits(result.candidate)
    assert asym <= 1e-12 and trace_err <= 1e-10 and neg <= 1e-10
    assert result.iterations == len(result.residual_trace)


def test_dykstra_finds_right_extension_of_werner2():
    w = bf.werner(2)
    result = bf.dykstra_find_extension(w, bf.pattern_right2(w), max_iters=500, tol=1e-8)
    assert result.converged
    assert result.residual <= 1e-8


def test_dykstra_reports_failure_on_singlet_monogamy():
    s = bf.singlet()
    result = bf.dykstra_find_extension(s, bf.pattern_right2(s), max_iters=400, tol=1e-6)
    assert not result.converged
    assert result.residual >= 1e-2
    assert result.iterations == 400


def test_dykstra_residual_trace_samples_non_increasing():
    w = bf.werner(3)
    feasible = bf.dykstra_find_extension(w, bf.pattern_sym3(w), max_iters=5000, tol=1e-12)
    s = bf.singlet()
    stuck = bf.dykstra_find_extension(s, bf.pattern_right2(s), max_iters=1000, tol=1e-12)
    for trace in (feasible.residual_trace, stuck.residual_trace):
        samples = trace[::50]
        for earlier, later in zip(samples, samples[1:]):
            assert later <= earlier + 1e-9


def test_dykstra_is_deterministic():
    w = bf.werner(3)
    a = bf.dykstra_find_extension(w, bf.pattern_sym3(w), max_iters=200, tol=1e-7)
    b = bf.dykstra_find_extension(w, bf.pattern_sym3(w), max_iters=200, tol=1e-7)
    assert a.residual == b.residual
    assert a.iterations == b.iterations
    np.testing.assert_array_equal(a.candidate.entries, b.candidate.entries)


def test_dykstra_rejects_mismatched_target():
    w2 = bf.werner(2)
    s = bf.singlet()
    with pytest.raises(ValueError, match="differs from rho"):
        bf.dykstra_find_extension(w2, bf.pattern_right2(s), max_iters=10, tol=1e-6)


def test_dykstra_rejects_wrong_state_space():
    with pytest.raises(ValueError, match="do not match"):
        bf.dykstra_find_extension(bf.werner(3), bf.pattern_right2(bf.werner(2)), 10, 1e-6)


def test_dykstra_rejects_large_dimension():
    w7 = bf.werner(7)
    with pytest.raises(ValueError, match="exceeds"):
        bf.dykstra_find_extension(w7, bf.pattern_sym3(w7), max_iters=10, tol=1e-6)


def test_dykstra_rejects_bad_iteration_count():
    w = bf.werner(2)
    with pytest.raises(ValueError, match="positive"):
        bf.dykstra_find_extension(w, bf.pattern_right2(w), max_iters=0, tol=1e-6)
