"""Driver invariants, termination, diagnostics, and Ritz analysis."""

import numpy as np
import pytest

from blocklanczos import (
    NotSymmetric,
    RankDeficientStart,
    ShapeMismatch,
    densify,
    recurrence_diagnostics,
    ritz_analysis,
    run_block_lanczos,
    spectrum_to_matrix,
    stack_panels,
    strakos48,
    strakos_spectrum,
)
from conftest import rand_spd

EPS = float(np.finfo(float).eps)


def test_exact_mode_reproduces_the_operator():
    a, eigs, rng = rand_spd(24, 21)
    v = rng.standard_normal((24, 3))
    run = run_block_lanczos(a, v, k_max=8, mode="simulated_exact")
    assert run.n_steps == 8 and run.width == 3
    basis = stack_panels(run.panels[:8])
    assert np.linalg.norm(basis.T @ basis - np.eye(24)) < 1e-13
    t = densify(run.t)
    assert np.linalg.norm(t - basis.T @ a @ basis) < 1e-12 * run.a_norm
    # full depth: the block tridiagonal is orthogonally similar to a
    assert np.allclose(np.linalg.eigvalsh(t), eigs, atol=1e-10 * run.a_norm)
    for r in run.t.betas:
        assert np.allclose(r, np.triu(r)) and np.all(np.diag(r) > 0)


def test_capped_run_keeps_trailing_panel():
    a, _, rng = rand_spd(30, 22)
    v = rng.standard_normal((30, 2))
    run = run_block_lanczos(a, v, k_max=5)
    assert not run.terminated
    assert run.n_steps == 5
    assert len(run.panels) == 6
    assert run.beta_next.shape == (2, 2)
    # the trailing coupling closes the recurrence for the last step
    j = 5
    res = (
        a @ run.panels[j - 1]
        - run.panels[j - 1] @ run.t.alphas[j - 1]
        - run.panels[j - 2] @ run.t.betas[j - 2].T
        - run.panels[j] @ run.beta_next
    )
    assert np.linalg.norm(res) < 1e-12 * run.a_norm


def test_natural_termination_on_invariant_subspace():
    a, eigs, rng = rand_spd(16, 23)
    _, u = np.linalg.eigh(a)
    # start inside the span of four eigenvectors: the recurrence must
    # close after two width-2 steps
    v = u[:, :4] @ rng.standard_normal((4, 2))
    run = run_block_lanczos(a, v, k_max=8, mode="simulated_exact")
    assert run.terminated
    assert run.n_steps == 2
    assert len(run.panels) == 2
    assert np.linalg.norm(run.beta_next) < run.breakdown_tol * run.a_norm * 10
    rs = ritz_analysis(run, 2)
    assert np.allclose(np.sort(rs.thetas), eigs[:4], atol=1e-10)
    last = run.diagnostics[-1]
    assert last.local_orth == 0.0 and last.global_orth == 0.0


def test_input_validation():
    a, _, rng = rand_spd(12, 24)
    v = rng.standard_normal((12, 2))
    bad = a.copy()
    bad[0, 1] += 1e-6
    with pytest.raises(NotSymmetric):
        run_block_lanczos(bad, v, k_max=2)
    with pytest.raises(ShapeMismatch):
        run_block_lanczos(np.ones((3, 4)), v, k_max=1)
    with pytest.raises(ShapeMismatch):
        run_block_lanczos(a, v[:, 0], k_max=2)
    with pytest.raises(ShapeMismatch):
        run_block_lanczos(a, v[:5], k_max=2)
    with pytest.raises(ShapeMismatch):
        run_block_lanczos(a, v[:, :0], k_max=2)
    with pytest.raises(ValueError):
        run_block_lanczos(a, v, k_max=0)
    with pytest.raises(ValueError):
        run_block_lanczos(a, v, k_max=7)  # 7 * 2 > 12
    with pytest.raises(ValueError):
        run_block_lanczos(a, v, k_max=2, mode="fast")
    dep = np.hstack([v[:, :1], v[:, :1]])
    with pytest.raises(RankDeficientStart):
        run_block_lanczos(a, dep, k_max=2)


def test_diagnostics_match_direct_recomputation():
    a, _, rng = rand_spd(20, 25)
    v = rng.standard_normal((20, 2))
    run = run_block_lanczos(a, v, k_max=6)
    rows = recurrence_diagnostics(run)
    assert [r.j for r in rows] == [1, 2, 3, 4, 5, 6]
    r3 = rows[2]
    res = (
        a @ run.panels[2]
        - run.panels[2] @ run.t.alphas[2]
        - run.panels[1] @ run.t.betas[1].T
        - run.panels[3] @ run.t.betas[2]
    )
    assert np.isclose(r3.delta_v_norm, np.linalg.norm(res, 2), rtol=1e-12)
    assert np.isclose(
        r3.normality,
        np.linalg.norm(run.panels[2].T @ run.panels[2] - np.eye(2), 2),
        rtol=1e-12,
    )
    assert np.isclose(r3.beta_norm, np.linalg.norm(run.t.betas[2], 2), rtol=1e-12)


def test_finite_precision_loses_global_orthogonality():
    spec = strakos48(0.1, 100.0)
    a, _ = spectrum_to_matrix(strakos_spectrum(spec), 1)
    v = np.random.default_rng(1).standard_normal((48, 2))
    fp = run_block_lanczos(a, v, k_max=24, mode="finite_precision")
    ex = run_block_lanczos(a, v, k_max=24, mode="simulated_exact")
    assert max(r.global_orth for r in fp.diagnostics) > 1e-6
    assert max(r.global_orth for r in ex.diagnostics) < 1e-12


def test_finite_precision_local_quantities_stay_at_roundoff():
    # global orthogonality decays, but the three local measures must sit
    # near machine precision scaled by the operator norm
    spec = strakos48(0.1, 100.0)
    a, _ = spectrum_to_matrix(strakos_spectrum(spec), 1)
    v = np.random.default_rng(1).standard_normal((48, 2))
    run = run_block_lanczos(a, v, k_max=24)
    band = 10.0 * 48 * 2 * EPS
    for r in run.diagnostics:
        assert r.delta_v_norm <= band * run.a_norm
        assert r.normality <= band
        assert r.local_orth <= band * run.a_norm


def test_ritz_analysis_exact_mode():
    a, _, rng = rand_spd(18, 26)
    v = rng.standard_normal((18, 2))
    run = run_block_lanczos(a, v, k_max=6, mode="simulated_exact")
    rs = ritz_analysis(run, 4)
    assert rs.k == 4 and rs.thetas.shape == (8,)
    assert np.all(np.diff(rs.thetas) >= 0)
    assert np.allclose(rs.z_norms, 1.0, atol=1e-12)
    assert np.array_equal(rs.sigma, rs.s[6:8, :])
    want = np.linalg.norm(run.t.betas[3] @ rs.sigma, axis=0)
    assert np.allclose(rs.deltas, want, rtol=1e-13)
    # with orthonormal panels the classical bound is the residual norm
    for i in range(8):
        resid = np.linalg.norm(a @ rs.z[:, i] - rs.thetas[i] * rs.z[:, i])
        assert np.isclose(resid, rs.deltas[i], rtol=1e-6, atol=1e-10)
    assert np.all(rs.fp_bounds >= rs.deltas / rs.z_norms - 1e-15)


def test_ritz_analysis_k_range():
    a, _, rng = rand_spd(12, 27)
    run = run_block_lanczos(a, rng.standard_normal((12, 2)), k_max=4)
    with pytest.raises(ValueError):
        ritz_analysis(run, 0)
    with pytest.raises(ValueError):
        ritz_analysis(run, 5)
    rs = ritz_analysis(run, 4)
    # at the full run length the trailing stored coupling is used
    want = np.linalg.norm(run.beta_next @ rs.sigma, axis=0)
    assert np.allclose(rs.deltas, want, rtol=1e-13)
