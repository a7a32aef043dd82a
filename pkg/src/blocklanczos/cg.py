"""Two block conjugate gradient variants and the trace error metric.

`hs_bcg` is the classical block CG: coupled two-term recurrences with
p x p Gram solves for the step and direction updates, plus an optional
per-iteration scaling policy for the direction block. `dr_bcg` replaces
the residual block by its orthonormal QR factor every iteration, carrying
the triangular factor separately, which keeps the inner solves well
conditioned when residual columns start to align.

Both record the A-norm trace error against a direct reference solution at
every iteration and halt (with the partial history preserved) when an
inner solve goes numerically singular.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import RankDeficient, SingularInnerSolve
from .linalg import householder_qr, panel_norm, reorthogonalize, sym_norm


def trace_error(x: np.ndarray, x_star: np.ndarray, x0: np.ndarray, a: np.ndarray) -> float:
    """Relative A-norm error aggregated over the block by traces.

    sqrt(trace((x*-x)^T A (x*-x))) / sqrt(trace((x*-x0)^T A (x*-x0)))

    Returns 1 at the initial guess and 0 at the solution. Tiny negative
    traces from rounding are clipped to zero before the square roots.
    """
    err = x_star - x
    err0 = x_star - x0
    num = max(float(np.sum(err * (a @ err))), 0.0)
    den = max(float(np.sum(err0 * (a @ err0))), 0.0)
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return float(np.sqrt(num) / np.sqrt(den))


@dataclass
class CgHistory:
    """Record of a block CG run.

    errors[k] is the trace error after k iterations (errors[0] belongs to
    x0). ref_residual reports the relative residual of the direct
    reference solution itself; the error curve cannot be trusted below
    that level. failure is None for a clean run, otherwise a short reason
    for halting early.
    """

    variant: str
    exact_mode: bool
    errors: np.ndarray
    final_residual_norms: np.ndarray
    x: np.ndarray
    n_iter: int
    ref_residual: float
    failure: str | None = None

    def first_below(self, level: float):
        """Smallest iteration count reaching the given trace error, or None."""
        hits = np.nonzero(self.errors <= level)[0]
        return int(hits[0]) if hits.size else None


def _reference_solution(a, b):
    factor = scipy.linalg.cho_factor(a, lower=True)
    x_star = scipy.linalg.cho_solve(factor, b)
    denom = float(np.linalg.norm(b))
    resid = float(np.linalg.norm(b - a @ x_star)) / denom if denom > 0.0 else 0.0
    return x_star, resid


def _gram_singular(gram, a_norm, block) -> bool:
    if not np.all(np.isfinite(gram)):
        return True
    svals = np.linalg.svd(gram, compute_uv=False)
    return float(svals.min()) < 1e-14 * a_norm * panel_norm(block) ** 2


def _finish(history_kwargs, a, b, x):
    res = b - a @ x
    history_kwargs["final_residual_norms"] = np.linalg.norm(res, axis=0)
    history_kwargs["x"] = x
    return CgHistory(**history_kwargs)


def hs_bcg(
    a: np.ndarray,
    b: np.ndarray,
    x0: np.ndarray | None = None,
    maxit: int | None = None,
    phi_policy=None,
) -> CgHistory:
    """Classical block CG for SPD ``a`` and block right-hand side ``b``.

    phi_policy, when given, is a callable mapping the iteration index k
    (0-based, 0 for the initial direction block) to an invertible p x p
    scaling applied to the new direction block; None means identity
    throughout.

    A numerically singular inner Gram system (smallest singular value of
    p^T A p below 1e-14 * norm(a) * norm(p)^2, or a failed Cholesky of a
    residual Gram matrix) halts the run at the current iterate; the
    history is returned with ``failure`` set. SingularInnerSolve is raised
    only when not even one iteration could run.
    """
    n = a.shape[0]
    p = b.shape[1]
    if x0 is None:
        x0 = np.zeros((n, p))
    if maxit is None:
        maxit = n
    if phi_policy is None:
        phi_policy = lambda k: np.eye(p)  # noqa: E731

    a_norm = sym_norm(a)
    x_star, ref_residual = _reference_solution(a, b)
    base = dict(variant="hs", exact_mode=False, ref_residual=ref_residual)

    x = x0.copy()
    r = b - a @ x
    phi_prev = phi_policy(0)
    p_dir = r @ phi_prev
    errors = [trace_error(x, x_star, x0, a)]

    failure = None
    for k in range(1, maxit + 1):
        if not np.all(np.isfinite(p_dir)) or float(np.max(np.abs(p_dir))) > 1e150:
            failure = "direction block diverged at iteration %d" % k
            break
        ap = a @ p_dir
        gram = p_dir.T @ ap
        gram = 0.5 * (gram + gram.T)
        if _gram_singular(gram, a_norm, p_dir):
            failure = "singular direction Gram block at iteration %d" % k
            break
        rr_prev = r.T @ r
        try:
            gram_factor = scipy.linalg.cho_factor(gram, lower=True)
            gamma = scipy.linalg.cho_solve(gram_factor, phi_prev.T @ rr_prev)
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError):
            failure = "singular inner solve at iteration %d" % k
            break
        x = x + p_dir @ gamma
        r = r - ap @ gamma
        errors.append(trace_error(x, x_star, x0, a))
        try:
            rr_factor = scipy.linalg.cho_factor(0.5 * (rr_prev + rr_prev.T), lower=True)
            delta = np.linalg.solve(phi_prev, scipy.linalg.cho_solve(rr_factor, r.T @ r))
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError):
            failure = "singular residual Gram block at iteration %d" % k
            break
        phi_prev = phi_policy(k)
        p_dir = (r + p_dir @ delta) @ phi_prev

    if failure is not None and len(errors) == 1:
        raise SingularInnerSolve(failure)
    base.update(errors=np.array(errors), n_iter=len(errors) - 1, failure=failure)
    return _finish(base, a, b, x)


def dr_bcg(
    a: np.ndarray,
    b: np.ndarray,
    x0: np.ndarray | None = None,
    maxit: int | None = None,
    exact_mode: bool = False,
) -> CgHistory:
    """Block CG with an orthonormalized residual basis.

    The residual block is QR-factored every iteration: the orthonormal
    factor drives the recurrence while the triangular factor accumulates
    into the step scaling. With ``exact_mode`` the new residual basis is
    reorthogonalized (two passes) against every previous one before its QR,
    an exact-arithmetic stand-in used to compare against plain runs.

    Same halting contract as `hs_bcg`.
    """
    n = a.shape[0]
    p = b.shape[1]
    if x0 is None:
        x0 = np.zeros((n, p))
    if maxit is None:
        maxit = n

    a_norm = sym_norm(a)
    x_star, ref_residual = _reference_solution(a, b)
    base = dict(variant="dr", exact_mode=exact_mode, ref_residual=ref_residual)

    x = x0.copy()
    w, sigma = householder_qr(b - a @ x)
    s = w.copy()
    basis = None
    cols = 0
    if exact_mode:
        basis = np.empty((n, (maxit + 1) * p))
        basis[:, :p] = w
        cols = p
    errors = [trace_error(x, x_star, x0, a)]

    failure = None
    for k in range(1, maxit + 1):
        if not np.all(np.isfinite(s)) or float(np.max(np.abs(s))) > 1e150:
            failure = "direction block diverged at iteration %d" % k
            break
        as_ = a @ s
        gram = s.T @ as_
        gram = 0.5 * (gram + gram.T)
        if _gram_singular(gram, a_norm, s):
            failure = "singular direction Gram block at iteration %d" % k
            break
        try:
            gram_factor = scipy.linalg.cho_factor(gram, lower=True)
            xi = scipy.linalg.cho_solve(gram_factor, np.eye(p))
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError):
            failure = "singular inner solve at iteration %d" % k
            break
        x = x + s @ (xi @ sigma)
        errors.append(trace_error(x, x_star, x0, a))
        if exact_mode and cols + p > n:
            # the reorthogonalized basis spans all of R^n; the method has
            # nothing left to search and further steps would be noise
            failure = "search space exhausted at iteration %d" % k
            break
        wt = w - as_ @ xi
        if exact_mode:
            wt = reorthogonalize(wt, basis[:, :cols])
        try:
            w_new, zeta = householder_qr(wt)
        except RankDeficient:
            failure = "residual basis closed at iteration %d" % k
            break
        s = w_new + s @ zeta.T
        sigma = zeta @ sigma
        w = w_new
        if exact_mode:
            basis[:, cols : cols + p] = w
            cols += p

    if failure is not None and len(errors) == 1:
        raise SingularInnerSolve(failure)
    base.update(errors=np.array(errors), n_iter=len(errors) - 1, failure=failure)
    return _finish(base, a, b, x)
