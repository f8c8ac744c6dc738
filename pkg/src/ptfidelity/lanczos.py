"""Lanczos iteration for complex symmetric matrices.

The iteration builds a Krylov basis orthogonal under the unconjugated
bilinear form ``<u, v> = sum_i u_i v_i``, which tridiagonalizes matrices
equal to their plain transpose.  Full reorthogonalization against the
stored basis removes ghost eigenvalues at the memory cost of keeping all
Krylov vectors; intended sector sizes stay well below ~1e6.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergenceError, QuasiNullBreakdownError


@dataclass
class LanczosResult:
    eigenvalue: complex
    vector: np.ndarray          # unit conventional norm, phase-fixed
    residual: float             # ||H x - E x||_2
    iterations: int
    restarts: int


def _resolve_apply(matrix):
    if callable(matrix):
        return matrix
    if hasattr(matrix, "apply"):
        return matrix.apply
    return lambda v: matrix @ v


def _bilinear(u, v):
    return np.dot(u, v)  # no conjugation


def _phase_fix(x):
    pivot = int(np.argmax(np.abs(x)))
    return x / (np.linalg.norm(x) * x[pivot] / abs(x[pivot]))


def _pick_target(theta, re_tie_tol):
    """Smallest-Re Ritz value; ties resolved toward larger Im so the +Im
    member of a PT pair is returned deterministically."""
    re_min = theta.real.min()
    tied = np.nonzero(theta.real <= re_min + re_tie_tol)[0]
    return int(tied[np.argmax(theta.imag[tied])])


def complex_symmetric_lanczos(
    matrix,
    dim: int,
    v0: np.ndarray | None = None,
    max_iter: int = 500,
    tol_resid: float = 1e-10,
    *,
    breakdown_guard: float = 1e-14,
    restart_max: int = 5,
    rng: np.random.Generator | None = None,
    ritz_interval: int = 10,
) -> LanczosResult:
    """Extremal eigenpair of a complex symmetric matrix.

    Returns the eigenpair whose eigenvalue has the smallest real part among
    converged Ritz values, tie-broken toward larger imaginary part.  The
    matching left covector is the unconjugated transpose of the returned
    right vector (complex symmetry).

    Parameters
    ----------
    matrix : callable, object with ``apply``, or anything supporting ``@``.
    dim : vector dimension.
    v0 : optional seed vector with nonzero quasi-norm ``<v, v>``.
    max_iter : Krylov dimension cap per attempt.
    tol_resid : target on the true residual ``||H x - E x||_2``.
    breakdown_guard : relative quasi-norm floor ``|<w,w>| / ||w||^2`` below
        which the iteration declares a quasi-null breakdown and restarts
        from a fresh random seed (up to ``restart_max`` times).

    Raises
    ------
    QuasiNullBreakdownError
        After ``restart_max`` quasi-null restarts.
    NoConvergenceError
        If the smallest-Re Ritz pair has not met ``tol_resid`` after
        ``max_iter`` iterations on the final attempt.
    """
    apply = _resolve_apply(matrix)
    if rng is None:
        rng = np.random.default_rng(0)

    def random_seed():
        return rng.standard_normal(dim) + 1j * rng.standard_normal(dim)

    last_error: Exception | None = None
    polish: np.ndarray | None = None
    polishes_left = 2
    attempt = 0
    while attempt <= restart_max:
        if polish is not None:
            seed = polish
            polish = None
        elif attempt == 0 and v0 is not None:
            seed = v0
        else:
            seed = random_seed()
        seed = np.asarray(seed, dtype=complex)
        if seed.shape != (dim,):
            raise ValueError(f"seed vector must have shape ({dim},)")
        try:
            return _lanczos_once(
                apply, dim, seed, max_iter, tol_resid,
                breakdown_guard, ritz_interval, attempt,
            )
        except QuasiNullBreakdownError as err:
            last_error = err
            attempt += 1
        except NoConvergenceError as err:
            # a long run can stall above the tolerance because Ritz vectors
            # assembled from a large quasi-orthogonal basis lose accuracy;
            # reseeding a fresh short Krylov space with the best candidate
            # polishes the vector from a well-conditioned basis
            best = getattr(err, "best_vector", None)
            if best is not None and polishes_left > 0:
                polishes_left -= 1
                polish = best
                continue
            raise
    raise QuasiNullBreakdownError(
        f"quasi-null breakdown persisted through {restart_max} restarts: {last_error}"
    )


def _lanczos_once(apply, dim, seed, max_iter, tol_resid,
                  breakdown_guard, ritz_interval, attempt):
    q0 = _bilinear(seed, seed)
    if abs(q0) < breakdown_guard * max(np.linalg.norm(seed) ** 2, 1e-300):
        raise QuasiNullBreakdownError("seed vector is quasi-null")

    m_cap = min(max_iter, dim)
    # rows are Krylov vectors; capacity grows geometrically to avoid
    # reserving max_iter vectors for runs that converge early
    basis = np.empty((min(m_cap + 1, 64), dim), dtype=complex)
    basis[0] = seed / np.sqrt(q0)
    alphas: list[complex] = []
    betas: list[complex] = []
    invariant = False
    best: LanczosResult | None = None

    for m in range(1, m_cap + 1):
        w = apply(basis[m - 1])
        alpha = _bilinear(basis[m - 1], w)
        alphas.append(alpha)
        w = w - alpha * basis[m - 1]
        if m > 1:
            w = w - betas[-1] * basis[m - 2]
        # full reorthogonalization in the bilinear form (single blocked pass)
        coeffs = basis[:m] @ w
        w = w - basis[:m].T @ coeffs

        nw = np.linalg.norm(w)
        scale = max(abs(a) for a in alphas)
        if nw <= 1e-13 * max(scale, 1.0):
            invariant = True          # exact invariant subspace reached
        else:
            q = _bilinear(w, w)
            if abs(q) < breakdown_guard * nw**2:
                raise QuasiNullBreakdownError(
                    f"quasi-null Krylov vector at step {m} "
                    f"(|<w,w>|/||w||^2 = {abs(q)/nw**2:.3e})"
                )

        if invariant or m % ritz_interval == 0 or m == m_cap:
            result = _try_extract(apply, basis, alphas, betas, nw,
                                  tol_resid, attempt)
            if result is not None:
                if result.residual <= tol_resid:
                    return result
                if best is None or result.residual < best.residual:
                    best = result
            if invariant:
                if best is not None:
                    break             # polishable candidate from this space
                raise QuasiNullBreakdownError(
                    "invariant subspace reached without a converged "
                    "smallest-Re eigenpair (seed deficient); restarting"
                )

        beta = np.sqrt(_bilinear(w, w))
        betas.append(beta)
        if m >= basis.shape[0]:
            grown = np.empty((min(2 * basis.shape[0], m_cap + 1), dim),
                             dtype=complex)
            grown[:basis.shape[0]] = basis
            basis = grown
        basis[m] = w / beta

    err = NoConvergenceError(
        f"no converged smallest-Re eigenpair after {len(alphas)} iterations "
        f"(attempt {attempt}; best residual "
        f"{best.residual if best else float('nan'):.3e})"
    )
    err.best_vector = best.vector if best is not None else None
    raise err


def _try_extract(apply, basis, alphas, betas, nw, tol_resid, attempt):
    """Form the smallest-Re Ritz pair once its cheap estimate converges.

    Returns None while clearly unconverged; otherwise returns the pair with
    its true residual (the caller decides whether that meets the target).
    """
    m = len(alphas)
    T = np.diag(np.array(alphas, dtype=complex))
    if m > 1:
        b = np.array(betas[: m - 1], dtype=complex)
        T += np.diag(b, 1) + np.diag(b, -1)
    theta, Y = np.linalg.eig(T)

    re_tie_tol = 1e-8 * max(1.0, float(np.abs(theta).max()))
    t = _pick_target(theta, re_tie_tol)

    # cheap residual estimate ||w|| * |y_m| before forming the Ritz vector
    est = nw * abs(Y[m - 1, t])
    if est > tol_resid:
        return None

    x = basis[:m].T @ Y[:, t]
    nx = np.linalg.norm(x)
    if nx < 1e-200:
        return None
    x = x / nx
    resid = float(np.linalg.norm(apply(x) - theta[t] * x))
    return LanczosResult(
        eigenvalue=complex(theta[t]),
        vector=_phase_fix(x),
        residual=resid,
        iterations=m,
        restarts=attempt,
    )
