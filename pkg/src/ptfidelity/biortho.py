"""Biorthogonal eigensystems for general complex square matrices.

Left covectors satisfy ``ell @ H = E * ell`` and are paired with right
eigenvectors so that ``ell_n @ r_m = delta_nm`` while keeping the
conventional self-norm ``<r_n|r_n> = 1``.  The raw left/right overlap
magnitude before renormalization is kept as a per-pair conditioning
diagnostic: it tends to zero as the matrix approaches an exceptional
point, where biorthogonal normalization becomes impossible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousPairingError,
    DefectiveMatrixError,
    DimTooLargeError,
    NotBrokenError,
    UnpairableSpectrumError,
)

DEFAULT_EP_GUARD = 1e-12
DENSE_DIM_CAP = 20000


def _as_square_complex(H) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if H.shape[0] < 1:
        raise ValueError("matrix dimension must be >= 1")
    if not np.all(np.isfinite(H.view(float))):
        raise ValueError("matrix entries must be finite")
    return H


@dataclass
class BiorthogonalEigensystem:
    """Paired left covectors / right eigenvectors of a complex matrix.

    Attributes
    ----------
    eigenvalues : (n,) complex array, sorted by (Re, Im) ascending.
    right_vectors : (n, n) complex array, column ``[:, k]`` is ``|R_k>``
        with unit conventional norm and its largest-magnitude component
        rotated to the positive real axis.
    left_vectors : (n, n) complex array, row ``[k, :]`` is the covector
        ``<L_k|`` scaled so that ``left[k] @ right[:, k] == 1``.
    condition_flags : (n,) float array, raw overlap magnitude of the
        unit-normalized left/right pair before rescaling (smallest
        singular value of the overlap block for degenerate clusters).
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    condition_flags: np.ndarray

    @property
    def dim(self) -> int:
        return self.right_vectors.shape[0]

    def overlap_matrix(self) -> np.ndarray:
        """Full pairing matrix ``<L_n|R_m>``; identity for a valid system."""
        return self.left_vectors @ self.right_vectors

    def completeness_defect(self) -> float:
        """Max-norm deviation of ``sum_n |R_n><L_n|`` from the identity."""
        resolution = self.right_vectors @ self.left_vectors
        return float(np.abs(resolution - np.eye(self.dim)).max())

    def ground_index(self, re_tie_tol: float | None = None) -> int:
        """Index of the ground state: smallest Re E, tie-break largest Im E.

        The tie-break picks one fixed member of each PT pair; this is a
        toolkit convention (the notion of "ground state" is otherwise
        undefined once energies are complex).
        """
        return ground_state_index(self.eigenvalues, re_tie_tol)


def ground_state_index(eigenvalues: np.ndarray, re_tie_tol: float | None = None) -> int:
    """Smallest-Re eigenvalue index, ties resolved toward largest Im."""
    w = np.asarray(eigenvalues)
    if re_tie_tol is None:
        re_tie_tol = 1e-8 * max(1.0, float(np.abs(w).max()))
    re_min = w.real.min()
    tied = np.nonzero(w.real <= re_min + re_tie_tol)[0]
    return int(tied[np.argmax(w.imag[tied])])


def _cluster_sorted(values: np.ndarray, gap: float) -> list[list[int]]:
    """Chain consecutive (lexsorted) values closer than ``gap`` into clusters."""
    clusters: list[list[int]] = [[0]]
    for i in range(1, len(values)):
        if abs(values[i] - values[i - 1]) <= gap:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def biorthogonal_eig(
    H,
    *,
    ep_guard: float = DEFAULT_EP_GUARD,
    tol_pair: float | None = None,
) -> BiorthogonalEigensystem:
    """Biorthogonally normalized eigensystem of a complex square matrix.

    Right vectors come from an eigendecomposition of ``H``, left covectors
    from an eigendecomposition of ``H.T`` (unconjugated transpose, so the
    covectors satisfy the left eigenvalue equation directly).  The two
    spectra are matched by eigenvalue proximity; clusters of (numerically)
    equal eigenvalues are re-biorthogonalized as a block, which keeps the
    pairing well defined for diagonalizable matrices with exact symmetry
    degeneracies.

    Parameters
    ----------
    H : (n, n) array_like
    ep_guard : raw-overlap floor below which the matrix is reported as
        defective (at or numerically at an exceptional point).
    tol_pair : eigenvalue matching tolerance; default ``1e-8`` times the
        spectral radius.

    Raises
    ------
    DefectiveMatrixError
        If any pair's raw overlap (block smallest singular value) is below
        ``ep_guard``.
    AmbiguousPairingError
        If the left spectrum cannot be matched one-to-one to the right
        spectrum within ``tol_pair``.
    """
    H = _as_square_complex(H)
    n = H.shape[0]

    w_r, v_r = np.linalg.eig(H)
    w_l, v_l = np.linalg.eig(H.T)

    order = np.lexsort((w_r.imag, w_r.real))
    w_r = w_r[order]
    v_r = v_r[:, order]

    scale = max(float(np.abs(w_r).max()), 1e-300)
    if tol_pair is None:
        tol_pair = 1e-8 * scale

    clusters = _cluster_sorted(w_r, tol_pair)
    centroids = np.array([w_r[c].mean() for c in clusters])

    # assign every left eigenvalue to the nearest right cluster
    assignment: list[list[int]] = [[] for _ in clusters]
    for i in range(n):
        dists = np.abs(centroids - w_l[i])
        j = int(np.argmin(dists))
        radius = float(np.abs(w_r[clusters[j]] - centroids[j]).max())
        if dists[j] > tol_pair + radius:
            raise AmbiguousPairingError(
                f"left eigenvalue {w_l[i]} has no right partner within "
                f"{tol_pair:.3e} (nearest distance {dists[j]:.3e})"
            )
        assignment[j].append(i)

    for c, a in zip(clusters, assignment):
        if len(c) != len(a):
            raise AmbiguousPairingError(
                "left/right spectra do not match one-to-one within tol_pair "
                f"(cluster at {w_r[c[0]]} has {len(c)} right but {len(a)} left members)"
            )

    left = np.empty((n, n), dtype=complex)
    flags = np.empty(n, dtype=float)
    for c, a in zip(clusters, assignment):
        r_block = v_r[:, c]                       # unit columns from LAPACK
        l_rows = v_l[:, a].T                      # unit rows
        B = l_rows @ r_block
        sigma_min = float(np.linalg.svd(B, compute_uv=False)[-1])
        flags[c] = sigma_min
        if sigma_min < ep_guard:
            raise DefectiveMatrixError(
                f"raw biorthogonal overlap {sigma_min:.3e} below ep_guard "
                f"{ep_guard:.3e} near eigenvalue {w_r[c[0]]}: matrix is at "
                "(or numerically at) an exceptional point"
            )
        left[c, :] = np.linalg.solve(B, l_rows)

    right = v_r.copy()
    for k in range(n):
        r = right[:, k]
        norm = np.linalg.norm(r)
        pivot = int(np.argmax(np.abs(r)))
        phase = r[pivot] / abs(r[pivot])
        c = norm * phase
        right[:, k] = r / c
        left[k, :] = left[k, :] * c

    return BiorthogonalEigensystem(
        eigenvalues=w_r,
        right_vectors=right,
        left_vectors=left,
        condition_flags=flags,
    )


@dataclass
class PTClassification:
    """Partition of an eigensystem into PT-unbroken and PT-broken states.

    ``real_indices`` hold states with |Im E| below ``tol_real``; every other
    index appears in ``pair_map``, an involution sending each PT-broken
    state to its conjugate partner.
    """

    real_indices: tuple[int, ...]
    pair_map: dict[int, int]
    tol_real: float
    tol_pair: float

    def is_broken(self, n: int) -> bool:
        return n in self.pair_map

    def partner(self, n: int) -> int:
        return self.pair_map[n]

    @property
    def n_broken(self) -> int:
        return len(self.pair_map)


def classify_pt(
    es: BiorthogonalEigensystem | np.ndarray,
    tol_real: float | None = None,
    tol_pair: float | None = None,
) -> PTClassification:
    """Classify eigenvalues as PT-unbroken (real) or conjugate-paired.

    Complex eigenvalues are greedily paired with the nearest conjugate;
    the number of complex eigenvalues of a PT-symmetric matrix is always
    even, so a leftover raises ``UnpairableSpectrumError`` (broken PT
    symmetry of the input, or too tight a tolerance).
    """
    w = es.eigenvalues if isinstance(es, BiorthogonalEigensystem) else np.asarray(es)
    scale = max(float(np.abs(w).max()), 1.0)
    if tol_real is None:
        tol_real = 1e-10 * scale
    if tol_pair is None:
        tol_pair = 1e-8 * scale

    real_idx = [i for i in range(len(w)) if abs(w[i].imag) < tol_real]
    complex_idx = [i for i in range(len(w)) if abs(w[i].imag) >= tol_real]

    pair_map: dict[int, int] = {}
    unused = set(complex_idx)
    for i in complex_idx:
        if i not in unused:
            continue
        unused.discard(i)
        target = np.conj(w[i])
        best, best_d = -1, np.inf
        for j in unused:
            d = abs(w[j] - target)
            if d < best_d:
                best, best_d = j, d
        if best < 0 or best_d > tol_pair:
            raise UnpairableSpectrumError(
                f"eigenvalue {w[i]} has no conjugate partner within "
                f"{tol_pair:.3e} (nearest {best_d:.3e})"
            )
        unused.discard(best)
        pair_map[i] = best
        pair_map[best] = i

    return PTClassification(
        real_indices=tuple(real_idx),
        pair_map=pair_map,
        tol_real=tol_real,
        tol_pair=tol_pair,
    )


def pt_partner_state(
    es: BiorthogonalEigensystem,
    classification: PTClassification,
    n: int,
) -> int:
    """Index of the PT partner of state ``n`` (eigenvalue ``conj(E_n)``)."""
    if n in classification.real_indices:
        raise NotBrokenError(
            f"state {n} (E = {es.eigenvalues[n]}) is PT-unbroken and has no partner"
        )
    return classification.partner(n)


def metric_operator(es: BiorthogonalEigensystem) -> np.ndarray:
    """Hermitian positive-definite metric ``G = sum_n |L_n><L_n|``.

    For a complete eigensystem G is positive definite, and when the
    spectrum is real it commutes with the dynamics in the sense
    ``G H = H^dag G`` (the stationary metric condition; with complex
    conjugate pairs present the stationary solution would instead pair
    PT partners and lose positivity, so only the real-spectrum case is
    stationary).
    """
    L = es.left_vectors
    G = L.conj().T @ L
    return 0.5 * (G + G.conj().T)


def dense_full_spectrum(H, *, dim_cap: int = DENSE_DIM_CAP) -> np.ndarray:
    """All eigenvalues of a dense matrix, sorted by (Re, Im) ascending."""
    H = _as_square_complex(H)
    if H.shape[0] > dim_cap:
        raise DimTooLargeError(
            f"dimension {H.shape[0]} exceeds dense guard {dim_cap}"
        )
    w = np.linalg.eigvals(H)
    return w[np.lexsort((w.imag, w.real))]


@dataclass
class SparseComplexSymmetricMatrix:
    """Sparse matrix equal to its unconjugated transpose, with an apply contract.

    Symmetry ``M = M^T`` is enforced at construction; the matrix is
    Hermitian only if it is also real.  The left eigenvector of such a
    matrix is the plain transpose of the right one, which is what the
    complex-symmetric Lanczos iteration exploits.
    """

    matrix: object  # scipy.sparse matrix
    dim: int = field(init=False)

    def __post_init__(self):
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        defect = abs(m - m.T)
        if defect.nnz and defect.max() > 0:
            raise ValueError("matrix is not complex symmetric (M != M^T)")
        self.dim = m.shape[0]

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def __matmul__(self, v):
        return self.matrix @ v

    def to_dense(self) -> np.ndarray:
        return np.asarray(self.matrix.todense())
