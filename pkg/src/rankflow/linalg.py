"""Dense real linear-algebra primitives.

Everything operates on float64 numpy arrays.  Rank decisions are relative:
a singular value counts toward the numerical rank when it exceeds
``rel_tol`` times the largest singular value, so the rank of the zero
matrix is 0 at any tolerance.  Subspaces are compared through orthonormal
bases, either by principal angles or by the Frobenius distance between
orthogonal projectors (basis independent).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    AsymmetricMatrixError,
    DegenerateInputError,
    DimensionMismatchError,
    NumericalFailureError,
)

#: Default relative tolerance for numerical rank and signature decisions.
RANK_REL_TOL = 1e-8

#: Relative asymmetry admitted before a "symmetric" input is rejected.
SYM_REL_TOL = 1e-9


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite float64 2-D array, validating as it goes."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {m.shape}")
    if m.size == 0:
        raise DimensionMismatchError(f"{name} must have positive dimensions")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _require_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {m.shape}")
    return m


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, "fro"))


@dataclass(frozen=True)
class Signature:
    """Eigenvalue sign counts (positive, negative, zero) of a symmetric matrix."""

    positive: int
    negative: int
    zero: int

    @property
    def order(self) -> int:
        return self.positive + self.negative + self.zero

    @property
    def rank(self) -> int:
        return self.positive + self.negative

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.positive, self.negative, self.zero)


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis of a linear subspace of R^d.

    ``basis`` is d-by-r with orthonormal columns spanning the subspace;
    r = 0 denotes the trivial subspace (an empty basis).
    """

    ambient_dim: int
    rank: int
    basis: np.ndarray

    def __post_init__(self):
        if self.ambient_dim < 1 or self.rank < 0 or self.rank > self.ambient_dim:
            raise DimensionMismatchError(
                f"invalid subspace dims: ambient {self.ambient_dim}, rank {self.rank}"
            )
        if self.basis.shape != (self.ambient_dim, self.rank):
            raise DimensionMismatchError(
                f"basis shape {self.basis.shape} does not match "
                f"({self.ambient_dim}, {self.rank})"
            )
        if self.rank:
            gram = self.basis.T @ self.basis
            if frobenius(gram - np.eye(self.rank)) > 1e-10:
                raise ValueError("basis columns are not orthonormal")

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the subspace (zero matrix for rank 0)."""
        if self.rank == 0:
            return np.zeros((self.ambient_dim, self.ambient_dim))
        return self.basis @ self.basis.T


def svd(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD: M = U @ diag(s) @ V.T with orthonormal columns in U and V.

    Singular values come back non-increasing and non-negative.
    """
    M = as_matrix(M)
    try:
        U, s, Vh = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD did not converge: {exc}") from exc
    return U, s, Vh.T


def singular_values(M) -> np.ndarray:
    M = as_matrix(M)
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD did not converge: {exc}") from exc


def rank_from_singular_values(s: np.ndarray, rel_tol: float = RANK_REL_TOL) -> int:
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def numerical_rank(M, rel_tol: float = RANK_REL_TOL) -> int:
    """Count of singular values above ``rel_tol`` times the largest one."""
    return rank_from_singular_values(singular_values(M), rel_tol)


def orthonormal_basis(M, rel_tol: float = RANK_REL_TOL) -> SubspaceBasis:
    """Orthonormal basis of the numerical column space of M."""
    M = as_matrix(M)
    U, s, _ = svd(M)
    r = rank_from_singular_values(s, rel_tol)
    return SubspaceBasis(ambient_dim=M.shape[0], rank=r, basis=U[:, :r].copy())


def principal_angles(b1: SubspaceBasis, b2: SubspaceBasis) -> np.ndarray:
    """Principal angles between two subspaces, non-decreasing, in [0, pi/2].

    Computed as arccos of the singular values of b1.T @ b2, clamped to
    [0, 1] to absorb rounding.  Both subspaces must be non-trivial and
    live in the same ambient space.
    """
    if b1.ambient_dim != b2.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {b1.ambient_dim} vs {b2.ambient_dim}"
        )
    if b1.rank == 0 or b2.rank == 0:
        raise DegenerateInputError("principal angles need non-empty bases")
    cosines = np.linalg.svd(b1.basis.T @ b2.basis, compute_uv=False)
    return np.arccos(np.clip(cosines, 0.0, 1.0))


def projector_distance(b1: SubspaceBasis, b2: SubspaceBasis) -> float:
    """Frobenius distance between the orthogonal projectors of two subspaces.

    Zero iff the subspaces coincide (within floating point); well defined
    for unequal ranks, including empty bases.
    """
    if b1.ambient_dim != b2.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {b1.ambient_dim} vs {b2.ambient_dim}"
        )
    return frobenius(b1.projector() - b2.projector())


def sym_eigen(S) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix, eigenvalues non-increasing.

    The input is symmetrized as (S + S.T)/2 before decomposition; asymmetry
    beyond ``SYM_REL_TOL`` relative to max(1, ||S||_F) is an error rather
    than a silent repair.
    """
    S = _require_square(as_matrix(S))
    scale = max(1.0, frobenius(S))
    if frobenius(S - S.T) > SYM_REL_TOL * scale:
        raise AsymmetricMatrixError(
            f"matrix is asymmetric beyond tolerance ({frobenius(S - S.T):.3e} "
            f"vs {SYM_REL_TOL * scale:.3e})"
        )
    vals, vecs = np.linalg.eigh(0.5 * (S + S.T))
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def signature(S, rel_tol: float = RANK_REL_TOL) -> Signature:
    """Counts of eigenvalues above, below, and within the zero threshold.

    The threshold is relative to the largest absolute eigenvalue, so the
    signature of the zero matrix is (0, 0, order).
    """
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    vals, _ = sym_eigen(S)
    peak = float(np.max(np.abs(vals))) if vals.size else 0.0
    theta = rel_tol * peak
    p = int(np.count_nonzero(vals > theta))
    q = int(np.count_nonzero(vals < -theta))
    return Signature(positive=p, negative=q, zero=int(vals.size) - p - q)


def matrix_exponential(M) -> np.ndarray:
    """Matrix exponential of a square matrix.

    Backed by the scaling-and-squaring Pade evaluation in scipy; exp(0) is
    the identity exactly.
    """
    M = _require_square(as_matrix(M))
    n = M.shape[0]
    if not M.any():
        return np.eye(n)
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(M)
    if not np.isfinite(E).all():
        raise NumericalFailureError(
            "matrix exponential overflowed (norm beyond representable range)"
        )
    return E


def kronecker_with_identity(W, d: int) -> np.ndarray:
    """Block matrix with (i, j) block w_ij * I_d, i.e. kron(W, I_d)."""
    W = _require_square(as_matrix(W), "W")
    if d < 1:
        raise DimensionMismatchError(f"block size must be >= 1, got {d}")
    return np.kron(W, np.eye(d))
