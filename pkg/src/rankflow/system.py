"""Coupled networked dynamical systems.

A system couples n agents with states in R^d through pairwise weights:
each agent's velocity is the weighted sum of all agent states, where the
weight from agent j into agent i is a scalar w_ij or a d-by-d matrix
W_ij (the i == j entry is the agent's own coefficient).  Stacking agent
states as columns of a d-by-n matrix X, scalar couplings give the matrix
flow dX/dt = X @ W(t, X).T; matrix couplings give column i of dX/dt as
the sum over j of W_ij @ x_j.

Agent indices are 0-based throughout.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DimensionMismatchError, KindMismatchError
from .linalg import as_matrix, kronecker_with_identity

_SCALAR_KINDS = ("scalar_constant", "scalar_time_varying", "scalar_state_dependent")
_MATRIX_KINDS = ("matrix_constant", "matrix_time_varying", "matrix_state_dependent")


class CouplingKind(Enum):
    SCALAR_CONSTANT = "scalar_constant"
    SCALAR_TIME_VARYING = "scalar_time_varying"
    SCALAR_STATE_DEPENDENT = "scalar_state_dependent"
    MATRIX_CONSTANT = "matrix_constant"
    MATRIX_TIME_VARYING = "matrix_time_varying"
    MATRIX_STATE_DEPENDENT = "matrix_state_dependent"

    @property
    def is_scalar(self) -> bool:
        return self.value in _SCALAR_KINDS

    @property
    def is_matrix(self) -> bool:
        return self.value in _MATRIX_KINDS

    @property
    def is_constant(self) -> bool:
        return self in (CouplingKind.SCALAR_CONSTANT, CouplingKind.MATRIX_CONSTANT)


#: evaluator(i, j, t, X) -> float (scalar kinds) or (d, d) array (matrix kinds)
CouplingEvaluator = Callable[[int, int, float, np.ndarray], object]


@dataclass(frozen=True)
class CouplingSpec:
    """Pairwise coupling table for n agents of dimension d.

    ``evaluator(i, j, t, X)`` returns the weight from agent j into agent i
    at time t and state matrix X; when i == j it returns the agent's own
    coefficient.  The evaluator must be total and continuous in (t, X)
    (the caller's contract: solutions then exist and are unique, at least
    locally) and must be pure, so systems can be shared across parallel
    runs.  Constant kinds must ignore t and X; time-varying kinds must
    ignore X.
    """

    kind: CouplingKind
    n: int
    d: int
    evaluator: CouplingEvaluator

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise DimensionMismatchError(
                f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}"
            )


@dataclass(frozen=True)
class CoupledSystem:
    spec: CouplingSpec
    label: str = ""

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def kind(self) -> CouplingKind:
        return self.spec.kind


def scalar_constant_spec(W, d: int) -> CouplingSpec:
    """Scalar-constant spec read off a fixed n-by-n weight matrix."""
    W = as_matrix(np.array(W, dtype=float), "W")
    if W.shape[0] != W.shape[1]:
        raise DimensionMismatchError(f"W must be square, got {W.shape}")
    return CouplingSpec(
        kind=CouplingKind.SCALAR_CONSTANT,
        n=W.shape[0],
        d=d,
        evaluator=lambda i, j, t, X: W[i, j],
    )


def matrix_constant_spec(blocks) -> CouplingSpec:
    """Matrix-constant spec from an (n, n, d, d) grid of coupling blocks."""
    blocks = np.array(blocks, dtype=float)
    if blocks.ndim != 4 or blocks.shape[0] != blocks.shape[1] \
            or blocks.shape[2] != blocks.shape[3]:
        raise DimensionMismatchError(
            f"blocks must have shape (n, n, d, d), got {blocks.shape}"
        )
    if not np.isfinite(blocks).all():
        raise ValueError("blocks contain non-finite entries")
    n, _, d, _ = blocks.shape
    return CouplingSpec(
        kind=CouplingKind.MATRIX_CONSTANT,
        n=n,
        d=d,
        evaluator=lambda i, j, t, X: blocks[i, j],
    )


def check_state(sys: CoupledSystem, X) -> np.ndarray:
    """Validate a d-by-n state matrix against the system dimensions."""
    X = as_matrix(X, "state matrix")
    if X.shape != (sys.d, sys.n):
        raise DimensionMismatchError(
            f"state matrix must be {sys.d}x{sys.n}, got {X.shape[0]}x{X.shape[1]}"
        )
    return X


def stack_state(X: np.ndarray) -> np.ndarray:
    """Column-stack a d-by-n state matrix into a dn vector (agent 0 first)."""
    return np.ravel(X, order="F")


def unstack_state(x: np.ndarray, d: int, n: int) -> np.ndarray:
    """Inverse of :func:`stack_state`."""
    x = np.asarray(x, dtype=float)
    if x.shape != (d * n,):
        raise DimensionMismatchError(f"expected a vector of length {d * n}, got {x.shape}")
    return np.reshape(x, (d, n), order="F")


def assemble_scalar_W(sys: CoupledSystem, t: float, X) -> np.ndarray:
    """Evaluate the n-by-n scalar coupling matrix at (t, X)."""
    spec = sys.spec
    if not spec.kind.is_scalar:
        raise KindMismatchError(
            f"assemble_scalar_W needs a scalar coupling kind, got {spec.kind.value}"
        )
    X = check_state(sys, X)
    n = spec.n
    W = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            W[i, j] = float(spec.evaluator(i, j, t, X))
    return W


def _coupling_block(spec: CouplingSpec, i: int, j: int, t: float,
                    X: np.ndarray) -> np.ndarray:
    block = np.asarray(spec.evaluator(i, j, t, X), dtype=float)
    if block.shape != (spec.d, spec.d):
        raise DimensionMismatchError(
            f"coupling block ({i}, {j}) has shape {block.shape}, "
            f"expected ({spec.d}, {spec.d})"
        )
    return block


def assemble_block_matrix(sys: CoupledSystem, t: float, X) -> np.ndarray:
    """Evaluate the dn-by-dn block coupling matrix of a matrix-kind system.

    Block (i, j) is the d-by-d weight from agent j into agent i; the flow
    of the stacked state vector is this matrix times the vector.
    """
    spec = sys.spec
    if not spec.kind.is_matrix:
        raise KindMismatchError(
            f"assemble_block_matrix needs a matrix coupling kind, got {spec.kind.value}"
        )
    X = check_state(sys, X)
    n, d = spec.n, spec.d
    B = np.zeros((d * n, d * n))
    for i in range(n):
        for j in range(n):
            B[i * d:(i + 1) * d, j * d:(j + 1) * d] = _coupling_block(spec, i, j, t, X)
    return B


def rhs_matrix_form(sys: CoupledSystem, t: float, X) -> np.ndarray:
    """Time derivative of the d-by-n state matrix at (t, X)."""
    X = check_state(sys, X)
    spec = sys.spec
    if spec.kind.is_scalar:
        W = assemble_scalar_W(sys, t, X)
        return X @ W.T
    n = spec.n
    out = np.zeros_like(X)
    for i in range(n):
        acc = out[:, i]
        for j in range(n):
            acc += _coupling_block(spec, i, j, t, X) @ X[:, j]
    return out


def rhs_vector_form(sys: CoupledSystem, t: float, x) -> np.ndarray:
    """Time derivative of the stacked dn state vector (scalar kinds).

    Computed through the Kronecker lift kron(W, I_d) @ x; agrees with the
    column-stacked matrix form to machine precision.  Matrix kinds should
    apply :func:`assemble_block_matrix` to the stacked vector directly.
    """
    spec = sys.spec
    if not spec.kind.is_scalar:
        raise KindMismatchError(
            "rhs_vector_form covers scalar kinds; use assemble_block_matrix "
            "for matrix couplings"
        )
    x = np.asarray(x, dtype=float)
    d, n = spec.d, spec.n
    if x.shape != (d * n,):
        raise DimensionMismatchError(f"expected a vector of length {d * n}, got {x.shape}")
    X = unstack_state(x, d, n)
    W = assemble_scalar_W(sys, t, X)
    return kronecker_with_identity(W, d) @ x
