"""Structural conditions on matrix couplings.

A matrix-coupled system preserves the rank of the stacked state matrix
for every initial condition exactly when its blocks have the form

    W_ii(t) = A(t) + b_ii(t) * I_d        (diagonal blocks),
    W_ij(t) = b_ji(t) * I_d, i != j       (couplings),

for a single d-by-d drift A(t) and scalars b_ij(t): the matrix flow then
collapses to dX/dt = A(t) X + X B(t), the exact class of rank-preserving
flows.  On symmetric states (d == n) the flow additionally preserves the
eigenvalue signature exactly when B(t) = A(t).T, i.e. the coupling
scalars are the entries of the drift itself:

    W_ii(t) = A(t) + a_ii(t) * I_d,
    W_ij(t) = a_ij(t) * I_d, i != j,      with A(t) = {a_ij(t)}.

The checkers below decide these conditions on sampled blocks and recover
the (A, B) decomposition, or report the offending blocks.

Since A can absorb any c * I shift against the b_ii, recovery of the
rank-preserving form is gauged by b_00 := 0, so A := W_00.  Generators
that used a different gauge reproduce the same blocks up to that shift.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatchError
from .linalg import as_matrix, frobenius
from .system import CoupledSystem, CouplingKind, CouplingSpec
from .integrate import Trajectory

#: Default relative tolerance for the structural identities (algebraic,
#: not integration outputs, hence much tighter than trajectory thresholds).
STRUCTURE_TOL = 1e-9


@dataclass(frozen=True)
class BlockSample:
    """The full n-by-n grid of d-by-d coupling blocks at one time.

    ``blocks[i, j]`` is the block from agent j into agent i; for
    state-dependent couplings the grid is understood to be evaluated at a
    particular state, making any verdict trajectory-relative.
    """

    t: float
    blocks: np.ndarray

    def __post_init__(self):
        b = self.blocks
        if b.ndim != 4 or b.shape[0] != b.shape[1] or b.shape[2] != b.shape[3]:
            raise DimensionMismatchError(
                f"blocks must have shape (n, n, d, d), got {b.shape}"
            )

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def d(self) -> int:
        return self.blocks.shape[2]


@dataclass(frozen=True)
class StructureVerdict:
    """Outcome of a structural check over a list of block samples.

    ``recovered_A[k]`` / ``recovered_B[k]`` reproduce sample k's blocks
    within tolerance whenever the corresponding condition is satisfied.
    ``violations`` lists (i, j, t, residual) for each offending block;
    ``satisfies_signature_structure`` is None when the signature-level
    condition was not evaluated.
    """

    satisfies_rank_structure: bool
    satisfies_signature_structure: bool | None
    recovered_A: list = field(default_factory=list)
    recovered_B: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "satisfies_rank_structure": self.satisfies_rank_structure,
            "satisfies_signature_structure": self.satisfies_signature_structure,
            "recovered_A": [a.tolist() for a in self.recovered_A],
            "recovered_B": [b.tolist() for b in self.recovered_B],
            "violations": [
                {"i": i, "j": j, "t": t, "residual": r}
                for (i, j, t, r) in self.violations
            ],
        }


def nearest_scalar_multiple(M, tol: float = STRUCTURE_TOL) -> float | None:
    """The scalar c with M = c * I, or None if M is not such a multiple.

    c is trace(M)/d (the Frobenius-nearest multiple); M qualifies when
    ||M - c*I||_F <= tol * max(1, ||M||_F).
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"block must be square, got {M.shape}")
    d = M.shape[0]
    c = float(np.trace(M)) / d
    if frobenius(M - c * np.eye(d)) <= tol * max(1.0, frobenius(M)):
        return c
    return None


def _identity_residual(M: np.ndarray) -> float:
    d = M.shape[0]
    c = float(np.trace(M)) / d
    return frobenius(M - c * np.eye(d)) / max(1.0, frobenius(M))


def _check_samples_shape(samples: list[BlockSample]):
    if not samples:
        raise ValueError("need at least one block sample")
    n, d = samples[0].n, samples[0].d
    for s in samples:
        if s.n != n or s.d != d:
            raise DimensionMismatchError("block samples have inconsistent sizes")
    return n, d


def check_rank_preserving_structure(samples: list[BlockSample],
                                    tol: float = STRUCTURE_TOL) -> StructureVerdict:
    """Decide whether sampled blocks have the rank-preserving form.

    Every off-diagonal block must be a scalar multiple of the identity
    (recovering b_ji); with the gauge b_00 = 0, A is read off the first
    diagonal block and every other diagonal block must differ from A by a
    scalar multiple of the identity.  The verdict is true iff all samples
    pass; for time-varying or state-dependent couplings it is therefore a
    statement at the sampled times only.
    """
    n, d = _check_samples_shape(samples)
    violations: list[tuple] = []
    recovered_A: list[np.ndarray] = []
    recovered_B: list[np.ndarray] = []
    for sample in samples:
        blocks = sample.blocks
        B = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                c = nearest_scalar_multiple(blocks[i, j], tol)
                if c is None:
                    violations.append((i, j, sample.t, _identity_residual(blocks[i, j])))
                else:
                    B[j, i] = c
        A = blocks[0, 0].copy()
        for i in range(n):
            diff = blocks[i, i] - A
            c = nearest_scalar_multiple(diff, tol)
            if c is None:
                resid = _identity_residual(diff)
                violations.append((i, i, sample.t, resid))
            else:
                B[i, i] = c
        recovered_A.append(A)
        recovered_B.append(B)
    return StructureVerdict(
        satisfies_rank_structure=not violations,
        satisfies_signature_structure=None,
        recovered_A=recovered_A,
        recovered_B=recovered_B,
        violations=violations,
    )


def check_signature_preserving_structure(samples: list[BlockSample],
                                         tol: float = STRUCTURE_TOL) -> StructureVerdict:
    """Decide the signature-preserving form on square states (d == n).

    Off-diagonal blocks yield a_ij directly; the diagonal scalar comes out
    of the doubled (i, i) entry of W_ii (since A's own diagonal entry
    there is a_ii as well), and each diagonal block must then equal
    A + a_ii * I.  Requires d == n, the setting in which symmetric initial
    states make sense.
    """
    n, d = _check_samples_shape(samples)
    if d != n:
        raise DimensionMismatchError(
            f"signature-preserving structure needs d == n, got d={d}, n={n}"
        )
    violations: list[tuple] = []
    recovered_A: list[np.ndarray] = []
    recovered_B: list[np.ndarray] = []
    sig_ok = True
    for sample in samples:
        blocks = sample.blocks
        A = np.zeros((n, n))
        sample_ok = True
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                c = nearest_scalar_multiple(blocks[i, j], tol)
                if c is None:
                    violations.append((i, j, sample.t, _identity_residual(blocks[i, j])))
                    sample_ok = False
                else:
                    A[i, j] = c
        for i in range(n):
            A[i, i] = blocks[i, i][i, i] / 2.0
        for i in range(n):
            expected = A + A[i, i] * np.eye(n)
            resid = frobenius(blocks[i, i] - expected) / max(1.0, frobenius(blocks[i, i]))
            if resid > tol:
                violations.append((i, i, sample.t, resid))
                sample_ok = False
        sig_ok = sig_ok and sample_ok
        recovered_A.append(A)
        recovered_B.append(A.T.copy())
    rank_ok = check_rank_preserving_structure(samples, tol).satisfies_rank_structure
    return StructureVerdict(
        satisfies_rank_structure=rank_ok,
        satisfies_signature_structure=sig_ok,
        recovered_A=recovered_A,
        recovered_B=recovered_B,
        violations=violations,
    )


MatrixOrFn = np.ndarray | Callable[[float], np.ndarray]


def _as_matrix_fn(M: MatrixOrFn, shape: tuple[int, int], name: str):
    if callable(M):
        probe = as_matrix(M(0.0), name)
        if probe.shape != shape:
            raise DimensionMismatchError(
                f"{name}(t) must have shape {shape}, got {probe.shape}"
            )
        return M, False
    fixed = as_matrix(np.array(M, dtype=float), name)
    if fixed.shape != shape:
        raise DimensionMismatchError(f"{name} must have shape {shape}, got {fixed.shape}")
    return (lambda t: fixed), True


def build_from_decomposition(A: MatrixOrFn, B: MatrixOrFn, n: int, d: int) -> CouplingSpec:
    """Matrix-kind coupling spec realizing dX/dt = A(t) X + X B(t).

    A is d-by-d (drift), B is n-by-n (coupling scalars); either may be a
    callable of t.  The resulting blocks satisfy the rank-preserving
    structure by construction, so the check passes on any sample grid.
    """
    a_fn, a_const = _as_matrix_fn(A, (d, d), "A")
    b_fn, b_const = _as_matrix_fn(B, (n, n), "B")
    kind = CouplingKind.MATRIX_CONSTANT if (a_const and b_const) \
        else CouplingKind.MATRIX_TIME_VARYING
    eye = np.eye(d)

    def evaluator(i, j, t, X):
        Bt = b_fn(t)
        if i == j:
            return a_fn(t) + Bt[i, i] * eye
        return Bt[j, i] * eye

    return CouplingSpec(kind=kind, n=n, d=d, evaluator=evaluator)


def coupling_blocks(sys: CoupledSystem, t: float, X=None) -> BlockSample:
    """Evaluate the full block grid of a system at (t, X).

    Scalar couplings are lifted to w_ij * I_d so that scalar systems can
    run through the same checks (they pass trivially).  X defaults to the
    zero state; state-dependent couplings need the actual state, making
    the resulting verdict trajectory-relative.
    """
    spec = sys.spec
    n, d = spec.n, spec.d
    if X is None:
        X = np.zeros((d, n))
    X = np.asarray(X, dtype=float)
    blocks = np.empty((n, n, d, d))
    eye = np.eye(d)
    for i in range(n):
        for j in range(n):
            w = spec.evaluator(i, j, t, X)
            if spec.kind.is_scalar:
                blocks[i, j] = float(w) * eye
            else:
                blocks[i, j] = np.asarray(w, dtype=float)
    return BlockSample(t=t, blocks=blocks)


def blocks_from_trajectory(sys: CoupledSystem, traj: Trajectory) -> list[BlockSample]:
    """Block samples along a trajectory (one grid per stored sample)."""
    return [
        coupling_blocks(sys, float(tk), Xk)
        for tk, Xk in zip(traj.times, traj.states)
    ]
