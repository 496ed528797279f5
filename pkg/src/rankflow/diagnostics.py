"""Invariance verdicts over sampled trajectories.

Each check compares per-sample quantities (numerical rank, column span,
row span, eigenvalue signature, collinearity class) against their values
at the first sample and reports whether the quantity stayed invariant
over the horizon, together with the worst observed deviation and when it
occurred.  Deviations are logged even when a verdict holds.

Verdicts are finite-horizon statements about the sampled times; nothing
here claims asymptotic behavior (the rank may genuinely drop in the
t -> infinity limit).
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetricMatrixError,
    DegenerateInputError,
    DimensionMismatchError,
    RankNotConstantError,
)
from .integrate import Trajectory
from .linalg import (
    RANK_REL_TOL,
    Signature,
    orthonormal_basis,
    principal_angles,
    projector_distance,
    rank_from_singular_values,
    signature,
    singular_values,
)

#: Default projector-distance threshold for subspace verdicts on
#: integrated trajectories (integration error dominates fp error there).
SUBSPACE_THRESHOLD = 1e-6

RANK_INVARIANCE = "RankInvariance"
SUBSPACE_PRESERVATION = "SubspacePreservation"
ROW_SUBSPACE_PRESERVATION = "RowSubspacePreservation"
SIGNATURE_PRESERVATION = "SignaturePreservation"
COLLINEARITY = "Collinearity"
COPLANARITY = "Coplanarity"


@dataclass(frozen=True)
class InvarianceReport:
    """Verdict for one invariance principle over a sampled trajectory.

    ``series`` holds the per-sample quantity the verdict is about (ranks,
    distances, signature tuples, class labels); ``deviations`` the
    per-sample audit value whose maximum is ``worst_deviation`` attained
    at ``worst_time``.  ``first_violation_time`` is the first sample at
    which the verdict broke, or None.
    """

    principle: str
    holds: bool
    initial_value: object
    worst_deviation: float
    worst_time: float
    times: np.ndarray
    series: list
    deviations: list
    threshold: float | None = None
    first_violation_time: float | None = None
    variant: str | None = None

    def to_dict(self) -> dict:
        d = {
            "principle": self.principle,
            "holds": bool(self.holds),
            "initial_value": self.initial_value,
            "worst_deviation": float(self.worst_deviation),
            "worst_time": float(self.worst_time),
            "threshold": self.threshold,
            "first_violation_time": self.first_violation_time,
            "times": [float(t) for t in self.times],
            "series": list(self.series),
            "deviations": [float(v) for v in self.deviations],
        }
        if self.variant is not None:
            d["variant"] = self.variant
        return d


@dataclass(frozen=True)
class GrassmannDriftSeries:
    """Largest principal angle between span X(t) and span X(0), per sample.

    Defined only while the rank stays at its initial value; ``ranks``
    records it for the audit trail.  Angles live in [0, pi/2].
    """

    times: np.ndarray
    angles: np.ndarray
    ranks: list

    def to_dict(self) -> dict:
        return {
            "times": [float(t) for t in self.times],
            "angles": [float(a) for a in self.angles],
            "ranks": [int(r) for r in self.ranks],
        }


def _svals_series(traj: Trajectory) -> list[np.ndarray]:
    return [singular_values(X) for X in traj.states]


def _rank_deviation(s: np.ndarray, r0: int, rank_t: int, init_ratio: float) -> float:
    """Audit distance of a singular spectrum from "rank exactly r0".

    While the rank sits at r0 this is the relative mass just beyond it,
    sigma_{r0+1}/sigma_1, which stays below the rank tolerance by
    definition.  A rank drop is measured by how far the r0-th ratio fell
    from its initial value; for r0 = 0 any nonzero largest singular value
    is itself the deviation.
    """
    smax = float(s[0]) if s.size else 0.0
    if r0 == 0:
        return smax
    if smax <= 0.0:
        return init_ratio
    growth = float(s[r0]) / smax if r0 < s.size else 0.0
    if rank_t < r0:
        return max(growth, init_ratio - float(s[r0 - 1]) / smax)
    return growth


def _worst(times: np.ndarray, deviations: list[float]) -> tuple[float, float]:
    idx = int(np.argmax(deviations))
    return float(deviations[idx]), float(times[idx])


def _first_violation(times: np.ndarray, ok_flags: list[bool]) -> float | None:
    for t, ok in zip(times, ok_flags):
        if not ok:
            return float(t)
    return None


def rank_trajectory(traj: Trajectory, rel_tol: float = RANK_REL_TOL) -> list[int]:
    """Numerical rank of the state matrix at each sample."""
    return [rank_from_singular_values(s, rel_tol) for s in _svals_series(traj)]


def check_rank_invariance(traj: Trajectory,
                          rel_tol: float = RANK_REL_TOL) -> InvarianceReport:
    """Does the numerical rank stay at its initial value at every sample?"""
    svals = _svals_series(traj)
    ranks = [rank_from_singular_values(s, rel_tol) for s in svals]
    r0 = ranks[0]
    s0 = svals[0]
    init_ratio = float(s0[r0 - 1] / s0[0]) if r0 >= 1 else 0.0
    deviations = [_rank_deviation(s, r0, r, init_ratio)
                  for s, r in zip(svals, ranks)]
    ok_flags = [r == r0 for r in ranks]
    worst_dev, worst_t = _worst(traj.times, deviations)
    return InvarianceReport(
        principle=RANK_INVARIANCE,
        holds=all(ok_flags),
        initial_value=r0,
        worst_deviation=worst_dev,
        worst_time=worst_t,
        times=traj.times,
        series=ranks,
        deviations=deviations,
        threshold=rel_tol,
        first_violation_time=_first_violation(traj.times, ok_flags),
    )


def _subspace_report(states, times, rel_tol, threshold, principle) -> InvarianceReport:
    X0 = states[0]
    if not X0.any():
        raise DegenerateInputError("subspace preservation needs a nonzero initial state")
    b0 = orthonormal_basis(X0, rel_tol)
    distances = [
        projector_distance(orthonormal_basis(X, rel_tol), b0) for X in states
    ]
    ok_flags = [dist <= threshold for dist in distances]
    worst_dev, worst_t = _worst(times, distances)
    return InvarianceReport(
        principle=principle,
        holds=all(ok_flags),
        initial_value={"rank": b0.rank, "basis": b0.basis.tolist()},
        worst_deviation=worst_dev,
        worst_time=worst_t,
        times=times,
        series=[float(dist) for dist in distances],
        deviations=[float(dist) for dist in distances],
        threshold=threshold,
        first_violation_time=_first_violation(times, ok_flags),
    )


def check_subspace_preservation(traj: Trajectory, rel_tol: float = RANK_REL_TOL,
                                threshold: float = SUBSPACE_THRESHOLD) -> InvarianceReport:
    """Does the column span of X(t) stay inside its initial span?

    Measured by the Frobenius distance between orthogonal projectors,
    which is basis independent and handles unequal ranks.
    """
    return _subspace_report(list(traj.states), traj.times, rel_tol, threshold,
                            SUBSPACE_PRESERVATION)


def check_row_subspace_preservation(traj: Trajectory, rel_tol: float = RANK_REL_TOL,
                                    threshold: float = SUBSPACE_THRESHOLD) -> InvarianceReport:
    """Same check on the row span (the column span of X(t).T)."""
    return _subspace_report([X.T for X in traj.states], traj.times, rel_tol,
                            threshold, ROW_SUBSPACE_PRESERVATION)


def grassmann_drift(traj: Trajectory, rel_tol: float = RANK_REL_TOL) -> GrassmannDriftSeries:
    """How far the column span wanders while keeping its dimension.

    Reports the largest principal angle to the initial span per sample.
    The rank must be constant along the trajectory; otherwise the drift
    is undefined and the rank-invariance report is the place to look.
    """
    ranks = rank_trajectory(traj, rel_tol)
    if any(r != ranks[0] for r in ranks):
        raise RankNotConstantError(
            "rank changes along the trajectory; see the rank-invariance report"
        )
    if ranks[0] == 0:
        raise DegenerateInputError("drift is undefined for the zero subspace")
    b0 = orthonormal_basis(traj.states[0], rel_tol)
    angles = []
    for X in traj.states:
        bt = orthonormal_basis(X, rel_tol)
        angles.append(float(principal_angles(bt, b0)[-1]))
    return GrassmannDriftSeries(times=traj.times, angles=np.array(angles), ranks=ranks)


def signature_trajectory(traj: Trajectory,
                         rel_tol: float = RANK_REL_TOL) -> list[Signature]:
    """Eigenvalue signature at each sample (square symmetric states only)."""
    if traj.d != traj.n:
        raise DimensionMismatchError(
            f"signature needs square states, got {traj.d}x{traj.n}"
        )
    sigs = []
    for tk, X in zip(traj.times, traj.states):
        try:
            sigs.append(signature(X, rel_tol))
        except AsymmetricMatrixError as exc:
            raise AsymmetricMatrixError(
                f"state at t={float(tk):.6g} is not symmetric: {exc}", time=float(tk)
            ) from exc
    return sigs


def check_signature_preservation(traj: Trajectory,
                                 rel_tol: float = RANK_REL_TOL) -> InvarianceReport:
    """Do the eigenvalue sign counts (p, q, s) stay constant?"""
    sigs = signature_trajectory(traj, rel_tol)
    sig0 = sigs[0]
    deviations = [
        float(abs(s.positive - sig0.positive) + abs(s.negative - sig0.negative)
              + abs(s.zero - sig0.zero))
        for s in sigs
    ]
    ok_flags = [s == sig0 for s in sigs]
    worst_dev, worst_t = _worst(traj.times, deviations)
    return InvarianceReport(
        principle=SIGNATURE_PRESERVATION,
        holds=all(ok_flags),
        initial_value=list(sig0.as_tuple()),
        worst_deviation=worst_dev,
        worst_time=worst_t,
        times=traj.times,
        series=[list(s.as_tuple()) for s in sigs],
        deviations=deviations,
        threshold=rel_tol,
        first_violation_time=_first_violation(traj.times, ok_flags),
    )


def _position_class(rank: int, d: int) -> str:
    if rank <= 1:
        return "collinear"
    if d == 2:
        return "non-collinear"
    return "coplanar" if rank == 2 else "non-coplanar"


def _class_bounds(label: str, d: int) -> tuple[int, int]:
    """Rank range (min, max) a classification covers."""
    if label == "collinear":
        return 0, 1
    if label == "coplanar":
        return 2, 2
    return d, d  # non-collinear / non-coplanar: full rank only


def _class_deviation(s: np.ndarray, rank_t: int, c_min: int, c_max: int,
                     init_min_ratio: float) -> float:
    """Distance of a spectrum from staying inside a rank class.

    Inside the class this is sigma_{c_max+1}/sigma_1 (the mass that would
    push the rank above the class); leaving the class downward is
    measured by the fall of the sigma_{c_min} ratio from its start.
    """
    smax = float(s[0]) if s.size else 0.0
    if smax <= 0.0:
        return init_min_ratio if c_min >= 1 else 0.0
    growth = float(s[c_max]) / smax if c_max < s.size else 0.0
    if c_min >= 1 and rank_t < c_min:
        return max(growth, init_min_ratio - float(s[c_min - 1]) / smax)
    return growth


def _class_report(states, times, rel_tol, d, variant) -> InvarianceReport:
    svals = [singular_values(X) for X in states]
    ranks = [rank_from_singular_values(s, rel_tol) for s in svals]
    labels = [_position_class(r, d) for r in ranks]
    r0 = ranks[0]
    s0 = svals[0]
    c_min, c_max = _class_bounds(labels[0], d)
    init_min_ratio = float(s0[c_min - 1] / s0[0]) if c_min >= 1 else 0.0
    deviations = [_class_deviation(s, r, c_min, c_max, init_min_ratio)
                  for s, r in zip(svals, ranks)]
    ok_flags = [lbl == labels[0] for lbl in labels]
    worst_dev, worst_t = _worst(times, deviations)
    return InvarianceReport(
        principle=COLLINEARITY if d == 2 else COPLANARITY,
        holds=all(ok_flags),
        initial_value={"class": labels[0], "rank": r0},
        worst_deviation=worst_dev,
        worst_time=worst_t,
        times=times,
        series=labels,
        deviations=deviations,
        threshold=rel_tol,
        first_violation_time=_first_violation(times, ok_flags),
        variant=variant,
    )


def check_collinearity_class(traj: Trajectory,
                             rel_tol: float = RANK_REL_TOL
                             ) -> tuple[InvarianceReport, InvarianceReport]:
    """Collinearity/coplanarity classification, through the origin and affine.

    The through-origin verdict classifies span(X(t)) itself; the affine
    verdict first centers the columns at their mean (multiplying by
    I - (1/n) ones), which is the physically meaningful notion for agent
    positions.  Each report states whether the classification at t0 is
    kept at every sample.  Only d in {2, 3} is classified; higher
    dimensions should use the rank checks directly.
    """
    d = traj.d
    if d not in (2, 3):
        raise DimensionMismatchError(
            f"collinearity classes are defined for d in {{2, 3}}, got d={d}"
        )
    through = _class_report(list(traj.states), traj.times, rel_tol, d, "through-origin")
    # Centering multiplies by I - (1/n) ones on the right; subtracting the
    # column mean computes the same thing without fp residue on identical
    # columns.
    affine = _class_report([X - X.mean(axis=1, keepdims=True) for X in traj.states],
                           traj.times, rel_tol, d, "affine")
    return through, affine
