import math

import numpy as np
import pytest

from rankflow.errors import KindMismatchError, NumericalFailureError
from rankflow.integrate import (
    IntegratorConfig,
    Trajectory,
    integrate,
    lti_exact_solution,
    oracle_error,
    rk4_step,
)
from rankflow.models import FormationTarget, Graph, affine_coordination, consensus, \
    distance_formation
from rankflow.system import (
    CoupledSystem,
    CouplingKind,
    CouplingSpec,
    matrix_constant_spec,
    scalar_constant_spec,
)

ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])


def rotation_system(n=1):
    """Every agent spins under the planar rotation generator, no coupling."""
    blocks = np.zeros((n, n, 2, 2))
    for i in range(n):
        blocks[i, i] = ROTATION
    return CoupledSystem(matrix_constant_spec(blocks))


def two_agent_consensus():
    return consensus(Graph(n=2, edges=((0, 1, 1.0),)), d=1)


def rk4_scalar_factor(z: float) -> float:
    """Exact one-step amplification of RK4 on x' = lambda x with z = lambda h."""
    return 1.0 + z + z ** 2 / 2.0 + z ** 3 / 6.0 + z ** 4 / 24.0


class TestRk4Step:
    def test_zero_rhs_keeps_state(self):
        X = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = rk4_step(lambda t, Y: np.zeros_like(Y), 0.0, X, 0.3)
        assert np.array_equal(out, X)

    def test_exponential_growth_single_step(self):
        # On x' = x the RK4 update is exactly the degree-4 Taylor polynomial
        # of e^h; freeze that value and bound the gap to the true e^0.1.
        out = rk4_step(lambda t, Y: Y, 0.0, np.array([[1.0]]), 0.1)
        expected = rk4_scalar_factor(0.1)
        assert abs(out[0, 0] - expected) < 1e-14
        assert abs(out[0, 0] - math.exp(0.1)) < 1.2e-7

    def test_exponential_decay_twenty_steps(self):
        X = np.array([[1.0]])
        t = 0.0
        for _ in range(20):
            X = rk4_step(lambda t_, Y: -Y, t, X, 0.5)
            t += 0.5
        expected = rk4_scalar_factor(-0.5) ** 20
        assert abs(X[0, 0] - expected) < 1e-14
        assert abs(X[0, 0] - math.exp(-10.0)) < 1e-6

    def test_non_finite_stage(self):
        def rhs(t, Y):
            with np.errstate(divide="ignore", invalid="ignore"):
                return Y / t  # singular at t = 0

        with pytest.raises(NumericalFailureError):
            rk4_step(rhs, 0.0, np.array([[1.0]]), 0.1)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            rk4_step(lambda t, Y: Y, 0.0, np.array([[1.0]]), 0.0)


class TestIntegrate:
    def test_zero_system_constant(self):
        sys = CoupledSystem(scalar_constant_spec(np.zeros((2, 2)), d=2))
        X0 = np.array([[1.0, 2.0], [3.0, 4.0]])
        traj = integrate(sys, X0, 0.0, 1.0)
        assert all(np.array_equal(X, X0) for X in traj.states)

    def test_sample_grid(self):
        sys = CoupledSystem(scalar_constant_spec(np.zeros((1, 1)), d=1))
        traj = integrate(sys, [[1.0]], 0.0, 1.0,
                         IntegratorConfig(sample_interval=0.25))
        assert np.allclose(traj.times, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_two_agent_consensus_closed_form(self):
        # Average and disagreement modes: x(t) = (m - s e^{-2t}, m + s e^{-2t}).
        sys = two_agent_consensus()
        traj = integrate(sys, [[0.0, 2.0]], 0.0, 1.0,
                         IntegratorConfig(rtol=1e-11, atol=1e-14))
        expected = np.array([[1.0 - math.exp(-2.0), 1.0 + math.exp(-2.0)]])
        assert np.allclose(traj.states[-1], expected, atol=1e-9)

    def test_rotation_drift_quarter_turn(self):
        sys = rotation_system(n=2)
        X0 = np.array([[1.0, 1.0], [0.0, 0.0]])
        traj = integrate(sys, X0, 0.0, math.pi / 2)
        expected = np.array([[0.0, 0.0], [1.0, 1.0]])
        assert np.allclose(traj.states[-1], expected, atol=1e-7)

    def test_rk4_method(self):
        sys = two_agent_consensus()
        traj = integrate(sys, [[0.0, 2.0]], 0.0, 1.0,
                         IntegratorConfig(method="rk4", h=0.01))
        expected = np.array([[1.0 - math.exp(-2.0), 1.0 + math.exp(-2.0)]])
        assert np.allclose(traj.states[-1], expected, atol=1e-8)
        assert traj.meta["method"] == "rk4"

    def test_meta_counters(self):
        sys = two_agent_consensus()
        traj = integrate(sys, [[0.0, 2.0]], 0.0, 1.0)
        assert traj.meta["nfev"] > 0
        assert traj.meta["steps_accepted"] > 0

    def test_finite_escape_reported(self):
        # Scalar self-coupling w(X) = x makes x' = x^2, which escapes at
        # t = 1/x0; the integrator must fail with a time stamp, not hang.
        spec = CouplingSpec(
            kind=CouplingKind.SCALAR_STATE_DEPENDENT, n=1, d=1,
            evaluator=lambda i, j, t, X: X[0, 0],
        )
        sys = CoupledSystem(spec)
        with pytest.raises(NumericalFailureError) as err:
            integrate(sys, [[1.0]], 0.0, 2.0)
        assert err.value.time is not None
        assert 0.5 <= err.value.time <= 2.0

    def test_bad_horizon(self):
        sys = two_agent_consensus()
        with pytest.raises(ValueError):
            integrate(sys, [[0.0, 2.0]], 1.0, 1.0)


class TestLtiExactSolution:
    def test_time_zero_is_identity(self, rng):
        sys = CoupledSystem(scalar_constant_spec(rng.standard_normal((3, 3)), d=2))
        X0 = rng.standard_normal((2, 3))
        assert np.allclose(lti_exact_solution(sys, X0, 0.0), X0, atol=1e-15)

    def test_two_agent_consensus_matches_eigen_form(self):
        sys = two_agent_consensus()
        got = lti_exact_solution(sys, [[0.0, 2.0]], 1.0)
        expected = np.array([[1.0 - math.exp(-2.0), 1.0 + math.exp(-2.0)]])
        assert np.allclose(got, expected, atol=1e-12)

    def test_nilpotent_coupling(self):
        # W = [[0, 1], [0, 0]] gives x0' = x1, x1' = 0, so the exact state
        # is [a + t b, b]; exp(t W.T) reproduces it.
        sys = CoupledSystem(scalar_constant_spec([[0.0, 1.0], [0.0, 0.0]], d=1))
        a, b, t = 1.5, -0.5, 2.0
        got = lti_exact_solution(sys, [[a, b]], t)
        assert np.allclose(got, [[a + t * b, b]], atol=1e-14)

    def test_matrix_kind_block_exponential(self):
        sys = rotation_system(n=2)
        X0 = np.array([[1.0, 1.0], [0.0, 0.0]])
        got = lti_exact_solution(sys, X0, math.pi / 2)
        assert np.allclose(got, [[0.0, 0.0], [1.0, 1.0]], atol=1e-14)

    def test_non_constant_rejected(self):
        spec = CouplingSpec(
            kind=CouplingKind.SCALAR_TIME_VARYING, n=1, d=1,
            evaluator=lambda i, j, t, X: math.sin(t),
        )
        with pytest.raises(KindMismatchError):
            lti_exact_solution(CoupledSystem(spec), [[1.0]], 1.0)


class TestOracleError:
    def test_zero_system(self):
        sys = CoupledSystem(scalar_constant_spec(np.zeros((2, 2)), d=2))
        traj = integrate(sys, np.eye(2), 0.0, 1.0)
        assert oracle_error(traj, sys) == 0.0

    def test_adaptive_consensus_accuracy(self):
        sys = two_agent_consensus()
        traj = integrate(sys, [[0.0, 2.0]], 0.0, 5.0,
                         IntegratorConfig(rtol=1e-10, atol=1e-13))
        assert oracle_error(traj, sys) <= 1e-7

    def test_rk4_halving_reduces_error_16x(self):
        sys = rotation_system()
        X0 = np.array([[1.0], [0.0]])
        errors = []
        for h in (0.1, 0.05):
            traj = integrate(sys, X0, 0.0, 1.6,
                             IntegratorConfig(method="rk4", h=h, sample_interval=1.6))
            errors.append(oracle_error(traj, sys))
        ratio = errors[0] / errors[1]
        assert 12.0 <= ratio <= 20.0


class TestIntegratorProperties:
    def table1_systems(self):
        graph = Graph.path(3, weight=0.4)
        yield consensus(graph, d=2)
        yield consensus(graph, d=2, modulation=lambda t: 1.0 + 0.5 * math.sin(t))
        target = FormationTarget.from_edge_list(graph, [1.0, 1.2])
        yield distance_formation(graph, target, d=2)
        yield affine_coordination(graph, 2,
                                  lambda i, j, t, X: 0.3 * (2.0 + math.sin(t)))

    def test_adaptive_vs_fixed_agreement(self):
        rng = np.random.default_rng(7)
        for sys in self.table1_systems():
            X0 = 0.8 * rng.standard_normal((sys.d, sys.n))
            fine = integrate(sys, X0, 0.0, 10.0,
                             IntegratorConfig(method="rk4", h=0.005,
                                              sample_interval=1.0))
            adaptive = integrate(sys, X0, 0.0, 10.0,
                                 IntegratorConfig(rtol=1e-9, atol=1e-12,
                                                  sample_interval=1.0))
            gap = max(
                np.linalg.norm(a - b, "fro")
                for a, b in zip(fine.states, adaptive.states)
            )
            assert gap <= 1e-6

    def test_time_reversal(self, rng):
        W = 0.5 * rng.standard_normal((3, 3))
        forward = CoupledSystem(scalar_constant_spec(W, d=2))
        backward = CoupledSystem(scalar_constant_spec(-W, d=2))
        X0 = rng.standard_normal((2, 3))
        out = integrate(forward, X0, 0.0, 1.0).states[-1]
        back = integrate(backward, out, 0.0, 1.0).states[-1]
        assert np.linalg.norm(back - X0, "fro") <= 1e-6

    def test_rk4_order_slope(self):
        sys = rotation_system()
        X0 = np.array([[1.0], [0.0]])
        hs = (0.1, 0.05, 0.025, 0.0125)
        errors = []
        for h in hs:
            traj = integrate(sys, X0, 0.0, 1.6,
                             IntegratorConfig(method="rk4", h=h, sample_interval=1.6))
            errors.append(oracle_error(traj, sys))
        slopes = np.diff(np.log(errors)) / np.diff(np.log(hs))
        mean_slope = float(np.mean(slopes))
        assert abs(mean_slope - 4.0) <= 0.3


class TestTrajectoryType:
    def test_single_sample_allowed(self):
        traj = Trajectory(times=np.array([0.0]), states=np.zeros((1, 2, 2)))
        assert traj.d == 2 and traj.n == 2

    def test_rejects_decreasing_times(self):
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.0, 0.0]), states=np.zeros((2, 2, 2)))

    def test_rejects_non_finite(self):
        states = np.zeros((2, 1, 1))
        states[1, 0, 0] = np.inf
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.0, 1.0]), states=states)
