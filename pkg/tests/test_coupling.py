"""Wall laws and the quasi-static pressure/radius fixed point."""

import numpy as np
import pytest

from tubeflow.coupling import (
    ElasticWall,
    RigidWall,
    WallState,
    advance_time_step,
    apply_wall_law,
    wall_law_residual,
)
from tubeflow.errors import (
    CouplingDivergenceError,
    TubeflowError,
    WallCollapseError,
)
from tubeflow.expansion import FluidParams
from tubeflow.pressure import PressureBC, flux_residual

FLUID = FluidParams(1.0, 1.0)
N = 33


def grid():
    return np.linspace(0.0, 1.0, N)


class TestWallState:
    def test_from_radius_derivatives(self):
        s = grid()
        state = WallState.from_radius(s, 1.0 + 0.5 * s**2)
        assert np.abs(state.dR_ds1 - s).max() < 1e-12
        assert np.abs(state.d2R_ds12 - 1.0).max() < 1e-9

    def test_positive_radius_enforced(self):
        with pytest.raises(TubeflowError):
            WallState.from_radius(grid(), -1.0)

    def test_interpolators(self):
        s = grid()
        state = WallState.from_radius(s, 1.0 + s, dR_dt=2.0 * np.ones(N))
        assert state.radius_at(0.25) == pytest.approx(1.25)
        assert state.slope_at(0.5) == pytest.approx(1.0)
        assert state.rate_at(0.9) == pytest.approx(2.0)


class TestWallLaw:
    def test_rest_state(self):
        law = ElasticWall(E=10.0, h0=1.0, R0=1.0, p_e=5.0)
        assert np.allclose(apply_wall_law(law, np.full(N, 5.0)), 1.0)

    def test_direct_formula(self):
        # E h0 / R0^2 = 10, p0 - p_e = 1 -> R = 1.1
        law = ElasticWall(E=1000.0, h0=0.01, R0=1.0)
        assert np.allclose(apply_wall_law(law, np.ones(N)), 1.1)

    def test_stiff_limit_recovers_rest(self):
        law = ElasticWall(E=1e12, h0=1.0, R0=1.0)
        r = apply_wall_law(law, np.full(N, 1.0))
        assert np.abs(r - 1.0).max() < 1e-9

    def test_collapse_error(self):
        law = ElasticWall(E=1.0, h0=1.0, R0=1.0)
        with pytest.raises(WallCollapseError):
            apply_wall_law(law, np.full(N, -2.0))

    def test_rigid_variant_rejected(self):
        with pytest.raises(TubeflowError):
            apply_wall_law(RigidWall(), np.ones(N))

    def test_parameter_validation(self):
        with pytest.raises(TubeflowError):
            ElasticWall(E=-1.0, h0=1.0, R0=1.0)

    def test_residual_measure(self):
        law = ElasticWall(E=1000.0, h0=0.01, R0=1.0)
        p0 = np.ones(N)
        r = apply_wall_law(law, p0)
        assert wall_law_residual(law, p0, r).max() < 1e-15


class TestTimeStepping:
    def test_rigid_short_circuit(self):
        state = WallState.from_radius(grid(), 1.0)
        new_state, pexp = advance_time_step(state, RigidWall(), FLUID,
                                            PressureBC(1.0, 0.0), dt=0.1)
        assert np.all(new_state.R == state.R)
        assert np.all(new_state.dR_dt == 0.0)
        assert new_state.t == pytest.approx(0.1)
        assert np.abs(pexp.p0 - (1 - grid())).max() < 1e-12

    def test_equilibrium_fixed_point(self):
        # p_in = p_out = p_e: R = R0, p0 = p_e immediately
        law = ElasticWall(E=100.0, h0=0.1, R0=1.0, p_e=2.0)
        state = WallState.from_radius(grid(), 1.0)
        new_state, pexp = advance_time_step(state, law, FLUID,
                                            PressureBC(2.0, 2.0), dt=0.1)
        assert np.abs(new_state.R - 1.0).max() < 1e-12
        assert np.abs(pexp.p0 - 2.0).max() < 1e-10

    def test_step_change_consistency(self):
        # after a pressure step, law and BVP residuals hold simultaneously
        law = ElasticWall(E=1e3, h0=0.1, R0=1.0, p_e=0.0)
        state = WallState.from_radius(grid(), 1.0)
        bc = PressureBC(5.0, 0.0)
        new_state, pexp = advance_time_step(state, law, FLUID, bc, dt=0.05)
        assert wall_law_residual(law, pexp.p0, new_state.R).max() <= 1e-9
        rhs = 16.0 * new_state.R * new_state.dR_dt
        assert flux_residual(new_state.R**4, new_state.h, pexp.p0, rhs) <= 1e-8

    def test_stiff_wall_matches_rigid(self):
        bc = PressureBC(5.0, 0.0)
        rigid_state, rigid_p = advance_time_step(
            WallState.from_radius(grid(), 1.0), RigidWall(), FLUID, bc, dt=0.05)
        law = ElasticWall(E=1e12, h0=0.1, R0=1.0)
        soft_state, soft_p = advance_time_step(
            WallState.from_radius(grid(), 1.0), law, FLUID, bc, dt=0.05)
        assert np.abs(soft_state.R - rigid_state.R).max() < 1e-9
        assert np.abs(soft_p.p0 - rigid_p.p0).max() \
            <= 1e-9 * np.abs(rigid_p.p0).max()

    def test_divergence_raises_with_history(self):
        # absurdly soft wall: the fixed point blows up and is reported
        law = ElasticWall(E=1e-6, h0=1e-3, R0=1.0)
        state = WallState.from_radius(grid(), 1.0)
        with pytest.raises(CouplingDivergenceError) as err:
            advance_time_step(state, law, FLUID, PressureBC(10.0, 0.0),
                              dt=0.1, max_iter=20)
        assert len(err.value.history) == 20

    def test_bad_dt_rejected(self):
        state = WallState.from_radius(grid(), 1.0)
        with pytest.raises(TubeflowError):
            advance_time_step(state, RigidWall(), FLUID,
                              PressureBC(1.0, 0.0), dt=0.0)

    def test_unknown_law_rejected(self):
        state = WallState.from_radius(grid(), 1.0)
        with pytest.raises(TubeflowError):
            advance_time_step(state, object(), FLUID,
                              PressureBC(1.0, 0.0), dt=0.1)

    def test_residual_monotone_after_burn_in(self):
        # shipped regression config: moderate stiffness, pressure ramp
        law = ElasticWall(E=1e3, h0=0.1, R0=1.0)
        state = WallState.from_radius(grid(), 1.0)
        history = []

        import tubeflow.coupling as coupling_mod
        original = coupling_mod.apply_wall_law

        def spy(law_, p0):
            r = original(law_, p0)
            history.append(r.copy())
            return r

        coupling_mod.apply_wall_law = spy
        try:
            advance_time_step(state, law, FLUID, PressureBC(5.0, 0.0), dt=0.05)
        finally:
            coupling_mod.apply_wall_law = original
        resids = [np.max(np.abs(history[i + 1] - history[i]))
                  for i in range(len(history) - 1)]
        assert all(r2 <= r1 * (1 + 1e-12)
                   for r1, r2 in zip(resids[2:], resids[3:]))
