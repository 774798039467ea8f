"""Residual structure, bifurcation points, branch switching, continuation."""

import math

import numpy as np
import pytest

from cmc_bifurcate import (CylinderConfig, ScalarField, Scenario, TMode,
                           branch_switch, build_grid, check_alexandrov_symmetry,
                           continue_branch, jacobi_apply, locate_bifurcation,
                           mesh_to_obj, residual, state_mesh)
from cmc_bifurcate.errors import (ContinuationStalled, GraphDegenerate,
                                  InvalidConfig, NewtonDiverged, NoBifurcation)
from cmc_bifurcate.geometry import field_norm
from cmc_bifurcate.spectrum import CaseId

from conftest import smooth_field


class TestResidual:
    def test_trivial_branch(self, planar_wide):
        g = build_grid(planar_wide, 32, 32, 4.0, TMode.DIRICHLET_ENDS)
        u = ScalarField.zeros(g)
        R = residual(planar_wide, g, u, 0.5)
        # interior defect is pure curvature truncation, O(ds^2)
        assert np.max(np.abs(R.values)) < 8e-3
        # pinned rows and columns report the field itself (zero here)
        assert np.all(R.values[:, 0] == 0.0)
        assert np.all(R.values[0, :] == 0.0)

    def test_constant_shift_is_exact(self, planar_wide):
        g = build_grid(planar_wide, 32, 32, 4.0, TMode.DIRICHLET_ENDS)
        u = ScalarField(g, 0.05 * smooth_field(g, seed=1))
        r1 = residual(planar_wide, g, u, 0.5).values
        r2 = residual(planar_wide, g, u, 0.6).values
        inner = (slice(1, -1), slice(1, -1))
        assert np.allclose(r2[inner] - r1[inner], 0.2, atol=1e-14)
        approx = residual(planar_wide, g, ScalarField.zeros(g), 0.6).values
        assert np.allclose(approx[inner], 0.2, atol=8e-3)

    def test_kernel_direction_leaves_quadratic_remainder(self, planar_wide):
        point = locate_bifurcation(planar_wide, nt=48, ns=48)
        g = point.kernel.grid
        h_discrete = 0.5 / math.cos(g.ds / 2.0) ** 2  # discrete trivial H

        def rnorm(eps):
            u = ScalarField(g, eps * point.kernel.values)
            R = residual(planar_wide, g, u, h_discrete)
            return float(np.max(np.abs(R.values[1:-1, 1:-1])))

        r2, r1 = rnorm(2e-2), rnorm(1e-2)
        assert 2.5 < r2 / r1 < 5.5  # quadratic in the amplitude
        assert rnorm(1e-3) < 5e-5

    def test_wedge_angle_row_zero_on_cylinder(self, wedge_exp):
        g = build_grid(wedge_exp, 16, 64, 3.0, TMode.DIRICHLET_ENDS)
        R = residual(wedge_exp, g, ScalarField.zeros(g), 0.5)
        assert np.max(np.abs(R.values[1:-1, -1])) < 1e-4

    def test_graph_degenerate_propagates(self, planar_wide):
        g = build_grid(planar_wide, 16, 16, 4.0, TMode.DIRICHLET_ENDS)
        u = ScalarField(g, np.full((16, 16), 0.95))
        with pytest.raises(GraphDegenerate):
            residual(planar_wide, g, u, 0.5)


class TestLocate:
    def test_planar_point(self, planar_wide):
        point = locate_bifurcation(planar_wide, nt=48, ns=48)
        assert point.H0 == 0.5
        assert point.T == pytest.approx(6 * math.pi / math.sqrt(5.0), rel=1e-14)
        assert point.kernel_dim == 1
        assert abs(point.kernel_eigenvalue) < 1e-4
        gamma = planar_wide.gamma
        expect = 8 * point.H0 * (1 - math.pi ** 2 / (4 * gamma ** 2))
        assert point.transversality == pytest.approx(expect, rel=0.01)
        assert field_norm(planar_wide, point.kernel.grid,
                          point.kernel.values) == pytest.approx(1.0, rel=1e-9)

    def test_transversality_sign_never_vanishes(self):
        for gamma in (0.55 * math.pi, 0.75 * math.pi, 0.9 * math.pi):
            cfg = CylinderConfig(Scenario.PLANAR_STRIP, r=1.0, gamma=gamma)
            point = locate_bifurcation(cfg, nt=32, ns=32)
            assert point.transversality > 1e-6

    def test_stable_configs_refuse(self):
        cfg = CylinderConfig(Scenario.PLANAR_STRIP, r=1.0, gamma=math.pi / 3)
        with pytest.raises(NoBifurcation):
            locate_bifurcation(cfg, nt=16, ns=16)

    def test_search_interval_honored(self, planar_wide):
        with pytest.raises(NoBifurcation):
            locate_bifurcation(planar_wide, search=(0.8, 1.2), nt=16, ns=16)

    def test_wedge_linear_point(self, wedge_linear):
        point = locate_bifurcation(wedge_linear, nt=32, ns=64)
        assert point.case is CaseId.CONVEX_LINEAR
        assert point.T == pytest.approx(2 * math.pi, rel=1e-14)
        # kernel mode has no arc curvature: transversality = 8 H0 |u0|^2 = 4
        assert point.transversality == pytest.approx(4.0, rel=1e-3)


class TestBranchSwitch:
    def test_zero_amplitude_returns_trivial(self, planar_wide):
        point = locate_bifurcation(planar_wide, nt=32, ns=32)
        st = branch_switch(point, 0.0)
        assert st.epsilon == 0.0
        assert np.max(np.abs(st.u.values)) == 0.0
        assert st.H == pytest.approx(0.5, abs=5e-3)
        assert st.residual_norm < 1e-10

    def test_pitchfork_symmetry(self, planar_wide):
        point = locate_bifurcation(planar_wide, nt=32, ns=32)
        a = branch_switch(point, 1e-2)
        b = branch_switch(point, -1e-2)
        assert a.residual_norm < 1e-10 and b.residual_norm < 1e-10
        assert a.epsilon == pytest.approx(1e-2, rel=1e-10)
        assert abs(a.H - b.H) < 1e-8
        # the two states are t-reflections of each other
        assert np.max(np.abs(a.u.values - b.u.values[::-1, :])) < 1e-8

    def test_wedge_switch(self, wedge_linear):
        point = locate_bifurcation(wedge_linear, nt=32, ns=64)
        st = branch_switch(point, 5e-3)
        assert st.residual_norm < 1e-10
        assert st.epsilon == pytest.approx(5e-3, rel=1e-9)

    def test_out_of_regime_amplitude(self, planar_wide):
        point = locate_bifurcation(planar_wide, nt=32, ns=32)
        try:
            st = branch_switch(point, 0.5 * planar_wide.r)
        except (NewtonDiverged, GraphDegenerate):
            return  # acceptable outside the local theory
        assert st.residual_norm < 1e-10


class TestJacobianConsistency:
    def test_linearization_matches_jacobi_operator(self, planar_wide):
        g = build_grid(planar_wide, 48, 48, 4.0, TMode.DIRICHLET_ENDS)
        v = smooth_field(g, seed=21)
        eps = 1e-6
        rp = residual(planar_wide, g, ScalarField(g, eps * v), 0.5).values
        rm = residual(planar_wide, g, ScalarField(g, -eps * v), 0.5).values
        jv = (rp - rm) / (2 * eps)
        Lv = jacobi_apply(planar_wide, g, ScalarField(g, v)).values
        inner = (slice(1, -1), slice(1, -1))
        err = np.max(np.abs(jv[inner] + Lv[inner]))
        assert err < 2e-2 * np.max(np.abs(Lv))


class TestContinuation:
    def test_planar_branch_structure(self, planar_wide):
        point = locate_bifurcation(planar_wide, nt=32, ns=32)
        start = branch_switch(point, 1e-2)
        states = continue_branch(start, 8, 5e-3)
        assert len(states) == 8
        eps = [s.epsilon for s in states]
        assert all(b > a for a, b in zip(eps, eps[1:]))
        assert all(s.residual_norm < 1e-10 for s in states)
        assert all(check_alexandrov_symmetry(s) < 1e-8 for s in states)
        assert all(s.arclength > 0 for s in states)
        # non-rotational: genuine t-dependence along some arc row
        last = states[-1]
        swing = float(np.max(last.u.values.max(axis=0) - last.u.values.min(axis=0)))
        assert swing > 0.5 * abs(last.epsilon)

    def test_reversed_tangent_traverses_mirror_branch(self, planar_wide):
        point = locate_bifurcation(planar_wide, nt=32, ns=32)
        start = branch_switch(point, -1e-2)
        states = continue_branch(start, 4, 5e-3)
        eps = [s.epsilon for s in states]
        assert all(e < 0 for e in eps)
        assert all(b < a for a, b in zip(eps, eps[1:]))

    def test_stall_on_absurd_step(self, planar_wide):
        point = locate_bifurcation(planar_wide, nt=32, ns=32)
        start = branch_switch(point, 1e-2)
        with pytest.raises(ContinuationStalled):
            continue_branch(start, 3, 1e4)

    def test_wedge_branch(self, wedge_linear):
        point = locate_bifurcation(wedge_linear, nt=32, ns=64)
        start = branch_switch(point, 1e-2)
        states = continue_branch(start, 4, 5e-3)
        assert all(s.residual_norm < 1e-10 for s in states)
        assert states[-1].epsilon > states[0].epsilon


class TestSymmetryCheck:
    def test_trivial_state_symmetric(self, planar_wide):
        point = locate_bifurcation(planar_wide, nt=32, ns=32)
        assert check_alexandrov_symmetry(branch_switch(point, 0.0)) == 0.0

    def test_injected_asymmetry_measured(self, planar_wide):
        point = locate_bifurcation(planar_wide, nt=32, ns=32)
        st = branch_switch(point, 1e-2)
        st.u.values[3, 5] += 1e-3
        assert check_alexandrov_symmetry(st) == pytest.approx(1e-3, rel=1e-3)

    def test_wedge_rejected(self, wedge_linear):
        point = locate_bifurcation(wedge_linear, nt=32, ns=64)
        st = branch_switch(point, 0.0)
        with pytest.raises(InvalidConfig):
            check_alexandrov_symmetry(st)


def test_state_mesh_exports(planar_wide):
    point = locate_bifurcation(planar_wide, nt=32, ns=32)
    st = branch_switch(point, 1e-2)
    text = mesh_to_obj(state_mesh(st))
    assert text.startswith("v ")
    assert text == mesh_to_obj(state_mesh(st))
