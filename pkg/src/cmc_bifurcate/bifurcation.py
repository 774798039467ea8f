"""Bifurcation-point location, branch switching, and pseudo-arclength
continuation of the non-rotational bulge branches.

The nonlinear system pairs the constant-mean-curvature defect 2(H - H(u)) on
interior nodes with, for the wedge, a contact-angle defect on the free-edge
column.  Wedge graphs transport the unknown along a field that is tangent to
the support plane at the free edge, so the contact line stays on the support
and the linearized boundary row reproduces the Robin operator
(1/r)(v_s - r q v).  Continuation runs on the half-period grid with Neumann
ends in t: that restriction selects one representative from each
translation orbit and keeps the kernel one-dimensional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import spectrum as spect
from .errors import (ContinuationStalled, DegenerateKernel, GraphDegenerate,
                     InvalidConfig, NewtonDiverged, NoBifurcation)
from .geometry import (Convexity, CylinderConfig, Grid, ScalarField, Scenario,
                       SurfaceMesh, TMode, _deriv, _t_bc, arc_tangent,
                       build_grid, directed_graph, field_inner, mean_curvature,
                       normal_graph, quad_weights, unit_normal)
from .oracle import full_2d_jacobi_spectrum

# Half-width of the eigenvalue band certifying a simple kernel (scaled 1/r^2).
KERNEL_BAND = 1e-4
NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 30
FD_STEP = 1e-6


@dataclass
class BifurcationPoint:
    """Critical data at a simple-eigenvalue crossing of the trivial branch."""

    H0: float
    T: float
    kernel: ScalarField
    kernel_dim: int
    transversality: float
    config: CylinderConfig
    case: spect.CaseId | None
    kernel_eigenvalue: float


@dataclass
class BranchState:
    """One accepted point on a continued branch."""

    u: ScalarField
    H: float
    epsilon: float
    arclength: float
    residual_norm: float
    point: BifurcationPoint


# ---------------------------------------------------------------------------
# Discrete nonlinear system

class _System:
    """Free-node residual, quadrature, and colored finite-difference Jacobian."""

    def __init__(self, config: CylinderConfig, grid: Grid):
        self.config = config
        self.grid = grid
        self.wedge = config.scenario is Scenario.RIGHT_WEDGE

        if grid.t_mode is TMode.DIRICHLET_ENDS:
            self.t_free = list(range(1, grid.nt - 1))
        else:
            self.t_free = list(range(grid.nt))
        s_hi = grid.ns - 1 if self.wedge else grid.ns - 2
        self.s_free = list(range(1, s_hi + 1))
        self.shape = (len(self.t_free), len(self.s_free))
        self.n_free = self.shape[0] * self.shape[1]

        wt, ws = quad_weights(grid)
        w2 = config.r * np.outer(wt, ws)
        self.w_free = w2[np.ix_(self.t_free, self.s_free)].ravel()

        if self.wedge:
            rq = config.robin_coefficient * config.r
            s = grid.s
            blend = -rq * (s - grid.s_lo) / (grid.s_hi - grid.s_lo)
            self.directions = (unit_normal(grid)
                               + blend[None, :, None] * arc_tangent(grid)).copy()
            sigma = 1.0 if config.convexity is Convexity.CONVEX else -1.0
            beta_end = grid.s_hi
            n_end = np.array([0.0, -math.cos(beta_end), -math.sin(beta_end)])
            e_end = np.array([0.0, -math.sin(beta_end), math.cos(beta_end)])
            self.plane_normal = math.cos(config.gamma) * n_end \
                + sigma * math.sin(config.gamma) * e_end
        else:
            self.directions = None
            self.plane_normal = None

        self._pattern = None

    # -- packing ------------------------------------------------------------

    def pack(self, u_full: np.ndarray) -> np.ndarray:
        return u_full[np.ix_(self.t_free, self.s_free)].ravel()

    def unpack(self, x: np.ndarray) -> np.ndarray:
        u = np.zeros((self.grid.nt, self.grid.ns))
        u[np.ix_(self.t_free, self.s_free)] = x.reshape(self.shape)
        return u

    # -- geometry -----------------------------------------------------------

    def mesh(self, u_full: np.ndarray) -> SurfaceMesh:
        field = ScalarField(self.grid, u_full)
        if self.wedge:
            return directed_graph(self.config, self.grid, field, self.directions)
        return normal_graph(self.config, self.grid, field)

    def angle_defect(self, mesh: SurfaceMesh) -> np.ndarray:
        """cos(angle between the graph normal and the support normal) - cos(gamma)
        along the free-edge column."""
        g = self.grid
        P = mesh.positions
        tbc = _t_bc(g)
        if tbc == "onesided":
            Pt = _deriv(P, g.dt, 0, "onesided", 1)
        else:
            Pt = _deriv(P, g.dt, 0, tbc, 1, g.t_extent, "point")
        edge_t = Pt[:, -1, :]
        edge_s = (3.0 * P[:, -1, :] - 4.0 * P[:, -2, :] + P[:, -3, :]) / (2.0 * g.ds)
        w = np.cross(edge_t, edge_s)
        w /= np.linalg.norm(w, axis=-1, keepdims=True)
        return w @ self.plane_normal - math.cos(self.config.gamma)

    # -- residual -----------------------------------------------------------

    def residual_field(self, u_full: np.ndarray, H: float) -> np.ndarray:
        mesh = self.mesh(u_full)
        Hvals = mean_curvature(mesh).values
        R = 2.0 * (H - Hvals)
        R[:, 0] = u_full[:, 0]
        if self.wedge:
            R[:, -1] = self.angle_defect(mesh)
        else:
            R[:, -1] = u_full[:, -1]
        if self.grid.t_mode is TMode.DIRICHLET_ENDS:
            R[0, :] = u_full[0, :]
            R[-1, :] = u_full[-1, :]
        return R

    def residual_free(self, x: np.ndarray, H: float) -> np.ndarray:
        return self.residual_field(self.unpack(x), H)[
            np.ix_(self.t_free, self.s_free)].ravel()

    def dresidual_dH(self) -> np.ndarray:
        col = np.full((self.grid.nt, self.grid.ns), 2.0)
        if self.wedge:
            col[:, -1] = 0.0
        return col[np.ix_(self.t_free, self.s_free)].ravel()

    def trivial_mean_curvature(self) -> float:
        Hvals = mean_curvature(self.mesh(np.zeros((self.grid.nt, self.grid.ns))))
        ti = self.t_free[len(self.t_free) // 2]
        si = self.s_free[len(self.s_free) // 2]
        return float(Hvals.values[ti, si])

    # -- colored finite-difference Jacobian ---------------------------------

    def _map_t(self, i: int) -> int | None:
        nt = self.grid.nt
        if 0 <= i < nt:
            return i
        if self.grid.t_mode is TMode.PERIODIC:
            return i % nt
        if self.grid.t_mode is TMode.HALF_PERIOD_NEUMANN:
            return -i if i < 0 else 2 * (nt - 1) - i
        return None  # Dirichlet row, not an unknown

    def _build_pattern(self):
        if self.grid.t_mode is TMode.PERIODIC:
            raise InvalidConfig("Newton solves need a non-periodic axial grid")
        nt, ns = self.grid.nt, self.grid.ns
        free_index = -np.ones((nt, ns), dtype=np.int64)
        for a, ti in enumerate(self.t_free):
            for b, sj in enumerate(self.s_free):
                free_index[ti, sj] = a * self.shape[1] + b
        rows, cols = [], []
        for ti in self.t_free:
            for sj in self.s_free:
                r_idx = free_index[ti, sj]
                tset = {self._map_t(ti - 1), ti, self._map_t(ti + 1)}
                tset.discard(None)
                if self.wedge and sj == ns - 1:
                    deps = {(ti, ns - 1), (ti, ns - 2), (ti, ns - 3)}
                    deps |= {(tk, ns - 1) for tk in tset}
                else:
                    deps = {(tk, sk) for tk in tset
                            for sk in (sj - 1, sj, sj + 1)}
                for (tk, sk) in deps:
                    c_idx = free_index[tk, sk]
                    if c_idx >= 0:
                        rows.append(r_idx)
                        cols.append(c_idx)
        rows = np.array(rows, dtype=np.int64)
        cols = np.array(cols, dtype=np.int64)
        col_t = np.array(self.t_free, dtype=np.int64)[cols // self.shape[1]]
        col_s = np.array(self.s_free, dtype=np.int64)[cols % self.shape[1]]
        color = (col_t % 3) * 3 + (col_s % 3)
        self._pattern = (rows, cols, color)

    def jacobian(self, x: np.ndarray, H: float) -> scipy.sparse.csc_matrix:
        if self._pattern is None:
            self._build_pattern()
        rows, cols, color = self._pattern
        vals = np.zeros(rows.size)
        delta = FD_STEP * (1.0 + float(np.max(np.abs(x))))
        col_color = np.zeros(self.n_free, dtype=np.int64)
        col_color[cols] = color
        for c in range(9):
            mask_cols = np.flatnonzero(col_color == c)
            if mask_cols.size == 0:
                continue
            pert = np.zeros(self.n_free)
            pert[mask_cols] = delta
            rp = self.residual_free(x + pert, H)
            rm = self.residual_free(x - pert, H)
            d = (rp - rm) / (2.0 * delta)
            sel = color == c
            vals[sel] = d[rows[sel]]
        return scipy.sparse.coo_matrix((vals, (rows, cols)),
                                       shape=(self.n_free, self.n_free)).tocsc()


def _newton(system: _System, x: np.ndarray, H: float, a_u: np.ndarray,
            a_h: float, target: float, tol: float = NEWTON_TOL,
            max_iter: int = NEWTON_MAX_ITER) -> tuple[np.ndarray, float, float, int]:
    """Solve {residual = 0, <a_u, x> + a_h H = target} by bordered Newton."""
    n = system.n_free
    dh = system.dresidual_dH()
    prev_step = math.inf
    growth = 0
    for it in range(1, max_iter + 1):
        r = system.residual_free(x, H)
        c = float(np.dot(a_u, x)) + a_h * H - target
        resnorm = float(np.max(np.abs(r)))
        if resnorm <= tol and abs(c) <= tol * (1.0 + abs(target)):
            return x, H, resnorm, it - 1
        jac = system.jacobian(x, H)
        top = scipy.sparse.hstack([jac, scipy.sparse.csc_matrix(dh[:, None])])
        bottom = scipy.sparse.hstack(
            [scipy.sparse.csc_matrix(a_u[None, :]),
             scipy.sparse.csc_matrix([[a_h]])])
        full = scipy.sparse.vstack([top, bottom]).tocsc()
        rhs = -np.concatenate([r, [c]])
        step = scipy.sparse.linalg.splu(full).solve(rhs)
        x = x + step[:n]
        H = H + float(step[n])
        step_norm = float(np.linalg.norm(step))
        if step_norm > prev_step:
            growth += 1
            if growth >= 2:
                raise NewtonDiverged(
                    f"step norm grew twice consecutively at iteration {it}")
        else:
            growth = 0
        prev_step = step_norm
    raise NewtonDiverged(f"no convergence in {max_iter} iterations")


# ---------------------------------------------------------------------------
# Public operations

def residual(config: CylinderConfig, grid: Grid, u: ScalarField,
             H: float) -> ScalarField:
    """Full-grid residual: 2(H - H(u)) on interior nodes, u on pinned rows and
    columns, the contact-angle defect on the wedge free-edge column."""
    system = _System(config, grid)
    return ScalarField(grid, system.residual_field(u.values, H))


def locate_bifurcation(config: CylinderConfig,
                       t_mode: TMode = TMode.HALF_PERIOD_NEUMANN,
                       search: tuple[float, float] | None = None,
                       nt: int = 64, ns: int | None = None) -> BifurcationPoint:
    """Critical point on the trivial branch with simple-kernel verification.

    The period comes from the closed-form module; the kernel comes from the
    assembled 2D operator on the symmetry-restricted grid; the transversality
    value is the quadrature of u0 * 8 H0 ((u0)_ss + u0).

    ns defaults to 64 for the strip and 192 for the wedge: the Robin edge is
    second-order, so the wedge needs the finer arc grid to place the kernel
    eigenvalue inside the certification band.
    """
    if ns is None:
        ns = 64 if config.scenario is Scenario.PLANAR_STRIP else 192
    T, case = spect.bifurcation_period(config)
    H0 = 1.0 / (2.0 * config.r)
    if search is not None and not (search[0] <= H0 <= search[1]):
        raise NoBifurcation(
            f"critical mean curvature {H0:.6g} outside search interval {search}")
    extent = T / 2.0 if t_mode is TMode.HALF_PERIOD_NEUMANN else T
    grid = build_grid(config, nt, ns, extent, t_mode)
    pairs = full_2d_jacobi_spectrum(config, grid, m=6)
    band = KERNEL_BAND / (config.r * config.r)
    in_band = [(lam, f) for lam, f in pairs if abs(lam) < band]
    if len(in_band) != 1:
        raise DegenerateKernel(
            f"{len(in_band)} eigenvalues inside (-{band:g}, {band:g}); "
            "expected exactly one")
    if pairs[-1][0] <= band:
        raise DegenerateKernel("kernel band not isolated within the computed window")
    lam_ker, kernel = in_band[0]

    u0 = kernel.values
    u0_ss = _deriv(u0, grid.ds, 1, "onesided", 2)
    forcing = 8.0 * H0 * (u0_ss + u0)
    trans = field_inner(config, grid, u0, forcing)
    return BifurcationPoint(H0=H0, T=T, kernel=kernel, kernel_dim=1,
                            transversality=trans, config=config, case=case,
                            kernel_eigenvalue=lam_ker)


def _trivial_state(point: BifurcationPoint, system: _System) -> tuple[np.ndarray, float, float]:
    """Discrete cylinder state at fixed H by a t-independent reduced solve.

    The full bordered system is singular along the trivial family (the family
    tangent is t-independent, hence orthogonal to the kernel constraint), so
    the trivial state is computed on the 1D arc problem, which is regular.
    """
    cfg = point.config
    grid = point.kernel.grid
    small = build_grid(cfg, 4, grid.ns, grid.t_extent, grid.t_mode)
    ssys = _System(cfg, small)
    ns_free = len(ssys.s_free)
    H = ssys.trivial_mean_curvature()
    mid_row = ssys.t_free[len(ssys.t_free) // 2]

    def r1d(y):
        u = np.zeros((small.nt, small.ns))
        u[:, ssys.s_free] = y[None, :]
        return ssys.residual_field(u, H)[mid_row, ssys.s_free]

    y = np.zeros(ns_free)
    resnorm = float(np.max(np.abs(r1d(y))))
    for _ in range(NEWTON_MAX_ITER):
        if resnorm <= NEWTON_TOL:
            break
        r = r1d(y)
        jac = np.zeros((ns_free, ns_free))
        delta = FD_STEP * (1.0 + float(np.max(np.abs(y))))
        for c in range(3):
            cols = np.arange(ns_free)[np.arange(ns_free) % 3 == c]
            pert = np.zeros(ns_free)
            pert[cols] = delta
            d = (r1d(y + pert) - r1d(y - pert)) / (2.0 * delta)
            for col in cols:
                rows = list(range(max(0, col - 1), min(ns_free, col + 2)))
                if ssys.wedge and ssys.s_free[col] >= small.ns - 3:
                    rows.append(ns_free - 1)
                jac[sorted(set(rows)), col] = d[sorted(set(rows))]
        y = y - np.linalg.solve(jac, r)
        resnorm = float(np.max(np.abs(r1d(y))))
    else:
        raise NewtonDiverged("reduced trivial-state solve did not converge")
    u_full = np.zeros((grid.nt, grid.ns))
    u_full[:, ssys.s_free] = y[None, :]
    x = system.pack(u_full)
    resnorm = float(np.max(np.abs(system.residual_free(x, H))))
    return x, H, resnorm


def branch_switch(point: BifurcationPoint, epsilon: float) -> BranchState:
    """Solve {residual = 0, <u, kernel> = epsilon} from the tangent predictor."""
    system = _System(point.config, point.kernel.grid)
    k_free = system.pack(point.kernel.values)
    a_u = system.w_free * k_free
    x_triv, h_triv, res_triv = _trivial_state(point, system)
    if epsilon == 0.0:
        u = ScalarField(point.kernel.grid, system.unpack(x_triv))
        return BranchState(u=u, H=h_triv, epsilon=0.0, arclength=0.0,
                           residual_norm=res_triv, point=point)
    x, H, resnorm, _ = _newton(system, x_triv + epsilon * k_free, h_triv,
                               a_u, 0.0, epsilon)
    u = ScalarField(point.kernel.grid, system.unpack(x))
    eps = float(np.dot(a_u, x))
    return BranchState(u=u, H=H, epsilon=eps, arclength=0.0,
                       residual_norm=resnorm, point=point)


def continue_branch(start: BranchState, steps: int, ds: float) -> list[BranchState]:
    """Pseudo-arclength continuation with a secant predictor.

    Steps halve on Newton failure (floor ds/64, then ContinuationStalled) and
    double after three easy successes (cap 4 ds).
    """
    point = start.point
    system = _System(point.config, point.kernel.grid)
    k_free = system.pack(point.kernel.values)
    a_k = system.w_free * k_free
    x_triv, h_triv, _ = _trivial_state(point, system)

    def wnorm(dx, dH):
        return math.sqrt(float(np.dot(system.w_free, dx * dx)) + dH * dH)

    x_cur = system.pack(start.u.values)
    h_cur = start.H
    tau_x = x_cur - x_triv
    tau_h = h_cur - h_triv
    nrm = wnorm(tau_x, tau_h)
    if nrm == 0.0:
        raise InvalidConfig("continuation start coincides with the trivial state")
    tau_x /= nrm
    tau_h /= nrm

    states: list[BranchState] = []
    ds0 = ds
    step_size = ds
    easy = 0
    arclength = start.arclength
    while len(states) < steps:
        x_pred = x_cur + step_size * tau_x
        h_pred = h_cur + step_size * tau_h
        a_u = system.w_free * tau_x
        target = float(np.dot(a_u, x_pred)) + tau_h * h_pred
        try:
            x_new, h_new, resnorm, iters = _newton(system, x_pred, h_pred,
                                                   a_u, tau_h, target)
        except (NewtonDiverged, GraphDegenerate):
            step_size /= 2.0
            easy = 0
            if step_size < ds0 / 64.0:
                raise ContinuationStalled(
                    f"step underflow below {ds0 / 64.0:g}") from None
            continue
        dx = x_new - x_cur
        dh = h_new - h_cur
        advance = wnorm(dx, dh)
        if advance == 0.0:
            raise ContinuationStalled("corrector made no progress")
        arclength += advance
        tau_x = dx / advance
        tau_h = dh / advance
        x_cur, h_cur = x_new, h_new
        states.append(BranchState(
            u=ScalarField(point.kernel.grid, system.unpack(x_new)),
            H=h_new, epsilon=float(np.dot(a_k, x_new)),
            arclength=arclength, residual_norm=resnorm, point=point))
        if iters <= 4:
            easy += 1
            if easy >= 3:
                step_size = min(2.0 * step_size, 4.0 * ds0)
                easy = 0
        else:
            easy = 0
    return states


def check_alexandrov_symmetry(state: BranchState) -> float:
    """Max nodewise defect of the reflection s -> (s_lo + s_hi) - s."""
    if state.point.config.scenario is not Scenario.PLANAR_STRIP:
        raise InvalidConfig("reflection symmetry check applies to the planar strip")
    u = state.u.values
    return float(np.max(np.abs(u - u[:, ::-1])))


def state_mesh(state: BranchState) -> SurfaceMesh:
    """Embedded surface of a branch state (wedge states use the transported graph)."""
    system = _System(state.point.config, state.u.grid)
    return system.mesh(state.u.values)
