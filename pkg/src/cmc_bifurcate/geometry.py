"""Cylinder configurations, grids, normal graphs, and discrete curvature operators.

Both scenarios live on the parametrization X(t, s) = (t, r cos s, r sin s)
(the planar strip subtracts the vertical offset r cos(gamma) so its boundary
lines sit in the support plane z = 0).  The unit normal points toward the
convex side (to the axis), so the unperturbed mean curvature is +1/(2r) and a
positive graph amplitude shrinks the radius.

Discretization: uniform tensor grids, second-order stencils (centered in the
interior, one-sided at physical edges, ghost reflection for Neumann rows,
wrap for periodic rows), trapezoidal quadrature with surface element r dt ds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateMetric, GraphDegenerate, InvalidConfig

# Normal-graph amplitude guard: |u| beyond this fraction of r is rejected
# before the metric actually collapses, to keep Newton iterates safe.
GRAPH_GUARD = 0.9


class Scenario(Enum):
    PLANAR_STRIP = "planar-strip"
    RIGHT_WEDGE = "right-wedge"


class Convexity(Enum):
    CONVEX = "convex"
    CONCAVE = "concave"


class TMode(Enum):
    DIRICHLET_ENDS = "dirichlet-ends"
    PERIODIC = "periodic"
    HALF_PERIOD_NEUMANN = "half-period-neumann"


@dataclass(frozen=True)
class CylinderConfig:
    """Geometric truth for one supported cylinder.

    Planar strip: arc s in [pi/2 - gamma, pi/2 + gamma], both boundary lines
    pinned (Dirichlet).  Right wedge: arc s in [0, beta], line s = 0 pinned,
    line s = beta free on the support plane with contact angle gamma.
    """

    scenario: Scenario
    r: float
    gamma: float
    beta: float | None = None
    convexity: Convexity | None = None

    def __post_init__(self):
        if not (self.r > 0):
            raise InvalidConfig(f"radius must be positive, got {self.r}")
        if not (0 < self.gamma < math.pi):
            raise InvalidConfig(f"contact angle must be in (0, pi), got {self.gamma}")
        if self.scenario is Scenario.PLANAR_STRIP:
            if self.beta is not None or self.convexity is not None:
                raise InvalidConfig("planar-strip takes no beta/convexity")
        else:
            if self.beta is None or self.convexity is None:
                raise InvalidConfig("right-wedge requires beta and convexity")
            if not (0 < self.beta < 1.5 * math.pi):
                raise InvalidConfig(f"beta must be in (0, 3pi/2), got {self.beta}")
            if self.convexity is Convexity.CONCAVE:
                if not (self.gamma < math.pi / 2):
                    raise InvalidConfig("concave wedge requires gamma < pi/2")
                if not (self.beta < math.pi / 2 - self.gamma):
                    raise InvalidConfig("concave wedge requires beta < pi/2 - gamma")

    @property
    def s_interval(self) -> tuple[float, float]:
        if self.scenario is Scenario.PLANAR_STRIP:
            return (math.pi / 2 - self.gamma, math.pi / 2 + self.gamma)
        return (0.0, self.beta)

    @property
    def robin_coefficient(self) -> float:
        """q in the free-boundary condition du/dnu - q u = 0 on the wedge.

        Positive for convex cylinders, negative for concave ones.
        """
        if self.scenario is not Scenario.RIGHT_WEDGE:
            raise InvalidConfig("robin coefficient only defined for the wedge")
        sign = 1.0 if self.convexity is Convexity.CONVEX else -1.0
        return sign / (self.r * math.tan(self.gamma))


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product (t, s) grid."""

    nt: int
    ns: int
    t_extent: float
    t_mode: TMode
    s_lo: float
    s_hi: float

    @property
    def dt(self) -> float:
        if self.t_mode is TMode.PERIODIC:
            return self.t_extent / self.nt
        return self.t_extent / (self.nt - 1)

    @property
    def ds(self) -> float:
        return (self.s_hi - self.s_lo) / (self.ns - 1)

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.nt) * self.dt

    @property
    def s(self) -> np.ndarray:
        return self.s_lo + np.arange(self.ns) * self.ds


def build_grid(config: CylinderConfig, nt: int, ns: int, t_extent: float,
               t_mode: TMode) -> Grid:
    if nt < 4 or ns < 4:
        raise InvalidConfig(f"grid needs nt, ns >= 4, got {nt}x{ns}")
    if not (t_extent > 0):
        raise InvalidConfig(f"t_extent must be positive, got {t_extent}")
    s_lo, s_hi = config.s_interval
    return Grid(nt=int(nt), ns=int(ns), t_extent=float(t_extent), t_mode=t_mode,
                s_lo=s_lo, s_hi=s_hi)


@dataclass
class ScalarField:
    """A real-valued function sampled on a grid (perturbations, modes, residuals)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.nt, self.grid.ns):
            raise InvalidConfig(
                f"field shape {self.values.shape} does not match grid "
                f"{(self.grid.nt, self.grid.ns)}")

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros((grid.nt, grid.ns)))

    @classmethod
    def from_function(cls, grid: Grid, f) -> "ScalarField":
        tt, ss = np.meshgrid(grid.t, grid.s, indexing="ij")
        return cls(grid, f(tt, ss))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class SurfaceMesh:
    """Embedded positions X(t, s) over a grid; orientation fixes the normal sign."""

    grid: Grid
    positions: np.ndarray
    normal_orientation: int = 1

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.positions.shape != (self.grid.nt, self.grid.ns, 3):
            raise InvalidConfig("positions must have shape (nt, ns, 3)")


# ---------------------------------------------------------------------------
# Immersion

def base_positions(config: CylinderConfig, grid: Grid) -> np.ndarray:
    """Exact cylinder positions X(t, s) at zero perturbation."""
    t = grid.t
    s = grid.s
    x = np.broadcast_to(t[:, None], (grid.nt, grid.ns))
    y = np.broadcast_to(config.r * np.cos(s)[None, :], (grid.nt, grid.ns))
    z = config.r * np.sin(s)[None, :]
    if config.scenario is Scenario.PLANAR_STRIP:
        z = z - config.r * math.cos(config.gamma)
    z = np.broadcast_to(z, (grid.nt, grid.ns))
    return np.stack([x, y, z], axis=-1)


def unit_normal(grid: Grid) -> np.ndarray:
    """Unit normal of the unperturbed cylinder, pointing to the axis."""
    s = grid.s
    n = np.stack([np.zeros_like(s), -np.cos(s), -np.sin(s)], axis=-1)
    return np.broadcast_to(n[None, :, :], (grid.nt, grid.ns, 3))


def arc_tangent(grid: Grid) -> np.ndarray:
    """Unit tangent along the arc direction (d/ds of the cross-section circle)."""
    s = grid.s
    e = np.stack([np.zeros_like(s), -np.sin(s), np.cos(s)], axis=-1)
    return np.broadcast_to(e[None, :, :], (grid.nt, grid.ns, 3))


def normal_graph(config: CylinderConfig, grid: Grid, u: ScalarField) -> SurfaceMesh:
    """Surface X = base + u N.  Rejects amplitudes past the immersion guard."""
    amax = float(np.max(np.abs(u.values)))
    if amax >= GRAPH_GUARD * config.r:
        raise GraphDegenerate(
            f"graph amplitude {amax:.6g} exceeds {GRAPH_GUARD:g} r = "
            f"{GRAPH_GUARD * config.r:.6g}")
    pos = base_positions(config, grid) + u.values[:, :, None] * unit_normal(grid)
    return SurfaceMesh(grid=grid, positions=pos)


def directed_graph(config: CylinderConfig, grid: Grid, u: ScalarField,
                   directions: np.ndarray) -> SurfaceMesh:
    """Surface X = base + u Z for a general transport field Z(t, s).

    Z must have unit normal component so the graph guard keeps its meaning.
    """
    amax = float(np.max(np.abs(u.values)))
    if amax >= GRAPH_GUARD * config.r:
        raise GraphDegenerate(
            f"graph amplitude {amax:.6g} exceeds {GRAPH_GUARD:g} r = "
            f"{GRAPH_GUARD * config.r:.6g}")
    pos = base_positions(config, grid) + u.values[:, :, None] * directions
    return SurfaceMesh(grid=grid, positions=pos)


# ---------------------------------------------------------------------------
# Finite differences

def _pad_axis0(a: np.ndarray, bc: str, extent: float, reflect: str | None) -> np.ndarray:
    """Add one ghost layer on each side of axis 0.

    bc "wrap": periodic (position arrays get the x-offset of one period);
    bc "mirror": even reflection (position arrays reflect the axial coordinate
    about the end planes; vector arrays flip the axial component).
    """
    if bc == "wrap":
        lo = a[-1:].copy()
        hi = a[:1].copy()
        if reflect == "point":
            lo[..., 0] -= extent
            hi[..., 0] += extent
        return np.concatenate([lo, a, hi], axis=0)
    if bc == "mirror":
        lo = a[1:2].copy()
        hi = a[-2:-1].copy()
        if reflect == "point":
            lo[..., 0] = 2.0 * a[0:1, ..., 0] - lo[..., 0]
            hi[..., 0] = 2.0 * a[-1:, ..., 0] - hi[..., 0]
        elif reflect == "vector":
            lo[..., 0] = -lo[..., 0]
            hi[..., 0] = -hi[..., 0]
        return np.concatenate([lo, a, hi], axis=0)
    raise ValueError(f"unknown padding bc {bc!r}")


def _deriv(a: np.ndarray, h: float, axis: int, bc: str, order: int,
           extent: float = 0.0, reflect: str | None = None) -> np.ndarray:
    """Second-order first (order=1) or second (order=2) derivative along axis.

    bc is one of "wrap", "mirror", "onesided".
    """
    a = np.moveaxis(a, axis, 0)
    if bc in ("wrap", "mirror"):
        p = _pad_axis0(a, bc, extent, reflect)
        if order == 1:
            out = (p[2:] - p[:-2]) / (2.0 * h)
        else:
            out = (p[2:] - 2.0 * p[1:-1] + p[:-2]) / (h * h)
    elif bc == "onesided":
        out = np.empty_like(a)
        if order == 1:
            out[1:-1] = (a[2:] - a[:-2]) / (2.0 * h)
            out[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * h)
            out[-1] = (3.0 * a[-1] - 4.0 * a[-2] + a[-3]) / (2.0 * h)
        else:
            out = np.empty_like(a)
            out[1:-1] = (a[2:] - 2.0 * a[1:-1] + a[:-2]) / (h * h)
            out[0] = (2.0 * a[0] - 5.0 * a[1] + 4.0 * a[2] - a[3]) / (h * h)
            out[-1] = (2.0 * a[-1] - 5.0 * a[-2] + 4.0 * a[-3] - a[-4]) / (h * h)
    else:
        raise ValueError(f"unknown bc {bc!r}")
    return np.moveaxis(out, 0, axis)


def _t_bc(grid: Grid) -> str:
    if grid.t_mode is TMode.PERIODIC:
        return "wrap"
    if grid.t_mode is TMode.HALF_PERIOD_NEUMANN:
        return "mirror"
    return "onesided"


# ---------------------------------------------------------------------------
# Curvature operators

def mean_curvature(mesh: SurfaceMesh) -> ScalarField:
    """Per-node mean curvature from the discrete fundamental forms.

    H = (E n - 2 F m + G l) / (2 (E G - F^2)) with l, m, n the second-form
    coefficients against the cross-product normal; orientation is continuous
    from the unperturbed cylinder, where H = +1/(2r).
    """
    g = mesh.grid
    P = mesh.positions
    tbc = _t_bc(g)

    Pt = _deriv(P, g.dt, 0, tbc, 1, g.t_extent, "point")
    Ptt = _deriv(P, g.dt, 0, tbc, 2, g.t_extent, "point")
    Ps = _deriv(P, g.ds, 1, "onesided", 1)
    Pss = _deriv(P, g.ds, 1, "onesided", 2)
    # mixed derivative: t-derivative of the s-derivative (Ps transforms as a vector)
    Pts = _deriv(Ps, g.dt, 0, tbc, 1, g.t_extent, "vector")

    E = np.einsum("ijk,ijk->ij", Pt, Pt)
    F = np.einsum("ijk,ijk->ij", Pt, Ps)
    G = np.einsum("ijk,ijk->ij", Ps, Ps)
    W = np.cross(Pt, Ps) * mesh.normal_orientation
    det = E * G - F * F
    if np.any(det <= 0.0) or not np.all(np.isfinite(det)):
        raise DegenerateMetric("first fundamental form lost positivity")
    N = W / np.sqrt(np.einsum("ijk,ijk->ij", W, W))[:, :, None]

    l = np.einsum("ijk,ijk->ij", Ptt, N)
    m = np.einsum("ijk,ijk->ij", Pts, N)
    n = np.einsum("ijk,ijk->ij", Pss, N)
    H = (E * n - 2.0 * F * m + G * l) / (2.0 * det)
    return ScalarField(g, H)


def jacobi_apply(config: CylinderConfig, grid: Grid, v: ScalarField) -> ScalarField:
    """Discrete Jacobi operator L v = v_tt + (1/r^2)(v_ss + v).

    Boundary rows follow the grid conventions: periodic wrap or Neumann mirror
    in t, zero output rows at Dirichlet edges, Robin ghost elimination at the
    wedge free edge.
    """
    g = grid
    w = v.values
    r2 = config.r * config.r
    tbc = _t_bc(g)

    if tbc == "onesided":
        vtt = _deriv(w, g.dt, 0, "onesided", 2)
    else:
        vtt = _deriv(w, g.dt, 0, tbc, 2, g.t_extent)

    vss = np.empty_like(w)
    vss[:, 1:-1] = (w[:, 2:] - 2.0 * w[:, 1:-1] + w[:, :-2]) / (g.ds * g.ds)
    vss[:, 0] = 0.0
    if config.scenario is Scenario.PLANAR_STRIP:
        vss[:, -1] = 0.0
    else:
        # ghost from the centered Robin condition v_s = r q v at s = beta
        rq = config.robin_coefficient * config.r
        ghost = w[:, -2] + 2.0 * g.ds * rq * w[:, -1]
        vss[:, -1] = (ghost - 2.0 * w[:, -1] + w[:, -2]) / (g.ds * g.ds)

    out = vtt + (vss + w) / r2
    out[:, 0] = 0.0
    if config.scenario is Scenario.PLANAR_STRIP:
        out[:, -1] = 0.0
    if g.t_mode is TMode.DIRICHLET_ENDS:
        out[0, :] = 0.0
        out[-1, :] = 0.0
    return ScalarField(g, out)


# ---------------------------------------------------------------------------
# Quadrature and the index form

def quad_weights(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid weights in t and s (uniform in t when periodic)."""
    if grid.t_mode is TMode.PERIODIC:
        wt = np.full(grid.nt, grid.dt)
    else:
        wt = np.full(grid.nt, grid.dt)
        wt[0] = wt[-1] = grid.dt / 2.0
    ws = np.full(grid.ns, grid.ds)
    ws[0] = ws[-1] = grid.ds / 2.0
    return wt, ws


def surface_integral(config: CylinderConfig, grid: Grid, f: np.ndarray) -> float:
    """Integral of a nodal function over the surface, element r dt ds."""
    wt, ws = quad_weights(grid)
    return float(config.r * np.einsum("i,j,ij->", wt, ws, f))


def field_inner(config: CylinderConfig, grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    return surface_integral(config, grid, a * b)


def field_norm(config: CylinderConfig, grid: Grid, a: np.ndarray) -> float:
    return math.sqrt(max(0.0, field_inner(config, grid, a, a)))


def index_form(config: CylinderConfig, grid: Grid, u: ScalarField,
               v: ScalarField) -> float:
    """Second-variation quadratic form.

    I(u, v) = int (<grad u, grad v> - uv / r^2) dM - int_{free edge} q u v dt,
    with the cylinder metric (|grad u|^2 = u_t^2 + u_s^2 / r^2, dM = r dt ds)
    and trapezoidal quadrature throughout.
    """
    g = grid
    r2 = config.r * config.r
    tbc = _t_bc(g)
    if tbc == "onesided":
        ut = _deriv(u.values, g.dt, 0, "onesided", 1)
        vt = _deriv(v.values, g.dt, 0, "onesided", 1)
    else:
        ut = _deriv(u.values, g.dt, 0, tbc, 1, g.t_extent)
        vt = _deriv(v.values, g.dt, 0, tbc, 1, g.t_extent)
    us = _deriv(u.values, g.ds, 1, "onesided", 1)
    vs = _deriv(v.values, g.ds, 1, "onesided", 1)

    integrand = ut * vt + us * vs / r2 - u.values * v.values / r2
    total = surface_integral(config, grid, integrand)

    if config.scenario is Scenario.RIGHT_WEDGE:
        wt, _ = quad_weights(grid)
        q = config.robin_coefficient
        edge = float(np.dot(wt, u.values[:, -1] * v.values[:, -1]))
        total -= q * edge
    return total


# ---------------------------------------------------------------------------
# Export

def mesh_to_obj(mesh: SurfaceMesh) -> str:
    """Wavefront OBJ text: vertices in t-major order, quads split to triangles.

    No normals or texture coordinates; ordering is deterministic so repeated
    exports are byte-identical.
    """
    g = mesh.grid
    lines = []
    for i in range(g.nt):
        for j in range(g.ns):
            x, y, z = mesh.positions[i, j]
            lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    for i in range(g.nt - 1):
        for j in range(g.ns - 1):
            a = i * g.ns + j + 1
            b = (i + 1) * g.ns + j + 1
            c = (i + 1) * g.ns + j + 2
            d = i * g.ns + j + 2
            lines.append(f"f {a} {b} {c}")
            lines.append(f"f {a} {c} {d}")
    return "\n".join(lines) + "\n"
