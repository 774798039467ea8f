"""Independent numerical eigensolvers used to validate every closed form.

The 1D route discretizes -g'' = mu g on the arc interval as a symmetric
tridiagonal pencil (fourth-order Numerov for pinned ends; ordinary second
difference with ghost elimination and half-cell weighting for the Robin edge)
and extracts eigenvalues by Sturm-sequence bisection.  The full 2D route
assembles the transverse-plus-axial operator on a tensor grid and runs
shifted inverse iteration with deflation, discarding separation of variables
entirely.  Eigenvalues of the surface problem are recovered from the 1D
constants as lambda = (mu - 1) / r^2 + w^2 with w the axial wavenumber.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import _kernels
from .errors import ConvergenceFailure, InvalidConfig, NoCriticalLength
from .geometry import (Convexity, CylinderConfig, Grid, ScalarField, Scenario,
                       TMode, field_norm)
from .spectrum import Branch, SpectrumEntry

# Linear-branch detection threshold on the 1D constant mu.
LINEAR_MU_ATOL = 1e-9


@dataclass(frozen=True)
class SturmProblem:
    """-g'' = mu g on [s_lo, s_hi], g(s_lo) = 0, and either g(s_hi) = 0
    (robin_rho None) or g'(s_hi) = rho g(s_hi)."""

    s_lo: float
    s_hi: float
    ns: int
    robin_rho: float | None = None

    def __post_init__(self):
        if self.ns < 64:
            raise InvalidConfig("sturm_eigen needs ns >= 64")
        if not (self.s_hi > self.s_lo):
            raise InvalidConfig("need s_hi > s_lo")


@dataclass
class EigenResult:
    mu: np.ndarray
    modes: np.ndarray | None = None


def sturm_problem_for(config: CylinderConfig, ns: int) -> SturmProblem:
    """The transverse problem of a configuration: pinned-pinned for the strip,
    pinned-Robin for the wedge with rho = +cot(gamma) convex, -cot(gamma)
    concave (the free-boundary condition g' = r q g in arc units)."""
    s_lo, s_hi = config.s_interval
    if config.scenario is Scenario.PLANAR_STRIP:
        return SturmProblem(s_lo, s_hi, ns, None)
    sign = 1.0 if config.convexity is Convexity.CONVEX else -1.0
    return SturmProblem(s_lo, s_hi, ns, sign / math.tan(config.gamma))


def _assemble(problem: SturmProblem) -> tuple[np.ndarray, ...]:
    """Symmetric tridiagonal pencil (dA, eA, dB, eB) for -g'' = mu g.

    Pinned-pinned intervals use the fourth-order Numerov pencil
    (A = second difference, B = tridiag(1, 10, 1)/12); the Robin edge uses the
    ordinary matrix (B = I) with ghost elimination and half-cell weighting.
    """
    h = (problem.s_hi - problem.s_lo) / (problem.ns - 1)
    h2 = h * h
    if problem.robin_rho is None:
        nf = problem.ns - 2
        da = np.full(nf, 2.0 / h2)
        ea = np.full(nf - 1, -1.0 / h2)
        db = np.full(nf, 10.0 / 12.0)
        eb = np.full(nf - 1, 1.0 / 12.0)
        return da, ea, db, eb
    nf = problem.ns - 1
    da = np.full(nf, 2.0 / h2)
    ea = np.full(nf - 1, -1.0 / h2)
    # ghost elimination at the Robin node, half-cell weight restores symmetry
    da[-1] = 2.0 * (1.0 - h * problem.robin_rho) / h2
    ea[-1] = -math.sqrt(2.0) / h2
    return da, ea, np.ones(nf), np.zeros(nf - 1)


@functools.lru_cache(maxsize=256)
def _cached_eigvals(s_lo: float, s_hi: float, ns: int, rho: float | None,
                    m: int) -> tuple[float, ...]:
    da, ea, db, eb = _assemble(SturmProblem(s_lo, s_hi, ns, rho))
    try:
        mu = _kernels.bisect_smallest(da, ea, db, eb, m, tol=1e-12)
    except RuntimeError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return tuple(float(x) for x in mu)


def sturm_eigen(problem: SturmProblem, m: int, vectors: bool = False) -> EigenResult:
    """Lowest m eigenvalues (and optionally eigenfunction samples).

    Eigenvalues by Sturm-sequence bisection to 1e-12 * (1 + |mu|);
    eigenvectors by a few steps of inverse iteration on the shifted matrix.
    Mode arrays cover the full node line, zero at Dirichlet endpoints.
    """
    nf = problem.ns - 2 if problem.robin_rho is None else problem.ns - 1
    if m < 1 or m > problem.ns // 4:
        raise InvalidConfig("need 1 <= m <= ns / 4")
    mu = np.array(_cached_eigvals(problem.s_lo, problem.s_hi, problem.ns,
                                  problem.robin_rho, m))
    if not vectors:
        return EigenResult(mu=mu)

    da, ea, db, eb = _assemble(problem)
    modes = np.zeros((m, problem.ns))
    for j, val in enumerate(mu):
        sigma = val + 1e-10 * (1.0 + abs(val))
        ab = np.zeros((3, nf))
        ab[1] = da - sigma * db
        ab[0, 1:] = ea - sigma * eb
        ab[2, :-1] = ea - sigma * eb
        x = np.ones(nf)
        for _ in range(4):
            bx = db * x
            bx[:-1] += eb * x[1:]
            bx[1:] += eb * x[:-1]
            x = scipy.linalg.solve_banded((1, 1), ab, bx)
            x /= np.linalg.norm(x)
        if x[np.argmax(np.abs(x))] < 0:
            x = -x
        if problem.robin_rho is None:
            modes[j, 1:-1] = x
        else:
            g = x.copy()
            g[-1] *= math.sqrt(2.0)  # undo the half-cell weighting
            modes[j, 1:] = g
    return EigenResult(mu=mu, modes=modes)


# ---------------------------------------------------------------------------
# Modal (separated) spectrum

def _axial(h_or_T: float, t_mode: TMode, count: int) -> list[tuple[int, float]]:
    # periodic and half-period grids both carry the t-constant n = 0 mode
    if t_mode is TMode.DIRICHLET_ENDS:
        return [(n, n * math.pi / h_or_T) for n in range(1, count + 1)]
    return [(n, 2.0 * math.pi * n / h_or_T) for n in range(0, count + 1)]


def modal_jacobi_spectrum(config: CylinderConfig, h_or_T: float, t_mode: TMode,
                          m: int, ns: int) -> list[SpectrumEntry]:
    """m smallest eigenvalues combining 1D numerics with exact axial wavenumbers."""
    if h_or_T <= 0:
        raise InvalidConfig("h_or_T must be positive")
    problem = sturm_problem_for(config, ns)
    mu = sturm_eigen(problem, m).mu
    r2 = config.r * config.r
    entries = []
    for k_idx, muk in enumerate(mu, start=1):
        if muk < -LINEAR_MU_ATOL:
            c, branch = math.sqrt(-muk), Branch.EXPONENTIAL
        elif muk <= LINEAR_MU_ATOL:
            c, branch = 0.0, Branch.LINEAR
        else:
            c, branch = math.sqrt(muk), Branch.OSCILLATORY
        for n, w in _axial(h_or_T, t_mode, m):
            entries.append(SpectrumEntry(k=k_idx, n=n,
                                         lam=(muk - 1.0) / r2 + w * w,
                                         c=c, branch=branch))
    entries.sort(key=lambda s: (s.lam, s.k, s.n))
    return entries[:m]


def critical_length_zero_crossing(r: float, gamma: float, ns: int = 2001,
                                  rtol: float = 1e-10) -> float:
    """Zero crossing in h of the smallest pinned-strip eigenvalue, by bisection.

    Independent of the closed-form threshold: each evaluation goes through the
    1D eigensolve.  Raises NoCriticalLength when no sign change exists.
    """
    config = CylinderConfig(Scenario.PLANAR_STRIP, r=r, gamma=gamma)

    def lam1(h: float) -> float:
        return modal_jacobi_spectrum(config, h, TMode.DIRICHLET_ENDS, 1, ns)[0].lam

    lo = r * 1e-3
    hi = lo
    for _ in range(60):
        if lam1(hi) < 0.0:
            break
        lo = hi
        hi *= 2.0
    else:
        raise NoCriticalLength("smallest eigenvalue never becomes negative")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if lam1(mid) < 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Full 2D spectrum (no separation of variables)

def _robin_d2_block(n: int, h: float, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Weight-symmetrized -D2 on n free nodes: Dirichlet neighbour on the left,
    Robin node on the right (ghost from the centered condition g' = rho g,
    half-cell weight restores symmetry).  Second order."""
    a = np.zeros((n, n))
    for i in range(n):
        a[i, i] = 2.0 / (h * h)
        if i > 0:
            a[i, i - 1] = -1.0 / (h * h)
        if i < n - 1:
            a[i, i + 1] = -1.0 / (h * h)
    a[n - 1, n - 2] = -2.0 / (h * h)
    a[n - 1, n - 1] = 2.0 * (1.0 - h * rho) / (h * h)
    w = np.ones(n)
    w[-1] = 0.5
    s = np.sqrt(w)
    return (s[:, None] * a) / s[None, :], w


def _spectral_block(n: int, extent: float, kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Weight-symmetrized -D2 with exact trigonometric eigenstructure.

    kind "dirichlet": n interior nodes of a pinned interval, modes
    sin(m pi x / extent); "neumann": n closed-interval nodes with mirror ends,
    modes cos(m pi x / extent); "periodic": n nodes, full Fourier basis with
    the constant mode included.  Dense n x n blocks; eigenvalues are the exact
    squared wavenumbers, so the assembled operator carries no axial or arc
    truncation error on resolvable modes.
    """
    if kind == "dirichlet":
        nn = n + 1  # intervals of the closed grid
        j = np.arange(1, n + 1)
        q = np.sin(np.outer(j, np.arange(1, n + 1)) * math.pi / nn)
        wavenumbers = np.arange(1, n + 1) * math.pi / extent
        weights = np.ones(n)
    elif kind == "neumann":
        nn = n - 1
        j = np.arange(n)
        q = np.cos(np.outer(j, np.arange(n)) * math.pi / nn)
        wavenumbers = np.arange(n) * math.pi / extent
        weights = np.ones(n)
        weights[0] = weights[-1] = 0.5
    elif kind == "periodic":
        j = np.arange(n)
        cols = [np.ones(n)]
        wn = [0.0]
        for m in range(1, n // 2 + 1):
            cols.append(np.cos(2.0 * math.pi * m * j / n))
            wn.append(2.0 * math.pi * m / extent)
            if m < (n + 1) // 2:
                cols.append(np.sin(2.0 * math.pi * m * j / n))
                wn.append(2.0 * math.pi * m / extent)
        q = np.stack(cols[:n], axis=1)
        wavenumbers = np.array(wn[:n])
        weights = np.ones(n)
    else:
        raise ValueError(kind)
    u = np.sqrt(weights)[:, None] * q
    u /= np.linalg.norm(u, axis=0)
    block = (u * wavenumbers ** 2) @ u.T
    return 0.5 * (block + block.T), weights


def _direction_blocks(config: CylinderConfig, grid: Grid):
    """(t block, t weights, t embed slice), (s block, s weights, s embed slice)."""
    if grid.t_mode is TMode.DIRICHLET_ENDS:
        tb, tw = _spectral_block(grid.nt - 2, grid.t_extent, "dirichlet")
        tsl = slice(1, grid.nt - 1)
    elif grid.t_mode is TMode.HALF_PERIOD_NEUMANN:
        tb, tw = _spectral_block(grid.nt, grid.t_extent, "neumann")
        tsl = slice(0, grid.nt)
    else:
        tb, tw = _spectral_block(grid.nt, grid.t_extent, "periodic")
        tsl = slice(0, grid.nt)

    if config.scenario is Scenario.PLANAR_STRIP:
        sb, sw = _spectral_block(grid.ns - 2, grid.s_hi - grid.s_lo, "dirichlet")
        ssl = slice(1, grid.ns - 1)
    else:
        rho = config.robin_coefficient * config.r
        sb, sw = _robin_d2_block(grid.ns - 1, grid.ds, rho)
        ssl = slice(1, grid.ns)
    return (tb, tw, tsl), (sb, sw, ssl)


def full_2d_jacobi_spectrum(config: CylinderConfig, grid: Grid,
                            m: int) -> list[tuple[float, ScalarField]]:
    """m smallest eigenpairs of the assembled 2D operator -L.

    Shift estimates come from a shift-invert Lanczos pass; each pair is then
    converged by inverse iteration with deflation of the pairs already found
    (at most 500 iterations per pair).  Eigenfields are returned on the grid
    with unit quadrature norm and a deterministic sign.
    """
    if grid.nt * grid.ns > 16384:
        raise InvalidConfig("full 2D solve limited to nt * ns <= 16384")
    (tb, tw, tsl), (sb, sw, ssl) = _direction_blocks(config, grid)
    nt_f, ns_f = tb.shape[0], sb.shape[0]
    n = nt_f * ns_f
    if m < 1 or m > n - 2:
        raise InvalidConfig("m out of range for the 2D solve")
    r2 = config.r * config.r

    # arc-outer ordering keeps the dense axial blocks on the diagonal;
    # forcing csr avoids kron's block format, which would store dense zeros
    it = scipy.sparse.identity(nt_f, format="csr")
    isb = scipy.sparse.identity(ns_f, format="csr")
    a2 = (scipy.sparse.kron(isb, scipy.sparse.csr_matrix(tb), format="csr")
          + scipy.sparse.kron(scipy.sparse.csr_matrix(sb), it, format="csr") / r2
          - scipy.sparse.identity(n, format="csr") / r2).tocsc()
    a2.eliminate_zeros()

    # crude lower bound for the shift-invert seed
    diag = a2.diagonal()
    radius = np.asarray(np.abs(a2).sum(axis=1)).ravel() - np.abs(diag)
    sigma0 = float(np.min(diag - radius)) - 1.0
    v0 = np.ones(n) / math.sqrt(n)
    vals, vecs = scipy.sparse.linalg.eigsh(a2, k=m, sigma=sigma0, which="LM", v0=v0)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]

    scale = max(1.0, float(np.max(np.abs(diag))))
    converged: list[np.ndarray] = []
    pairs = []
    for j in range(m):
        lam = float(vals[j])
        x = vecs[:, j].copy()
        for q in converged:
            x -= np.dot(q, x) * q
        x /= np.linalg.norm(x)
        lu = None  # factor only if the Lanczos estimate needs polishing
        for it_count in range(500):
            resid = a2 @ x - lam * x
            if np.linalg.norm(resid) <= 1e-11 * scale:
                break
            if lu is None:
                shifted = (a2 - (lam + 1e-10 * (1.0 + abs(lam)))
                           * scipy.sparse.identity(n, format="csr")).tocsc()
                lu = scipy.sparse.linalg.splu(shifted)
            x = lu.solve(x)
            for q in converged:
                x -= np.dot(q, x) * q
            x /= np.linalg.norm(x)
            lam = float(x @ (a2 @ x))
        else:
            raise ConvergenceFailure(
                f"inverse iteration for pair {j} did not converge in 500 steps")
        converged.append(x.copy())
        pairs.append((lam, x))

    weight = np.sqrt(np.kron(sw, tw))
    out = []
    for lam, x in sorted(pairs, key=lambda p: p[0]):
        g = (x / weight).reshape(ns_f, nt_f).T
        full = np.zeros((grid.nt, grid.ns))
        full[tsl, ssl] = g
        nrm = field_norm(config, grid, full)
        if nrm == 0.0:
            raise ConvergenceFailure("zero-norm eigenvector candidate")
        full /= nrm
        flat = full.ravel()
        if flat[np.argmax(np.abs(flat))] < 0:
            full = -full
        out.append((lam, ScalarField(grid, full)))
    return out
