"""Closed-form spectra, stability verdicts, critical lengths, and bifurcation
periods for both scenarios.

Planar strip (both lines pinned): the transverse eigenvalue problem has modes
sin(k pi (s - s_lo) / (2 gamma)), giving

    lambda_{k,n} = (k^2 pi^2 / (4 gamma^2) - 1) / r^2 + n^2 pi^2 / h^2.

Right wedge (one line pinned, one free with contact angle gamma): the
transverse wavenumber c solves a transcendental equation whose branch depends
on the sign of the separation constant:

    exponential (C = -c^2 < 0):  e^{2 c beta} = (1 + c tan g) / (1 - c tan g),
    linear      (C = 0):         beta = tan gamma,
    oscillatory (C = c^2 > 0):   c tan gamma = tan(c beta),
    Neumann     (gamma = pi/2):  cos(c beta) = 0.

Every root is located on a pole-free reformulation, refined by bisection and
polished with one Newton step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidConfig, NoBifurcation, NoCriticalLength, PoleInBracket
from .geometry import Convexity, CylinderConfig, Scenario, TMode

# Scan resolution in c for transcendental root isolation.
SCAN_STEP = 1e-3
# Bisection width target before the Newton polish.
BISECT_XTOL = 1e-14
# Relative tolerance for the marginal-stability band.
MARGINAL_RTOL = 1e-10
# Treating beta == tan(gamma) and gamma == pi/2 as exact case boundaries.
CASE_ATOL = 1e-12


class Branch(Enum):
    OSCILLATORY = "oscillatory"
    LINEAR = "linear"
    EXPONENTIAL = "exponential"


class Classification(Enum):
    STABLE = "stable"
    MARGINALLY_STABLE = "marginally-stable"
    UNSTABLE = "unstable"


class CaseId(Enum):
    CONVEX_EXP = "convex-exp"
    CONVEX_LINEAR = "convex-linear"
    CONVEX_TAN = "convex-tan"
    CONCAVE_TAN = "concave-tan"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class SpectrumEntry:
    k: int
    n: int
    lam: float
    c: float
    branch: Branch


@dataclass(frozen=True)
class StabilityVerdict:
    classification: Classification
    lambda_min: float
    witness: SpectrumEntry | None


@dataclass(frozen=True)
class TranscendentalCase:
    case_id: CaseId
    root_c: float | None
    residual: float


# ---------------------------------------------------------------------------
# Planar strip

def planar_eigenvalue(r: float, gamma: float, h: float, k: int, n: int) -> float:
    if r <= 0 or h <= 0:
        raise InvalidConfig("r and h must be positive")
    if not (0 < gamma < math.pi):
        raise InvalidConfig("gamma must be in (0, pi)")
    if k < 1 or n < 1:
        raise InvalidConfig("mode indices start at 1")
    return (k * k * math.pi ** 2 / (4.0 * gamma * gamma) - 1.0) / (r * r) \
        + n * n * math.pi ** 2 / (h * h)


def planar_critical_length(r: float, gamma: float) -> float:
    """Length at which the first pinned-strip eigenvalue crosses zero."""
    if r <= 0:
        raise InvalidConfig("r must be positive")
    if not (0 < gamma < math.pi):
        raise InvalidConfig("gamma must be in (0, pi)")
    if gamma <= math.pi / 2:
        raise NoCriticalLength(
            f"gamma = {gamma:.6g} <= pi/2: stable at every length")
    return 2.0 * math.pi * r * gamma / math.sqrt(4.0 * gamma * gamma - math.pi ** 2)


def planar_bifurcation_period(r: float, gamma: float) -> float:
    """Axial period of the nontrivial branch: exactly twice the critical length."""
    try:
        return 2.0 * planar_critical_length(r, gamma)
    except NoCriticalLength as exc:
        raise NoBifurcation(str(exc)) from exc


def planar_stability(r: float, gamma: float, h: float) -> StabilityVerdict:
    lam11 = planar_eigenvalue(r, gamma, h, 1, 1)
    witness = SpectrumEntry(k=1, n=1, lam=lam11,
                            c=math.pi / (2.0 * gamma), branch=Branch.OSCILLATORY)
    if gamma <= math.pi / 2:
        return StabilityVerdict(Classification.STABLE, lam11, witness)
    h0 = planar_critical_length(r, gamma)
    if abs(h - h0) <= MARGINAL_RTOL * h0:
        return StabilityVerdict(Classification.MARGINALLY_STABLE, lam11, witness)
    if h < h0:
        return StabilityVerdict(Classification.STABLE, lam11, witness)
    return StabilityVerdict(Classification.UNSTABLE, lam11, witness)


# ---------------------------------------------------------------------------
# Transcendental root isolation

def _scan_sign_changes(f, lo: float, hi: float, step: float) -> list[tuple[float, float]]:
    cells = []
    x = lo
    fx = f(x)
    while x < hi:
        y = min(x + step, hi)
        fy = f(y)
        if fx == 0.0:
            cells.append((x, x))
        elif fx * fy < 0.0:
            cells.append((x, y))
        x, fx = y, fy
    return cells


def _bisect(f, a: float, b: float, xtol: float = BISECT_XTOL) -> float:
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    while b - a > xtol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0.0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def _polish(f, fp, c: float) -> float:
    d = fp(c)
    if d != 0.0 and math.isfinite(d):
        step = f(c) / d
        if abs(step) < 1e-6:
            return c - step
    return c


def _exp_eq_root(gamma: float, beta: float,
                 bracket: tuple[float, float] | None) -> float | None:
    """Root of tanh(c beta) = c tan(gamma); exists only for beta > tan(gamma)."""
    tg = math.tan(gamma)
    if tg <= 0.0:
        return None

    def f(c):
        return math.tanh(c * beta) - c * tg

    def fp(c):
        return beta / math.cosh(c * beta) ** 2 - tg

    lo, hi = bracket if bracket is not None else (SCAN_STEP, 1.0 / tg)
    hi = min(hi, 1.0 / tg)
    cells = _scan_sign_changes(f, lo, hi, SCAN_STEP)
    if not cells:
        return None
    a, b = cells[0]
    return _polish(f, fp, _bisect(f, a, b))


def _tan_poles(beta: float, lo: float, hi: float) -> list[float]:
    poles = []
    j = 0
    while True:
        p = (math.pi / 2.0 + j * math.pi) / beta
        if p > hi:
            break
        if p > lo:
            poles.append(p)
        j += 1
    return poles


def _tan_eq_roots(gamma: float, beta: float, lo: float, hi: float,
                  sign: float, max_roots: int | None = None) -> list[float]:
    """Roots of c tan(gamma) + sign * tan(c beta) = 0 via the pole-free form
    f(c) = c tan(gamma) cos(c beta) + sign * sin(c beta)."""
    tg = math.tan(gamma)

    def f(c):
        return c * tg * math.cos(c * beta) + sign * math.sin(c * beta)

    def fp(c):
        return (tg * math.cos(c * beta) - c * tg * beta * math.sin(c * beta)
                + sign * beta * math.cos(c * beta))

    roots = []
    eps = 1e-9
    for a, b in _scan_sign_changes(f, max(lo, eps), hi, SCAN_STEP):
        c = _polish(f, fp, _bisect(f, a, b))
        if c > eps:
            roots.append(c)
            if max_roots is not None and len(roots) >= max_roots:
                break
    return roots


def _tan_residual(gamma: float, beta: float, c: float, sign: float) -> float:
    return c * math.tan(gamma) * math.cos(c * beta) + sign * math.sin(c * beta)


def solve_transcendental(case_id: CaseId, gamma: float, beta: float,
                         bracket: tuple[float, float] | None = None,
                         k: int = 0, c_max: float = 50.0) -> TranscendentalCase:
    """Locate the transverse wavenumber for one wedge mode family.

    Roots are isolated by a sign-change scan at resolution 1e-3 on the
    pole-free reformulation, bisected to 1e-14, and polished with one Newton
    step.  An absent root is reported with root_c = None and a NaN residual
    (except the linear case, whose residual is the defect beta - tan(gamma)).
    """
    if not (0 < gamma < math.pi) or beta <= 0:
        raise InvalidConfig("need gamma in (0, pi) and beta > 0")

    if case_id is CaseId.NEUMANN:
        c = (math.pi / 2.0 + k * math.pi) / beta
        return TranscendentalCase(case_id, c, math.cos(c * beta))

    if case_id is CaseId.CONVEX_LINEAR:
        return TranscendentalCase(case_id, None, beta - math.tan(gamma))

    if case_id is CaseId.CONVEX_EXP:
        c = _exp_eq_root(gamma, beta, bracket)
        if c is None:
            return TranscendentalCase(case_id, None, math.nan)
        return TranscendentalCase(case_id, c,
                                  math.tanh(c * beta) - c * math.tan(gamma))

    sign = -1.0 if case_id is CaseId.CONVEX_TAN else 1.0
    lo, hi = bracket if bracket is not None else (0.0, c_max)
    roots = _tan_eq_roots(gamma, beta, lo, hi, sign, max_roots=1)
    if not roots:
        if bracket is not None and _tan_poles(beta, lo, hi):
            raise PoleInBracket(
                f"bracket ({lo:g}, {hi:g}) straddles a tangent pole with no "
                "sign change of the pole-free form")
        return TranscendentalCase(case_id, None, math.nan)
    c = roots[0]
    return TranscendentalCase(case_id, c, _tan_residual(gamma, beta, c, sign))


# ---------------------------------------------------------------------------
# Wedge mode constants and verdicts

def wedge_mode_constants(config: CylinderConfig, count: int) -> list[tuple[float, float, Branch]]:
    """The smallest `count` separation constants (mu, c, branch), mu ascending.

    mu = -c^2 on the exponential branch, 0 on the linear branch, +c^2 on the
    oscillatory branches; the transverse eigenvalue contribution is
    (mu - 1) / r^2.
    """
    if config.scenario is not Scenario.RIGHT_WEDGE:
        raise InvalidConfig("wedge mode constants need a wedge config")
    gamma, beta = config.gamma, config.beta
    out: list[tuple[float, float, Branch]] = []
    c_hi = (count + 2) * math.pi / beta + 1.0

    if config.convexity is Convexity.CONCAVE:
        for c in _tan_eq_roots(gamma, beta, 0.0, c_hi, +1.0, max_roots=count):
            out.append((c * c, c, Branch.OSCILLATORY))
        return sorted(out)[:count]

    if abs(gamma - math.pi / 2.0) <= CASE_ATOL:
        for j in range(count):
            c = (math.pi / 2.0 + j * math.pi) / beta
            out.append((c * c, c, Branch.OSCILLATORY))
        return out

    if gamma < math.pi / 2.0:
        if abs(beta - math.tan(gamma)) <= CASE_ATOL * (1.0 + beta):
            out.append((0.0, 0.0, Branch.LINEAR))
        else:
            c = _exp_eq_root(gamma, beta, None)
            if c is not None:
                out.append((-c * c, c, Branch.EXPONENTIAL))
    for c in _tan_eq_roots(gamma, beta, 0.0, c_hi, -1.0, max_roots=count):
        out.append((c * c, c, Branch.OSCILLATORY))
    return sorted(out)[:count]


def wedge_stability(config: CylinderConfig, h: float) -> StabilityVerdict:
    if config.scenario is not Scenario.RIGHT_WEDGE:
        raise InvalidConfig("wedge_stability needs a wedge config")
    if h <= 0:
        raise InvalidConfig("h must be positive")
    modes = wedge_mode_constants(config, count=3)
    r2 = config.r * config.r
    mu, c, branch = modes[0]
    lam_min = (mu - 1.0) / r2 + math.pi ** 2 / (h * h)
    witness = SpectrumEntry(k=1, n=1, lam=lam_min, c=c, branch=branch)
    band = MARGINAL_RTOL * (1.0 / r2 + math.pi ** 2 / (h * h))
    if lam_min < -band:
        return StabilityVerdict(Classification.UNSTABLE, lam_min, witness)
    if lam_min <= band:
        return StabilityVerdict(Classification.MARGINALLY_STABLE, lam_min, witness)
    return StabilityVerdict(Classification.STABLE, lam_min, witness)


def wedge_bifurcation_period(config: CylinderConfig) -> tuple[float, CaseId]:
    """Axial period of the wedge branch and the mode family that produces it."""
    if config.scenario is not Scenario.RIGHT_WEDGE:
        raise InvalidConfig("wedge_bifurcation_period needs a wedge config")
    if config.convexity is Convexity.CONCAVE:
        raise NoBifurcation("concave wedge cylinders are stable at every length")
    gamma, beta, r = config.gamma, config.beta, config.r

    if abs(gamma - math.pi / 2.0) <= CASE_ATOL:
        if beta <= math.pi / 2.0:
            raise NoBifurcation(
                "right-angle contact with beta <= pi/2 is stable at every length")
        return (4.0 * math.pi * r * beta / math.sqrt(4.0 * beta * beta - math.pi ** 2),
                CaseId.NEUMANN)

    if gamma < math.pi / 2.0:
        if abs(beta - math.tan(gamma)) <= CASE_ATOL * (1.0 + beta):
            return 2.0 * math.pi * r, CaseId.CONVEX_LINEAR
        if beta > math.tan(gamma):
            res = solve_transcendental(CaseId.CONVEX_EXP, gamma, beta)
            if res.root_c is None:
                raise NoBifurcation("exponential-branch root not found")
            c = res.root_c
            return 2.0 * math.pi * r / math.sqrt(1.0 + c * c), CaseId.CONVEX_EXP

    # oscillatory route: root in (0, 1) on the admissible side of the pole
    first_pole = math.pi / (2.0 * beta)
    if gamma < math.pi / 2.0:
        lo, hi = 0.0, min(1.0, first_pole)
    else:
        if first_pole >= 1.0:
            raise NoBifurcation("no admissible oscillatory root below c = 1")
        lo, hi = first_pole, 1.0
    roots = _tan_eq_roots(gamma, beta, lo, hi, -1.0, max_roots=1)
    if not roots:
        raise NoBifurcation("no oscillatory root in (0, 1)")
    c = roots[0]
    return 2.0 * math.pi * r / math.sqrt(1.0 - c * c), CaseId.CONVEX_TAN


def bifurcation_period(config: CylinderConfig) -> tuple[float, CaseId | None]:
    """Scenario dispatch: (period, wedge case id or None for planar)."""
    if config.scenario is Scenario.PLANAR_STRIP:
        return planar_bifurcation_period(config.r, config.gamma), None
    return wedge_bifurcation_period(config)


def stability(config: CylinderConfig, h: float) -> StabilityVerdict:
    if config.scenario is Scenario.PLANAR_STRIP:
        return planar_stability(config.r, config.gamma, h)
    return wedge_stability(config, h)


# ---------------------------------------------------------------------------
# Closed-form spectrum listing

def _axial_wavenumbers(h_or_T: float, t_mode: TMode, count: int) -> list[tuple[int, float]]:
    # periodic and half-period grids both carry the t-constant n = 0 mode
    if t_mode is TMode.DIRICHLET_ENDS:
        return [(n, n * math.pi / h_or_T) for n in range(1, count + 1)]
    return [(n, 2.0 * math.pi * n / h_or_T) for n in range(0, count + 1)]


def spectrum_entries(config: CylinderConfig, h_or_T: float, t_mode: TMode,
                     m: int) -> list[SpectrumEntry]:
    """The m smallest closed-form eigenvalues, ascending, ties by (k, n).

    h_or_T is the truncation length for Dirichlet ends and the full period
    for the periodic and half-period grids.
    """
    if m < 1:
        raise InvalidConfig("m must be >= 1")
    r2 = config.r * config.r
    if config.scenario is Scenario.PLANAR_STRIP:
        modes = [((k * math.pi / (2.0 * config.gamma)) ** 2,
                  k * math.pi / (2.0 * config.gamma), Branch.OSCILLATORY)
                 for k in range(1, m + 1)]
    else:
        modes = wedge_mode_constants(config, count=m)
    entries = []
    for k_idx, (mu, c, branch) in enumerate(modes, start=1):
        for n, w in _axial_wavenumbers(h_or_T, t_mode, m):
            lam = (mu - 1.0) / r2 + w * w
            entries.append(SpectrumEntry(k=k_idx, n=n, lam=lam, c=c, branch=branch))
    entries.sort(key=lambda e: (e.lam, e.k, e.n))
    return entries[:m]
