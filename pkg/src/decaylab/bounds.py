"""Complete-positivity bounds on the decoherence rate of a neutral meson.

Complete positivity of the meson channel at time ``t`` is the inequality

    delta_L^2 |1 - exp(-t(Gamma + lambda - i dm))|^2 <= (1 - e^{-t G_S})(1 - e^{-t G_L}).

Read as a quadratic in ``y = exp(-t(Gamma + lambda))`` its roots are
``cos(t dm) +/- sqrt(D) / delta_L`` with ``D = (1 - e^{-t G_S})(1 - e^{-t G_L})
- delta_L^2 sin^2(t dm)``. :func:`discriminant` returns ``D``; the fully
scaled discriminant of the quadratic is ``delta_L^2 * D``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .meson import MesonParams

CP_TOL = 1e-15
GRID_POINTS = 2048
GRID_DECADES = 8
GOLDEN_REL_TOL = 1e-6
ROOT_REL_TOL = 1e-10


class PhysicsConstraintError(ValueError):
    pass


class CpCheck(NamedTuple):
    lhs: float
    rhs: float
    ok: bool


def _one_minus_cos(x):
    return 2.0 * np.sin(0.5 * x) ** 2


def cp_inequality(p: MesonParams, t: float) -> CpCheck:
    y = np.exp(-t * (p.gamma + p.lam))
    # 1 - 2 y cos + y^2 == (1 - y)^2 + 2 y (1 - cos), without cancellation
    lhs = p.delta_L ** 2 * (np.expm1(-t * (p.gamma + p.lam)) ** 2 + 2.0 * y * _one_minus_cos(t * p.delta_m))
    rhs = np.expm1(-t * p.gamma_S) * np.expm1(-t * p.gamma_L)
    return CpCheck(float(lhs), float(rhs), bool(lhs <= rhs + CP_TOL))


def discriminant(p: MesonParams, t):
    """``(1 - e^{-t G_S})(1 - e^{-t G_L}) - delta_L^2 sin^2(t dm)``, vectorised over ``t``."""
    t = np.asarray(t, dtype=float)
    return np.expm1(-t * p.gamma_S) * np.expm1(-t * p.gamma_L) - p.delta_L ** 2 * np.sin(t * p.delta_m) ** 2


def scaled_discriminant(p: MesonParams, t):
    return p.delta_L ** 2 * discriminant(p, t)


class NecessaryBound(NamedTuple):
    bound: float
    ok: bool


def necessary_delta_bound(p: MesonParams) -> NecessaryBound:
    """Small-time condition ``delta_L <= sqrt(G_S G_L) / dm``."""
    if p.delta_m == 0:
        return NecessaryBound(float("inf"), True)
    bound = float(np.sqrt(p.gamma_S * p.gamma_L) / p.delta_m)
    return NecessaryBound(bound, bool(p.delta_L <= bound))


def _root_half_width(p: MesonParams, t):
    """``sqrt(D)/delta_L``: half the distance between the roots of the quadratic."""
    t = np.asarray(t, dtype=float)
    # divide before multiplying so that tiny delta_L does not underflow D
    a = -np.expm1(-t * p.gamma_S) / p.delta_L
    b = -np.expm1(-t * p.gamma_L) / p.delta_L
    return np.sqrt(np.maximum(a * b - np.sin(t * p.delta_m) ** 2, 0.0))


def _upper_log_arg_minus_one(p: MesonParams, t):
    # cos(t dm) - sqrt(D)/delta_L - 1
    return -_one_minus_cos(np.asarray(t) * p.delta_m) - _root_half_width(p, t)


def _require_bounded(p: MesonParams) -> None:
    if p.delta_L == 0:
        raise PhysicsConstraintError("delta_L = 0: no upper bound on lambda")
    nb = necessary_delta_bound(p)
    if not nb.ok:
        raise PhysicsConstraintError(
            f"necessary condition violated: delta_L = {p.delta_L:.6g} > sqrt(G_S G_L)/dm = {nb.bound:.6g}"
        )


def t_plus(p: MesonParams) -> float:
    """Smallest ``t > 0`` where ``cos(t dm) - sqrt(D)/delta_L`` changes sign."""
    _require_bounded(p)
    f = lambda t: 1.0 + float(_upper_log_arg_minus_one(p, t))
    scale = max(p.delta_m, p.gamma_S, p.gamma_L)
    horizon = 2.0 * np.pi / (p.delta_m if p.delta_m > 0 else min(p.gamma_S, p.gamma_L))
    # the root sits near delta_L / sqrt(G_S G_L) when delta_L is small
    lo = min(1e-6 / scale, 1e-3 * p.delta_L / np.sqrt(p.gamma_S * p.gamma_L))
    if f(lo) <= 0:
        raise PhysicsConstraintError("no t_plus: bound expression not positive at small t")
    hi = lo
    while f(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if lo > horizon:
            raise PhysicsConstraintError("no t_plus: left bound never active")
    while hi - lo > ROOT_REL_TOL * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class LambdaBounds(NamedTuple):
    lower: float
    upper: float


def lambda_bounds_at(p: MesonParams, t: float, tp: float | None = None) -> LambdaBounds:
    """Range of lambda allowed by complete positivity at one time ``t``.

    ``upper`` is ``inf`` once the smaller root is non-positive (``t >= t_plus``).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if p.delta_L == 0:
        return LambdaBounds(-np.inf, np.inf)
    w = float(_root_half_width(p, t))
    c1 = float(_one_minus_cos(t * p.delta_m))
    lower = -np.log1p(w - c1) / t - p.gamma if 1.0 - c1 + w > 0 else np.inf
    if tp is not None and t >= tp:
        return LambdaBounds(float(lower), np.inf)
    arg_m1 = -c1 - w
    with np.errstate(over="ignore"):
        upper = -np.log1p(arg_m1) / t - p.gamma if arg_m1 > -1.0 else np.inf
    return LambdaBounds(float(lower), float(upper))


def _upper_curve(p: MesonParams, t):
    t = np.asarray(t, dtype=float)
    arg_m1 = _upper_log_arg_minus_one(p, t)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        out = -np.log1p(arg_m1) / t - p.gamma
    return np.where(arg_m1 > -1.0, out, np.inf)


def lambda_max_first_order(p: MesonParams) -> float:
    """Small-time limit of the upper bound: ``sqrt(G_S G_L - delta^2 dm^2)/delta - Gamma``."""
    if p.delta_L == 0:
        return float("inf")
    rad = p.gamma_S * p.gamma_L - p.delta_L ** 2 * p.delta_m ** 2
    if rad < 0:
        raise PhysicsConstraintError("necessary condition violated")
    return float(np.sqrt(rad) / p.delta_L - p.gamma)


def _golden_min(f, a: float, b: float, rel_tol: float) -> tuple[float, float]:
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > rel_tol * abs(b):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    t = 0.5 * (a + b)
    return t, float(f(t))


@dataclass
class BoundReport:
    t_plus: float
    lambda_max: float
    lambda_max_first_order: float
    necessary_ok: bool
    necessary_margin: float
    argmin_t: float | None = None
    grid: list = field(default_factory=list)

    @property
    def unbounded(self) -> bool:
        return np.isinf(self.lambda_max)


def lambda_max(p: MesonParams, grid_points: int = 64) -> BoundReport:
    """Infimum over ``(0, t_plus]`` of the upper bound on lambda.

    A 2048-point log grid over eight decades below ``t_plus`` is refined by
    golden-section search around its minimum. When the curve is still
    rising at the smallest grid time, the infimum is its small-time limit,
    which equals :func:`lambda_max_first_order`.
    """
    nb = necessary_delta_bound(p)
    margin = nb.bound - p.delta_L
    if p.delta_L == 0:
        return BoundReport(np.inf, np.inf, np.inf, True, margin)
    _require_bounded(p)
    tp = t_plus(p)
    first = lambda_max_first_order(p)
    ts = np.logspace(np.log10(tp) - GRID_DECADES, np.log10(tp), GRID_POINTS)[:-1]
    ups = _upper_curve(p, ts)
    k = int(np.argmin(ups))
    best_t, best = float(ts[k]), float(ups[k])
    if 0 < k < len(ts) - 1:
        curve = lambda t: float(_upper_curve(p, t))
        best_t, best = _golden_min(curve, float(ts[k - 1]), float(ts[k + 1]), GOLDEN_REL_TOL)
    if first < best:
        best_t, best = None, first
    grid = []
    for t in np.logspace(np.log10(tp) - 3, np.log10(tp), grid_points):
        b = lambda_bounds_at(p, float(t), tp)
        grid.append((float(t), b.lower, b.upper))
    return BoundReport(tp, best, first, nb.ok, margin, best_t, grid)


def experimental_lambda_check(lam_max: float, measured: float, err_lo: float, err_hi: float) -> bool:
    """Whether ``[measured - err_lo, measured + err_hi]`` meets ``[0, lam_max]``."""
    lo, hi = measured - abs(err_lo), measured + abs(err_hi)
    return bool(hi >= 0.0 and lo <= lam_max)


def cp_witness(p: MesonParams, times) -> float | None:
    """First time in ``times`` at which the CP inequality fails, else ``None``."""
    for t in times:
        if not cp_inequality(p, float(t)).ok:
            return float(t)
    return None
