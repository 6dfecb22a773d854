"""Explicit constants of the two-sided frequency bounds and their slots.

Every constant is a deterministic closed-form expression in (N, p, s, q,
gamma, radius ratios) and a handful of numerically computed reference
quantities (frequencies and capacities of concentric balls, a one-sided
Sobolev-constant estimate).  References are plugged in through a
:class:`ConstantContext`; the registry evaluates by name.

Conventions for the non-explicit ingredients (all documented where used):

* the classical mean-deviation Poincare constant on balls is taken as
  mu = 2 (a valid diameter-based upper bound), and the Poincare-Wirtinger
  chain constant is propagated from it;
* the Sobolev constant slot holds a numerical lower bound of the defining
  supremum (any test function underestimates a sup), so derived quantities
  with the constant in a denominator may overestimate; consumers apply a
  safety factor where that matters.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .params import FracParams, unit_ball_volume


class ConstantError(ValueError):
    pass


class MissingSlotError(ConstantError):
    pass


@dataclass
class ConstantContext:
    """Parameters plus numeric reference slots consumed by the registry."""

    params: FracParams
    ref_lambda_ball: float = None        # lambda^s_{p,q}(B_1)
    ref_lambda_ball_pp: float = None     # lambda^s_{p,p}(B_1)
    ref_lambda_ball2_pp: float = None    # lambda^s_{p,p}(B_2)
    ref_cap_ball: float = None           # cap_{s,p}(closed B_1; B_2)
    ref_local_lambda: float = None       # lambda_p(B_2), local
    ref_local_cap: float = None          # cap_p(closed B_1; B_2), local
    sobolev_S: float = None              # lower bound of the Sobolev sup
    sobolev_S_direction: str = "lower-bound-of-sup"
    bbm_K: float = None                  # plateau of (1-s) lambda^s / lambda
    ref_lambda_conformal: float = None   # lambda^s_{N/s,1}(B_1), sp = N
    ref_small_s_lambda: float = None     # plateau of s lambda^s_p(B_2), s->0
    meta: dict = field(default_factory=dict)

    def need(self, *names):
        for nm in names:
            if getattr(self, nm) is None:
                raise MissingSlotError(
                    f"constant context slot {nm!r} is not populated")


# ---------------------------------------------------------------------------
# closed-form pieces
# ---------------------------------------------------------------------------

def c_holder(params):
    """2^p N omega_N / p, the one-point kernel-row interpolation constant."""
    n, p = params.dim, params.p
    return 2.0 ** p * n * unit_ball_volume(n) / p


def wirtinger_chain(params):
    """Chain constant of the mean-deviation bound on balls, built from the
    diameter-based classical constant mu = 2."""
    n, p = params.dim, params.p
    mu = 2.0
    c_pw = max(2.0, mu) ** p
    d_pw = max(4.0, mu)
    a_pw = max(c_pw, d_pw ** p)
    strip_const = (2.0 * n * (n + 1.0)) ** p / (n * unit_ball_volume(n))
    return p * a_pw * strip_const


def _E(params, ratio):
    if ratio <= 1.0:
        raise ConstantError(f"E requires a radius ratio > 1, got {ratio}")
    n, p = params.dim, params.p
    f = 2.0 * ratio / (ratio - 1.0)
    return f * (c_holder(params) ** (1.0 / p)
                + (n * unit_ball_volume(n) / p) ** (1.0 / p) * f ** (n / p))


def _W(params, ratio):
    params.require_superhomogeneous()
    n, p, q, s = params.dim, params.p, params.q, params.s
    if ratio <= math.sqrt(n):
        raise ConstantError(
            f"W requires ratio > sqrt(N) = {math.sqrt(n):.4f}, got {ratio}")
    wn = unit_ball_volume(n)
    f = 2.0 * ratio / (ratio - math.sqrt(n))
    bracket = (1.0 + (c_holder(params) * wirtinger_chain(params)) ** (1.0 / p)
               * f ** s) ** p
    return (1.0 + wn ** (-p / q)) * 2.0 ** ((q + 1.0) * p / q + 1.0) * bracket


def _M_sobolev(ctx, ratio):
    ctx.need("ref_lambda_ball")
    params = ctx.params
    params.require_superhomogeneous()
    n, p, q, s = params.dim, params.p, params.q, params.s
    wn = unit_ball_volume(n)
    W = _W(params, ratio)
    E = _E(params, ratio)
    inner = (W / (s * (1.0 - s) * ctx.ref_lambda_ball)) ** (1.0 / p)
    return wn ** (-1.0 / q) / (
        1.0 + wn ** (1.0 / p - 1.0 / q) * (1.0 + ratio ** (n / q)) * inner * E)


def _M_lp(ctx, ratio):
    params = ctx.params
    n, p = params.dim, params.p
    wn = unit_ball_volume(n)
    E = _E(params, ratio)
    return wn ** (-1.0 / p) / (
        1.0 + wirtinger_chain(params) ** (1.0 / p) * (ratio ** (n / p) + 1.0) * E)


def _C_cap_balls(ctx, tau):
    ctx.need("ref_lambda_ball_pp")
    params = ctx.params
    n, p, s = params.dim, params.p, params.s
    if tau <= 0:
        raise ConstantError(f"C_cap_balls requires tau > 0, got {tau}")
    lam = ctx.ref_lambda_ball_pp
    wn = unit_ball_volume(n)
    t1 = (c_holder(params) / (s * (1.0 - s) * lam)) ** (1.0 / p) * (2 * tau) ** s
    t2 = ((1.0 - s) ** (1.0 / p)
          * (n * wn / (s * (1.0 - s) * lam)) ** (1.0 / p)
          * (2 * tau) ** ((n + s * p) / p))
    return (1.0 + t1 + t2) ** p


def _sigma(ctx):
    ctx.need("ref_cap_ball")
    params = ctx.params
    params.require_superhomogeneous()
    n, p = params.dim, params.p
    ratio = 2.0 * math.sqrt(n)
    M = _M_sobolev(ctx, ratio)
    C = _C_cap_balls(ctx, ratio)
    return M ** p / C * ctx.ref_cap_ball / (4.0 * n + 1.0) ** n


def _A_aux(ctx, gamma, eps, delta=0.0):
    ctx.need("ref_cap_ball")
    params = ctx.params
    n, p, q, s = params.dim, params.p, params.q, params.s
    if not 0.0 < eps < 0.5:
        raise ConstantError(f"A_aux requires 0 < eps < 1/2, got {eps}")
    wn = unit_ball_volume(n)
    cap = ctx.ref_cap_ball
    vol_shrunk = wn * (1.0 - 2.0 * eps) ** n
    lead = 2.0 ** (p - 1.0) * cap / vol_shrunk ** (p / q)
    inner = (c_holder(params) / (s * (1.0 - s) * cap) * wn * (2.0 * n) ** s
             / eps ** (s * (p - 1.0)))
    return lead * (inner + (delta + gamma))


def _is_conformal(params):
    return abs(params.sp - params.dim) < 1e-9


def _gamma0(ctx):
    params = ctx.params
    n, p, s = params.dim, params.p, params.s
    if params.p == 1.0:
        return 1.0
    if _is_conformal(params):
        ctx.need("ref_lambda_conformal", "ref_cap_ball")
        K = unit_ball_volume(n) ** (n / s) * ctx.ref_lambda_conformal
        return min(2.0 ** (-n) * K / ctx.ref_cap_ball, 1.0)
    ctx.need("sobolev_S", "ref_cap_ball")
    wn = unit_ball_volume(n)
    return min(1.0 / (wn ** (p / n - 1.0) * ctx.sobolev_S * ctx.ref_cap_ball),
               1.0)


def _eps0(ctx, gamma):
    params = ctx.params
    n, p, s = params.dim, params.p, params.s
    if params.p == 1.0:
        if not 0.0 < gamma < 1.0:
            raise ConstantError("eps0 (p=1) requires gamma in (0,1)")
        return 0.5 * (1.0 - (2.0 * gamma / (1.0 + gamma)) ** (1.0 / (n - s)))
    g0 = _gamma0(ctx)
    if not 0.0 < gamma < g0:
        raise ConstantError(
            f"eps0 requires gamma in (0, gamma0) with gamma0 = {g0:.6g}")
    if _is_conformal(params):
        return 0.25 * (1.0 - (gamma / g0) ** (1.0 / n))
    return 0.25 * (1.0 - (gamma / g0) ** (1.0 / (n - params.sp)))


def _C_upper(ctx, gamma):
    params = ctx.params
    params.require_superhomogeneous()
    n, p, s = params.dim, params.p, params.s
    eps0 = _eps0(ctx, gamma)
    if p == 1.0:
        return 2.0 / (1.0 - gamma) * _A_aux(ctx, gamma, eps0, 0.0)
    g0 = _gamma0(ctx)
    if _is_conformal(params):
        factor = 1.0 - (gamma / g0) ** (s / n) / (1.0 - 2.0 * eps0)
        return factor ** (-n / s) * _A_aux(ctx, gamma, eps0, 0.0)
    factor = 1.0 - (gamma / g0) ** (1.0 / p) / (1.0 - 2.0 * eps0) ** (n / p - s)
    return factor ** (-p) * _A_aux(ctx, gamma, eps0, 0.0)


def _beta(ctx):
    ctx.need("ref_local_lambda", "ref_local_cap", "ref_cap_ball")
    params = ctx.params
    s = params.s
    return (s * (1.0 - s) * ctx.ref_local_lambda ** (1.0 - s)
            * ctx.ref_cap_ball / (c_holder(params) * ctx.ref_local_cap))


def _c_subcrit(ctx, volume):
    # stand-in right-hand side of the subcritical positivity bound,
    # s(1-s) lambda >= s(1-s)/S * |Omega|^(p/p*_s - p/q); with the lower-bound
    # Sobolev slot this can overshoot the sharp statement, so it is reported,
    # never asserted.
    ctx.need("sobolev_S")
    params = ctx.params
    if params.sp >= params.dim:
        raise ConstantError("the subcritical bound requires s*p < N")
    expo = params.p / params.p_star - params.p / params.q
    return params.s * (1.0 - params.s) / ctx.sobolev_S * volume ** expo


def phi_slab(r, dim):
    """Volume defect profile of a ball of radius r > 1 against a unit slab:
    2 omega_{N-1} integral of cos^N over (arcsin(1/r), pi/2)."""
    if r <= 1.0:
        raise ConstantError(f"phi_slab requires r > 1, got {r}")
    a = math.asin(1.0 / r)
    if dim == 1:
        return 2.0 * (1.0 - 1.0 / r)
    if dim == 2:
        # 2 * omega_1 * [ (t + sin t cos t)/2 ] from a to pi/2, omega_1 = 2
        return 2.0 * (math.pi / 2 - a - math.sin(a) * math.cos(a))
    raise ConstantError("phi_slab implemented for N in {1, 2}")


def phi_slab_inv(y, dim):
    """Inverse of phi_slab on (1, inf); defined for y in (0, omega_N)."""
    wn = unit_ball_volume(dim)
    if not 0.0 < y < wn:
        raise ConstantError(
            f"phi_slab_inv requires y in (0, omega_N) = (0, {wn:.6g})")
    lo, hi = 1.0 + 1e-15, 2.0
    while phi_slab(hi, dim) < y:
        hi *= 2.0
        if hi > 1e12:
            raise ConstantError("phi_slab_inv bisection overflow")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if phi_slab(mid, dim) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _gamma0_slab(ctx):
    ctx.need("ref_local_lambda", "ref_local_cap", "ref_small_s_lambda")
    params = ctx.params
    wn = unit_ball_volume(params.dim)
    val = (wn * ctx.ref_local_lambda
           / (c_holder(params) * ctx.ref_local_cap) * ctx.ref_small_s_lambda)
    return min(val, 1.0)


def _slab_rhs(ctx, gamma):
    """Right-hand side of the slab volume bound at the context's s:
    gamma c_holder lambda_p(B_2)^(s-1) cap_p(B_1;B_2) / (s(1-s) lambda^s_p(B_2))."""
    ctx.need("ref_local_lambda", "ref_local_cap", "ref_lambda_ball2_pp")
    params = ctx.params
    s = params.s
    return (gamma * c_holder(params) * ctx.ref_local_lambda ** (s - 1.0)
            * ctx.ref_local_cap / (s * (1.0 - s) * ctx.ref_lambda_ball2_pp))


_REGISTRY = {
    "c_holder": lambda ctx, **kw: c_holder(ctx.params),
    "cal_W": lambda ctx, **kw: wirtinger_chain(ctx.params),
    "E": lambda ctx, ratio, **kw: _E(ctx.params, ratio),
    "W": lambda ctx, ratio, **kw: _W(ctx.params, ratio),
    "M": lambda ctx, ratio, **kw: _M_sobolev(ctx, ratio),
    "M_lp": lambda ctx, ratio, **kw: _M_lp(ctx, ratio),
    "C_cap_balls": lambda ctx, tau, **kw: _C_cap_balls(ctx, tau),
    "sigma": lambda ctx, **kw: _sigma(ctx),
    "A_aux": lambda ctx, gamma, eps, delta=0.0, **kw: _A_aux(ctx, gamma, eps,
                                                             delta),
    "gamma0": lambda ctx, **kw: _gamma0(ctx),
    "eps0": lambda ctx, gamma, **kw: _eps0(ctx, gamma),
    "C_upper": lambda ctx, gamma, **kw: _C_upper(ctx, gamma),
    "beta": lambda ctx, **kw: _beta(ctx),
    "c_subcrit": lambda ctx, volume, **kw: _c_subcrit(ctx, volume),
    "phi_slab": lambda ctx, r, **kw: phi_slab(r, ctx.params.dim),
    "phi_slab_inv": lambda ctx, y, **kw: phi_slab_inv(y, ctx.params.dim),
    "gamma0_slab": lambda ctx, **kw: _gamma0_slab(ctx),
    "slab_rhs": lambda ctx, gamma, **kw: _slab_rhs(ctx, gamma),
    "bbm_K": lambda ctx, **kw: _slot(ctx, "bbm_K"),
    "sobolev_S": lambda ctx, **kw: _slot(ctx, "sobolev_S"),
}


def _slot(ctx, name):
    ctx.need(name)
    return getattr(ctx, name)


def registry_names():
    return sorted(_REGISTRY)


def eval_constant(name, ctx, **args):
    """Evaluate a registry constant by name.  Raises on unknown names,
    missing context slots, and out-of-domain arguments."""
    if name not in _REGISTRY:
        raise ConstantError(
            f"unknown constant {name!r}; known: {', '.join(registry_names())}")
    try:
        return float(_REGISTRY[name](ctx, **args))
    except TypeError as exc:
        raise ConstantError(f"bad or missing arguments for {name!r}: {exc}")


# ---------------------------------------------------------------------------
# numeric reference slots
# ---------------------------------------------------------------------------

_CTX_CACHE = {}


def build_context(params, h=None, near_band=2, slots=("lambda", "cap"),
                  sobolev_ball_radius=2.0):
    """Populate a ConstantContext by running the solvers on reference balls.

    ``slots`` selects which reference quantities to compute:
    ``lambda`` (ball frequencies), ``cap`` (nonlocal ball capacity),
    ``local`` (local frequency and capacity of the reference balls),
    ``sobolev`` (one-sided Sobolev estimate), ``conformal``
    (lambda^s_{N/s,1}(B_1) when s*p = N), ``slab`` (small-s plateau and
    lambda^s_p(B_2)), ``bbm`` (the s -> 1 plateau ratio).
    All values are cached per (params, h, near_band, slot).
    """
    from .lattice import build_ball_domain
    from .solvers import capacity, frequency, local_capacity, local_frequency

    if h is None:
        h = 1.0 / 64 if params.dim == 1 else 1.0 / 16
    ctx = ConstantContext(params=params)
    ctx.meta = {"h": h, "near_band": near_band}
    origin = np.zeros(params.dim)

    def cached(slot, fn):
        key = (params.dim, params.s, params.p, params.q, h, near_band, slot)
        if key not in _CTX_CACHE:
            _CTX_CACHE[key] = fn()
        return _CTX_CACHE[key]

    def ball(rad):
        return build_ball_domain(origin, rad, h, pad=2)

    def closed_unit_mask(env):
        pts = env.centers()
        return (np.linalg.norm(pts, axis=1) <= 1.0).reshape(env.box_shape)

    if "lambda" in slots:
        ctx.ref_lambda_ball = cached("lambda_pq", lambda: frequency(
            ball(1.0), params, near_band=near_band).value)
        if params.q == params.p:
            ctx.ref_lambda_ball_pp = ctx.ref_lambda_ball
        else:
            pp = params.with_(q=params.p)
            ctx.ref_lambda_ball_pp = cached("lambda_pp", lambda: frequency(
                ball(1.0), pp, near_band=near_band).value)
    if "cap" in slots:
        def _cap():
            env = ball(2.0)
            return capacity(closed_unit_mask(env), env, params,
                            near_band=near_band).value
        ctx.ref_cap_ball = cached("cap_ball", _cap)
    if "local" in slots:
        ctx.ref_local_lambda = cached("local_lambda", lambda: local_frequency(
            ball(2.0), params.p).value)

        def _lcap():
            env = ball(2.0)
            return local_capacity(closed_unit_mask(env), env, params.p).value
        ctx.ref_local_cap = cached("local_cap", _lcap)
    if "sobolev" in slots and params.sp < params.dim - 1e-9:
        rad = sobolev_ball_radius if params.dim == 1 else min(
            sobolev_ball_radius, 1.5)

        def _sob():
            crit = params.with_(q=params.p_star)
            lam = frequency(ball(rad), crit, near_band=near_band).value
            return 1.0 / lam
        ctx.sobolev_S = cached(f"sobolev_S@{rad:g}", _sob)
    if "conformal" in slots and _is_conformal(params):
        def _conf():
            conf = params.with_(p=params.dim / params.s, q=1.0)
            return frequency(ball(1.0), conf, near_band=near_band).value
        ctx.ref_lambda_conformal = cached("lambda_conformal", _conf)
    if "slab" in slots:
        def _small_s():
            vals = []
            for s_small in (0.05, 0.1):
                ps = FracParams(dim=params.dim, s=s_small, p=params.p)
                vals.append(s_small * frequency(ball(2.0), ps,
                                                near_band=near_band).value)
            return float(np.mean(vals))
        ctx.ref_small_s_lambda = cached("small_s_lambda", _small_s)

        def _lam2():
            pp = params.with_(q=params.p)
            return frequency(ball(2.0), pp, near_band=near_band).value
        ctx.ref_lambda_ball2_pp = cached("lambda2_pp", _lam2)
    if "bbm" in slots:
        def _bbm():
            loc = local_frequency(ball(1.0), 2.0).value
            vals = []
            for s_big in (0.9, 0.95):
                ps = FracParams(dim=params.dim, s=s_big, p=2.0,
                                allow_supercritical=True)
                vals.append((1.0 - s_big) * frequency(
                    ball(1.0), ps, near_band=near_band).value / loc)
            return float(np.mean(vals))
        ctx.bbm_K = cached("bbm_K", _bbm)
    return ctx


# ---------------------------------------------------------------------------
# asymptotic trend probes
# ---------------------------------------------------------------------------

@dataclass
class TrendReport:
    name: str
    variable: str
    grid: list
    values: list
    fitted_exponent: float
    expected_exponent: float
    ok: bool


def asymptotic_probe(name, ctx_factory, variable, grid, expected_exponent,
                     args=None, exponent_tol=0.15):
    """Fit the leading power of a registry constant along a parameter grid.

    ``ctx_factory`` maps a grid value to a ConstantContext (it may ignore the
    value when the context does not depend on it).  ``variable`` is one of
    ``s`` (context-changing), ``gamma`` (fitted against 1 - gamma) or
    ``ratio`` (passed as the constant's ratio argument).
    """
    if variable not in ("s", "gamma", "ratio"):
        raise ConstantError(f"unknown probe variable {variable!r}")
    grid = [float(g) for g in grid]
    if len(grid) < 3:
        raise ConstantError("probe grid needs at least 3 points")
    args = dict(args or {})
    xs, vals = [], []
    for g in grid:
        ctx = ctx_factory(g)
        a = dict(args)
        if variable == "gamma":
            a["gamma"] = g
            xs.append(1.0 - g)
        elif variable == "ratio":
            a["ratio"] = g
            xs.append(g)
        else:
            xs.append(g)
        vals.append(eval_constant(name, ctx, **a))
    lx = np.log(np.asarray(xs))
    lv = np.log(np.abs(np.asarray(vals)))
    slope = float(np.polyfit(lx, lv, 1)[0])
    ok = abs(slope - expected_exponent) <= exponent_tol
    return TrendReport(name=name, variable=variable, grid=grid, values=vals,
                       fitted_exponent=slope, expected_exponent=expected_exponent,
                       ok=ok)
