"""Verification suites, report serialization, and parameter sweeps.

Each suite exercises one family of identities or inequalities across the
solver stack and returns a :class:`VerificationReport`.  Checks never abort a
suite: a solver failure is recorded as a failed check with the exception text
in its note.  Reports serialize to canonical JSON that is byte-identical for
identical configuration and seed (timings are kept in memory and only
serialized on request).
"""

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, _backend
from .constants import (
    ConstantContext,
    build_context,
    c_holder,
    eval_constant,
    phi_slab,
    phi_slab_inv,
    wirtinger_chain,
)
from .energy import average, frac_perimeter, gagliardo_p, lq_norm, strip_seminorm_p
from .geometry import SearchConfig, capacitary_inradius, inradius
from .lattice import (
    LatticeDomain,
    LatticeFunction,
    assemble_kernel,
    build_ball_domain,
    build_domain,
)
from .params import FracParams, unit_ball_volume
from .solvers import (
    capacity,
    cheeger,
    frequency,
    local_capacity,
    local_frequency,
    torsion,
    torsion_identity_gap,
)


class ConfigError(ValueError):
    pass


_CONFIG_KEYS = {
    "h": float,
    "near_band": int,
    "tol_exact": float,
    "tol_discrete": float,
    "tol_plateau": float,
    "corpus_size": int,
    "gamma_safety": float,
}

_DEFAULTS = {
    "h": 1.0 / 128,
    "near_band": 2,
    "tol_exact": 1e-10,
    "tol_discrete": 0.03,
    "tol_plateau": 0.15,
    "corpus_size": 200,
    "gamma_safety": 0.5,
}


@dataclass
class HarnessConfig:
    h: float = _DEFAULTS["h"]
    near_band: int = _DEFAULTS["near_band"]
    tol_exact: float = _DEFAULTS["tol_exact"]
    tol_discrete: float = _DEFAULTS["tol_discrete"]
    tol_plateau: float = _DEFAULTS["tol_plateau"]
    corpus_size: int = _DEFAULTS["corpus_size"]
    gamma_safety: float = _DEFAULTS["gamma_safety"]

    @property
    def tol_discrete_2d(self):
        # 2D checks run coarser grids; scale the 3% default to 5%
        return self.tol_discrete * 5.0 / 3.0

    def to_dict(self):
        return {k: getattr(self, k) for k in _CONFIG_KEYS}


def parse_config(path=None, text=None):
    """Parse key=value configuration lines (strict key set)."""
    cfg = HarnessConfig()
    if path is None and text is None:
        return cfg
    if text is None:
        with open(path) as f:
            text = f.read()
    for ln_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln_no}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {ln_no}: unknown key {key!r}")
        try:
            setattr(cfg, key, _CONFIG_KEYS[key](val.strip()))
        except ValueError as exc:
            raise ConfigError(f"line {ln_no}: bad value for {key}: {exc}")
    return cfg


# ---------------------------------------------------------------------------
# checks and reports
# ---------------------------------------------------------------------------

@dataclass
class Check:
    id: str
    description: str
    lhs: float
    rhs: float
    relation: str            # "<=", "==", "plateau"
    slack: float
    ok: bool
    runtime_ms: float = 0.0
    note: str = ""

    def to_dict(self, include_timings=False):
        d = {
            "id": self.id,
            "description": self.description,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "slack": self.slack,
            "pass": self.ok,
        }
        if self.note:
            d["note"] = self.note
        if include_timings:
            d["runtime_ms"] = self.runtime_ms
        return d


@dataclass
class VerificationReport:
    suite: str
    checks: list
    environment: dict

    def all_pass(self):
        return all(c.ok for c in self.checks)

    def to_dict(self, include_timings=False):
        return {
            "suite": self.suite,
            "environment": self.environment,
            "checks": [c.to_dict(include_timings) for c in self.checks],
            "pass": self.all_pass(),
        }

    def to_json(self, include_timings=False):
        return json.dumps(self.to_dict(include_timings), indent=2,
                          sort_keys=True, allow_nan=False) + "\n"

    def to_csv(self):
        lines = ["id,relation,lhs,rhs,slack,pass,description"]
        for c in self.checks:
            desc = c.description.replace('"', "'")
            lines.append(
                f"{c.id},{c.relation},{_csv_num(c.lhs)},{_csv_num(c.rhs)},"
                f"{_csv_num(c.slack)},{int(c.ok)},\"{desc}\"")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_json(text):
        d = json.loads(text)
        checks = [
            Check(id=c["id"], description=c["description"], lhs=c["lhs"],
                  rhs=c["rhs"], relation=c["relation"], slack=c["slack"],
                  ok=c["pass"], note=c.get("note", ""))
            for c in d["checks"]
        ]
        return VerificationReport(d["suite"], checks, d["environment"])


def _csv_num(v):
    return "" if v is None else repr(float(v))


class _Suite:
    """Collects checks; converts exceptions into failed checks."""

    def __init__(self, name, cfg, seed):
        self.name = name
        self.cfg = cfg
        self.seed = seed
        self.checks = []
        self._counter = 0

    def rng(self):
        self._counter += 1
        return np.random.default_rng([self.seed, _SUITE_IDS[self.name],
                                      self._counter])

    def add(self, cid, description, relation, fn, tol=None):
        t0 = time.perf_counter()
        note = ""
        try:
            lhs, rhs = fn()
            lhs = float(lhs)
            rhs = float(rhs)
            if relation == "<=":
                tol = 0.0 if tol is None else tol
                ok = lhs <= rhs + tol * max(abs(rhs), 1.0)
                slack = lhs - rhs
            elif relation == "==":
                tol = 1e-10 if tol is None else tol
                slack = abs(lhs - rhs) / max(abs(rhs), 1e-300)
                ok = slack <= tol
            elif relation == "plateau":
                tol = self.cfg.tol_plateau if tol is None else tol
                slack = lhs
                ok = lhs <= tol
            else:
                raise ValueError(f"unknown relation {relation!r}")
        except Exception as exc:  # a failing solver yields a failed check
            lhs = rhs = slack = None
            ok = False
            note = f"{type(exc).__name__}: {exc}"
        ms = (time.perf_counter() - t0) * 1000.0
        self.checks.append(Check(id=f"{self.name}.{cid}",
                                 description=description, lhs=lhs, rhs=rhs,
                                 relation=relation,
                                 slack=slack, ok=ok, runtime_ms=ms, note=note))


def _drift(values):
    """Relative spread of a plateau sample."""
    v = np.asarray(values, dtype=float)
    scale = max(abs(float(np.mean(v))), 1e-300)
    return float((v.max() - v.min()) / scale)


def random_bump(dom, rng, n_bumps=2, width_frac=(0.08, 0.35)):
    """Sum of seeded Gaussian bumps sampled on the box cells."""
    lo, hi = dom.box_bounds()
    extent = hi - lo
    pts = dom.centers()
    u = np.zeros(len(pts))
    for _ in range(n_bumps):
        c = lo + rng.uniform(0.2, 0.8, size=dom.dim) * extent
        w = rng.uniform(*width_frac) * float(np.min(extent))
        a = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        u += a * np.exp(-np.sum((pts - c) ** 2, axis=1) / w ** 2)
    return u.reshape(dom.box_shape)


# ---------------------------------------------------------------------------
# individual suites
# ---------------------------------------------------------------------------

def _rescaled(dom, factor):
    return LatticeDomain(dom.h * factor, dom.origin * factor, dom.active.copy())


def _ball_mask(dom, center, radius, closed=True):
    pts = dom.centers()
    d = np.linalg.norm(pts - np.atleast_1d(center), axis=1)
    m = d <= radius if closed else d < radius
    return m.reshape(dom.box_shape)


def _suite_scaling(st):
    cfg = st.cfg
    params = FracParams(dim=1, s=0.5, p=2.0)
    dom = build_domain("interval:0,1", cfg.h)
    dom2 = _rescaled(dom, 2.0)
    alpha = params.freq_scaling_power

    def freq_rescale():
        l1 = frequency(dom, params, near_band=cfg.near_band).value
        l2 = frequency(dom2, params, near_band=cfg.near_band).value
        return l2, l1 / 2.0 ** alpha
    st.add("frequency-rescale",
           "frequency under grid dilation matches the r^-(sp-N+Np/q) law "
           "[scaling-frequency]", "==", freq_rescale, tol=cfg.tol_exact)

    env = build_domain("interval:-2,2", cfg.h)
    sig = _ball_mask(env, 0.0, 1.0)
    env2 = _rescaled(env, 2.0)

    def cap_rescale():
        c1 = capacity(sig, env, params, near_band=cfg.near_band).value
        c2 = capacity(sig, env2, params, near_band=cfg.near_band).value
        return c2, c1 * 2.0 ** (params.dim - params.sp)
    st.add("capacity-rescale",
           "relative capacity under grid dilation matches the r^(N-sp) law "
           "[riscalamento]", "==", cap_rescale, tol=cfg.tol_exact)

    def per_rescale():
        d1 = build_domain("interval:-1,1", cfg.h)
        p1 = frac_perimeter(d1, 0.5, near_band=cfg.near_band)
        p2 = frac_perimeter(_rescaled(d1, 3.0), 0.5, near_band=cfg.near_band)
        return p2, p1 * 3.0 ** (1 - 0.5)
    st.add("perimeter-rescale",
           "indicator energy under dilation matches the r^(N-s) law "
           "[cap-per scaling]", "==", per_rescale, tol=cfg.tol_exact)

    def local_rescale():
        l1 = local_frequency(dom, 2.0).value
        l2 = local_frequency(dom2, 2.0).value
        return l2, l1 / 4.0
    st.add("local-frequency-rescale",
           "local frequency under dilation matches the r^-p law", "==",
           local_rescale, tol=cfg.tol_exact)


def _suite_monotonicity(st):
    cfg = st.cfg
    params = FracParams(dim=1, s=0.5, p=2.0)
    big = build_domain("interval:0,1", cfg.h)
    inner = big.with_active(big.active & (
        np.abs(big.centers()[:, 0] - 0.5) < 0.3).reshape(big.box_shape))

    def dom_mono():
        return (frequency(big, params, near_band=cfg.near_band).value,
                frequency(inner, params, near_band=cfg.near_band).value)
    st.add("frequency-domain",
           "larger domains have no larger frequency [scaling-frequency]",
           "<=", dom_mono, tol=cfg.tol_exact)

    def inradius_bound():
        two = build_domain("interval:0,3", cfg.h)
        pts = two.centers()[:, 0]
        act = ((pts > 0) & (pts < 1)) | ((pts > 1.4) & (pts < 3))
        omega = two.with_active(act.reshape(two.box_shape) & two.active)
        lam = frequency(omega, params, near_band=cfg.near_band).value
        r = inradius(omega)
        # inscribed ball as an active-mask subset of the same grid
        from scipy import ndimage
        d = ndimage.distance_transform_edt(omega.active, sampling=omega.h)
        c = np.unravel_index(int(np.argmax(d)), omega.box_shape)
        center = omega.centers().reshape(omega.box_shape + (omega.dim,))[c]
        ball = omega.with_active(_ball_mask(omega, center, r) & omega.active)
        return lam, frequency(ball, params, near_band=cfg.near_band).value
    st.add("frequency-inradius",
           "frequency bounded by that of the inscribed ball [monotonicity]",
           "<=", inradius_bound, tol=cfg.tol_exact)

    env = build_domain("interval:-2,2", cfg.h)
    rng = st.rng()

    def cap_mono_sigma():
        a = rng.uniform(0.3, 0.8)
        small = _ball_mask(env, 0.0, a * 0.7)
        large = _ball_mask(env, 0.0, a)
        return (capacity(small, env, params, near_band=cfg.near_band).value,
                capacity(large, env, params, near_band=cfg.near_band).value)
    st.add("capacity-sigma-monotone",
           "capacity is monotone in the compact set", "<=", cap_mono_sigma,
           tol=cfg.tol_exact)

    def cap_antitone_env():
        sig = _ball_mask(env, 0.0, 0.5)
        envS = env.with_active(_ball_mask(env, 0.0, 1.2) & env.active)
        return (capacity(sig, env, params, near_band=cfg.near_band).value,
                capacity(sig, envS, params, near_band=cfg.near_band).value)
    st.add("capacity-env-antitone",
           "capacity grows when the environment shrinks", "<=",
           cap_antitone_env, tol=cfg.tol_exact)


def _suite_cap_identities(st):
    cfg = st.cfg
    s = 0.5
    p1 = FracParams(dim=1, s=s, p=1.0)

    def cap_per():
        env = build_domain("interval:-1,1", cfg.h)
        sig = _ball_mask(env, 0.0, 0.5)
        cap = capacity(sig, env, p1, near_band=cfg.near_band).value
        per = frac_perimeter(env, s, near_band=cfg.near_band, mask=sig)
        return cap, per
    st.add("cap-per",
           "p=1 capacity of a convex set equals its nonlocal perimeter "
           "[cap-per]", "==", cap_per, tol=cfg.tol_discrete)

    params = FracParams(dim=1, s=0.4, p=2.0)
    env = build_domain("interval:-2,2", cfg.h)
    sig = _ball_mask(env, 0.0, 1.0)

    def cap_vol():
        lam = frequency(env, params, near_band=cfg.near_band).value
        cap = capacity(sig, env, params, near_band=cfg.near_band).value
        vol = env.measure(sig)
        return vol * lam, cap
    st.add("cap-vol", "volume times frequency bounds capacity below "
           "[cap-vol]", "<=", cap_vol, tol=cfg.tol_exact)

    def cap_cap():
        cap_nl = capacity(sig, env, params, near_band=cfg.near_band).value
        lam_loc = local_frequency(env, params.p).value
        cap_loc = local_capacity(sig, env, params.p).value
        rhs = (c_holder(params) / (params.s * (1 - params.s))
               * lam_loc ** (params.s - 1.0) * cap_loc)
        return cap_nl, rhs
    st.add("cap-cap", "nonlocal capacity controlled by the local one "
           "[cap-cap]", "<=", cap_cap, tol=cfg.tol_exact)

    def balls_left():
        small = build_ball_domain([0.0], 1.0, cfg.h)
        sigm = _ball_mask(small, 0.0, 0.5)
        big = build_ball_domain([0.0], 2.0, cfg.h)
        sigb = _ball_mask(big, 0.0, 0.5)
        cr = capacity(sigm, small, params, near_band=cfg.near_band).value
        cR = capacity(sigb, big, params, near_band=cfg.near_band).value
        return cR, cr
    st.add("cap-wrt-balls-left",
           "capacity in the large ball bounded by the small-ball one "
           "[cap-wrt-balls]", "<=", balls_left, tol=cfg.tol_exact)

    def balls_right():
        small = build_ball_domain([0.0], 1.0, cfg.h)
        sigm = _ball_mask(small, 0.0, 0.5)
        big = build_ball_domain([0.0], 2.0, cfg.h)
        sigb = _ball_mask(big, 0.0, 0.5)
        cr = capacity(sigm, small, params, near_band=cfg.near_band).value
        cR = capacity(sigb, big, params, near_band=cfg.near_band).value
        ctx = build_context(params, h=cfg.h, near_band=cfg.near_band,
                            slots=("lambda",))
        # d = dist(sigma, boundary of the small ball) = 0.5, tau = R/d = 4
        C = eval_constant("C_cap_balls", ctx, tau=2.0 / 0.5)
        return cr, C * cR
    st.add("cap-wrt-balls-right",
           "small-ball capacity bounded by the explicit multiple of the "
           "large-ball one [cap-wrt-balls]", "<=", balls_right)


def _suite_cap_null(st):
    cfg = st.cfg
    params = FracParams(dim=1, s=0.4, p=2.0)
    gaps = {}

    def gap_at(h):
        intact = build_domain("interval:0,1", h)
        mid = intact.box_shape[0] // 2
        punct = build_domain(f"punctured:interval:0,1;{mid}", h)
        li = frequency(intact, params, near_band=cfg.near_band).value
        lp = frequency(punct, params, near_band=cfg.near_band).value
        return abs(lp - li) / li

    hs = [1.0 / 32, 1.0 / 64, 1.0 / 128]
    for h in hs:
        gaps[h] = gap_at(h)
    st.add("refine-1", "frequency gap from a one-cell puncture shrinks "
           "under refinement (level 1) [cap-null]", "<=",
           lambda: (gaps[hs[1]], gaps[hs[0]]))
    st.add("refine-2", "frequency gap from a one-cell puncture shrinks "
           "under refinement (level 2) [cap-null]", "<=",
           lambda: (gaps[hs[2]], gaps[hs[1]]))


def _suite_poincare(st):
    cfg = st.cfg
    s = 0.5

    def palle():
        om = build_domain("interval:-2,2", cfg.h)
        e = _ball_mask(om, 0.0, 1.0, closed=False)
        got = cheeger(e, om, s, near_band=cfg.near_band).value
        exact = 4.0 * (2.0 * 1.0) ** (-s) / (s * (1 - s))
        return got, exact
    st.add("cheeger-ball", "Cheeger-type constant of concentric balls matches "
           "the sharp set value [poincare-Palle]", "==", palle,
           tol=cfg.tol_discrete)

    def palle_set():
        om = build_domain("interval:-2,2", cfg.h)
        e = _ball_mask(om, 0.0, 1.0, closed=False)
        res = cheeger(e, om, s, near_band=cfg.near_band)
        got = res.info["level_set"]
        pts = om.centers()[:, 0]
        inner = (np.abs(pts) < 1.0 - om.h).reshape(om.box_shape)
        outer = (np.abs(pts) < 1.0 + om.h).reshape(om.box_shape)
        violations = int(np.sum(got & ~outer)) + int(np.sum(inner & ~got))
        return violations, 0
    st.add("cheeger-optimal-set", "extracted optimal set is the concentric "
           "ball up to one cell layer [poincare-Palle]", "<=", palle_set)

    params = FracParams(dim=1, s=s, p=2.0, q=2.5)
    ctx = build_context(params, h=cfg.h, near_band=cfg.near_band,
                        slots=("lambda",))
    dom = build_ball_domain([0.0], 1.0, cfg.h)
    kern = assemble_kernel(dom, params, near_band=cfg.near_band)
    rng = st.rng()
    n_corpus = max(10, cfg.corpus_size // 10)

    def poin_sobolev():
        worst = -np.inf
        r = 1.0
        for _ in range(n_corpus):
            u = random_bump(dom, rng)
            u = np.where(dom.active, u, 0.0)
            if not np.any(u):
                continue
            fn = LatticeFunction(u, dom)
            lhs = lq_norm(fn, params.q, _ball_mask(dom, 0.0, r)) ** params.p
            strip = strip_seminorm_p(fn, ((0.0,), r), kern, params).value
            rhs = (2.0 * r ** params.freq_scaling_power
                   / ctx.ref_lambda_ball * strip)
            worst = max(worst, lhs - rhs)
        return worst, 0.0
    st.add("poin-sobolev", "one-sided energy controls the Lq norm on the ball "
           "with the explicit constant [poin-sobolev]", "<=", poin_sobolev,
           tol=cfg.tol_exact)

    pw = FracParams(dim=1, s=s, p=2.0)
    kern_pw = assemble_kernel(dom, pw, near_band=cfg.near_band)

    def wirtinger():
        worst = -np.inf
        r = 0.8
        ball = _ball_mask(dom, 0.0, r, closed=False)
        W = wirtinger_chain(pw)
        for _ in range(n_corpus):
            u = random_bump(dom, rng)
            fn = LatticeFunction(u, dom)
            av = average(fn, ball)
            dev = LatticeFunction(u - av, dom)
            lhs = lq_norm(dev, pw.p, ball) ** pw.p
            strip = strip_seminorm_p(fn, ((0.0,), r), kern_pw, pw).value
            rhs = W * s * (1 - s) * r ** pw.sp * strip
            worst = max(worst, lhs - rhs)
        return worst, 0.0
    st.add("poincare-wirtinger", "mean-deviation bound by the one-sided "
           "energy [poincare-wirtinger]", "<=", wirtinger, tol=cfg.tol_exact)

    def wirtinger_dilation():
        u = random_bump(dom, st.rng())
        fn = LatticeFunction(u, dom)
        r = 0.8
        ball = _ball_mask(dom, 0.0, r, closed=False)
        def ratio(fn_, dom_, r_):
            ball_ = _ball_mask(dom_, 0.0, r_, closed=False)
            av = average(fn_, ball_)
            dev = LatticeFunction(fn_.values - av, dom_)
            k = assemble_kernel(dom_, pw, near_band=cfg.near_band)
            num = lq_norm(dev, pw.p, ball_) ** pw.p
            den = r_ ** pw.sp * strip_seminorm_p(fn_, ((0.0,), r_), k, pw).value
            return num / den
        r1 = ratio(fn, dom, r)
        dom3 = _rescaled(dom, 3.0)
        r2 = ratio(LatticeFunction(u, dom3), dom3, 3.0 * r)
        return r2, r1
    st.add("wirtinger-dilation", "the mean-deviation ratio is dilation "
           "invariant [poincare-wirtinger]", "==", wirtinger_dilation,
           tol=cfg.tol_exact)

    big = build_ball_domain([0.0], 2.0, cfg.h)
    kern_b = assemble_kernel(big, params, near_band=cfg.near_band)

    def sob_wirtinger():
        worst = -np.inf
        r, R = 1.0, 2.0
        ball = _ball_mask(big, 0.0, r, closed=False)
        W = eval_constant("W", ConstantContext(params=params), ratio=R / r)
        for _ in range(n_corpus):
            u = random_bump(big, rng)
            fn = LatticeFunction(u, big)
            av = average(fn, ball)
            dev = LatticeFunction(u - av, big)
            lhs = lq_norm(dev, params.q, ball) ** params.p
            strip = strip_seminorm_p(fn, ((0.0,), R), kern_b, params).value
            rhs = (W * R ** params.freq_scaling_power
                   / ctx.ref_lambda_ball * strip)
            worst = max(worst, lhs - rhs)
        return worst, 0.0
    st.add("poin-sob-wirtinger", "mean-deviation Lq bound with the explicit "
           "constant [poin-sob-wirtinger]", "<=", sob_wirtinger,
           tol=cfg.tol_exact)


def _suite_mazya(st):
    cfg = st.cfg
    rng = st.rng()
    n_corpus = cfg.corpus_size
    s_grid = (0.3, 0.5, 0.7)
    q_grid = (2.0, 2.5)
    r, R = 1.0, 2.0   # ratio 2 > sqrt(N) for N = 1

    env = build_ball_domain([0.0], R, cfg.h)
    pts_x = env.centers()[:, 0]
    ball_r = _ball_mask(env, 0.0, r)

    def resources(s, q):
        params = FracParams(dim=1, s=s, p=2.0, q=q, allow_supercritical=True)
        kern = assemble_kernel(env, params, near_band=cfg.near_band)
        return params, kern

    def random_sigma():
        a, b = sorted(rng.uniform(-0.9, 0.9, size=2))
        if b - a < 6 * cfg.h:
            b = min(a + 6 * cfg.h, 0.95)
        return ((pts_x >= a) & (pts_x <= b)).reshape(env.box_shape)

    def mazya_lp():
        worst = -np.inf
        res = {s: resources(s, 2.0) for s in s_grid}
        for i in range(n_corpus):
            s = s_grid[i % len(s_grid)]
            params, kern = res[s]
            sig = random_sigma()
            cap = capacity(sig, env, params, kern=kern).value
            u = random_bump(env, rng)
            u[sig] = 0.0
            fn = LatticeFunction(u, env)
            M = eval_constant("M_lp", ConstantContext(params=params),
                              ratio=R / r)
            lhs = (M / r ** (1.0 / params.p) * cap ** (1.0 / params.p)
                   * lq_norm(fn, params.p, ball_r))
            rhs = strip_seminorm_p(fn, ((0.0,), R), kern,
                                   params).value ** (1.0 / params.p)
            worst = max(worst, lhs - rhs)
        return worst, 0.0
    st.add("mazya-lp", "capacitary strength bounds the Lp norm through the "
           "one-sided energy [mazya-poin]", "<=", mazya_lp, tol=cfg.tol_exact)

    def mazya_sobolev():
        worst = -np.inf
        combos = [(s, q) for q in q_grid for s in s_grid]
        res = {}
        for s, q in combos:
            params, kern = resources(s, q)
            ctx = build_context(params, h=cfg.h, near_band=cfg.near_band,
                                slots=("lambda",))
            M = eval_constant("M", ctx, ratio=R / r)
            res[(s, q)] = (params, kern, M)
        for i in range(n_corpus):
            params, kern, M = res[combos[i % len(combos)]]
            sig = random_sigma()
            cap = capacity(sig, env, params, kern=kern).value
            u = random_bump(env, rng)
            u[sig] = 0.0
            fn = LatticeFunction(u, env)
            lhs = (M / r ** (1.0 / params.q) * cap ** (1.0 / params.p)
                   * lq_norm(fn, params.q, ball_r))
            rhs = strip_seminorm_p(fn, ((0.0,), R), kern,
                                   params).value ** (1.0 / params.p)
            worst = max(worst, lhs - rhs)
        return worst, 0.0
    st.add("mazya-poin-sobolev", "capacitary strength bounds the Lq norm "
           "through the one-sided energy [mazya-poin2]", "<=", mazya_sobolev,
           tol=cfg.tol_exact)


def _suite_torsion(st):
    cfg = st.cfg
    p2 = FracParams(dim=1, s=0.5, p=2.0)
    p15 = FracParams(dim=1, s=0.4, p=1.5)
    cache = {}

    def solve(params, h):
        key = (params.p, h)
        if key not in cache:
            cache[key] = torsion(0.5, 1.0, params, h=h,
                                 near_band=cfg.near_band)
        return cache[key]

    def el_p2():
        res = solve(p2, cfg.h)
        gap, _, _ = torsion_identity_gap(res, p2)
        return gap, 1e-8
    st.add("euler-lagrange-p2", "source integral equals the energy at the "
           "quadratic minimizer [from-el]", "<=", el_p2)

    def el_p15():
        res = solve(p15, max(cfg.h, 1.0 / 128))
        gap, _, _ = torsion_identity_gap(res, p15)
        return gap, 1e-3
    st.add("euler-lagrange-p15", "source integral equals the energy at the "
           "p=1.5 minimizer [from-el]", "<=", el_p15)

    def nonneg():
        res = solve(p2, cfg.h)
        return -float(res.minimizer.values.min()), 0.0
    st.add("nonnegative", "the torsion minimizer is nonnegative "
           "[Linfty-bound]", "<=", nonneg, tol=1e-12)

    def energy_bound():
        res = solve(p15, max(cfg.h, 1.0 / 128))
        kern = res.info["kern"]
        en = gagliardo_p(res.minimizer, kern, p15).value
        dom = res.minimizer.domain
        # one-sided Sobolev estimate on the same grid and environment
        crit = p15.with_(q=p15.p_star)
        lam = frequency(dom, crit, near_band=cfg.near_band).value
        S_hat = 1.0 / lam
        vol_r = dom.measure(res.info["rhs_ball"])
        p = p15.p
        rhs = (vol_r ** (p15.sp / p15.dim - 1.0 + p) * S_hat) ** (1.0 / (p * (p - 1.0)))
        return en ** (1.0 / p), rhs * (1.0 + 1e-6)
    st.add("energy-bound", "minimizer energy obeys the volume-Sobolev bound "
           "with the one-sided constant [torsione]", "<=", energy_bound)

    def duality():
        res = solve(p2, cfg.h)
        kern = res.info["kern"]
        dom = res.minimizer.domain
        in_r = res.info["rhs_ball"]
        hN = dom.h ** dom.dim
        en_v = gagliardo_p(res.minimizer, kern, p2).value
        rng = st.rng()
        worst = -np.inf
        for _ in range(max(10, cfg.corpus_size // 10)):
            u = np.where(dom.active, random_bump(dom, rng), 0.0)
            fn = LatticeFunction(u, dom)
            e = gagliardo_p(fn, kern, p2).value
            if e <= 0:
                continue
            val = (hN * float(np.sum(np.abs(u[in_r])))) ** p2.p / e
            worst = max(worst, val)
        return worst, en_v ** (p2.p - 1.0) * (1.0 + 1e-8)
    st.add("duality", "no competitor beats the minimizer in the dual "
           "source-mass problem [claim-torsione]", "<=", duality)


def _sandwich_checks(st, name, omega, params, ctx_slots, solver_h, r_max,
                     stride, max_centers):
    cfg = st.cfg
    state = {}

    def setup():
        ctx = build_context(params, h=solver_h, near_band=cfg.near_band,
                            slots=ctx_slots)
        gamma0 = eval_constant("gamma0", ctx)
        gamma = 0.25 * gamma0
        state["gamma"] = gamma
        state["sigma"] = eval_constant("sigma", ctx)
        state["C"] = eval_constant("C_upper", ctx, gamma=gamma)
        scfg = SearchConfig(center_stride=stride, r_max=r_max,
                            solver_h=solver_h, near_band=cfg.near_band,
                            max_centers=max_centers)
        state["res"] = capacitary_inradius(omega, params, gamma, scfg)
        state["lam"] = frequency(omega, params, near_band=cfg.near_band).value

    def lower():
        setup()
        alpha = params.freq_scaling_power
        lhs = (state["gamma"] * state["sigma"]
               * state["res"].r_upper ** (-alpha))
        return lhs, state["lam"]

    def upper():
        alpha = params.freq_scaling_power
        r_low = max(state["res"].r_lower, 1e-300)
        return state["lam"], state["C"] * r_low ** (-alpha)

    st.add(f"{name}-lower",
           "two-sided bound, lower half, via the heuristic radius bracket "
           "[lower-bound]", "<=", lower)
    st.add(f"{name}-upper",
           "two-sided bound, upper half, via the certified radius "
           "[upper-bound]", "<=", upper)


def _suite_sandwich(st):
    cfg = st.cfg
    p1d = FracParams(dim=1, s=0.5, p=2.0)        # sp = N: conformal branch
    om1 = build_domain("interval:0,1", cfg.h)
    _sandwich_checks(st, "interval", om1, p1d, ("lambda", "cap", "conformal"),
                     solver_h=max(cfg.h, 1.0 / 64), r_max=2.0, stride=8,
                     max_centers=10)

    h2 = max(cfg.h, 1.0 / 24)
    p2d = FracParams(dim=2, s=0.5, p=2.0)        # sp < N: generic branch
    om2 = build_domain("rect:0,0,1,0.5", h2)
    _sandwich_checks(st, "rect", om2, p2d, ("lambda", "cap", "sobolev"),
                     solver_h=h2, r_max=1.5, stride=40, max_centers=6)

    mid = tuple(sz // 2 for sz in om2.box_shape)
    om3 = build_domain(f"punctured:rect:0,0,1,0.5;{mid[0]},{mid[1]}", h2)
    _sandwich_checks(st, "punctured-rect", om3, p2d,
                     ("lambda", "cap", "sobolev"), solver_h=h2, r_max=1.5,
                     stride=40, max_centers=6)

    def slab_trend():
        lams = [frequency(build_domain(f"interval:0,{L}", cfg.h), p1d,
                          near_band=cfg.near_band).value for L in (1.0, 2.0)]
        return lams[1], lams[0]
    st.add("frequency-vanishes-with-width", "frequency decreases as the slab "
           "length grows (finiteness direction probe) [embedding-ext]", "<=",
           slab_trend)


def _suite_asymptotics(st):
    cfg = st.cfg
    dom = build_domain("interval:0,1", cfg.h)
    # the s -> 1 limit localizes near the diagonal; refine the grid for it
    h_fine = min(cfg.h / 4, 1.0 / 256)
    dom_fine = build_domain("interval:0,1", h_fine)

    def small_s():
        vals = [s * frequency(dom, FracParams(dim=1, s=s, p=2.0),
                              near_band=cfg.near_band).value
                for s in (0.05, 0.1)]
        return _drift(vals), cfg.tol_plateau
    st.add("small-s-plateau", "s times the frequency stabilizes as s "
           "vanishes [asym2]", "plateau", small_s)

    def large_s():
        vals = [(1 - s) * frequency(
            dom_fine, FracParams(dim=1, s=s, p=2.0, allow_supercritical=True),
            near_band=cfg.near_band).value for s in (0.9, 0.95)]
        return _drift(vals), cfg.tol_plateau
    st.add("large-s-plateau", "(1-s) times the frequency stabilizes as s "
           "tends to 1 [asym-s-1]", "plateau", large_s)

    def bbm_ratio():
        loc = local_frequency(dom_fine, 2.0).value
        vals = [(1 - s) * frequency(
            dom_fine, FracParams(dim=1, s=s, p=2.0, allow_supercritical=True),
            near_band=cfg.near_band).value / loc for s in (0.9, 0.95)]
        if min(vals) <= 0:
            return math.inf, cfg.tol_plateau
        return _drift(vals), cfg.tol_plateau
    st.add("bbm-constant", "(1-s) frequency over the local frequency defines "
           "a positive plateau constant [asym-s-1]", "plateau", bbm_ratio)

    def positivity():
        # subcritical regime: s p < N
        vals = [s * (1 - s) * frequency(dom, FracParams(dim=1, s=s, p=2.0),
                                        near_band=cfg.near_band).value
                for s in (0.1, 0.2, 0.3, 0.45)]
        return -min(vals), 0.0
    st.add("positivity", "s(1-s) times the frequency stays positive across "
           "the subcritical s range [positivita-autovalori]", "<=", positivity)

    ball = build_ball_domain([0.0], 1.0, cfg.h)
    u_fixed = np.where(
        ball.active,
        np.cos(np.pi / 2 * np.clip(ball.centers()[:, 0], -1, 1)
               ).reshape(ball.box_shape) ** 2,
        0.0)

    def strip_small_s():
        vals = []
        for s in (0.05, 0.1):
            ps = FracParams(dim=1, s=s, p=2.0)
            k = assemble_kernel(ball, ps, near_band=cfg.near_band)
            vals.append(s * strip_seminorm_p(
                LatticeFunction(u_fixed, ball), ((0.0,), 0.8), k, ps).value)
        return _drift(vals), cfg.tol_plateau
    st.add("strip-small-s", "s times the one-sided energy of a fixed profile "
           "stabilizes [seminorma-asimmetrica]", "plateau", strip_small_s)

    ball_fine = build_ball_domain([0.0], 1.0, h_fine)
    u_fine = np.where(
        ball_fine.active,
        np.cos(np.pi / 2 * np.clip(ball_fine.centers()[:, 0], -1, 1)
               ).reshape(ball_fine.box_shape) ** 2,
        0.0)

    def strip_large_s():
        vals = []
        for s in (0.9, 0.95):
            ps = FracParams(dim=1, s=s, p=2.0, allow_supercritical=True)
            k = assemble_kernel(ball_fine, ps, near_band=cfg.near_band)
            vals.append((1 - s) * strip_seminorm_p(
                LatticeFunction(u_fine, ball_fine), ((0.0,), 0.8), k,
                ps).value)
        return _drift(vals), cfg.tol_plateau
    st.add("strip-large-s", "(1-s) times the one-sided energy of a fixed "
           "profile stabilizes [seminorma-asimmetrica]", "plateau",
           strip_large_s)

    ch = max(cfg.h, 1.0 / 64)

    def sigma_small_s():
        # the explicit constant chain reaches its 1/s regime only for quite
        # small s (its convergent factors carry a^s-type corrections)
        vals = []
        for s in (0.005, 0.01, 0.02):
            ps = FracParams(dim=1, s=s, p=2.0)
            ctx = build_context(ps, h=ch, near_band=cfg.near_band,
                                slots=("lambda", "cap"))
            vals.append(s * eval_constant("sigma", ctx))
        return _drift(vals), cfg.tol_plateau
    st.add("sigma-small-s", "s times the lower-bound constant stabilizes "
           "[lower-bound asymptotics]", "plateau", sigma_small_s)

    def cupper_gamma():
        ps = FracParams(dim=1, s=0.5, p=1.0)
        ctx = build_context(ps, h=ch, near_band=cfg.near_band, slots=("cap",))
        vals = [(1 - g) * eval_constant("C_upper", ctx, gamma=g)
                for g in (0.9, 0.95, 0.99)]
        return _drift(vals), cfg.tol_plateau
    st.add("cupper-gamma-plateau", "(1-gamma) times the upper-bound constant "
           "stabilizes as gamma tends to 1 [asym-C-upper-bound]", "plateau",
           cupper_gamma)

    def m_ratio_plateau():
        ps = FracParams(dim=1, s=0.5, p=2.0)
        ctx = build_context(ps, h=ch, near_band=cfg.near_band,
                            slots=("lambda",))
        vals = [t ** (ps.dim / ps.q) * eval_constant("M", ctx, ratio=t)
                for t in (40.0, 80.0, 160.0)]
        return _drift(vals), cfg.tol_plateau
    st.add("m-ratio-plateau", "(R/r)^(N/q) M stabilizes for wide radius "
           "ratios [mazya-poin2]", "plateau", m_ratio_plateau)


def _suite_slab(st):
    cfg = st.cfg
    h2 = max(cfg.h, 1.0 / 16)
    s = 0.25
    params = FracParams(dim=2, s=s, p=2.0)
    state = {}

    def setup():
        omega = build_domain("slab:8,1", h2)
        ctx = build_context(params, h=h2, near_band=cfg.near_band,
                            slots=("lambda", "cap", "local", "slab"))
        g0 = eval_constant("gamma0_slab", ctx)
        gamma = cfg.gamma_safety * g0 if 0 < g0 <= 1 else 0.25
        state["gamma0_slab"] = g0
        state["rhs"] = eval_constant("slab_rhs", ctx, gamma=gamma)
        scfg = SearchConfig(center_stride=60, r_max=3.5, solver_h=h2,
                            near_band=cfg.near_band, max_centers=3)
        state["res"] = capacitary_inradius(omega, params, gamma, scfg)

    def found_balls():
        setup()
        res = state["res"]
        balls = list(res.notes.get("found", []))
        if res.witness[0] is not None:
            balls.append(res.witness)
        worst = -1.0
        for (_, rad) in balls:
            if rad is None or rad <= 1.0:
                continue
            worst = max(worst, phi_slab(rad, 2) - state["rhs"])
        return worst, 0.0
    st.add("volume-bound", "every negligible ball wider than the slab obeys "
           "the volume-capacity bound [ex-finiteness-inr]", "<=", found_balls)

    def r_lower_bound():
        wn = unit_ball_volume(2)
        cap_val = min(state["rhs"], wn * (1 - 1e-9))
        bound = phi_slab_inv(cap_val, 2)
        return state["res"].r_lower, bound * (1.0 + cfg.tol_discrete_2d) + h2
    st.add("inradius-bound", "certified negligible radius stays below the "
           "profile-inverse bound [ex-finiteness-inr]", "<=", r_lower_bound)

    st.add("gamma0-positive", "the slab admissibility threshold is positive "
           "[ex-finiteness-inr]", "<=",
           lambda: (1e-12, state["gamma0_slab"]))


def _suite_capin_compare(st):
    cfg = st.cfg
    params = FracParams(dim=1, s=0.5, p=2.0)
    omega = build_domain("interval:0,1", cfg.h)
    solver_h = max(cfg.h, 1.0 / 64)
    ctx = build_context(params, h=solver_h,
                        near_band=cfg.near_band, slots=("cap", "local"))
    beta = eval_constant("beta", ctx)
    gamma = 0.5 * min(1.0, 1.0 / beta)
    scfg = SearchConfig(center_stride=8, r_max=2.0, solver_h=solver_h,
                        near_band=cfg.near_band, max_centers=8)

    state = {}

    def local_below():
        state["local"] = capacitary_inradius(omega, params, beta * gamma,
                                             scfg, local=True)
        state["nl"] = capacitary_inradius(omega, params, gamma, scfg)
        return state["local"].r_lower, state["nl"].r_upper
    st.add("local-below-nonlocal", "local capacitary inradius at beta*gamma "
           "stays below the nonlocal one [capin-vs-capin]", "<=", local_below)

    st.add("inradius-below", "plain inradius is a lower certificate "
           "[def-inradius remark]", "<=",
           lambda: (inradius(omega), state["nl"].r_lower + solver_h))


_SUITES = {
    "scaling": _suite_scaling,
    "monotonicity": _suite_monotonicity,
    "cap_identities": _suite_cap_identities,
    "cap_null": _suite_cap_null,
    "poincare": _suite_poincare,
    "mazya": _suite_mazya,
    "torsion": _suite_torsion,
    "sandwich": _suite_sandwich,
    "asymptotics": _suite_asymptotics,
    "slab": _suite_slab,
    "capin_compare": _suite_capin_compare,
}

_SUITE_IDS = {name: i for i, name in enumerate(sorted(_SUITES))}


def suite_names():
    return list(_SUITES)


def run_suite(name, config=None, seed=0):
    """Run one named suite (or 'all') and return a VerificationReport."""
    cfg = config or HarnessConfig()
    def run_one(nm):
        st = _Suite(nm, cfg, seed)
        try:
            _SUITES[nm](st)
        except Exception as exc:  # suites must not abort the run
            st.checks.append(Check(
                id=f"{nm}.setup", description="suite-level setup failed",
                lhs=None, rhs=None, relation="<=", slack=None, ok=False,
                note=f"{type(exc).__name__}: {exc}"))
        return st.checks

    if name == "all":
        checks = []
        for nm in _SUITES:
            checks.extend(run_one(nm))
    elif name in _SUITES:
        checks = run_one(name)
    else:
        raise ConfigError(
            f"unknown suite {name!r}; available: {', '.join(_SUITES)} or 'all'")
    env = {
        "config": cfg.to_dict(),
        "seed": seed,
        "version": __version__,
        "backend": _backend.BACKEND,
    }
    return VerificationReport(suite=name, checks=checks, environment=env)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

_SWEEP_PARAMS = ("s", "gamma", "h", "ratio")


def sweep(param, grid, target, config=None, seed=0):
    """Tabulate a named quantity along a parameter grid.

    ``target`` is ``lambda``, ``s_lambda``, ``om_s_lambda``, ``perimeter`` or
    ``const:<registry-name>``, optionally followed by ``;key=value`` entries
    (shape, s, p, q, dim, h, gamma, ratio ... as applicable).
    """
    cfg = config or HarnessConfig()
    if param not in _SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {_SWEEP_PARAMS}")
    head, *opts = target.split(";")
    base = {}
    for o in opts:
        if "=" not in o:
            raise ConfigError(f"bad target option {o!r}")
        k, _, v = o.partition("=")
        base[k.strip()] = v.strip()
    rows = []
    for g in [float(x) for x in grid]:
        row = {"param": param, "value": g}
        if head in ("lambda", "s_lambda", "om_s_lambda"):
            shape = base.get("shape", "interval:0,1")
            dim = int(base.get("dim", 1))
            h = g if param == "h" else float(base.get("h", cfg.h))
            s = g if param == "s" else float(base.get("s", 0.5))
            ps = FracParams(dim=dim, s=s, p=float(base.get("p", 2.0)),
                            q=float(base["q"]) if "q" in base else None,
                            allow_supercritical=True)
            dom = build_domain(shape, h)
            lam = frequency(dom, ps, near_band=cfg.near_band).value
            row["target"] = head
            row["result"] = {"lambda": lam, "s_lambda": s * lam,
                             "om_s_lambda": (1 - s) * lam}[head]
        elif head == "perimeter":
            shape = base.get("shape", "interval:-1,1")
            h = g if param == "h" else float(base.get("h", cfg.h))
            s = g if param == "s" else float(base.get("s", 0.5))
            dom = build_domain(shape, h)
            row["target"] = head
            row["result"] = frac_perimeter(dom, s, near_band=cfg.near_band)
        elif head.startswith("const:"):
            name = head.split(":", 1)[1]
            dim = int(base.get("dim", 1))
            s = g if param == "s" else float(base.get("s", 0.5))
            ps = FracParams(dim=dim, s=s, p=float(base.get("p", 2.0)),
                            q=float(base["q"]) if "q" in base else None)
            slots = _const_slots(name)
            ctx = build_context(ps, h=float(base.get("h", max(cfg.h, 1 / 64))),
                                near_band=cfg.near_band, slots=slots)
            args = {}
            for k in ("gamma", "ratio", "tau", "r", "y", "volume", "eps"):
                if k in base:
                    args[k] = float(base[k])
            if param == "gamma":
                args["gamma"] = g
            if param == "ratio":
                args["ratio"] = g
            row["target"] = name
            row["result"] = eval_constant(name, ctx, **args)
        else:
            raise ConfigError(f"unknown sweep target {head!r}")
        rows.append(row)
    return rows


def _const_slots(name):
    table = {
        "M": ("lambda",),
        "C_cap_balls": ("lambda",),
        "sigma": ("lambda", "cap"),
        "A_aux": ("cap",),
        "gamma0": ("cap", "sobolev", "conformal"),
        "eps0": ("cap", "sobolev", "conformal"),
        "C_upper": ("cap", "sobolev", "conformal"),
        "beta": ("cap", "local"),
        "c_subcrit": ("sobolev",),
        "gamma0_slab": ("local", "slab"),
        "slab_rhs": ("local", "slab"),
        "bbm_K": ("bbm",),
        "sobolev_S": ("sobolev",),
    }
    return table.get(name, ())
