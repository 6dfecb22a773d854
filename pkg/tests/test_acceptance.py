"""Acceptance criteria, one test per criterion, each printing a PASS line.

Every tolerance below is fixed here; nothing is deferred to configuration.
Budgets are wall-clock seconds and are asserted.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from fraclat import (
    FracParams,
    HarnessConfig,
    LatticeDomain,
    LatticeFunction,
    SearchConfig,
    assemble_kernel,
    build_ball_domain,
    build_domain,
    capacitary_inradius,
    capacity,
    cheeger,
    eval_constant,
    build_context,
    frac_perimeter,
    frequency,
    gagliardo_p,
    local_capacity,
    local_frequency,
    lq_norm,
    run_suite,
    strip_seminorm_p,
    torsion,
    torsion_identity_gap,
)
from fraclat.constants import c_holder, phi_slab, phi_slab_inv
from fraclat.harness import random_bump
from fraclat.params import unit_ball_volume


def report(cid, ok, detail=""):
    print(f"[acceptance] {cid}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{cid} failed: {detail}"


def ball_mask(dom, center, r, closed=True):
    pts = dom.centers()
    d = np.linalg.norm(pts - np.atleast_1d(center), axis=1)
    return (d <= r if closed else d < r).reshape(dom.box_shape)


def test_c1_analytic_perimeter_oracle():
    results = []
    for s in (0.25, 0.5, 0.75):
        t0 = time.perf_counter()
        dom = build_domain("interval:-1,1", 1 / 256)
        got = frac_perimeter(dom, s)
        dt = time.perf_counter() - t0
        exact = 4 * 2 ** (1 - s) / (s * (1 - s))
        rel = abs(got - exact) / exact
        results.append((s, rel, dt))
        assert rel < 0.01, f"s={s}: rel={rel}"
        assert dt < 5.0, f"s={s}: {dt:.1f}s"
    report("C1 analytic-perimeter", True,
           " ".join(f"s={s}:rel={r:.1e},{t:.2f}s" for s, r, t in results))


def test_c2_scaling_exactness():
    t0 = time.perf_counter()
    worst = 0.0
    for dim, shape in ((1, "interval:0,1"), (2, "rect:0,0,1,1")):
        h = 1 / 64 if dim == 1 else 1 / 12
        for s in (0.3, 0.5):
            params = FracParams(dim=dim, s=s, p=2.0)
            dom = build_domain(shape, h)
            r = 2.0
            dom_r = LatticeDomain(dom.h * r, dom.origin * r, dom.active.copy())
            l1 = frequency(dom, params).value
            l2 = frequency(dom_r, params).value
            worst = max(worst, abs(l2 - l1 * r ** (-2 * s)) / abs(l2))
            env = build_domain(shape, h)
            sig = ball_mask(env, env.origin + 0.5 * (np.asarray(env.box_shape)
                                                     * env.h), 0.3)
            c1 = capacity(sig, env, params).value
            env_r = LatticeDomain(env.h * r, env.origin * r, env.active.copy())
            c2 = capacity(sig, env_r, params).value
            worst = max(worst, abs(c2 - c1 * r ** (dim - 2 * s)) / abs(c2))
    dt = time.perf_counter() - t0
    assert worst <= 1e-10, f"worst relative deviation {worst}"
    assert dt < 10.0
    report("C2 scaling-exactness", True, f"worst={worst:.2e} {dt:.1f}s")


def test_c3_capacity_equals_perimeter_convex():
    # N = 1 at h = 1/256, 3%
    t0 = time.perf_counter()
    p1 = FracParams(dim=1, s=0.5, p=1.0)
    env = build_domain("interval:-1,1", 1 / 256)
    kern = assemble_kernel(env, p1)
    sig = ball_mask(env, 0.0, 0.5)
    cap1 = capacity(sig, env, p1, kern=kern).value
    per1 = frac_perimeter(env, 0.5, kern=kern, mask=sig)
    rel1 = abs(cap1 - per1) / per1
    dt1 = time.perf_counter() - t0
    assert rel1 < 0.03 and dt1 < 60.0

    # N = 2 at h = 1/64, 5%
    t0 = time.perf_counter()
    p2 = FracParams(dim=2, s=0.5, p=1.0)
    env2 = build_domain("ball:0,0,1", 1 / 64)
    kern2 = assemble_kernel(env2, p2)
    sig2 = ball_mask(env2, [0.0, 0.0], 0.5)
    cap2 = capacity(sig2, env2, p2, kern=kern2).value
    per2 = frac_perimeter(env2, 0.5, kern=kern2, mask=sig2)
    rel2 = abs(cap2 - per2) / per2
    dt2 = time.perf_counter() - t0
    assert rel2 < 0.05 and dt2 < 60.0
    report("C3 capacity-vs-perimeter", True,
           f"1D rel={rel1:.1e} ({dt1:.1f}s), 2D rel={rel2:.1e} ({dt2:.1f}s)")


def test_c4_cheeger_sharpness():
    t0 = time.perf_counter()
    s, r = 0.5, 1.0
    om = build_domain("interval:-2,2", 1 / 256)
    e = ball_mask(om, 0.0, r, closed=False)
    res = cheeger(e, om, s)
    exact = 4 * (2 * r) ** (1 - s) / (s * (1 - s)) / (2 * r)
    rel = abs(res.value - exact) / exact
    # the extracted optimal set is the concentric ball up to one cell layer
    got = res.info["level_set"]
    pts = om.centers()[:, 0]
    inner = (np.abs(pts) < r - om.h).reshape(om.box_shape)
    outer = (np.abs(pts) < r + om.h).reshape(om.box_shape)
    layer_ok = not np.any(got & ~outer) and not np.any(inner & ~got)
    dt = time.perf_counter() - t0
    assert rel < 0.03 and layer_ok and dt < 60.0
    report("C4 cheeger-sharpness", True,
           f"rel={rel:.1e} set-within-one-layer={layer_ok} {dt:.1f}s")


def test_c5_torsion_identities():
    t0 = time.perf_counter()
    p2 = FracParams(dim=1, s=0.5, p=2.0)
    res2 = torsion(0.5, 1.0, p2, h=1 / 128)
    gap2, _, _ = torsion_identity_gap(res2, p2)
    assert gap2 < 1e-8

    p15 = FracParams(dim=1, s=0.4, p=1.5)
    res15 = torsion(0.5, 1.0, p15, h=1 / 128)
    gap15, _, _ = torsion_identity_gap(res15, p15)
    assert gap15 < 1e-3

    # volume-Sobolev energy bound with the one-sided constant, same grid
    kern = res15.info["kern"]
    dom = res15.minimizer.domain
    en = gagliardo_p(res15.minimizer, kern, p15).value
    crit = p15.with_(q=p15.p_star)
    S_hat = 1.0 / frequency(dom, crit).value
    vol_r = dom.measure(res15.info["rhs_ball"])
    p = p15.p
    bound = (vol_r ** (p15.sp / p15.dim - 1 + p) * S_hat) ** (1 / (p * (p - 1)))
    ok_bound = en ** (1 / p) <= bound * (1 + 1e-6)
    dt = time.perf_counter() - t0
    assert ok_bound and dt < 60.0
    report("C5 torsion-identities", True,
           f"gap(p=2)={gap2:.1e} gap(p=1.5)={gap15:.1e} "
           f"energy<=bound:{en**(1/p):.4f}<={bound:.4f} {dt:.1f}s")


def test_c6_inequality_corpus_200():
    t0 = time.perf_counter()
    h = 1 / 64
    n_cfg = 200
    s_grid = (0.3, 0.5, 0.7)
    violations = {k: 0 for k in ("cap-vol", "cap-cap", "balls", "mazya",
                                 "poin-sob", "truncation")}

    # shared resources per s
    res_by_s = {}
    for s in s_grid:
        params = FracParams(dim=1, s=s, p=2.0, allow_supercritical=True)
        env = build_ball_domain([0.0], 2.0, h)
        kern = assemble_kernel(env, params)
        ctx = build_context(params, h=h, slots=("lambda",))
        M = eval_constant("M", ctx, ratio=2.0)
        res_by_s[s] = (params, env, kern, ctx, M)

    rng = np.random.default_rng(2026)
    for i in range(n_cfg):
        s = s_grid[i % 3]
        params, env, kern, ctx, M = res_by_s[s]
        pts = env.centers()[:, 0]

        # cap-vol and cap-cap on a random compact interval in a random env
        a, b = sorted(rng.uniform(-1.4, 1.4, 2))
        b = max(b, a + 6 * h)
        sig = ((pts >= a) & (pts <= b)).reshape(env.box_shape)
        cap_nl = capacity(sig, env, params, kern=kern).value
        lam_nl = frequency(env, params, kern=kern).value
        if env.measure(sig) * lam_nl > cap_nl * (1 + 1e-10):
            violations["cap-vol"] += 1
        lam_loc = local_frequency(env, 2.0).value
        cap_loc = local_capacity(sig, env, 2.0).value
        rhs = (c_holder(params) / (s * (1 - s)) * lam_loc ** (s - 1) * cap_loc)
        if cap_nl > rhs * (1 + 1e-10):
            violations["cap-cap"] += 1

        # capacity with respect to balls: sandwich with the explicit constant
        inner_r = rng.uniform(0.6, 1.0)
        small = build_ball_domain([0.0], inner_r, h)
        sig_r = rng.uniform(0.25, inner_r - 0.25)
        sg_small = ball_mask(small, 0.0, sig_r)
        sg_big = ball_mask(env, 0.0, sig_r)
        c_small = capacity(sg_small, small, params).value
        c_big = capacity(sg_big, env, params, kern=kern).value
        if c_big > c_small * (1 + 1e-10):
            violations["balls"] += 1
        tau = 2.0 / (inner_r - sig_r)
        C = eval_constant("C_cap_balls", ctx, tau=tau)
        if c_small > C * c_big * (1 + 1e-10):
            violations["balls"] += 1

        # Lq variant of the capacitary lower bound on random bumps
        u = random_bump(env, rng)
        u_m = u.copy()
        u_m[sig] = 0.0
        fn = LatticeFunction(u_m, env)
        cap_for_m = capacity(sig, env, params, kern=kern).value
        lhs = (M * cap_for_m ** 0.5 * lq_norm(fn, 2.0, ball_mask(env, 0.0, 1.0)))
        rhs = strip_seminorm_p(fn, ((0.0,), 2.0), kern, params).value ** 0.5
        if lhs > rhs * (1 + 1e-10):
            violations["mazya"] += 1

        # Poincare-Sobolev on the unit ball with the explicit constant
        q = 2.5
        ps_q = FracParams(dim=1, s=s, p=2.0, q=q, allow_supercritical=True)
        ctx_q = build_context(ps_q, h=h, slots=("lambda",))
        v = np.where(ball_mask(env, 0.0, 1.0, closed=False), u, 0.0)
        fnv = LatticeFunction(v, env)
        lhs = lq_norm(fnv, q, ball_mask(env, 0.0, 1.0)) ** 2
        rhs = (2.0 * 1.0 ** ps_q.freq_scaling_power / ctx_q.ref_lambda_ball
               * strip_seminorm_p(fnv, ((0.0,), 1.0), kern, ps_q).value)
        if lhs > rhs * (1 + 1e-10):
            violations["poin-sob"] += 1

        # truncation monotonicity
        e_raw = gagliardo_p(LatticeFunction(u, env), kern, params).value
        e_cut = gagliardo_p(LatticeFunction(np.clip(u, 0, 1), env), kern,
                            params).value
        if e_cut > e_raw * (1 + 1e-12):
            violations["truncation"] += 1

    dt = time.perf_counter() - t0
    total = sum(violations.values())
    assert total == 0, violations
    assert dt < 300.0
    report("C6 inequality-corpus", True,
           f"{n_cfg} configs x 6 families, zero violations, {dt:.0f}s")


def test_c7_main_theorem_sandwich():
    t0 = time.perf_counter()
    rep = run_suite("sandwich", HarnessConfig(), seed=7)
    dt = time.perf_counter() - t0
    chain = [c for c in rep.checks if c.id.endswith(("-lower", "-upper"))]
    bad = [c.id for c in chain if not c.ok]
    assert len(chain) == 6 and not bad, bad
    assert dt < 300.0
    report("C7 main-theorem-sandwich", True,
           f"3 domains, both bounds, zero violations, {dt:.0f}s")


def test_c8_asymptotics():
    t0 = time.perf_counter()
    h_small = 1 / 128
    h_fine = 1 / 512
    dom_s = build_domain("interval:0,1", h_small)
    dom_f = build_domain("interval:0,1", h_fine)
    low = [s * frequency(dom_s, FracParams(dim=1, s=s, p=2.0)).value
           for s in (0.05, 0.1)]
    drift_low = (max(low) - min(low)) / abs(np.mean(low))
    high = [(1 - s) * frequency(
        dom_f, FracParams(dim=1, s=s, p=2.0, allow_supercritical=True)).value
        for s in (0.9, 0.95)]
    drift_high = (max(high) - min(high)) / abs(np.mean(high))
    K_hat = [v / np.pi ** 2 for v in high]
    dt = time.perf_counter() - t0
    assert drift_low <= 0.15 and drift_high <= 0.15
    assert min(K_hat) > 0
    drift_K = (max(K_hat) - min(K_hat)) / abs(np.mean(K_hat))
    assert drift_K <= 0.15
    assert dt < 300.0
    report("C8 asymptotics", True,
           f"s->0 drift={drift_low:.3f}, s->1 drift={drift_high:.3f}, "
           f"K_hat~{np.mean(K_hat):.3f} {dt:.0f}s")


def test_c9_slab_example():
    t0 = time.perf_counter()
    h = 1 / 16
    s = 0.25
    params = FracParams(dim=2, s=s, p=2.0)
    omega = build_domain("slab:8,1", h)
    ctx = build_context(params, h=h, slots=("lambda", "cap", "local", "slab"))
    gamma0_slab = eval_constant("gamma0_slab", ctx)
    assert 0 < gamma0_slab <= 1
    gamma = 0.5 * gamma0_slab
    rhs = eval_constant("slab_rhs", ctx, gamma=gamma)
    cfg = SearchConfig(center_stride=60, r_max=3.5, solver_h=h, max_centers=3)
    res = capacitary_inradius(omega, params, gamma, cfg)
    balls = list(res.notes["found"])
    if res.witness[0] is not None:
        balls.append(res.witness)
    wide = [(c, r) for c, r in balls if r > 1.0]
    for _, r in wide:
        assert phi_slab(r, 2) <= rhs, (r, phi_slab(r, 2), rhs)
    wn = unit_ball_volume(2)
    bound = phi_slab_inv(min(rhs, wn * (1 - 1e-9)), 2)
    assert res.r_lower <= bound * 1.05 + h
    dt = time.perf_counter() - t0
    assert dt < 300.0
    report("C9 slab-example", True,
           f"{len(wide)} wide negligible balls within the volume bound, "
           f"r_lower={res.r_lower:.3f} <= {bound:.3f}, {dt:.0f}s")


@pytest.mark.slow
def test_c10_determinism_byte_identical(tmp_path):
    outs = []
    for k in (1, 2):
        out = tmp_path / f"rep{k}.json"
        r = subprocess.run(
            [sys.executable, "-m", "fraclat.cli", "verify", "--suite", "all",
             "--seed", "7", "--out", str(out)],
            capture_output=True, text=True)
        assert r.returncode in (0, 1), r.stderr[-500:]
        outs.append(out.read_bytes())
    identical = outs[0] == outs[1]
    data = json.loads(outs[0])
    assert identical
    assert data["pass"] is True, [c["id"] for c in data["checks"]
                                  if not c["pass"]]
    report("C10 determinism", True,
           f"byte-identical reports, {len(data['checks'])} checks all pass")
