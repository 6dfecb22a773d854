import math

import pytest

from fraclat import (
    ConstantContext,
    ConstantError,
    FracParams,
    asymptotic_probe,
    build_context,
    eval_constant,
    registry_names,
)
from fraclat.constants import MissingSlotError, phi_slab, phi_slab_inv


def ctx_for(dim=1, s=0.5, p=2.0, q=None, **slots):
    ctx = ConstantContext(params=FracParams(dim=dim, s=s, p=p, q=q,
                                            allow_supercritical=True))
    for k, v in slots.items():
        setattr(ctx, k, v)
    return ctx


def test_c_holder_hand_value():
    # N=1, p=2: 2^2 * 1 * 2 / 2 = 4
    assert eval_constant("c_holder", ctx_for()) == pytest.approx(4.0)


def test_E_hand_value():
    # N=1, p=2, ratio 2: 4 * (2 + 1 * 2) = 16
    assert eval_constant("E", ctx_for(), ratio=2.0) == pytest.approx(16.0)


def test_E_domain_error():
    with pytest.raises(ConstantError):
        eval_constant("E", ctx_for(), ratio=1.0)


def test_W_domain_error():
    with pytest.raises(ConstantError):
        eval_constant("W", ctx_for(dim=2, s=0.4), ratio=1.2)  # <= sqrt(2)


def test_phi_slab_hand_value():
    # N=1, r=2: 2*(1 - 1/2) = 1
    assert eval_constant("phi_slab", ctx_for(), r=2.0) == pytest.approx(1.0)


def test_phi_slab_range_and_inverse():
    for dim, wn in ((1, 2.0), (2, math.pi)):
        assert phi_slab(1.0 + 1e-9, dim) < 1e-3
        assert phi_slab(1e6, dim) == pytest.approx(wn, rel=1e-5)
        for y in (0.1, 0.5 * wn, 0.9 * wn):
            r = phi_slab_inv(y, dim)
            assert phi_slab(r, dim) == pytest.approx(y, rel=1e-10)
    with pytest.raises(ConstantError):
        phi_slab(0.9, 1)
    with pytest.raises(ConstantError):
        phi_slab_inv(5.0, 1)


def test_gamma0_is_one_for_p1():
    ctx = ctx_for(p=1.0)
    assert eval_constant("gamma0", ctx) == 1.0


def test_eps0_p1_branch_identity():
    # the defining identity: 1 - gamma/(1-2 eps0)^(N-s) = (1-gamma)/2
    ctx = ctx_for(p=1.0, s=0.3)
    for gamma in (0.1, 0.5, 0.9):
        eps0 = eval_constant("eps0", ctx, gamma=gamma)
        n, s = 1, 0.3
        lhs = 1.0 - gamma / (1.0 - 2.0 * eps0) ** (n - s)
        assert lhs == pytest.approx((1.0 - gamma) / 2.0, rel=1e-12)


def test_eps0_vanishes_at_gamma0():
    ctx = ctx_for(s=0.4, sobolev_S=1.3, ref_cap_ball=5.0)
    g0 = eval_constant("gamma0", ctx)
    eps = eval_constant("eps0", ctx, gamma=g0 * (1 - 1e-9))
    assert 0 < eps < 1e-8
    with pytest.raises(ConstantError):
        eval_constant("eps0", ctx, gamma=g0 * 1.01)


def test_C_cap_balls_monotone_in_tau():
    ctx = ctx_for(ref_lambda_ball_pp=12.0)
    taus = [1.0, 2.0, 4.0, 10.0]
    vals = [eval_constant("C_cap_balls", ctx, tau=t) for t in taus]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_registry_deterministic():
    ctx = ctx_for(ref_lambda_ball=10.0)
    a = eval_constant("M", ctx, ratio=3.0)
    b = eval_constant("M", ctx, ratio=3.0)
    assert a == b


def test_unknown_name_rejected():
    with pytest.raises(ConstantError):
        eval_constant("nope", ctx_for())


def test_missing_slot_reported():
    with pytest.raises(MissingSlotError):
        eval_constant("M", ctx_for(), ratio=2.0)
    with pytest.raises(MissingSlotError):
        eval_constant("beta", ctx_for())


def test_registry_names_cover_cli_contract():
    names = registry_names()
    for required in ("c_holder", "E", "W", "M", "C_cap_balls", "sigma",
                     "A_aux", "gamma0", "eps0", "C_upper", "beta",
                     "c_subcrit", "phi_slab", "phi_slab_inv", "gamma0_slab"):
        assert required in names


def test_sigma_and_bounds_positive_with_numeric_slots():
    params = FracParams(dim=1, s=0.5, p=2.0)
    ctx = build_context(params, h=1 / 32, slots=("lambda", "cap", "conformal"))
    sg = eval_constant("sigma", ctx)
    g0 = eval_constant("gamma0", ctx)
    C = eval_constant("C_upper", ctx, gamma=0.25 * g0)
    assert sg > 0 and 0 < g0 <= 1 and C > 0
    # the two-sided constants must bracket sensibly: sigma << C
    assert sg < C


def test_conformal_branch_selected_at_sp_equal_n():
    # N=1, s=0.5, p=2: sp = N exactly; gamma0 must consume the conformal slot
    ctx = ctx_for(ref_cap_ball=5.0)
    with pytest.raises(MissingSlotError):
        eval_constant("gamma0", ctx)
    ctx.ref_lambda_conformal = 4.0
    g0 = eval_constant("gamma0", ctx)
    assert 0 < g0 <= 1


def test_A_aux_eps_domain():
    ctx = ctx_for(ref_cap_ball=5.0)
    with pytest.raises(ConstantError):
        eval_constant("A_aux", ctx, gamma=0.2, eps=0.7)


def test_c_subcrit_requires_subcritical():
    ctx = ctx_for(s=0.5, sobolev_S=2.0)  # sp = N
    with pytest.raises(ConstantError):
        eval_constant("c_subcrit", ctx, volume=1.0)
    ctx2 = ctx_for(s=0.3, sobolev_S=2.0)
    assert eval_constant("c_subcrit", ctx2, volume=1.0) > 0


def test_asymptotic_probe_fits_powers():
    ctx = ctx_for(ref_lambda_ball=10.0)
    # M ~ ratio^(-N/q) for large ratios
    rep = asymptotic_probe("M", lambda g: ctx, "ratio", [40.0, 80.0, 160.0],
                           expected_exponent=-0.5)
    assert rep.ok and abs(rep.fitted_exponent + 0.5) <= 0.15
    with pytest.raises(ConstantError):
        asymptotic_probe("M", lambda g: ctx, "ratio", [1.5, 2.0],
                         expected_exponent=-0.5)
    with pytest.raises(ConstantError):
        asymptotic_probe("M", lambda g: ctx, "bogus", [1.0, 2.0, 3.0],
                         expected_exponent=-0.5)


def test_build_context_caches():
    params = FracParams(dim=1, s=0.5, p=2.0)
    c1 = build_context(params, h=1 / 32, slots=("lambda",))
    c2 = build_context(params, h=1 / 32, slots=("lambda",))
    assert c1.ref_lambda_ball == c2.ref_lambda_ball
