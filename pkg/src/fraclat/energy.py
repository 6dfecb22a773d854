"""Discrete nonlocal functionals: seminorms, perimeter, Lq norms."""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .lattice import LatticeFunction, assemble_kernel
from .params import FracParams


class EnergyError(ValueError):
    pass


@dataclass(frozen=True)
class EnergyValue:
    """A nonlocal energy split into interior pair sum and exterior tail."""

    value: float
    interior: float
    tail: float

    def __float__(self):
        return self.value


def _check_match(u, kern):
    if u.domain.box_shape != kern.box_shape:
        raise EnergyError("function and kernel live on different boxes")
    if abs(u.domain.h - kern.h) > 1e-15 * max(u.domain.h, kern.h):
        raise EnergyError("function and kernel have different spacings")


def gagliardo_p(u, kern, params):
    """Discrete [u]^p over the whole space.

    Pair terms run over ordered box-cell pairs; the exterior is charged
    twice per cell (both orderings of a pair with one point outside the box),
    so the value matches the full double integral of a function supported in
    the box.
    """
    _check_match(u, kern)
    vals = u.values
    interior = _backend.pair_energy(vals, kern.stencil, params.p)
    if params.p == 1.0:
        tail = 2.0 * float(np.sum(kern.tail * np.abs(vals)))
    elif params.p == 2.0:
        tail = 2.0 * float(np.sum(kern.tail * vals * vals))
    else:
        tail = 2.0 * float(np.sum(kern.tail * np.abs(vals) ** params.p))
    return EnergyValue(interior + tail, interior, tail)


def gagliardo_grad(u, kern, params):
    """Energy and gradient of the discrete [u]^p (used by the solvers)."""
    _check_match(u, kern)
    vals = u.values
    interior, g = _backend.pair_energy_grad(vals, kern.stencil, params.p)
    p = params.p
    if p == 2.0:
        tail = 2.0 * float(np.sum(kern.tail * vals * vals))
        g = g + 4.0 * kern.tail * vals
    else:
        av = np.abs(vals)
        tail = 2.0 * float(np.sum(kern.tail * av ** p))
        g = g + 2.0 * p * kern.tail * np.sign(vals) * av ** (p - 1.0)
    return interior + tail, g


def strip_seminorm_p(u, ball, kern, params):
    """One-sided energy with the first variable confined to a ball.

    ``ball`` is ``(center, radius)``.  Pair terms are counted once, with the
    in-ball cell as the restricted variable; each in-ball cell also carries
    one exterior tail term.
    """
    _check_match(u, kern)
    center, radius = ball
    center = np.atleast_1d(np.asarray(center, dtype=float))
    pts = u.domain.centers()
    inside = (np.linalg.norm(pts - center, axis=1) < radius).reshape(
        u.domain.box_shape)
    if not inside.any():
        raise EnergyError("ball does not intersect the box")
    vals = u.values
    interior = _backend.strip_pair_energy(vals, kern.stencil, inside, params.p)
    tail = float(np.sum(kern.tail[inside] * np.abs(vals[inside]) ** params.p))
    return EnergyValue(interior + tail, interior, tail)


def frac_perimeter(dom, s, near_band=2, kern=None, mask=None):
    """Fractional perimeter of a lattice set: the W^{s,1} energy of its
    indicator, computed with the same kernel weights as function energies."""
    params = FracParams(dim=dom.dim, s=s, p=1.0)
    if kern is None:
        kern = assemble_kernel(dom, params, near_band=near_band)
    elif abs(kern.exponent - params.exponent) > 1e-12:
        raise EnergyError(
            f"kernel exponent {kern.exponent} does not match N+s = "
            f"{params.exponent}")
    m = dom.active if mask is None else np.asarray(mask, dtype=bool)
    if not m.any():
        return 0.0
    u = LatticeFunction(m.astype(float), dom)
    return gagliardo_p(u, kern, params).value


def set_cut_value(mask, kern):
    """2 sum_{i in A, j in box \\ A} w_ij + 2 sum_{i in A} tau_i.

    Equals the p=1 energy of the indicator of ``mask``; cheaper than the
    generic pair sum for indicator arguments.
    """
    m = np.asarray(mask, dtype=bool)
    if not m.any():
        return 0.0
    from .lattice import stencil_correlate

    mf = m.astype(float)
    inside_pairs = float(np.sum(mf * stencil_correlate(kern.stencil, mf)))
    rs = kern.row_sums()
    return 2.0 * (float(np.sum(rs[m])) - inside_pairs) + 2.0 * float(np.sum(kern.tail[m]))


def lq_norm(u, q, region=None):
    """(sum_region h^N |u_i|^q)^(1/q); region defaults to the active set."""
    dom = u.domain
    m = dom.active if region is None else np.asarray(region, dtype=bool)
    if not m.any():
        raise EnergyError("empty region")
    hN = dom.h ** dom.dim
    return float((hN * np.sum(np.abs(u.values[m]) ** q)) ** (1.0 / q))


def average(u, region=None):
    """Mean of u over a cell region (defaults to the active set)."""
    dom = u.domain
    m = dom.active if region is None else np.asarray(region, dtype=bool)
    cnt = int(m.sum())
    if cnt == 0:
        raise EnergyError("empty region")
    return float(np.sum(u.values[m]) / cnt)
