"""Inradius, negligibility of ball portions, and the capacitary inradius.

The capacitary inradius is a supremum over all balls; on a lattice it is
bracketed by sampling ball centers and bisecting radii over a shared radius
grid.  The lower end of the bracket is a certificate (a concrete negligible
ball, re-checkable); the upper end assumes that per-center negligibility is
monotone in the radius, which is a search heuristic, not a guarantee, and is
labeled as such in every result.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .lattice import assemble_kernel, build_ball_domain
from .solvers import SolverError, capacity, local_capacity


@dataclass
class SearchConfig:
    """Sampling budget for the capacitary-inradius search."""

    center_stride: int = 2           # stride over distance-ranked active cells
    include_midpoints: bool = False  # also try cell-corner midpoints
    r_max: float = None              # radius cap; default 1.5 * box diagonal
    r_tol: float = None              # radius grid step; default h / 2
    solver_h: float = None           # lattice spacing for capacity solves
    near_band: int = 2
    max_centers: int = 200


@dataclass
class InradiusResult:
    r_lower: float
    r_upper: float
    witness: tuple            # (center, radius) of the best negligible ball
    samples: int
    heuristic_upper: bool = True
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.r_lower > self.r_upper + 1e-12:
            raise ValueError("certificate exceeds the heuristic upper bound")


def inradius(omega):
    """Largest distance from an active cell center to the inactive set."""
    omega.require_nonempty()
    dist = ndimage.distance_transform_edt(omega.active, sampling=omega.h)
    return float(dist.max())


def _removed_mask(center, r, omega, env):
    pts = env.centers()
    dist = np.linalg.norm(pts - center, axis=1)
    in_closed = (dist <= r * (1.0 + 1e-12)).reshape(env.box_shape)
    removed = in_closed & ~omega.contains_points(pts).reshape(env.box_shape)
    return in_closed, removed


def negligible(ball, omega, params, gamma, h=None, near_band=2, local=False,
               rhs_cache=None, kern_cache=None):
    """Compare the relative capacity of (closed ball minus omega) in the
    doubled ball against gamma times the full ball's capacity.

    Returns ``(flag, lhs, rhs)`` where rhs is already scaled by gamma.  The
    grid for the capacity solves is centered at the ball center, so both the
    kernel weights and the rhs depend only on the radius and are cached
    across centers.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0,1), got {gamma}")
    center, r = ball
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if h is None:
        h = omega.h
    if r < 3 * h:
        raise SolverError(f"ball radius {r} is under-resolved at h={h}")
    env = build_ball_domain(center, 2.0 * r, h, pad=2)
    in_closed, removed = _removed_mask(center, r, omega, env)
    key = (float(r), float(h), bool(local))
    if local:
        solve = lambda sg, ev: local_capacity(sg, ev, params.p)
    else:
        if kern_cache is not None and key[:2] in kern_cache:
            kern = kern_cache[key[:2]]
        else:
            kern = assemble_kernel(env, params, near_band=near_band)
            if kern_cache is not None:
                kern_cache[key[:2]] = kern
        solve = lambda sg, ev: capacity(sg, ev, params, kern=kern,
                                        near_band=near_band)
    if rhs_cache is not None and key in rhs_cache:
        cap_ball = rhs_cache[key]
    else:
        cap_ball = solve(in_closed, env).value
        if rhs_cache is not None:
            rhs_cache[key] = cap_ball
    lhs = 0.0 if not removed.any() else solve(removed, env).value
    rhs = gamma * cap_ball
    flag = lhs <= rhs * (1.0 + 1e-9) + 1e-14
    return flag, lhs, rhs


def capacitary_inradius(omega, params, gamma, search_cfg=None, local=False):
    """Bracket the gamma-capacitary inradius of a lattice domain.

    ``r_lower`` is the largest verified negligible radius over the sampled
    centers (every ball strictly inside omega counts without solving, since
    its removed portion is empty); ``r_upper`` is the largest radius not yet
    excluded for some sampled center under the monotone-failure heuristic.
    """
    cfg = search_cfg or SearchConfig()
    omega.require_nonempty()
    h = cfg.solver_h or omega.h
    r_tol = cfg.r_tol if cfg.r_tol is not None else h / 2
    lo_box, hi_box = omega.box_bounds()
    diag = float(np.linalg.norm(hi_box - lo_box))
    r_max = cfg.r_max if cfg.r_max is not None else 1.5 * diag
    r_min = 3 * h
    if r_max <= r_min:
        raise SolverError("r_max too small for the solver resolution")
    # shared radius grid: index 0 -> r_min, index K -> r_max
    K = int(np.ceil((r_max - r_min) / r_tol))
    radii = r_min + (r_max - r_min) * np.arange(K + 1) / K

    dist = ndimage.distance_transform_edt(omega.active, sampling=omega.h)
    centers_all = omega.active_centers()
    dists_all = dist[omega.active]
    order = np.argsort(-dists_all, kind="stable")
    stride = max(1, int(cfg.center_stride))
    picked = order[::stride][: cfg.max_centers]
    centers = [tuple(centers_all[i]) for i in picked]
    inscribed = [float(dists_all[i]) for i in picked]
    if cfg.include_midpoints:
        for i in picked:
            centers.append(tuple(centers_all[i] + omega.h / 2))
            inscribed.append(0.0)

    rhs_cache = {}
    kern_cache = {}
    samples = 0
    best_r, best_c = 0.0, None
    fail_sup = 0.0
    exhausted = False
    found = []

    def is_neg(c, k):
        nonlocal samples
        samples += 1
        flag, _, _ = negligible((np.asarray(c), radii[k]), omega, params, gamma,
                                h=h, near_band=cfg.near_band, local=local,
                                rhs_cache=rhs_cache, kern_cache=kern_cache)
        if flag:
            found.append((tuple(float(v) for v in np.atleast_1d(c)),
                          float(radii[k])))
        return flag

    for c, r_ins in zip(centers, inscribed):
        # trivial certificate: a ball strictly inside omega is negligible
        triv = max(0.0, r_ins - 1e-9 * h)
        if triv > best_r:
            best_r, best_c = triv, c
        if is_neg(c, K):
            if radii[K] > best_r:
                best_r, best_c = radii[K], c
            fail_sup = max(fail_sup, r_max)
            exhausted = True
            continue
        # bisect the shared grid assuming failure is monotone in the radius
        lo_k, hi_k = -1, K            # lo_k: last known-negligible index
        start = int(np.searchsorted(radii, triv))
        if start > 0 and start <= K and is_neg(c, start - 1):
            lo_k = start - 1
        while hi_k - lo_k > 1:
            mid = (lo_k + hi_k) // 2
            if mid <= lo_k:
                break
            if is_neg(c, mid):
                lo_k = mid
            else:
                hi_k = mid
        if lo_k >= 0 and radii[lo_k] > best_r:
            best_r, best_c = radii[lo_k], c
        fail_sup = max(fail_sup, radii[hi_k], triv)

    r_lower = best_r
    r_upper = max(fail_sup, r_lower)
    witness = (best_c, best_r) if best_c is not None else (None, 0.0)
    notes = {"r_max": r_max, "h": h, "gamma": gamma, "r_tol": r_tol,
             "exhausted_cap": exhausted, "found": found}
    return InradiusResult(r_lower=r_lower, r_upper=r_upper, witness=witness,
                          samples=samples, heuristic_upper=True, notes=notes)
