"""Variational solvers: capacity, principal frequency, torsion, Cheeger.

All problems minimize the discrete nonlocal energy (or its local
nearest-neighbor counterpart) over a constrained set of lattice functions.
The p = 2 cases reduce to symmetric linear algebra and are solved directly
(dense Cholesky / eigendecomposition on small boxes, preconditioned CG /
LOBPCG with FFT-applied pair operators on large ones).  General exponents
run a projected descent with backtracking; p = 1 adds smoothing of |t| by
sqrt(t^2 + eps^2) with an annealed eps and a final exact search over level
sets, which is where the minimizer of a p = 1 problem lives.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse.linalg import LinearOperator, cg, eigsh, lobpcg

from . import _backend
from .energy import gagliardo_grad, gagliardo_p, lq_norm, set_cut_value
from .lattice import (
    LatticeFunction,
    assemble_kernel,
    build_ball_domain,
    stencil_correlate,
)
from .params import FracParams

DENSE_LIMIT = 3200


class SolverError(RuntimeError):
    pass


@dataclass
class MinimizeResult:
    value: float
    minimizer: LatticeFunction
    iterations: int
    residual: float
    converged: bool
    info: dict = field(default_factory=dict)

    def require_converged(self, what="solve"):
        if not self.converged:
            raise SolverError(
                f"{what} did not converge (iterations={self.iterations}, "
                f"residual={self.residual:.3e})"
            )
        return self


# ---------------------------------------------------------------------------
# p = 2 linear algebra
# ---------------------------------------------------------------------------

def _apply_quadratic(kern, u):
    """Matrix of the p=2 energy: (L u) = 2 (R + tau) u - 2 W u."""
    return 2.0 * (kern.row_sums() + kern.tail) * u - 2.0 * stencil_correlate(
        kern.stencil, u)


def _cg(A, b, rtol, maxiter, M, callback):
    try:
        return cg(A, b, rtol=rtol, atol=0.0, maxiter=maxiter, M=M,
                  callback=callback)
    except TypeError:  # scipy < 1.12 spelling
        return cg(A, b, tol=rtol, atol=0.0, maxiter=maxiter, M=M,
                  callback=callback)


def _dense_matrix(kern, idx_flat):
    """Dense restriction of L to the given flat cell indices."""
    shape = kern.box_shape
    dim = len(shape)
    ij = np.unravel_index(idx_flat, shape)
    center = np.asarray(shape, dtype=int) - 1
    off = tuple(ij[k][:, None] - ij[k][None, :] + center[k] for k in range(dim))
    W = kern.stencil[off]
    diag = 2.0 * (kern.row_sums() + kern.tail).ravel()[idx_flat]
    L = -2.0 * W
    L[np.diag_indices_from(L)] = diag
    return L


def _solve_constrained_quadratic(kern, fixed_mask, fixed_values, free_mask, rhs=None,
                                 tol=1e-12, maxiter=20000):
    """Minimize u^T L u - 2 rhs^T u over u with the fixed entries pinned.

    Returns the full box array and (iterations, residual, converged).
    """
    shape = kern.box_shape
    free_flat = np.flatnonzero(free_mask.ravel())
    base = np.zeros(shape)
    base[fixed_mask] = fixed_values[fixed_mask] if isinstance(
        fixed_values, np.ndarray) else fixed_values
    b_full = -_apply_quadratic(kern, base)
    if rhs is not None:
        b_full = b_full + rhs
    b = b_full.ravel()[free_flat]
    if free_flat.size == 0:
        return base, (0, 0.0, True)
    if free_flat.size <= DENSE_LIMIT:
        L = _dense_matrix(kern, free_flat)
        x = np.linalg.solve(L, b)
        res = float(np.linalg.norm(L @ x - b) / max(np.linalg.norm(b), 1e-300))
        out = base.copy()
        out.ravel()[free_flat] = x
        return out, (1, res, res <= 1e-8)

    def matvec(x):
        u = np.zeros(shape)
        u.ravel()[free_flat] = np.asarray(x).reshape(-1)
        return _apply_quadratic(kern, u).ravel()[free_flat]

    A = LinearOperator((free_flat.size, free_flat.size), matvec=matvec)
    dinv = 1.0 / (2.0 * (kern.row_sums() + kern.tail).ravel()[free_flat])
    M = LinearOperator(A.shape, matvec=lambda x: dinv * np.asarray(x).reshape(-1))
    iters = [0]

    def cb(_):
        iters[0] += 1

    x, info = _cg(A, b, tol, maxiter, M, cb)
    res = float(np.linalg.norm(matvec(x) - b) / max(np.linalg.norm(b), 1e-300))
    out = base.copy()
    out.ravel()[free_flat] = x
    return out, (iters[0], res, info == 0)


def _smallest_eigenpair(kern, active, tol=1e-10):
    """Smallest eigenvalue of L restricted to the active cells."""
    act_flat = np.flatnonzero(active.ravel())
    n = act_flat.size
    shape = kern.box_shape
    if n <= DENSE_LIMIT:
        from scipy.linalg import eigh

        L = _dense_matrix(kern, act_flat)
        vals, vecs = eigh(L, subset_by_index=[0, 0])
        lam, v = float(vals[0]), vecs[:, 0]
        res = float(np.linalg.norm(L @ v - lam * v))
        u = np.zeros(shape)
        u.ravel()[act_flat] = v if v.sum() >= 0 else -v
        return lam, u, 1, res, True

    def matvec(x):
        u = np.zeros(shape)
        u.ravel()[act_flat] = np.asarray(x).reshape(-1)
        return _apply_quadratic(kern, u).ravel()[act_flat]

    A = LinearOperator((n, n), matvec=matvec)
    dinv = 1.0 / (2.0 * (kern.row_sums() + kern.tail).ravel()[act_flat])
    M = LinearOperator(A.shape, matvec=lambda x: dinv * np.asarray(x).reshape(-1))
    # deterministic start: distance-to-boundary bump plus a flat component
    dist = ndimage.distance_transform_edt(active)
    x0 = dist.ravel()[act_flat] + 1.0
    x1 = np.ones(n)
    X = np.stack([x0 / np.linalg.norm(x0), x1 / np.linalg.norm(x1)], axis=1)
    vals, vecs, hist = lobpcg(A, X, M=M, largest=False, tol=tol, maxiter=600,
                              retResidualNormsHistory=True)
    k = int(np.argmin(vals))
    lam, v = float(vals[k]), vecs[:, k]
    res = float(np.linalg.norm(matvec(v) - lam * v))
    u = np.zeros(shape)
    u.ravel()[act_flat] = v if v.sum() >= 0 else -v
    return lam, u, len(hist), res, res <= max(tol * abs(lam) * 100, 1e-8)


# ---------------------------------------------------------------------------
# projected descent
# ---------------------------------------------------------------------------

def _power_lipschitz(kern, active, iters=12):
    """Largest eigenvalue of the quadratic-energy operator (power iteration)."""
    shape = kern.box_shape
    u = np.where(active, 1.0, 0.0)
    u /= np.linalg.norm(u)
    lam = 1.0
    for _ in range(iters):
        v = np.where(active, _apply_quadratic(kern, u), 0.0)
        lam = float(np.linalg.norm(v))
        if lam == 0.0:
            return 1.0
        u = v / lam
    return lam


def _projected_descent(x0, fun_grad, project, t0, max_iter=4000, tol_rel=1e-10,
                       window=20, momentum=True):
    """Monotone projected gradient with BB steps and optional extrapolation.

    The extrapolation is a monotone accelerated step (the candidate is kept
    only if it lowers the objective; otherwise the momentum restarts), which
    removes the sublinear tail of plain descent for degenerate energies.
    Convergence is declared when the relative objective decrease stays below
    ``tol_rel`` for ``window`` consecutive iterations.
    """
    x = project(x0)
    if x is None:
        raise SolverError("projected descent started from an infeasible point")
    f, g = fun_grad(x)
    x_prev = x
    theta = 1.0
    t = t0
    stall = 0
    it = 0
    for it in range(1, max_iter + 1):
        if momentum and it > 1:
            theta_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * theta * theta))
            beta = (theta - 1.0) / theta_new
            theta = theta_new
            y = project(x + beta * (x - x_prev))
            f_y, g_y = (fun_grad(y) if y is not None else (np.inf, None))
            if y is None or f_y > f:  # extrapolation failed: restart momentum
                theta = 1.0
                y, f_y, g_y = x, f, g
        else:
            y, f_y, g_y = x, f, g
        accepted = False
        for _ in range(60):
            x_new = project(y - t * g_y)
            if x_new is None:         # infeasible trial step: shrink
                t *= 0.5
                continue
            f_new, g_new = fun_grad(x_new)
            if f_new <= f:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            theta = 1.0
            if float(np.linalg.norm(g)) <= 1e-14 * max(abs(f), 1.0):
                return x, f, it, 0.0, True
            break
        s = x_new - y
        dg = g_new - g_y
        sy = float(np.sum(s * dg))
        ss = float(np.sum(s * s))
        rel = (f - f_new) / max(abs(f), 1e-300)
        x_prev, x, f, g = x, x_new, f_new, g_new
        if sy > 1e-300 and ss > 0:
            t = min(max(ss / sy, t0 * 1e-6), t0 * 1e8)
        else:
            t *= 1.5
        stall = stall + 1 if rel < tol_rel else 0
        if stall >= window:
            return x, f, it, rel, True
    f_final, g_final = fun_grad(x)
    gn = float(np.linalg.norm(g_final))
    return x, f_final, it, gn, False


# ---------------------------------------------------------------------------
# level-set machinery (p = 1 post-processing)
# ---------------------------------------------------------------------------

def _smoothing_budget(kern, max_iter):
    """Iteration budget per smoothing stage, scaled to the pair-sum cost.

    The level-set extraction performs the exact minimization over the family
    swept by the smoothed iterate, so on large grids a short smoothing run
    suffices; momentum is disabled there since it doubles the per-iteration
    price."""
    cost = float(np.prod(kern.box_shape)) * float(np.prod(kern.stencil.shape))
    stage = int(max(10, min(max_iter // 4, 3.0e9 / max(cost, 1.0))))
    return stage, cost < 2.0e8


class _StencilCutTracker:
    """Incrementally maintained nonlocal cut value of a growing cell set."""

    def __init__(self, kern, init_mask):
        self.kern = kern
        self.shape = kern.box_shape
        self.R = kern.row_sums()
        self.tau = kern.tail
        m = init_mask.astype(float)
        self.part = stencil_correlate(kern.stencil, m)
        self.S_R = float(np.sum(self.R[init_mask]))
        self.S_tau = float(np.sum(self.tau[init_mask]))
        mf = m
        self.S_pairs = float(np.sum(mf * self.part))

    def add(self, idx):
        self.S_R += self.R[idx]
        self.S_tau += self.tau[idx]
        self.S_pairs += 2.0 * self.part[idx]
        st = self.kern.stencil
        if len(self.shape) == 1:
            n = self.shape[0]
            m = idx[0]
            self.part += st[n - 1 - m: 2 * n - 1 - m]
        else:
            nx, ny = self.shape
            mx, my = idx
            self.part += st[nx - 1 - mx: 2 * nx - 1 - mx,
                            ny - 1 - my: 2 * ny - 1 - my]

    def value(self):
        return 2.0 * (self.S_R - self.S_pairs) + 2.0 * self.S_tau


class _LocalCutTracker:
    """Incremental nearest-neighbor cut (local perimeter) of a growing set."""

    def __init__(self, h, dim, init_mask):
        self.h = h
        self.dim = dim
        self.mask = init_mask.copy()
        self.w = h ** (dim - 1)
        self.edges_in = self._internal_edges(init_mask)
        self.size = int(init_mask.sum())

    @staticmethod
    def _internal_edges(mask):
        e = 0
        for k in range(mask.ndim):
            sl1 = [slice(None)] * mask.ndim
            sl2 = [slice(None)] * mask.ndim
            sl1[k] = slice(1, None)
            sl2[k] = slice(None, -1)
            e += int(np.sum(mask[tuple(sl1)] & mask[tuple(sl2)]))
        return e

    def add(self, idx):
        for k in range(self.dim):
            for step in (-1, 1):
                j = list(idx)
                j[k] += step
                if 0 <= j[k] < self.mask.shape[k] and self.mask[tuple(j)]:
                    self.edges_in += 1
        self.mask[idx] = True
        self.size += 1

    def value(self):
        return self.w * (2 * self.dim * self.size - 2 * self.edges_in)


def _best_superset_cut(phi, sigma, env, tracker_factory):
    """Scan level sets {phi > t} (grown from sigma, inside env) for the
    minimal cut; smallest threshold wins ties."""
    free = env & ~sigma
    order = np.argwhere(free)
    if order.size == 0:
        tr = tracker_factory(sigma)
        return sigma, tr.value(), None
    vals = phi[free.nonzero()]
    desc = np.argsort(-vals, kind="stable")
    tr = tracker_factory(sigma)
    best_cut = tr.value()
    best_k = 0
    cells = [tuple(c) for c in order[desc]]
    sorted_vals = vals[desc]
    k = 0
    while k < len(cells):
        v = sorted_vals[k]
        while k < len(cells) and sorted_vals[k] == v:
            tr.add(cells[k])
            k += 1
        cut = tr.value()
        if cut <= best_cut:
            best_cut = cut
            best_k = k
    out = sigma.copy()
    for c in cells[:best_k]:
        out[c] = True
    return out, best_cut, None


def _best_ratio_cut(phi, omega_active, e_mask, tracker_factory, h, dim):
    """Scan level sets of phi for the minimal cut / |set ∩ E| ratio."""
    order = np.argwhere(omega_active)
    vals = phi[omega_active.nonzero()]
    desc = np.argsort(-vals, kind="stable")
    empty = np.zeros_like(omega_active)
    tr = tracker_factory(empty)
    hN = h ** dim
    cells = [tuple(c) for c in order[desc]]
    sorted_vals = vals[desc]
    best = np.inf
    best_k = 0
    vol_e = 0.0
    k = 0
    while k < len(cells):
        v = sorted_vals[k]
        while k < len(cells) and sorted_vals[k] == v:
            tr.add(cells[k])
            if e_mask[cells[k]]:
                vol_e += hN
            k += 1
        if vol_e > 0:
            ratio = tr.value() / vol_e
            if ratio <= best:
                best = ratio
                best_k = k
    out = np.zeros_like(omega_active)
    for c in cells[:best_k]:
        out[c] = True
    return out, best


# ---------------------------------------------------------------------------
# capacity
# ---------------------------------------------------------------------------

def _check_sigma_env(sigma, env):
    if np.any(sigma & ~env.active):
        raise SolverError("sigma must be contained in the environment set")
    ring = ndimage.binary_dilation(sigma, structure=np.ones((3,) * env.dim, bool))
    if np.any(ring & ~env.active):
        raise SolverError("sigma touches the environment boundary; "
                          "one environment ring around sigma is required")


def capacity(sigma, env, params, kern=None, near_band=2, tol=1e-10,
             max_iter=4000, method="variational", strict=False):
    """Relative (s,p)-capacity of a cell set inside an environment domain.

    Minimizes the nonlocal p-energy over functions equal to 1 on ``sigma``,
    zero outside the active cells of ``env``, and confined to [0, 1].
    ``method='set-formula'`` returns the indicator energy of sigma itself
    (exact for convex sigma when p = 1).
    """
    env.require_nonempty()
    sigma = np.asarray(sigma, dtype=bool)
    if sigma.shape != env.box_shape:
        raise SolverError("sigma mask must live on the environment box")
    if kern is None:
        kern = assemble_kernel(env, params, near_band=near_band)
    zero = LatticeFunction(np.zeros(env.box_shape), env)
    if not sigma.any():
        return MinimizeResult(0.0, zero, 0, 0.0, True)
    _check_sigma_env(sigma, env)
    if method == "set-formula":
        if params.p != 1.0:
            raise SolverError("the set formula applies to p = 1 only")
        val = set_cut_value(sigma, kern)
        return MinimizeResult(val, LatticeFunction(sigma.astype(float), env),
                              0, 0.0, True, info={"method": "set-formula"})

    free = env.active & ~sigma

    if params.p == 2.0:
        phi, (iters, res, ok) = _solve_constrained_quadratic(
            kern, sigma, 1.0, free, tol=tol)
        phi = np.clip(phi, 0.0, 1.0)
        fn = LatticeFunction(phi, env)
        val = gagliardo_p(fn, kern, params).value
        result = MinimizeResult(val, fn, iters, res, ok)
        return result.require_converged("capacity") if strict else result

    # warm start from the p = 2 potential
    warm_params = params.with_(p=2.0, q=2.0, allow_supercritical=True)
    warm_kern = assemble_kernel(env, warm_params, near_band=near_band)
    phi0, _ = _solve_constrained_quadratic(warm_kern, sigma, 1.0, free)
    phi0 = np.clip(phi0, 0.0, 1.0)

    def project(x):
        x = np.clip(x, 0.0, 1.0)
        x[sigma] = 1.0
        x[~env.active & ~sigma] = 0.0
        return x

    t0 = 1.0 / max(_power_lipschitz(kern, env.active), 1e-300)

    if params.p > 1.0:
        def fun_grad(x):
            e, g = gagliardo_grad(LatticeFunction(x, env), kern, params)
            return e, g

        phi, f, iters, res, ok = _projected_descent(
            phi0, fun_grad, project, t0, max_iter=max_iter, tol_rel=tol)
        fn = LatticeFunction(phi, env)
        val = gagliardo_p(fn, kern, params).value
        result = MinimizeResult(val, fn, iters, res, ok)
        return result.require_converged("capacity") if strict else result

    # p = 1: annealed smoothing, then exact level-set extraction
    phi = phi0
    iters_total = 0
    ok = True
    stage_iters, use_momentum = _smoothing_budget(kern, max_iter)
    for eps in (1e-2, 1e-3, 1e-4):
        def fun_grad(x, eps=eps):
            e, g = _backend.smoothed_tv_energy_grad(x, kern.stencil, eps)
            root = np.sqrt(x * x + eps * eps)
            e += 2.0 * float(np.sum(kern.tail * (root - eps)))
            g = g + 2.0 * kern.tail * (x / root)
            return e, g

        phi, _, its, res, conv = _projected_descent(
            phi, fun_grad, project, t0, max_iter=stage_iters, tol_rel=1e-9,
            window=10, momentum=use_momentum)
        iters_total += its
        ok = ok and conv
    best_mask, best_cut, _ = _best_superset_cut(
        phi, sigma, env.active, lambda m: _StencilCutTracker(kern, m))
    fn = LatticeFunction(best_mask.astype(float), env)
    result = MinimizeResult(best_cut, fn, iters_total, 0.0, True,
                            info={"levelset": True, "smoothing_converged": ok})
    return result


# ---------------------------------------------------------------------------
# principal frequency
# ---------------------------------------------------------------------------

def frequency(omega, params, kern=None, near_band=2, tol=1e-10, max_iter=4000,
              strict=False):
    """Sharp constant of the discrete (s,p,q) Poincare-Sobolev inequality.

    p = q = 2 is routed through the symmetric eigensolve; other exponents run
    a normalized projected descent initialized at the quadratic eigenfunction.
    """
    omega.require_nonempty()
    if kern is None:
        kern = assemble_kernel(omega, params, near_band=near_band)
    hN = omega.h ** omega.dim

    if params.p == 2.0 and params.q == 2.0:
        lam, u, iters, res, ok = _smallest_eigenpair(kern, omega.active, tol=tol)
        fn = LatticeFunction(u, omega)
        nq = lq_norm(fn, 2.0)
        fn = LatticeFunction(u / nq, omega)
        val = gagliardo_p(fn, kern, params).value
        result = MinimizeResult(val, fn, iters, res, ok)
        if strict and not ok:
            raise SolverError(
                f"eigen-solver did not reach tolerance (residual={res:.3e})")
        return result

    if params.p == 2.0:
        warm_kern = kern
    else:
        warm_params = params.with_(p=2.0, q=2.0, allow_supercritical=True)
        warm_kern = assemble_kernel(omega, warm_params, near_band=near_band)
    _, u0, _, _, _ = _smallest_eigenpair(warm_kern, omega.active, tol=1e-8)
    u0 = np.abs(u0)

    def project(x):
        x = np.where(omega.active, np.abs(x), 0.0)
        n = (hN * np.sum(x ** params.q)) ** (1.0 / params.q)
        if n == 0:
            return None  # infeasible step; the line search will shrink it
        return x / n

    def fun_grad(x):
        e, g = gagliardo_grad(LatticeFunction(x, omega), kern, params)
        # gradient of e on the unit-q sphere: remove the radial component
        radial = hN * np.sign(x) * np.abs(x) ** (params.q - 1.0)
        coef = params.p * e  # d/dt E(u/||u+t du||) radial correction
        g = g - coef * radial
        return e, g

    t0 = 1.0 / max(_power_lipschitz(kern, omega.active), 1e-300)
    u, f, iters, res, ok = _projected_descent(
        u0, fun_grad, project, t0, max_iter=max_iter, tol_rel=tol)
    fn = LatticeFunction(u, omega)
    val = gagliardo_p(fn, kern, params).value
    result = MinimizeResult(val, fn, iters, res, ok)
    return result.require_converged("frequency") if strict else result


# ---------------------------------------------------------------------------
# torsion
# ---------------------------------------------------------------------------

def torsion(r, R, params, h, pad=2, near_band=2, tol=1e-11, max_iter=6000,
            strict=False):
    """Minimizer of (1/p) [u]^p - integral over B_r of u, zero outside B_R."""
    if not 0 < r <= R:
        raise SolverError(f"need 0 < r <= R, got r={r}, R={R}")
    if params.p <= 1.0:
        raise SolverError("torsion requires p > 1")
    dom = build_ball_domain(np.zeros(params.dim), R, h, pad=pad)
    kern = assemble_kernel(dom, params, near_band=near_band)
    centers = dom.centers()
    in_r = (np.linalg.norm(centers, axis=1) < r).reshape(dom.box_shape)
    hN = h ** params.dim
    f_rhs = hN * in_r.astype(float)

    if params.p == 2.0:
        # stationarity of (1/2) u^T L u - f^T u, i.e. L u = f
        V, (iters, res, ok) = _solve_constrained_quadratic(
            kern, ~dom.active, 0.0, dom.active, rhs=f_rhs, tol=tol)
        V = np.maximum(V, 0.0)
        fn = LatticeFunction(V, dom)
        energy = gagliardo_p(fn, kern, params).value
        val = energy / 2.0 - float(np.sum(f_rhs * V))
        result = MinimizeResult(val, fn, iters, res, ok,
                                info={"rhs_ball": in_r, "kern": kern})
        return result.require_converged("torsion") if strict else result

    warm = params.with_(p=2.0, q=2.0, allow_supercritical=True)
    warm_kern = assemble_kernel(dom, warm, near_band=near_band)
    V0, _ = _solve_constrained_quadratic(warm_kern, ~dom.active, 0.0, dom.active,
                                         rhs=f_rhs)
    V0 = np.maximum(V0, 0.0)
    # rescale the warm start to the right magnitude for this p
    e0, _ = gagliardo_grad(LatticeFunction(V0, dom), kern, params)
    lin0 = float(np.sum(f_rhs * V0))
    if e0 > 0 and lin0 > 0:
        # optimal scale of t*V0: minimize t^p e0/p - t lin0
        t_opt = (lin0 / e0) ** (1.0 / (params.p - 1.0))
        V0 = t_opt * V0

    def project(x):
        return np.where(dom.active, np.maximum(x, 0.0), 0.0)

    def fun_grad(x):
        e, g = gagliardo_grad(LatticeFunction(x, dom), kern, params)
        return e / params.p - float(np.sum(f_rhs * x)), g / params.p - f_rhs

    def el_gap(x):
        # stationarity measure: source mass against full energy
        e = gagliardo_p(LatticeFunction(x, dom), kern, params).value
        return abs(float(np.sum(f_rhs * x)) - e) / max(e, 1e-300)

    t0 = 1.0 / max(_power_lipschitz(kern, dom.active), 1e-300)
    V, f_val, iters, res, ok = _projected_descent(
        V0, fun_grad, project, t0, max_iter=max_iter, tol_rel=tol, window=30)
    # the stall rule can stop short of the stationarity target; polish with
    # tightened tolerance until the identity residual is small
    tighten = tol
    for _ in range(3):
        if el_gap(V) <= 1e-4:
            break
        tighten *= 1e-2
        V, f_val, its2, res, ok = _projected_descent(
            V, fun_grad, project, t0, max_iter=max_iter, tol_rel=tighten,
            window=30)
        iters += its2
    fn = LatticeFunction(V, dom)
    energy = gagliardo_p(fn, kern, params).value
    val = energy / params.p - float(np.sum(f_rhs * V))
    result = MinimizeResult(val, fn, iters, res, ok,
                            info={"rhs_ball": in_r, "kern": kern})
    return result.require_converged("torsion") if strict else result


def torsion_identity_gap(result, params):
    """Relative gap in the stationarity identity: integral of V over the
    source ball equals the full p-energy of V."""
    fn = result.minimizer
    kern = result.info["kern"]
    in_r = result.info["rhs_ball"]
    hN = fn.domain.h ** fn.domain.dim
    lin = hN * float(np.sum(fn.values[in_r]))
    en = gagliardo_p(fn, kern, params).value
    return abs(lin - en) / max(en, 1e-300), lin, en


# ---------------------------------------------------------------------------
# Cheeger constant
# ---------------------------------------------------------------------------

def cheeger(e_mask, omega, s, kern=None, near_band=2, max_iter=2000,
            strict=False):
    """Cheeger-type constant: minimal nonlocal perimeter over measure of the
    intersection with E, over subsets of omega.

    Runs the smoothed L1 Rayleigh-quotient descent, then extracts the best
    level set exactly.
    """
    omega.require_nonempty()
    e_mask = np.asarray(e_mask, dtype=bool)
    if not e_mask.any():
        raise SolverError("weight region E is empty")
    if np.any(e_mask & ~omega.active):
        raise SolverError("E must be a subset of omega")
    params = FracParams(dim=omega.dim, s=s, p=1.0)
    if kern is None:
        kern = assemble_kernel(omega, params, near_band=near_band)
    hN = omega.h ** omega.dim

    def project(x):
        x = np.where(omega.active, np.maximum(x, 0.0), 0.0)
        n = hN * float(np.sum(x[e_mask]))
        if n <= 0:
            return None  # infeasible step; the line search will shrink it
        return x / n

    phi = e_mask.astype(float)
    iters_total = 0
    stage_iters, use_momentum = _smoothing_budget(kern, max_iter)
    t0 = 1.0 / max(_power_lipschitz(kern, omega.active), 1e-300)
    for eps in (1e-2, 1e-3, 1e-4):
        def fun_grad(x, eps=eps):
            e, g = _backend.smoothed_tv_energy_grad(x, kern.stencil, eps)
            root = np.sqrt(x * x + eps * eps)
            e += 2.0 * float(np.sum(kern.tail * (root - eps)))
            g = g + 2.0 * kern.tail * (x / root)
            return e, g

        phi, _, its, _, _ = _projected_descent(
            phi, fun_grad, project, t0, max_iter=stage_iters, tol_rel=1e-9,
            window=10, momentum=use_momentum)
        iters_total += its
    best_mask, best_ratio = _best_ratio_cut(
        phi, omega.active, e_mask, lambda m: _StencilCutTracker(kern, m),
        omega.h, omega.dim)
    fn = LatticeFunction(best_mask.astype(float), omega)
    return MinimizeResult(best_ratio, fn, iters_total, 0.0, True,
                          info={"level_set": best_mask})


# ---------------------------------------------------------------------------
# local (nearest-neighbor Dirichlet) counterparts
# ---------------------------------------------------------------------------

def _local_energy_grad(u, h, p):
    dim = u.ndim
    w = h ** (dim - p)
    e = 0.0
    g = np.zeros_like(u)
    for k in range(dim):
        sl1 = [slice(None)] * dim
        sl2 = [slice(None)] * dim
        sl1[k] = slice(1, None)
        sl2[k] = slice(None, -1)
        diff = u[tuple(sl1)] - u[tuple(sl2)]
        if p == 2.0:
            e += w * float(np.sum(diff * diff))
            t = 2.0 * w * diff
        elif p == 1.0:
            e += w * float(np.sum(np.abs(diff)))
            t = w * np.sign(diff)
        else:
            ad = np.abs(diff)
            e += w * float(np.sum(ad ** p))
            t = w * p * np.sign(diff) * ad ** (p - 1.0)
        g[tuple(sl1)] += t
        g[tuple(sl2)] -= t
    return e, g


def local_energy(u, h, p):
    e, _ = _local_energy_grad(u, h, p)
    return e


def _local_laplacian(h, dim, shape, idx_flat):
    n = idx_flat.size
    pos = -np.ones(int(np.prod(shape)), dtype=int)
    pos[idx_flat] = np.arange(n)
    rows, cols, vals = [], [], []
    w = h ** (dim - 2)
    multi = np.unravel_index(idx_flat, shape)
    deg = np.full(n, 2 * dim, dtype=float)
    for k in range(dim):
        for step in (-1, 1):
            nb = [m.copy() for m in multi]
            nb[k] = nb[k] + step
            ok = (nb[k] >= 0) & (nb[k] < shape[k])
            flat_nb = np.ravel_multi_index([m[ok] for m in nb], shape)
            j = pos[flat_nb]
            sel = j >= 0
            rows.append(np.arange(n)[ok][sel])
            cols.append(j[sel])
            vals.append(np.full(sel.sum(), -w))
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(deg * w)
    A = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n))
    return A


def local_frequency(omega, p, tol=1e-10, max_iter=4000, strict=False):
    """Least Rayleigh quotient of the nearest-neighbor Dirichlet p-energy."""
    omega.require_nonempty()
    h = omega.h
    hN = h ** omega.dim
    idx = np.flatnonzero(omega.active.ravel())
    if p == 2.0:
        A = _local_laplacian(h, omega.dim, omega.box_shape, idx)
        if idx.size <= DENSE_LIMIT:
            from scipy.linalg import eigh

            vals, vecs = eigh(A.toarray(), subset_by_index=[0, 0])
            lam, v = float(vals[0]), vecs[:, 0]
        else:
            vals, vecs = eigsh(A, k=1, sigma=0.0, which="LM")
            lam, v = float(vals[0]), vecs[:, 0]
        u = np.zeros(omega.box_shape)
        u.ravel()[idx] = np.abs(v)
        fn = LatticeFunction(u, omega)
        nq = lq_norm(fn, p)
        u = u / nq
        val = local_energy(u, h, p)
        return MinimizeResult(val, LatticeFunction(u, omega), 1, 0.0, True)

    warm = local_frequency(omega, 2.0)
    u0 = warm.minimizer.values

    def project(x):
        x = np.where(omega.active, np.abs(x), 0.0)
        n = (hN * np.sum(x ** p)) ** (1.0 / p)
        if n == 0:
            return None  # infeasible step; the line search will shrink it
        return x / n

    def fun_grad(x):
        e, g = _local_energy_grad(x, h, p)
        radial = hN * np.sign(x) * np.abs(x) ** (p - 1.0)
        return e, g - p * e * radial

    t0 = h ** (p - omega.dim) / (8 * omega.dim)
    u, f, iters, res, ok = _projected_descent(
        u0, fun_grad, project, t0, max_iter=max_iter, tol_rel=tol)
    u = project(u)
    val = local_energy(u, h, p)
    result = MinimizeResult(val, LatticeFunction(u, omega), iters, res, ok)
    return result.require_converged("local_frequency") if strict else result


def local_capacity(sigma, env, p, tol=1e-11, max_iter=4000, strict=False):
    """Relative p-capacity with the nearest-neighbor Dirichlet energy."""
    env.require_nonempty()
    sigma = np.asarray(sigma, dtype=bool)
    h = env.h
    zero = LatticeFunction(np.zeros(env.box_shape), env)
    if not sigma.any():
        return MinimizeResult(0.0, zero, 0, 0.0, True)
    _check_sigma_env(sigma, env)
    free = env.active & ~sigma
    if p == 2.0:
        idx = np.flatnonzero(free.ravel())
        A_all = _local_laplacian(h, env.dim, env.box_shape, np.arange(
            int(np.prod(env.box_shape))))
        base = np.zeros(env.box_shape)
        base[sigma] = 1.0
        b = -(A_all @ base.ravel())[idx]
        A = _local_laplacian(h, env.dim, env.box_shape, idx)
        x = sparse.linalg.spsolve(A.tocsc(), b)
        phi = base
        phi.ravel()[idx] = x
        phi = np.clip(phi, 0.0, 1.0)
        val = local_energy(phi, h, p)
        return MinimizeResult(val, LatticeFunction(phi, env), 1, 0.0, True)

    warm = local_capacity(sigma, env, 2.0)
    phi0 = warm.minimizer.values

    def project(x):
        x = np.clip(x, 0.0, 1.0)
        x[sigma] = 1.0
        x[~env.active & ~sigma] = 0.0
        return x

    if p > 1.0:
        def fun_grad(x):
            return _local_energy_grad(x, h, p)

        t0 = h ** (p - env.dim) / (8 * env.dim)
        phi, f, iters, res, ok = _projected_descent(
            phi0, fun_grad, project, t0, max_iter=max_iter, tol_rel=tol)
        val = local_energy(phi, h, p)
        result = MinimizeResult(val, LatticeFunction(phi, env), iters, res, ok)
        return result.require_converged("local_capacity") if strict else result

    # p = 1: smoothed descent plus exact level-set extraction on local cuts
    phi = phi0
    its_total = 0
    for eps in (1e-2, 1e-3, 1e-4):
        def fun_grad(x, eps=eps):
            dim = x.ndim
            w = h ** (dim - 1.0)
            e = 0.0
            g = np.zeros_like(x)
            for k in range(dim):
                sl1 = [slice(None)] * dim
                sl2 = [slice(None)] * dim
                sl1[k] = slice(1, None)
                sl2[k] = slice(None, -1)
                diff = x[tuple(sl1)] - x[tuple(sl2)]
                root = np.sqrt(diff * diff + eps * eps)
                e += w * float(np.sum(root - eps))
                t = w * diff / root
                g[tuple(sl1)] += t
                g[tuple(sl2)] -= t
            return e, g

        t0 = h ** (1.0 - env.dim) / (8 * env.dim)
        phi, _, its, _, _ = _projected_descent(
            phi, fun_grad, project, t0, max_iter=max_iter // 4, tol_rel=1e-9,
            window=10)
        its_total += its
    best_mask, best_cut, _ = _best_superset_cut(
        phi, sigma, env.active,
        lambda m: _LocalCutTracker(h, env.dim, m))
    fn = LatticeFunction(best_mask.astype(float), env)
    return MinimizeResult(best_cut, fn, its_total, 0.0, True,
                          info={"levelset": True})
