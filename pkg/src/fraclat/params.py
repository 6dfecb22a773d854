"""Parameter bundle for the nonlocal energies and its admissibility rules."""

import math
from dataclasses import dataclass, field


def unit_ball_volume(dim):
    """Volume of the unit ball in ``dim`` dimensions (omega_N)."""
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


@dataclass(frozen=True)
class FracParams:
    """Differentiability/integrability parameters (N, s, p, q, gamma).

    Parameters
    ----------
    dim : int
        Ambient dimension N.  Only 1 and 2 are implemented.
    s : float
        Fractional differentiability order, 0 < s < 1.
    p : float
        Integrability exponent of the double-integral energy, p >= 1.
    q : float, optional
        Target Lebesgue exponent; defaults to p.
    gamma : float, optional
        Negligibility parameter in (0, 1), used by the capacitary-inradius
        machinery.
    allow_supercritical : bool
        Accept s*p > dim.  Only meaningful for seminorm evaluation and the
        s -> 1 limit probes; the two-sided frequency bounds assume s*p <= dim.
    """

    dim: int
    s: float
    p: float
    q: float = None
    gamma: float = None
    allow_supercritical: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if self.p < 1.0:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.q is None:
            object.__setattr__(self, "q", float(self.p))
        if self.q < 1.0:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.sp > self.dim and not self.allow_supercritical:
            raise ValueError(
                f"s*p = {self.sp:.6g} exceeds dim = {self.dim}; pass "
                "allow_supercritical=True for seminorm-only use"
            )
        # subcriticality of q: q <= p*_s when sp < N, any finite q when sp >= N
        if self.sp < self.dim and self.q > self.p_star + 1e-12:
            raise ValueError(
                f"q = {self.q:.6g} exceeds the critical exponent "
                f"{self.p_star:.6g} for s*p = {self.sp:.6g} < dim"
            )
        if self.gamma is not None and not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))

    @property
    def sp(self):
        return self.s * self.p

    @property
    def exponent(self):
        """Kernel exponent N + s*p of |x - y|^-(N + s*p)."""
        return self.dim + self.s * self.p

    @property
    def p_star(self):
        """Critical exponent N*p/(N - s*p); inf when s*p >= N."""
        if self.sp >= self.dim:
            return math.inf
        return self.dim * self.p / (self.dim - self.sp)

    @property
    def freq_scaling_power(self):
        """Exponent alpha = s*p - N + N*p/q governing frequency rescaling."""
        return self.sp - self.dim + self.dim * self.p / self.q

    def require_superhomogeneous(self):
        """Assert p <= q, required by the Maz'ya-type two-sided bounds."""
        if self.q < self.p - 1e-12:
            raise ValueError(
                f"this operation requires p <= q, got p={self.p}, q={self.q}"
            )

    def with_(self, **kw):
        """Copy with replaced fields."""
        cur = dict(dim=self.dim, s=self.s, p=self.p, q=self.q, gamma=self.gamma,
                   allow_supercritical=self.allow_supercritical)
        cur.update(kw)
        return FracParams(**cur)
