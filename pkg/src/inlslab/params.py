"""Model parameters and the criticality algebra.

The model is i u_t + Lap(u) + |x|^{-b} |u|^alpha u = 0 in dimension N.
Everything downstream branches on the critical index
s_c = N/2 - (2-b)/alpha and on where (N, alpha, b) sits relative to the
mass-critical exponent (4-2b)/N and the energy-critical ceilings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .extended import INF, XR, xr


def critical_index(N: int, alpha: float, b: float) -> float:
    """Scaling-critical Sobolev index N/2 - (2-b)/alpha."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return N / 2 - (2 - b) / alpha


def critical_index_exact(N: int, alpha: Fraction, b: Fraction) -> Fraction:
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return Fraction(N, 2) - (2 - Fraction(b)) / Fraction(alpha)


def upper_exponents(N: int, b: float) -> tuple[XR, XR]:
    """Energy-subcritical ceiling and the stricter scattering ceiling.

    Returns (two_star, two_lower_star):
      two_star       = (4-2b)/(N-2) for N >= 3, infinity for N = 2;
      two_lower_star = (4-2b)/(N-2) for N >= 4, 3-2b for N = 3,
                       infinity for N = 2.
    """
    if N < 2:
        raise ValueError(f"dimension must be >= 2, got {N}")
    if b < 0:
        raise ValueError(f"b must be nonnegative, got {b}")
    bf = Fraction(b)
    if N == 2:
        return INF, INF
    two_star = xr((4 - 2 * bf) / (N - 2))
    if N == 3:
        two_lower_star = xr(3 - 2 * bf)
    else:
        two_lower_star = two_star
    return two_star, two_lower_star


@dataclass(frozen=True)
class ModelParams:
    """Dimension, nonlinearity power, inhomogeneity exponent and deriveds."""

    N: int
    alpha: float
    b: float
    s_c: float = field(init=False)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"dimension must be >= 1, got {self.N}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.b < 0:
            raise ValueError(f"b must be nonnegative, got {self.b}")
        object.__setattr__(self, "s_c", critical_index(self.N, self.alpha, self.b))

    @property
    def sigma(self):
        """(1 - s_c)/s_c, defined only for s_c > 0; None otherwise."""
        if self.s_c <= 0:
            return None
        return (1 - self.s_c) / self.s_c

    @property
    def theorem_scope(self) -> bool:
        return validate_scope(self).theorem_scope

    @property
    def global_scope(self) -> bool:
        return validate_scope(self).global_scope


@dataclass(frozen=True)
class ScopeReport:
    """Strict-inequality flags for the global-existence and scattering theorems."""

    mass_supercritical: bool
    energy_subcritical: bool
    scattering_subcritical: bool
    b_theorem_ok: bool
    b_global_ok: bool
    theorem_scope: bool
    global_scope: bool


def validate_scope(params: ModelParams) -> ScopeReport:
    """Evaluate every hypothesis flag; reports, never raises.

    theorem_scope: (4-2b)/N < alpha < 2_* , 0 < b < min(N/3, 1), 0 < s_c < 1.
    global_scope:  (4-2b)/N < alpha < 2*  , 0 < b < min(2, N).
    All inequalities strict; N = 1 fails both (the ceilings need N >= 2).
    """
    N, alpha, b = params.N, params.alpha, params.b
    if N < 2:
        return ScopeReport(False, False, False, False, False, False, False)
    two_star, two_lower_star = upper_exponents(N, b)
    af = Fraction(alpha)
    mass_super = af > Fraction(4 - 2 * Fraction(b), N)
    energy_sub = xr(af) < two_star
    scatter_sub = xr(af) < two_lower_star
    b_theorem = 0 < b < min(N / 3, 1.0)
    b_global = 0 < b < min(2, N)
    sc_ok = 0 < params.s_c < 1
    return ScopeReport(
        mass_supercritical=mass_super,
        energy_subcritical=energy_sub,
        scattering_subcritical=scatter_sub,
        b_theorem_ok=b_theorem,
        b_global_ok=b_global,
        theorem_scope=mass_super and scatter_sub and b_theorem and sc_ok,
        global_scope=mass_super and energy_sub and b_global,
    )


@dataclass(frozen=True)
class ScalingReport:
    """Multipliers picked up by u_delta(x) = delta^{(2-b)/alpha} u(delta x)."""

    L2: float
    gradL2: float
    potential: float


def scaling_exponents(params: ModelParams, delta: float) -> ScalingReport:
    """Scale factors of the L2 norm, gradient norm and weighted potential."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    s_c = params.s_c
    return ScalingReport(
        L2=delta ** (-s_c),
        gradL2=delta ** (1 - s_c),
        potential=delta ** (2 * (1 - s_c)),
    )
