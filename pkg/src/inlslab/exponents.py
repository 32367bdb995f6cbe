"""Exact-rational engine for Strichartz admissible pairs.

All predicates run on fractions.Fraction / XR values: the range checks and
Hoelder-splitting identities asserted for the four explicit pair families are
algebraic identities, and rounding must not blur them.  Endpoint markers of
the form a+ / a- are realized as a + eps / a - eps through a single
EpsilonPolicy so sweeps are reproducible; eps-shifted endpoints are treated
as closed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .extended import INF, XR, xr

__all__ = [
    "EpsilonPolicy",
    "StrichartzPair",
    "dual_exponent",
    "plus_conjugate",
    "is_l2_admissible",
    "is_hs_admissible",
    "is_hneg_admissible",
    "family_lemma43",
    "family_claim1",
    "family_claim2",
    "default_theta",
    "certificate_rows",
]


@dataclass(frozen=True)
class EpsilonPolicy:
    """Realization of the a+ / a- endpoint conventions as a +- eps shift."""

    eps: Fraction = Fraction(1, 10**9)

    def __post_init__(self):
        if not (0 < self.eps < Fraction(1, 100)):
            raise ValueError(f"eps must lie in (0, 1/100), got {self.eps}")


DEFAULT_POLICY = EpsilonPolicy()


@dataclass(frozen=True)
class StrichartzPair:
    """Exponent pair (q, r) tagged with its admissibility class."""

    q: XR
    r: XR
    klass: str  # "L2", "Hs(+s)" or "Hs(-s)" rendered by the caller

    def __post_init__(self):
        if self.q < 1 or self.r < 1:
            raise ValueError(f"exponents must be >= 1, got ({self.q}, {self.r})")


def dual_exponent(a) -> XR:
    """Hoelder conjugate a' with 1/a + 1/a' = 1; dual of 1 is infinity."""
    a = xr(a)
    if a < 1:
        raise ValueError(f"exponent must be >= 1, got {a}")
    if a.is_infinite:
        return XR(1)
    if a == 1:
        return INF
    f = a.fraction
    return XR(f / (f - 1))


def plus_conjugate(a: Fraction, eps: Fraction) -> Fraction:
    """(a+)' = a+ . a / (a+ - a) with a+ = a + eps.

    Satisfies 1/a = 1/(a+)' + 1/a+ exactly.
    """
    a = Fraction(a)
    return (a + eps) * a / eps


def _scaling_holds(q: XR, r: XR, N: int, s: Fraction) -> bool:
    # 2/q = N/2 - N/r - s, with 1/inf = 0.
    lhs = q.reciprocal() * 2
    rhs_inv = r.reciprocal() * N
    if rhs_inv.is_infinite:
        return False
    target = Fraction(N, 2) - rhs_inv.fraction - s
    if lhs.is_infinite:
        return False
    return lhs.fraction == target


def is_l2_admissible(q, r, N: int) -> bool:
    """Mass-level admissibility: 2/q = N/2 - N/r with r in the N-range."""
    q, r = xr(q), xr(r)
    if q < 1 or r < 1:
        return False
    if not _scaling_holds(q, r, N, Fraction(0)):
        return False
    if N >= 3:
        return XR(2) <= r <= XR(Fraction(2 * N, N - 2))
    if N == 2:
        return XR(2) <= r and not r.is_infinite
    return XR(2) <= r  # N = 1, r = inf allowed


def is_hs_admissible(q, r, N: int, s, policy: EpsilonPolicy = DEFAULT_POLICY) -> bool:
    """H^s-level admissibility, 0 < s < 1: 2/q = N/2 - N/r - s plus range."""
    s = Fraction(s)
    if not (0 < s < 1):
        raise ValueError(f"s must lie in (0, 1), got {s}")
    q, r = xr(q), xr(r)
    if q < 1 or r < 1:
        return False
    if not _scaling_holds(q, r, N, s):
        return False
    eps = policy.eps
    if N >= 3:
        lo = Fraction(2 * N, N - 2 * s)  # denominator positive: s < 1 <= N/2
        hi = Fraction(2 * N, N - 2) - eps
        return XR(lo) < r <= XR(hi)
    if N == 2:
        lo = 2 / (1 - s)
        hi = plus_conjugate(2 / (1 - s), eps)
        return XR(lo) < r <= XR(hi)
    if 1 - 2 * s <= 0:
        return XR(1) <= r  # lower constraint vacuous when s >= 1/2 in 1D
    return XR(2 / (1 - 2 * s)) < r


def is_hneg_admissible(q, r, N: int, s, policy: EpsilonPolicy = DEFAULT_POLICY) -> bool:
    """Dual-level admissibility, 0 < s < 1: 2/q = N/2 - N/r + s plus range."""
    s = Fraction(s)
    if not (0 < s < 1):
        raise ValueError(f"s must lie in (0, 1), got {s}")
    q, r = xr(q), xr(r)
    if q < 1 or r < 1:
        return False
    if not _scaling_holds(q, r, N, -s):
        return False
    eps = policy.eps
    if N >= 3:
        lo = Fraction(2 * N, N - 2 * s) + eps
        hi = Fraction(2 * N, N - 2) - eps
        return XR(lo) <= r <= XR(hi)
    if N == 2:
        lo = 2 / (1 - s) + eps
        hi = plus_conjugate(2 / (1 + s), eps)
        return XR(lo) <= r <= XR(hi)
    if 1 - 2 * s <= 0:
        return XR(1) <= r
    return XR(2 / (1 - 2 * s) + eps) <= r


def _require_fractions(**kwargs) -> dict:
    out = {}
    for name, value in kwargs.items():
        out[name] = Fraction(value)
    return out


def _s_c(N: int, alpha: Fraction, b: Fraction) -> Fraction:
    return Fraction(N, 2) - (2 - b) / alpha


class DegenerateFamilyError(ValueError):
    """A family denominator vanished or went nonpositive."""


class ThetaWindowError(ValueError):
    """theta violates the admissible window for the requested family."""


def family_lemma43(alpha, b, theta) -> dict:
    """3D pair family used for the gradient estimate of the nonlinearity.

    k = 4a(a+1-t)/(4-2b-a),  p = 6a(a+1-t)/((4-2b)(a-t)+a),
    l = 4a(a+1-t)/(a(3a-2+2b)-t(3a-4+2b)).
    Asserts (l,p) L2-admissible, (k,p) H^{s_c}-admissible and the time
    Hoelder split 1/2' = (a-t)/k + 1/l.
    """
    v = _require_fractions(alpha=alpha, b=b, theta=theta)
    a, b_, t = v["alpha"], v["b"], v["theta"]
    if not (0 < t < a):
        raise ThetaWindowError(f"need 0 < theta < alpha, got theta={t}")
    d_k = 4 - 2 * b_ - a
    d_p = (4 - 2 * b_) * (a - t) + a
    d_l = a * (3 * a - 2 + 2 * b_) - t * (3 * a - 4 + 2 * b_)
    if d_k <= 0 or d_p <= 0 or d_l <= 0:
        raise DegenerateFamilyError(
            f"degenerate denominator(s) for alpha={a}, b={b_}, theta={t}"
        )
    num = 4 * a * (a + 1 - t)
    k = num / d_k
    p = 6 * a * (a + 1 - t) / d_p
    l = num / d_l
    s_c = _s_c(3, a, b_)
    holder_residual = Fraction(1, 2) - (a - t) / k - 1 / l
    return {
        "k": k,
        "p": p,
        "l": l,
        "l2_admissible": is_l2_admissible(l, p, 3),
        "hs_admissible": is_hs_admissible(k, p, 3, s_c),
        "holder_residual": holder_residual,
        "s_c": s_c,
    }


def family_claim1(alpha, b, theta, N: int) -> dict:
    """Profile-decomposition pair family (all N >= 2).

    Asserts (q_hat, r_hat) L2-admissible, (a_hat, r_hat) H^{s_c}-admissible,
    (a_tilde, r_hat) H^{-s_c}-admissible and the time Hoelder split
    1/a_tilde' = (alpha - theta)/a_hat + 1/a_hat.
    """
    v = _require_fractions(alpha=alpha, b=b, theta=theta)
    a, b_, t = v["alpha"], v["b"], v["theta"]
    if not (0 < t < a):
        raise ThetaWindowError(f"need 0 < theta < alpha, got theta={t}")
    d_q = a * (N * a + 2 * b_) - t * (N * a - 4 + 2 * b_)
    d_r = a * (N - b_) - t * (2 - b_)
    d_at = a * (N * (a + 1 - t) - 2 + 2 * b_) - (4 - 2 * b_) * (1 - t)
    d_ah = 4 - 2 * b_ - (N - 2) * a
    if min(d_q, d_r, d_at, d_ah) <= 0:
        raise DegenerateFamilyError(
            f"degenerate denominator(s) for N={N}, alpha={a}, b={b_}, theta={t}"
        )
    q_hat = 4 * a * (a + 2 - t) / d_q
    r_hat = N * a * (a + 2 - t) / d_r
    a_tilde = 2 * a * (a + 2 - t) / d_at
    a_hat = 2 * a * (a + 2 - t) / d_ah
    s_c = _s_c(N, a, b_)
    split_residual = (1 - 1 / a_tilde) - (a - t) / a_hat - 1 / a_hat
    return {
        "q_hat": q_hat,
        "r_hat": r_hat,
        "a_tilde": a_tilde,
        "a_hat": a_hat,
        "l2_admissible": is_l2_admissible(q_hat, r_hat, N),
        "hs_admissible": is_hs_admissible(a_hat, r_hat, N, s_c),
        "hneg_admissible": is_hneg_admissible(a_tilde, r_hat, N, s_c),
        "split_residual": split_residual,
        "s_c": s_c,
    }


def claim2_theta_window(N: int, alpha, b) -> tuple[Fraction, Fraction]:
    """Open window (lo, hi) that theta must occupy for the N >= 3 family."""
    a, b_ = Fraction(alpha), Fraction(b)
    hi = min(2 * (1 - b_) / N, a)
    lo = Fraction(0)
    if N == 3:
        lo = max(lo, 2 * (1 - 3 * b_) / 3)
    return lo, hi


def family_claim2(alpha, b, theta, N: int, eps=Fraction(1, 100)) -> dict:
    """Uniform-bound pair family; N >= 3 and N = 2 take different shapes.

    Asserts (a, r) H^{s_c}-admissible, (a_bar, r_bar) H^{-s_c}-admissible,
    the interior ranges 2N/(N-2s_c) < r, r_bar < 2N/(N-2) for N >= 3, and
    the split a = (alpha + 1 - theta) * a_bar'.
    """
    v = _require_fractions(alpha=alpha, b=b, theta=theta, eps=eps)
    al, b_, t, ep = v["alpha"], v["b"], v["theta"], v["eps"]
    s_c = _s_c(N, al, b_)
    if N >= 3:
        lo, hi = claim2_theta_window(N, al, b_)
        if not (lo < t < hi):
            raise ThetaWindowError(
                f"theta={t} outside ({lo}, {hi}) for N={N}, alpha={al}, b={b_}"
            )
        D = 4 - 2 * b_ - al * (N - 2)
        if D <= 0:
            raise DegenerateFamilyError(f"energy-supercritical alpha={al} for N={N}")
        a = 4 * al * (N + 2) / (N * D)
        r = 2 * al * N * (N + 2) / ((4 - 2 * b_) * (N + 2) - N * D)
        d_ab = 4 * al * (N + 2) - (al + 1 - t) * N * D
        d_rb = 2 * (N + 2) * (al * (N - 2) - (2 - b_)) + N * D * (al + 1 - t)
        if d_ab <= 0 or d_rb <= 0:
            raise DegenerateFamilyError(
                f"degenerate denominator(s) for N={N}, alpha={al}, theta={t}"
            )
        a_bar = 4 * al * (N + 2) / d_ab
        r_bar = 2 * al * N * (N + 2) / d_rb
        range_lo = Fraction(2 * N, N - 2 * s_c)
        range_hi = Fraction(2 * N, N - 2)
        range_r_ok = range_lo < r < range_hi
        range_rbar_ok = range_lo < r_bar < range_hi
    else:
        if not (0 < t < al):
            raise ThetaWindowError(f"need 0 < theta < alpha, got theta={t}")
        if ep <= 0:
            raise ThetaWindowError(f"need eps > 0, got {ep}")
        d_r = (2 - b_) * (al - t) - ep
        d_ab = 2 * al - (2 - b_) - ep
        if d_r <= 0 or d_ab <= 0:
            raise DegenerateFamilyError(
                f"degenerate denominator(s) for N=2, alpha={al}, theta={t}, eps={ep}"
            )
        a = 2 * al * (al + 1 - t) / (2 - b_ + ep)
        r = 2 * al * (al + 1 - t) / d_r
        a_bar = 2 * al / d_ab
        r_bar = 2 * al / ep
        # 2D analogue of the interior range: lower endpoint 2/(1-s_c).
        range_lo = 2 / (1 - s_c)
        range_r_ok = r > range_lo
        range_rbar_ok = r_bar > range_lo
    split_residual = a - (al + 1 - t) * dual_exponent(a_bar).fraction
    return {
        "a": a,
        "r": r,
        "a_bar": a_bar,
        "r_bar": r_bar,
        "hs_admissible": is_hs_admissible(a, r, N, s_c),
        "hneg_admissible": is_hneg_admissible(a_bar, r_bar, N, s_c),
        "range_r_ok": range_r_ok,
        "range_rbar_ok": range_rbar_ok,
        "split_residual": split_residual,
        "s_c": s_c,
    }


def default_theta(N: int, alpha, b, family: str = "claim1") -> Fraction:
    """Deterministic in-window theta for a family at given (N, alpha, b).

    The underlying estimates only require theta "sufficiently small" inside an
    explicit window, so any reproducible choice works.  For claim2 with
    N = 3 the window has a positive lower endpoint and the midpoint is used;
    otherwise start from min(2(1-b)/N, alpha)/4 and halve until every
    admissibility assert of the family passes.
    """
    al, b_ = Fraction(alpha), Fraction(b)
    if family == "claim2" and N >= 3:
        lo, hi = claim2_theta_window(N, al, b_)
        if lo >= hi:
            raise ThetaWindowError(f"empty theta window for N={N}, alpha={al}, b={b_}")
        return (lo + hi) / 2
    theta = min(2 * (1 - b_) / N, al) / 4
    if theta <= 0:
        theta = al / 8
    for _ in range(64):
        try:
            if family == "lemma43":
                res = family_lemma43(al, b_, theta)
                ok = res["l2_admissible"] and res["hs_admissible"]
            elif family == "claim1":
                res = family_claim1(al, b_, theta, N)
                ok = (
                    res["l2_admissible"]
                    and res["hs_admissible"]
                    and res["hneg_admissible"]
                )
            elif family == "claim2":  # N = 2 branch
                res = family_claim2(al, b_, theta, N)
                ok = res["hs_admissible"] and res["hneg_admissible"]
            else:
                raise ValueError(f"unknown family {family!r}")
        except (DegenerateFamilyError, ThetaWindowError):
            ok = False
        if ok:
            return theta
        theta = theta / 2
    raise ThetaWindowError(
        f"no admissible theta found for family={family}, N={N}, alpha={al}, b={b_}"
    )


def certificate_rows(N: int, alpha, b, theta=None, eps=Fraction(1, 100)) -> list[dict]:
    """Certificate table for every family applicable at (N, alpha, b).

    One row per generated pair with the admissibility verdict and the exact
    residual of the family's splitting identity.
    """
    al, b_ = Fraction(alpha), Fraction(b)
    rows = []

    def add(family, pair_name, q, r, klass, admissible, residual, th):
        rows.append(
            {
                "family": family,
                "pair": pair_name,
                "N": N,
                "alpha": al,
                "b": b_,
                "theta": th,
                "q": q,
                "r": r,
                "class": klass,
                "admissible": admissible,
                "identity_residual": residual,
            }
        )

    if N == 3:
        th = Fraction(theta) if theta is not None else default_theta(N, al, b_, "lemma43")
        fam = family_lemma43(al, b_, th)
        add("lemma43", "(l,p)", fam["l"], fam["p"], "L2", fam["l2_admissible"], fam["holder_residual"], th)
        add("lemma43", "(k,p)", fam["k"], fam["p"], f"Hs({fam['s_c']})", fam["hs_admissible"], fam["holder_residual"], th)

    th = Fraction(theta) if theta is not None else default_theta(N, al, b_, "claim1")
    fam = family_claim1(al, b_, th, N)
    add("claim1", "(q^,r^)", fam["q_hat"], fam["r_hat"], "L2", fam["l2_admissible"], fam["split_residual"], th)
    add("claim1", "(a^,r^)", fam["a_hat"], fam["r_hat"], f"Hs({fam['s_c']})", fam["hs_admissible"], fam["split_residual"], th)
    add("claim1", "(a~,r^)", fam["a_tilde"], fam["r_hat"], f"Hs(-{fam['s_c']})", fam["hneg_admissible"], fam["split_residual"], th)

    th = Fraction(theta) if theta is not None else default_theta(N, al, b_, "claim2")
    fam = family_claim2(al, b_, th, N, eps)
    add("claim2", "(a,r)", fam["a"], fam["r"], f"Hs({fam['s_c']})", fam["hs_admissible"], fam["split_residual"], th)
    add("claim2", "(a-,r-)", fam["a_bar"], fam["r_bar"], f"Hs(-{fam['s_c']})", fam["hneg_admissible"], fam["split_residual"], th)
    return rows


def appendix_checks(
    N: int, alpha, b, theta, eps=Fraction(1, 100), policy: EpsilonPolicy = DEFAULT_POLICY
) -> list[dict]:
    """Range-bound equivalences behind the pair families, both directions.

    Each row records an exponent bound (evaluated on the exact formula) next
    to the elementary condition it is algebraically equivalent to, so a sweep
    can assert bound_holds == condition_holds even at out-of-scope points
    where the bound fails:

      A1 (N = 3 only): 3a/(2-b) < p and p < 6  <=>  a < 4 - 2b;
      A2 (N >= 3): Na/(2-b) < r and r < 2N/(N-2)  <=>  a < (4-2b)/(N-2);
      A3 (N = 2): 2a/(2-b) < r_bar = 2a/eps  <=>  eps < 2 - b, and
                  r_bar <= ((2/(1+s_c))+)'  <=>  the policy shift is small
                  enough, eps_pol * (2a - a_conj * eps) <= a_conj^2 * eps.
    """
    al, b_, th = Fraction(alpha), Fraction(b), Fraction(theta)
    eps = Fraction(eps)
    rows = []

    def add(check, bound_holds, condition_holds):
        rows.append(
            {
                "check": check,
                "bound_holds": bool(bound_holds),
                "condition_holds": bool(condition_holds),
                "equivalent": bool(bound_holds) == bool(condition_holds),
            }
        )

    if N == 3:
        p = 6 * al * (al + 1 - th) / ((4 - 2 * b_) * (al - th) + al)
        cond = al < 4 - 2 * b_
        add("A1_lower", 3 * al / (2 - b_) < p, cond)
        add("A1_upper", p < 6, cond)
    if N >= 3:
        big_d = 4 - 2 * b_ - al * (N - 2)
        r = 2 * al * N * (N + 2) / ((4 - 2 * b_) * (N + 2) - N * big_d)
        cond = al < Fraction(4 - 2 * b_, N - 2)
        add("A2_lower", Fraction(N, 1) * al / (2 - b_) < r, cond)
        add("A2_upper", r < Fraction(2 * N, N - 2), cond)
    if N == 2:
        s_c = _s_c(N, al, b_)
        r_bar = 2 * al / eps
        add("A3_lower", 2 * al / (2 - b_) < r_bar, eps < 2 - b_)
        a_conj = 2 / (1 + s_c)
        ceiling = plus_conjugate(a_conj, policy.eps)
        add(
            "A3_upper",
            r_bar <= ceiling,
            policy.eps * (2 * al - a_conj * eps) <= a_conj**2 * eps,
        )
    return rows
