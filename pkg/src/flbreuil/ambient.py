"""Shared parameters and precomputed tables for one working context.

An AmbientParams fixes the prime p, the residue degree f, the Hodge range
bound r, the uniformiser datum a (a unit of W(k), with E(u) = u + p*a), the
public precision N_p, the gamma truncation N_gamma, the series truncation
N_u and the internal precision headroom.  All scalars, series and
divided-power elements of one computation share a single context.

Two sizing rules matter:

  * the stated invariant N_gamma*(p-2)/(p-1) >= N_p + r makes the Frobenius
    well defined on the truncation (the image of every dropped gamma index
    lands in p^(N_p + r) S);
  * the default N_gamma is chosen strictly larger, because the section
    iteration divides by p^r once per step and truncation-tail effects must
    stay invisible modulo p^N_p through the whole stabilisation window.

The headroom default r*(d*N_p + 2) + p covers the transient denominators of
the section iteration (one p^r per step) with a wide margin.
"""

from __future__ import annotations

import math

from . import pd as pdmod
from .errors import DegreeOverflow, NotAUnit
from .series import SigmaSeries, series_from_ints
from .witt import WittRing, WittScalar, find_irreducible, is_prime


def section_rate_bound(p: int, r: int, N_p: int) -> int:
    """Smallest n with p + p^2 + ... + p^(n+1) - r(n+1) >= N_p."""
    n = 0
    while True:
        gain = sum(p**j for j in range(1, n + 2)) - r * (n + 1)
        if gain >= N_p:
            return n
        n += 1


def min_N_gamma(p: int, r: int, N_p: int) -> int:
    """The hard lower bound: phi of the dropped tail lies in p^(N_p+r) S."""
    return max(p + 1, math.ceil((N_p + r) * (p - 1) / (p - 2)))


def default_N_gamma(p: int, r: int, N_p: int) -> int:
    """Sized so tail effects stay below p^N_p across the iteration window."""
    window = section_rate_bound(p, r, N_p) + 3
    target = N_p + r * window
    return max(min_N_gamma(p, r, N_p), math.ceil(target * (p - 1) / (p - 2)))


def default_headroom(p: int, r: int, N_p: int, d: int = 3) -> int:
    return r * (d * N_p + 2) + p


class AmbientParams:
    """One fixed working context; immutable after construction."""

    def __init__(
        self,
        p: int,
        r: int,
        *,
        f: int = 1,
        N_p: int = 6,
        N_gamma: int | None = None,
        headroom: int | None = None,
        N_u: int | None = None,
        a: int | list[int] = -1,
        m_coeffs=None,
        d_hint: int = 3,
    ):
        if not is_prime(p) or p < 3:
            raise ValueError("p must be an odd prime; p = 2 is not supported "
                             "(the diagonal normal form behind the Kisin-side "
                             "constructions needs p > 2)")
        if not 0 <= r <= p - 1:
            raise ValueError(f"Hodge bound r must lie in [0, {p - 1}]")
        if N_p < 1:
            raise ValueError("N_p must be positive")
        if headroom is None:
            headroom = default_headroom(p, r, N_p, d_hint)
        if headroom < 0:
            raise ValueError("headroom must be nonnegative")
        if N_gamma is None:
            N_gamma = default_N_gamma(p, r, N_p)
        if N_gamma < min_N_gamma(p, r, N_p):
            raise ValueError(
                f"N_gamma = {N_gamma} violates N_gamma*(p-2)/(p-1) >= N_p + r "
                f"(minimum {min_N_gamma(p, r, N_p)})"
            )
        if N_u is None:
            N_u = p * N_gamma
        if N_u < N_gamma:
            raise ValueError("N_u must be at least N_gamma")

        self.p = p
        self.f = f
        self.r = r
        self.N_p = N_p
        self.N_gamma = N_gamma
        self.N_u = N_u
        self.headroom = headroom
        self.cap = N_p + headroom
        if m_coeffs is None:
            m_coeffs = find_irreducible(p, f)
        self.ring = WittRing(p, f, m_coeffs, self.cap)

        a_coeffs = [a] if isinstance(a, int) else list(a)
        self.a = self.ring.make(a_coeffs)
        if not self.a.is_unit():
            raise NotAUnit("a must be a unit of W(k)")
        self.pa = self.a.mul_p_pow(1)          # p*a = E(0)
        self.neg_pa = -self.pa                 # pi, the root of E
        self.sigma_a = self.a.frobenius()

        # tables: v_p(i!), unit parts of i!, binomials for the gamma product
        lim = max(N_u, N_gamma) + 2
        self.vfact = [0] * lim
        v = 0
        for i in range(1, lim):
            n = i
            while n % p == 0:
                n //= p
                v += 1
            self.vfact[i] = v
        self._fact_unit_inv: dict[int, WittScalar] = {}
        self._pa_div_fact: dict[int, WittScalar] = {}
        self.comb = tuple(
            tuple(math.comb(i + j, i) % self.ring.pk[self.cap] for j in range(N_gamma - i))
            for i in range(N_gamma)
        )
        self._u_pow: dict[int, pdmod.PDElement] = {}
        self._c_pow: dict[int, pdmod.PDElement] = {}
        self.E_series = SigmaSeries(self, [self.pa, self.ring.one()])

        # c = phi(E)/p = (u^p + p*sigma(a))/p: the division is exact at the
        # integer level (the gamma_k term of u^p carries p^(p-k) from
        # C(p,k)*(-p*a)^(p-k), and p!/p = (p-1)!), so c costs no precision.
        c_coeffs = []
        for k in range(p):
            n = math.comb(p, k) * math.factorial(k) * (-1) ** (p - k) * p ** (p - k - 1)
            c_coeffs.append(self.ring.from_int(n) * (self.a ** (p - k)))
        c_coeffs.append(self.ring.from_int(math.factorial(p) // p))
        c_coeffs[0] = c_coeffs[0] + self.sigma_a
        self.c = pdmod.PDElement(self, c_coeffs)

    # --- lazy tables ---

    def fact_unit_inv(self, i: int) -> WittScalar:
        """Inverse of the unit part i!/p^(v_p(i!)), at full cap."""
        out = self._fact_unit_inv.get(i)
        if out is None:
            unit = math.factorial(i) // self.ring.pk[self.vfact[i]]
            out = self.ring.from_int(unit).invert()
            self._fact_unit_inv[i] = out
        return out

    def pa_div_fact(self, i: int) -> WittScalar:
        """(p*a)^i / i!, integral of valuation i - v_p(i!)."""
        out = self._pa_div_fact.get(i)
        if out is None:
            out = ((self.a ** i) * self.fact_unit_inv(i)).mul_p_pow(i - self.vfact[i])
            self._pa_div_fact[i] = out
        return out

    def u_pow_raw(self, n: int) -> list[WittScalar]:
        """Coefficients of u^n in the gamma basis: u = E - p*a expanded."""
        out = []
        for k in range(min(n, self.N_gamma - 1) + 1):
            scal = self.ring.from_int(math.comb(n, k) * math.factorial(k))
            out.append(scal * ((-self.pa) ** (n - k)))
        return out

    def u_pow(self, n: int) -> pdmod.PDElement:
        out = self._u_pow.get(n)
        if out is None:
            if n >= self.N_gamma:
                raise DegreeOverflow(f"u^{n} exceeds the gamma truncation")
            out = pdmod.PDElement(self, self.u_pow_raw(n))
            self._u_pow[n] = out
        return out

    def c_pow(self, i: int) -> pdmod.PDElement:
        out = self._c_pow.get(i)
        if out is None:
            if i == 0:
                out = pdmod.pd_one(self)
            else:
                out = self.c_pow(i - 1) * self.c
            self._c_pow[i] = out
        return out

    # --- convenience constructors (used heavily by tests) ---

    def w(self, n: int, prec: int | None = None) -> WittScalar:
        return self.ring.from_int(n, prec)

    def useries(self, ints, prec: int | None = None) -> SigmaSeries:
        return series_from_ints(self, ints, prec)

    def pd(self, ints, prec: int | None = None) -> pdmod.PDElement:
        return pdmod.PDElement(self, [self.w(n, prec) for n in ints])

    def rate_bound(self) -> int:
        return section_rate_bound(self.p, self.r, self.N_p)

    def describe(self) -> dict:
        return {
            "p": self.p,
            "f": self.f,
            "m_coeffs": [int(c) for c in self.ring.m],
            "N_p": self.N_p,
            "N_gamma": self.N_gamma,
            "r": self.r,
            "a": {"coeffs": [str(c) for c in self.a.coeffs], "prec": self.a.prec},
            "headroom": self.headroom,
        }

    def __repr__(self):
        return (f"AmbientParams(p={self.p}, f={self.f}, r={self.r}, N_p={self.N_p}, "
                f"N_gamma={self.N_gamma}, headroom={self.headroom})")
