"""Arithmetic in W(F_{p^f}) truncated at a fixed absolute p-adic precision.

The ring is modelled as Z[T]/(p^N, m(T)) where m is a fixed monic lift of an
irreducible degree-f polynomial over F_p.  This is the length-N truncation of
the unramified extension of Z_p with residue field F_{p^f}; for f = 1 it is
plain Z/p^N.

Precision follows a flat model: every scalar carries one absolute precision
``prec`` (the value is known modulo p^prec), binary operations keep the
minimum of the two input precisions, and exact division by p^k lowers the
precision by k.  Multiplication by p^k raises it by k, capped at the ring
cap.

The arithmetic Frobenius sends T to the unique root of m that is congruent
to T^p mod p; the image is Hensel-lifted once per ring and then applying the
Frobenius is a polynomial substitution.  It restricts to x -> x^p on the
residue field and has order f.
"""

from __future__ import annotations

from .errors import NotAUnit, NotDivisible, PrecisionExhausted


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# --- polynomials over F_p, coefficient lists in ascending degree ---

def _fp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _fp_trim(out)


def _fp_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = list(a)
    dm = len(m) - 1
    inv_lead = pow(m[-1], -1, p)
    while len(a) - 1 >= dm and _fp_trim(a):
        if not a:
            break
        c = (a[-1] * inv_lead) % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _fp_trim(a)
    return a


def _fp_powmod(a: list[int], e: int, m: list[int], p: int) -> list[int]:
    result = [1]
    base = _fp_mod(list(a), m, p)
    while e > 0:
        if e & 1:
            result = _fp_mod(_fp_mul(result, base, p), m, p)
        base = _fp_mod(_fp_mul(base, base, p), m, p)
        e >>= 1
    return result


def _fp_xgcd(a: list[int], b: list[int], p: int):
    r0, r1 = list(a), list(b)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while _fp_trim(r1):
        q, r = _fp_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _fp_sub(s0, _fp_mul(q, s1, p), p)
        t0, t1 = t1, _fp_sub(t0, _fp_mul(q, t1, p), p)
    return r0, s0, t0


def _fp_sub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [0] * n
    for i in range(n):
        ai = a[i] if i < len(a) else 0
        bi = b[i] if i < len(b) else 0
        out[i] = (ai - bi) % p
    return _fp_trim(out)


def _fp_divmod(a: list[int], b: list[int], p: int):
    a = list(a)
    db = len(b) - 1
    inv_lead = pow(b[-1], -1, p)
    q = [0] * max(len(a) - db, 0)
    while len(_fp_trim(a)) - 1 >= db and a:
        c = (a[-1] * inv_lead) % p
        shift = len(a) - 1 - db
        q[shift] = c
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        _fp_trim(a)
    return _fp_trim(q), a


def _fp_is_irreducible(m: list[int], p: int) -> bool:
    f = len(m) - 1
    if f < 1:
        return False
    x = [0, 1]
    # x^(p^f) == x mod m, and gcd(x^(p^(f/q)) - x, m) = 1 for prime q | f
    if _fp_trim(_fp_sub(_fp_powmod(x, p**f, m, p), _fp_mod(list(x), m, p), p)):
        return False
    for q in _prime_factors(f):
        g, _, _ = _fp_xgcd(_fp_sub(_fp_powmod(x, p ** (f // q), m, p), x, p), m, p)
        if len(_fp_trim(list(g))) != 1:
            return False
    return True


def find_irreducible(p: int, f: int) -> tuple[int, ...]:
    """Deterministically pick a monic irreducible degree-f lift over F_p.

    Returns ascending coefficients (c_0, ..., c_{f-1}, 1).  For f = 1 the
    polynomial is T itself, so the ring degenerates to Z/p^N.
    """
    if f == 1:
        return (0, 1)
    for n in range(p**f):
        low = []
        k = n
        for _ in range(f):
            low.append(k % p)
            k //= p
        m = low + [1]
        if _fp_is_irreducible(m, p):
            return tuple(m)
    raise ValueError(f"no irreducible polynomial of degree {f} over F_{p}")


class WittRing:
    """Context for W(F_{p^f}) mod p^cap: modulus tables and the Frobenius."""

    def __init__(self, p: int, f: int = 1, m_coeffs=None, cap: int = 8):
        if not is_prime(p) or p < 3:
            raise ValueError("p must be an odd prime (p > 2)")
        if f < 1:
            raise ValueError("residue degree f must be >= 1")
        if cap < 1:
            raise ValueError("precision cap must be >= 1")
        self.p = p
        self.f = f
        self.cap = cap
        self.pk = [p**i for i in range(cap + 1)]
        if m_coeffs is None:
            m_coeffs = find_irreducible(p, f)
        m_coeffs = tuple(int(c) % self.pk[cap] for c in m_coeffs)
        if len(m_coeffs) != f + 1 or m_coeffs[-1] != 1:
            raise ValueError("m must be monic of degree f")
        self.m = m_coeffs
        self.m_res = [c % p for c in m_coeffs]
        if not _fp_is_irreducible(list(self.m_res), p):
            raise ValueError("m must be irreducible modulo p")
        # reduction rows: T^(f+i) expressed in degrees < f, mod p^cap
        self._redrows = self._build_redrows()
        # Frobenius: image of T, plus its powers, lifted once at full cap
        if f == 1:
            self._spow = None
        else:
            s = self._lift_frobenius_image()
            pows = [self._one_tuple()]
            for _ in range(f - 1):
                pows.append(self._mul_tuple(pows[-1], s, cap))
            self._spow = tuple(pows[1:])  # powers s^1 .. s^(f-1)
            self._sigma_t = s

    # --- raw coefficient-tuple helpers (length f, mod p^k) ---

    def _zero_tuple(self):
        return (0,) * self.f

    def _one_tuple(self):
        return (1,) + (0,) * (self.f - 1)

    def _build_redrows(self):
        if self.f == 1:
            return ()
        cap = self.cap
        mod = self.pk[cap]
        rows = []
        # T^f = -(c_0 + ... + c_{f-1} T^{f-1})
        row = tuple((-c) % mod for c in self.m[:-1])
        rows.append(row)
        for _ in range(self.f - 2):
            prev = rows[-1]
            shifted = [0] + list(prev[:-1])
            top = prev[-1]
            nxt = tuple((shifted[i] + top * rows[0][i]) % mod for i in range(self.f))
            rows.append(nxt)
        return tuple(rows)

    def _add_tuple(self, a, b, k):
        mod = self.pk[k]
        return tuple((x + y) % mod for x, y in zip(a, b))

    def _sub_tuple(self, a, b, k):
        mod = self.pk[k]
        return tuple((x - y) % mod for x, y in zip(a, b))

    def _mul_tuple(self, a, b, k):
        mod = self.pk[k]
        f = self.f
        if f == 1:
            return ((a[0] * b[0]) % mod,)
        full = [0] * (2 * f - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    full[i + j] += ai * bj
        out = list(full[:f])
        for i in range(f, 2 * f - 1):
            c = full[i]
            if c:
                row = self._redrows[i - f]
                for j in range(f):
                    out[j] += c * row[j]
        return tuple(x % mod for x in out)

    def _inv_tuple(self, a, k):
        # residue inverse via extended Euclid over F_p[T], then Newton lifting
        res = [c % self.p for c in a]
        g, s, _ = _fp_xgcd(_fp_trim(res), list(self.m_res), self.p)
        if len(g) != 1:
            raise NotAUnit("element is zero modulo p")
        c_inv = pow(g[0], -1, self.p)
        z = [(x * c_inv) % self.p for x in s]
        z = tuple((z + [0] * self.f)[: self.f])
        cur = 1
        while cur < k:
            cur = min(2 * cur, k)
            az = self._mul_tuple(a, z, cur)
            two_minus = self._sub_tuple(self._smul_tuple(self._one_tuple(), 2, cur), az, cur)
            z = self._mul_tuple(z, two_minus, cur)
        return z

    def _smul_tuple(self, a, n, k):
        mod = self.pk[k]
        return tuple((x * n) % mod for x in a)

    def _eval_int_poly(self, coeffs, z, k):
        # Horner evaluation of a polynomial with integer coefficients at z
        acc = self._zero_tuple()
        for c in reversed(coeffs):
            acc = self._mul_tuple(acc, z, k)
            acc = self._add_tuple(acc, self._smul_tuple(self._one_tuple(), c, k), k)
        return acc

    def _lift_frobenius_image(self):
        p, cap = self.p, self.cap
        z_res = _fp_powmod([0, 1], p, list(self.m_res), p)
        z = tuple((z_res + [0] * self.f)[: self.f])
        dm = tuple(i * c for i, c in enumerate(self.m) if i >= 1)
        cur = 1
        while cur < cap:
            cur = min(2 * cur, cap)
            fz = self._eval_int_poly(self.m, z, cur)
            dz = self._eval_int_poly(dm, z, cur)
            z = self._sub_tuple(z, self._mul_tuple(fz, self._inv_tuple(dz, cur), cur), cur)
        if any(self._eval_int_poly(self.m, z, cap)):
            raise ArithmeticError("Frobenius lift failed to satisfy m")
        return z

    # --- residue field F_{p^f} (used by matrix elimination) ---

    def gf_add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def gf_sub(self, a, b):
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def gf_mul(self, a, b):
        return tuple(c % self.p for c in self._mul_tuple(a, b, 1))

    def gf_inv(self, a):
        return tuple(c % self.p for c in self._inv_tuple(a, 1))

    def gf_is_zero(self, a):
        return not any(a)

    # --- scalar factory ---

    def make(self, coeffs, prec: int | None = None) -> "WittScalar":
        """Build a scalar from integer coefficients (any length, folded mod m)."""
        prec = self.cap if prec is None else prec
        if prec < 1 or prec > self.cap:
            raise PrecisionExhausted(f"precision {prec} outside [1, {self.cap}]")
        coeffs = [int(c) for c in coeffs]
        while len(coeffs) < self.f:
            coeffs.append(0)
        out = list(coeffs[: self.f])
        mod = self.pk[prec]
        for i in range(self.f, len(coeffs)):
            c = coeffs[i]
            if c:
                row = self._redrows[i - self.f]
                for j in range(self.f):
                    out[j] += c * row[j]
        return WittScalar(self, tuple(x % mod for x in out), prec)

    def from_int(self, n: int, prec: int | None = None) -> "WittScalar":
        return self.make([n], prec)

    def zero(self, prec: int | None = None) -> "WittScalar":
        return self.from_int(0, prec)

    def one(self, prec: int | None = None) -> "WittScalar":
        return self.from_int(1, prec)

    def random(self, rng, prec: int | None = None) -> "WittScalar":
        prec = self.cap if prec is None else prec
        mod = self.pk[prec]
        return WittScalar(self, tuple(rng.randrange(mod) for _ in range(self.f)), prec)

    def random_unit(self, rng, prec: int | None = None) -> "WittScalar":
        while True:
            x = self.random(rng, prec)
            if x.is_unit():
                return x

    def frobenius(self, x: "WittScalar") -> "WittScalar":
        if self.f == 1:
            return x
        k = x.prec
        acc = self._smul_tuple(self._one_tuple(), x.coeffs[0], k)
        for i in range(1, self.f):
            c = x.coeffs[i]
            if c:
                acc = self._add_tuple(acc, self._smul_tuple(self._spow[i - 1], c, k), k)
        return WittScalar(self, acc, k)


class WittScalar:
    """Element of W(F_{p^f}) known modulo p^prec."""

    __slots__ = ("ring", "coeffs", "prec")

    def __init__(self, ring: WittRing, coeffs: tuple[int, ...], prec: int):
        self.ring = ring
        self.coeffs = coeffs
        self.prec = prec

    # arithmetic combines precision by min(); representatives stay canonical

    def __add__(self, other):
        if not isinstance(other, WittScalar):
            return NotImplemented
        r = self.ring
        k = min(self.prec, other.prec)
        return WittScalar(r, r._add_tuple(self.coeffs, other.coeffs, k), k)

    def __sub__(self, other):
        if not isinstance(other, WittScalar):
            return NotImplemented
        r = self.ring
        k = min(self.prec, other.prec)
        return WittScalar(r, r._sub_tuple(self.coeffs, other.coeffs, k), k)

    def __neg__(self):
        r = self.ring
        mod = r.pk[self.prec]
        return WittScalar(r, tuple((-c) % mod for c in self.coeffs), self.prec)

    def __mul__(self, other):
        if not isinstance(other, WittScalar):
            return NotImplemented
        r = self.ring
        k = min(self.prec, other.prec)
        return WittScalar(r, r._mul_tuple(self.coeffs, other.coeffs, k), k)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers: use invert() first")
        r = self.ring
        acc = r.one(self.prec)
        base = self
        while n > 0:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def __eq__(self, other):
        # exact representation equality; use eq_at() for at-precision tests
        return (
            isinstance(other, WittScalar)
            and self.ring is other.ring
            and self.prec == other.prec
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((id(self.ring), self.coeffs, self.prec))

    def __repr__(self):
        if self.ring.f == 1:
            return f"W({self.coeffs[0]} ~p^{self.prec})"
        return f"W({list(self.coeffs)} ~p^{self.prec})"

    def frobenius(self) -> "WittScalar":
        return self.ring.frobenius(self)

    def is_unit(self) -> bool:
        return any(c % self.ring.p for c in self.coeffs)

    def invert(self) -> "WittScalar":
        if not self.is_unit():
            raise NotAUnit("cannot invert: zero modulo p")
        return WittScalar(self.ring, self.ring._inv_tuple(self.coeffs, self.prec), self.prec)

    def divide_exact_p(self, k: int = 1) -> "WittScalar":
        """Exact division by p^k; lowers precision by k."""
        if k == 0:
            return self
        new_prec = self.prec - k
        if new_prec < 1:
            raise PrecisionExhausted(f"division by p^{k} from precision {self.prec}")
        q = self.ring.pk[k]
        if any(c % q for c in self.coeffs):
            raise NotDivisible(f"not divisible by p^{k}")
        return WittScalar(self.ring, tuple(c // q for c in self.coeffs), new_prec)

    def mul_p_pow(self, k: int) -> "WittScalar":
        """Exact multiplication by p^k; raises precision up to the ring cap."""
        if k == 0:
            return self
        r = self.ring
        new_prec = min(self.prec + k, r.cap)
        mod = r.pk[new_prec]
        q = r.pk[k]
        return WittScalar(r, tuple((c * q) % mod for c in self.coeffs), new_prec)

    def valuation(self) -> int:
        """min v_p over coefficients; returns prec for a value that is zero
        at its own precision (nothing deeper can be certified)."""
        best = self.prec
        p = self.ring.p
        for c in self.coeffs:
            if c:
                v = 0
                while c % p == 0:
                    c //= p
                    v += 1
                best = min(best, v)
        return best

    def is_zero_at(self, k: int) -> bool:
        if self.prec < k:
            raise PrecisionExhausted(f"zero test at p^{k} but only {self.prec} digits known")
        q = self.ring.pk[k]
        return all(c % q == 0 for c in self.coeffs)

    def eq_at(self, other: "WittScalar", k: int) -> bool:
        return (self - other).is_zero_at(k)

    def truncate(self, k: int) -> "WittScalar":
        if k >= self.prec:
            return self
        if k < 1:
            raise PrecisionExhausted("cannot truncate below one digit")
        mod = self.ring.pk[k]
        return WittScalar(self.ring, tuple(c % mod for c in self.coeffs), k)

    def residue(self) -> tuple[int, ...]:
        return tuple(c % self.ring.p for c in self.coeffs)

    def lift_int(self) -> int:
        """Canonical integer representative (only for f = 1)."""
        if self.ring.f != 1:
            raise ValueError("lift_int needs f = 1")
        return self.coeffs[0]


def witt_invert(x: WittScalar) -> WittScalar:
    """Multiplicative inverse at the declared precision (Newton lifting)."""
    return x.invert()


def witt_frobenius(x: WittScalar) -> WittScalar:
    """The arithmetic Frobenius; identity when f = 1."""
    return x.frobenius()
