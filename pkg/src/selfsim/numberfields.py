"""Exact arithmetic in Z[sqrt2], its fraction field, and the eighth cyclotomic ring.

Elements of Z[sqrt2] are pairs (a, b) standing for a + b*sqrt(2); the ring
automorphism `star` sends sqrt(2) to -sqrt(2).  QuadRat is the fraction field
with an integer denominator kept in lowest terms.  CycloInt is Z[xi] with
xi = exp(i*pi/4); there `star` sends xi to xi**3, which is the internal-space
embedding used by the octagonal cut-and-project scheme.

All order comparisons are exact: the sign of a + b*sqrt(2) is decided from the
signs of a, b and the integer comparison a**2 vs 2*b**2, never from floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import gcd
from typing import Iterator, Union

from .errors import ResourceCapError

SQRT2 = math.sqrt(2.0)

#: default cap on the number of candidate lattice points an enumeration may visit
DEFAULT_ENUM_CAP = 20_000_000


def _sign_quad(a: int, b: int) -> int:
    """Exact sign of a + b*sqrt(2)."""
    if a == 0 and b == 0:
        return 0
    if a >= 0 and b >= 0:
        return 1
    if a <= 0 and b <= 0:
        return -1
    # mixed signs: compare a**2 with 2*b**2
    if a > 0:  # b < 0
        return 1 if a * a > 2 * b * b else (-1 if a * a < 2 * b * b else 0)
    # a < 0, b > 0
    return -1 if a * a > 2 * b * b else (1 if a * a < 2 * b * b else 0)


@total_ordering
@dataclass(frozen=True)
class QuadInt:
    """a + b*sqrt(2) with integer a, b."""

    a: int
    b: int

    @classmethod
    def from_int(cls, x: int) -> "QuadInt":
        return cls(x, 0)

    def star(self) -> "QuadInt":
        """Galois conjugate: sqrt(2) -> -sqrt(2)."""
        return QuadInt(self.a, -self.b)

    def embed(self) -> float:
        return self.a + self.b * SQRT2

    def embed_star(self) -> float:
        return self.a - self.b * SQRT2

    def norm(self) -> int:
        return self.a * self.a - 2 * self.b * self.b

    def sign(self) -> int:
        return _sign_quad(self.a, self.b)

    def __add__(self, other: "QuadIntLike") -> "QuadInt":
        other = _as_quadint(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadInt(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other: "QuadIntLike") -> "QuadInt":
        other = _as_quadint(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadInt(self.a - other.a, self.b - other.b)

    def __rsub__(self, other: "QuadIntLike") -> "QuadInt":
        other = _as_quadint(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __neg__(self) -> "QuadInt":
        return QuadInt(-self.a, -self.b)

    def __mul__(self, other: "QuadIntLike") -> "QuadInt":
        other = _as_quadint(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadInt(self.a * other.a + 2 * self.b * other.b,
                       self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "QuadInt":
        if n < 0:
            raise ValueError("negative powers leave Z[sqrt2]")
        out = QuadInt(1, 0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self.a == other and self.b == 0
        if isinstance(other, QuadInt):
            return self.a == other.a and self.b == other.b
        if isinstance(other, QuadRat):
            return QuadRat(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        # agree with hash(int) when the element is rational
        return hash(self.a) if self.b == 0 else hash((self.a, self.b))

    def __lt__(self, other: object) -> bool:
        diff = _as_quadrat(other)
        if diff is NotImplemented:
            return NotImplemented
        return (QuadRat(self) - diff).sign() < 0

    def __float__(self) -> float:
        return self.embed()

    def __str__(self) -> str:
        return f"{self.a}{self.b:+d}*sqrt2"


QuadIntLike = Union[QuadInt, int]


def _as_quadint(x: object):
    if isinstance(x, QuadInt):
        return x
    if isinstance(x, int):
        return QuadInt(x, 0)
    return NotImplemented


@total_ordering
@dataclass(frozen=True)
class QuadRat:
    """Element of Q(sqrt2) written num/den with den > 0 in lowest terms."""

    num: QuadInt
    den: int = 1

    def __post_init__(self) -> None:
        num, den = self.num, self.den
        if isinstance(num, int):
            num = QuadInt(num, 0)
        if den == 0:
            raise ZeroDivisionError("QuadRat with zero denominator")
        if den < 0:
            num, den = -num, -den
        g = gcd(gcd(abs(num.a), abs(num.b)), den)
        if g > 1:
            num = QuadInt(num.a // g, num.b // g)
            den //= g
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def from_fraction(cls, q: Fraction) -> "QuadRat":
        return cls(QuadInt(q.numerator, 0), q.denominator)

    def star(self) -> "QuadRat":
        return QuadRat(self.num.star(), self.den)

    def embed(self) -> float:
        return self.num.embed() / self.den

    def embed_star(self) -> float:
        return self.num.embed_star() / self.den

    def sign(self) -> int:
        return self.num.sign()

    def __add__(self, other: "QuadRatLike") -> "QuadRat":
        other = _as_quadrat(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadRat(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other: "QuadRatLike") -> "QuadRat":
        other = _as_quadrat(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: "QuadRatLike") -> "QuadRat":
        other = _as_quadrat(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __neg__(self) -> "QuadRat":
        return QuadRat(-self.num, self.den)

    def __mul__(self, other: "QuadRatLike") -> "QuadRat":
        other = _as_quadrat(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadRat(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other: "QuadRatLike") -> "QuadRat":
        other = _as_quadrat(other)
        if other is NotImplemented:
            return NotImplemented
        n = other.num.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt2)")
        # 1/(p/q) = q * conj(p) / N(p)
        return QuadRat(self.num * other.num.star() * other.den, self.den * n)

    def __rtruediv__(self, other: "QuadRatLike") -> "QuadRat":
        other = _as_quadrat(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __abs__(self) -> "QuadRat":
        return self if self.sign() >= 0 else -self

    def __eq__(self, other: object) -> bool:
        other = _as_quadrat(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash(self.num) if self.den == 1 else hash((self.num, self.den))

    def __lt__(self, other: object) -> bool:
        other = _as_quadrat(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).sign() < 0

    def __float__(self) -> float:
        return self.embed()

    def __str__(self) -> str:
        return f"({self.num})/{self.den}" if self.den != 1 else str(self.num)


QuadRatLike = Union[QuadRat, QuadInt, int, Fraction]


def _as_quadrat(x: object):
    if isinstance(x, QuadRat):
        return x
    if isinstance(x, QuadInt):
        return QuadRat(x, 1)
    if isinstance(x, int):
        return QuadRat(QuadInt(x, 0), 1)
    if isinstance(x, Fraction):
        return QuadRat(QuadInt(x.numerator, 0), x.denominator)
    return NotImplemented


# handy constants
SILVER = QuadInt(1, 1)          # 1 + sqrt2, the silver mean
SILVER_CONJ = QuadInt(1, -1)    # 1 - sqrt2 = -1/silver
HALF_SQRT2 = QuadRat(QuadInt(0, 1), 2)   # sqrt2/2 = 1/sqrt2


@dataclass(frozen=True)
class CycloInt:
    """c0 + c1*xi + c2*xi^2 + c3*xi^3 with xi = exp(i*pi/4), xi^4 = -1."""

    c0: int
    c1: int
    c2: int
    c3: int

    @classmethod
    def from_int(cls, x: int) -> "CycloInt":
        return cls(x, 0, 0, 0)

    @classmethod
    def xi_power(cls, j: int) -> "CycloInt":
        j %= 8
        sign = -1 if j >= 4 else 1
        coef = [0, 0, 0, 0]
        coef[j % 4] = sign
        return cls(*coef)

    def coeffs(self) -> tuple[int, int, int, int]:
        return (self.c0, self.c1, self.c2, self.c3)

    def star(self) -> "CycloInt":
        """Galois automorphism xi -> xi^3 (the internal-space star map)."""
        return CycloInt(self.c0, self.c3, -self.c2, self.c1)

    def embed(self) -> complex:
        s = SQRT2 / 2.0
        return complex(self.c0 + (self.c1 - self.c3) * s,
                       self.c2 + (self.c1 + self.c3) * s)

    def embed_star(self) -> complex:
        return self.star().embed()

    def embed_exact(self) -> tuple[QuadRat, QuadRat]:
        """Real and imaginary parts as exact elements of Q(sqrt2)."""
        re = QuadRat(QuadInt(2 * self.c0, self.c1 - self.c3), 2)
        im = QuadRat(QuadInt(2 * self.c2, self.c1 + self.c3), 2)
        return re, im

    def __add__(self, other: "CycloInt") -> "CycloInt":
        if isinstance(other, int):
            other = CycloInt.from_int(other)
        if not isinstance(other, CycloInt):
            return NotImplemented
        return CycloInt(self.c0 + other.c0, self.c1 + other.c1,
                        self.c2 + other.c2, self.c3 + other.c3)

    __radd__ = __add__

    def __sub__(self, other: "CycloInt") -> "CycloInt":
        return self + (-other)

    def __neg__(self) -> "CycloInt":
        return CycloInt(-self.c0, -self.c1, -self.c2, -self.c3)

    def __mul__(self, other: "CycloInt") -> "CycloInt":
        if isinstance(other, int):
            other = CycloInt.from_int(other)
        if not isinstance(other, CycloInt):
            return NotImplemented
        u = self.coeffs()
        v = other.coeffs()
        out = [0, 0, 0, 0]
        for i in range(4):
            if u[i] == 0:
                continue
            for j in range(4):
                k = i + j
                if k < 4:
                    out[k] += u[i] * v[j]
                else:
                    out[k - 4] -= u[i] * v[j]  # xi^4 = -1
        return CycloInt(*out)

    __rmul__ = __mul__

    def __str__(self) -> str:
        return f"{self.c0}{self.c1:+d}xi{self.c2:+d}xi2{self.c3:+d}xi3"


# ---------------------------------------------------------------------------
# lattice enumeration
# ---------------------------------------------------------------------------

def _frac(x: Union[int, float, Fraction]) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def enumerate_quad_range(phys_lo, phys_hi, star_lo, star_hi,
                         max_candidates: int = DEFAULT_ENUM_CAP) -> list[QuadInt]:
    """All x in Z[sqrt2] with embed(x) in [phys_lo, phys_hi] and
    embed_star(x) in [star_lo, star_hi].  Bounds may be int, float or
    Fraction and are honoured exactly.  Sorted by physical embedding.
    """
    phys_lo, phys_hi = _frac(phys_lo), _frac(phys_hi)
    star_lo, star_hi = _frac(star_lo), _frac(star_hi)
    if phys_lo > phys_hi or star_lo > star_hi:
        return []
    plo, phi = QuadRat.from_fraction(phys_lo), QuadRat.from_fraction(phys_hi)
    slo, shi = QuadRat.from_fraction(star_lo), QuadRat.from_fraction(star_hi)

    # 2a = x + x*  gives the complete integer range for a
    a_min = math.ceil(float(phys_lo + star_lo) / 2 - 1e-9)
    a_max = math.floor(float(phys_hi + star_hi) / 2 + 1e-9)
    # the b-loop intersects both constraints, so the narrower one rules
    b_per_a = min(float(star_hi - star_lo), float(phys_hi - phys_lo)) / SQRT2 + 4
    if (a_max - a_min + 1) * b_per_a > max_candidates:
        raise ResourceCapError(
            f"enumeration would visit more than {max_candidates} candidates")

    out: list[QuadInt] = []
    f_star_lo, f_star_hi = float(star_lo), float(star_hi)
    f_phys_lo, f_phys_hi = float(phys_lo), float(phys_hi)
    for a in range(a_min, a_max + 1):
        # star constraint: a - b*sqrt2 in [star_lo, star_hi]
        b_lo = (a - f_star_hi) / SQRT2
        b_hi = (a - f_star_lo) / SQRT2
        # physical constraint: a + b*sqrt2 in [phys_lo, phys_hi]
        b_lo = max(b_lo, (f_phys_lo - a) / SQRT2)
        b_hi = min(b_hi, (f_phys_hi - a) / SQRT2)
        for b in range(math.ceil(b_lo - 1e-6) - 1, math.floor(b_hi + 1e-6) + 2):
            x = QuadInt(a, b)
            xr = QuadRat(x)
            xs = xr.star()
            if plo <= xr <= phi and slo <= xs <= shi:
                out.append(x)
    out.sort(key=lambda x: (x.embed(), x.a, x.b))
    return out


def _int_range(lo: float, hi: float) -> Iterator[int]:
    return range(math.ceil(lo - 1e-9), math.floor(hi + 1e-9) + 1)


def enumerate_cyclo_box(phys_bound, star_bound,
                        max_candidates: int = DEFAULT_ENUM_CAP) -> list[CycloInt]:
    """All x in Z[xi] whose physical embedding lies in the sup-norm box
    [-phys_bound, phys_bound]^2 and whose star image lies in
    [-star_bound, star_bound]^2.  Membership is decided exactly.
    """
    P, S = _frac(phys_bound), _frac(star_bound)
    if P < 0 or S < 0:
        return []
    pq = QuadRat.from_fraction(P)
    sq = QuadRat.from_fraction(S)
    fP, fS = float(P), float(S)
    half = (fP + fS) / 2.0
    uv_bound = (fP + fS) / SQRT2 * 2  # |c1 +- c3| <= (P+S)*sqrt2/2, doubled for slack

    # rough candidate count before looping
    n_uv = (2 * math.floor(uv_bound) + 1) ** 2 / 2
    n_c = (2 * math.floor(half) + 2) ** 2
    if n_uv * n_c > max_candidates:
        raise ResourceCapError(
            f"enumeration would visit more than {max_candidates} candidates")

    s = SQRT2 / 2.0
    out: list[CycloInt] = []
    visited = 0
    for u in _int_range(-uv_bound, uv_bound):        # u = c1 + c3
        for v in _int_range(-uv_bound, uv_bound):    # v = c1 - c3
            if (u + v) % 2:
                continue
            c1 = (u + v) // 2
            c3 = (u - v) // 2
            # re(x) = c0 + v*s, re(x*) = c0 - v*s
            c0_lo = max(-fP - v * s, -fS + v * s)
            c0_hi = min(fP - v * s, fS + v * s)
            # im(x) = c2 + u*s, im(x*) = u*s - c2
            c2_lo = max(-fP - u * s, u * s - fS)
            c2_hi = min(fP - u * s, u * s + fS)
            for c0 in _int_range(c0_lo - 0.5, c0_hi + 0.5):
                for c2 in _int_range(c2_lo - 0.5, c2_hi + 0.5):
                    visited += 1
                    if visited > max_candidates:
                        raise ResourceCapError(
                            f"enumeration exceeded {max_candidates} candidates")
                    x = CycloInt(c0, c1, c2, c3)
                    re, im = x.embed_exact()
                    if not (-pq <= re <= pq and -pq <= im <= pq):
                        continue
                    sre, sim = x.star().embed_exact()
                    if not (-sq <= sre <= sq and -sq <= sim <= sq):
                        continue
                    out.append(x)
    out.sort(key=lambda x: (x.embed().real, x.embed().imag, x.coeffs()))
    return out


def enumerate_in_box(kind: str, physical_bound, star_bound,
                     max_candidates: int = DEFAULT_ENUM_CAP):
    """Complete list of ring elements in a symmetric physical/star box.

    kind "quad" works in Z[sqrt2] (dimension 1), kind "cyclo" in Z[xi]
    (dimension 2, sup-norm boxes).  Raises ResourceCapError when the
    candidate search region is larger than max_candidates.
    """
    if kind == "quad":
        bound = _frac(physical_bound)
        sbound = _frac(star_bound)
        return enumerate_quad_range(-bound, bound, -sbound, sbound, max_candidates)
    if kind == "cyclo":
        return enumerate_cyclo_box(physical_bound, star_bound, max_candidates)
    raise ValueError(f"unknown ring kind: {kind!r}")
