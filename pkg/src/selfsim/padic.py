"""Coset densities on the 3-adic integers at finite precision.

Everything here lives on the quotient ring Z/3^K: a window is realized
as its residue set mod 3^K, a density is a vector of rational weights
(one per depth-K coset, each of Haar measure 3^-K), and convolution and
the times-3 pushforward are exact group operations.  The three windows
of the ternary component system are unions of one coset per depth
k >= 2; at precision K all depths beyond K collapse onto a single tail
residue, so the realized set carries slightly more measure than the
window itself, and ``window_measure_bounds`` reports the gap.  The
solver reproduces the invariant density vector of the system as an
exact fixed point of the matrix convolution step.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ConvergenceError

SUBSTITUTION_COUNTS = ((1, 1, 1), (1, 1, 1), (0, 1, 2))
DEFAULT_PRECISION = 5


class PadicDensity:
    """Rational density on depth-``precision`` cosets of the 3-adics.

    ``weights[r]`` is the constant density value on r + 3^K Z_3, so the
    total mass is (sum of weights) / 3^K, an exact Fraction.  Weights
    must be nonnegative ints or Fractions; floats are refused to keep
    every later comparison exact.
    """

    __slots__ = ("precision", "weights")

    def __init__(self, precision: int, weights: Sequence):
        if precision < 1:
            raise ValueError("precision must be at least 1")
        n = 3**precision
        ws = []
        for w in weights:
            if isinstance(w, float) or not isinstance(w, (int, Fraction)):
                raise ValueError("weights must be exact rationals")
            w = Fraction(w)
            if w < 0:
                raise ValueError("weights must be nonnegative")
            ws.append(w)
        if len(ws) != n:
            raise ValueError(f"need 3**{precision} = {n} weights, got {len(ws)}")
        self.precision = precision
        self.weights = tuple(ws)

    @classmethod
    def point(cls, residue: int, precision: int) -> "PadicDensity":
        """Unit mass concentrated on one depth-``precision`` coset."""
        n = 3**precision
        ws = [Fraction(0)] * n
        ws[residue % n] = Fraction(n)
        return cls(precision, ws)

    @classmethod
    def uniform(cls, precision: int, mass=1) -> "PadicDensity":
        """Constant density of the given total mass on all of Z_3."""
        return cls(precision, [Fraction(mass)] * 3**precision)

    @classmethod
    def on_residues(cls, residues, precision: int, mass=1) -> "PadicDensity":
        """Uniform density of the given total mass on a residue set."""
        residues = set(residues)
        if not residues:
            raise ValueError("residue set is empty")
        n = 3**precision
        value = Fraction(mass) * n / len(residues)
        ws = [Fraction(0)] * n
        for r in residues:
            ws[r % n] = value
        return cls(precision, ws)

    @property
    def mass(self) -> Fraction:
        return sum(self.weights, Fraction(0)) / 3**self.precision

    def support(self) -> frozenset:
        return frozenset(r for r, w in enumerate(self.weights) if w)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PadicDensity):
            return NotImplemented
        return self.precision == other.precision and self.weights == other.weights

    def __hash__(self) -> int:
        return hash((self.precision, self.weights))

    def __repr__(self) -> str:
        nonzero = len(self.support())
        return (
            f"PadicDensity(precision={self.precision}, mass={self.mass}, "
            f"support={nonzero} residues)"
        )


@dataclass(frozen=True)
class PadicWindowSpec:
    """One of the three component windows realized mod 3**precision."""

    which: int
    precision: int
    residues: frozenset

    def contains_integer(self, n: int) -> bool:
        """Exact window membership for an integer.

        The realized residue set decides membership correctly as long as
        |n| stays below (3^K - 3)/2; beyond that the collapsed tail
        residue can produce false positives, so the call refuses.
        """
        bound = (3**self.precision - 3) // 2
        if abs(n) >= bound:
            raise ValueError(
                f"|{n}| >= {bound}: membership undecidable at precision "
                f"{self.precision}, increase it"
            )
        return n % 3**self.precision in self.residues


def _window_which(spec) -> int:
    which = spec.which if isinstance(spec, PadicWindowSpec) else spec
    if which not in (1, 2, 3):
        raise ValueError("window index must be 1, 2, or 3")
    return which


def _coset_base(which: int, k: int) -> int:
    """Base point of the depth-k coset of window ``which``.

    Window 1 uses 1 + 3 + ... + 3^(k-2); window 2 sits two to its right;
    window 3 mirrors it around 1 (its depth-2 part is the subgroup
    9 Z_3, handled by the caller).
    """
    base = (3 ** (k - 1) - 1) // 2
    if which == 1:
        return base
    if which == 2:
        return base + 2
    return 1 - base


def _residues(which: int, precision: int, with_tail: bool) -> frozenset:
    n = 3**precision
    out = set()
    start = 3 if which == 3 else 2
    if which == 3:
        out.update(range(0, n, 9))
    for k in range(start, precision + 1):
        base = _coset_base(which, k) % 3**k
        out.update((base + m * 3**k) % n for m in range(3 ** (precision - k)))
    if with_tail:
        out.add(_coset_base(which, precision + 1) % n)
    return frozenset(out)


def window_residues(spec, precision: int) -> frozenset:
    """Residue set of a window mod 3**precision.

    ``spec`` is a window index in {1, 2, 3} or a PadicWindowSpec.  The
    result is the union of the depth 2..precision cosets truncated to
    this precision, plus the single residue shared by every deeper
    coset.  Deterministic; precision must be at least 2.
    """
    if precision < 2:
        raise ValueError("precision must be at least 2")
    return _residues(_window_which(spec), precision, with_tail=True)


def padic_window(spec, precision: int) -> PadicWindowSpec:
    """Realize a window as a PadicWindowSpec at the given precision."""
    which = _window_which(spec)
    return PadicWindowSpec(which, precision, window_residues(which, precision))


def window_measure_bounds(spec, precision: int) -> tuple:
    """Lower and upper Fraction bounds on a window's Haar measure.

    The lower bound counts only the fully resolved cosets (depths up to
    the precision) and increases to 1/6; the upper bound adds the tail
    residue covering all deeper cosets and decreases to the same limit.
    The realized set of ``window_residues`` has the upper bound's
    measure.
    """
    if precision < 2:
        raise ValueError("precision must be at least 2")
    which = _window_which(spec)
    n = 3**precision
    inner = _residues(which, precision, with_tail=False)
    outer = _residues(which, precision, with_tail=True)
    return Fraction(len(inner), n), Fraction(len(outer), n)


def padic_convolve(u: PadicDensity, v: PadicDensity) -> PadicDensity:
    """Group convolution on Z/3^K: (u * v)[t] = 3^-K sum_r u[r] v[t - r].

    Mass is multiplicative, exactly.
    """
    if u.precision != v.precision:
        raise ValueError(
            f"precision mismatch: {u.precision} != {v.precision}"
        )
    n = 3**u.precision
    acc = [Fraction(0)] * n
    for r, wu in enumerate(u.weights):
        if not wu:
            continue
        for t, wv in enumerate(v.weights):
            if wv:
                acc[(r + t) % n] += wu * wv
    scale = Fraction(1, n)
    return PadicDensity(u.precision, [w * scale for w in acc])


def padic_scale(u: PadicDensity) -> PadicDensity:
    """Pushforward of u under x -> 3x, at unchanged precision.

    The image lands on 3 Z_3; the three depth-K cosets above each image
    coset pool their weight there, so the uniform unit-mass density
    becomes weight 3 on the residues divisible by 3.  Mass is preserved.
    """
    n = 3**u.precision
    out = [Fraction(0)] * n
    for r, w in enumerate(u.weights):
        if w:
            out[(3 * r) % n] += w
    return PadicDensity(u.precision, out)


def padic_maximal_family(i: int, j: int, precision: int, refine: bool = False) -> frozenset:
    """All translations b with 3 W_j + b inside W_i, mod 3**precision.

    Brute force over every residue b, with W_j realized one depth
    shallower so that 3 w + b is determined mod 3**precision.  The raw
    result is a full coset mod 9 plus, for some (i, j), an isolated
    translation that maps the window tail into itself; such points are
    genuine members but carry no Haar measure.  ``refine`` keeps only
    translations whose entire depth-K cylinder still qualifies one depth
    deeper, which strips the isolated points and leaves the uniform core
    that the fixed-point solver needs.
    """
    if precision < 3:
        raise ValueError("precision must be at least 3")
    wi = window_residues(i, precision)
    wj = window_residues(j, precision - 1)
    n = 3**precision
    fam = {b for b in range(n) if all((3 * w + b) % n in wi for w in wj)}
    if refine:
        deeper = padic_maximal_family(i, j, precision + 1)
        fam = {b for b in fam if all(b + t * n in deeper for t in range(3))}
    return frozenset(fam)


def _add(u: PadicDensity, v: PadicDensity) -> PadicDensity:
    return PadicDensity(u.precision, [a + b for a, b in zip(u.weights, v.weights)])


def solve_padic_system(precision: int = DEFAULT_PRECISION, max_iter=None) -> tuple:
    """Stationary density vector of the three-component coset system.

    Entry (i, j) carries mass SUBSTITUTION_COUNTS[i][j] / 3, spread
    uniformly over the refined maximal family; the mass vector is
    (1, 1, 1).  Iteration starts from unit point masses at 0 and stops
    as soon as a full step reproduces its input exactly, which happens
    within ``precision`` steps.  Returns the three component densities.
    """
    if precision < 4:
        raise ValueError("precision must be at least 4")
    if max_iter is None:
        max_iter = precision
    entries = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            count = SUBSTITUTION_COUNTS[i][j]
            if count == 0:
                continue
            fam = padic_maximal_family(i + 1, j + 1, precision, refine=True)
            entries[i][j] = PadicDensity.on_residues(
                fam, precision, Fraction(count, 3)
            )
    comps = tuple(PadicDensity.point(0, precision) for _ in range(3))
    for _ in range(max_iter):
        pushed = [padic_scale(g) for g in comps]
        new = []
        for i in range(3):
            acc = None
            for j in range(3):
                entry = entries[i][j]
                if entry is None:
                    continue
                piece = padic_convolve(entry, pushed[j])
                acc = piece if acc is None else _add(acc, piece)
            new.append(acc)
        new = tuple(new)
        if new == comps:
            return comps
        comps = new
    raise ConvergenceError(
        f"coset convolution not stationary after {max_iter} steps"
    )
