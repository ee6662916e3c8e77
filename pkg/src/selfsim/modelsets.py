"""Cut-and-project schemes and the point sets they generate.

A scheme embeds a ring of algebraic integers as a lattice in physical x
internal space; a model set collects the ring elements whose star image
falls in a compact window.  Substitution tilings provide an independent
route to the same point sets, used as a cross-check.  The Weyl harness
averages an internal-space density over enumerated patches and compares
against the volume-theoretic limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .compactsets import ConvexPolygon, IntervalSet
from .measures import GridDensity
from .numberfields import (
    CycloInt,
    QuadInt,
    QuadRat,
    enumerate_cyclo_box,
    enumerate_quad_range,
)


def gram_covolume(rows) -> float:
    """Volume of the fundamental domain spanned by the given embedded
    basis rows, via the Gram determinant."""
    rows = np.asarray(rows, dtype=float)
    vol = math.sqrt(abs(np.linalg.det(rows @ rows.T)))
    if vol <= 0:
        raise ValueError("embedded basis is degenerate")
    return vol


class CutProjectScheme:
    """Ring embedded on both sides: kind "quad" is Z[sqrt2] in R x R,
    kind "cyclo" is Z[xi] (eighth root of unity) in C x C."""

    def __init__(self, kind: str, basis: tuple):
        if kind not in ("quad", "cyclo"):
            raise ValueError(f"unknown scheme kind: {kind!r}")
        self.kind = kind
        self.basis = tuple(basis)
        if kind == "quad":
            self.phys_dim = self.internal_dim = 1
            rows = [[x.embed(), x.embed_star()] for x in self.basis]
        else:
            self.phys_dim = self.internal_dim = 2
            rows = []
            for x in self.basis:
                z, zs = x.embed(), x.embed_star()
                rows.append([z.real, z.imag, zs.real, zs.imag])
        self.covolume = gram_covolume(rows)

    @classmethod
    def silver(cls) -> "CutProjectScheme":
        return cls("quad", (QuadInt(1, 0), QuadInt(0, 1)))

    @classmethod
    def octagonal(cls) -> "CutProjectScheme":
        return cls(
            "cyclo",
            (
                CycloInt(1, 0, 0, 0),
                CycloInt(0, 1, 0, 0),
                CycloInt(0, 0, 1, 0),
                CycloInt(0, 0, 0, 1),
            ),
        )


def covolume(scheme: CutProjectScheme) -> float:
    return scheme.covolume


def project_points(scheme: CutProjectScheme, window, radius) -> list:
    """All ring elements within the closed ball of the given radius whose
    star image lies in the window, sorted by physical position.

    Ball and window membership are both decided exactly: the radius is
    taken at its binary-float value and windows with exact endpoints or
    vertices keep their boundary points.
    """
    if float(radius) <= 0:
        raise ValueError("radius must be positive")
    r = Fraction(radius)
    if scheme.kind == "quad":
        if not isinstance(window, IntervalSet):
            raise TypeError("quad schemes use IntervalSet windows")
        star_lo = float(window.lo) - 1e-6
        star_hi = float(window.hi) + 1e-6
        candidates = enumerate_quad_range(-r, r, star_lo, star_hi)
        if window.is_exact:
            return [x for x in candidates if window.contains(x.star(), eps=0)]
        return [x for x in candidates if window.contains(x.embed_star(), eps=1e-12)]

    if not isinstance(window, ConvexPolygon):
        raise TypeError("cyclo schemes use ConvexPolygon windows")
    xlo, ylo, xhi, yhi = (float(v) for v in window.bbox())
    star_bound = max(abs(xlo), abs(ylo), abs(xhi), abs(yhi)) + 1e-6
    candidates = enumerate_cyclo_box(r, star_bound)
    rsq = QuadRat(QuadInt(r.numerator**2, 0), r.denominator**2)
    out = []
    for x in candidates:
        re, im = x.embed_exact()
        if re * re + im * im > rsq:
            continue
        sre, sim = x.star().embed_exact()
        if window.is_exact:
            if window.contains((sre, sim), eps=0):
                out.append(x)
        elif window.contains((float(sre), float(sim)), eps=1e-12):
            out.append(x)
    out.sort(key=lambda x: (x.embed().real, x.embed().imag))
    return out


# ---------------------------------------------------------------------------
# substitution systems


class SubstitutionRule:
    """Letter replacement rule with exact tile lengths.

    The lengths must solve the inflation equation: one factor Q with
    Q * len(t) = sum of the image letters' lengths, for every letter.
    """

    def __init__(self, alphabet: Sequence[str], images: dict, lengths: dict):
        self.alphabet = tuple(alphabet)
        self.images = {t: str(images[t]) for t in self.alphabet}
        self.lengths = {t: lengths[t] for t in self.alphabet}
        for t in self.alphabet:
            if not self.images[t]:
                raise ValueError(f"letter {t!r} has an empty image")
            if any(u not in self.alphabet for u in self.images[t]):
                raise ValueError(f"image of {t!r} uses letters outside the alphabet")
            if float(self.lengths[t]) <= 0:
                raise ValueError(f"tile length of {t!r} must be positive")
        first = self.alphabet[0]
        q = self._image_length(first) / _as_exact(self.lengths[first])
        for t in self.alphabet:
            if self._image_length(t) != q * _as_exact(self.lengths[t]):
                raise ValueError(
                    f"lengths do not solve the inflation equation at letter {t!r}"
                )
        self.inflation = q

    def _image_length(self, t: str) -> QuadRat:
        total = _as_exact(0)
        for u in self.images[t]:
            total = total + _as_exact(self.lengths[u])
        return total

    def expand(self, word: str) -> str:
        return "".join(self.images[t] for t in word)


def _as_exact(x) -> QuadRat:
    if isinstance(x, QuadRat):
        return x
    if isinstance(x, QuadInt):
        return QuadRat(x, 1)
    if isinstance(x, int):
        return QuadRat(QuadInt(x, 0), 1)
    if isinstance(x, Fraction):
        return QuadRat(QuadInt(x.numerator, 0), x.denominator)
    raise TypeError(f"tile lengths must be exact scalars, got {type(x).__name__}")


@dataclass(frozen=True)
class SubstitutionOrbit:
    """Tile coordinates of a finite patch of the 2-sided fixed point."""

    positions: dict
    left_word: str
    right_word: str
    lo: object
    hi: object

    def all_positions(self) -> list:
        merged = [p for pts in self.positions.values() for p in pts]
        merged.sort(key=float)
        return merged


def substitution_orbit(
    rule: SubstitutionRule,
    seed: tuple,
    generations: int,
    endpoint: str = "left",
) -> SubstitutionOrbit:
    """Expand a legal 2-letter seed about the origin and coordinatize.

    The right seed letter's tile starts at 0 and the left one ends at 0.
    Legality (image of the left letter ends with it, image of the right
    letter starts with it) makes each generation extend the previous.
    Returns per-letter tile endpoints, left or right per the flag, in
    exact arithmetic.
    """
    if endpoint not in ("left", "right"):
        raise ValueError("endpoint must be 'left' or 'right'")
    left, right = seed
    if left not in rule.alphabet or right not in rule.alphabet:
        raise ValueError("seed letters must belong to the alphabet")
    if not rule.images[left].endswith(left):
        raise ValueError(f"illegal seed: image of {left!r} does not end with it")
    if not rule.images[right].startswith(right):
        raise ValueError(f"illegal seed: image of {right!r} does not start with it")
    if generations < 0:
        raise ValueError("generations must be nonnegative")
    left_word, right_word = left, right
    for _ in range(generations):
        left_word = rule.expand(left_word)
        right_word = rule.expand(right_word)
    positions = {t: [] for t in rule.alphabet}
    total = 0
    for t in left_word:
        total = rule.lengths[t] + total
    lo = -total
    pos = lo
    for t in left_word + right_word:
        length = rule.lengths[t]
        positions[t].append(pos if endpoint == "left" else pos + length)
        pos = pos + length
    return SubstitutionOrbit(
        positions={t: tuple(v) for t, v in positions.items()},
        left_word=left_word,
        right_word=right_word,
        lo=lo,
        hi=pos,
    )


@dataclass(frozen=True)
class CrosscheckReport:
    equal: bool
    only_left: tuple
    only_right: tuple
    count_left: int
    count_right: int
    radius: float

    def __bool__(self) -> bool:
        return self.equal


def crosscheck_modelset(left_points, right_points, radius) -> CrosscheckReport:
    """Set equality of two point lists restricted to [-radius, radius]
    (1D positions; elements compared exactly)."""
    rad = float(radius)

    def clip(points):
        return {x for x in points if abs(float(x)) <= rad + 1e-9}

    a, b = clip(left_points), clip(right_points)
    only_a = tuple(sorted(a - b, key=float))
    only_b = tuple(sorted(b - a, key=float))
    return CrosscheckReport(
        equal=not only_a and not only_b,
        only_left=only_a,
        only_right=only_b,
        count_left=len(a),
        count_right=len(b),
        radius=rad,
    )


# ---------------------------------------------------------------------------
# translation regions, densities, Weyl averages


def maximal_translation_region(w_i, w_j, a):
    """Largest region of translations b with A W_j + b inside W_i.

    Intervals: the exact interval [min W_i - min A W_j, max W_i - max A W_j],
    or a singleton when the widths agree; None when A W_j is too wide.
    Polygons: the erosion W_i minus the A-image of W_j (None when empty).
    The interval formula uses the windows' hulls, so it is intended for
    single-interval windows.
    """
    if isinstance(w_i, IntervalSet) and isinstance(w_j, IntervalSet):
        image = w_j.scale(a)
        lo = w_i.lo - image.lo
        hi = w_i.hi - image.hi
        if float(lo) > float(hi):
            return None
        return IntervalSet([(lo, hi)])
    if isinstance(w_i, ConvexPolygon) and isinstance(w_j, ConvexPolygon):
        matrix = a if isinstance(a, tuple) else ((a, 0), (0, a))
        return w_i.erode(w_j.linear_image(matrix))
    raise TypeError("windows must both be IntervalSet or both ConvexPolygon")


def theoretical_density(scheme: CutProjectScheme, window) -> float:
    """Expected points per unit physical volume: theta(window)/covolume."""
    if isinstance(window, IntervalSet):
        measure = float(window.measure())
    elif isinstance(window, ConvexPolygon):
        measure = float(window.area)
    else:
        raise TypeError("window must be IntervalSet or ConvexPolygon")
    return measure / scheme.covolume


@dataclass(frozen=True)
class WeylRow:
    radius: float
    center: object
    average: float
    limit: float
    abs_error: float


def weyl_average(
    scheme: CutProjectScheme,
    points: Sequence,
    g: GridDensity,
    radii: Sequence[float],
    centers: Sequence = (0.0,),
) -> list:
    """Ball averages of g evaluated at the star images of the points.

    For each radius r and center a, sums g(x*) over points in the closed
    ball B_r(a) and divides by its volume (length 2r in 1D, area pi r^2
    in 2D); the limit column holds mass(g)/covolume.  The points must
    come from the window supporting g; each requested ball must fit in
    the enumerated patch.
    """
    if len(points) == 0:
        raise ValueError("no points to average over")
    if scheme.phys_dim == 1:
        pos = np.array([x.embed() for x in points])
        star = np.array([x.embed_star() for x in points])
        patch = float(np.max(np.abs(pos)))
    else:
        z = [x.embed() for x in points]
        pos = np.array([(w.real, w.imag) for w in z])
        zs = [x.embed_star() for x in points]
        star = np.array([(w.real, w.imag) for w in zs])
        patch = float(np.max(np.hypot(pos[:, 0], pos[:, 1])))
    limit = g.mass / scheme.covolume
    rows = []
    for r in radii:
        r = float(r)
        for center in centers:
            if scheme.phys_dim == 1:
                c = float(center)
                if abs(c) + r > patch + 1e-9:
                    raise ValueError(
                        f"ball of radius {r} at {c} exceeds the enumerated patch"
                    )
                mask = np.abs(pos - c) <= r + 1e-12
                values = [g.interpolate(s) for s in star[mask]]
            else:
                cx, cy = float(center[0]), float(center[1])
                if math.hypot(cx, cy) + r > patch + 1e-9:
                    raise ValueError(
                        f"ball of radius {r} at {center} exceeds the enumerated patch"
                    )
                d = np.hypot(pos[:, 0] - cx, pos[:, 1] - cy)
                mask = d <= r + 1e-12
                values = [g.interpolate((sx, sy)) for sx, sy in star[mask]]
            vol = 2 * r if scheme.phys_dim == 1 else math.pi * r * r
            avg = math.fsum(values) / vol
            rows.append(WeylRow(r, center, avg, limit, abs(avg - limit)))
    return rows
