"""Self-similar measures of a single contraction family on the line or plane.

The family nu (finite atoms, a uniform density on a region, or one point
mass) and a linear contraction A define the averaging step m -> nu * A.m.
Iterating it from nu itself yields the invariant measure: as growing atom
clouds (``solve_invariant_atoms``), as a grid-density fixed point
(``solve_density``), or factor by factor in frequency space
(``fourier_hat``).  ``hutchinson_distance`` is the line's Wasserstein
metric, used to certify the contraction property.

All numerics here are float based; exact inputs (QuadRat endpoints and the
like) are converted on entry.  Frequency convention: hat(m)(k) =
integral of exp(-2 pi i k x) dm(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
from scipy.signal import fftconvolve

from .compactsets import AffineMap, ConvexPolygon, IntervalSet
from .errors import ConvergenceError, ResourceCapError

_ATOM_MERGE_EPS = 1e-12
_LATTICE_SNAP_EPS = 1e-9
_SUPPORT_REL_EPS = 1e-12


# ---------------------------------------------------------------------------
# discrete measures


class DiscreteMeasure:
    """Finite nonnegative atomic measure; atoms within 1e-12 are merged."""

    __slots__ = ("atoms",)

    def __init__(self, atoms: Iterable[tuple]):
        raw = []
        for loc, w in atoms:
            w = float(w)
            if w <= 0:
                raise ValueError(f"atom weight must be positive, got {w}")
            if isinstance(loc, (tuple, list)):
                raw.append(((float(loc[0]), float(loc[1])), w))
            else:
                raw.append((float(loc), w))
        if not raw:
            raise ValueError("measure needs at least one atom")
        dims = {2 if isinstance(loc, tuple) else 1 for loc, _ in raw}
        if len(dims) > 1:
            raise ValueError("atoms mix 1D and 2D locations")
        key = (lambda a: a[0]) if dims == {1} else (lambda a: (a[0][0], a[0][1]))
        raw.sort(key=key)
        merged = [raw[0]]
        for loc, w in raw[1:]:
            last_loc, last_w = merged[-1]
            if _loc_close(loc, last_loc):
                merged[-1] = (last_loc, last_w + w)
            else:
                merged.append((loc, w))
        self.atoms = tuple(merged)

    @property
    def dim(self) -> int:
        return 2 if isinstance(self.atoms[0][0], tuple) else 1

    @property
    def total_mass(self) -> float:
        return math.fsum(w for _, w in self.atoms)

    def locations(self) -> list:
        return [loc for loc, _ in self.atoms]

    def weights(self) -> list:
        return [w for _, w in self.atoms]

    def scaled(self, factor: float) -> "DiscreteMeasure":
        return DiscreteMeasure([(loc, w * factor) for loc, w in self.atoms])

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        return f"DiscreteMeasure({len(self.atoms)} atoms, mass {self.total_mass:.6g})"


def _loc_close(a, b) -> bool:
    if isinstance(a, tuple):
        return abs(a[0] - b[0]) <= _ATOM_MERGE_EPS and abs(a[1] - b[1]) <= _ATOM_MERGE_EPS
    return abs(a - b) <= _ATOM_MERGE_EPS


# ---------------------------------------------------------------------------
# grid densities


class GridDensity:
    """Density sampled at the nodes origin + i*h (1D) or the product grid
    (2D, values indexed [iy, ix]).

    Node i carries the cell [x_i - h/2, x_i + h/2], so the measure's mass
    is h**dim times the value sum.  Origins are kept on the lattice h*Z
    whenever ``snapped`` construction is used, which lets densities from
    different operations be added and compared index-to-index.
    """

    __slots__ = ("origin", "step", "values")

    def __init__(self, origin, step: float, values):
        self.step = float(step)
        if self.step <= 0:
            raise ValueError("step must be positive")
        vals = np.asarray(values, dtype=float)
        if vals.ndim == 1:
            self.origin = float(origin)
        elif vals.ndim == 2:
            self.origin = (float(origin[0]), float(origin[1]))
        else:
            raise ValueError("values must be a 1D or 2D array")
        if vals.size == 0:
            raise ValueError("empty value array")
        if np.any(vals < 0):
            low = vals.min()
            if low < -1e-12 * max(1.0, vals.max()):
                raise ValueError(f"negative density value {low}")
            vals = np.clip(vals, 0.0, None)
        self.values = vals

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def mass(self) -> float:
        return float(self.values.sum()) * self.step**self.dim

    def nodes(self):
        if self.dim == 1:
            return self.origin + self.step * np.arange(len(self.values))
        ny, nx = self.values.shape
        xs = self.origin[0] + self.step * np.arange(nx)
        ys = self.origin[1] + self.step * np.arange(ny)
        return xs, ys

    def renormalized(self, target_mass: float) -> "GridDensity":
        m = self.mass
        if m <= 0:
            raise ValueError("cannot renormalize a zero-mass density")
        return GridDensity(self.origin, self.step, self.values * (target_mass / m))

    def interpolate(self, x) -> float:
        """Linear (1D) or bilinear (2D) interpolation, zero outside."""
        if self.dim == 1:
            u = (x - self.origin) / self.step
            i = math.floor(u)
            f = u - i
            return self._at(i) * (1 - f) + self._at(i + 1) * f
        u = (x[0] - self.origin[0]) / self.step
        v = (x[1] - self.origin[1]) / self.step
        i, j = math.floor(u), math.floor(v)
        fu, fv = u - i, v - j
        return (
            self._at2(j, i) * (1 - fu) * (1 - fv)
            + self._at2(j, i + 1) * fu * (1 - fv)
            + self._at2(j + 1, i) * (1 - fu) * fv
            + self._at2(j + 1, i + 1) * fu * fv
        )

    def _at(self, i: int) -> float:
        return float(self.values[i]) if 0 <= i < len(self.values) else 0.0

    def _at2(self, j: int, i: int) -> float:
        ny, nx = self.values.shape
        return float(self.values[j, i]) if 0 <= j < ny and 0 <= i < nx else 0.0

    def support(self, rel_eps: float = _SUPPORT_REL_EPS):
        """Support footprint (cells above rel_eps * max) as an interval
        (1D) or bounding box (2D), padded by the half-cell each node owns."""
        thr = rel_eps * float(self.values.max())
        h = self.step
        if self.dim == 1:
            idx = np.nonzero(self.values > thr)[0]
            if len(idx) == 0:
                raise ValueError("density has empty support")
            lo = self.origin + h * idx[0] - h / 2
            hi = self.origin + h * idx[-1] + h / 2
            return (lo, hi)
        jj, ii = np.nonzero(self.values > thr)
        if len(ii) == 0:
            raise ValueError("density has empty support")
        return (
            self.origin[0] + h * ii.min() - h / 2,
            self.origin[1] + h * jj.min() - h / 2,
            self.origin[0] + h * ii.max() + h / 2,
            self.origin[1] + h * jj.max() + h / 2,
        )

    def __repr__(self) -> str:
        shape = "x".join(str(s) for s in self.values.shape)
        return f"GridDensity({shape} @ h={self.step:g}, mass {self.mass:.6g})"


def _snap(x: float, h: float) -> float:
    return round(x / h) * h


def snap_to_lattice(g: GridDensity) -> GridDensity:
    """Move the origin onto h*Z; resamples only if the shift is material."""
    h = g.step
    if g.dim == 1:
        o = _snap(g.origin, h)
        if abs(o - g.origin) <= _LATTICE_SNAP_EPS * h:
            return GridDensity(o, h, g.values)
        n = len(g.values) + 1
        xs = o + h * np.arange(n)
        vals = np.array([g.interpolate(x) for x in xs])
        out = GridDensity(o, h, vals)
        return out.renormalized(g.mass)
    ox, oy = _snap(g.origin[0], h), _snap(g.origin[1], h)
    if (
        abs(ox - g.origin[0]) <= _LATTICE_SNAP_EPS * h
        and abs(oy - g.origin[1]) <= _LATTICE_SNAP_EPS * h
    ):
        return GridDensity((ox, oy), h, g.values)
    ny, nx = g.values.shape
    xs = ox + h * np.arange(nx + 1)
    ys = oy + h * np.arange(ny + 1)
    vals = np.array([[g.interpolate((x, y)) for x in xs] for y in ys])
    return GridDensity((ox, oy), h, vals).renormalized(g.mass)


def add_grids(a: GridDensity, b: GridDensity) -> GridDensity:
    """Sum of two lattice-aligned densities with a common step."""
    if abs(a.step - b.step) > 1e-15:
        raise ValueError("grids have different steps")
    h = a.step
    if a.dim != b.dim:
        raise ValueError("grids have different dimensions")
    if a.dim == 1:
        ia, ib = round(a.origin / h), round(b.origin / h)
        lo = min(ia, ib)
        hi = max(ia + len(a.values), ib + len(b.values))
        vals = np.zeros(hi - lo)
        vals[ia - lo : ia - lo + len(a.values)] += a.values
        vals[ib - lo : ib - lo + len(b.values)] += b.values
        return GridDensity(lo * h, h, vals)
    (ax, ay), (bx, by) = a.origin, b.origin
    iax, iay = round(ax / h), round(ay / h)
    ibx, iby = round(bx / h), round(by / h)
    lox, loy = min(iax, ibx), min(iay, iby)
    hix = max(iax + a.values.shape[1], ibx + b.values.shape[1])
    hiy = max(iay + a.values.shape[0], iby + b.values.shape[0])
    vals = np.zeros((hiy - loy, hix - lox))
    vals[iay - loy : iay - loy + a.values.shape[0], iax - lox : iax - lox + a.values.shape[1]] += a.values
    vals[iby - loy : iby - loy + b.values.shape[0], ibx - lox : ibx - lox + b.values.shape[1]] += b.values
    return GridDensity((lox * h, loy * h), h, vals)


def l1_distance(a: GridDensity, b: GridDensity) -> float:
    """Integral of |a - b| for lattice-aligned densities."""
    if abs(a.step - b.step) > 1e-15 or a.dim != b.dim:
        raise ValueError("grids are not comparable")
    h = a.step
    if a.dim == 1:
        ia, ib = round(a.origin / h), round(b.origin / h)
        lo = min(ia, ib)
        hi = max(ia + len(a.values), ib + len(b.values))
        va = np.zeros(hi - lo)
        vb = np.zeros(hi - lo)
        va[ia - lo : ia - lo + len(a.values)] = a.values
        vb[ib - lo : ib - lo + len(b.values)] = b.values
        return float(np.abs(va - vb).sum()) * h
    iax, iay = round(a.origin[0] / h), round(a.origin[1] / h)
    ibx, iby = round(b.origin[0] / h), round(b.origin[1] / h)
    lox, loy = min(iax, ibx), min(iay, iby)
    hix = max(iax + a.values.shape[1], ibx + b.values.shape[1])
    hiy = max(iay + a.values.shape[0], iby + b.values.shape[0])
    va = np.zeros((hiy - loy, hix - lox))
    vb = np.zeros_like(va)
    va[iay - loy : iay - loy + a.values.shape[0], iax - lox : iax - lox + a.values.shape[1]] = a.values
    vb[iby - loy : iby - loy + b.values.shape[0], ibx - lox : ibx - lox + b.values.shape[1]] = b.values
    return float(np.abs(va - vb).sum()) * h * h


def shift_grid(g: GridDensity, t) -> GridDensity:
    """Translate a density; lattice multiples move by index, others resample."""
    h = g.step
    if g.dim == 1:
        shifted = GridDensity(g.origin + float(t), h, g.values)
    else:
        shifted = GridDensity((g.origin[0] + float(t[0]), g.origin[1] + float(t[1])), h, g.values)
    return snap_to_lattice(shifted)


# ---------------------------------------------------------------------------
# rasterization (exact-coverage indicators)


def raster_interval_set(region: IntervalSet, h: float, mass: float) -> GridDensity:
    """Uniform density of the given mass on a 1D region: each node carries
    the exact fraction of its cell covered by the region, so the grid mass
    equals ``mass`` up to float rounding only."""
    region = region.as_float()
    length = region.measure()
    if length <= 0:
        raise ValueError("region must have positive measure for a uniform density")
    density = mass / length
    lo, hi = region.hull()
    i0 = math.floor((lo - h / 2) / h + 0.5)
    i1 = math.ceil((hi + h / 2) / h - 0.5)
    vals = np.zeros(i1 - i0 + 1)
    for a, b in region.intervals:
        for i in range(i0, i1 + 1):
            cell_lo = i * h - h / 2
            cell_hi = i * h + h / 2
            overlap = min(b, cell_hi) - max(a, cell_lo)
            if overlap > 0:
                vals[i - i0] += overlap / h * density
    return GridDensity(i0 * h, h, vals)


def _cell_polygon_overlap(poly_verts, cell) -> float:
    # clip the cell rectangle against each polygon edge, then shoelace
    x0, y0, x1, y1 = cell
    pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    n = len(poly_verts)
    for k in range(n):
        ax, ay = poly_verts[k]
        bx, by = poly_verts[(k + 1) % n]
        kept = []
        m = len(pts)
        for t in range(m):
            cx, cy = pts[t]
            nx, ny = pts[(t + 1) % m]
            side_c = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            side_n = (bx - ax) * (ny - ay) - (by - ay) * (nx - ax)
            if side_c >= 0:
                kept.append((cx, cy))
            if (side_c > 0 > side_n) or (side_c < 0 < side_n):
                s = side_c / (side_c - side_n)
                kept.append((cx + s * (nx - cx), cy + s * (ny - cy)))
        if not kept:
            return 0.0
        pts = kept
    area = 0.0
    for t in range(len(pts)):
        cx, cy = pts[t]
        nx, ny = pts[(t + 1) % len(pts)]
        area += cx * ny - nx * cy
    return abs(area) / 2


def raster_polygon(poly: ConvexPolygon, h: float, mass: float) -> GridDensity:
    """Uniform density of the given mass on a convex polygon, by exact
    cell-overlap areas (cells clipped against the polygon)."""
    poly = poly.as_float()
    area = poly.area
    if area <= 0:
        raise ValueError("polygon must have positive area")
    density = mass / area
    xlo, ylo, xhi, yhi = poly.bbox()
    i0 = math.floor((xlo - h / 2) / h + 0.5)
    i1 = math.ceil((xhi + h / 2) / h - 0.5)
    j0 = math.floor((ylo - h / 2) / h + 0.5)
    j1 = math.ceil((yhi + h / 2) / h - 0.5)
    verts = list(poly.vertices)
    vals = np.zeros((j1 - j0 + 1, i1 - i0 + 1))
    for j in range(j0, j1 + 1):
        cy = j * h
        for i in range(i0, i1 + 1):
            cx = i * h
            frac = _cell_polygon_overlap(
                verts, (cx - h / 2, cy - h / 2, cx + h / 2, cy + h / 2)
            )
            if frac > 0:
                vals[j - j0, i - i0] = frac / (h * h) * density
    return GridDensity((i0 * h, j0 * h), h, vals)


def point_mass_grid(location, h: float, mass: float, dim: int = 1) -> GridDensity:
    """A delta approximant: the whole mass in the one cell whose node is
    nearest to ``location`` (exact when location lies on the lattice)."""
    if dim == 1:
        i = round(float(location) / h)
        return GridDensity(i * h, h, np.array([mass / h]))
    i = round(float(location[0]) / h)
    j = round(float(location[1]) / h)
    return GridDensity((i * h, j * h), h, np.array([[mass / (h * h)]]))


# ---------------------------------------------------------------------------
# translation families


@dataclass(frozen=True)
class FiniteFamily:
    """Finitely many weighted translations."""

    measure: DiscreteMeasure

    @property
    def dim(self) -> int:
        return self.measure.dim

    @property
    def total_mass(self) -> float:
        return self.measure.total_mass


@dataclass(frozen=True)
class UniformFamily:
    """Translations spread uniformly (Haar) over a compact region."""

    region: object  # IntervalSet or ConvexPolygon
    total_mass: float

    @property
    def dim(self) -> int:
        return 1 if isinstance(self.region, IntervalSet) else 2

    def density_value(self) -> float:
        size = (
            self.region.as_float().measure()
            if isinstance(self.region, IntervalSet)
            else self.region.as_float().area
        )
        if size <= 0:
            raise ValueError("uniform family needs a region of positive measure")
        return self.total_mass / size


@dataclass(frozen=True)
class PointMassFamily:
    """A single weighted translation."""

    location: object
    total_mass: float

    @property
    def dim(self) -> int:
        return 2 if isinstance(self.location, (tuple, list)) else 1


TranslationFamily = Union[FiniteFamily, UniformFamily, PointMassFamily]


def family_as_grid(family: TranslationFamily, h: float) -> GridDensity:
    """Rasterize a family as a density of its own total mass at step h."""
    if isinstance(family, UniformFamily):
        if isinstance(family.region, IntervalSet):
            return raster_interval_set(family.region, h, family.total_mass)
        return raster_polygon(family.region, h, family.total_mass)
    if isinstance(family, PointMassFamily):
        loc = family.location
        dim = family.dim
        return point_mass_grid(loc, h, family.total_mass, dim=dim)
    grids = [
        point_mass_grid(loc, h, w, dim=family.dim)
        for loc, w in family.measure.atoms
    ]
    out = grids[0]
    for g in grids[1:]:
        out = add_grids(out, g)
    return out


# ---------------------------------------------------------------------------
# the Hutchinson metric on the line


def hutchinson_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Optimal Lip-1 test-function gap between equal-mass 1D measures,
    evaluated exactly as the integral of |CDF difference|."""
    if mu.dim != 1 or nu.dim != 1:
        raise ValueError("hutchinson_distance is defined for 1D measures")
    if abs(mu.total_mass - nu.total_mass) > 1e-9:
        raise ValueError(
            f"masses differ: {mu.total_mass} vs {nu.total_mass}; "
            "the metric needs equal total mass"
        )
    events = [(loc, w, 0) for loc, w in mu.atoms] + [
        (loc, w, 1) for loc, w in nu.atoms
    ]
    events.sort(key=lambda e: e[0])
    total = 0.0
    cdf_gap = 0.0  # F_mu - F_nu left of the current event
    prev = events[0][0]
    for loc, w, which in events:
        total += abs(cdf_gap) * (loc - prev)
        cdf_gap += w if which == 0 else -w
        prev = loc
    return total


# ---------------------------------------------------------------------------
# pushforward


def _as_linear(A) -> AffineMap:
    if isinstance(A, AffineMap):
        return A.as_float()
    if isinstance(A, (tuple, list)):
        return AffineMap(A, (0.0, 0.0)).as_float()
    return AffineMap(float(A), 0.0)


def pushforward(f, m):
    """Image measure under an affine map; same representation kind out.

    Atom lists map exactly.  Grid densities are resampled at the preimage
    of each target node, scaled by the modulus, and renormalized to the
    source mass (Prop.-style mass preservation is exact by construction).
    """
    fmap = f.as_float() if isinstance(f, AffineMap) else _as_linear(f)
    if isinstance(m, DiscreteMeasure):
        return DiscreteMeasure([(fmap(loc), w) for loc, w in m.atoms])
    if not isinstance(m, GridDensity):
        raise TypeError(f"cannot push forward {type(m).__name__}")
    h = m.step
    alpha = float(fmap.modulus)
    if m.dim == 1:
        a, t = fmap.a, fmap.t
        xs_lo = a * m.origin + t
        xs_hi = a * (m.origin + h * (len(m.values) - 1)) + t
        lo, hi = min(xs_lo, xs_hi), max(xs_lo, xs_hi)
        i0 = math.floor(lo / h) - 1
        i1 = math.ceil(hi / h) + 1
        xs = h * np.arange(i0, i1 + 1)
        pre = (xs - t) / a
        u = (pre - m.origin) / h
        base = np.floor(u).astype(int)
        frac = u - base
        padded = np.concatenate([[0.0], m.values, [0.0]])
        idx = np.clip(base + 1, 0, len(padded) - 2)
        valid = (base >= -1) & (base <= len(m.values) - 1)
        vals = np.where(
            valid, padded[idx] * (1 - frac) + padded[idx + 1] * frac, 0.0
        )
        out = GridDensity(i0 * h, h, np.clip(vals * alpha, 0.0, None))
        return out.renormalized(m.mass)
    (a, b), (c, d) = fmap.a
    tx, ty = fmap.t
    det = a * d - b * c
    ny, nx = m.values.shape
    corners_x = [m.origin[0], m.origin[0] + h * (nx - 1)]
    corners_y = [m.origin[1], m.origin[1] + h * (ny - 1)]
    img_x, img_y = [], []
    for x in corners_x:
        for y in corners_y:
            img_x.append(a * x + b * y + tx)
            img_y.append(c * x + d * y + ty)
    i0 = math.floor(min(img_x) / h) - 1
    i1 = math.ceil(max(img_x) / h) + 1
    j0 = math.floor(min(img_y) / h) - 1
    j1 = math.ceil(max(img_y) / h) + 1
    xs = h * np.arange(i0, i1 + 1)
    ys = h * np.arange(j0, j1 + 1)
    gx, gy = np.meshgrid(xs - tx, ys - ty)
    # inverse of [[a, b], [c, d]] applied to (x - t)
    pre_x = (d * gx - b * gy) / det
    pre_y = (-c * gx + a * gy) / det
    u = (pre_x - m.origin[0]) / h
    v = (pre_y - m.origin[1]) / h
    bu = np.floor(u).astype(int)
    bv = np.floor(v).astype(int)
    fu = u - bu
    fv = v - bv
    padded = np.zeros((ny + 2, nx + 2))
    padded[1:-1, 1:-1] = m.values
    iu = np.clip(bu + 1, 0, nx)
    iv = np.clip(bv + 1, 0, ny)
    inside = (bu >= -1) & (bu <= nx - 1) & (bv >= -1) & (bv <= ny - 1)
    vals = (
        padded[iv, iu] * (1 - fu) * (1 - fv)
        + padded[iv, iu + 1] * fu * (1 - fv)
        + padded[iv + 1, iu] * (1 - fu) * fv
        + padded[iv + 1, iu + 1] * fu * fv
    )
    vals = np.where(inside, vals, 0.0) * alpha
    out = GridDensity((i0 * h, j0 * h), h, np.clip(vals, 0.0, None))
    return out.renormalized(m.mass)


# ---------------------------------------------------------------------------
# averaging step and solvers


def convolve_grids(a: GridDensity, b: GridDensity) -> GridDensity:
    """Density of the convolution (sum of independent draws)."""
    if abs(a.step - b.step) > 1e-15 or a.dim != b.dim:
        raise ValueError("grids are not compatible for convolution")
    h = a.step
    vals = fftconvolve(a.values, b.values) * h**a.dim
    vals = np.clip(vals, 0.0, None)
    if a.dim == 1:
        return GridDensity(a.origin + b.origin, h, vals)
    return GridDensity(
        (a.origin[0] + b.origin[0], a.origin[1] + b.origin[1]), h, vals
    )


def average_step(family: TranslationFamily, A, m):
    """One application of the averaging operator: family * (A.m)."""
    Am = pushforward(_as_linear(A), m)
    if isinstance(m, DiscreteMeasure):
        if isinstance(family, PointMassFamily):
            shift = family.location
            f = AffineMap(1.0, float(shift)) if m.dim == 1 else AffineMap(
                ((1.0, 0.0), (0.0, 1.0)), (float(shift[0]), float(shift[1]))
            )
            return pushforward(f, Am).scaled(family.total_mass)
        if isinstance(family, FiniteFamily):
            atoms = []
            for floc, fw in family.measure.atoms:
                for loc, w in Am.atoms:
                    if isinstance(loc, tuple):
                        atoms.append(((loc[0] + floc[0], loc[1] + floc[1]), w * fw))
                    else:
                        atoms.append((loc + floc, w * fw))
            return DiscreteMeasure(atoms)
        raise TypeError(
            "a uniform family smears atoms into a continuous measure; "
            "use a GridDensity argument instead"
        )
    if not isinstance(m, GridDensity):
        raise TypeError(f"cannot average {type(m).__name__}")
    Am = snap_to_lattice(Am)
    if isinstance(family, PointMassFamily):
        shifted = shift_grid(Am, family.location)
        return GridDensity(shifted.origin, shifted.step, shifted.values * family.total_mass)
    if isinstance(family, FiniteFamily):
        target = family.total_mass * m.mass
        out = None
        for loc, w in family.measure.atoms:
            piece = shift_grid(Am, loc)
            piece = GridDensity(piece.origin, piece.step, piece.values * w)
            out = piece if out is None else add_grids(out, piece)
        return out.renormalized(target)
    kernel = family_as_grid(family, Am.step)
    out = convolve_grids(kernel, Am)
    return out.renormalized(family.total_mass * m.mass)


def solve_invariant_atoms(
    family: FiniteFamily,
    A,
    depth: int,
    atom_cap: int = 2_000_000,
) -> DiscreteMeasure:
    """Atoms of the depth-truncated convolution product of the maps A^l
    applied to the family, i.e. ``depth`` averaging steps from the family
    itself.  Atom locations within 1e-12 merge; exceeding ``atom_cap``
    raises ResourceCapError."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if not isinstance(family, FiniteFamily):
        raise TypeError("atom solver needs a finite family")
    mu = family.measure
    n_atoms = len(mu)
    for _ in range(depth):
        projected = n_atoms * len(family.measure)
        if projected > atom_cap:
            raise ResourceCapError(
                f"atom count would exceed cap {atom_cap} "
                f"(next step needs about {projected})"
            )
        mu = average_step(family, A, mu)
        n_atoms = len(mu)
    return mu


def solve_density(
    h: GridDensity,
    A,
    alpha: float | None = None,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> GridDensity:
    """Grid fixed point of g = alpha * (h conv A.g), seeded with g = h.

    Each iterate is renormalized to mass 1 (quadrature drift is O(step));
    iteration stops when the successive L1 difference drops below tol, or
    at the analytic step count that already guarantees tol in the
    transport metric.  ``alpha``, when given, must match the modulus of A
    (it is implied by A and kept as an argument for explicitness).
    """
    fmap = _as_linear(A)
    if alpha is not None and abs(float(alpha) - float(fmap.modulus)) > 1e-9:
        raise ValueError(f"alpha {alpha} does not match modulus {fmap.modulus}")
    if abs(h.mass - 1.0) > 1e-9:
        raise ValueError(f"family density must have mass 1, got {h.mass}")
    r = fmap.factor
    if not 0 < r < 1:
        raise ValueError(f"need a contraction, got factor {r}")
    seed = snap_to_lattice(h)
    if h.dim == 1:
        slo, shi = seed.support()
        diam = (shi - slo) / (1 - r)
    else:
        xlo, ylo, xhi, yhi = seed.support()
        diam = max(xhi - xlo, yhi - ylo) / (1 - r)
    analytic_steps = max(1, math.ceil(math.log(tol / max(diam, tol)) / math.log(r))) + 5
    g = seed
    delta = None
    for k in range(1, max_iter + 1):
        g_next = convolve_grids(seed, snap_to_lattice(pushforward(fmap, g)))
        g_next = g_next.renormalized(1.0)
        delta = l1_distance(g_next, g)
        g = g_next
        if delta < tol or k >= analytic_steps:
            return g
    raise ConvergenceError(
        f"density iteration did not reach tol={tol} in {max_iter} steps",
        last_delta=delta,
    )


# ---------------------------------------------------------------------------
# Fourier products


def _family_hat(family: TranslationFamily, k: float) -> complex:
    """Mass-normalized transform of the family at frequency k."""
    if isinstance(family, PointMassFamily):
        return np.exp(-2j * np.pi * k * float(family.location))
    if isinstance(family, FiniteFamily):
        mu = family.measure
        total = mu.total_mass
        return sum(
            w * np.exp(-2j * np.pi * k * loc) for loc, w in mu.atoms
        ) / total
    region = family.region
    if not isinstance(region, IntervalSet):
        raise ValueError("fourier_hat supports 1D families only")
    region = region.as_float()
    total = region.measure()
    acc = 0.0 + 0.0j
    for lo, hi in region.intervals:
        if k == 0:
            acc += hi - lo
            continue
        center = (lo + hi) / 2
        half = (hi - lo) / 2
        # integral of exp(-2 pi i k x) over [lo, hi]
        acc += (hi - lo) * np.exp(-2j * np.pi * k * center) * np.sinc(2 * k * half)
    return acc / total


def fourier_hat(family: TranslationFamily, a: float, k: float, n_terms: int) -> complex:
    """Truncated infinite product for the invariant measure's transform:
    the product over l < n_terms of the family transform at a**l * k."""
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    if getattr(family, "dim", 1) != 1:
        raise ValueError("fourier_hat supports 1D families only")
    a = float(a)
    out = 1.0 + 0.0j
    freq = float(k)
    for _ in range(n_terms):
        out *= _family_hat(family, freq)
        freq *= a
    return complex(out)
