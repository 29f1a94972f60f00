"""Base measures, piecewise-constant functions, and atomic point measures.

A base measure lives on an axis-aligned box domain in R^d and has a
piecewise-constant density on a rectangular grid plus an optional list of
fixed atoms.  Piecewise-constant functions over the same domain represent
spatially varying parameters such as a concentration c(w) or a scale th(w).
Because both sides are constant on grid cells, every integral used here is
an exact finite sum over the common grid refinement; no quadrature enters.

Point measures are the simulation output: finite lists of weighted atoms
(location, jump) tagged with the round and subround that produced them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .streams import RandomStream, StreamCursor


class DomainError(ValueError):
    """A location, box, or measure falls outside the relevant domain."""


class UnsupportedParameterError(ValueError):
    """A parameter combination the construction does not support."""


class OracleError(RuntimeError):
    """A numerical oracle failed to reach its required tolerance."""


class Domain:
    """Axis-aligned box in R^d given by per-dimension (lo, hi) bounds.

    With no arguments this is the unit interval; ``dim`` alone gives the
    unit box in that many dimensions.
    """

    __slots__ = ("bounds",)

    def __init__(self, bounds=None, dim: int | None = None):
        if bounds is None:
            bounds = [(0.0, 1.0)] * (dim if dim is not None else 1)
        b = np.asarray(bounds, dtype=np.float64)
        if b.ndim == 1 and b.size == 2:
            b = b.reshape(1, 2)
        if b.ndim != 2 or b.shape[1] != 2:
            raise ValueError("bounds must be a (dim, 2) array of (lo, hi) pairs")
        if not np.all(np.isfinite(b)):
            raise ValueError("domain bounds must be finite")
        if not np.all(b[:, 0] < b[:, 1]):
            raise ValueError("each lower bound must be below its upper bound")
        self.bounds = b
        self.bounds.setflags(write=False)

    @classmethod
    def unit_interval(cls) -> "Domain":
        return cls([(0.0, 1.0)])

    @property
    def dim(self) -> int:
        return self.bounds.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.bounds[:, 1] - self.bounds[:, 0]))

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def __eq__(self, other):
        if not isinstance(other, Domain):
            return NotImplemented
        return self.bounds.shape == other.bounds.shape and bool(
            np.all(self.bounds == other.bounds)
        )

    def __hash__(self):
        return hash(self.bounds.tobytes())

    def __repr__(self):
        pairs = ", ".join(f"[{lo:g}, {hi:g}]" for lo, hi in self.bounds)
        return f"Domain({pairs})"


def as_boxes(boxes, domain: Domain) -> np.ndarray:
    """Normalize a box collection to shape (m, dim, 2) and check bounds.

    Accepts a single (lo, hi) pair in one dimension, a single box as a list
    of per-dimension pairs, or a list of boxes.  Boxes must lie inside the
    domain; a box outside it raises DomainError.
    """
    arr = np.asarray(boxes, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 2 and domain.dim == 1:
        arr = arr.reshape(1, 1, 2)
    elif arr.ndim == 2 and arr.shape == (domain.dim, 2):
        arr = arr.reshape(1, domain.dim, 2)
    elif arr.ndim == 3 and arr.shape[1:] == (domain.dim, 2):
        pass
    else:
        raise ValueError(f"cannot interpret boxes of shape {arr.shape} in {domain}")
    if not np.all(arr[..., 0] <= arr[..., 1]):
        raise ValueError("box lower corners must not exceed upper corners")
    lo, hi = domain.bounds[:, 0], domain.bounds[:, 1]
    if np.any(arr[..., 0] < lo) or np.any(arr[..., 1] > hi):
        raise DomainError("box extends outside the domain")
    return arr


class PiecewiseConst:
    """Function on a domain, constant on the cells of a rectangular grid.

    ``edges`` holds one strictly increasing 1-D array per dimension, running
    from the domain's lower to upper bound; ``values`` has one entry per
    grid cell.  Evaluation at an upper boundary uses the last cell.
    """

    __slots__ = ("domain", "edges", "values")

    def __init__(self, domain: Domain, edges, values):
        self.domain = domain
        edges = tuple(np.asarray(e, dtype=np.float64) for e in edges)
        if len(edges) != domain.dim:
            raise ValueError("need one edge array per dimension")
        for d, e in enumerate(edges):
            if e.ndim != 1 or e.size < 2 or not np.all(np.diff(e) > 0):
                raise ValueError("edges must be strictly increasing 1-D arrays")
            if e[0] != domain.bounds[d, 0] or e[-1] != domain.bounds[d, 1]:
                raise ValueError("edge arrays must span the domain exactly")
        values = np.asarray(values, dtype=np.float64)
        shape = tuple(e.size - 1 for e in edges)
        if values.shape != shape:
            raise ValueError(f"values shape {values.shape} does not match grid {shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("cell values must be finite")
        self.edges = edges
        self.values = values

    @classmethod
    def constant(cls, domain: Domain, value: float) -> "PiecewiseConst":
        edges = [domain.bounds[d] for d in range(domain.dim)]
        return cls(domain, edges, np.full((1,) * domain.dim, float(value)))

    @property
    def is_constant(self) -> bool:
        return self.values.size == 1 or bool(
            np.all(self.values == self.values.flat[0])
        )

    def cell_volumes(self) -> np.ndarray:
        diffs = [np.diff(e) for e in self.edges]
        return reduce(np.multiply.outer, diffs) if len(diffs) > 1 else diffs[0]

    def at(self, points) -> np.ndarray:
        """Evaluate at an (n, dim) array of points inside the domain."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if not np.all(self.domain.contains(pts)):
            raise DomainError("point outside the domain")
        idx = []
        for d, e in enumerate(self.edges):
            i = np.searchsorted(e, pts[:, d], side="right") - 1
            idx.append(np.clip(i, 0, e.size - 2))
        return self.values[tuple(idx)]

    def map(self, fn) -> "PiecewiseConst":
        """Apply an elementwise function to the cell values."""
        return PiecewiseConst(self.domain, self.edges, fn(self.values))

    def on_grid(self, edges) -> np.ndarray:
        """Cell values resampled onto a refinement of this function's grid."""
        idx = []
        for d, e in enumerate(edges):
            centers = 0.5 * (e[:-1] + e[1:])
            i = np.searchsorted(self.edges[d], centers, side="right") - 1
            idx.append(np.clip(i, 0, self.edges[d].size - 2))
        return self.values[np.ix_(*idx)]

    def times(self, other) -> "PiecewiseConst":
        if np.isscalar(other):
            return self.map(lambda v: v * other)
        edges = common_edges(self, other)
        return PiecewiseConst(
            self.domain, edges, self.on_grid(edges) * other.on_grid(edges)
        )

    def integral(self, boxes=None) -> float:
        """Exact integral over the domain, or over a union of boxes."""
        if boxes is None:
            return float(np.sum(self.values * self.cell_volumes()))
        boxes = as_boxes(boxes, self.domain)
        edges = _edges_with_boxes(self.edges, boxes)
        vals = self.on_grid(edges)
        mask = _covered_cells(edges, boxes)
        vols = reduce(np.multiply.outer, [np.diff(e) for e in edges]) if len(
            edges
        ) > 1 else np.diff(edges[0])
        return float(np.sum(vals * vols * mask))

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


def common_edges(*fns: PiecewiseConst):
    domain = fns[0].domain
    for f in fns[1:]:
        if f.domain != domain:
            raise DomainError("functions live on different domains")
    return tuple(
        reduce(np.union1d, [f.edges[d] for f in fns]) for d in range(domain.dim)
    )


def _edges_with_boxes(edges, boxes: np.ndarray):
    out = []
    for d, e in enumerate(edges):
        extra = boxes[:, d, :].reshape(-1)
        out.append(np.union1d(e, extra))
    return tuple(out)


def _covered_cells(edges, boxes: np.ndarray) -> np.ndarray:
    """Boolean grid marking cells whose center lies in some box."""
    centers = [0.5 * (e[:-1] + e[1:]) for e in edges]
    shape = tuple(c.size for c in centers)
    mask = np.zeros(shape, dtype=bool)
    for box in boxes:
        per_dim = [
            (c >= box[d, 0]) & (c <= box[d, 1]) for d, c in enumerate(centers)
        ]
        mask |= reduce(np.logical_and.outer, per_dim) if len(
            per_dim
        ) > 1 else per_dim[0]
    return mask


def positive_function(value, domain: Domain, name: str) -> PiecewiseConst:
    """Coerce a scalar or piecewise function to a strictly positive one."""
    if np.isscalar(value):
        value = PiecewiseConst.constant(domain, float(value))
    if value.domain != domain:
        raise ValueError(f"{name} must live on the base measure's domain")
    if value.min() <= 0:
        raise ValueError(f"{name} must be strictly positive")
    return value


class BaseMeasure:
    """Finite measure: piecewise-constant density plus fixed atoms.

    ``atom_locations`` is an (m, dim) array and ``atom_masses`` the matching
    nonnegative masses.  The total mass must be finite and positive measures
    are enforced cellwise.
    """

    __slots__ = ("domain", "density", "atom_locations", "atom_masses")

    def __init__(self, density: PiecewiseConst, atom_locations=None, atom_masses=None):
        if density.values.min() < 0:
            raise ValueError("density values must be nonnegative")
        self.domain = density.domain
        self.density = density
        if atom_locations is None:
            atom_locations = np.empty((0, self.domain.dim))
            atom_masses = np.empty(0)
        locs = np.atleast_2d(np.asarray(atom_locations, dtype=np.float64))
        masses = np.atleast_1d(np.asarray(atom_masses, dtype=np.float64))
        if locs.shape[0] != masses.shape[0]:
            raise ValueError("atom locations and masses must align")
        if locs.shape[0] and not np.all(self.domain.contains(locs)):
            raise DomainError("atom outside the domain")
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise ValueError("atom masses must be finite and nonnegative")
        if locs.shape[0] > 1 and np.unique(locs, axis=0).shape[0] != locs.shape[0]:
            raise ValueError("atom locations must be distinct")
        self.atom_locations = locs
        self.atom_masses = masses

    @classmethod
    def uniform(cls, domain: Domain, total_mass: float) -> "BaseMeasure":
        """Uniform measure with the given total mass."""
        if total_mass <= 0 or not np.isfinite(total_mass):
            raise ValueError("total mass must be finite and positive")
        return cls(PiecewiseConst.constant(domain, total_mass / domain.volume))

    @classmethod
    def from_cells(cls, domain: Domain, edges, values) -> "BaseMeasure":
        return cls(PiecewiseConst(domain, edges, values))

    @property
    def total_mass(self) -> float:
        return self.density.integral() + float(self.atom_masses.sum())

    def scaled(self, factor) -> "BaseMeasure":
        """Measure with density (and atom masses) multiplied by ``factor``.

        ``factor`` may be a scalar or a PiecewiseConst on the same domain;
        atoms pick up the factor evaluated at their location.
        """
        new_density = self.density.times(factor)
        if self.atom_masses.size == 0:
            return BaseMeasure(new_density)
        if np.isscalar(factor):
            f = np.full(self.atom_masses.shape, float(factor))
        else:
            f = factor.at(self.atom_locations)
        return BaseMeasure(new_density, self.atom_locations, self.atom_masses * f)

    def mass_of(self, boxes) -> float:
        """Measure of a union of closed boxes, atoms included."""
        total = self.density.integral(boxes)
        if self.atom_masses.size:
            arr = as_boxes(boxes, self.domain)
            hit = np.zeros(self.atom_masses.shape, dtype=bool)
            for box in arr:
                inside = np.all(
                    (self.atom_locations >= box[:, 0])
                    & (self.atom_locations <= box[:, 1]),
                    axis=1,
                )
                hit |= inside
            total += float(self.atom_masses[hit].sum())
        return total

    def integral_against(self, f: PiecewiseConst, boxes=None) -> float:
        """Exact integral of f against this measure, optionally over boxes."""
        total = weighted_cell_integral(self.density, f, boxes)
        if self.atom_masses.size:
            w = f.at(self.atom_locations)
            if boxes is None:
                total += float((self.atom_masses * w).sum())
            else:
                arr = as_boxes(boxes, self.domain)
                hit = np.zeros(self.atom_masses.shape, dtype=bool)
                for box in arr:
                    hit |= np.all(
                        (self.atom_locations >= box[:, 0])
                        & (self.atom_locations <= box[:, 1]),
                        axis=1,
                    )
                total += float((self.atom_masses * w)[hit].sum())
        return total


def weighted_cell_integral(density: PiecewiseConst, f: PiecewiseConst, boxes=None):
    """Integral of the product of two piecewise-constant functions."""
    edges = common_edges(density, f)
    if boxes is not None:
        edges = _edges_with_boxes(edges, as_boxes(boxes, density.domain))
    dvals = density.on_grid(edges)
    fvals = f.on_grid(edges)
    vols = reduce(np.multiply.outer, [np.diff(e) for e in edges]) if len(
        edges
    ) > 1 else np.diff(edges[0])
    prod = dvals * fvals * vols
    if boxes is not None:
        prod = prod * _covered_cells(edges, as_boxes(boxes, density.domain))
    return float(prod.sum())


@dataclass(frozen=True)
class WeightedAtom:
    """One atom of a simulated process draw.

    ``subround_h`` is 0 for families without an h index; ``origin`` is one
    of {prior, posterior-observed, posterior-new}.
    """

    location: tuple
    jump: float
    round_k: int
    subround_h: int = 0
    origin: str = "prior"


class PointMeasure:
    """Finite atomic measure produced by simulation."""

    __slots__ = ("domain", "atoms")

    def __init__(self, domain: Domain, atoms):
        self.domain = domain
        self.atoms = list(atoms)
        for a in self.atoms:
            if not np.isfinite(a.jump):
                raise ValueError("atom jumps must be finite")

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __add__(self, other: "PointMeasure") -> "PointMeasure":
        if self.domain != other.domain:
            raise DomainError("cannot concatenate measures on different domains")
        return PointMeasure(self.domain, self.atoms + other.atoms)

    def jumps(self) -> np.ndarray:
        return np.array([a.jump for a in self.atoms], dtype=np.float64)

    def locations(self) -> np.ndarray:
        if not self.atoms:
            return np.empty((0, self.domain.dim))
        return np.array([a.location for a in self.atoms], dtype=np.float64)

    @property
    def total_mass(self) -> float:
        return float(self.jumps().sum())

    def mass_in(self, boxes) -> float:
        """Sum of jumps whose atom lies in the closed box union."""
        arr = as_boxes(boxes, self.domain)
        if not self.atoms:
            return 0.0
        locs = self.locations()
        jumps = self.jumps()
        hit = np.zeros(len(self.atoms), dtype=bool)
        for box in arr:
            hit |= np.all((locs >= box[:, 0]) & (locs <= box[:, 1]), axis=1)
        return float(jumps[hit].sum())


def measure_of_set(m: BaseMeasure, boxes) -> float:
    """Exact measure of a finite union of closed boxes."""
    return m.mass_of(boxes)


def weighted_integral(m: BaseMeasure, f: PiecewiseConst, boxes=None) -> float:
    """Exact integral of a piecewise-constant f against the measure."""
    return m.integral_against(f, boxes)


def poisson_count(rate: float, stream: RandomStream) -> int:
    """Poisson draw for the count of atoms at the given rate."""
    return stream.cursor().poisson(rate)


def sample_locations(measure: BaseMeasure, n: int, stream: RandomStream) -> np.ndarray:
    """n locations drawn i.i.d. from the normalized measure.

    Returns an (n, dim) array.  Consumes, per point, one component-choice
    uniform plus one uniform per dimension when a density cell is chosen
    (atoms need no position draw).
    """
    return _sample_locations(measure, n, stream.cursor())


def _sample_locations(measure: BaseMeasure, n: int, cursor: StreamCursor) -> np.ndarray:
    total = measure.total_mass
    if total <= 0:
        raise ValueError("cannot sample from a measure with zero mass")
    cell_masses = (measure.density.values * measure.density.cell_volumes()).reshape(-1)
    weights = np.concatenate([cell_masses, measure.atom_masses])
    cum = np.cumsum(weights)
    n_cells = cell_masses.size
    edges = measure.density.edges
    grid_shape = tuple(e.size - 1 for e in edges)
    dim = measure.domain.dim
    out = np.empty((n, dim))
    for i in range(n):
        u = cursor.uniform() * cum[-1]
        j = min(int(np.searchsorted(cum, u, side="left")), weights.size - 1)
        if j < n_cells:
            cell = np.unravel_index(j, grid_shape)
            for d in range(dim):
                lo = edges[d][cell[d]]
                hi = edges[d][cell[d] + 1]
                out[i, d] = lo + cursor.uniform() * (hi - lo)
        else:
            out[i] = measure.atom_locations[j - n_cells]
    return out
