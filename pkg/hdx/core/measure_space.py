"""Weighted k-partite complexes, their marginals and links, and functions on them.

A :class:`WeightedComplex` is a probability measure on top faces of
``V_1 x ... x V_k``.  Faces are stored as an int table in canonical
lexicographic order; every marginal ``mu_S`` is derived from the table by a
cached :class:`Projection` (points of ``supp mu_S``, their masses and the map
face -> point).  :class:`Fn` holds a dense value vector aligned to the points
of its home marginal.
"""
from __future__ import annotations

import hashlib
import logging
import math
import threading
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from numbers import Real
from typing import Any

import numpy as np

from . import subsets
from .errors import (
    DomainMismatch,
    InvalidParameter,
    MalformedComplex,
    NegativeWeight,
    ZeroMassPoint,
)

logger = logging.getLogger(__name__)

# Raw weights may deviate from a distribution by this much before normalization.
RAW_SUM_TOLERANCE = 1e-6
# Weights already summing to 1 within this are stored as given.
NORMALIZED_TOLERANCE = 1e-12

_CODE_LIMIT = 1 << 62


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class PartiteUniverse:
    """The vertex parts ``V_1..V_k`` with their labels."""

    parts: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        parts = tuple(tuple(str(label) for label in part) for part in self.parts)
        object.__setattr__(self, "parts", parts)
        if len(parts) > subsets.MAX_K:
            raise MalformedComplex(f"k={len(parts)} exceeds the maximum of {subsets.MAX_K}")
        for i, part in enumerate(parts):
            if not part:
                raise MalformedComplex(f"part {i + 1} is empty")
            if len(set(part)) != len(part):
                raise MalformedComplex(f"part {i + 1} has duplicate labels")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "PartiteUniverse":
        for n in sizes:
            if int(n) < 1:
                raise MalformedComplex(f"part sizes must be >= 1, got {list(sizes)}")
        return cls(tuple(tuple(str(j) for j in range(int(n))) for n in sizes))

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(part) for part in self.parts)

    def index_of(self, coord: int, label: Any) -> int:
        try:
            return self.parts[coord].index(str(label))
        except ValueError as exc:
            raise MalformedComplex(f"label {label!r} not in part {coord + 1}") from exc

    def sub(self, coords: Sequence[int]) -> "PartiteUniverse":
        return PartiteUniverse(tuple(self.parts[c] for c in coords))


@dataclass(frozen=True)
class PartialAssignment:
    """A point ``x`` of ``V_S``: element indices for the coordinates of ``subset``."""

    subset: int
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.values) != subsets.size(self.subset):
            raise InvalidParameter(
                f"assignment on {subsets.fmt(self.subset)} needs {subsets.size(self.subset)} values, "
                f"got {len(self.values)}"
            )

    @classmethod
    def empty(cls) -> "PartialAssignment":
        return cls(0, ())

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> "PartialAssignment":
        coords = sorted(mapping)
        return cls(subsets.mask_from(coords), tuple(mapping[c] for c in coords))

    @classmethod
    def from_labels(cls, universe: PartiteUniverse, mapping: Mapping[int, Any]) -> "PartialAssignment":
        return cls.from_mapping({c: universe.index_of(c, label) for c, label in mapping.items()})

    def as_mapping(self) -> dict[int, int]:
        return dict(zip(subsets.bits(self.subset), self.values))

    def union(self, other: "PartialAssignment") -> "PartialAssignment":
        if self.subset & other.subset:
            raise InvalidParameter("assignments overlap")
        merged = self.as_mapping()
        merged.update(other.as_mapping())
        return PartialAssignment.from_mapping(merged)

    def encode(self) -> str:
        """Canonical text key, e.g. ``{1,3}=0,2``."""
        return f"{subsets.fmt(self.subset)}=" + ",".join(str(v) for v in self.values)


@dataclass(frozen=True, eq=False)
class Projection:
    """Support of ``mu_S`` and the face -> point map."""

    subset: int
    points: np.ndarray
    masses: np.ndarray
    inverse: np.ndarray

    @property
    def size(self) -> int:
        return int(self.masses.shape[0])

    @cached_property
    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        """Face indices grouped by point (ascending within a group) and group offsets."""
        order = np.argsort(self.inverse, kind="stable")
        offsets = np.searchsorted(self.inverse[order], np.arange(self.size + 1))
        return order, offsets

    def locate(self, values: Sequence[int]) -> int:
        if self.points.shape[1] == 0:
            return 0
        hits = np.flatnonzero(np.all(self.points == np.asarray(values, dtype=self.points.dtype), axis=1))
        if hits.size == 0:
            raise ZeroMassPoint(f"assignment {tuple(values)} has zero mass on {subsets.fmt(self.subset)}")
        return int(hits[0])


@dataclass(frozen=True, eq=False)
class WeightedComplex:
    """Probability measure on the top faces of a k-partite universe.

    Build instances with :meth:`build` (validating, normalizing) or
    :meth:`from_product`.  ``origin`` records which coordinates of the
    complex this one was cut out of (links and marginals keep it).
    """

    universe: PartiteUniverse
    faces: np.ndarray
    weights: np.ndarray
    origin: tuple[int, ...]
    _cache: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    @classmethod
    def build(
        cls,
        universe: PartiteUniverse,
        faces: Iterable[Sequence[int]] | np.ndarray,
        weights: Iterable[float] | np.ndarray,
        *,
        origin: Sequence[int] | None = None,
        check_sum: bool = True,
    ) -> "WeightedComplex":
        k = universe.k
        w = np.asarray(weights if isinstance(weights, np.ndarray) else list(weights), dtype=np.float64).reshape(-1)
        if k == 0:
            n_rows = faces.shape[0] if isinstance(faces, np.ndarray) else len(list(faces))
            table = np.zeros((n_rows, 0), dtype=np.int64)
        else:
            table = np.asarray(faces if isinstance(faces, np.ndarray) else list(faces), dtype=np.int64).reshape(-1, k)
        if table.shape[0] != w.shape[0]:
            raise MalformedComplex(f"{table.shape[0]} faces but {w.shape[0]} weights")
        if not np.all(np.isfinite(w)):
            raise MalformedComplex("weights must be finite")
        if np.any(w < 0):
            raise NegativeWeight(f"negative weight {float(w.min())!r}")
        sizes = np.asarray(universe.sizes, dtype=np.int64)
        if table.size and (np.any(table < 0) or np.any(table >= sizes)):
            raise MalformedComplex("face index outside its part")

        keep = w > 0
        table, w = table[keep], w[keep]
        if table.shape[0] == 0:
            raise MalformedComplex("complex has no face of positive weight")
        total = float(np.sum(w))
        if check_sum and abs(total - 1.0) > RAW_SUM_TOLERANCE:
            raise MalformedComplex(f"weights sum to {total!r}, expected 1")

        if k:
            order = np.lexsort(table.T[::-1])
            table, w = table[order], w[order]
            if table.shape[0] > 1 and np.any(np.all(table[1:] == table[:-1], axis=1)):
                raise MalformedComplex("duplicate faces")
        elif table.shape[0] > 1:
            raise MalformedComplex("duplicate faces")
        if abs(total - 1.0) > NORMALIZED_TOLERANCE:
            w = w / total
        return cls._from_sorted(universe, table, w, origin)

    @classmethod
    def _from_sorted(
        cls,
        universe: PartiteUniverse,
        faces: np.ndarray,
        weights: np.ndarray,
        origin: Sequence[int] | None,
    ) -> "WeightedComplex":
        origin = tuple(range(universe.k)) if origin is None else tuple(int(c) for c in origin)
        return cls(
            universe=universe,
            faces=_readonly(np.ascontiguousarray(faces, dtype=np.int32).reshape(np.shape(weights)[0], universe.k)),
            weights=_readonly(np.ascontiguousarray(weights, dtype=np.float64)),
            origin=origin,
        )

    @classmethod
    def from_product(cls, marginals: Sequence[Sequence[float]]) -> "WeightedComplex":
        """Product of the given per-part distributions (zero entries dropped)."""
        universe = PartiteUniverse.from_sizes([len(m) for m in marginals])
        probs = []
        for i, m in enumerate(marginals):
            arr = np.asarray(m, dtype=np.float64)
            if np.any(arr < 0):
                raise NegativeWeight(f"marginal {i + 1} has a negative entry")
            total = float(arr.sum())
            if total <= 0:
                raise MalformedComplex(f"marginal {i + 1} has no mass")
            probs.append(arr / total)
        grid = np.indices(universe.sizes).reshape(universe.k, -1).T
        weights = np.ones(grid.shape[0], dtype=np.float64)
        for i, p in enumerate(probs):
            weights = weights * p[grid[:, i]]
        keep = weights > 0
        weights = weights[keep]
        return cls._from_sorted(universe, grid[keep], weights / weights.sum(), None)

    @property
    def k(self) -> int:
        return self.universe.k

    @property
    def full(self) -> int:
        return subsets.full_mask(self.k)

    @property
    def n_faces(self) -> int:
        return int(self.weights.shape[0])

    @cached_property
    def complex_id(self) -> str:
        digest = hashlib.sha256()
        digest.update(repr(self.universe.sizes).encode("ascii"))
        digest.update(np.ascontiguousarray(self.faces, dtype=np.int64).tobytes())
        digest.update(np.ascontiguousarray(self.weights).tobytes())
        return digest.hexdigest()[:16]

    def same_as(self, other: "WeightedComplex") -> bool:
        return self is other or self.complex_id == other.complex_id

    def _cached(self, key: tuple, build):
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        value = build()
        with self._lock:
            return self._cache.setdefault(key, value)

    def projection(self, subset: int) -> Projection:
        subsets.validate(subset, self.k)
        return self._cached(("projection", subset), lambda: self._project(subset))

    def _project(self, subset: int) -> Projection:
        n = self.n_faces
        if subset == self.full:
            return Projection(subset, self.faces, self.weights, _readonly(np.arange(n, dtype=np.int64)))
        if subset == 0:
            return Projection(
                subset,
                _readonly(np.zeros((1, 0), dtype=np.int32)),
                _readonly(np.ones(1)),
                _readonly(np.zeros(n, dtype=np.int64)),
            )
        cols = list(subsets.bits(subset))
        sub = self.faces[:, cols].astype(np.int64)
        sizes = [self.universe.sizes[c] for c in cols]
        if math.prod(sizes) < _CODE_LIMIT:
            strides = np.ones(len(cols), dtype=np.int64)
            for j in range(len(cols) - 2, -1, -1):
                strides[j] = strides[j + 1] * sizes[j + 1]
            uniq, inverse = np.unique(sub @ strides, return_inverse=True)
            points = (uniq[:, None] // strides) % np.asarray(sizes, dtype=np.int64)
        else:
            points, inverse = np.unique(sub, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1).astype(np.int64)
        masses = np.bincount(inverse, weights=self.weights, minlength=points.shape[0])
        return Projection(
            subset,
            _readonly(points.astype(np.int32)),
            _readonly(masses),
            _readonly(inverse),
        )

    def coarsening(self, home: int, subset: int) -> np.ndarray:
        """Map from points of ``mu_home`` to points of ``mu_subset`` (``subset`` within ``home``)."""
        if not subsets.is_subset(subset, home):
            raise DomainMismatch(f"{subsets.fmt(subset)} is not inside {subsets.fmt(home)}")

        def build() -> np.ndarray:
            outer, inner = self.projection(home), self.projection(subset)
            mapping = np.empty(outer.size, dtype=np.int64)
            mapping[outer.inverse] = inner.inverse
            return _readonly(mapping)

        return self._cached(("coarsening", home, subset), build)

    def support_size(self, subset: int) -> int:
        return self.projection(subset).size

    def masses(self, subset: int) -> np.ndarray:
        return self.projection(subset).masses

    def assignments(self, subset: int) -> list[PartialAssignment]:
        """Points of ``supp mu_S`` in canonical order."""
        points = self.projection(subset).points
        return [PartialAssignment(subset, tuple(int(v) for v in row)) for row in points]

    def labels_of(self, x: PartialAssignment) -> dict[int, str]:
        return {c: self.universe.parts[c][v] for c, v in x.as_mapping().items()}


def marginal(mu: WeightedComplex, subset: int) -> WeightedComplex:
    """``mu_S`` as a complex on the parts of ``S``."""

    def build() -> WeightedComplex:
        proj = mu.projection(subset)
        cols = subsets.bits(subset)
        return WeightedComplex._from_sorted(
            mu.universe.sub(cols),
            proj.points,
            proj.masses,
            tuple(mu.origin[c] for c in cols),
        )

    if subset == mu.full:
        return mu
    return mu._cached(("marginal", subset), build)


def link_rows(mu: WeightedComplex, x: PartialAssignment) -> tuple[np.ndarray, WeightedComplex]:
    subsets.validate(x.subset, mu.k)
    proj = mu.projection(x.subset)
    point = proj.locate(x.values)
    order, offsets = proj.blocks
    rows = order[offsets[point]:offsets[point + 1]]
    rest = subsets.bits(mu.full & ~x.subset)
    link_weights = mu.weights[rows] / proj.masses[point]
    link_complex = WeightedComplex._from_sorted(
        mu.universe.sub(rest),
        mu.faces[rows][:, list(rest)],
        link_weights,
        tuple(mu.origin[c] for c in rest),
    )
    return rows, link_complex


def link(mu: WeightedComplex, x: PartialAssignment) -> WeightedComplex:
    """Conditional measure ``mu_x`` on the parts outside ``x.subset``."""
    return link_rows(mu, x)[1]


@dataclass(frozen=True, eq=False)
class Fn:
    """Real function on ``supp mu_home``, values aligned to canonical point order."""

    complex: WeightedComplex
    home: int
    values: np.ndarray

    def __post_init__(self) -> None:
        subsets.validate(self.home, self.complex.k)
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        expected = self.complex.support_size(self.home)
        if values.shape[0] != expected:
            raise DomainMismatch(
                f"function has {values.shape[0]} values but supp mu_{subsets.fmt(self.home)} has {expected} points"
            )
        object.__setattr__(self, "values", _readonly(values))

    @classmethod
    def constant(cls, mu: WeightedComplex, c: float, home: int | None = None) -> "Fn":
        home = mu.full if home is None else home
        return cls(mu, home, np.full(mu.support_size(home), float(c)))

    @classmethod
    def zeros(cls, mu: WeightedComplex, home: int | None = None) -> "Fn":
        return cls.constant(mu, 0.0, home)

    @property
    def masses(self) -> np.ndarray:
        return self.complex.masses(self.home)

    def compatible(self, other: "Fn") -> bool:
        return self.home == other.home and self.complex.same_as(other.complex)

    def _require(self, other: "Fn") -> None:
        if not self.compatible(other):
            raise DomainMismatch(
                f"cannot combine functions on {self.complex.complex_id}/{subsets.fmt(self.home)} "
                f"and {other.complex.complex_id}/{subsets.fmt(other.home)}"
            )

    def with_values(self, values: np.ndarray) -> "Fn":
        return Fn(self.complex, self.home, values)

    def _combine(self, other: Any, op) -> "Fn":
        if isinstance(other, Fn):
            self._require(other)
            return self.with_values(op(self.values, other.values))
        if isinstance(other, Real):
            return self.with_values(op(self.values, float(other)))
        return NotImplemented

    def __add__(self, other: Any) -> "Fn":
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Fn":
        return self._combine(other, np.subtract)

    def __rsub__(self, other: Any) -> "Fn":
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other: Any) -> "Fn":
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Fn":
        if not isinstance(other, Real):
            return NotImplemented
        return self.with_values(self.values / float(other))

    def __neg__(self) -> "Fn":
        return self.with_values(-self.values)

    def square(self) -> "Fn":
        return self.with_values(self.values * self.values)

    def is_boolean(self, tol: float = 1e-12) -> bool:
        v = self.values
        return bool(np.all((np.abs(v) <= tol) | (np.abs(v - 1.0) <= tol)))


def _weighted_sum(masses: np.ndarray, values: np.ndarray) -> float:
    # np.add.reduce over a contiguous vector is a fixed pairwise tree.
    return float(np.add.reduce(np.ascontiguousarray(masses * values)))


def expectation(f: Fn) -> float:
    return _weighted_sum(f.masses, f.values)


def inner(f: Fn, g: Fn) -> float:
    f._require(g)
    return _weighted_sum(f.masses, f.values * g.values)


def norm_p(f: Fn, p: float) -> float:
    """``(E |f|^p)^(1/p)``; ``p`` is one of 4/3, 2, 4 or inf."""
    if p == math.inf:
        return float(np.max(np.abs(f.values)))
    if p not in (4.0 / 3.0, 2.0, 4.0, 2, 4):
        raise InvalidParameter(f"unsupported norm exponent {p!r}")
    a = np.abs(f.values)
    if p == 2:
        power = a * a
    elif p == 4:
        sq = a * a
        power = sq * sq
    else:
        power = a ** p
    return _weighted_sum(f.masses, power) ** (1.0 / p)


def norm2(f: Fn) -> float:
    return norm_p(f, 2.0)


def lift(g: Fn, to: int | None = None) -> Fn:
    """``y -> g(y_S)`` as a function with home ``to`` (default ``[k]``)."""
    mu = g.complex
    target = mu.full if to is None else to
    if target == g.home:
        return g
    mapping = mu.coarsening(target, g.home)
    return Fn(mu, target, g.values[mapping])


def restrict_fix(f: Fn, x: PartialAssignment) -> Fn:
    """``y -> f(x, y)`` on the link ``(mu_home)_x``.

    ``x`` is given over the original coordinates and must sit inside ``f.home``.
    """
    mu = f.complex
    if not subsets.is_subset(x.subset, f.home):
        raise DomainMismatch(f"{subsets.fmt(x.subset)} is not inside home {subsets.fmt(f.home)}")
    home_coords = subsets.bits(f.home)
    base = marginal(mu, f.home)
    local = PartialAssignment(subsets.relative(x.subset, home_coords), x.values)
    rows, link_complex = link_rows(base, local)
    return Fn(link_complex, link_complex.full, f.values[rows])


def restrict_to_junta(f: Fn, subset: int, *, tol: float = 1e-9) -> Fn:
    """Reduce a function that only depends on ``x_S`` to home ``S``."""
    mu = f.complex
    mapping = mu.coarsening(f.home, subset)
    reduced = np.zeros(mu.support_size(subset))
    reduced[mapping] = f.values
    spread = float(np.max(np.abs(reduced[mapping] - f.values))) if f.values.size else 0.0
    scale = max(1.0, float(np.max(np.abs(f.values))) if f.values.size else 0.0)
    if spread > tol * scale:
        raise DomainMismatch(f"function is not a {subsets.fmt(subset)}-junta (spread {spread:.3e})")
    return Fn(mu, subset, reduced)


def indicator(mu: WeightedComplex, coord: int, value: int) -> Fn:
    """``1[x_coord = value]`` on top faces."""
    return Fn(mu, mu.full, (mu.faces[:, coord] == value).astype(np.float64))


__all__ = [
    "RAW_SUM_TOLERANCE",
    "NORMALIZED_TOLERANCE",
    "PartiteUniverse",
    "PartialAssignment",
    "Projection",
    "WeightedComplex",
    "Fn",
    "marginal",
    "link",
    "link_rows",
    "expectation",
    "inner",
    "norm_p",
    "norm2",
    "lift",
    "restrict_fix",
    "restrict_to_junta",
    "indicator",
]
