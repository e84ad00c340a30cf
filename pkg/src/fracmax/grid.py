"""Regular grids, domain masks, scalar/radius fields, and exact distance transforms.

Open sets G in R^n (n = 1 or 2) are modeled by a bounded computational window
of equally spaced nodes plus a one-node virtual frame of outside nodes, so
every bounded mask has a boundary with finite positive distances.  Unbounded
domains are flagged with ``represents_whole_space``; their boundary distance
is +inf by convention.  Distance transforms are exact Euclidean over node
sets, never chamfer approximations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import ndimage

from .errors import EmptyTarget, MaskMismatch

__all__ = [
    "Grid",
    "DomainMask",
    "NodeSet",
    "ScalarField",
    "RadiusField",
    "ProductField",
    "interval_grid",
    "interval_mask",
    "square_grid",
    "square_mask",
    "boundary_distance",
    "distance_to_set",
    "sublevel_mask",
    "field_to_json",
    "field_from_json",
    "nodeset_to_json",
    "nodeset_from_json",
]


@dataclass(frozen=True, eq=False)
class Grid:
    """Regular node lattice: node i sits at ``origin + i*h`` componentwise."""

    dim: int
    h: float
    origin: tuple
    shape: tuple

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not self.h > 0:
            raise ValueError("spacing h must be positive")
        if len(self.origin) != self.dim or len(self.shape) != self.dim:
            raise ValueError("origin/shape length must equal dim")
        if any(int(s) < 2 for s in self.shape):
            raise ValueError("each axis needs at least 2 nodes")
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    def axis(self, k: int) -> np.ndarray:
        return self.origin[k] + self.h * np.arange(self.shape[k])

    def coords(self) -> np.ndarray:
        """All node coordinates, row-major, shape (n_nodes, dim)."""
        axes = [self.axis(k) for k in range(self.dim)]
        if self.dim == 1:
            return axes[0][:, None]
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
        return np.stack([xx.ravel(), yy.ravel()], axis=1)

    def same_as(self, other: "Grid") -> bool:
        return (
            self.dim == other.dim
            and self.shape == other.shape
            and abs(self.h - other.h) <= 1e-12 * self.h
            and all(abs(a - b) <= 1e-9 * self.h for a, b in zip(self.origin, other.origin))
        )

    def to_json(self) -> dict:
        return {"dim": self.dim, "h": self.h, "origin": list(self.origin), "shape": list(self.shape)}

    @staticmethod
    def from_json(doc: dict) -> "Grid":
        return Grid(int(doc["dim"]), float(doc["h"]), tuple(doc["origin"]), tuple(doc["shape"]))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DomainMask:
    """Boolean inside/outside split of a grid window.

    The window frame is treated as outside unless ``represents_whole_space``,
    in which case every node is inside and dist(x, boundary) = +inf.
    """

    grid: Grid
    inside: np.ndarray
    represents_whole_space: bool = False

    def __post_init__(self):
        inside = np.asarray(self.inside, dtype=bool)
        if inside.shape != self.grid.shape:
            raise ValueError("inside array shape must match grid shape")
        if self.represents_whole_space:
            inside = np.ones(self.grid.shape, dtype=bool)
        if not inside.any():
            raise ValueError("mask must contain at least one inside node")
        object.__setattr__(self, "inside", _readonly(inside))

    @property
    def n_inside(self) -> int:
        return int(self.inside.sum())

    def inside_coords(self) -> np.ndarray:
        return self.grid.coords()[self.inside.ravel()]

    def compatible(self, other: "DomainMask") -> bool:
        return (
            self.grid.same_as(other.grid)
            and self.represents_whole_space == other.represents_whole_space
            and bool(np.array_equal(self.inside, other.inside))
        )

    def require_compatible(self, other: "DomainMask"):
        if not self.compatible(other):
            raise MaskMismatch("fields do not share a domain mask")


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Subset of grid nodes, stored as a boolean indicator."""

    grid: Grid
    member: np.ndarray

    def __post_init__(self):
        member = np.asarray(self.member, dtype=bool)
        if member.shape != self.grid.shape:
            raise ValueError("member array shape must match grid shape")
        object.__setattr__(self, "member", _readonly(member))

    @property
    def count(self) -> int:
        return int(self.member.sum())

    def coords(self) -> np.ndarray:
        return self.grid.coords()[self.member.ravel()]

    def union(self, other: "NodeSet") -> "NodeSet":
        self._require_same_grid(other)
        return NodeSet(self.grid, self.member | other.member)

    def intersection(self, other: "NodeSet") -> "NodeSet":
        self._require_same_grid(other)
        return NodeSet(self.grid, self.member & other.member)

    def issubset(self, other: "NodeSet") -> bool:
        self._require_same_grid(other)
        return bool((~self.member | other.member).all())

    def _require_same_grid(self, other: "NodeSet"):
        if not self.grid.same_as(other.grid):
            raise MaskMismatch("node sets live on different grids")

    @staticmethod
    def from_coords(grid: Grid, pts: Iterable, tol: float = 1e-9) -> "NodeSet":
        """Mark the grid nodes closest to the given points (within tol*h)."""
        member = np.zeros(grid.shape, dtype=bool)
        for pt in np.atleast_2d(np.asarray(pts, dtype=float)):
            idx = []
            for k in range(grid.dim):
                i = int(round((pt[k] - grid.origin[k]) / grid.h))
                if not (0 <= i < grid.shape[k]):
                    raise ValueError(f"point {pt} outside grid window")
                if abs(grid.origin[k] + i * grid.h - pt[k]) > tol * grid.h:
                    raise ValueError(f"point {pt} is not a grid node")
                idx.append(i)
            member[tuple(idx)] = True
        return NodeSet(grid, member)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Sampled function values on a masked grid.

    Values at outside nodes are carried but ignored by every operation.
    +inf is permitted only as the unbounded-domain distance sentinel
    (``allow_inf=True``); ordinary data fields must be finite inside.
    """

    mask: DomainMask
    values: np.ndarray
    allow_inf: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.mask.grid.shape:
            raise ValueError("values shape must match grid shape")
        inside_vals = values[self.mask.inside]
        if np.isnan(inside_vals).any():
            raise ValueError("field values must not be NaN inside the domain")
        if not self.allow_inf and not np.isfinite(inside_vals).all():
            raise ValueError("field values must be finite inside the domain")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def grid(self) -> Grid:
        return self.mask.grid

    def inside_values(self) -> np.ndarray:
        return self.values[self.mask.inside]


@dataclass(frozen=True, eq=False)
class RadiusField:
    """Admissible radius function with 0 <= R <= dist(., boundary) at every inside node."""

    mask: DomainMask
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.mask.grid.shape:
            raise ValueError("values shape must match grid shape")
        inside = self.mask.inside
        v = values[inside]
        if not np.isfinite(v).all():
            raise ValueError("radius values must be finite")
        if (v < 0).any():
            raise ValueError("radius values must be nonnegative")
        bdist = boundary_distance(self.mask).values[inside]
        tol = 1e-9 * max(1.0, float(np.max(v, initial=0.0)))
        if (v > bdist + tol).any():
            worst = float(np.max(v - bdist))
            raise ValueError(f"radius exceeds boundary distance by {worst:g}")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def grid(self) -> Grid:
        return self.mask.grid


@dataclass(frozen=True, eq=False)
class ProductField:
    """Values on the product window of a 1D grid (a W x W array).

    Entry (i, j) belongs to the node pair (x_i, y_j); the inside vector marks
    which 1D nodes are in the domain.
    """

    grid: Grid
    inside: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.grid.dim != 1:
            raise ValueError("product fields require a 1D base grid")
        w = self.grid.shape[0]
        inside = np.asarray(self.inside, dtype=bool).reshape(w)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (w, w):
            raise ValueError("product values must be a (W, W) array")
        object.__setattr__(self, "inside", _readonly(inside))
        object.__setattr__(self, "values", _readonly(values))


# ---------------------------------------------------------------------------
# constructors


def interval_grid(a: float, b: float, h: float) -> Grid:
    """1D grid whose nodes are a, a+h, ..., b (b must be on the lattice)."""
    n = int(round((b - a) / h))
    if abs(a + n * h - b) > 1e-9 * h:
        raise ValueError("interval endpoints are not h-commensurate")
    return Grid(1, float(h), (float(a),), (n + 1,))


def interval_mask(a: float, b: float, h: float, whole_space: bool = False) -> DomainMask:
    g = interval_grid(a, b, h)
    return DomainMask(g, np.ones(g.shape, dtype=bool), represents_whole_space=whole_space)


def square_grid(a: float, b: float, h: float) -> Grid:
    n = int(round((b - a) / h))
    if abs(a + n * h - b) > 1e-9 * h:
        raise ValueError("interval endpoints are not h-commensurate")
    return Grid(2, float(h), (float(a), float(a)), (n + 1, n + 1))


def square_mask(a: float, b: float, h: float, whole_space: bool = False) -> DomainMask:
    g = square_grid(a, b, h)
    return DomainMask(g, np.ones(g.shape, dtype=bool), represents_whole_space=whole_space)


# ---------------------------------------------------------------------------
# distance transforms


def boundary_distance(mask: DomainMask) -> ScalarField:
    """Exact Euclidean distance from each inside node to the nearest outside node.

    Outside nodes include a one-node virtual frame around the window, so every
    bounded mask has a finite boundary distance.  Whole-space masks map every
    node to +inf.
    """
    if mask.represents_whole_space:
        vals = np.full(mask.grid.shape, np.inf)
        return ScalarField(mask, vals, allow_inf=True)
    padded = np.pad(mask.inside, 1, mode="constant", constant_values=False)
    d = ndimage.distance_transform_edt(padded, sampling=mask.grid.h)
    core = d[tuple(slice(1, -1) for _ in range(mask.grid.dim))]
    vals = np.where(mask.inside, core, 0.0)
    return ScalarField(mask, vals)


def distance_to_set(mask: DomainMask, target: NodeSet) -> ScalarField:
    """Exact Euclidean distance from each inside node to the nearest target node."""
    if not mask.grid.same_as(target.grid):
        raise MaskMismatch("target lives on a different grid")
    if target.count == 0:
        raise EmptyTarget("target node set is empty")
    if not (target.member <= mask.inside).all():
        raise ValueError("target nodes must be inside the mask")
    d = ndimage.distance_transform_edt(~target.member, sampling=mask.grid.h)
    vals = np.where(mask.inside, d, 0.0)
    return ScalarField(mask, vals)


def sublevel_mask(field: ScalarField, threshold: float) -> NodeSet:
    """Inside nodes where the field is strictly below the threshold."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    member = field.mask.inside & (field.values < threshold)
    return NodeSet(field.grid, member)


# ---------------------------------------------------------------------------
# JSON serialization (schema fixed: grid/inside/values field names)


def field_to_json(field: ScalarField) -> dict:
    return {
        "grid": field.grid.to_json(),
        "inside": [int(v) for v in field.mask.inside.ravel()],
        "values": [float(v) for v in field.values.ravel()],
        "represents_whole_space": bool(field.mask.represents_whole_space),
    }


def field_from_json(doc: dict) -> ScalarField:
    grid = Grid.from_json(doc["grid"])
    inside = np.asarray(doc["inside"], dtype=bool).reshape(grid.shape)
    mask = DomainMask(grid, inside, represents_whole_space=bool(doc.get("represents_whole_space", False)))
    values = np.asarray(doc["values"], dtype=float).reshape(grid.shape)
    return ScalarField(mask, values)


def nodeset_to_json(ns: NodeSet) -> dict:
    return {"grid": ns.grid.to_json(), "inside": [int(v) for v in ns.member.ravel()]}


def nodeset_from_json(doc: dict) -> NodeSet:
    grid = Grid.from_json(doc["grid"])
    member = np.asarray(doc["inside"], dtype=bool).reshape(grid.shape)
    return NodeSet(grid, member)


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
