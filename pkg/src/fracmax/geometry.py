"""Explicit porous sets, porosity verification, covering numbers, box dimension.

The dyadic gap set removes the open intervals

    I_{N,j} = (2^-N + (j-1) 2^(-M N),  2^-N + j 2^(-M N)),   j = 1..2^((M-1)N)

from an ambient interval for N = 1..N_max; the complement carries a natural
alpha-Hoelder radius function with alpha = 1/M.  Ternary Cantor sets supply
Ahlfors-regular test sets.  Covering numbers use greedy covers with centers
restricted to the set: the 1D sweep greedy is exactly minimal, the 2D
first-uncovered greedy is within factor 2 in radius.  Box-counting dimension
stands in for Assouad dimension; for the self-similar sets used here the two
coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import InsufficientScales, ResolutionInsufficient
from .grid import (
    DomainMask,
    Grid,
    NodeSet,
    RadiusField,
    ScalarField,
    boundary_distance,
    distance_to_set,
)

__all__ = [
    "DyadicGapSet",
    "PorosityReport",
    "build_gap_set",
    "build_cantor",
    "porosity_check",
    "covering_number",
    "box_dimension_estimate",
    "holder_radius",
    "gap_intervals",
]


@dataclass(frozen=True, eq=False)
class DyadicGapSet:
    M: int
    N_max: int
    nodes: NodeSet
    removed: tuple  # ((lo, hi), ...) open intervals

    @property
    def alpha(self) -> float:
        return 1.0 / self.M


@dataclass(frozen=True, eq=False)
class PorosityReport:
    requested_kappa: float
    kappa_estimate: float
    scales_tested: tuple
    witness_failures: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return len(self.witness_failures) == 0


def gap_intervals(M: int, N_max: int):
    """The removed open intervals of the dyadic gap construction."""
    out = []
    for N in range(1, N_max + 1):
        base = 2.0**-N
        step = 2.0 ** (-M * N)
        for j in range(1, 2 ** ((M - 1) * N) + 1):
            out.append((base + (j - 1) * step, base + j * step))
    return tuple(out)


def build_gap_set(M: int, N_max: int, grid: Grid) -> DyadicGapSet:
    """Node-exact realization of the gap-set complement, truncated at N_max."""
    if M < 2:
        raise ValueError("M must be >= 2")
    if M * N_max > 14:
        raise ValueError("M * N_max must stay <= 14")
    if grid.dim != 1:
        raise ValueError("gap sets are 1D constructions")
    finest = 2.0 ** (-M * N_max)
    if grid.h > finest / 4 + 1e-15:
        raise ResolutionInsufficient(f"need h <= {finest / 4:g}, got {grid.h:g}")
    x = grid.axis(0)
    removed = gap_intervals(M, N_max)
    in_gap = np.zeros(grid.shape, dtype=bool)
    for lo, hi in removed:
        in_gap |= (x > lo) & (x < hi)
    return DyadicGapSet(M=M, N_max=N_max, nodes=NodeSet(grid, ~in_gap), removed=removed)


def build_cantor(level: int, grid: Grid, interval) -> NodeSet:
    """Node-exact level-k ternary Cantor set within the interval."""
    if grid.dim != 1:
        raise ValueError("Cantor sets are 1D constructions")
    a, b = float(interval[0]), float(interval[1])
    width = (b - a) * 3.0**-level
    if grid.h > width / 2 + 1e-15:
        raise ResolutionInsufficient(f"need h <= {width / 2:g} to resolve level {level}")
    # survivor intervals at the final level, tracked by integer ternary offsets
    starts = [0]
    for _ in range(level):
        starts = [3 * s for s in starts] + [3 * s + 2 for s in starts]
    scale = (b - a) / 3.0**level
    x = grid.axis(0)
    member = np.zeros(grid.shape, dtype=bool)
    tol = 1e-9 * grid.h
    for s in sorted(starts):
        lo = a + s * scale
        member |= (x >= lo - tol) & (x <= lo + scale + tol)
    return NodeSet(grid, member)


def _witness_exists(dist_e: np.ndarray, grid: Grid, kappa: float, r: float) -> np.ndarray:
    """Per-node flag: some node y with |y-x| <= (1-kappa) r has dist(y, E) >= kappa r."""
    reach = max(int(np.floor((1.0 - kappa) * r / grid.h + 1e-9)), 0)
    if grid.dim == 1:
        best = ndimage.maximum_filter1d(dist_e, size=2 * reach + 1, mode="constant", cval=-np.inf)
    else:
        dy, dx = np.mgrid[-reach : reach + 1, -reach : reach + 1]
        foot = (dy * dy + dx * dx) * grid.h**2 <= ((1.0 - kappa) * r) ** 2 + 1e-12
        best = ndimage.maximum_filter(dist_e, footprint=foot, mode="constant", cval=-np.inf)
    return best >= kappa * r - 1e-12


def porosity_check(E: NodeSet, kappa: float, scales) -> PorosityReport:
    """Search witness balls B(y, kappa r) in B(x, r) \\ E for all x in E, r in scales.

    Only the supplied scales are probed (dyadic sampling in practice); the
    kappa estimate is the largest kappa surviving an 8-step bisection with
    zero failures.
    """
    if not (0.0 < kappa < 1.0):
        raise ValueError("kappa must lie in (0, 1)")
    coords = E.coords()
    diam = float(np.max(np.linalg.norm(coords - coords[0], axis=1), initial=0.0))
    if E.count > 1:
        diam = float(
            max(np.linalg.norm(coords.max(axis=0) - coords.min(axis=0)), diam)
        )
    scales = tuple(float(r) for r in scales)
    if any(r <= 0 for r in scales):
        raise ValueError("scales must be positive")
    if E.count > 1 and any(r > diam + 1e-12 for r in scales):
        raise ValueError("scales must not exceed diam(E)")

    mask = DomainMask(E.grid, np.ones(E.grid.shape, dtype=bool))
    dist_e = distance_to_set(mask, E).values

    def failures(kap: float):
        fails = []
        for r in scales:
            ok = _witness_exists(dist_e, E.grid, kap, r)
            for flat in np.flatnonzero(E.member.ravel() & ~ok.ravel()):
                fails.append((int(flat), r))
        return fails

    requested_failures = failures(kappa)

    lo, hi = 0.0, 1.0
    for _ in range(8):
        mid = 0.5 * (lo + hi)
        if failures(mid):
            hi = mid
        else:
            lo = mid
    return PorosityReport(
        requested_kappa=kappa,
        kappa_estimate=lo,
        scales_tested=scales,
        witness_failures=tuple(requested_failures),
    )


def covering_number(A: NodeSet, r: float) -> int:
    """Greedy number of open balls of radius r, centered at A, covering A.

    1D uses the sweep greedy (exactly minimal for interval covers); 2D uses
    the first-uncovered greedy, within factor 2 of optimal in radius.
    """
    if A.count == 0:
        raise ValueError("covering_number needs a nonempty set")
    if not r > 0:
        raise ValueError("radius must be positive")
    coords = A.coords()
    if A.grid.dim == 1:
        xs = np.sort(coords[:, 0])
        count = 0
        i = 0
        while i < xs.size:
            target = xs[i]
            j = int(np.searchsorted(xs, target + r, side="left")) - 1
            center = xs[j]
            count += 1
            i = int(np.searchsorted(xs, center + r, side="left"))
        return count
    remaining = np.ones(coords.shape[0], dtype=bool)
    count = 0
    while remaining.any():
        c = coords[np.flatnonzero(remaining)[0]]
        covered = np.linalg.norm(coords - c, axis=1) < r
        remaining &= ~covered
        count += 1
    return count


def box_dimension_estimate(A: NodeSet, r_range) -> float:
    """Least-squares slope of log N(A, r) against log(1/r)."""
    rs = sorted(float(r) for r in r_range)
    if len(rs) < 4 or rs[-1] / rs[0] < 4.0 - 1e-12:
        raise InsufficientScales("need >= 4 radii spanning >= 2 dyadic decades")
    counts = [covering_number(A, r) for r in rs]
    x = np.log(1.0 / np.asarray(rs))
    y = np.log(np.asarray(counts, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def holder_radius(
    E: NodeSet,
    mask: DomainMask,
    alpha: float,
    scale: float | None = None,
):
    """Radius field min(scale * dist(., E)^alpha, dist(., boundary)).

    The default scale is 2^(2 alpha + 1).  Clipping by the boundary distance
    is a safety net; the number of clipped nodes is reported so callers can
    check it never activates where their construction promises admissibility.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must lie in (0, 1]")
    if scale is None:
        scale = 2.0 ** (2.0 * alpha + 1.0)
    dist_e = distance_to_set(mask, E).values
    raw = scale * dist_e**alpha
    bdist = boundary_distance(mask).values
    clipped = mask.inside & (raw > bdist)
    vals = np.where(mask.inside, np.minimum(raw, bdist), 0.0)
    return RadiusField(mask, vals), int(clipped.sum())
