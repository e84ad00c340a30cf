"""Reusable test profiles: band-limited random fields, smooth bumps, radius modes."""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy import integrate

from .grid import DomainMask, RadiusField, ScalarField, boundary_distance

__all__ = [
    "band_limited_field",
    "bump",
    "psi_bump",
    "psi_scaled",
    "mollifier_kernel",
    "radius_zero",
    "radius_constant",
    "radius_boundary",
    "radius_holder",
    "radius_lipschitz",
    "radius_from_spec",
]


def band_limited_field(mask: DomainMask, rng: np.random.Generator, n_modes: int = 8) -> ScalarField:
    """Trigonometric sum with unit-normal coefficients over the window extent (1D)."""
    x = mask.grid.axis(0)
    lo, hi = x[0], x[-1]
    t = (x - lo) / (hi - lo)
    a = rng.standard_normal(n_modes)
    b = rng.standard_normal(n_modes)
    vals = np.zeros_like(t)
    for k in range(1, n_modes + 1):
        vals += a[k - 1] * np.cos(2 * math.pi * k * t) + b[k - 1] * np.sin(2 * math.pi * k * t)
    return ScalarField(mask, np.where(mask.inside, vals, 0.0))


def bump(x, a: float = 0.0, b: float = 1.0) -> np.ndarray:
    """Unnormalized C-infinity bump exp(-1/((x-a)(b-x))) supported on (a, b)."""
    x = np.asarray(x, dtype=float)
    t = (x - a) * (b - x)
    out = np.zeros_like(x)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


@functools.lru_cache(maxsize=None)
def _bump_mass(a: float = 0.0, b: float = 1.0) -> float:
    val, _ = integrate.quad(lambda u: float(bump(np.array([u]), a, b)[0]), a, b, limit=200)
    return val


def _flat_bump(x) -> np.ndarray:
    # exp(-1/(4 x (1-x))): same support as bump() with a broader plateau, so
    # coarse grids resolve both its edges and the bulk of its mass
    x = np.asarray(x, dtype=float)
    t = x * (1.0 - x)
    out = np.zeros_like(x)
    pos = t > 0
    out[pos] = np.exp(-0.25 / t[pos])
    return out


@functools.lru_cache(maxsize=None)
def _flat_bump_mass() -> float:
    val, _ = integrate.quad(lambda u: float(_flat_bump(np.array([u]))[0]), 0.0, 1.0, limit=200)
    return val


def psi_bump(x) -> np.ndarray:
    """Smooth bump on (0, 1) normalized so its integral of |psi| equals 4."""
    return 4.0 / _flat_bump_mass() * _flat_bump(x)


def psi_scaled(x, N: int) -> np.ndarray:
    """psi(2^N x): same bump squeezed onto (0, 2^-N)."""
    return psi_bump(np.asarray(x, dtype=float) * 2.0**N)


def mollifier_kernel(j: int, h: float, dim: int = 1) -> np.ndarray:
    """Discrete mollifier supported in B(0, 2^-j) with unit discrete mass (1D).

    The profile is the scale-invariant exp(-1/(1 - (z 2^j)^2)), so every j
    shares one shape and no underflow occurs as the support shrinks.
    """
    if dim != 1:
        raise ValueError("only 1D mollifiers are provided")
    half = 2.0**-j
    k = int(np.floor(half / h + 1e-9))
    t = (np.arange(-k, k + 1) * h) / half
    vals = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    vals[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    total = vals.sum() * h
    if total <= 0:
        vals = np.zeros_like(t)
        vals[k] = 1.0 / h
        return vals
    return vals / total


# ---------------------------------------------------------------------------
# radius-field builders


def radius_zero(mask: DomainMask) -> RadiusField:
    return RadiusField(mask, np.zeros(mask.grid.shape))


def radius_constant(mask: DomainMask, c: float) -> RadiusField:
    bdist = boundary_distance(mask).values
    vals = np.where(mask.inside, np.minimum(float(c), bdist), 0.0)
    return RadiusField(mask, vals)


def radius_boundary(mask: DomainMask) -> RadiusField:
    bdist = boundary_distance(mask).values
    return RadiusField(mask, np.where(mask.inside, bdist, 0.0))


def radius_holder(mask: DomainMask, alpha: float, L: float = 1.0) -> RadiusField:
    """min(L * dist(., boundary)^alpha, dist(., boundary)): alpha-Hoelder, admissible."""
    bdist = boundary_distance(mask).values
    vals = np.where(mask.inside, np.minimum(L * bdist**alpha, bdist), 0.0)
    return RadiusField(mask, vals)


def radius_lipschitz(mask: DomainMask, L: float, teeth: float = 0.125) -> RadiusField:
    """L-Lipschitz sawtooth min(L * dist(x, teeth lattice), dist boundary).

    L = 0 gives the zero radius; L = 1 with huge teeth reduces to the
    boundary distance cap.
    """
    if L == 0:
        return radius_zero(mask)
    coords = mask.grid.coords()[:, 0] if mask.grid.dim == 1 else None
    if coords is None:
        raise ValueError("lipschitz sawtooth radius is 1D only")
    saw = np.abs(coords / teeth - np.round(coords / teeth)) * teeth
    bdist = boundary_distance(mask).values
    vals = np.minimum(L * saw.reshape(mask.grid.shape), bdist)
    return RadiusField(mask, np.where(mask.inside, vals, 0.0))


def radius_from_spec(spec: str, mask: DomainMask, loader=None) -> RadiusField:
    """Parse radius modes: zero | const:c | boundary | holder:alpha,L | lip:L | file:path."""
    head, _, rest = spec.partition(":")
    head = head.strip().lower()
    if head == "zero":
        return radius_zero(mask)
    if head == "const":
        return radius_constant(mask, float(rest))
    if head == "boundary":
        return radius_boundary(mask)
    if head == "holder":
        parts = rest.split(",")
        alpha = float(parts[0])
        L = float(parts[1]) if len(parts) > 1 else 1.0
        return radius_holder(mask, alpha, L)
    if head == "lip":
        return radius_lipschitz(mask, float(rest))
    if head == "file":
        if loader is None:
            raise ValueError("file radius mode needs a loader")
        fld = loader(rest)
        return RadiusField(mask, fld.values)
    raise ValueError(f"unknown radius spec {spec!r}")
