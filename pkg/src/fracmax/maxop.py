"""Local maximal operators on masked grids.

The local operator takes, at each node x, the supremum of averages of |f|
over balls B(x, r) with radii drawn from the quantized set

    S(x) = {0} u {k*h : 1 <= k <= floor(R(x)/h)} u {R(x)},

where the r = 0 term is |f(x)| itself.  Averages are arithmetic means over
the inside nodes of the closed ball; in 1D the node set of the endpoint ball
coincides with that of the largest grid multiple, so the endpoint is
implicit.  Two implementations are provided: a direct reference evaluation
and a prefix-sum (1D) / summed-area-table (2D) fast path that must agree with
the reference to 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionUnsupported
from .grid import DomainMask, ProductField, RadiusField, ScalarField

__all__ = [
    "MaximalResult",
    "local_maximal",
    "local_maximal_fast",
    "hardy_littlewood",
    "truncated_maximal",
    "directional_maximal",
]

_RADIUS_GUARD = 1e-9  # absolute fuzz on R/h so k*h <= R survives float rounding


def radius_index(radii, h: float) -> np.ndarray:
    """Largest k with k*h <= r, robust to float rounding in r/h."""
    return np.floor(np.asarray(radii, dtype=float) / h + _RADIUS_GUARD).astype(int)


@dataclass(frozen=True, eq=False)
class MaximalResult:
    """Maximal-function values together with a radius attaining each supremum."""

    field: ScalarField
    argmax_radius: np.ndarray


# ---------------------------------------------------------------------------
# batched 1D window engine
#
# Lines are rows of a (L, W) array; each element i of a line has its own
# maximal radius index kmax[l, i].  Averages are over inside nodes of the
# window [i-k, i+k] clipped to the line.


def _line_window_max(vals, inside, kmax, include_zero=True):
    vals = np.asarray(vals, dtype=float)
    inside = np.asarray(inside, dtype=bool)
    L, W = vals.shape
    masked = np.where(inside, np.abs(vals), 0.0)
    # pad each line by a full window of outside nodes so every radius window
    # is a contiguous slice of the prefix sums (no index clipping)
    S = np.zeros((L, 3 * W + 1))
    np.cumsum(masked, axis=1, out=S[:, W + 1 : 2 * W + 1])
    S[:, 2 * W + 1 :] = S[:, 2 * W : 2 * W + 1]
    C = np.zeros((L, 3 * W + 1))
    np.cumsum(inside, axis=1, out=C[:, W + 1 : 2 * W + 1])
    C[:, 2 * W + 1 :] = C[:, 2 * W : 2 * W + 1]

    if include_zero:
        best = np.where(inside, masked, -np.inf)
        argk = np.zeros((L, W), dtype=int)
    else:
        best = np.full((L, W), -np.inf)
        argk = np.full((L, W), -1, dtype=int)

    kcap = min(int(np.max(kmax, initial=0)), W)
    uniform = bool((kmax == kcap).all())
    for k in range(1, kcap + 1):
        sums = S[:, W + k + 1 : 2 * W + k + 1] - S[:, W - k : 2 * W - k]
        cnts = C[:, W + k + 1 : 2 * W + k + 1] - C[:, W - k : 2 * W - k]
        avg = sums / np.maximum(cnts, 1)
        if uniform:
            upd = inside & (avg > best)
        else:
            upd = inside & (kmax >= k) & (avg > best)
        best[upd] = avg[upd]
        argk[upd] = k
    return best, argk


# ---------------------------------------------------------------------------
# 2D helpers


def _disk_spans(rho: float):
    """Row half-widths of the closed disk of radius rho (index units)."""
    kd = int(np.floor(rho + _RADIUS_GUARD))
    dys = np.arange(-kd, kd + 1)
    dxm = np.floor(np.sqrt(np.maximum(rho * rho - dys.astype(float) ** 2, 0.0)) + _RADIUS_GUARD).astype(int)
    return dys, dxm


def _row_cumsums(vals, inside):
    masked = np.where(inside, np.abs(vals), 0.0)
    S = np.zeros((vals.shape[0], vals.shape[1] + 1))
    np.cumsum(masked, axis=1, out=S[:, 1:])
    C = np.zeros((vals.shape[0], vals.shape[1] + 1))
    np.cumsum(inside, axis=1, out=C[:, 1:])
    return S, C


def _disk_sums_all(S, C, rho: float):
    """Ball sums/counts at every node for one disk radius, via row segments."""
    H, W = S.shape[0], S.shape[1] - 1
    dys, dxm = _disk_spans(rho)
    jj = np.arange(W)
    total = np.zeros((H, W))
    count = np.zeros((H, W))
    for dy, dx in zip(dys, dxm):
        r0 = max(0, -dy)
        r1 = min(H, H - dy)
        if r0 >= r1:
            continue
        lo = np.maximum(jj - dx, 0)
        hi1 = np.minimum(jj + dx, W - 1) + 1
        total[r0:r1] += S[r0 + dy : r1 + dy, hi1] - S[r0 + dy : r1 + dy, lo]
        count[r0:r1] += C[r0 + dy : r1 + dy, hi1] - C[r0 + dy : r1 + dy, lo]
    return total, count


def _local_maximal_2d_fast(f: ScalarField, R: RadiusField):
    inside = f.mask.inside
    h = f.grid.h
    kmax = np.where(inside, radius_index(R.values, h), -1)
    S, C = _row_cumsums(f.values, inside)
    best = np.where(inside, np.abs(f.values), -np.inf)
    argr = np.zeros(f.grid.shape)
    kcap = int(kmax.max(initial=0))
    for k in range(1, kcap + 1):
        total, count = _disk_sums_all(S, C, float(k))
        avg = total / np.maximum(count, 1)
        upd = inside & (kmax >= k) & (avg > best)
        best[upd] = avg[upd]
        argr[upd] = k * h
    # endpoint radius R(x): in 2D it may include node-hitting radii strictly
    # between floor(R/h)*h and R (e.g. sqrt(2)*h), so evaluate it per node
    rho_all = R.values / h
    frac = inside & (rho_all - np.floor(rho_all + _RADIUS_GUARD) > _RADIUS_GUARD)
    for i, j in np.argwhere(frac):
        rho = rho_all[i, j]
        dys, dxm = _disk_spans(rho)
        tot = 0.0
        cnt = 0.0
        H, W = f.grid.shape
        for dy, dx in zip(dys, dxm):
            r = i + dy
            if 0 <= r < H:
                lo = max(j - dx, 0)
                hi1 = min(j + dx, W - 1) + 1
                tot += S[r, hi1] - S[r, lo]
                cnt += C[r, hi1] - C[r, lo]
        if cnt > 0:
            avg = tot / cnt
            if avg > best[i, j]:
                best[i, j] = avg
                argr[i, j] = R.values[i, j]
    vals = np.where(inside, best, 0.0)
    return vals, argr


def _local_maximal_2d_reference(f: ScalarField, R: RadiusField):
    inside = f.mask.inside
    h = f.grid.h
    H, W = f.grid.shape
    absf = np.where(inside, np.abs(f.values), 0.0)
    kmax = radius_index(R.values, h)
    vals = np.zeros(f.grid.shape)
    argr = np.zeros(f.grid.shape)
    for i, j in np.argwhere(inside):
        radii = [k * h for k in range(kmax[i, j] + 1)]
        if R.values[i, j] / h - kmax[i, j] > _RADIUS_GUARD:
            radii.append(R.values[i, j])
        best = -np.inf
        barg = 0.0
        for r in radii:
            dys, dxm = _disk_spans(r / h)
            tot = 0.0
            cnt = 0
            for dy, dx in zip(dys, dxm):
                ii = i + dy
                if 0 <= ii < H:
                    lo = max(j - dx, 0)
                    hi = min(j + dx, W - 1)
                    tot += absf[ii, lo : hi + 1].sum()
                    cnt += int(inside[ii, lo : hi + 1].sum())
            if cnt > 0:
                avg = tot / cnt
                if avg > best:
                    best = avg
                    barg = r
        vals[i, j] = best
        argr[i, j] = barg
    return vals, argr


# ---------------------------------------------------------------------------
# public operators


def _check_pair(f: ScalarField, R: RadiusField):
    f.mask.require_compatible(R.mask)


def local_maximal(f: ScalarField, R: RadiusField) -> MaximalResult:
    """Reference evaluation of the local maximal operator."""
    _check_pair(f, R)
    if f.grid.dim == 1:
        inside = f.mask.inside
        absf = np.where(inside, np.abs(f.values), 0.0)
        h = f.grid.h
        kmax = radius_index(R.values, h)
        W = f.grid.shape[0]
        vals = np.zeros(W)
        argr = np.zeros(W)
        for i in np.flatnonzero(inside):
            K = kmax[i]
            lo = max(0, i - K)
            hi = min(W - 1, i + K)
            seg = absf[lo : hi + 1]
            ins = inside[lo : hi + 1]
            cs = np.concatenate([[0.0], np.cumsum(seg)])
            cc = np.concatenate([[0], np.cumsum(ins)])
            ks = np.arange(K + 1)
            los = np.maximum(i - ks, lo) - lo
            his = np.minimum(i + ks, hi) - lo
            sums = cs[his + 1] - cs[los]
            cnts = cc[his + 1] - cc[los]
            avgs = sums / np.maximum(cnts, 1)
            avgs[cnts == 0] = -np.inf
            kbest = int(np.argmax(avgs))
            vals[i] = avgs[kbest]
            argr[i] = kbest * h
        return MaximalResult(ScalarField(f.mask, vals), argr)
    vals, argr = _local_maximal_2d_reference(f, R)
    return MaximalResult(ScalarField(f.mask, vals), argr)


def local_maximal_fast(f: ScalarField, R: RadiusField) -> MaximalResult:
    """Prefix-sum / summed-area-table evaluation; agrees with the reference to 1e-12."""
    _check_pair(f, R)
    if f.grid.dim == 1:
        inside = f.mask.inside[None, :]
        kmax = np.where(inside, radius_index(R.values, f.grid.h)[None, :], -1)
        best, argk = _line_window_max(f.values[None, :], inside, kmax)
        vals = np.where(f.mask.inside, best[0], 0.0)
        return MaximalResult(ScalarField(f.mask, vals), argk[0] * f.grid.h)
    vals, argr = _local_maximal_2d_fast(f, R)
    return MaximalResult(ScalarField(f.mask, vals), argr)


def _whole_space_radius(mask: DomainMask, value: float) -> RadiusField:
    return RadiusField(mask, np.full(mask.grid.shape, value))


def hardy_littlewood(f: ScalarField) -> ScalarField:
    """Global maximal function: every radius inside the window is admissible."""
    if not f.mask.represents_whole_space:
        raise ValueError("hardy_littlewood requires a whole-space window")
    spans = [(s - 1) * f.grid.h for s in f.grid.shape]
    diam = float(np.sqrt(np.sum(np.square(spans))))
    return local_maximal_fast(f, _whole_space_radius(f.mask, diam)).field


def truncated_maximal(f: ScalarField) -> ScalarField:
    """Maximal function over radii 0 < r <= 1 only (no r = 0 term)."""
    if not f.mask.represents_whole_space:
        raise ValueError("truncated_maximal requires a whole-space window")
    h = f.grid.h
    if h > 1.0:
        raise ValueError("grid spacing must not exceed the truncation radius 1")
    if f.grid.dim == 1:
        inside = f.mask.inside[None, :]
        kmax = np.where(inside, radius_index(1.0, h), -1) * np.ones_like(inside, dtype=int)
        best, _ = _line_window_max(f.values[None, :], inside, kmax, include_zero=False)
        return ScalarField(f.mask, np.where(f.mask.inside, best[0], 0.0))
    # 2D: run the general engine with R = 1 and subtract the r = 0 seed by
    # rerunning the k-loop without it
    inside = f.mask.inside
    S, C = _row_cumsums(f.values, inside)
    best = np.full(f.grid.shape, -np.inf)
    kcap = radius_index(1.0, h)
    for k in range(1, int(kcap) + 1):
        total, count = _disk_sums_all(S, C, float(k))
        avg = total / np.maximum(count, 1)
        upd = inside & (avg > best)
        best[upd] = avg[upd]
    rho = 1.0 / h
    if rho - np.floor(rho + _RADIUS_GUARD) > _RADIUS_GUARD:
        total, count = _disk_sums_all(S, C, rho)
        avg = total / np.maximum(count, 1)
        upd = inside & (avg > best)
        best[upd] = avg[upd]
    return ScalarField(f.mask, np.where(inside, best, 0.0))


# ---------------------------------------------------------------------------
# directional operators on product grids (1D base only)


def _diag_lines(a: np.ndarray):
    """Pack all diagonals of a square array into padded lines."""
    W = a.shape[0]
    L = 2 * W - 1
    lines = np.zeros((L, W))
    inside = np.zeros((L, W), dtype=bool)
    for t, off in enumerate(range(-(W - 1), W)):
        d = np.diagonal(a, offset=off)
        lines[t, : d.size] = d
        inside[t, : d.size] = True
    return lines, inside


def _diag_scatter(lines: np.ndarray, W: int) -> np.ndarray:
    out = np.zeros((W, W))
    for t, off in enumerate(range(-(W - 1), W)):
        n = W - abs(off)
        ii = np.arange(n) + max(0, -off)
        jj = np.arange(n) + max(0, off)
        out[ii, jj] = lines[t, :n]
    return out


def _directional_batch(arrs, i, j):
    """Directional maximal values for a batch of (W, W) arrays at once."""
    arrs = [np.abs(np.asarray(a, dtype=float)) for a in arrs]
    B = len(arrs)
    W = arrs[0].shape[0]
    if (i, j) == (0, 0):
        return arrs
    if (i, j) in ((0, 1), (1, 0)):
        stack = np.concatenate([a if j == 1 else a.T for a in arrs], axis=0)
        inside = np.ones_like(stack, dtype=bool)
        kmax = np.full(stack.shape, W, dtype=int)
        best, _ = _line_window_max(stack, inside, kmax)
        outs = [best[b * W : (b + 1) * W] for b in range(B)]
        return outs if j == 1 else [o.T for o in outs]
    lines = []
    insides = []
    for a in arrs:
        ln, ins = _diag_lines(a)
        lines.append(ln)
        insides.append(ins)
    stack = np.concatenate(lines, axis=0)
    ins = np.concatenate(insides, axis=0)
    kmax = np.where(ins, W, -1)
    best, _ = _line_window_max(stack, ins, kmax)
    n_lines = 2 * W - 1
    return [_diag_scatter(best[b * n_lines : (b + 1) * n_lines], W) for b in range(B)]


def directional_maximal(F: ProductField, i: int, j: int) -> ProductField:
    """Directional maximal operator on a product grid.

    Averages |F(x + i z, y + j z)| over z-nodes with |z| <= r, the shifted
    indices restricted to the window, and takes the supremum over grid radii
    (including the r = 0 term, which makes (i, j) = (0, 0) the identity on
    |F|).  Slices with one frozen coordinate reduce exactly to the 1D maximal
    operator along the other.
    """
    if i not in (0, 1) or j not in (0, 1):
        raise ValueError("direction flags must be 0 or 1")
    if F.grid.dim != 1:
        raise DimensionUnsupported("directional operators need a 1D base grid")
    vals = np.abs(F.values)
    W = F.grid.shape[0]
    if (i, j) == (0, 0):
        return ProductField(F.grid, F.inside, vals)
    full = np.ones((1, W), dtype=bool)
    if (i, j) == (0, 1):
        inside = np.ones_like(vals, dtype=bool)
        kmax = np.full(vals.shape, W, dtype=int)
        best, _ = _line_window_max(vals, inside, kmax)
        return ProductField(F.grid, F.inside, best)
    if (i, j) == (1, 0):
        inside = np.ones_like(vals, dtype=bool)
        kmax = np.full(vals.shape, W, dtype=int)
        best, _ = _line_window_max(vals.T, inside, kmax)
        return ProductField(F.grid, F.inside, best.T)
    lines, lin_inside = _diag_lines(vals)
    kmax = np.full(lines.shape, W, dtype=int)
    best, _ = _line_window_max(lines, lin_inside, np.where(lin_inside, kmax, -1))
    return ProductField(F.grid, F.inside, _diag_scatter(best, W))
