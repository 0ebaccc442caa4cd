"""Safety dilation, clearance fields and Safe Landing Zone (SLZ) selection.

Pixel ``(x, y)`` covers the unit square with its center at
``(x + 0.5, y + 0.5)``. The image border counts as unsafe when measuring
clearance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .classes import MAX_RISK, N_RISK_LEVELS, validate_risk

# 4-connectivity
_CROSS = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class DilationPolicy:
    """Square (Chebyshev) dilation radius in pixels for each risk level."""

    radius_per_level: tuple[int, ...] = (0, 0, 0, 5, 5, 15)

    def __post_init__(self):
        radii = tuple(int(r) for r in self.radius_per_level)
        if len(radii) != N_RISK_LEVELS:
            raise ValueError(f"need {N_RISK_LEVELS} radii, got {len(radii)}")
        if any(r < 0 for r in radii):
            raise ValueError(f"radii must be nonnegative, got {list(radii)}")
        object.__setattr__(self, "radius_per_level", radii)

    @classmethod
    def identity(cls) -> DilationPolicy:
        return cls((0,) * N_RISK_LEVELS)

    @classmethod
    def uniform(cls, radius: int) -> DilationPolicy:
        """``radius`` for every level above 0."""
        return cls((0,) + (radius,) * MAX_RISK)


def _sliding_max(a: np.ndarray, radius: int, axis: int) -> np.ndarray:
    """Max over a centered window of ``2 * radius + 1`` along ``axis``, zero outside.

    Window widths double per pass, so the cost is O(log radius) array maxima.
    """
    n = 2 * radius + 1
    pad = [(0, 0)] * a.ndim
    pad[axis] = (radius, radius)
    cur = np.pad(a, pad)

    def shifted(arr, lo, hi):
        idx = [slice(None)] * arr.ndim
        idx[axis] = slice(lo, arr.shape[axis] - hi if hi else None)
        return arr[tuple(idx)]

    w = 1
    while 2 * w <= n:
        cur = np.maximum(shifted(cur, 0, w), shifted(cur, w, 0))
        w *= 2
    if w < n:
        cur = np.maximum(shifted(cur, 0, n - w), shifted(cur, n - w, 0))
    return cur


def dilate_risk(risk: np.ndarray, policy: DilationPolicy) -> np.ndarray:
    """Grow each level by its radius; a pixel takes the highest level reaching it.

    ``out[x] = max(risk[x], max{L : some pixel of level L within Chebyshev
    distance radius[L] of x})``.
    """
    risk = validate_risk(risk).astype(np.uint8, copy=False)
    out = risk.copy()
    by_radius: dict[int, list[int]] = {}
    for level, r in enumerate(policy.radius_per_level):
        if r > 0 and level > 0:
            by_radius.setdefault(r, []).append(level)
    for r, levels in sorted(by_radius.items()):
        # levels sharing a radius dilate together: square max filter of the masked map
        keep = np.zeros(N_RISK_LEVELS, dtype=np.uint8)
        keep[levels] = levels
        masked = np.take(keep, risk)
        grown = _sliding_max(_sliding_max(masked, r, axis=0), r, axis=1)
        np.maximum(out, grown, out=out)
    return out


def border_distance(height: int, width: int) -> np.ndarray:
    """Distance from each pixel center to the image rectangle's boundary."""
    ys = np.arange(height) + 0.5
    xs = np.arange(width) + 0.5
    dy = np.minimum(ys, height - ys)
    dx = np.minimum(xs, width - xs)
    return np.minimum(dy[:, None], dx[None, :])


def distance_to_risk(risk: np.ndarray, threshold: int) -> np.ndarray:
    """Exact Euclidean clearance of every pixel.

    The smaller of the distance to the nearest pixel center with risk above
    ``threshold`` and the distance to the image boundary; unsafe pixels get 0.
    """
    risk = validate_risk(risk)
    h, w = risk.shape
    safe = risk <= threshold
    dist = border_distance(h, w)
    if not safe.all():
        # nearest-feature indices, then the distance from exact integer offsets
        iy, ix = ndimage.distance_transform_edt(safe, return_distances=False, return_indices=True)
        yy, xx = np.indices((h, w))
        sq = (iy - yy).astype(np.int64) ** 2 + (ix - xx).astype(np.int64) ** 2
        np.minimum(dist, np.sqrt(sq.astype(np.float64)), out=dist)
    dist[~safe] = 0.0
    return dist


@dataclass(frozen=True)
class Region:
    """A 4-connected component of safe pixels.

    ``bbox`` is ``(x0, y0, x1, y1)`` with exclusive upper bounds;
    ``pixels`` holds ``(x, y)`` rows in row-major order.
    """

    index: int
    area: int
    bbox: tuple[int, int, int, int]
    pixels: np.ndarray


def _label_safe(risk: np.ndarray, threshold: int) -> tuple[np.ndarray, int]:
    return ndimage.label(risk <= threshold, structure=_CROSS)


def connected_regions(risk: np.ndarray, threshold: int) -> list[Region]:
    """4-connected components of ``{risk <= threshold}``, in raster order of first pixel."""
    risk = validate_risk(risk)
    labels, n = _label_safe(risk, threshold)
    regions = []
    for i, sl in enumerate(ndimage.find_objects(labels), start=1):
        ys, xs = np.nonzero(labels[sl] == i)
        ys = ys + sl[0].start
        xs = xs + sl[1].start
        regions.append(
            Region(
                index=i,
                area=int(ys.size),
                bbox=(sl[1].start, sl[0].start, sl[1].stop, sl[0].stop),
                pixels=np.stack([xs, ys], axis=1),
            )
        )
    return regions


@dataclass(frozen=True)
class SlzCandidate:
    center: tuple[int, int]
    clearance_radius: float
    max_risk_in_zone: int
    mean_risk_in_zone: float
    area: int

    def to_dict(self) -> dict:
        return {
            "center": list(self.center),
            "clearance_px": self.clearance_radius,
            "max_risk": self.max_risk_in_zone,
            "mean_risk": self.mean_risk_in_zone,
            "area_px": self.area,
        }


def zone_mask(shape: tuple[int, int], center: tuple[int, int], radius: float) -> tuple:
    """Window slices and boolean mask of pixel centers strictly inside the disk."""
    h, w = shape
    cx, cy = center
    reach = int(np.ceil(radius))
    y0, y1 = max(cy - reach, 0), min(cy + reach + 1, h)
    x0, x1 = max(cx - reach, 0), min(cx + reach + 1, w)
    yy, xx = np.ogrid[y0 - cy : y1 - cy, x0 - cx : x1 - cx]
    mask = np.sqrt((yy * yy + xx * xx).astype(np.float64)) < radius
    return (slice(y0, y1), slice(x0, x1)), mask


def _zone_stats(risk: np.ndarray, center: tuple[int, int], radius: float) -> tuple[int, float, int]:
    window, mask = zone_mask(risk.shape, center, radius)
    values = risk[window][mask]
    return int(values.max()), float(values.mean()), int(values.size)


def select_slz(risk: np.ndarray, threshold: int, k: int = 5) -> list[SlzCandidate]:
    """Rank up to ``k`` landing candidates, at most one per safe region.

    Each region proposes its pixel of maximal clearance (ties: nearest the
    image center, then row-major). The zone is the open disk of that
    clearance; the disk touches, but never contains, the nearest unsafe pixel
    center. Candidates are ranked by clearance descending, mean zone risk
    ascending, then row-major center.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    risk = validate_risk(risk)
    h, w = risk.shape
    labels, n = _label_safe(risk, threshold)
    if n == 0:
        return []
    dist = distance_to_risk(risk, threshold)

    ys, xs = np.nonzero(labels)
    lab = labels[ys, xs]
    clear = dist[ys, xs]
    # squared distance to the image center, scaled by 4 to stay integral
    centrality = (2 * xs + 1 - w).astype(np.int64) ** 2 + (2 * ys + 1 - h).astype(np.int64) ** 2
    raster = ys.astype(np.int64) * w + xs
    order = np.lexsort((raster, centrality, -clear, lab))
    first = np.ones(order.size, dtype=bool)
    first[1:] = lab[order][1:] != lab[order][:-1]
    picks = order[first]
    if picks.size > k:
        # only regions tied with or above the k-th clearance can rank
        cutoff = np.sort(clear[picks])[::-1][k - 1]
        picks = picks[clear[picks] >= cutoff]

    candidates = []
    for p in picks:
        center = (int(xs[p]), int(ys[p]))
        radius = float(clear[p])
        max_risk, mean_risk, area = _zone_stats(risk, center, radius)
        candidates.append(SlzCandidate(center, radius, max_risk, mean_risk, area))
    candidates.sort(key=lambda c: (-c.clearance_radius, c.mean_risk_in_zone, c.center[1], c.center[0]))
    return candidates[:k]
