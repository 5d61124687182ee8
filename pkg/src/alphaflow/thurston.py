"""Subset-enumeration checks for constant-curvature existence and admissible curvature.

Every nonempty proper vertex subset ``I`` is encoded as a bitmask (bit ``v``
set iff vertex ``v`` is in ``I``) and tested against

    lhs(I) > -sum_{(e, v) in Lk(I)} (pi - Phi(e)) + 2 pi chi(F_I) = rhs(I)

where only ``lhs`` differs between the three checks.  Work is vectorized
over blocks of consecutive masks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .complex_core import WeightedSurface
from .errors import TooManyVertices
from .packing2d import as_radii

DEFAULT_CAP = 22
MARGIN = 1e-9
_BLOCK = 1 << 15


class SubsetVerdict(NamedTuple):
    subset: tuple[int, ...]
    mask: int
    lhs: float
    rhs: float
    passed: bool
    marginal: bool


@dataclass
class SubsetReport:
    """Outcome of one enumeration; arrays are aligned with ``masks``."""

    mode: str
    vertex_count: int
    masks: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    gauss_bonnet_ok: bool = True
    gauss_bonnet_sum: float | None = None
    complete: bool = True

    @property
    def passed_flags(self) -> np.ndarray:
        return self.lhs > self.rhs

    @property
    def marginal_flags(self) -> np.ndarray:
        return np.abs(self.lhs - self.rhs) <= MARGIN

    @property
    def passed(self) -> bool:
        return bool(self.gauss_bonnet_ok and np.all(self.passed_flags))

    @property
    def failing_masks(self) -> list[int]:
        return [int(m) for m in self.masks[~self.passed_flags]]

    def failing_subsets(self) -> list[tuple[int, ...]]:
        return [mask_to_subset(m) for m in self.failing_masks]

    def __len__(self) -> int:
        return len(self.masks)

    def verdicts(self) -> Iterator[SubsetVerdict]:
        passed = self.passed_flags
        marginal = self.marginal_flags
        for k in range(len(self.masks)):
            m = int(self.masks[k])
            yield SubsetVerdict(
                mask_to_subset(m), m, float(self.lhs[k]), float(self.rhs[k]), bool(passed[k]), bool(marginal[k])
            )

    def verdict_for(self, subset) -> SubsetVerdict:
        m = subset_to_mask(subset)
        k = int(np.searchsorted(self.masks, m))
        if k >= len(self.masks) or int(self.masks[k]) != m:
            raise KeyError(f"subset {tuple(subset)} was not evaluated")
        lhs, rhs = float(self.lhs[k]), float(self.rhs[k])
        return SubsetVerdict(mask_to_subset(m), m, lhs, rhs, lhs > rhs, abs(lhs - rhs) <= MARGIN)

    def to_dict(self, records: bool = True) -> dict:
        out = {
            "mode": self.mode,
            "vertex_count": self.vertex_count,
            "subsets_checked": len(self.masks),
            "complete": self.complete,
            "passed": self.passed,
            "failures": int(np.count_nonzero(~self.passed_flags)),
            "marginal": int(np.count_nonzero(self.marginal_flags)),
        }
        if self.gauss_bonnet_sum is not None:
            out["gauss_bonnet_ok"] = self.gauss_bonnet_ok
            out["gauss_bonnet_sum"] = self.gauss_bonnet_sum
        if records:
            out["records"] = [
                {"mask": v.mask, "subset": list(v.subset), "lhs": v.lhs, "rhs": v.rhs, "pass": v.passed,
                 "marginal": v.marginal}
                for v in self.verdicts()
            ]
        return out


def subset_to_mask(subset) -> int:
    m = 0
    for v in subset:
        m |= 1 << int(v)
    return m


def mask_to_subset(mask: int) -> tuple[int, ...]:
    return tuple(v for v in range(mask.bit_length()) if mask >> v & 1)


class _Tables:
    """Index arrays of the surface reused for every block of masks."""

    def __init__(self, surface: WeightedSurface):
        self.n = surface.vertex_count
        self.faces = surface.faces
        self.edges = surface.edges
        # corner (v; a, b) with the weight of the opposite edge ab
        self.link_w = math.pi - surface.weights[surface.face_edges]  # [F, 3]


def _rhs_block(tab: _Tables, bits: np.ndarray) -> np.ndarray:
    f = tab.faces
    inf = bits[:, f]  # [B, F, 3]
    link = np.zeros(bits.shape[0])
    for c in range(3):
        a, b = (c + 1) % 3, (c + 2) % 3
        only = inf[:, :, c] & ~inf[:, :, a] & ~inf[:, :, b]
        link += only.astype(float) @ tab.link_w[:, c]
    e = tab.edges
    n_edges = np.count_nonzero(bits[:, e[:, 0]] & bits[:, e[:, 1]], axis=1)
    n_faces = np.count_nonzero(inf.all(axis=2), axis=1)
    chi = bits.sum(axis=1) - n_edges + n_faces
    return -link + 2.0 * math.pi * chi


def _enumerate(surface: WeightedSurface, weights: np.ndarray, mode: str, cap: int, stop_on_failure: bool,
               workers: int) -> SubsetReport:
    """Evaluate ``lhs = bits @ weights`` and ``rhs`` for all nonempty proper subsets."""
    n = surface.vertex_count
    if n > cap:
        raise TooManyVertices(f"{n} vertices exceed the enumeration cap of {cap}")
    tab = _Tables(surface)
    total = (1 << n) - 2
    shifts = np.arange(n, dtype=np.uint64)

    def block(start):
        masks = np.arange(start, min(start + _BLOCK, total + 1), dtype=np.uint64)
        bits = ((masks[:, None] >> shifts[None, :]) & np.uint64(1)).astype(bool)
        return masks, bits.astype(float) @ weights, _rhs_block(tab, bits)

    starts = range(1, total + 1, _BLOCK)
    parts = []
    complete = True
    if workers > 1 and not stop_on_failure:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))
    else:
        for s in starts:
            masks, lhs, rhs = block(s)
            if stop_on_failure:
                bad = np.flatnonzero(~(lhs > rhs))
                if bad.size:
                    k = int(bad[0]) + 1
                    parts.append((masks[:k], lhs[:k], rhs[:k]))
                    complete = False
                    break
            parts.append((masks, lhs, rhs))
    masks = np.concatenate([p[0] for p in parts]).astype(np.int64)
    return SubsetReport(
        mode=mode,
        vertex_count=n,
        masks=masks,
        lhs=np.concatenate([p[1] for p in parts]),
        rhs=np.concatenate([p[2] for p in parts]),
        complete=complete,
    )


def thurston_condition(surface: WeightedSurface, cap: int = DEFAULT_CAP, stop_on_failure: bool = False,
                       workers: int = 1) -> SubsetReport:
    """Check ``2 pi chi |I| / |V| > rhs(I)`` for every nonempty proper subset."""
    n = surface.vertex_count
    w = np.full(n, 2.0 * math.pi * surface.euler_characteristic / n)
    return _enumerate(surface, w, "thurston", cap, stop_on_failure, workers)


def ge_xu_condition(surface: WeightedSurface, r_star, alpha: float, cap: int = DEFAULT_CAP,
                    stop_on_failure: bool = False, workers: int = 1) -> SubsetReport:
    """Metric-weighted variant: ``lhs = 2 pi chi sum_{i in I} r_i^alpha / ||r||_alpha^alpha``.

    With ``alpha * chi <= 0``, passing at some ``r_star`` is equivalent to the
    existence of a constant alpha-curvature metric.
    """
    r = as_radii(r_star)
    if r.shape != (surface.vertex_count,):
        raise ValueError(f"expected {surface.vertex_count} radii")
    ra = r**alpha
    w = 2.0 * math.pi * surface.euler_characteristic * ra / ra.sum()
    return _enumerate(surface, w, "gexu", cap, stop_on_failure, workers)


def admissible_curvature_membership(surface: WeightedSurface, x, cap: int = DEFAULT_CAP, gb_tol: float = 1e-9,
                                    stop_on_failure: bool = False, workers: int = 1) -> SubsetReport:
    """Whether ``x`` is the curvature of some circle packing metric.

    True iff ``sum(x) = 2 pi chi`` (within ``gb_tol``) and every subset sum of
    ``x`` exceeds ``rhs(I)``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (surface.vertex_count,):
        raise ValueError(f"expected {surface.vertex_count} curvature values")
    rep = _enumerate(surface, x, "membership", cap, stop_on_failure, workers)
    total = float(x.sum())
    rep.gauss_bonnet_sum = total
    rep.gauss_bonnet_ok = abs(total - 2.0 * math.pi * surface.euler_characteristic) <= gb_tol
    return rep
