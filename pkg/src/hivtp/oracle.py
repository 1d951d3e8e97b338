"""Brute-force reference for the hierarchical selection.

Same semantics as the fast path in ``pruning``, written as plain loops,
full sorts, and linear scans on purpose. It shares the config and result
types but none of the selection code, so agreement between the two is a
meaningful check rather than a tautology.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import ShapeMismatch
from .pruning import PruneConfig, SelectionResult


def oracle_prune(scores, config: PruneConfig) -> SelectionResult:
    n = config.grid_side
    total = n * n
    values = [float(v) for v in np.asarray(scores).ravel()]
    if np.asarray(scores).ndim != 1 or len(values) != total:
        raise ShapeMismatch(f"scores must be a length-{total} vector")

    budget = int(total * Fraction(str(config.top_percent)) // 100)
    region_count = config.region_divisor**2
    base, remainder = divmod(budget, region_count)

    # global stage: sort every region fully, take the quota prefix
    side = n // config.region_divisor
    kept_global: list[int] = []
    region_id = 0
    for block_row in range(config.region_divisor):
        for block_col in range(config.region_divisor):
            members = [
                (block_row * side + dr) * n + (block_col * side + dc)
                for dr in range(side)
                for dc in range(side)
            ]
            quota = base + (1 if region_id < remainder else 0)
            ranked = sorted(members, key=lambda t: (-values[t], t))
            kept_global.extend(ranked[:quota])
            region_id += 1
    global_set = set(kept_global)

    # local stage: linear scan per window, strict > keeps the lower index
    c = config.window_side
    kept_local: list[int] = []
    for win_row in range(n // c):
        for win_col in range(n // c):
            best = -1
            for dr in range(c):
                for dc in range(c):
                    t = (win_row * c + dr) * n + (win_col * c + dc)
                    if t in global_set:
                        continue
                    if best < 0 or values[t] > values[best]:
                        best = t
            if best >= 0:
                kept_local.append(best)

    final = sorted(global_set | set(kept_local))
    return SelectionResult(
        global_indices=np.array(sorted(global_set), dtype=np.int64),
        local_indices=np.array(sorted(kept_local), dtype=np.int64),
        final_indices=np.array(final, dtype=np.int64),
        p_g=len(global_set),
        p_l=len(kept_local),
        p=len(final),
        r_retain=len(final) / total,
    )
