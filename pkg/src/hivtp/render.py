"""Score heatmaps (PGM) and retained-token masks (PPM).

Plain binary netpbm output: no imaging library, byte-identical for
identical inputs. One comment line in each header records the settings
the image was produced with.
"""
from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch
from .pruning import SelectionResult

PRUNED_GRAY = (40, 40, 40)
GLOBAL_GREEN = (0, 255, 0)
LOCAL_RED = (255, 0, 0)


def _expand(cells: np.ndarray, cell_px: int) -> np.ndarray:
    return np.repeat(np.repeat(cells, cell_px, axis=0), cell_px, axis=1)


def render_heatmap(scores, n: int, cell_px: int) -> bytes:
    """Binary PGM (P5), one cell_px x cell_px block per token, row-major.

    Scores are min-max scaled per image: minimum to 0, maximum to 255,
    constant input to a uniform 128.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.shape[0] != n * n:
        raise ShapeMismatch(f"need {n * n} scores for an {n}x{n} grid, got shape {scores.shape}")
    if cell_px < 1:
        raise ShapeMismatch(f"cell_px must be >= 1, got {cell_px}")

    lo, hi = scores.min(), scores.max()
    if hi > lo:
        levels = np.rint((scores - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        levels = np.full(n * n, 128, dtype=np.uint8)

    img = _expand(levels.reshape(n, n), cell_px)
    header = f"P5\n# hivtp heatmap n={n} cell_px={cell_px}\n{img.shape[1]} {img.shape[0]}\n255\n"
    return header.encode("ascii") + img.tobytes()


def render_mask(result: SelectionResult, n: int, cell_px: int) -> bytes:
    """Binary PPM (P6): global picks green, local picks red, pruned gray."""
    if cell_px < 1:
        raise ShapeMismatch(f"cell_px must be >= 1, got {cell_px}")
    total = n * n
    for idx_set in (result.global_indices, result.local_indices):
        arr = np.asarray(idx_set)
        if arr.size and (arr.min() < 0 or arr.max() >= total):
            raise ShapeMismatch(f"selection indices out of range for an {n}x{n} grid")

    colors = np.tile(np.array(PRUNED_GRAY, dtype=np.uint8), (total, 1))
    colors[np.asarray(result.global_indices, dtype=np.int64)] = GLOBAL_GREEN
    colors[np.asarray(result.local_indices, dtype=np.int64)] = LOCAL_RED

    img = _expand(colors.reshape(n, n, 3), cell_px)
    header = (
        f"P6\n# hivtp mask n={n} cell_px={cell_px} p_g={result.p_g} p_l={result.p_l}\n"
        f"{img.shape[1]} {img.shape[0]}\n255\n"
    )
    return header.encode("ascii") + img.tobytes()
