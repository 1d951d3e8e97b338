"""Array-in/array-out calls into the pruning engine, no file round trips.

Meant for encoder hooks that already hold attention and token buffers in
host memory. Inputs must be C-contiguous (a non-contiguous buffer is an
error, never a silent copy); contiguous numpy arrays and buffer-protocol
objects are consumed zero-copy. Outputs are freshly allocated and owned
by the caller. Results match the file/CLI path exactly: serializing the
returned indices reproduces the CLI's indices file byte for byte, and
errors are the engine's own exceptions with the engine's own messages.
"""
from __future__ import annotations

import numpy as np

import hivtp
from hivtp import AttentionStack, LayerSet, PruneConfig, hivtp_prune
from hivtp.errors import ValidationError
from hivtp.importance import compute_importance

__version__ = hivtp.__version__

__all__ = ["PruneConfig", "prune_arrays", "score_arrays", "__version__"]


def _as_array(buffer, name: str) -> np.ndarray:
    """Wrap a caller-owned buffer without copying; reject non-contiguous input."""
    if isinstance(buffer, np.ndarray):
        if not buffer.flags["C_CONTIGUOUS"]:
            raise ValidationError(
                f"{name} buffer is not C-contiguous; pass a row-major buffer "
                "(no silent copy is made)"
            )
        return buffer
    view = memoryview(buffer)
    if not view.c_contiguous:
        raise ValidationError(
            f"{name} buffer is not C-contiguous; pass a row-major buffer "
            "(no silent copy is made)"
        )
    return np.asarray(view)


def score_arrays(attn, layers) -> np.ndarray:
    """Importance scores from a 4-D attention buffer.

    layers is an iterable of 1-based layer indices (or a LayerSet). Returns
    a float64 vector of length N, identical to the file-path scorer.
    """
    stack = AttentionStack(_as_array(attn, "attn"))
    layer_set = layers if isinstance(layers, LayerSet) else LayerSet(tuple(layers))
    return compute_importance(stack, layer_set)


def prune_arrays(attn, tokens, config: PruneConfig):
    """Score and hierarchically prune in one call.

    Returns (indices, retained, scores, summary): the sorted kept indices
    as uint32, the gathered token rows in the input dtype, the float64
    scores, and a dict mirroring the CLI summary keys.
    """
    stack = AttentionStack(_as_array(attn, "attn"))
    token_matrix = _as_array(tokens, "tokens")
    result, retained, scores = hivtp_prune(stack, token_matrix, config)
    summary = {
        "n": config.grid_side,
        "regions": config.region_divisor,
        "topk": config.top_percent,
        "window": config.window_side,
        "layers": str(config.layers),
        "global_budget": config.global_budget,
        "p_max": config.max_retained,
        "p_g": result.p_g,
        "p_l": result.p_l,
        "p": result.p,
        "r_retain": result.r_retain,
        "r_max": config.max_ratio,
    }
    return result.final_indices.astype(np.uint32), retained, scores, summary
