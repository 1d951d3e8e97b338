"""Per-token importance from middle-layer attention.

A token's importance is the attention it receives, averaged over a chosen
set of encoder layers, over heads, and over every query row including the
class token's row. The class token's own column is dropped from the result,
so the score vector has one entry per image patch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LayerOutOfRange, NotPerfectSquare, ShapeMismatch
from .hvtd import read_hvtd

VALUE_TOLERANCE = 1e-5
ROW_SUM_TOLERANCE = 1e-4


def recover_grid_side(token_count_with_cls: int) -> int:
    """Return n such that n*n + 1 == token_count_with_cls, n >= 2."""
    if token_count_with_cls < 5:
        raise NotPerfectSquare(
            f"token count {token_count_with_cls} too small, need n >= 2 plus CLS"
        )
    n = math.isqrt(token_count_with_cls - 1)
    if n * n != token_count_with_cls - 1:
        raise NotPerfectSquare(
            f"token count {token_count_with_cls} is not a square grid plus CLS"
        )
    return n


@dataclass(frozen=True)
class LayerSet:
    """Ordered set of 1-based encoder layer indices."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise LayerOutOfRange("layer set is empty")
        if any(i < 1 for i in idx):
            raise LayerOutOfRange("layer indices are 1-based; got index < 1")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise LayerOutOfRange(f"layer indices must be strictly increasing: {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def parse(cls, text: str) -> "LayerSet":
        """Parse "7-10" (inclusive range) or "7,8,9,10" (comma list)."""
        text = text.strip()
        try:
            if "-" in text:
                lo, hi = text.split("-", 1)
                return cls(tuple(range(int(lo), int(hi) + 1)))
            return cls(tuple(int(p) for p in text.split(",")))
        except ValueError as exc:
            raise LayerOutOfRange(f"cannot parse layer spec {text!r}") from exc

    def __iter__(self):
        return iter(self.indices)

    def __str__(self):
        return ",".join(str(i) for i in self.indices)


DEFAULT_LAYERS = LayerSet((7, 8, 9, 10))


def _coerce_layers(layers) -> LayerSet:
    if isinstance(layers, LayerSet):
        return layers
    return LayerSet(tuple(layers))


class AttentionStack:
    """Validated [layers, heads, N+1, N+1] attention tensor, CLS at index 0.

    Values are checked into [0, 1] with a small tolerance for dumps that
    went through float32. Whether every row sums to 1 (within 1e-4) is
    recorded on construction as ``row_stochastic``.
    """

    def __init__(self, weights: np.ndarray):
        weights = np.asarray(weights)
        if weights.ndim != 4:
            raise ShapeMismatch(f"attention stack must be 4-D, got {weights.ndim}-D")
        if weights.shape[2] != weights.shape[3]:
            raise ShapeMismatch(
                f"attention maps must be square, got {weights.shape[2]}x{weights.shape[3]}"
            )
        lo = float(weights.min())
        hi = float(weights.max())
        if lo < -VALUE_TOLERANCE or hi > 1.0 + VALUE_TOLERANCE:
            raise ShapeMismatch(
                f"attention weights outside [0,1]: min {lo:.6g}, max {hi:.6g}"
            )
        self.weights = weights
        self.layer_count = weights.shape[0]
        self.head_count = weights.shape[1]
        self.token_count_with_cls = weights.shape[2]
        self.grid_side = recover_grid_side(self.token_count_with_cls)
        row_sums = weights.sum(axis=3, dtype=np.float64)
        self.row_stochastic = bool(np.all(np.abs(row_sums - 1.0) <= ROW_SUM_TOLERANCE))

    @property
    def token_count(self) -> int:
        return self.token_count_with_cls - 1

    @classmethod
    def from_file(cls, path, allow_nan: bool = False) -> "AttentionStack":
        buf = read_hvtd(path, allow_nan=allow_nan)
        if len(buf.header.dims) != 4:
            raise ShapeMismatch(
                f"{path}: attention stack must be 4-D, got {len(buf.header.dims)}-D"
            )
        return cls(buf.data)


def _layer_slice(stack: AttentionStack, layers: LayerSet) -> np.ndarray:
    if layers.indices[-1] > stack.layer_count:
        raise LayerOutOfRange(
            f"layer {layers.indices[-1]} out of range, stack has "
            f"{stack.layer_count} layers"
        )
    # 1-based configuration indices become 0-based here, nowhere else.
    zero_based = [i - 1 for i in layers.indices]
    return stack.weights[zero_based]


def pooled_attention(stack: AttentionStack, layers=DEFAULT_LAYERS) -> np.ndarray:
    """Mean attention map over the selected layers, then over heads.

    Accumulates in float64 regardless of the storage dtype; the result is
    an (N+1, N+1) float64 matrix.
    """
    selected = _layer_slice(stack, _coerce_layers(layers))
    pooled = selected.astype(np.float64, copy=False).mean(axis=0)
    return pooled.mean(axis=0)


def compute_importance(stack: AttentionStack, layers=DEFAULT_LAYERS) -> np.ndarray:
    """Score each of the N visual tokens by the mean attention it receives.

    The mean runs over selected layers, heads, and all N+1 query rows
    (the CLS row participates); the CLS column is excluded, so entry i of
    the result belongs to grid token i.
    """
    pooled = pooled_attention(stack, layers)
    return pooled[:, 1:].mean(axis=0)
