"""Hierarchical token selection over the n x n grid.

Two stages: a global stage keeps a per-region quota of the highest-scoring
tokens inside each of r*r equal blocks, then a local stage keeps the single
best not-yet-kept token inside each c x c window (skipping windows whose
tokens were all kept already). The union, sorted ascending, is the retained
index list.

Budget arithmetic is exact. The global budget is floor(N * k / 100) tokens
in total, computed in rational arithmetic so that a percentage like 15 is
treated as the decimal the user wrote rather than its nearest binary
float. The budget is split evenly across regions, with the remainder going
one token each to the earliest regions in row-major order; that remainder
rule is this engine's choice, not something the method's description pins
down. Ties on equal scores always go to the lower linear index, in both
stages.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    InvalidConfig,
    NotDivisible,
    OverlapDetected,
    QuotaExceedsRegion,
    ShapeMismatch,
)
from .importance import DEFAULT_LAYERS, LayerSet, compute_importance


def _exact_fraction(value) -> Fraction:
    # str() round-trips the value the caller wrote ("15" or "12.5"), which
    # keeps floor(N * k / 100) immune to binary-float representation error.
    if isinstance(value, Fraction):
        return value
    return Fraction(str(value))


@dataclass(frozen=True)
class PruneConfig:
    """Grid geometry and budgets for one pruning run.

    grid_side: tokens per image edge (n), so the image has n*n tokens.
    region_divisor: r, the grid splits into r*r blocks for the global stage.
    top_percent: k, percentage of all tokens kept by the global stage.
    window_side: c, edge length of the local-stage windows.
    layers: encoder layers used when scores must be computed from attention.
    """

    grid_side: int
    region_divisor: int = 2
    top_percent: float = 25.0
    window_side: int = 2
    layers: LayerSet = field(default_factory=lambda: DEFAULT_LAYERS)

    def __post_init__(self):
        n, r, c = self.grid_side, self.region_divisor, self.window_side
        if n < 2:
            raise InvalidConfig(f"grid side must be >= 2, got {n}")
        if r < 1 or c < 1:
            raise InvalidConfig("region divisor and window side must be >= 1")
        if n % r != 0:
            raise NotDivisible(f"grid side {n} not divisible by region divisor {r}")
        if n % c != 0:
            raise NotDivisible(f"grid side {n} not divisible by window side {c}")
        k = _exact_fraction(self.top_percent)
        if not 0 < k <= 100:
            raise InvalidConfig(f"top percent must be in (0, 100], got {self.top_percent}")

    @property
    def token_count(self) -> int:
        return self.grid_side * self.grid_side

    @property
    def region_count(self) -> int:
        return self.region_divisor * self.region_divisor

    @property
    def region_size(self) -> int:
        return (self.grid_side // self.region_divisor) ** 2

    @property
    def window_count(self) -> int:
        return (self.grid_side // self.window_side) ** 2

    @property
    def global_budget(self) -> int:
        """floor(N * k / 100), the exact number of globally kept tokens."""
        k = _exact_fraction(self.top_percent)
        return int(self.token_count * k // 100)

    @property
    def max_retained(self) -> int:
        """Upper bound on retained tokens; capped at N for large budgets."""
        return min(self.global_budget + self.window_count, self.token_count)

    @property
    def max_ratio(self) -> float:
        return self.max_retained / self.token_count


@dataclass(frozen=True)
class RegionPartition:
    grid_side: int
    block_side: int
    index_sets: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class WindowPartition:
    grid_side: int
    block_side: int
    index_sets: tuple[np.ndarray, ...]


def _grid_blocks(n: int, side: int) -> tuple[np.ndarray, ...]:
    """Row-major side x side blocks of the n x n grid as linear index sets."""
    linear = np.arange(n * n, dtype=np.int64).reshape(n, n)
    blocks = []
    for top in range(0, n, side):
        for left in range(0, n, side):
            blocks.append(linear[top : top + side, left : left + side].ravel())
    return tuple(blocks)


def partition_regions(n: int, r: int) -> RegionPartition:
    if n % r != 0:
        raise NotDivisible(f"grid side {n} not divisible by region divisor {r}")
    side = n // r
    return RegionPartition(grid_side=n, block_side=side, index_sets=_grid_blocks(n, side))


def partition_windows(n: int, c: int) -> WindowPartition:
    if n % c != 0:
        raise NotDivisible(f"grid side {n} not divisible by window side {c}")
    return WindowPartition(grid_side=n, block_side=c, index_sets=_grid_blocks(n, c))


def region_quotas(config: PruneConfig) -> list[int]:
    """Split the global budget across regions, earliest regions get the rest.

    The quotas sum to the exact global budget and each stays within the
    region's capacity for any valid top_percent.
    """
    budget = config.global_budget
    regions = config.region_count
    base, remainder = divmod(budget, regions)
    quotas = [base + 1 if i < remainder else base for i in range(regions)]
    if any(q > config.region_size for q in quotas):
        raise QuotaExceedsRegion(
            f"quota exceeds region capacity {config.region_size}: {quotas}"
        )
    return quotas


def _check_scores(scores: np.ndarray, expected_len: int) -> np.ndarray:
    scores = np.asarray(scores)
    if scores.ndim != 1 or scores.shape[0] != expected_len:
        raise ShapeMismatch(
            f"scores must be a length-{expected_len} vector, got shape {scores.shape}"
        )
    return scores.astype(np.float64, copy=False)


def global_retain(
    scores: np.ndarray, partition: RegionPartition, quotas
) -> np.ndarray:
    """Per region, keep the quota highest-scoring indices; lower index wins ties."""
    n_tokens = partition.grid_side**2
    scores = _check_scores(scores, n_tokens)
    if len(quotas) != len(partition.index_sets):
        raise ShapeMismatch(
            f"{len(quotas)} quotas for {len(partition.index_sets)} regions"
        )
    kept = []
    for quota, members in zip(quotas, partition.index_sets):
        if quota == 0:
            continue
        # members are ascending, so a stable sort on descending score makes
        # the lower index win every tie.
        order = np.argsort(-scores[members], kind="stable")
        kept.append(members[order[:quota]])
    if not kept:
        return np.empty(0, dtype=np.int64)
    return np.sort(np.concatenate(kept))


def local_retain(
    scores: np.ndarray, windows: WindowPartition, global_set: np.ndarray
) -> np.ndarray:
    """Per window, keep the best index not already kept globally, if any."""
    n_tokens = windows.grid_side**2
    scores = _check_scores(scores, n_tokens)
    taken = np.zeros(n_tokens, dtype=bool)
    taken[np.asarray(global_set, dtype=np.int64)] = True
    kept = []
    for members in windows.index_sets:
        candidates = members[~taken[members]]
        if candidates.size:
            # argmax returns the first maximum; candidates ascend, so ties
            # resolve to the lower index.
            kept.append(candidates[np.argmax(scores[candidates])])
    return np.array(sorted(kept), dtype=np.int64)


@dataclass(frozen=True)
class SelectionResult:
    global_indices: np.ndarray
    local_indices: np.ndarray
    final_indices: np.ndarray
    p_g: int
    p_l: int
    p: int
    r_retain: float


def finalize(global_set, local_set, tokens: np.ndarray):
    """Merge the two stages, gather the retained token rows in sorted order."""
    global_idx = np.asarray(global_set, dtype=np.int64)
    local_idx = np.asarray(local_set, dtype=np.int64)
    tokens = np.asarray(tokens)
    if tokens.ndim != 2:
        raise ShapeMismatch(f"token matrix must be 2-D, got {tokens.ndim}-D")
    n_tokens = tokens.shape[0]
    if np.intersect1d(global_idx, local_idx).size:
        raise OverlapDetected("global and local index sets overlap")
    final = np.sort(np.concatenate([global_idx, local_idx]))
    if final.size and (final[0] < 0 or final[-1] >= n_tokens):
        raise ShapeMismatch("selection index out of range for the token matrix")
    result = SelectionResult(
        global_indices=np.sort(global_idx),
        local_indices=np.sort(local_idx),
        final_indices=final,
        p_g=int(global_idx.size),
        p_l=int(local_idx.size),
        p=int(final.size),
        r_retain=final.size / n_tokens,
    )
    return result, tokens[final]


def select_tokens(scores: np.ndarray, tokens: np.ndarray, config: PruneConfig):
    """Both pruning stages from precomputed scores. Returns (result, retained)."""
    scores = _check_scores(scores, config.token_count)
    tokens = np.asarray(tokens)
    if tokens.ndim != 2 or tokens.shape[0] != config.token_count:
        raise ShapeMismatch(
            f"token matrix must have {config.token_count} rows, got shape {tokens.shape}"
        )
    regions = partition_regions(config.grid_side, config.region_divisor)
    quotas = region_quotas(config)
    global_set = global_retain(scores, regions, quotas)
    windows = partition_windows(config.grid_side, config.window_side)
    local_set = local_retain(scores, windows, global_set)
    return finalize(global_set, local_set, tokens)


def hivtp_prune(stack, tokens: np.ndarray, config: PruneConfig):
    """Full pipeline: score from attention, then select.

    Returns (SelectionResult, retained token matrix, scores).
    """
    if stack.grid_side != config.grid_side:
        raise ShapeMismatch(
            f"stack grid side {stack.grid_side} != config grid side {config.grid_side}"
        )
    scores = compute_importance(stack, config.layers)
    result, retained = select_tokens(scores, tokens, config)
    return result, retained, scores


@dataclass(frozen=True)
class BatchItem:
    """Outcome for one element of a batch; exactly one of result/error is set."""

    index: int
    result: tuple | None = None
    error: Exception | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def prune_batch(images, config: PruneConfig) -> list[BatchItem]:
    """Prune each (stack, tokens) pair independently, preserving order.

    Failures are captured per element so one bad image does not abort the
    rest of the batch.
    """
    outcomes = []
    for i, (stack, tokens) in enumerate(images):
        try:
            outcomes.append(BatchItem(index=i, result=hivtp_prune(stack, tokens, config)))
        except Exception as exc:  # noqa: BLE001 - reported, not swallowed
            outcomes.append(BatchItem(index=i, error=exc))
    return outcomes
