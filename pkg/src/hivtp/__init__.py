"""Visual-token importance scoring and hierarchical pruning engine.

The package works on serialized attention stacks and token matrices: score
tokens by the attention they receive in a band of middle encoder layers,
then keep a spatially uniform subset through per-region quotas plus
per-window argmax picks. Deterministic synthetic inputs, a brute-force
oracle, netpbm renderers, and an analytic latency model round out the
toolkit.
"""

from . import errors
from .costmodel import CostCoefficients, fit, predict_speedup, read_measurements_csv
from .hvtd import HvtdHeader, TensorBuffer, read_hvtd, write_hvtd
from .importance import (
    DEFAULT_LAYERS,
    AttentionStack,
    LayerSet,
    compute_importance,
    pooled_attention,
    recover_grid_side,
)
from .oracle import oracle_prune
from .pruning import (
    BatchItem,
    PruneConfig,
    RegionPartition,
    SelectionResult,
    WindowPartition,
    finalize,
    global_retain,
    hivtp_prune,
    local_retain,
    partition_regions,
    partition_windows,
    prune_batch,
    region_quotas,
    select_tokens,
)
from .render import render_heatmap, render_mask
from .synth import Peak, SplitMix64, SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "AttentionStack",
    "BatchItem",
    "CostCoefficients",
    "DEFAULT_LAYERS",
    "HvtdHeader",
    "LayerSet",
    "Peak",
    "PruneConfig",
    "RegionPartition",
    "SelectionResult",
    "SplitMix64",
    "SynthSpec",
    "TensorBuffer",
    "WindowPartition",
    "compute_importance",
    "errors",
    "finalize",
    "fit",
    "generate",
    "global_retain",
    "hivtp_prune",
    "local_retain",
    "oracle_prune",
    "partition_regions",
    "partition_windows",
    "pooled_attention",
    "predict_speedup",
    "prune_batch",
    "read_hvtd",
    "read_measurements_csv",
    "recover_grid_side",
    "region_quotas",
    "render_heatmap",
    "render_mask",
    "select_tokens",
    "write_hvtd",
]
