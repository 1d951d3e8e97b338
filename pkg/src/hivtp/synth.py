"""Deterministic synthetic attention stacks and token matrices.

The generator stands in for dumps from a real vision encoder. Hot spots
("peaks") are planted as Gaussian bumps in column space, so tokens near a
peak receive more attention from every query row; recovering them through
the scoring path is what the fixtures test.

Reproducibility contract, bit-exact across runs and implementations:

* PRNG is splitmix64. State advances by 0x9E3779B97F4A7C15 per draw; the
  output is the advanced state mixed by xor-shift-multiply with constants
  0xBF58476D1CE4E5B9 (shift 30) and 0x94D049BB133111EB (shift 27), final
  shift 31.
* A uniform is (u64 >> 11) * 2**-53.
* A normal is one Box-Muller cosine: sqrt(-2*log(1-u1)) * cos(2*pi*u2),
  consuming exactly two consecutive uniforms.
* One stream per spec, consumed in order: logit noise for the whole
  (layers, heads, N+1, N+1) tensor row-major, then the (N, 16) token
  matrix row-major. Noise is always drawn, even at noise_scale 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .importance import AttentionStack

TOKEN_DIM = 16

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_U53 = 2.0**-53


class SplitMix64:
    """Counter-based splitmix64; block draws are vectorized but identical
    to drawing one value at a time."""

    def __init__(self, seed: int):
        self._seed = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
        self._drawn = 0

    def u64_block(self, count: int) -> np.ndarray:
        start = self._drawn + 1
        self._drawn += count
        # int64 arange is much faster than uint64; draw counters stay far
        # below 2**63, so the cast is lossless.
        z = np.arange(start, start + count, dtype=np.int64).astype(np.uint64)
        with np.errstate(over="ignore"):
            z *= _GOLDEN
            z += self._seed
            z ^= z >> _S30
            z *= _MIX1
            z ^= z >> _S27
            z *= _MIX2
            z ^= z >> _S31
        return z

    def next_u64(self) -> int:
        return int(self.u64_block(1)[0])

    def uniform_block(self, count: int) -> np.ndarray:
        u = (self.u64_block(count) >> _S11).astype(np.float64)
        u *= _U53
        return u

    def normal_block(self, count: int) -> np.ndarray:
        u = self.uniform_block(2 * count)
        radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        return radius * np.cos(2.0 * np.pi * u[1::2])


@dataclass(frozen=True)
class Peak:
    """One planted hot spot at grid cell (row, col)."""

    row: int
    col: int
    amplitude: float
    radius: float = 1.5


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    grid_side: int
    layer_count: int = 2
    head_count: int = 2
    peaks: tuple[Peak, ...] = ()
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.grid_side < 2:
            raise InvalidSpec(f"grid side must be >= 2, got {self.grid_side}")
        if self.layer_count < 1 or self.head_count < 1:
            raise InvalidSpec("layer and head counts must be >= 1")
        if self.noise_scale < 0:
            raise InvalidSpec(f"noise scale must be >= 0, got {self.noise_scale}")
        for p in self.peaks:
            if not (0 <= p.row < self.grid_side and 0 <= p.col < self.grid_side):
                raise InvalidSpec(f"peak ({p.row},{p.col}) outside {self.grid_side}x{self.grid_side} grid")
            if p.amplitude <= 0:
                raise InvalidSpec(f"peak amplitude must be > 0, got {p.amplitude}")
            if p.radius <= 0:
                raise InvalidSpec(f"peak radius must be > 0, got {p.radius}")


def _bump_profile(spec: SynthSpec) -> np.ndarray:
    """Additive logit bump per attention column; the CLS column gets none."""
    n = spec.grid_side
    rows = np.arange(n * n) // n
    cols = np.arange(n * n) % n
    bump = np.zeros(n * n + 1)
    for p in spec.peaks:
        dist_sq = (rows - p.row) ** 2 + (cols - p.col) ** 2
        bump[1:] += p.amplitude * np.exp(-dist_sq / (2.0 * p.radius**2))
    return bump


def generate(spec: SynthSpec):
    """Build one (AttentionStack, token matrix) pair from the spec.

    Every attention row is a softmax over (noise + column bumps), so the
    stack is row-stochastic by construction.
    """
    n = spec.grid_side
    size = n * n + 1
    rng = SplitMix64(spec.seed)

    noise = rng.normal_block(spec.layer_count * spec.head_count * size * size)
    logits = spec.noise_scale * noise.reshape(
        spec.layer_count, spec.head_count, size, size
    )
    logits += _bump_profile(spec)

    logits -= logits.max(axis=3, keepdims=True)
    weights = np.exp(logits)
    weights /= weights.sum(axis=3, keepdims=True)

    tokens = rng.normal_block(n * n * TOKEN_DIM).reshape(n * n, TOKEN_DIM)
    return AttentionStack(weights), tokens
