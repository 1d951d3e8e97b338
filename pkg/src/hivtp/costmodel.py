"""Trend-level latency model over retained sequence length.

Prefill latency is modeled as a quadratic in token count and per-token
decode time as linear, the usual attention-versus-context asymptotics.
That is a modeling assumption of this module. Absolute milliseconds from
any particular GPU are out of scope: the model exists so ratio claims can
be checked against one's own measurements. Whether a given measurement of
first-token latency includes vision-encoder time is the caller's problem;
the model only covers sequence-length effects.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDesign, InsufficientData, InvalidConfig


@dataclass(frozen=True)
class CostCoefficients:
    """prefill_ms(s) = a2*s^2 + a1*s + a0; decode ms/token D(s) = b1*s + b0."""

    a2: float
    a1: float
    a0: float
    b1: float = 0.0
    b0: float = 1.0

    def prefill_ms(self, tokens) -> np.ndarray | float:
        s = np.asarray(tokens, dtype=np.float64)
        out = self.a2 * s * s + self.a1 * s + self.a0
        return float(out) if out.ndim == 0 else out

    def decode_ms_per_token(self, tokens) -> np.ndarray | float:
        s = np.asarray(tokens, dtype=np.float64)
        out = self.b1 * s + self.b0
        return float(out) if out.ndim == 0 else out

    def throughput(self, tokens) -> np.ndarray | float:
        return 1.0 / self.decode_ms_per_token(tokens)


def _least_squares(design: np.ndarray, target: np.ndarray) -> np.ndarray:
    if not (np.isfinite(design).all() and np.isfinite(target).all()):
        raise DegenerateDesign("non-finite values in the fit")
    try:
        coeffs, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise DegenerateDesign(f"least squares failed: {exc}") from exc
    if rank < design.shape[1]:
        raise DegenerateDesign(f"design rank {rank} < {design.shape[1]} unknowns")
    return coeffs


def fit(measurements, decode_measurements=None) -> CostCoefficients:
    """Fit the prefill quadratic, and optionally the decode line.

    measurements: (tokens, latency_ms) pairs, at least 3 distinct token
    counts. decode_measurements: (tokens, throughput tokens/s) pairs, at
    least 2 distinct counts when given.

    The curvature a2 and decode slope b1 are clamped at zero: if ordinary
    least squares drives one negative it is pinned and the remaining terms
    refit, keeping predictions monotone in the direction latency must move.
    """
    pairs = [(float(s), float(t)) for s, t in measurements]
    if len({s for s, _ in pairs}) < 3:
        raise InsufficientData("need measurements at >= 3 distinct token counts")
    s = np.array([p[0] for p in pairs])
    t = np.array([p[1] for p in pairs])

    with np.errstate(over="ignore"):
        squared = s * s
    a2, a1, a0 = _least_squares(np.column_stack([squared, s, np.ones_like(s)]), t)
    if a2 < 0:
        a2 = 0.0
        a1, a0 = _least_squares(np.column_stack([s, np.ones_like(s)]), t)

    b1, b0 = 0.0, 1.0
    if decode_measurements is not None:
        decode_pairs = [(float(c), float(r)) for c, r in decode_measurements]
        if len({c for c, _ in decode_pairs}) < 2:
            raise InsufficientData("need decode measurements at >= 2 distinct token counts")
        if any(r <= 0 for _, r in decode_pairs):
            raise InsufficientData("throughput must be positive")
        ds = np.array([p[0] for p in decode_pairs])
        per_token = 1.0 / np.array([p[1] for p in decode_pairs])
        b1, b0 = _least_squares(np.column_stack([ds, np.ones_like(ds)]), per_token)
        if b1 < 0:
            b1 = 0.0
            b0 = float(per_token.mean())

    return CostCoefficients(a2=float(a2), a1=float(a1), a0=float(a0), b1=float(b1), b0=float(b0))


def predict_speedup(coeffs: CostCoefficients, tokens_before: int, tokens_after: int):
    """(first-token latency ratio, throughput ratio) for a token-count change.

    Ratios are after/before for latency and before/after for per-token
    decode time, so values below and above 1 respectively mean the change
    helps.
    """
    if tokens_before <= 0 or tokens_after <= 0:
        raise InvalidConfig("token counts must be positive")
    ttft_ratio = coeffs.prefill_ms(tokens_after) / coeffs.prefill_ms(tokens_before)
    throughput_ratio = coeffs.decode_ms_per_token(tokens_before) / coeffs.decode_ms_per_token(tokens_after)
    return float(ttft_ratio), float(throughput_ratio)


def read_measurements_csv(path):
    """Read `tokens,latency_ms[,throughput]` rows; a header line is skipped.

    Returns (prefill pairs, decode pairs or None if no row had a third
    column).
    """
    prefill = []
    decode = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                tokens = float(row[0])
            except ValueError:
                continue  # header
            prefill.append((tokens, float(row[1])))
            if len(row) > 2 and row[2].strip():
                decode.append((tokens, float(row[2])))
    return prefill, (decode if decode else None)
