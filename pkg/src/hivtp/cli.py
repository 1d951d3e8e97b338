"""Command-line surface: score, prune, render, verify, bench, synth.

Every subcommand prints machine-parseable key=value lines on stdout.
Exit codes are stable: 0 success, 1 I/O failure, 2 validation failure.
The environment variable HIVTP_THREADS caps fan-out for verify and bench
(0 or unset means auto).
"""
from __future__ import annotations

import argparse
import math
import os
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import costmodel, oracle
from .errors import (
    HivtpError,
    InvalidSpec,
    IoFailure,
    NotPerfectSquare,
    ShapeMismatch,
    ValidationError,
)
from .hvtd import read_hvtd, write_hvtd
from .importance import AttentionStack, LayerSet, compute_importance
from .pruning import PruneConfig, hivtp_prune, select_tokens
from .render import render_heatmap, render_mask
from .synth import Peak, SynthSpec, generate


def _grid_side_of(count: int) -> int:
    side = math.isqrt(count)
    if side * side != count or side < 2:
        raise NotPerfectSquare(f"token count {count} is not an n x n grid with n >= 2")
    return side


def _worker_count() -> int:
    raw = os.environ.get("HIVTP_THREADS", "0")
    try:
        limit = int(raw)
    except ValueError:
        raise ValidationError(f"HIVTP_THREADS must be an integer, got {raw!r}")
    if limit < 0:
        raise ValidationError(f"HIVTP_THREADS must be >= 0, got {limit}")
    return limit if limit > 0 else min(os.cpu_count() or 1, 8)


def _read_scores(path) -> np.ndarray:
    buf = read_hvtd(path)
    if len(buf.header.dims) != 1:
        raise ShapeMismatch(f"{path}: scores must be 1-D, got {len(buf.header.dims)}-D")
    scores = buf.data.astype(np.float64)
    if np.any(scores < 0):
        raise ShapeMismatch(f"{path}: scores must be non-negative")
    return scores


def _read_tokens(path) -> np.ndarray:
    buf = read_hvtd(path)
    if len(buf.header.dims) != 2:
        raise ShapeMismatch(f"{path}: token matrix must be 2-D, got {len(buf.header.dims)}-D")
    return buf.data


def _emit(lines, stream=None):
    out = stream or sys.stdout
    for key, value in lines:
        print(f"{key}={value}", file=out)


def _config_lines(config: PruneConfig):
    return [
        ("n", config.grid_side),
        ("regions", config.region_divisor),
        ("topk", config.top_percent),
        ("window", config.window_side),
        ("layers", config.layers),
        ("global_budget", config.global_budget),
        ("p_max", config.max_retained),
    ]


def _result_lines(result, config: PruneConfig):
    return [
        ("p_g", result.p_g),
        ("p_l", result.p_l),
        ("p", result.p),
        ("r_retain", f"{result.r_retain:.4f}"),
        ("r_max", f"{config.max_ratio:.4f}"),
    ]


# ---------------------------------------------------------------- score


def cmd_score(args) -> int:
    stack = AttentionStack.from_file(args.attn, allow_nan=args.allow_nan)
    layers = LayerSet.parse(args.layers)
    scores = compute_importance(stack, layers)
    write_hvtd(scores, args.out)
    _emit([
        ("n", stack.grid_side),
        ("layers", layers),
        ("score_sum", f"{scores.sum():.12g}"),
    ])
    return 0


# ---------------------------------------------------------------- prune


def cmd_prune(args) -> int:
    tokens = _read_tokens(args.tokens)
    layers = LayerSet.parse(args.layers)

    scores = None
    if args.attn:
        stack = AttentionStack.from_file(args.attn)
        grid_side = stack.grid_side
    else:
        scores = _read_scores(args.scores)
        grid_side = _grid_side_of(scores.shape[0])

    config = PruneConfig(
        grid_side=grid_side,
        region_divisor=args.regions,
        top_percent=args.topk,
        window_side=args.window,
        layers=layers,
    )
    if args.attn:
        result, retained, scores = hivtp_prune(stack, tokens, config)
        computed_scores = True
    else:
        result, retained = select_tokens(scores, tokens, config)
        computed_scores = False

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_hvtd(result.final_indices.astype(np.uint32), out_dir / "indices.hvtd")
    write_hvtd(retained, out_dir / "retained.hvtd")
    if computed_scores:
        write_hvtd(scores, out_dir / "scores.hvtd")

    lines = _config_lines(config) + _result_lines(result, config)
    with open(out_dir / "summary.txt", "w") as fh:
        _emit(lines, stream=fh)
    _emit(lines)
    return 0


# ---------------------------------------------------------------- render


def cmd_render(args) -> int:
    if args.kind == "heatmap":
        if not args.scores:
            raise ValidationError("heatmap rendering needs --scores")
        scores = _read_scores(args.scores)
        n = _grid_side_of(scores.shape[0])
        payload = render_heatmap(scores, n, args.cell_px)
    else:
        if args.attn:
            stack = AttentionStack.from_file(args.attn)
            scores = compute_importance(stack, LayerSet.parse(args.layers))
        elif args.scores:
            scores = _read_scores(args.scores)
        else:
            raise ValidationError("mask rendering needs --scores or --attn")
        n = _grid_side_of(scores.shape[0])
        config = PruneConfig(
            grid_side=n,
            region_divisor=args.regions,
            top_percent=args.topk,
            window_side=args.window,
        )
        result, _ = select_tokens(scores, np.empty((n * n, 0)), config)
        payload = render_mask(result, n, args.cell_px)

    try:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {args.out}: {exc}") from exc
    _emit([("kind", args.kind), ("out", args.out), ("bytes", len(payload))])
    return 0


# ---------------------------------------------------------------- verify

VERIFY_LAYERS = LayerSet((1, 2))


def _verify_one(seed: int, config: PruneConfig):
    spec = SynthSpec(seed=seed, grid_side=config.grid_side, layer_count=2, head_count=2)
    stack, tokens = generate(spec)
    result, retained, scores = hivtp_prune(stack, tokens, config)
    reference = oracle.oracle_prune(scores, config)

    failures = []
    if not np.array_equal(result.final_indices, reference.final_indices):
        failures.append("final index set differs from oracle")
    if not np.array_equal(result.global_indices, reference.global_indices):
        failures.append("global index set differs from oracle")
    if not np.array_equal(result.local_indices, reference.local_indices):
        failures.append("local index set differs from oracle")
    if np.intersect1d(result.global_indices, result.local_indices).size:
        failures.append("global and local sets overlap")
    if result.p_g != config.global_budget:
        failures.append(f"p_g {result.p_g} != budget {config.global_budget}")
    if result.p_l > config.window_count:
        failures.append(f"p_l {result.p_l} > window count {config.window_count}")
    if result.p > config.max_retained:
        failures.append(f"p {result.p} > p_max {config.max_retained}")
    if result.r_retain > config.max_ratio + 1e-12:
        failures.append("r_retain exceeds r_max")
    if retained.shape != (result.p, tokens.shape[1]):
        failures.append("retained matrix shape mismatch")
    return seed, failures


def _parse_seed_range(text: str) -> range:
    try:
        lo, hi = text.split("..", 1)
        first, last = int(lo), int(hi)
    except ValueError:
        raise ValidationError(f"cannot parse seed range {text!r}, expected A..B")
    if last < first:
        raise ValidationError(f"empty seed range {text!r}")
    return range(first, last + 1)


def cmd_verify(args) -> int:
    seeds = _parse_seed_range(args.seeds)
    config = PruneConfig(
        grid_side=args.grid,
        region_divisor=args.regions,
        top_percent=args.topk,
        window_side=args.window,
        layers=VERIFY_LAYERS,
    )
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda s: _verify_one(s, config), seeds))
    else:
        outcomes = [_verify_one(s, config) for s in seeds]

    failed = 0
    for seed, failures in outcomes:
        if failures:
            failed += 1
            print(f"seed={seed} status=FAIL reason={'; '.join(failures)}")
        else:
            print(f"seed={seed} status=PASS")
    _emit([("seeds", len(outcomes)), ("failures", failed),
           ("result", "FAIL" if failed else "PASS")])
    return 1 if failed else 0


# ---------------------------------------------------------------- bench


def cmd_bench(args) -> int:
    config = PruneConfig(
        grid_side=args.grid,
        region_divisor=args.regions,
        top_percent=args.topk,
        window_side=args.window,
        layers=VERIFY_LAYERS,
    )
    inputs = [
        generate(SynthSpec(seed=args.seed + i, grid_side=args.grid,
                           layer_count=2, head_count=2))
        for i in range(args.images)
    ]
    timings = []
    for stack, tokens in inputs:
        start = time.perf_counter()
        hivtp_prune(stack, tokens, config)
        timings.append((time.perf_counter() - start) * 1000.0)

    lines = _config_lines(config) + [
        ("images", args.images),
        ("median_ms", f"{statistics.median(timings):.3f}"),
        ("r_max", f"{config.max_ratio:.4f}"),
    ]
    if args.cost_csv:
        prefill, decode = costmodel.read_measurements_csv(args.cost_csv)
        coeffs = costmodel.fit(prefill, decode)
        ttft_ratio, throughput_ratio = costmodel.predict_speedup(
            coeffs, config.token_count, config.max_retained
        )
        lines += [
            ("a2", f"{coeffs.a2:.6g}"),
            ("a1", f"{coeffs.a1:.6g}"),
            ("a0", f"{coeffs.a0:.6g}"),
            ("b1", f"{coeffs.b1:.6g}"),
            ("b0", f"{coeffs.b0:.6g}"),
            ("ttft_ratio", f"{ttft_ratio:.4f}"),
            ("throughput_ratio", f"{throughput_ratio:.4f}"),
        ]
    _emit(lines)
    return 0


# ---------------------------------------------------------------- synth


def _parse_peaks(text: str) -> tuple[Peak, ...]:
    peaks = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 4:
            raise InvalidSpec(f"peak spec {chunk!r} must be row,col,amplitude,radius")
        try:
            peaks.append(Peak(int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])))
        except ValueError as exc:
            raise InvalidSpec(f"cannot parse peak spec {chunk!r}") from exc
    return tuple(peaks)


def _read_kv_config(path) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValidationError(f"{path}: expected key=value, got {line!r}")
                key, value = line.split("=", 1)
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return values


def cmd_synth(args) -> int:
    file_values = _read_kv_config(args.config) if args.config else {}

    def pick(flag, key, fallback, convert):
        if flag is not None:
            return flag
        if key in file_values:
            return convert(file_values[key])
        return fallback

    spec = SynthSpec(
        seed=pick(args.seed, "seed", 0, int),
        grid_side=pick(args.grid, "grid", 12, int),
        layer_count=pick(args.layers_count, "layers_count", 2, int),
        head_count=pick(args.heads, "heads", 2, int),
        peaks=_parse_peaks(pick(args.peaks, "peaks", "", str)),
        noise_scale=pick(args.noise, "noise", 1.0, float),
    )
    stack, tokens = generate(spec)
    dtype = np.float32 if pick(args.dtype, "dtype", "f64", str) == "f32" else np.float64
    write_hvtd(stack.weights.astype(dtype), args.out_attn)
    write_hvtd(tokens.astype(dtype), args.out_tokens)
    _emit([
        ("seed", spec.seed),
        ("n", spec.grid_side),
        ("layers_count", spec.layer_count),
        ("heads", spec.head_count),
        ("peaks", len(spec.peaks)),
        ("out_attn", args.out_attn),
        ("out_tokens", args.out_tokens),
    ])
    return 0


# ---------------------------------------------------------------- parser


def _add_config_flags(sub):
    sub.add_argument("--regions", type=int, default=2, help="region divisor r")
    sub.add_argument("--topk", type=float, default=25.0, help="global top percentage k")
    sub.add_argument("--window", type=int, default=2, help="local window side c")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hivtp", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    score = subs.add_parser("score", help="importance scores from an attention stack")
    score.add_argument("--attn", required=True, help="4-D attention stack (.hvtd)")
    score.add_argument("--layers", default="7-10", help='1-based "7-10" or "7,8,9,10"')
    score.add_argument("--out", required=True, help="output scores file (.hvtd)")
    score.add_argument("--allow-nan", action="store_true")
    score.set_defaults(handler=cmd_score)

    prune = subs.add_parser("prune", help="hierarchical token pruning")
    source = prune.add_mutually_exclusive_group(required=True)
    source.add_argument("--attn", help="4-D attention stack (.hvtd)")
    source.add_argument("--scores", help="precomputed 1-D scores (.hvtd)")
    prune.add_argument("--tokens", required=True, help="2-D token matrix (.hvtd)")
    _add_config_flags(prune)
    prune.add_argument("--layers", default="7-10")
    prune.add_argument("--out-dir", required=True)
    prune.set_defaults(handler=cmd_prune)

    render = subs.add_parser("render", help="PGM heatmaps and PPM selection masks")
    render.add_argument("kind", choices=["heatmap", "mask"])
    render.add_argument("--scores", help="1-D scores (.hvtd)")
    render.add_argument("--attn", help="4-D attention stack (.hvtd), mask only")
    render.add_argument("--layers", default="7-10")
    _add_config_flags(render)
    render.add_argument("--cell-px", type=int, default=16)
    render.add_argument("--out", required=True)
    render.set_defaults(handler=cmd_render)

    verify = subs.add_parser("verify", help="oracle equivalence over seeded inputs")
    verify.add_argument("--seeds", default="1..100", help="inclusive A..B")
    verify.add_argument("--grid", type=int, default=12)
    _add_config_flags(verify)
    verify.set_defaults(handler=cmd_verify)

    bench = subs.add_parser("bench", help="wall time per image, optional cost fit")
    bench.add_argument("--grid", type=int, default=24)
    bench.add_argument("--images", type=int, default=100)
    bench.add_argument("--seed", type=int, default=1)
    _add_config_flags(bench)
    bench.add_argument("--cost-csv", help="CSV of tokens,latency_ms[,throughput]")
    bench.set_defaults(handler=cmd_bench)

    synth = subs.add_parser("synth", help="generate a synthetic stack and tokens")
    synth.add_argument("--seed", type=int)
    synth.add_argument("--grid", type=int)
    synth.add_argument("--layers-count", type=int)
    synth.add_argument("--heads", type=int)
    synth.add_argument("--peaks", help='"row,col,amplitude,radius;..."')
    synth.add_argument("--noise", type=float)
    synth.add_argument("--dtype", choices=["f32", "f64"])
    synth.add_argument("--config", help="key=value file supplying any of the above")
    synth.add_argument("--out-attn", required=True)
    synth.add_argument("--out-tokens", required=True)
    synth.set_defaults(handler=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.handler(args)
    except IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HivtpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
