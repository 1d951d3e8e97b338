"""Netpbm renderers: exact pixel content and byte-stable output."""

import numpy as np
import pytest

from hivtp import (
    LayerSet,
    PruneConfig,
    SynthSpec,
    compute_importance,
    errors,
    generate,
    render_heatmap,
    render_mask,
    select_tokens,
)
from hivtp.pruning import SelectionResult


def parse_netpbm(blob):
    """Minimal parser: magic, one comment line, dimensions, maxval, pixels."""
    lines = blob.split(b"\n", 4)
    magic = lines[0]
    assert lines[1].startswith(b"#")
    width, height = (int(v) for v in lines[2].split())
    assert lines[3] == b"255"
    return magic, width, height, lines[4]


def make_result(global_idx, local_idx, total):
    final = np.sort(np.concatenate([global_idx, local_idx])).astype(np.int64)
    return SelectionResult(
        global_indices=np.asarray(global_idx, dtype=np.int64),
        local_indices=np.asarray(local_idx, dtype=np.int64),
        final_indices=final,
        p_g=len(global_idx),
        p_l=len(local_idx),
        p=len(final),
        r_retain=len(final) / total,
    )


class TestHeatmap:
    def test_constant_scores_mid_gray(self):
        magic, w, h, pixels = parse_netpbm(render_heatmap(np.ones(4), 2, 1))
        assert (magic, w, h) == (b"P5", 2, 2)
        assert pixels == bytes([128, 128, 128, 128])

    def test_min_max_scaling(self):
        _, _, _, pixels = parse_netpbm(render_heatmap(np.array([0.0, 1.0, 0.0, 0.0]), 2, 1))
        assert pixels == bytes([0, 255, 0, 0])

    def test_cell_expansion(self):
        _, w, h, pixels = parse_netpbm(render_heatmap(np.array([0.0, 1.0, 0.0, 0.0]), 2, 3))
        assert (w, h) == (6, 6)
        img = np.frombuffer(pixels, dtype=np.uint8).reshape(6, 6)
        assert img[0, 0] == 0 and img[2, 5] == 255
        assert np.all(img[:3, 3:] == 255)

    def test_byte_identical_reruns(self):
        scores = np.linspace(0, 1, 144)
        assert render_heatmap(scores, 12, 4) == render_heatmap(scores, 12, 4)

    def test_wrong_length(self):
        with pytest.raises(errors.ShapeMismatch):
            render_heatmap(np.ones(10), 4, 1)


class TestMask:
    def test_all_global_is_green(self):
        result = make_result(np.arange(16), np.array([], dtype=np.int64), 16)
        magic, w, h, pixels = parse_netpbm(render_mask(result, 4, 1))
        assert (magic, w, h) == (b"P6", 4, 4)
        assert pixels == bytes([0, 255, 0] * 16)

    def test_empty_selection_is_gray(self):
        result = make_result(np.array([], dtype=np.int64), np.array([], dtype=np.int64), 16)
        _, _, _, pixels = parse_netpbm(render_mask(result, 4, 1))
        assert pixels == bytes([40, 40, 40] * 16)

    def test_histogram_matches_counts(self):
        stack, tokens = generate(SynthSpec(seed=6, grid_side=12))
        scores = compute_importance(stack, LayerSet((1, 2)))
        config = PruneConfig(12, 2, 25, 2)
        result, _ = select_tokens(scores, tokens, config)
        cell_px = 3
        _, _, _, pixels = parse_netpbm(render_mask(result, 12, cell_px))
        img = np.frombuffer(pixels, dtype=np.uint8).reshape(-1, 3)
        green = int(np.sum(np.all(img == (0, 255, 0), axis=1)))
        red = int(np.sum(np.all(img == (255, 0, 0), axis=1)))
        gray = int(np.sum(np.all(img == (40, 40, 40), axis=1)))
        assert green == result.p_g * cell_px**2
        assert red == result.p_l * cell_px**2
        assert gray == (144 - result.p) * cell_px**2
        assert green + red + gray == img.shape[0]

    def test_out_of_range_indices(self):
        result = make_result(np.array([99]), np.array([], dtype=np.int64), 16)
        with pytest.raises(errors.ShapeMismatch):
            render_mask(result, 4, 1)
