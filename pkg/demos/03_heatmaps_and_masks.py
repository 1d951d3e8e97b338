"""Render a score heatmap (PGM) and a retained-token mask (PPM).

Outputs land in demo_output/ next to this script. Any netpbm-capable
viewer opens them; green cells are global picks, red cells local picks,
gray cells were pruned.
"""

from pathlib import Path

from hivtp import (
    LayerSet,
    Peak,
    PruneConfig,
    SynthSpec,
    compute_importance,
    generate,
    render_heatmap,
    render_mask,
    select_tokens,
)

out_dir = Path(__file__).parent / "demo_output"
out_dir.mkdir(exist_ok=True)

peaks = (Peak(2, 3, 8.0, 1.5), Peak(3, 9, 8.0, 1.5),
         Peak(8, 2, 8.0, 1.5), Peak(9, 8, 8.0, 1.5))
spec = SynthSpec(seed=42, grid_side=12, layer_count=4, head_count=4,
                 peaks=peaks, noise_scale=0.1)
stack, tokens = generate(spec)
scores = compute_importance(stack, LayerSet((1, 2, 3, 4)))

heatmap_path = out_dir / "importance_heatmap.pgm"
heatmap_path.write_bytes(render_heatmap(scores, n=12, cell_px=24))
print(f"wrote {heatmap_path} (bright cells receive more attention)")

config = PruneConfig(grid_side=12, region_divisor=2, top_percent=25, window_side=2)
result, _ = select_tokens(scores, tokens, config)
mask_path = out_dir / "selection_mask.ppm"
mask_path.write_bytes(render_mask(result, n=12, cell_px=24))
print(f"wrote {mask_path} (green {result.p_g} global, red {result.p_l} local, "
      f"gray {config.token_count - result.p} pruned)")
