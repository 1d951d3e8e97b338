"""Latency trends over retained token count.

Fits the quadratic-prefill / linear-decode model to a published trend
(sequence length vs first-token latency and generation throughput on one
GPU) and prints the predicted ratios for each pruning budget. Only the
shape of the trend travels across hardware, never absolute milliseconds,
so read the ratios, not the fitted coefficients.
"""

from hivtp import PruneConfig, fit, predict_speedup

prefill = [(576, 140.0), (404, 114.0), (282, 92.0), (226, 75.0), (142, 70.0)]
throughput = [(576, 18.66), (404, 22.95), (282, 23.7), (226, 27.99), (142, 30.02)]

coeffs = fit(prefill, throughput)
print("fitted prefill_ms(s) = "
      f"{coeffs.a2:.3e}*s^2 + {coeffs.a1:.4f}*s + {coeffs.a0:.2f}")
print(f"fitted decode ms/token(s) = {coeffs.b1:.3e}*s + {coeffs.b0:.5f}\n")

print(f"{'config':>16} | {'p_max':>5} | {'ttft ratio':>10} | {'throughput ratio':>16}")
for r, k, c in [(2, 50, 2), (2, 25, 2), (2, 15, 2), (2, 14, 3)]:
    config = PruneConfig(24, r, k, c)
    ttft_ratio, thr_ratio = predict_speedup(coeffs, 576, config.max_retained)
    print(f"(r={r}, k={k}, c={c})".rjust(16)
          + f" | {config.max_retained:>5} | {ttft_ratio:>10.3f} | {thr_ratio:>16.3f}")
