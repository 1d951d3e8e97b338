"""Latency model fitting and speedup prediction."""

import numpy as np
import pytest

from hivtp import CostCoefficients, errors, fit, predict_speedup, read_measurements_csv

# published sequence-length / latency trend used as a direction check
PREFILL_POINTS = [(576, 140.0), (404, 114.0), (282, 92.0), (226, 75.0), (142, 70.0)]
THROUGHPUT_POINTS = [(576, 18.66), (404, 22.95), (282, 23.7), (226, 27.99), (142, 30.02)]


class TestFit:
    def test_exact_quadratic_interpolation(self):
        coeffs = fit([(1, 1.0), (2, 4.0), (3, 9.0)])
        assert abs(coeffs.a2 - 1.0) < 1e-9
        assert abs(coeffs.a1) < 1e-9
        assert abs(coeffs.a0) < 1e-9

    def test_constant_latency(self):
        coeffs = fit([(1, 5.0), (2, 5.0), (3, 5.0), (4, 5.0)])
        assert abs(coeffs.a2) < 1e-9
        assert abs(coeffs.a1) < 1e-9
        assert abs(coeffs.a0 - 5.0) < 1e-9

    def test_noiseless_recovery(self):
        truth = CostCoefficients(a2=3e-4, a1=0.12, a0=45.0, b1=4e-5, b0=0.03)
        tokens = [100, 200, 300, 450, 600]
        prefill = [(s, truth.prefill_ms(s)) for s in tokens]
        decode = [(s, truth.throughput(s)) for s in tokens]
        coeffs = fit(prefill, decode)
        for name in ("a2", "a1", "a0", "b1", "b0"):
            got, want = getattr(coeffs, name), getattr(truth, name)
            assert abs(got - want) <= 1e-6 * abs(want), name

    def test_negative_curvature_clamped(self):
        # concave data: OLS quadratic has a2 < 0, so pin it and refit linear
        points = [(1, 1.0), (2, 3.0), (3, 4.0), (4, 4.5)]
        coeffs = fit(points)
        assert coeffs.a2 == 0.0
        s = np.array([p[0] for p in points])
        t = np.array([p[1] for p in points])
        slope, icept = np.polyfit(s, t, 1)
        assert abs(coeffs.a1 - slope) < 1e-9
        assert abs(coeffs.a0 - icept) < 1e-9

    def test_decode_slope_clamped(self):
        decode = [(100, 10.0), (200, 11.0), (300, 12.0)]  # throughput rising
        coeffs = fit([(1, 1.0), (2, 4.0), (3, 9.0)], decode)
        assert coeffs.b1 == 0.0
        per_token = np.mean([1 / r for _, r in decode])
        assert abs(coeffs.b0 - per_token) < 1e-12

    def test_insufficient_distinct_counts(self):
        with pytest.raises(errors.InsufficientData):
            fit([(1, 1.0), (1, 2.0), (2, 3.0)])

    def test_insufficient_decode_counts(self):
        with pytest.raises(errors.InsufficientData):
            fit([(1, 1.0), (2, 4.0), (3, 9.0)], [(5, 1.0), (5, 2.0)])

    def test_degenerate_design(self):
        with pytest.raises(errors.DegenerateDesign):
            fit([(1e200, 1.0), (2e200, 2.0), (3e200, 3.0)])


class TestPredict:
    def test_identity(self):
        coeffs = fit(PREFILL_POINTS, THROUGHPUT_POINTS)
        assert predict_speedup(coeffs, 300, 300) == (1.0, 1.0)

    def test_exact_quadratic_ratio(self):
        coeffs = fit([(1, 1.0), (2, 4.0), (3, 9.0)])
        ttft_ratio, _ = predict_speedup(coeffs, 4, 2)
        assert abs(ttft_ratio - 0.25) < 1e-9

    def test_published_trend_directions(self):
        coeffs = fit(PREFILL_POINTS, THROUGHPUT_POINTS)
        ttft_ratio, throughput_ratio = predict_speedup(coeffs, 576, 142)
        assert ttft_ratio < 1.0
        assert throughput_ratio > 1.0

    def test_monotone_on_fit_range(self):
        coeffs = fit(PREFILL_POINTS, THROUGHPUT_POINTS)
        grid = np.arange(100, 601)
        prefill = coeffs.prefill_ms(grid)
        decode = coeffs.throughput(grid)
        assert np.all(np.diff(prefill) >= 0)
        assert np.all(np.diff(decode) <= 0)

    def test_three_point_fit_monotone(self):
        coeffs = fit([(576, 140.0), (282, 92.0), (142, 70.0)])
        grid = np.arange(100, 601)
        assert np.all(np.diff(coeffs.prefill_ms(grid)) >= 0)

    def test_bad_counts(self):
        coeffs = fit(PREFILL_POINTS)
        with pytest.raises(errors.InvalidConfig):
            predict_speedup(coeffs, 0, 10)


class TestCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text(
            "tokens,latency_ms,throughput\n576,140,18.66\n282,92,23.7\n142,70,30.02\n"
        )
        prefill, decode = read_measurements_csv(path)
        assert prefill == [(576.0, 140.0), (282.0, 92.0), (142.0, 70.0)]
        assert decode == [(576.0, 18.66), (282.0, 23.7), (142.0, 30.02)]

    def test_two_column_csv_has_no_decode(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("576,140\n282,92\n142,70\n")
        prefill, decode = read_measurements_csv(path)
        assert len(prefill) == 3
        assert decode is None
