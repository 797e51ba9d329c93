import numpy as np
import pytest

from ubk import bias
from ubk.kernels import BandwidthSpec, kernel
from ubk.simulate import make_model

BOX = kernel("box")


class TestConvolve:
    def test_uniform_flat_region(self):
        oracle = make_model("uniform").oracle
        assert bias.convolve(oracle, BOX, BandwidthSpec(0.2), [0.0]) == pytest.approx(
            0.5, abs=1e-10
        )

    def test_triangular_at_kink(self):
        oracle = make_model("triangular").oracle
        assert bias.convolve(oracle, BOX, BandwidthSpec(0.2), [0.0]) == pytest.approx(
            0.95, abs=1e-7
        )

    def test_linear_region_preserved(self):
        # symmetric kernels reproduce locally linear densities exactly
        oracle = make_model("triangular").oracle
        assert bias.convolve(oracle, BOX, BandwidthSpec(0.2), [0.5]) == pytest.approx(
            0.5, abs=1e-10
        )


class TestBiasSup:
    def test_flat_region_zero(self):
        oracle = make_model("uniform").oracle
        grid = np.linspace(-0.5, 0.5, 11)
        assert bias.bias_sup(oracle, BOX, BandwidthSpec(0.2), grid) <= 1e-10

    def test_kink_value(self):
        oracle = make_model("triangular").oracle
        assert bias.bias_sup(oracle, BOX, BandwidthSpec(0.2), [0.0]) == pytest.approx(
            0.05, abs=1e-7
        )

    def test_halving_h_halves_kink_bias(self):
        oracle = make_model("triangular").oracle
        b2 = bias.bias_sup(oracle, BOX, BandwidthSpec(0.2), [0.0])
        b1 = bias.bias_sup(oracle, BOX, BandwidthSpec(0.1), [0.0])
        assert b1 == pytest.approx(0.025, abs=1e-7)
        assert b2 / b1 == pytest.approx(2.0, rel=1e-5)

    def test_empty_grid_rejected(self):
        oracle = make_model("uniform").oracle
        with pytest.raises(ValueError):
            bias.bias_sup(oracle, BOX, BandwidthSpec(0.2), [])


class TestBiasRateFit:
    H_LIST = (0.05, 0.1, 0.2, 0.4)

    def test_kink_slope_first_order(self):
        oracle = make_model("triangular").oracle
        curve = bias.bias_rate_fit(oracle, BOX, self.H_LIST, np.linspace(-0.5, 0.5, 129))
        slope, r2 = curve.slope_fit
        assert slope == pytest.approx(1.0, abs=0.05)
        assert r2 > 0.999
        assert curve.excluded == ()

    def test_smooth_density_second_order(self):
        oracle = make_model("bump").oracle
        curve = bias.bias_rate_fit(
            oracle, kernel("epanechnikov"), self.H_LIST, np.linspace(-0.5, 0.5, 129)
        )
        assert curve.slope_fit[0] >= 1.8

    def test_anchored_to_quarter_h(self):
        oracle = make_model("triangular").oracle
        curve = bias.bias_rate_fit(oracle, BOX, self.H_LIST, [0.0])
        for h, b in curve.rows:
            assert b == pytest.approx(h / 4.0, rel=1e-5)

    def test_flat_rows_excluded_and_refused(self):
        oracle = make_model("uniform").oracle
        grid = np.linspace(-0.5, 0.5, 17)
        with pytest.raises(ValueError):
            bias.bias_rate_fit(oracle, BOX, self.H_LIST, grid)

    def test_h_list_validation(self):
        oracle = make_model("triangular").oracle
        with pytest.raises(ValueError):
            bias.bias_rate_fit(oracle, BOX, (0.4, 0.2, 0.1, 0.05), [0.0])
        with pytest.raises(ValueError):
            bias.bias_rate_fit(oracle, BOX, (0.1, 0.2), [0.0])

    def test_csv_roundtrip(self, tmp_path):
        oracle = make_model("triangular").oracle
        curve = bias.bias_rate_fit(oracle, BOX, self.H_LIST, [0.0])
        path = tmp_path / "bias.csv"
        curve.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "h,sup_bias"
        assert len(lines) == 1 + len(self.H_LIST)
