import math

import numpy as np
import pytest

from src.bounds import (
    default_z_grid,
    figure_data,
    h_fun,
    h_inv,
    integer_min,
    lower_bound_1,
    lower_bound_2,
    lower_bound_3,
    lower_bound_3_term,
    lower_bound_4,
    min_entropy_limit,
    min_renyi_coherent,
    renyi_wehrl_min,
    renyi_wehrl_purity_cap,
    thermal_transfer,
    thermal_von_neumann,
    v_fun,
    v_inv,
    wehrl_convolution_bound,
    wehrl_min,
    young_chain_bound,
    young_constant,
)
from src.errors import InvalidParameterError
from src.models import BoundId, ThermalNoiseSpec

LN2 = math.log(2.0)
LN3 = math.log(3.0)


class TestExactMinima:
    def test_second_order(self):
        assert min_renyi_coherent(1.0, 2.0) == pytest.approx(LN3, abs=1e-12)
        assert integer_min(1.0, 2) == pytest.approx(LN3, abs=1e-12)

    def test_von_neumann_limit(self):
        assert thermal_von_neumann(1.0) == pytest.approx(2 * LN2, abs=1e-12)
        assert min_renyi_coherent(1.0, 1.0 + 1e-7) == pytest.approx(2 * LN2)
        assert min_renyi_coherent(1.0, 1.0) == pytest.approx(2 * LN2)

    def test_noiseless_channel(self):
        assert min_renyi_coherent(0.0, 2.0) == 0.0
        assert thermal_von_neumann(0.0) == 0.0

    def test_large_order_approaches_min_entropy(self):
        assert min_renyi_coherent(1.0, 1000.0) == pytest.approx(
            min_entropy_limit(1.0), abs=1e-3
        )
        assert min_entropy_limit(1.0) == pytest.approx(LN2)

    def test_decreasing_in_order(self):
        values = [min_renyi_coherent(1.0, z) for z in default_z_grid()]
        assert np.all(np.diff(values) < 0)

    def test_wehrl_minima(self):
        assert wehrl_min(1.0) == pytest.approx(1.0 + LN2)
        assert renyi_wehrl_min(1.0, 2.0) == pytest.approx(2 * LN2)
        assert renyi_wehrl_min(1.0, 1.0) == pytest.approx(wehrl_min(1.0))
        with pytest.raises(InvalidParameterError):
            renyi_wehrl_min(1.0, 0.5)

    @pytest.mark.parametrize(
        "call",
        [
            lambda: min_renyi_coherent(-1.0, 2.0),
            lambda: min_renyi_coherent(1.0, 0.0),
            lambda: integer_min(1.0, 2.5),
            lambda: integer_min(1.0, 1),
        ],
    )
    def test_invalid_arguments(self, call):
        with pytest.raises(InvalidParameterError):
            call()


class TestWehrlBounds:
    def test_young_constant(self):
        assert young_constant(1.0) == 1.0
        assert young_constant(2.0) == pytest.approx(1.0)
        with pytest.raises(InvalidParameterError):
            young_constant(0.5)

    @pytest.mark.parametrize("n, z", [(1.0, 2.0), (0.5, 1.5), (3.0, 3.0)])
    def test_young_chain_reaches_cap(self, n, z):
        assert young_chain_bound(n, z) == pytest.approx(
            renyi_wehrl_purity_cap(n, z), rel=1e-10
        )

    def test_young_chain_value(self):
        assert young_chain_bound(1.0, 2.0) == pytest.approx(0.25, rel=1e-10)
        assert young_chain_bound(0.0, 2.0) == 0.5

    @pytest.mark.parametrize("p", [1.0, 1.2, 1.5, 1.9, 2.0])
    def test_young_chain_never_below_cap(self, p):
        cap = renyi_wehrl_purity_cap(1.0, 2.0)
        assert young_chain_bound(1.0, 2.0, p) >= cap - 1e-12

    def test_young_chain_rejects_inadmissible_exponent(self):
        with pytest.raises(InvalidParameterError):
            young_chain_bound(1.0, 2.0, 2.5)

    @pytest.mark.parametrize("n", [0.5, 1.0, 4.0])
    def test_convolution_bound_peak(self, n):
        peak = wehrl_convolution_bound(n, n / (n + 1.0))
        assert peak == pytest.approx(wehrl_min(n), abs=1e-12)
        for lam in (0.0, 0.2, 0.9, 1.0):
            assert wehrl_convolution_bound(n, lam) <= peak + 1e-12

    def test_convolution_bound_arguments(self):
        with pytest.raises(InvalidParameterError):
            wehrl_convolution_bound(1.0, 1.5)
        with pytest.raises(InvalidParameterError):
            wehrl_convolution_bound(0.0, 0.5)


class TestSplitSpectra:
    @pytest.mark.parametrize("m", [1, 2, 3, 7])
    def test_flat_spectra(self, m):
        assert v_fun(1.0 / m) == pytest.approx(math.log(m), abs=1e-12)
        assert h_fun(1.0 / m, 2.0) == pytest.approx(1.0 / m, abs=1e-12)

    def test_inverses(self):
        assert h_inv(1.0 / 3.0, 2.0) == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert v_inv(math.log(4.0)) == pytest.approx(0.25, abs=1e-9)

    def test_inverse_errors(self):
        with pytest.raises(InvalidParameterError):
            h_inv(0.5, 1.0)
        with pytest.raises(InvalidParameterError):
            v_inv(-1.0)
        with pytest.raises(InvalidParameterError):
            h_fun(0.0, 2.0)
        with pytest.raises(InvalidParameterError):
            h_inv(2.0, 2.0)


class TestLowerBounds:
    def test_staircase(self):
        assert lower_bound_1(1.0, 2.5) == pytest.approx(integer_min(1.0, 3))
        assert lower_bound_1(1.0, 3.0) == pytest.approx(integer_min(1.0, 3))
        assert lower_bound_1(1.0, 1.2) == pytest.approx(LN3)

    def test_staircase_below_one(self):
        assert lower_bound_1(1.0, 0.5) == pytest.approx(LN3)
        assert lower_bound_1(1.0, 0.5, vn_bound=1.2) == 1.2

    def test_vn_bound_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            lower_bound_1(1.0, 0.5, vn_bound=5.0)
        with pytest.raises(InvalidParameterError):
            lower_bound_3(1.0, 0.5, vn_bound=-0.1)

    def test_scaled_integer_bound(self):
        assert lower_bound_2(1.0, 1.5) == 0.0
        assert lower_bound_2(1.0, 5.0) == pytest.approx(math.log(31.0) / 4.0)
        gap = min_renyi_coherent(1.0, 5.99) - lower_bound_2(1.0, 5.99)
        assert 0.0 <= gap < 0.01 * min_renyi_coherent(1.0, 5.99)
        assert lower_bound_2(1.0, 1000.0) == pytest.approx(LN2, abs=2e-3)

    def test_scaled_integer_bound_stops_at_k_max(self):
        capped = lower_bound_2(1.0, 20.0, k_max=3)
        assert capped == pytest.approx(20.0 / 19.0 * math.log(7.0) / 3.0)
        assert lower_bound_2(1.0, 20.0) > capped

    def test_h_path_exact_value(self):
        assert lower_bound_3_term(1.0, 1.5, 2) == pytest.approx(LN3, abs=1e-9)

    def test_h_path_needs_order_below_k(self):
        with pytest.raises(InvalidParameterError):
            lower_bound_3_term(1.0, 3.0, 2)

    def test_v_path(self):
        value = lower_bound_3(1.0, 0.5, vn_bound=2 * LN2)
        assert value == pytest.approx(math.log(4.0), abs=1e-5)
        assert value <= min_renyi_coherent(1.0, 0.5)

    def test_no_valid_h_path(self):
        assert lower_bound_3(1.0, 12.5, k_max=12) == 0.0

    def test_convexity_bound(self):
        assert lower_bound_4(5.0, 0.2) == pytest.approx(
            math.log(0.2) / -0.8 + math.log(5.0)
        )
        assert lower_bound_4(5.0, 0.2) < min_renyi_coherent(5.0, 0.2)
        assert lower_bound_4(1.0, 1.0) == pytest.approx(1.0)
        assert lower_bound_4(0.0, 2.0) == -math.inf

    @pytest.mark.parametrize("n", [0.1, 1.0, 5.0])
    def test_every_bound_below_upper(self, n):
        for z in default_z_grid():
            upper = min_renyi_coherent(n, z)
            for bound in (
                lower_bound_1(n, z),
                lower_bound_2(n, z),
                lower_bound_3(n, z),
                lower_bound_4(n, z),
            ):
                assert bound <= upper + 1e-9


class TestThermalTransfer:
    SPEC = ThermalNoiseSpec(eta=0.5, N=2.0)

    def test_equivalent_noise(self):
        assert thermal_transfer(self.SPEC, BoundId.UPPER, 2.0) == pytest.approx(LN3)
        assert thermal_transfer(self.SPEC, "integer_min", 3.0) == pytest.approx(
            integer_min(1.0, 3)
        )
        assert thermal_transfer(self.SPEC, BoundId.WEHRL, 2.0) == pytest.approx(
            1.0 + LN2
        )
        assert thermal_transfer(self.SPEC, BoundId.LB2, 5.0) == pytest.approx(
            lower_bound_2(1.0, 5.0)
        )

    def test_integer_minimum_needs_integer_order(self):
        with pytest.raises(InvalidParameterError):
            thermal_transfer(self.SPEC, BoundId.INTEGER_MIN, 2.5)


class TestFigureData:
    @pytest.mark.parametrize("n", [0.1, 1.0, 5.0])
    def test_curves_are_ordered(self, n):
        curve = figure_data(n)
        assert curve.z_grid.shape == (200,)
        assert np.all(curve.lb_max <= curve.upper + 1e-9)
        for name in ("lb1", "lb2", "lb3", "lb4"):
            assert np.all(getattr(curve, name) <= curve.lb_max)
        assert curve.s_inf == pytest.approx(math.log(n + 1.0))

    def test_lb1_touches_upper_at_integers(self):
        curve = figure_data(1.0, [2.0, 3.0, 4.0])
        assert np.allclose(curve.lb1, curve.upper, atol=1e-12)

    def test_lb2_close_to_upper_for_large_orders(self):
        curve = figure_data(1.0)
        mask = curve.z_grid >= 5.0
        gap = curve.upper[mask] - curve.lb2[mask]
        assert np.all(gap < 0.05 * curve.upper[mask])

    def test_vn_bound_recorded(self):
        curve = figure_data(1.0, [0.5, 2.0], vn_bound=2 * LN2)
        assert curve.vn_bound_used == pytest.approx(2 * LN2)
        assert curve.lb1[0] == pytest.approx(2 * LN2)

    def test_requires_noise(self):
        with pytest.raises(InvalidParameterError):
            figure_data(0.0)
