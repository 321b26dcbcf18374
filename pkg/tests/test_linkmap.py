import hashlib
from importlib import resources

import numpy as np
import pytest

from mobisim.linkmap import (
    BLER_AT_THRESHOLD,
    BLER_SLOPE_PER_DB,
    McsEntry,
    bicm_mi,
    bler,
    effective_sinr,
    mcs_table,
    mi_curves,
    transport_bits,
)
from oracles import bicm_mi_monte_carlo, miesm_inverse_dense

DATA_SHA256 = {
    "mi_qpsk.txt": "63b560465b7af1e91890c387b60561746a633f5e6d334a2a5ff90a050fa70d75",
    "mi_16qam.txt": "868183879bff6fec8d3d8e05d8dda5fe472742ffaa0b737cd3d5c39c5803df0a",
    "mi_64qam.txt": "943148aaf82ddbc0fb5300dbfae28b057b998b727b659c827c1ff297027ca307",
    "cqi_mcs.txt": "4963af391f18161515a8d6eb1aeb2d08fe155220d44570dff3eddcb81fe46a5e",
}


def test_data_files_checksummed():
    for name, expect in DATA_SHA256.items():
        blob = resources.files("mobisim").joinpath(f"data/{name}").read_bytes()
        assert hashlib.sha256(blob).hexdigest() == expect, name


class TestMiCurves:
    def test_range_and_endpoints(self):
        for order, curve in mi_curves().items():
            assert curve(0.0) == 0.0
            assert curve(1e9) == order
            g = np.logspace(-4, 5, 400)
            v = curve(g)
            assert (v >= 0).all() and (v <= order).all()
            assert (np.diff(v) >= 0).all()

    def test_strictly_increasing_before_saturation(self):
        for order, curve in mi_curves().items():
            vals = curve.mi
            k = curve._last
            assert (np.diff(vals[: k + 1]) > 0).all()

    def test_negative_snr_rejected(self):
        with pytest.raises(ValueError):
            bicm_mi(-0.5, 4)

    def test_monte_carlo_oracle_16qam_at_10db(self):
        table_val = bicm_mi(10.0, 4)  # 10 dB
        mc_val = bicm_mi_monte_carlo(10.0, 4, n=1_000_000)
        assert abs(table_val - mc_val) < 0.02

    @pytest.mark.parametrize("order,snr_db", [(2, 0.0), (2, 6.0), (4, 14.0), (6, 12.0)])
    def test_monte_carlo_oracle_spot_checks(self, order, snr_db):
        g = 10 ** (snr_db / 10)
        assert abs(bicm_mi(g, order) - bicm_mi_monte_carlo(g, order, n=400_000)) < 0.02


class TestEffectiveSinr:
    @pytest.mark.parametrize("order", [2, 4, 6])
    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_identity_on_equal_inputs(self, order, beta):
        # stay inside the invertible (pre-saturation) region for gamma/beta
        for snr_db in np.arange(-15.0, 16.0, 2.5):
            g = 10 ** (snr_db / 10)
            if mi_curves()[order](g / beta) >= order - 1e-6:
                continue
            eff = effective_sinr([g, g, g], order, beta)
            assert abs(eff - g) <= 1e-6 * g

    def test_zero_inputs(self):
        assert effective_sinr([0.0, 0.0, 0.0], 4) == 0.0

    def test_mixed_case_against_dense_grid_oracle(self):
        curve = mi_curves()[4]
        got = effective_sinr([1.0, 10.0], 4, 1.0)
        mean_mi = float(np.mean([curve(1.0), curve(10.0)]))
        ref = miesm_inverse_dense(mean_mi, 4, curve)
        assert abs(got - ref) <= 1e-4 * ref

    def test_bounded_by_min_and_max_at_unit_beta(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            g = 10 ** rng.uniform(-2.0, 1.5, size=5)
            eff = effective_sinr(g, 4, 1.0)
            assert g.min() - 1e-9 <= eff <= g.max() + 1e-9

    def test_validation(self):
        with pytest.raises(ValueError):
            effective_sinr([1.0], 4, 0.0)
        with pytest.raises(ValueError):
            effective_sinr([], 4, 1.0)


class TestCqi:
    table = mcs_table()

    def test_saturating_high_sinr(self):
        assert self.table.cqi_from_sinr(1e12) == 15

    def test_below_lowest_threshold(self):
        assert self.table.cqi_from_sinr(0.0) == 0
        tiny = 10 ** ((self.table.entries[0].threshold_db - 1.0) / 10)
        assert self.table.cqi_from_sinr(tiny) == 0

    def test_exactly_at_threshold_cqi7(self):
        e7 = self.table.entry(7)
        g = 10 ** (e7.threshold_db / 10)
        assert self.table.cqi_from_sinr(g) == 7

    def test_monotone_in_sinr(self):
        gs = np.logspace(-3, 3, 500)
        cqis = self.table.cqi_from_sinr(gs)
        assert (np.diff(cqis) >= 0).all()

    def test_efficiency_consistency_and_threshold_order(self):
        for e in self.table.entries:
            assert abs(e.efficiency - e.order * e.code_rate) < 1e-9
        thr = [e.threshold_db for e in self.table.entries]
        assert all(b > a for a, b in zip(thr, thr[1:]))

    def test_16qam_restriction(self):
        restricted = mcs_table("16qam")
        assert restricted.max_cqi == 9
        assert max(e.order for e in restricted.entries) == 4
        with pytest.raises(ValueError):
            mcs_table("8psk")


class TestBler:
    entry = mcs_table().entry(7)

    def test_exact_at_threshold(self):
        g = 10 ** (self.entry.threshold_db / 10)
        assert abs(bler(g, self.entry) - BLER_AT_THRESHOLD) < 1e-12

    def test_logistic_shift_algebra(self):
        # centre + ln(9)/slope lands exactly at 10% by construction
        centre = self.entry.threshold_db - np.log(9.0) / BLER_SLOPE_PER_DB
        g = 10 ** ((centre + np.log(9.0) / BLER_SLOPE_PER_DB) / 10)
        assert abs(bler(g, self.entry) - 0.1) < 1e-12

    def test_asymptotes(self):
        assert bler(0.0, self.entry) == 1.0
        assert bler(1e30, self.entry) < 1e-12

    def test_strictly_decreasing(self):
        gs = np.logspace(-4, 4, 300)
        for e in mcs_table().entries:
            b = bler(gs, e)
            assert (np.diff(b) <= 0).all()
            live = (b > 1e-12) & (b < 1.0 - 1e-12)  # away from float saturation
            assert (np.diff(b[live]) < 0).all()


class TestTransportBits:
    def test_reference_value(self):
        e = McsEntry(cqi=7, order=4, code_rate=0.369, efficiency=1.4766, threshold_db=3.0)
        assert transport_bits(e, 10, 1) == 1771  # floor(1.4766 * 120 * 10)

    def test_layer_linearity_before_flooring(self):
        e = mcs_table().entry(9)
        assert transport_bits(e, 11, 2) == 2 * transport_bits(e, 11, 1)

    def test_preconditions(self):
        e = mcs_table().entry(1)
        with pytest.raises(ValueError):
            transport_bits(e, 0, 1)
        with pytest.raises(ValueError):
            transport_bits(e, 1, 0)


def test_expected_bits_monotone_in_sinr():
    """End to end: expected delivered bits never decrease as SINR grows (1 dB grid)."""
    table = mcs_table()
    prev = -1.0
    for snr_db in np.arange(-10.0, 31.0, 1.0):
        g = 10 ** (snr_db / 10)
        cqi = table.cqi_from_sinr(g)
        expected = 0.0
        if cqi >= 1:
            e = table.entry(cqi)
            expected = transport_bits(e, 11, 1) * (1.0 - bler(g, e))
        assert expected >= prev - 1e-9, f"at {snr_db} dB"
        prev = expected
