import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palink.config import desk_profile
from palink.modem import (QAM16, add_cyclic_prefix, build_frame, build_pilot_plan,
                          hard_demap, map_bits, remove_cyclic_prefix)


def all_labels():
    return np.array([[(i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1]
                     for i in range(16)], dtype=np.uint8)


class TestConstellation:
    def test_unit_mean_energy(self):
        assert abs(np.mean(np.abs(QAM16.points) ** 2) - 1.0) < 1e-12

    def test_sixteen_distinct_points(self):
        assert len(np.unique(np.round(QAM16.points, 12))) == 16

    def test_gray_property_exhaustive(self):
        # neighbours at minimum distance differ in exactly one bit
        d_min = 2 / np.sqrt(10)
        for i in range(16):
            for j in range(i + 1, 16):
                if abs(QAM16.points[i] - QAM16.points[j]) < d_min * 1.001:
                    assert np.sum(QAM16.bit_labels[i] != QAM16.bit_labels[j]) == 1

    def test_pinned_table_corner(self):
        assert np.isclose(map_bits([0, 0, 0, 0])[0], (-3 - 3j) / np.sqrt(10))
        assert np.isclose(map_bits([1, 0, 1, 0])[0], (3 + 3j) / np.sqrt(10))


class TestMapDemap:
    def test_round_trip_all_labels(self):
        bits = all_labels().reshape(-1)
        assert np.array_equal(hard_demap(map_bits(bits)), bits)

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            map_bits([0, 1, 0])

    def test_noise_within_half_min_distance(self):
        rng = np.random.default_rng(0)
        bits = rng.integers(0, 2, 4 * 200, dtype=np.uint8)
        symbols = map_bits(bits)
        r = 0.45 * 2 / np.sqrt(10)
        angle = rng.uniform(0, 2 * np.pi, symbols.size)
        assert np.array_equal(hard_demap(symbols + r * np.exp(1j * angle)), bits)

    def test_origin_ties_to_lowest_label(self):
        # equidistant to the four inner points; rule picks the smallest label
        inner = [i for i in range(16)
                 if abs(QAM16.points[i].real) < 0.5 and abs(QAM16.points[i].imag) < 0.5]
        expected = QAM16.bit_labels[min(inner)]
        assert np.array_equal(hard_demap(np.array([0.0 + 0.0j])), expected)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_random(self, seed):
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, 4 * 64, dtype=np.uint8)
        assert np.array_equal(hard_demap(map_bits(bits)), bits)


class TestCyclicPrefix:
    def test_zero_prefix_is_identity(self):
        x = np.arange(6, dtype=complex)
        assert np.array_equal(add_cyclic_prefix(x, 0), x)

    def test_round_trip_exact(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        assert np.array_equal(remove_cyclic_prefix(add_cyclic_prefix(x, 4), 4), x)

    def test_output_length(self):
        assert add_cyclic_prefix(np.zeros(8), 3).shape == (11,)

    def test_range_checks(self):
        with pytest.raises(ValueError):
            add_cyclic_prefix(np.zeros(4), 5)
        with pytest.raises(ValueError):
            remove_cyclic_prefix(np.zeros(4), 4)


class TestPilotPlan:
    def test_paper_dimensions(self):
        # Nt=2, L=16, M=128 gives M_p=32 pilots spaced 4 apart
        from palink.config import paper_profile
        plan = build_pilot_plan(paper_profile())
        assert plan.m_p == 32
        assert np.array_equal(np.diff(plan.tone_indices), np.full(31, 4))

    def test_sequences_orthogonal(self):
        plan = build_pilot_plan(desk_profile())
        gram = plan.sequences @ plan.sequences.conj().T
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) < 1e-12 * np.max(np.abs(gram))

    def test_constant_modulus(self):
        cfg = desk_profile(rho=2.0)
        plan = build_pilot_plan(cfg)
        assert np.allclose(np.abs(plan.sequences), np.sqrt(2.0), atol=1e-12)

    def test_divisibility_enforced(self):
        with pytest.raises(ValueError):
            desk_profile(M=60)  # M_p=32 does not divide 60


class TestFrame:
    def test_pilot_symbol_zero_off_pilot_tones(self):
        cfg = desk_profile()
        plan = build_pilot_plan(cfg)
        rng = np.random.default_rng(2)
        bits = rng.integers(0, 2, (cfg.Nt, 4 * cfg.M), dtype=np.uint8)
        frame = build_frame(cfg, plan, bits)
        mask = np.ones(cfg.M, dtype=bool)
        mask[plan.tone_indices] = False
        assert np.all(frame.pilot_symbol[:, mask] == 0)
        assert np.allclose(frame.pilot_symbol[:, plan.tone_indices], plan.sequences)

    def test_data_symbol_power(self):
        cfg = desk_profile(rho=3.0)
        plan = build_pilot_plan(cfg)
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, (cfg.Nt, 4 * cfg.M), dtype=np.uint8)
        frame = build_frame(cfg, plan, bits)
        mean_power = np.mean(np.abs(frame.data_symbol) ** 2)
        assert abs(mean_power - 3.0) < 0.5  # statistical, 128 symbols
