import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fiberid.errors import ConstraintError, ParameterError, ShapeMismatchError
from fiberid.identify import hamming
from fiberid.physics import FiberPigtail, LinkBudget, SweepConfig, Trace, generate_pigtail, synthesize_trace
from fiberid.sigproc import (
    Signature,
    extract_band,
    format_signature,
    measure_signature,
    parse_signature,
    quantize_to_signature,
    read_signature,
    write_signature,
)

V = 2e8
LINK0 = LinkBudget(power_w=1e-3, distance_m=0.0, group_velocity_m_per_s=V)


def point_reflector(position_m, length_m=0.5):
    return FiberPigtail(length_m, np.array([position_m]), np.array([1e-3 + 0j]), 0, 1e-6)


class TestExtractBand:
    sweep = SweepConfig(2e10, 2e-5)  # gamma = 1e15, N = 200

    def test_tone_lands_at_offset_inside_band(self):
        trace = synthesize_trace(point_reflector(0.25), self.sweep, 1000.0, V)
        bb = extract_band(trace, self.sweep, 1000.0, 0.5, V)
        assert bb.size == 200
        spec = np.abs(np.fft.fft(bb)) ** 2
        # tone at gamma * 2 * 0.25 / v = 2.5e6 Hz after the shift; bin spacing 1 / t_sw
        expected_bin = 1e15 * 2 * 0.25 / V * self.sweep.t_sw
        assert abs(np.argmax(spec) - expected_bin) <= 1
        assert spec.max() / spec.sum() > 0.9

    def test_out_of_band_reflector_rejected(self):
        d = 1000.0
        in_band = synthesize_trace(point_reflector(0.25), self.sweep, d, V)
        # reflector 10 m before the pigtail: a pigtail-relative position of -10 m
        shifted = synthesize_trace(point_reflector(0.25, length_m=0.5), self.sweep, d - 10.25, V,
                                   sample_rate_hz=in_band.sample_rate_hz)
        p_in = np.mean(np.abs(extract_band(in_band, self.sweep, d, 0.5, V)) ** 2)
        p_out = np.mean(np.abs(extract_band(shifted, self.sweep, d, 0.5, V)) ** 2)
        assert p_out < 0.01 * p_in

    def test_zero_input(self):
        sweep = SweepConfig(10e9, 1e-5)
        zero = Trace(np.zeros(202), 202 / 1e-5, 1e-5)
        assert not np.any(extract_band(zero, sweep, 0.0, 0.5, V))

    def test_band_above_nyquist(self):
        sweep = SweepConfig(10e9, 1e-5)
        low_rate = Trace(np.zeros(80), 80 / 1e-5, 1e-5)
        with pytest.raises(ConstraintError):
            extract_band(low_rate, sweep, 0.0, 0.5, V)


class TestQuantize:
    def test_sign_rule(self):
        sig = quantize_to_signature([0.3, -0.2, 0.0, -5.1, 1, 1, 1, 1], 8)
        assert sig.bits.tolist() == [1, 0, 1, 0, 1, 1, 1, 1]

    def test_negation_complements(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(64)
        a = quantize_to_signature(x, 64)
        b = quantize_to_signature(-x, 64)
        assert hamming(a, b) == 64

    def test_uses_real_part_and_truncates(self):
        sig = quantize_to_signature(np.array([1 - 5j, -1 + 5j] * 6), 10)
        assert sig.n_bits == 10
        assert sig.bits.tolist() == [1, 0] * 5

    def test_too_short(self):
        with pytest.raises(ShapeMismatchError):
            quantize_to_signature(np.ones(5), 8)


class TestSignatureFile:
    def test_hex_packing_msb_first(self):
        bits = [1, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1]
        sig = Signature.from_bits(bits, delta_f=1e9, length_m=0.5, label="x")
        assert sig.hex == "80ffa0"
        text = format_signature(sig)
        assert text == (
            "FPRINT v1\nn_bits=19\ndelta_f_hz=1000000000.0\nlength_m=0.5\nlabel=x\n80ffa0\n"
        )

    @given(
        bits=st.lists(st.integers(0, 1), min_size=8, max_size=600),
        df=st.floats(1e6, 1e12),
        label=st.text(st.characters(blacklist_categories=("Cc", "Cs", "Zl", "Zp")), max_size=20),
    )
    def test_round_trip(self, bits, df, label):
        sig = Signature.from_bits(bits, delta_f=df, length_m=0.5, label=label)
        back = parse_signature(format_signature(sig))
        assert back.bits.tolist() == bits
        assert back.delta_f == df and back.label == label and back.length_m == 0.5

    def test_file_round_trip(self, tmp_path):
        sig = measure_signature(generate_pigtail(2, 0.5), SweepConfig(10e9, 1e-5), LINK0, label="bob")
        write_signature(sig, tmp_path / "bob.sig")
        back = read_signature(tmp_path / "bob.sig")
        assert back.packed == sig.packed and back.n_bits == 100

    @pytest.mark.parametrize(
        "text",
        [
            "FPRINT v2\nn_bits=8\ndelta_f_hz=1.0\nlength_m=0.5\nlabel=\nff\n",
            "FPRINT v1\nn_bits=8\nlength_m=0.5\ndelta_f_hz=1.0\nlabel=\nff\n",
            "FPRINT v1\nn_bits=8\ndelta_f_hz=1.0\nlength_m=0.5\nlabel=\nFF\n",
            "FPRINT v1\nn_bits=9\ndelta_f_hz=1.0\nlength_m=0.5\nlabel=\nffff\n",
            "FPRINT v1\nn_bits=16\ndelta_f_hz=1.0\nlength_m=0.5\nlabel=\nff\n",
        ],
    )
    def test_malformed(self, text):
        with pytest.raises((ParameterError, ShapeMismatchError)):
            parse_signature(text)


class TestMeasureSignature:
    sweep = SweepConfig(10e9, 1e-5)

    def test_noiseless_idempotent(self):
        pig = generate_pigtail(4, 0.5)
        a = measure_signature(pig, self.sweep, LINK0)
        b = measure_signature(pig, self.sweep, LINK0)
        assert hamming(a, b) == 0
        assert a.n_bits == 100

    def test_length_follows_span(self):
        sweep = SweepConfig(25e9, 1e-5)
        assert measure_signature(generate_pigtail(4, 0.5), sweep, LINK0).n_bits == 250

    def test_distinct_pigtails_near_half(self):
        sweep = SweepConfig(50e9, 1e-5)
        a = measure_signature(generate_pigtail(1, 0.5), sweep, LINK0)
        b = measure_signature(generate_pigtail(2, 0.5), sweep, LINK0)
        lo = 250 - 3 * math.sqrt(500 * 0.25)
        hi = 250 + 3 * math.sqrt(500 * 0.25)
        assert lo <= hamming(a, b) <= hi

    def test_noisy_30db_stays_close(self):
        pig = generate_pigtail(6, 0.5)
        ref = measure_signature(pig, self.sweep, LINK0)
        within = sum(
            hamming(ref, measure_signature(pig, self.sweep, LINK0, s, snr_linear=1000.0)) <= 10
            for s in range(1000)
        )
        assert within >= 990

    def test_noisy_deterministic(self):
        pig = generate_pigtail(6, 0.5)
        a = measure_signature(pig, self.sweep, LINK0, 5, snr_linear=10.0)
        b = measure_signature(pig, self.sweep, LINK0, 5, snr_linear=10.0)
        assert a == b

    def test_link_budget_drives_noise(self):
        # at 10 mW and 1 ms the budget SNR is huge; no bit should flip
        pig = generate_pigtail(6, 0.5)
        link = LinkBudget(power_w=1e-2, distance_m=0.0, group_velocity_m_per_s=V)
        sweep = SweepConfig(10e9, 1e-3)
        assert hamming(measure_signature(pig, sweep, link), measure_signature(pig, sweep, link, 1)) == 0

    def test_distance_does_not_change_noiseless_statistics(self):
        pig = generate_pigtail(6, 0.5)
        far = LinkBudget(power_w=1e-3, distance_m=37.0, group_velocity_m_per_s=V)
        sig = measure_signature(pig, self.sweep, far)
        assert sig.n_bits == 100 and sig.distance_hint_m == 37.0

    def test_inter_fiber_agreement(self):
        agree = []
        for k in range(50):
            a = measure_signature(generate_pigtail(1000 + 2 * k, 0.5), self.sweep, LINK0)
            b = measure_signature(generate_pigtail(1001 + 2 * k, 0.5), self.sweep, LINK0)
            agree.append(1 - hamming(a, b) / 100)
        assert 0.47 <= np.mean(agree) <= 0.53

    def test_intra_distance_monotone_in_snr(self):
        pig = generate_pigtail(21, 0.5)
        ref = measure_signature(pig, self.sweep, LINK0)
        means, sems = [], []
        for snr_db in (3, 10, 20, 30):
            d = [
                hamming(ref, measure_signature(pig, self.sweep, LINK0, (snr_db, s), snr_linear=10 ** (snr_db / 10)))
                for s in range(500)
            ]
            means.append(np.mean(d))
            sems.append(np.std(d) / math.sqrt(len(d)))
        inversions = [
            i for i in range(3) if means[i + 1] > means[i] + 2 * math.hypot(sems[i], sems[i + 1])
        ]
        assert len(inversions) <= 1
        assert means[0] > means[-1]
