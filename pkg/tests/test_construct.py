"""Explicit constructions: macro algebra, parity cell, hybrid assembly."""

from fractions import Fraction

import numpy as np
import pytest

from pcrsim.analysis import exhaustive_verify
from pcrsim.construct import (
    HOLD,
    TOGGLE_A,
    TOGGLE_B,
    apply_macro_update,
    build_hybrid_decoder,
    build_parity_only_decoder,
    delete_gdn_layers,
    extract_gdn_layers,
    macros_for_bit,
    parity_cell_params,
    parity_state_after,
)
from pcrsim.errors import NotPureGa, NotPureGdn
from pcrsim.fixed import FixedVector, Precision
from pcrsim.nn_core import gdn_layer_step, greedy_decode, run_stack
from pcrsim.nn_core.forward import _token_ids
from pcrsim.pcr import (
    PcrInstance,
    encode_prompt,
    enumerate_instances,
    ground_truth,
    parity,
)

S2 = Precision(2)


def frac_vec(v: FixedVector):
    return [x for x in v.values()]


class TestMacroTable:
    """The update table of the two-coordinate cell, pinned value by value."""

    def test_hold_fixes_both_parity_states(self):
        c = parity_cell_params(S2)
        assert apply_macro_update(c.state_even, c.hold, S2) == c.state_even
        assert apply_macro_update(c.state_odd, c.hold, S2) == c.state_odd

    def test_first_toggle_lifts_to_mid_states(self):
        c = parity_cell_params(S2)
        assert apply_macro_update(c.state_even, c.toggle_a, S2) == c.mid_from_even
        assert apply_macro_update(c.state_odd, c.toggle_a, S2) == c.mid_from_odd

    def test_second_toggle_lands_on_swapped_states(self):
        c = parity_cell_params(S2)
        assert apply_macro_update(c.mid_from_even, c.toggle_b, S2) == c.state_odd
        assert apply_macro_update(c.mid_from_odd, c.toggle_b, S2) == c.state_even

    @pytest.mark.parametrize("s", range(2, 9))
    def test_toggle_pair_swaps_and_hold_fixes_at_all_precisions(self, s):
        prec = Precision(s)
        c = parity_cell_params(prec)
        for start, other in (
            (c.state_even, c.state_odd),
            (c.state_odd, c.state_even),
        ):
            held = apply_macro_update(start, c.hold, prec)
            assert held == start
            mid = apply_macro_update(start, c.toggle_a, prec)
            out = apply_macro_update(mid, c.toggle_b, prec)
            assert out == other

    @pytest.mark.parametrize("s", range(2, 9))
    def test_kappa_window(self, s):
        prec = Precision(s)
        c = parity_cell_params(prec)
        assert Fraction(1, 2) < c.kappa.value <= Fraction(3, 4)


class TestParityCellInLayer:
    """Dual route: the recurrent layer must replay the macro trajectories."""

    def test_double_one_returns_to_even(self):
        assert parity_state_after((1, 1), S2) == parity_cell_params(S2).state_even

    def test_mixed_string_with_odd_parity(self):
        got = parity_state_after((1, 0, 1, 1), S2)
        assert got == parity_cell_params(S2).state_odd

    def test_empty_table_stays_even(self):
        assert parity_state_after((), S2) == parity_cell_params(S2).state_even

    @pytest.mark.parametrize("s", [2, 3, 5])
    def test_layer_scan_matches_macro_oracle(self, s):
        prec = Precision(s)
        spec = build_parity_only_decoder(prec)
        layer = spec.layers[0]
        rng = np.random.default_rng(s)
        for _ in range(8):
            bits = tuple(int(b) for b in rng.integers(0, 2, rng.integers(1, 7)))
            tokens = []
            for b in bits:
                tokens.extend(("1", "1") if b else ("0", "0"))
            h = spec.embedding.block(_token_ids(spec, tokens), 1)
            state = None
            for i in range(len(tokens)):
                state, _ = gdn_layer_step(
                    layer, state, FixedVector(h[i].copy(), prec)
                )
            want = parity_state_after(bits, prec)
            assert state[0][0].tolist() == list(want.nums)
            assert not state[0][1].any()  # inactive row stays zero


class TestHybridDecoder:
    def test_exhaustive_n3(self):
        spec = build_hybrid_decoder(3, S2, seed=11)
        report = exhaustive_verify(spec, 3, budget=0, check_attention=True)
        assert report.total == 24
        assert report.passed
        assert report.max_scratch == 0

    def test_degenerate_n1(self):
        spec = build_hybrid_decoder(1, S2, seed=2)
        for bits in ((0,), (1,)):
            inst = PcrInstance(bits, 1)
            t = greedy_decode(spec, encode_prompt(inst), 0)
            assert t.answer == ground_truth(inst)
            assert t.scratch == ()

    def test_model_dimension_grows_logarithmically(self):
        dims = {}
        for n in (4, 16, 64, 256):
            spec = build_hybrid_decoder(n, S2, seed=1)
            dims[n] = spec.d_model
        # affine in log2(n) for this family: d = 96*log2(n) + 96
        for n, d in dims.items():
            assert d == 96 * int(np.log2(n)) + 96

    def test_final_position_attention_is_one_hot(self):
        spec = build_hybrid_decoder(2, S2, seed=4)
        scale = spec.prec.scale
        for inst in enumerate_instances(2):
            prompt = encode_prompt(inst)
            res = run_stack(spec, _token_ids(spec, prompt), want_attention=True)
            last = len(prompt) - 1
            addr_row = res.attention[(1, 0)][last]
            bit_row = res.attention[(2, 0)][last]
            assert addr_row.sum() == scale
            assert int(addr_row[2 * inst.n + inst.query - 1]) == scale
            assert bit_row.sum() == scale
            assert int(bit_row[2 * (inst.query - 1)]) == scale

    def test_parity_bit_written_to_protected_slot(self):
        spec = build_hybrid_decoder(2, S2, seed=4)
        lay = spec.embedding.layout
        for inst in enumerate_instances(2):
            prompt = encode_prompt(inst)
            res = run_stack(spec, _token_ids(spec, prompt))
            assert int(res.hidden[-1, lay.PAR_BIT]) == parity(inst.bits) * spec.prec.scale
            assert int(res.hidden[-1, lay.RETR_BIT]) == inst.bits[inst.query - 1] * spec.prec.scale


class TestVariants:
    def test_delete_gdn_layers_keeps_attention(self):
        spec = build_hybrid_decoder(2, S2, seed=6)
        pure = delete_gdn_layers(spec)
        assert pure.is_pure_ga
        assert len(pure.layers) == 2

    def test_extract_gdn_layers(self):
        spec = build_hybrid_decoder(2, S2, seed=6)
        pure = extract_gdn_layers(spec)
        assert pure.is_pure_gdn
        assert len(pure.layers) == 1

    def test_variant_errors(self):
        parity_spec = build_parity_only_decoder(S2)
        with pytest.raises(NotPureGa):
            delete_gdn_layers(parity_spec)
        ga_only = delete_gdn_layers(build_hybrid_decoder(1, S2, seed=1))
        with pytest.raises(NotPureGdn):
            extract_gdn_layers(ga_only)


class TestMacroRouting:
    def test_bit_to_macro_mapping(self):
        assert macros_for_bit(0) == (HOLD, HOLD)
        assert macros_for_bit(1) == (TOGGLE_A, TOGGLE_B)
