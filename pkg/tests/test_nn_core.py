"""Token-mixing blocks, decoder stack, greedy decoding."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcrsim.errors import ContextOverflow, NonScratchNonAnswerEmission
from pcrsim.fixed import FixedScalar, FixedVector, Precision, mul_s, sum_strict
from pcrsim.nn_core import (
    AffineMap,
    BUDGET_EXCEEDED,
    decoder_forward,
    ga_layer_forward,
    gdn_layer_step,
    greedy_decode,
    run_stack,
    spec_from_json,
    spec_to_json,
)
from pcrsim.nn_core.forward import _token_ids, _value_mix
from pcrsim.construct import (
    build_hybrid_decoder,
    build_parity_only_decoder,
    parity_cell_params,
)
from pcrsim.pcr import PcrInstance, encode_prompt
from tests.helpers import decoder_specs, token_seqs

S2 = Precision(2)


class TestAffineMap:
    def test_strict_fold_matches_scalar_route(self):
        # Row evaluates [2*x0] (+) [3*x1] (+) bias under the strict rules.
        m = AffineMap.from_entries(
            1, 2, [(0, 0, 8), (0, 1, 12)], [1], S2
        )
        x = np.array([[3, 5]], dtype=np.int64)
        got = m.apply_block(x)[0, 0]
        a = mul_s(FixedScalar(8, S2), FixedScalar(3, S2))
        b = mul_s(FixedScalar(12, S2), FixedScalar(5, S2))
        want = sum_strict([a, b, FixedScalar(1, S2)])
        assert int(got) == want.num

    def test_bias_only(self):
        m = AffineMap.from_entries(2, 3, (), [5, -2], S2)
        x = np.zeros((4, 3), dtype=np.int64)
        out = m.apply_block(x)
        assert out.tolist() == [[5, -2]] * 4

    def test_rejects_unsorted_entries(self):
        with pytest.raises(ValueError):
            AffineMap(1, 2, ((0, 1, 1), (0, 0, 1)), (0,), S2)


class TestValueMix:
    def test_one_hot_weights_return_value_exactly(self):
        values = np.array([[3, -7], [5, 2], [1, 1]], dtype=np.int64)
        weights = np.array(
            [[4, 0, 0], [0, 4, 0], [0, 4, 0]], dtype=np.int64
        )  # weight 1 somewhere per row
        out = _value_mix(weights, values, S2)
        assert out[0].tolist() == [3, -7]
        assert out[1].tolist() == [5, 2]
        assert out[2].tolist() == [5, 2]

    def test_matches_scalar_fold(self):
        rng = np.random.default_rng(0)
        L, d = 5, 3
        weights = rng.integers(0, 5, size=(L, L)).astype(np.int64)
        values = rng.integers(-15, 16, size=(L, d)).astype(np.int64)
        out = _value_mix(weights, values, S2)
        for i in range(L):
            for c in range(d):
                terms = [
                    mul_s(FixedScalar(int(weights[i, j]), S2),
                          FixedScalar(int(values[j, c]), S2))
                    for j in range(i + 1)
                ]
                assert int(out[i, c]) == sum_strict(terms).num


class TestForwardProperties:
    @settings(deadline=None, max_examples=40)
    @given(decoder_specs(), token_seqs)
    def test_causality(self, spec, tokens):
        full = run_stack(spec, _token_ids(spec, tokens)).hidden
        for cut in range(1, len(tokens)):
            part = run_stack(spec, _token_ids(spec, tokens[:cut])).hidden
            assert np.array_equal(full[:cut], part)

    @settings(deadline=None, max_examples=25)
    @given(decoder_specs(), token_seqs)
    def test_determinism_and_grid_closure(self, spec, tokens):
        a = run_stack(spec, _token_ids(spec, tokens))
        b = run_stack(spec, _token_ids(spec, tokens))
        assert np.array_equal(a.hidden, b.hidden)
        assert np.array_equal(a.logit_nums, b.logit_nums)
        assert int(np.abs(a.hidden).max()) <= spec.prec.max_num

    @settings(deadline=None, max_examples=25)
    @given(decoder_specs(), token_seqs)
    def test_serialization_round_trip(self, spec, tokens):
        text = spec_to_json(spec)
        again = spec_from_json(text)
        assert spec_to_json(again) == text
        a = run_stack(spec, _token_ids(spec, tokens))
        b = run_stack(again, _token_ids(again, tokens))
        assert np.array_equal(a.logit_nums, b.logit_nums)


class TestLayerApis:
    @settings(deadline=None, max_examples=20)
    @given(decoder_specs(), token_seqs)
    def test_public_layer_ops_match_stack(self, spec, tokens):
        ids = _token_ids(spec, tokens)
        h = spec.embedding.block(ids, 1)
        prec = spec.prec
        hv = [FixedVector(h[i].copy(), prec) for i in range(h.shape[0])]
        for layer in spec.layers:
            if layer.kind == "GA":
                hv = ga_layer_forward(layer, hv)
            else:
                state = None
                out = []
                for v in hv:
                    state, o = gdn_layer_step(layer, state, v)
                    out.append(o)
                hv = out
        want = run_stack(spec, ids).hidden
        got = np.stack([v.nums for v in hv])
        assert np.array_equal(got, want)

    def test_ga_layer_forward_rejects_gdn(self):
        spec = build_parity_only_decoder(S2)
        with pytest.raises(ValueError):
            ga_layer_forward(spec.layers[0], [])


class TestGdnExamples:
    def test_parity_cell_readout_distinguishes_states(self):
        # Inside the decoder: after an odd table the readout coordinate is
        # nonzero, after an even table it is zero.
        spec = build_parity_only_decoder(S2)
        layer = spec.layers[0]
        state = None
        h = spec.embedding.block(_token_ids(spec, ["1", "1"]), 1)
        prec = spec.prec
        state, _ = gdn_layer_step(layer, state, FixedVector(h[0].copy(), prec))
        # After the first half of the toggle pair the cell sits mid-swap.
        cell = parity_cell_params(prec)
        assert state[0][0].tolist() == list(cell.mid_from_even.nums)
        state, _ = gdn_layer_step(layer, state, FixedVector(h[1].copy(), prec))
        assert state[0][0].tolist() == list(cell.state_odd.nums)

    def test_hold_preserves_states(self):
        spec = build_parity_only_decoder(S2)
        layer = spec.layers[0]
        h = spec.embedding.block(_token_ids(spec, ["0", "0"]), 1)
        state = None
        for i in range(2):
            state, _ = gdn_layer_step(
                layer, state, FixedVector(h[i].copy(), spec.prec)
            )
        cell = parity_cell_params(spec.prec)
        assert state[0][0].tolist() == list(cell.state_even.nums)

    def test_zero_state_zero_value_is_fixed_point(self):
        from pcrsim.nn_core.forward import gdn_cell_update

        s = np.zeros((2, 2), dtype=np.int64)
        k = np.array([3, -2], dtype=np.int64)
        v = np.zeros(2, dtype=np.int64)
        out = gdn_cell_update(s, k, v, alpha=3, beta=2, prec=S2)
        assert not out.any()


class TestPureGdnStateSufficiency:
    def test_equal_states_force_equal_continuations(self):
        # Same-length prefixes with the same parity reach the same state;
        # any common suffix must then decode identically.
        spec = build_parity_only_decoder(S2)
        pre_a = ["1", "1", "1", "1"]  # table (1,1): parity 0
        pre_b = ["0", "0", "1", "1", "1", "1"]  # table (0,1,1): parity 0
        sa = run_stack(spec, _token_ids(spec, pre_a), want_states=True).states
        sb = run_stack(spec, _token_ids(spec, pre_b), want_states=True).states
        # different lengths but equal rounded states
        assert sa.fingerprint() == sb.fingerprint()
        # align lengths so positions agree, then compare suffix behavior
        pre_b2 = ["0", "0", "0", "0"]  # table (0,0): parity 0, same length
        sb2 = run_stack(spec, _token_ids(spec, pre_b2), want_states=True).states
        assert sa.fingerprint() == sb2.fingerprint()
        for suffix in (["MARK"], ["BLANK", "MARK"], ["0", "0", "MARK"]):
            la = decoder_forward(spec, pre_a + suffix)
            lb = decoder_forward(spec, pre_b2 + suffix)
            assert la == lb


class TestGreedyDecode:
    def test_zero_budget_scratch_is_budget_exceeded(self):
        # A decoder whose logits always favor a scratch token.
        spec = build_parity_only_decoder(S2)
        biased = AffineMap.from_entries(
            len(spec.vocab),
            spec.d_model,
            (),
            [0, 0, spec.prec.max_num, 0, 0, 0],  # token "0" wins always
            spec.prec,
        )
        from dataclasses import replace

        bad = replace(spec, output_map=biased)
        t = greedy_decode(bad, ["0", "0"], 0)
        assert t.status == BUDGET_EXCEEDED
        assert t.answer is None
        t2 = greedy_decode(bad, ["0", "0"], 3)
        assert t2.status == BUDGET_EXCEEDED
        assert t2.scratch == ("0", "0", "0")

    def test_non_scratch_emission_raises(self):
        spec = build_parity_only_decoder(S2)
        from dataclasses import replace

        narrowed = replace(spec, scratch=frozenset({"1", "MARK", "BLANK"}))
        biased = AffineMap.from_entries(
            len(spec.vocab),
            spec.d_model,
            (),
            [0, 0, spec.prec.max_num, 0, 0, 0],
            spec.prec,
        )
        bad = replace(narrowed, output_map=biased)
        with pytest.raises(NonScratchNonAnswerEmission):
            greedy_decode(bad, ["0", "0"], 5)

    def test_context_overflow(self):
        spec = build_parity_only_decoder(S2, max_context=4)
        with pytest.raises(ContextOverflow):
            decoder_forward(spec, ["0"] * 5)

    def test_replay_is_identical(self):
        spec = build_hybrid_decoder(2, S2, seed=5)
        prompt = encode_prompt(PcrInstance((1, 0), 2))
        a = greedy_decode(spec, prompt, 0)
        b = greedy_decode(spec, prompt, 0)
        assert a == b
        assert a.scratch == ()
        assert a.answer == "YES"

    def test_single_token_softmax_weight_is_one(self):
        # With one position, any head with surviving exponential puts weight
        # one on itself; the hybrid's first attention layer does at the mark.
        spec = build_hybrid_decoder(1, S2, seed=3)
        prompt = encode_prompt(PcrInstance((1,), 1))
        res = run_stack(
            spec, _token_ids(spec, prompt), want_attention=True
        )
        ga_layers = [i for i, l in enumerate(spec.layers) if l.kind == "GA"]
        final = res.attention[(ga_layers[0], 0)][len(prompt) - 1]
        assert int(final[len(prompt) - 1]) == spec.prec.scale


class TestHybridFlags:
    def test_kind_flags(self):
        hybrid = build_hybrid_decoder(1, S2, seed=1)
        assert hybrid.is_hybrid
        assert not hybrid.is_pure_ga and not hybrid.is_pure_gdn
        parity = build_parity_only_decoder(S2)
        assert parity.is_pure_gdn and not parity.is_hybrid
