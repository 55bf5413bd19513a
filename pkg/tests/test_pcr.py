"""Task definition: instances, prompt encoding, ground truth."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcrsim.pcr import (
    PcrInstance,
    encode_prompt,
    enumerate_instances,
    enumerate_tables,
    ground_truth,
    parity_projection,
    response_vector,
)

bit_tables = st.lists(st.integers(0, 1), min_size=1, max_size=10).map(tuple)


class TestEncoding:
    def test_doubles_bits_then_marks(self):
        inst = PcrInstance((1, 0), 1)
        assert encode_prompt(inst) == ["1", "1", "0", "0", "MARK", "BLANK"]

    def test_smallest_instance(self):
        assert encode_prompt(PcrInstance((0,), 1)) == ["0", "0", "MARK"]

    def test_length_is_three_n(self):
        inst = PcrInstance((0, 1, 1, 0, 1), 3)
        assert len(encode_prompt(inst)) == 15

    @given(bit_tables, st.data())
    def test_exactly_one_mark(self, bits, data):
        j = data.draw(st.integers(1, len(bits)))
        prompt = encode_prompt(PcrInstance(bits, j))
        assert prompt.count("MARK") == 1
        assert prompt.index("MARK") == 2 * len(bits) + j - 1

    def test_validation(self):
        with pytest.raises(ValueError):
            PcrInstance((), 1)
        with pytest.raises(ValueError):
            PcrInstance((0, 1), 3)
        with pytest.raises(ValueError):
            PcrInstance((0, 2), 1)


class TestGroundTruth:
    def test_single_zero_bit(self):
        assert ground_truth(PcrInstance((0,), 1)) == "NO"

    def test_mixed_pair(self):
        assert ground_truth(PcrInstance((1, 0), 2)) == "YES"
        assert ground_truth(PcrInstance((1, 0), 1)) == "NO"

    @given(bit_tables, st.data())
    def test_agrees_with_response_vector(self, bits, data):
        j = data.draw(st.integers(1, len(bits)))
        want = "YES" if response_vector(bits)[j - 1] else "NO"
        assert ground_truth(PcrInstance(bits, j)) == want


class TestResponseVector:
    def test_zero_table_maps_to_zero(self):
        assert response_vector((0, 0, 0)) == (0, 0, 0)

    def test_all_ones_odd_length_maps_to_zero(self):
        assert response_vector((1, 1, 1)) == (0, 0, 0)

    def test_n2_images_are_distinct(self):
        images = {response_vector(t) for t in enumerate_tables(2)}
        assert len(images) == 4

    @pytest.mark.parametrize("n", range(1, 17))
    def test_image_size_lower_bound(self, n):
        images = {response_vector(t) for t in enumerate_tables(n)}
        assert len(images) >= 2 ** (n - 1)


class TestHelpers:
    def test_compact_round_trip(self):
        inst = PcrInstance((1, 0), 2)
        assert inst.compact() == "Y=10;j=2"
        assert PcrInstance.parse("Y=10;j=2") == inst

    def test_parity_projection(self):
        inst = parity_projection((1, 0, 1))
        assert inst.bits == (0, 1, 0, 1)
        assert inst.query == 1
        assert ground_truth(inst) == "NO"  # parity of (1,0,1) is 0
        assert ground_truth(parity_projection((1, 0, 0))) == "YES"

    def test_enumeration_count(self):
        assert sum(1 for _ in enumerate_instances(3)) == 8 * 3
