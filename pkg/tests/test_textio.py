import numpy as np
import pytest
from hypothesis import given, strategies as st

from evoprune.errors import FormatError
from evoprune.textio import (
    decode_bits_rle,
    encode_bits_rle,
    read_records,
    require_format,
    write_records,
)


@given(st.lists(st.integers(0, 1), min_size=0, max_size=300))
def test_rle_roundtrip(bits):
    arr = np.array(bits, dtype=np.uint8)
    text = encode_bits_rle(arr)
    assert np.array_equal(decode_bits_rle(text, len(arr)), arr)


def test_rle_examples():
    assert encode_bits_rle(np.array([1, 1, 1, 0, 0, 1], dtype=np.uint8)) == "1x3;0x2;1x1"
    assert encode_bits_rle(np.array([], dtype=np.uint8)) == ""


def test_rle_rejects_bad_tokens():
    with pytest.raises(FormatError):
        decode_bits_rle("2x3", 3)
    with pytest.raises(FormatError):
        decode_bits_rle("1x2", 3)
    with pytest.raises(FormatError):
        decode_bits_rle("1x4", 3)
    with pytest.raises(FormatError):
        decode_bits_rle("zzz", 3)


def test_records_roundtrip(tmp_path):
    path = tmp_path / "rec.csv"
    write_records(path, {"format": "f-v1", "k": 3}, ["a", "b"], [[1, "x"], [2, "y"]])
    meta, header, rows = read_records(path)
    assert meta == {"format": "f-v1", "k": "3"}
    assert header == ["a", "b"]
    assert rows == [["1", "x"], ["2", "y"]]
    require_format(meta, "f-v1", path)
    with pytest.raises(FormatError):
        require_format(meta, "other", path)


def test_records_missing_file(tmp_path):
    with pytest.raises(FormatError):
        read_records(tmp_path / "absent.csv")
