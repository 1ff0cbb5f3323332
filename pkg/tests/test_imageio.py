import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fisheyekit.errors import FormatError
from fisheyekit.imageio import ImageFormatError, decode_pnm, encode_pnm, read_pnm, write_pnm


@given(
    st.tuples(st.integers(1, 12), st.integers(1, 12), st.sampled_from([None, 3])).flatmap(
        lambda s: arrays(np.uint8, s[:2] if s[2] is None else s)
    )
)
@settings(max_examples=60, deadline=None)
def test_encode_decode_round_trip(image):
    data = encode_pnm(image)
    back = decode_pnm(data)
    np.testing.assert_array_equal(back, image)
    assert encode_pnm(back) == data


def test_file_round_trip_is_byte_identical(tmp_path):
    rng = np.random.default_rng(0)
    src = tmp_path / "a.ppm"
    src.write_bytes(encode_pnm(rng.integers(0, 256, (7, 9, 3), dtype=np.uint8)))
    dst = tmp_path / "b.ppm"
    write_pnm(dst, read_pnm(src))
    assert dst.read_bytes() == src.read_bytes()


def test_canonical_header():
    assert encode_pnm(np.zeros((2, 3), np.uint8)).startswith(b"P5\n3 2\n255\n")
    assert encode_pnm(np.zeros((2, 3, 3), np.uint8)).startswith(b"P6\n3 2\n255\n")


def test_header_comments_and_whitespace():
    data = b"P5 # gray\n# another comment\n2\t1\r\n255\n\x05\x0a"
    np.testing.assert_array_equal(decode_pnm(data), [[5, 10]])


def test_sample_bytes_that_look_like_whitespace_are_data():
    data = b"P5\n2 1\n255\n\n\n"
    np.testing.assert_array_equal(decode_pnm(data), [[10, 10]])


@pytest.mark.parametrize(
    "data",
    [
        b"P2\n1 1\n255\n0",
        b"P5\n1 1\n65535\n\x00\x00",
        b"P5\n2 2\n255\n\x00",
        b"P5\n0 2\n255\n",
        b"P5\nx 2\n255\n\x00\x00",
        b"P5\n1 1",
        b"",
    ],
)
def test_malformed_data_is_rejected(data):
    with pytest.raises(ImageFormatError):
        decode_pnm(data)


def test_format_errors_share_a_base_class():
    assert issubclass(ImageFormatError, FormatError)
    assert issubclass(ImageFormatError, ValueError)


@pytest.mark.parametrize("image", [np.zeros((2, 2), np.float64), np.zeros((2, 2, 4), np.uint8), np.zeros((0, 3), np.uint8)])
def test_unencodable_images(image):
    with pytest.raises(ImageFormatError):
        encode_pnm(image)
