import numpy as np
import pytest

from imgmine.raster import BinaryImage, GrayImage, PgmError, read_pgm, threshold, write_pgm


def test_read_pgm_minimal():
    img = read_pgm(b"P5\n2 1\n255\n" + bytes([10, 20]))
    assert (img.width, img.height) == (2, 1)
    assert img.pixels.tolist() == [[10, 20]]


def test_write_pgm_single_pixel():
    assert write_pgm(GrayImage([[0]])) == b"P5\n1 1\n255\n\x00"


def test_write_pgm_payload_length():
    data = write_pgm(GrayImage(np.zeros((2, 3), dtype=np.uint8)))
    assert data == b"P5\n3 2\n255\n" + b"\x00" * 6


def test_round_trip_images():
    rng = np.random.default_rng(7)
    for _ in range(5):
        h, w = rng.integers(1, 20, size=2)
        img = GrayImage(rng.integers(0, 256, size=(h, w), dtype=np.uint8))
        assert read_pgm(write_pgm(img)) == img


def test_round_trip_bytes():
    b = b"P5\n3 2\n255\n" + bytes(range(6))
    assert write_pgm(read_pgm(b)) == b


def test_zero_dimension_rejected():
    with pytest.raises(PgmError):
        read_pgm(b"P5\n0 0\n255\n")


def test_bad_magic_rejected():
    with pytest.raises(PgmError, match="magic"):
        read_pgm(b"P4\n1 1\n255\n\x00")


def test_truncated_payload_names_offset():
    with pytest.raises(PgmError, match="byte"):
        read_pgm(b"P5\n2 2\n255\n\x00")


def test_maxval_over_255_rejected():
    with pytest.raises(PgmError, match="maxval"):
        read_pgm(b"P5\n1 1\n65535\n\x00\x00")


def test_header_comments_and_whitespace():
    img = read_pgm(b"P5 # comment\n2 1 255\n" + bytes([1, 2]))
    assert img.pixels.tolist() == [[1, 2]]


def test_threshold():
    img = GrayImage([[10, 200]])
    assert threshold(img, 100).bits.tolist() == [[False, True]]
    assert threshold(GrayImage([[0, 0]]), 1).bits.tolist() == [[False, False]]
    assert threshold(GrayImage([[255, 255]]), 1).bits.tolist() == [[True, True]]


def test_threshold_does_not_mutate():
    a = np.array([[5, 6]], dtype=np.uint8)
    img = GrayImage(a.copy())
    threshold(img, 6)
    assert img.pixels.tolist() == [[5, 6]]


def test_invariants_enforced():
    with pytest.raises(ValueError):
        GrayImage([[300]])
    with pytest.raises(ValueError):
        GrayImage(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        BinaryImage(np.zeros((3,)))
