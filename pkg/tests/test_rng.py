import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.random import Philox

from gwtails.rng import Streams, philox4x64, uniform_from_words


def test_stream_matches_numpy_philox():
    seed, trial = 987654321, 424242
    ref = Philox(key=seed + (trial << 64)).random_raw(40)
    s = Streams(seed, np.array([trial]))
    got = s.words(np.zeros(1, dtype=np.uint64), 40)[0]
    assert np.array_equal(got, ref)


@given(seed=st.integers(0, 2**64 - 1), trial=st.integers(0, 2**63),
       start=st.integers(0, 100), count=st.integers(1, 64))
@settings(max_examples=40, deadline=None)
def test_offset_windows_consistent(seed, trial, start, count):
    s = Streams(seed, np.array([trial]))
    full = s.words(np.zeros(1, dtype=np.uint64), start + count)[0]
    part = s.words(np.full(1, start, dtype=np.uint64), count)[0]
    assert np.array_equal(part, full[start:start + count])


def test_rows_are_distinct_streams():
    s = Streams(7, np.arange(4))
    w = s.words(np.zeros(4, dtype=np.uint64), 8)
    for i in range(4):
        ref = Philox(key=7 + (i << 64)).random_raw(8)
        assert np.array_equal(w[i], ref)
    assert len({tuple(r) for r in w.tolist()}) == 4


def test_bits_lsb_first():
    s = Streams(3, np.array([5]))
    words = s.words(np.zeros(1, dtype=np.uint64), 2)[0]
    bits = s.bits(np.zeros(1, dtype=np.int64), 128)[0]
    want = np.unpackbits(words.view(np.uint8), bitorder="little")
    assert np.array_equal(bits, want)


def test_bits_offset_by_blocks():
    s = Streams(3, np.array([5, 5]))
    all_bits = s.bits(np.zeros(2, dtype=np.int64), 256)
    later = s.bits(np.full(2, 64, dtype=np.int64), 128)
    assert np.array_equal(later, all_bits[:, 64:192])


def test_uniforms_in_unit_interval():
    s = Streams(123, np.arange(16))
    u = uniform_from_words(s.words(np.zeros(16, dtype=np.uint64), 1000))
    assert np.all(u >= 0.0) and np.all(u < 1.0)
    # 53-bit grid
    assert np.all(u * 2.0**53 == np.floor(u * 2.0**53))
    assert abs(u.mean() - 0.5) < 0.01


def test_philox_broadcasting_shapes():
    l0, l1, l2, l3 = philox4x64(
        np.uint64(1), np.arange(3, dtype=np.uint64)[:, None],
        np.zeros((3, 5), dtype=np.uint64),
    )
    assert l0.shape == (3, 5)
