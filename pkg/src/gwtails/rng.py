"""Counter-based random number streams keyed by (seed, trial).

Every stochastic routine in this package draws from a per-trial stream so
that results are a pure function of (seed, trial), independent of batching,
thread count, and scheduling.  The generator is Philox4x64-10, implemented
here directly on numpy uint64 arrays so that whole batches of trials can be
advanced in one vectorized call.

Bit-exact stream definition (for cross-language reimplementation):

* key   = two 64-bit words ``(seed, trial)``.
* block ``b`` (b = 0, 1, ...) has counter words ``(b + 1, 0, 0, 0)`` and
  yields output words lane 0..3; the stream's word ``j`` is lane
  ``j % 4`` of block ``j // 4``.  The +1 counter offset makes the word
  stream identical to ``numpy.random.Philox(key=seed + (trial << 64))
  .random_raw(n)``, which serves as the executable reference.
* uniform double ``j`` is ``(word_j >> 11) * 2**-53``, in [0, 1).
* laws sampled by inversion consume one double per variate, in order.
  Exception: the fair two-point laws (child counts {0,2} with mass 1/2
  each, equivalently +/-1 steps) consume one *bit* per variate, bit
  ``k % 64`` (LSB首 = bit 0) of word ``k // 64``.

The implementation is verified against ``numpy.random.Philox.random_raw``
in the test suite.
"""

from __future__ import annotations

import numpy as np

__all__ = ["philox4x64", "Streams", "uniform_from_words"]

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)


def _mulhi(a_hi, a_lo, b, hi_out, t1, t2):
    """High 64 bits of (scalar a) * (array b), written into hi_out."""
    np.bitwise_and(b, _LO32, out=t1)            # bl
    np.multiply(a_lo, t1, out=t2)
    np.right_shift(t2, _SH32, out=t2)           # hi32(al*bl)
    np.multiply(a_hi, t1, out=t1)               # ah*bl
    np.add(t1, t2, out=t2)                      # mid
    np.right_shift(b, _SH32, out=t1)            # bh
    np.multiply(a_hi, t1, out=hi_out)           # ah*bh
    np.multiply(a_lo, t1, out=t1)               # al*bh
    t2lo = t2 & _LO32
    np.add(t1, t2lo, out=t1)                    # mid2 = al*bh + lo32(mid)
    np.right_shift(t2, _SH32, out=t2)
    np.add(hi_out, t2, out=hi_out)
    np.right_shift(t1, _SH32, out=t1)
    np.add(hi_out, t1, out=hi_out)
    return hi_out


_M0_HI, _M0_LO = _M0 >> _SH32, _M0 & _LO32
_M1_HI, _M1_LO = _M1 >> _SH32, _M1 & _LO32
# Weyl key offsets for rounds 0..9 (uint64 arithmetic wraps)
_W0_SCHED = np.arange(10, dtype=np.uint64) * _W0
_W1_SCHED = np.arange(10, dtype=np.uint64) * _W1


def philox4x64(key0, key1, ctr0):
    """Philox4x64-10 with counter words (ctr0, 0, 0, 0).

    key0, key1, ctr0 broadcast together; returns four uint64 arrays
    (lane0..lane3) of the broadcast shape.
    """
    shape = np.broadcast_shapes(np.shape(key0), np.shape(key1), np.shape(ctr0))
    c0 = np.broadcast_to(np.asarray(ctr0, dtype=np.uint64), shape).copy()
    c1 = np.zeros(shape, dtype=np.uint64)
    c2 = np.zeros(shape, dtype=np.uint64)
    c3 = np.zeros(shape, dtype=np.uint64)
    k0 = np.asarray(key0, dtype=np.uint64)
    k1 = np.asarray(key1, dtype=np.uint64)
    h0 = np.empty(shape, dtype=np.uint64)
    h1 = np.empty(shape, dtype=np.uint64)
    t1 = np.empty(shape, dtype=np.uint64)
    t2 = np.empty(shape, dtype=np.uint64)
    for r in range(10):
        _mulhi(_M0_HI, _M0_LO, c0, h0, t1, t2)  # hi0
        _mulhi(_M1_HI, _M1_LO, c2, h1, t1, t2)  # hi1
        np.multiply(_M0, c0, out=c0)            # lo0 (c0 free after hi0)
        np.multiply(_M1, c2, out=c2)            # lo1
        kk0 = k0 + _W0_SCHED[r]
        kk1 = k1 + _W1_SCHED[r]
        np.bitwise_xor(h1, c1, out=h1)
        np.bitwise_xor(h1, kk0, out=h1)         # new c0
        np.bitwise_xor(h0, c3, out=h0)
        np.bitwise_xor(h0, kk1, out=h0)         # new c2
        # rotate: freed old c1/c3 become scratch
        c0, c1, c2, c3, h0, h1 = h1, c2, h0, c0, c1, c3
    return c0, c1, c2, c3


def uniform_from_words(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to doubles in [0, 1) with 53 random bits."""
    return (words >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


class Streams:
    """Vectorized access to the per-trial streams of one batch.

    Parameters
    ----------
    seed : int, 64-bit experiment seed (key word 0).
    trials : int64 array of trial indices (key word 1), one per row.
    """

    def __init__(self, seed: int, trials: np.ndarray):
        self.seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self.trials = np.asarray(trials, dtype=np.uint64)

    def words(self, start: np.ndarray, count: int) -> np.ndarray:
        """Words [start, start+count) of each trial's stream.

        start: int64/uint64 array, one offset per trial; returns an
        (n_trials, count) uint64 array.  Whole blocks are generated, so
        unaligned starts cost at most 3 extra lanes per trial.
        """
        start = np.asarray(start, dtype=np.uint64)
        b0 = start >> np.uint64(2)
        nblocks = int((int(start.max() & np.uint64(3)) + count + 3) // 4)
        # +1: numpy's Philox advances the counter before each block
        ctr = b0[:, None] + np.arange(1, nblocks + 1, dtype=np.uint64)[None, :]
        lanes = philox4x64(self.seed, self.trials[:, None], ctr)
        allw = np.stack(lanes, axis=2).reshape(len(start), 4 * nblocks)
        phase = (start & np.uint64(3)).astype(np.int64)
        if np.all(phase == phase[0]):
            p = int(phase[0])
            return allw[:, p:p + count]
        cols = phase[:, None] + np.arange(count, dtype=np.int64)[None, :]
        return np.take_along_axis(allw, cols, axis=1)

    def doubles(self, start: np.ndarray, count: int) -> np.ndarray:
        return uniform_from_words(self.words(start, count))

    def bits(self, start_bit: np.ndarray, count: int) -> np.ndarray:
        """Bits [start_bit, start_bit+count) of each stream, as uint8 0/1.

        Bit k of a stream is bit (k % 64) of word (k // 64), LSB first.
        Callers keep start_bit congruent across rows (the simulators
        advance all live trials by the same block length).
        """
        start_bit = np.asarray(start_bit, dtype=np.int64)
        phase = start_bit & 63
        w0 = (start_bit >> 6).astype(np.uint64)
        nwords = int((int(phase.max()) + count + 63) // 64)
        words = self.words(w0, nwords)
        # little-endian bit unpack: view words as bytes, unpack LSB-first
        by = words.view(np.uint8).reshape(len(start_bit), 8 * nwords)
        bits = np.unpackbits(by, axis=1, bitorder="little")
        if np.all(phase == phase[0]):
            p = int(phase[0])
            return bits[:, p:p + count]
        cols = phase[:, None] + np.arange(count, dtype=np.int64)[None, :]
        return np.take_along_axis(bits, cols, axis=1)
