"""Deterministic 64-bit random streams.

All randomness in the toolkit flows through SplitMix64 so that identical
seeds reproduce identical streams regardless of platform or Python version.
Seeds for sub-tasks are derived by hashing tuples of integers with
:func:`mix64` rather than by consuming a shared stream, which keeps parallel
work deterministic.
"""

_M = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _finalize(z):
    z &= _M
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M
    return z ^ (z >> 31)


def mix64(*parts):
    """Hash a tuple of integers into a single 64-bit seed."""
    h = _GAMMA
    for p in parts:
        h = _finalize((h + (int(p) & _M)) & _M)
    return h


class Rng:
    """SplitMix64 stream with a handful of convenience draws."""

    __slots__ = ("_state",)

    def __init__(self, seed):
        self._state = int(seed) & _M

    def next64(self):
        self._state = (self._state + _GAMMA) & _M
        return _finalize(self._state)

    def random(self):
        """Uniform float in [0, 1)."""
        return self.next64() / 2.0 ** 64

    def randint(self, lo, hi):
        """Uniform integer in [lo, hi], inclusive. Rejection-sampled."""
        n = hi - lo + 1
        if n <= 0:
            raise ValueError("empty range")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next64()
            if v < limit:
                return lo + (v % n)

    def uniform(self, lo, hi):
        return lo + (hi - lo) * self.random()

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]

    def sample_indices(self, n, k):
        """k distinct indices from range(n), order of selection preserved."""
        if k > n:
            raise ValueError("sample larger than population")
        pool = list(range(n))
        out = []
        for i in range(k):
            j = self.randint(i, n - 1)
            pool[i], pool[j] = pool[j], pool[i]
            out.append(pool[i])
        return out
