"""Portable seeded generator for random scenario matrices.

xoshiro256** seeded through splitmix64. Doubles use the top 53 bits:
``u = (x >> 11) * 2**-53`` in [0, 1), mapped to ``2u - 1`` in [-1, 1).
Matrices are filled row-major. Any port that follows these three rules
reproduces the same matrices bit for bit.
"""

import numpy as np

from .errors import DomainError

_MASK = (1 << 64) - 1


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


def splitmix64(state):
    """Return ``(next_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class Xoshiro256:
    def __init__(self, seed):
        seed = int(seed)
        if not 0 <= seed <= _MASK:
            raise DomainError("seed must be an unsigned 64-bit integer")
        sm = seed
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self.s = s

    def next_u64(self):
        s = self.s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self):
        """Double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def symmetric_uniform(self, size):
        """Array of doubles in [-1, 1), filled in C order."""
        count = int(np.prod(size))
        vals = [2.0 * self.uniform() - 1.0 for _ in range(count)]
        return np.array(vals, dtype=float).reshape(size)


def random_generator(n, seed, scale=1.0, kind="general", s_scale=1.0, f_scale=1.0):
    """Seeded n x n generator from one draw of uniform[-1, 1) entries.

    ``general`` returns ``scale * X``; ``symmetric`` and ``skew`` keep the
    matching part of ``X``; ``split`` returns ``scale * (s_scale S + f_scale F)``
    with ``(S, F)`` the symmetric and skew parts of ``X``.
    """
    n = int(n)
    if n < 1:
        raise DomainError("dimension must be positive")
    X = Xoshiro256(seed).symmetric_uniform((n, n))
    S = 0.5 * (X + X.T)
    F = 0.5 * (X - X.T)
    if kind == "general":
        M = X
    elif kind == "symmetric":
        M = S
    elif kind == "skew":
        M = F
    elif kind == "split":
        M = s_scale * S + f_scale * F
    else:
        raise DomainError(f"unknown random family {kind!r}")
    return scale * M


def random_vector(n, seed, stream=1):
    """Seeded vector in [-1, 1)^n, from a stream distinct from the matrix one."""
    return Xoshiro256((int(seed) + 0x632BE59BD9B4E019 * int(stream)) & _MASK).symmetric_uniform((n,))
