import numpy as np
import pytest

from wiretap_polar.channel import SymmetricChannel, make_bec, make_bsc
from wiretap_polar.construction import (
    BitChannelQuality,
    brute_force_bitchannels,
    combined_transition_table,
)


def quality_from_values(z: np.ndarray, c: np.ndarray, method: str = "exact") -> BitChannelQuality:
    """Exact (lower = upper) quality table from plain Z and C arrays."""
    z = np.asarray(z, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    with np.errstate(divide="ignore"):
        l2z = np.log2(np.maximum(z, 0.0))
        l2zeta = np.log2(np.maximum(1.0 - z, 0.0))
        l2c = np.log2(np.clip(c, 0.0, 1.0))
    return BitChannelQuality(
        n=z.size, method=method,
        l2z_lo=l2z, l2z_hi=l2z.copy(), l2zeta_hi=l2zeta, l2c_hi=l2c,
        c_lo=np.clip(c, 0.0, 1.0),
    )


class BruteForceDecoder:
    """Reference successive-cancellation decoder built from the defining sums.

    Independent of the production decoder: it enumerates all completions of
    the transform input for every decision, using the dense transition
    table.  Near-ties (within 1e-9 relative) are resolved to 0 to mirror the
    deterministic tie rule without floating-point order sensitivity.
    """

    def __init__(self, ch: SymmetricChannel, m: int):
        self.n = 1 << m
        self.q = ch.output_alphabet_size
        self.table = combined_transition_table(ch, m)

    def y_index(self, y) -> int:
        idx = 0
        for s in y:
            idx = idx * self.q + int(s)
        return idx

    def decode(self, y, forced: dict[int, int]) -> np.ndarray:
        n = self.n
        yi = self.y_index(y)
        v_hat: list[int] = []
        for i in range(1, n + 1):
            if i - 1 in forced:
                v_hat.append(forced[i - 1])
                continue
            w = [0.0, 0.0]
            for b in (0, 1):
                total = 0.0
                for fut in range(2 ** (n - i)):
                    bits = v_hat + [b] + [(fut >> (n - i - 1 - j)) & 1 for j in range(n - i)]
                    vint = 0
                    for bit in bits:
                        vint = (vint << 1) | bit
                    total += self.table[vint, yi]
                w[b] = total / 2 ** (n - 1)
            if w[0] >= w[1] - 1e-9 * max(w[0], w[1]):
                v_hat.append(0)
            else:
                v_hat.append(1)
        return np.array(v_hat, dtype=np.uint8)


def all_words(q: int, n: int):
    """Iterate all output words of length n over alphabet size q."""
    word = np.zeros(n, dtype=np.int64)
    total = q**n
    for idx in range(total):
        rem = idx
        for pos in range(n - 1, -1, -1):
            word[pos] = rem % q
            rem //= q
        yield word.copy()


@pytest.fixture(scope="session")
def bsc03_bf_m3():
    return brute_force_bitchannels(make_bsc(0.3), 3)


@pytest.fixture(scope="session")
def bec05_bf_m3():
    return brute_force_bitchannels(make_bec(0.5), 3)


@pytest.fixture(scope="session")
def noiseless_bf_m3():
    return brute_force_bitchannels(make_bsc(0.0), 3)
