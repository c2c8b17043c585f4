"""Binary-input symmetric memoryless channels and their information measures.

A channel is a 2 x q row-stochastic matrix over an abstract output alphabet
0..q-1.  Output symmetry is witnessed by an involution on the outputs that
swaps the roles of the two inputs; for BSC/BEC the involution is stored at
construction time, for general matrices it can be recovered.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class SymmetricChannel:
    """Binary-input discrete memoryless channel.

    Parameters
    ----------
    transitions : ndarray, shape (2, q)
        Row x gives the output distribution given input bit x.  Rows must
        sum to 1 within ``ROW_SUM_TOL`` (small drift is renormalized).
    label : str
        Human-readable tag, e.g. ``"BSC(0.11)"``.
    involution : ndarray or None
        Output permutation pi with pi[pi[z]] = z and
        W(z|0) = W(pi[z]|1) for all z, when known.
    """

    transitions: np.ndarray
    label: str = ""
    involution: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.transitions, dtype=np.float64)
        if t.ndim != 2 or t.shape[0] != 2 or t.shape[1] < 1:
            raise ValueError(f"transitions must be 2 x q, got shape {t.shape}")
        if np.any(t < -ROW_SUM_TOL) or np.any(t > 1.0 + ROW_SUM_TOL):
            raise ValueError("transition probabilities must lie in [0, 1]")
        t = np.clip(t, 0.0, 1.0)
        sums = t.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError(f"rows must sum to 1, got sums {sums}")
        t = t / sums[:, None]
        t.setflags(write=False)
        object.__setattr__(self, "transitions", t)
        if self.involution is not None:
            pi = np.asarray(self.involution, dtype=np.int64)
            if pi.shape != (t.shape[1],) or np.any(pi[pi] != np.arange(t.shape[1])):
                raise ValueError("involution must be a self-inverse permutation of outputs")
            pi.setflags(write=False)
            object.__setattr__(self, "involution", pi)

    @property
    def output_alphabet_size(self) -> int:
        return self.transitions.shape[1]

    def __repr__(self):
        return f"SymmetricChannel({self.label or self.transitions.shape})"


def make_bsc(p: float) -> SymmetricChannel:
    """Binary symmetric channel with crossover probability ``p`` in [0, 1/2]."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"BSC crossover probability must be in [0, 1/2], got {p}")
    return SymmetricChannel(
        transitions=np.array([[1.0 - p, p], [p, 1.0 - p]]),
        label=f"BSC({p:g})",
        involution=np.array([1, 0]),
    )


def make_bec(eps: float) -> SymmetricChannel:
    """Binary erasure channel; outputs are 0, 1 and the erasure symbol 2."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"BEC erasure probability must be in [0, 1], got {eps}")
    return SymmetricChannel(
        transitions=np.array([[1.0 - eps, 0.0, eps], [0.0, 1.0 - eps, eps]]),
        label=f"BEC({eps:g})",
        involution=np.array([1, 0, 2]),
    )


def mutual_information_bits(prior: np.ndarray, transitions: np.ndarray) -> float:
    """I(X; Y) in bits for input distribution ``prior`` and row-stochastic ``transitions``."""
    prior = np.asarray(prior, dtype=np.float64)
    t = np.asarray(transitions, dtype=np.float64)
    py = prior @ t
    joint = prior[:, None] * t
    mask = joint > 0.0
    ratio = np.ones_like(joint)
    np.divide(t, py[None, :], out=ratio, where=mask)
    return float(np.sum(joint[mask] * np.log2(ratio[mask])))


def capacity(ch: SymmetricChannel) -> float:
    """Capacity in bits: mutual information under the uniform input distribution."""
    return mutual_information_bits(np.array([0.5, 0.5]), ch.transitions)


def bhattacharyya(ch: SymmetricChannel) -> float:
    """Sum over outputs of sqrt(W(z|0) W(z|1)); in [0, 1]."""
    t = ch.transitions
    return float(np.sum(np.sqrt(t[0] * t[1])))


def binary_entropy(x: float) -> float:
    """h2(x) in bits, with h2(0) = h2(1) = 0."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log1p(-x) / math.log(2.0))


def cascade(c1: SymmetricChannel, c3: SymmetricChannel | np.ndarray) -> SymmetricChannel:
    """Concatenate ``c1`` with a further channel ``c3`` applied to its output.

    ``c3`` may be a ``SymmetricChannel`` (binary-input; only meaningful when
    ``c1`` has two outputs) or an arbitrary row-stochastic matrix whose number
    of rows equals the output alphabet size of ``c1``.
    """
    m3 = c3.transitions if isinstance(c3, SymmetricChannel) else np.asarray(c3, dtype=np.float64)
    label3 = c3.label if isinstance(c3, SymmetricChannel) else "matrix"
    if m3.ndim != 2 or m3.shape[0] != c1.output_alphabet_size:
        raise ValueError(
            f"inner alphabet mismatch: first channel has {c1.output_alphabet_size} outputs, "
            f"second expects {m3.shape[0]} inputs"
        )
    if np.any(np.abs(m3.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("second stage must be row-stochastic")
    return SymmetricChannel(
        transitions=c1.transitions @ m3,
        label=f"cascade({c1.label or 'W1'}, {label3})",
    )


def find_involution(ch: SymmetricChannel, tol: float = 1e-9) -> np.ndarray | None:
    """Recover an output involution pi with W(z|0) = W(pi[z]|1), or None.

    Existence of such an involution is equivalent to output symmetry for
    binary-input channels.
    """
    if ch.involution is not None:
        return ch.involution
    t = ch.transitions
    q = t.shape[1]
    key = np.round(t / tol).astype(np.int64)
    buckets: dict[tuple[int, int], list[int]] = {}
    for z in range(q):
        buckets.setdefault((key[0, z], key[1, z]), []).append(z)
    pi = np.full(q, -1, dtype=np.int64)
    for (k0, k1), members in buckets.items():
        if k0 == k1:
            for z in members:
                pi[z] = z
            continue
        partners = buckets.get((k1, k0))
        if partners is None or len(partners) != len(members):
            return None
        if k0 < k1:
            for z, w in zip(members, partners):
                pi[z] = w
                pi[w] = z
    if np.any(pi < 0):
        return None
    return pi


def verify_output_symmetric(ch: SymmetricChannel, tol: float = 1e-9) -> list[tuple[int, ...]] | None:
    """Partition outputs into classes whose column submatrices are strongly symmetric.

    Returns the partition as a list of index tuples, or None when the channel
    is not output-symmetric.
    """
    pi = find_involution(ch, tol=tol)
    if pi is None:
        return None
    classes = []
    seen = np.zeros(ch.output_alphabet_size, dtype=bool)
    for z in range(ch.output_alphabet_size):
        if seen[z]:
            continue
        w = int(pi[z])
        seen[z] = True
        if w == z:
            classes.append((z,))
        else:
            seen[w] = True
            classes.append((z, w))
    return classes


def with_involution(ch: SymmetricChannel) -> SymmetricChannel:
    """Return the same channel with its involution filled in (error if not symmetric)."""
    if ch.involution is not None:
        return ch
    pi = find_involution(ch)
    if pi is None:
        raise ValueError(f"channel {ch.label!r} is not output-symmetric")
    return SymmetricChannel(ch.transitions, ch.label, pi)


def sample(ch: SymmetricChannel, x: int, rng: np.random.Generator, size: int | None = None):
    """Draw output symbol(s) from row ``x``."""
    return rng.choice(ch.output_alphabet_size, size=size, p=ch.transitions[x])


def sample_noise(ch: SymmetricChannel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. symbols from the input-0 row.

    For a symmetric channel this is the additive-noise representation: the
    output for input bit x is the noise symbol acted on by the involution
    whenever x = 1 (see :func:`apply_noise`).
    """
    cdf = np.cumsum(ch.transitions[0])
    u = rng.random(n)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def apply_noise(ch: SymmetricChannel, x: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Combine input bits with a noise realization drawn by :func:`sample_noise`."""
    pi = ch.involution
    if pi is None:
        pi = find_involution(ch)
        if pi is None:
            raise ValueError("additive-noise transmission requires an output-symmetric channel")
    x = np.asarray(x)
    return np.where(x == 1, pi[noise], noise)


def transmit(ch: SymmetricChannel, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Send a bit vector (or batch of bit vectors) through the channel."""
    x = np.asarray(x)
    noise = sample_noise(ch, x.size, rng).reshape(x.shape)
    return apply_noise(ch, x, noise)


# ---------------------------------------------------------------------------
# JSON descriptors


def channel_to_descriptor(ch: SymmetricChannel) -> dict:
    """JSON-serializable description: {"kind", "param", "matrix", "label"}."""
    label = ch.label
    if label.startswith("BSC(") and label.endswith(")"):
        return {"kind": "bsc", "param": float(label[4:-1]), "label": label}
    if label.startswith("BEC(") and label.endswith(")"):
        return {"kind": "bec", "param": float(label[4:-1]), "label": label}
    return {"kind": "matrix", "matrix": ch.transitions.tolist(), "label": label}


def channel_from_descriptor(desc: dict) -> SymmetricChannel:
    """Build a channel from a JSON descriptor."""
    kind = desc.get("kind")
    if kind == "bsc":
        return make_bsc(float(desc["param"]))
    if kind == "bec":
        return make_bec(float(desc["param"]))
    if kind == "matrix":
        ch = SymmetricChannel(np.array(desc["matrix"], dtype=np.float64),
                              label=desc.get("label", "matrix"))
        return with_involution(ch)
    raise ValueError(f"unknown channel kind {kind!r}")


def descriptor_hash(desc: dict) -> str:
    """Stable content hash of a channel descriptor."""
    return hashlib.sha256(json.dumps(desc, sort_keys=True).encode()).hexdigest()[:16]
