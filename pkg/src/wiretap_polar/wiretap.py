"""Wiretap code specifications and the Alice/Bob/Eve-side algorithms.

A code is a partition of the transform inputs into R (randomized), A
(message) and B (frozen to zero).  The weak scheme keys the partition on
the reliability threshold of both channels; the strong scheme keys R on
Eve's capacity-poor set, trading a possibly nonzero set X of unreliable
free indices for a message-prior-independent leakage bound.
"""

from __future__ import annotations

import hashlib
import json
import math
import secrets
from dataclasses import dataclass, field

import numpy as np

from .channel import SymmetricChannel
from .construction import BitChannelQuality, select_sets, degradation_inclusion_check
from .decoding import FrozenPattern, multipath_decode, sc_decode, sc_decode_genie
from .transform import apply_transform


class SecureBits:
    """Randomness source backed by the operating system CSPRNG.

    The default for encoding: a fixed randomizer vector leaks a constant
    fraction of the message, so anything predictable here breaks security.
    """

    def bits(self, count: int) -> np.ndarray:
        raw = np.frombuffer(secrets.token_bytes((count + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:count]


class SeededBits:
    """Deterministic bit source for tests and reproducible simulations.

    INSECURE for real use: the randomizer bits must be unpredictable.
    """

    def __init__(self, seed):
        self.rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed

    def bits(self, count: int) -> np.ndarray:
        return self.rng.integers(0, 2, count, dtype=np.uint8)


@dataclass(frozen=True)
class WiretapCodeSpec:
    """Index sets and parameters of one wiretap code instance (0-based indices).

    r_set, a_set, b_set partition [0, n); for the strong scheme x_set and
    y_set partition r_set by the main channel's reliability threshold.
    Serialized forms use 1-based indices.
    """

    n: int
    beta: float
    scheme: str
    r_set: np.ndarray
    a_set: np.ndarray
    b_set: np.ndarray
    x_set: np.ndarray = field(default_factory=lambda: np.array([], dtype=np.int64))
    y_set: np.ndarray = field(default_factory=lambda: np.array([], dtype=np.int64))
    delta_n: float | None = None
    log2_delta_n: float | None = None
    content_hash: str = ""

    def __post_init__(self):
        if self.scheme not in ("weak", "strong"):
            raise ValueError(f"scheme must be 'weak' or 'strong', got {self.scheme!r}")
        for name in ("r_set", "a_set", "b_set", "x_set", "y_set"):
            arr = np.sort(np.asarray(getattr(self, name), dtype=np.int64))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        together = np.concatenate([self.r_set, self.a_set, self.b_set])
        if not np.array_equal(np.sort(together), np.arange(self.n)):
            raise ValueError("R, A, B must partition the index range")
        if self.scheme == "strong":
            rx = np.sort(np.concatenate([self.x_set, self.y_set]))
            if not np.array_equal(rx, self.r_set):
                raise ValueError("X and Y must partition R in the strong scheme")

    @property
    def k(self) -> int:
        return self.a_set.size

    @property
    def r(self) -> int:
        return self.r_set.size

    @property
    def rate(self) -> float:
        return self.k / self.n

    def frozen_pattern(self) -> FrozenPattern:
        return FrozenPattern(self.n, self.b_set)

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "beta": self.beta,
            "scheme": self.scheme,
            "delta_n": self.delta_n,
            "log2_delta_n": self.log2_delta_n,
            "R": (self.r_set + 1).tolist(),
            "A": (self.a_set + 1).tolist(),
            "B": (self.b_set + 1).tolist(),
            "X": (self.x_set + 1).tolist(),
            "Y": (self.y_set + 1).tolist(),
            "content_hash": self.content_hash,
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "WiretapCodeSpec":
        doc = json.loads(text)
        return cls(
            n=int(doc["n"]),
            beta=float(doc["beta"]),
            scheme=doc["scheme"],
            delta_n=doc.get("delta_n"),
            log2_delta_n=doc.get("log2_delta_n"),
            r_set=np.asarray(doc["R"], dtype=np.int64) - 1,
            a_set=np.asarray(doc["A"], dtype=np.int64) - 1,
            b_set=np.asarray(doc["B"], dtype=np.int64) - 1,
            x_set=np.asarray(doc.get("X", []), dtype=np.int64) - 1,
            y_set=np.asarray(doc.get("Y", []), dtype=np.int64) - 1,
            content_hash=doc.get("content_hash", ""),
        )


def _spec_hash(parts: dict) -> str:
    return hashlib.sha256(json.dumps(parts, sort_keys=True).encode()).hexdigest()[:16]


def default_log2_delta(n: int, beta: float) -> float:
    """log2 of the default strong-security function value, 2 to the -n^beta."""
    return -float(n) ** beta


def build_spec(
    q_main: BitChannelQuality,
    q_wiretap: BitChannelQuality,
    beta: float,
    scheme: str = "weak",
    delta_n: float | None = None,
    log2_delta_n: float | None = None,
    c1: float = 1.0,
    c2: float = 0.01,
    binding: dict | None = None,
) -> WiretapCodeSpec:
    """Derive the R/A/B (and X/Y) index sets from two quality tables.

    Indices the tables leave unresolved are frozen (placed in B for the weak
    scheme, kept out of A for the strong one): rate is sacrificed, never the
    certification.  For the strong scheme ``delta_n`` must lie in the window
    [c1 * 2^(-n^beta), 1 - c2]; it defaults to 2^(-n^beta).

    ``binding`` is an optional dict (channel descriptors, construction
    parameters) folded into the spec's content hash.
    """
    if q_main.n != q_wiretap.n:
        raise ValueError("quality tables must share the same block length")
    n = q_main.n
    if not 0.0 < beta < 0.5:
        raise ValueError(f"beta must satisfy 0 < beta < 1/2, got {beta}")

    sets_main = select_sets(q_main, beta)
    good_main = np.zeros(n, dtype=bool)
    good_main[sets_main.good] = True

    if scheme == "weak":
        check = degradation_inclusion_check(q_main, q_wiretap, beta)
        if not check.contained:
            raise ValueError(
                "weak scheme needs the wiretap good set inside the main good set; "
                f"violations at indices {check.containment_violations + 1}"
            )
        sets_wire = select_sets(q_wiretap, beta)
        good_wire = np.zeros(n, dtype=bool)
        good_wire[sets_wire.good] = True
        r_set = np.flatnonzero(good_wire)
        a_set = np.flatnonzero(good_main & ~good_wire)
        b_set = np.flatnonzero(~good_main)
        x_set = np.array([], dtype=np.int64)
        y_set = np.array([], dtype=np.int64)
        delta_plain, l2d = None, None
    elif scheme == "strong":
        if log2_delta_n is None:
            l2d = math.log2(delta_n) if delta_n is not None else default_log2_delta(n, beta)
        else:
            l2d = log2_delta_n
        low = math.log2(c1) + default_log2_delta(n, beta)
        if not (low <= l2d and 2.0**l2d <= 1.0 - c2):
            raise ValueError(
                f"delta_n = 2^{l2d:.6g} outside the window [c1*2^(-n^beta), 1-c2] "
                f"= [2^{low:.6g}, {1 - c2:g}]"
            )
        sets_wire = select_sets(q_wiretap, beta, log2_delta=l2d)
        poor = np.zeros(n, dtype=bool)
        poor[sets_wire.poor] = True
        r_set = np.flatnonzero(~poor)
        a_set = np.flatnonzero(poor & good_main)
        b_set = np.flatnonzero(poor & ~good_main)
        x_set = np.flatnonzero(~poor & ~good_main)
        y_set = np.flatnonzero(~poor & good_main)
        delta_plain = 2.0**l2d
    else:
        raise ValueError(f"scheme must be 'weak' or 'strong', got {scheme!r}")

    content = _spec_hash(
        {
            "n": n,
            "beta": beta,
            "scheme": scheme,
            "log2_delta": l2d,
            "method_main": q_main.method,
            "method_wiretap": q_wiretap.method,
            "binding": binding or {},
        }
    )
    return WiretapCodeSpec(
        n=n,
        beta=beta,
        scheme=scheme,
        r_set=r_set,
        a_set=a_set,
        b_set=b_set,
        x_set=x_set,
        y_set=y_set,
        delta_n=delta_plain,
        log2_delta_n=l2d,
        content_hash=content,
    )


@dataclass(frozen=True)
class CodewordFrame:
    """One encoding: message bits u, randomizer bits e, transform input v, codeword x."""

    u: np.ndarray
    e: np.ndarray
    v: np.ndarray
    x: np.ndarray


def encode(spec: WiretapCodeSpec, u: np.ndarray, rng=None) -> CodewordFrame:
    """Encode message bits ``u`` (shape (k,) or (B, k)) into codeword frame(s).

    The randomizer bits e are drawn from ``rng`` (default: the OS CSPRNG).
    Pass a :class:`SeededBits` only for tests and simulations.
    """
    rng = SecureBits() if rng is None else rng
    u = np.asarray(u, dtype=np.uint8)
    single = u.ndim == 1
    ub = u[None, :] if single else u
    if ub.shape[1] != spec.k:
        raise ValueError(f"message must have {spec.k} bits per block, got {ub.shape[1]}")
    batch = ub.shape[0]
    e = rng.bits(batch * spec.r).reshape(batch, spec.r).astype(np.uint8)
    v = np.zeros((batch, spec.n), dtype=np.uint8)
    v[:, spec.a_set] = ub
    v[:, spec.r_set] = e
    x = apply_transform(v)
    if single:
        return CodewordFrame(ub[0], e[0], v[0], x[0])
    return CodewordFrame(ub, e, v, x)


def decode(
    spec: WiretapCodeSpec,
    y: np.ndarray,
    main: SymmetricChannel,
    strategy: str = "sc",
    max_paths: int | None = None,
    tie_break: str = "zero",
    rng=None,
) -> np.ndarray:
    """Recover the message estimate from main-channel output(s) ``y``.

    ``strategy="sc"`` runs plain successive cancellation with B frozen to
    zero.  ``strategy="multipath"`` additionally follows both alternatives
    at the spec's X indices, keeping at most ``max_paths`` paths.
    """
    pattern = spec.frozen_pattern()
    if strategy == "sc":
        v_hat = sc_decode(y, main, pattern, tie_break=tie_break, rng=rng)
    elif strategy == "multipath":
        m = max_paths if max_paths is not None else max(1, 2 ** min(spec.x_set.size, 5))
        v_hat = multipath_decode(
            y, main, pattern, spec.x_set, m, tie_break=tie_break, rng=rng
        )
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return v_hat[..., spec.a_set]


def eve_attack(
    spec: WiretapCodeSpec,
    z: np.ndarray,
    wiretap: SymmetricChannel,
    revealed_u: np.ndarray,
) -> np.ndarray:
    """Best-effort estimate of the randomizer bits given Eve's output and the message.

    Runs successive cancellation over the wiretap channel with every non-R
    decision supplied externally (A bits from ``revealed_u``, B bits zero);
    this is the attack whose failure probability the leakage argument
    bounds.
    """
    z = np.asarray(z)
    single = z.ndim == 1
    zb = z[None, :] if single else z
    u = np.asarray(revealed_u, dtype=np.uint8)
    ub = u[None, :] if u.ndim == 1 else u
    if ub.shape[1] != spec.k:
        raise ValueError(f"revealed message must have {spec.k} bits, got {ub.shape[1]}")
    comp = np.sort(np.concatenate([spec.a_set, spec.b_set]))
    genie = np.zeros((zb.shape[0], comp.size), dtype=np.uint8)
    genie[:, np.searchsorted(comp, spec.a_set)] = ub
    out = sc_decode_genie(zb, wiretap, spec.r_set, genie)
    return out[0] if single else out
