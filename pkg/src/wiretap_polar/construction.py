"""Per-index bit-channel quality bounds and the index-set selections built on them.

Three quality evaluators are provided:

* ``evolve_bec`` — exact closed-form recursion for erasure channels, carried
  in the log2 domain so that doubly-exponentially small parameters survive.
* ``brute_force_bitchannels`` — direct enumeration of the effective per-bit
  channels at tiny block lengths; the reference oracle for everything else.
* ``evolve_quantized`` — degrading/upgrading output-alphabet quantization
  giving certified two-sided bounds for arbitrary symmetric binary-input
  channels.  Channels that polarize beyond what double precision can track
  are frozen into interval form and propagated in the log2 domain.

All certified thresholds are compared in the log2 domain; plain-domain
values underflow long before the interesting regimes do.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .channel import SymmetricChannel, mutual_information_bits, with_involution
from .transform import apply_transform

LN2 = math.log(2.0)

BRUTE_FORCE_TERM_GUARD = 10**7


class EnumerationGuardError(ValueError):
    """Raised when an exact computation would exceed the enumeration guard."""

# measured zeta (= 1 - Z) from pair arithmetic is only trustworthy down to
# roughly the double-precision cancellation floor; inflate to keep it an
# upper bound
_ZETA_REL_SLACK = 1e-12
_ZETA_ABS_SLACK = 4e-16


@dataclass
class BitChannelQuality:
    """Certified per-index bounds on the per-bit channel parameters.

    Bounds are stored in the log2 domain: ``l2z_lo/l2z_hi`` bound the
    Bhattacharyya parameter, ``l2zeta_hi`` bounds its complement 1 - Z from
    above, ``l2c_hi`` bounds the capacity from above, and ``c_lo`` (plain)
    bounds it from below.  Plain-domain views are exposed as properties.
    """

    n: int
    method: str
    l2z_lo: np.ndarray
    l2z_hi: np.ndarray
    l2zeta_hi: np.ndarray
    l2c_hi: np.ndarray
    c_lo: np.ndarray

    def __post_init__(self):
        for name in ("l2z_lo", "l2z_hi", "l2zeta_hi", "l2c_hi", "c_lo"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (self.n,):
                raise ValueError(f"{name} must have shape ({self.n},)")
            setattr(self, name, arr)

    @property
    def l2z_lower(self) -> np.ndarray:
        """log2 of the best lower bound on Z (combining both stored forms).

        The bound through 1 - zeta is only trusted where log2(zeta) sits
        clearly below 0: nearer than 1e-13 it is indistinguishable from the
        accumulated rounding of the log-domain recursions.
        """
        with np.errstate(divide="ignore", invalid="ignore"):
            via_zeta = np.log2(np.maximum(-np.expm1(self.l2zeta_hi * LN2), 0.0))
        via_zeta = np.where(self.l2zeta_hi < -1e-13, via_zeta, -np.inf)
        return np.maximum(self.l2z_lo, via_zeta)

    @property
    def z_lower(self) -> np.ndarray:
        return np.minimum(np.exp2(self.l2z_lower), self.z_upper)

    @property
    def z_upper(self) -> np.ndarray:
        return np.minimum(np.exp2(self.l2z_hi), 1.0)

    @property
    def c_lower(self) -> np.ndarray:
        return np.clip(self.c_lo, 0.0, self.c_upper)

    @property
    def c_upper(self) -> np.ndarray:
        c = np.minimum(np.exp2(self.l2c_hi), 1.0)
        # capacity can never exceed sqrt(1 - Z^2)
        cap = np.sqrt(np.maximum(0.0, 1.0 - self.z_lower**2))
        return np.minimum(c, cap + 1e-15)

    def to_csv(self, path) -> None:
        """Write (index, z_lower, z_upper, c_lower, c_upper) rows, 1-based indices."""
        data = np.column_stack(
            [np.arange(1, self.n + 1), self.z_lower, self.z_upper, self.c_lower, self.c_upper]
        )
        np.savetxt(
            path,
            data,
            delimiter=",",
            header="index,z_lower,z_upper,c_lower,c_upper",
            comments="",
            fmt=["%d", "%.17g", "%.17g", "%.17g", "%.17g"],
        )

    def save(self, path) -> None:
        np.savez_compressed(
            path,
            n=self.n,
            method=self.method,
            l2z_lo=self.l2z_lo,
            l2z_hi=self.l2z_hi,
            l2zeta_hi=self.l2zeta_hi,
            l2c_hi=self.l2c_hi,
            c_lo=self.c_lo,
        )

    @classmethod
    def load(cls, path) -> "BitChannelQuality":
        with np.load(path, allow_pickle=False) as f:
            return cls(
                n=int(f["n"]),
                method=str(f["method"]),
                l2z_lo=f["l2z_lo"],
                l2z_hi=f["l2z_hi"],
                l2zeta_hi=f["l2zeta_hi"],
                l2c_hi=f["l2c_hi"],
                c_lo=f["c_lo"],
            )


def _l2(x: float) -> float:
    return math.log2(x) if x > 0.0 else -math.inf


# ---------------------------------------------------------------------------
# Exact erasure-channel evolution


def evolve_bec(eps: float, m: int) -> BitChannelQuality:
    """Exact per-index Z for the 2^m-fold polar transform of an erasure channel.

    The per-bit channels of an erasure channel are again erasure channels, so
    Z evolves in closed form (check branch: z -> 2z - z^2, extend branch:
    z -> z^2) and the capacity is 1 - Z.  Both z and 1 - z are tracked in
    the log2 domain to preserve relative accuracy at both extremes.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability must be in [0, 1], got {eps}")
    if m < 0:
        raise ValueError("m must be non-negative")
    l2z = np.array([_l2(eps)])
    l2zeta = np.array([_l2(1.0 - eps)])
    for _ in range(m):
        z = np.exp2(l2z)
        zeta = np.exp2(l2zeta)
        new_z = np.empty(2 * l2z.size)
        new_zeta = np.empty(2 * l2z.size)
        new_z[0::2] = l2z + np.log2(2.0 - z)        # 2z - z^2 = z(2 - z)
        new_zeta[0::2] = 2.0 * l2zeta               # 1 - (2z - z^2) = (1-z)^2
        new_z[1::2] = 2.0 * l2z                     # z^2
        new_zeta[1::2] = l2zeta + np.log2(2.0 - zeta)
        l2z, l2zeta = new_z, new_zeta
    n = 1 << m
    return BitChannelQuality(
        n=n,
        method="exact",
        l2z_lo=l2z.copy(),
        l2z_hi=l2z.copy(),
        l2zeta_hi=l2zeta.copy(),
        l2c_hi=l2zeta.copy(),
        c_lo=np.clip(np.exp2(l2zeta), 0.0, 1.0),
    )


# ---------------------------------------------------------------------------
# Brute-force enumeration at tiny block lengths


def combined_transition_table(ch: SymmetricChannel, m: int) -> np.ndarray:
    """Transition table of the transform-then-transmit channel at length n = 2^m.

    Entry [v, y] is the probability of receiving output word y (base-q index,
    position 0 most significant) given transform input v (bit 0 most
    significant).  Enumeration only; guarded by ``BRUTE_FORCE_TERM_GUARD``.
    """
    n = 1 << m
    q = ch.output_alphabet_size
    if (2**n) * (q**n) > BRUTE_FORCE_TERM_GUARD:
        raise EnumerationGuardError(f"enumeration of {2**n} x {q**n} entries exceeds the guard")
    vs = ((np.arange(2**n)[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1).astype(np.uint8)
    xs = apply_transform(vs)
    table = np.ones((2**n, 1))
    for pos in range(n):
        table = (table[:, :, None] * ch.transitions[xs[:, pos]][:, None, :]).reshape(2**n, -1)
    return table


def bitchannel_tables(ch: SymmetricChannel, m: int) -> list[np.ndarray]:
    """Exact per-bit channel tables by enumeration.

    Element i (0-based) has shape (2^i, 2, q^n): the transition probability
    from input bit b to the composite output (preceding bits p, output word
    y), stored as [p, b, y].
    """
    n = 1 << m
    table = combined_transition_table(ch, m)
    out = []
    for i in range(1, n + 1):
        grouped = table.reshape(2**i, 2 ** (n - i), -1).sum(axis=1) / 2 ** (n - 1)
        out.append(grouped.reshape(2 ** (i - 1), 2, -1))
    return out


def brute_force_bitchannels(ch: SymmetricChannel, m: int) -> BitChannelQuality:
    """Exact Z and C per index by direct enumeration (n = 2^m <= 8)."""
    if m > 3:
        raise ValueError("brute force enumeration is limited to m <= 3")
    n = 1 << m
    z = np.empty(n)
    zeta = np.empty(n)
    c = np.empty(n)
    for i, w in enumerate(bitchannel_tables(ch, m)):
        w0, w1 = w[:, 0, :], w[:, 1, :]
        z[i] = np.sum(np.sqrt(w0 * w1))
        zeta[i] = 0.5 * np.sum((np.sqrt(w0) - np.sqrt(w1)) ** 2)
        c[i] = mutual_information_bits(
            np.array([0.5, 0.5]), np.stack([w0.ravel(), w1.ravel()])
        )
    with np.errstate(divide="ignore"):
        l2z = np.log2(np.maximum(z, 0.0))
        l2zeta = np.log2(np.maximum(zeta, 0.0))
        l2c = np.log2(np.clip(c, 0.0, 1.0))
    return BitChannelQuality(
        n=n, method="brute_force",
        l2z_lo=l2z, l2z_hi=l2z.copy(), l2zeta_hi=l2zeta, l2c_hi=l2c,
        c_lo=np.clip(c, 0.0, 1.0),
    )


# ---------------------------------------------------------------------------
# Symbol-pair form and degrading/upgrading quantization


@dataclass
class _PairForm:
    """A symmetric binary-input channel as a list of output symbol pairs.

    Entry i stands for an output pair {z, mirror(z)} with W(z|0) = a[i] and
    W(z|1) = b[i], canonicalized so a >= b; fixed points of the output
    involution are split into two half-symbols.  Total mass sum(a + b) = 1.
    """

    a: np.ndarray
    b: np.ndarray

    @property
    def size(self) -> int:
        return self.a.size


def _pairform_from_channel(ch: SymmetricChannel) -> _PairForm:
    ch = with_involution(ch)
    pi = ch.involution
    t = ch.transitions
    a_list, b_list = [], []
    for z in range(ch.output_alphabet_size):
        w = int(pi[z])
        if w == z:
            half = t[0, z] / 2.0
            a_list.append(half)
            b_list.append(half)
        elif z < w:
            a_list.append(t[0, z])
            b_list.append(t[1, z])
    a = np.array(a_list)
    b = np.array(b_list)
    swap = b > a
    a, b = np.where(swap, b, a), np.where(swap, a, b)
    return _dedup(_PairForm(a, b))


def _dedup(pf: _PairForm) -> _PairForm:
    """Merge entries with identical likelihood ratio (lossless) and drop zero mass."""
    s = pf.a + pf.b
    keep = s > 0.0
    a, b, s = pf.a[keep], pf.b[keep], s[keep]
    if a.size == 0:
        return _PairForm(np.array([0.5]), np.array([0.5]))
    sigma = a / s
    uniq, inv = np.unique(sigma, return_inverse=True)
    if uniq.size == a.size:
        order = np.argsort(sigma, kind="stable")
        return _PairForm(a[order], b[order])
    return _PairForm(
        np.bincount(inv, weights=a, minlength=uniq.size),
        np.bincount(inv, weights=b, minlength=uniq.size),
    )


def _renormalize(pf: _PairForm) -> _PairForm:
    total = float(np.sum(pf.a) + np.sum(pf.b))
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"pair-form mass drifted to {total}")
    if total != 1.0:
        return _PairForm(pf.a / total, pf.b / total)
    return pf


def _transform_check(pf: _PairForm) -> _PairForm:
    """Pair form of the check-combined (worse) child channel."""
    a, b = pf.a, pf.b
    big_a = (np.multiply.outer(a, a) + np.multiply.outer(b, b)).ravel()
    big_b = (np.multiply.outer(a, b) + np.multiply.outer(b, a)).ravel()
    swap = big_b > big_a
    return _PairForm(np.where(swap, big_b, big_a), np.where(swap, big_a, big_b))


def _transform_extend(pf: _PairForm) -> _PairForm:
    """Pair form of the decision-extended (better) child channel."""
    a, b = pf.a, pf.b
    a1 = np.multiply.outer(a, a).ravel()
    b1 = np.multiply.outer(b, b).ravel()
    a2 = np.multiply.outer(b, a).ravel()
    b2 = np.multiply.outer(a, b).ravel()
    big_a = np.concatenate([a1, a2])
    big_b = np.concatenate([b1, b2])
    swap = big_b > big_a
    return _PairForm(np.where(swap, big_b, big_a), np.where(swap, big_a, big_b))


def _capacity_terms(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(s > 0, 2.0 * a / np.where(s > 0, s, 1.0), 0.0)
        v = np.where(s > 0, 2.0 * b / np.where(s > 0, s, 1.0), 0.0)
        tu = np.where(u > 0, u * np.log2(np.where(u > 0, u, 1.0)), 0.0)
        tv = np.where(v > 0, v * np.log2(np.where(v > 0, v, 1.0)), 0.0)
    return 0.5 * s * (tu + tv)


def _measures(pf: _PairForm) -> tuple[float, float, float]:
    """(Z, 1 - Z, C) of a pair-form channel, each computed by a direct stable sum."""
    z = float(np.sum(2.0 * np.sqrt(pf.a * pf.b)))
    zeta = float(np.sum((np.sqrt(pf.a) - np.sqrt(pf.b)) ** 2))
    c = float(np.clip(np.sum(_capacity_terms(pf.a, pf.b)), 0.0, 1.0))
    return min(z, 1.0), min(zeta, 1.0), c


_PRE_FACTOR = 8  # vectorized pre-reduction target, in units of the final size


def _bucket_ids(weights: np.ndarray, k: int) -> np.ndarray:
    """Monotone bucket ids in [0, k) cutting the cumulative weight evenly."""
    total = float(np.sum(weights))
    if total <= 0.0:
        return np.zeros(weights.size, dtype=np.int64)
    before = np.cumsum(weights) - weights
    return np.minimum((before / total * k).astype(np.int64), k - 1)


def _cap_pair(a: float, b: float) -> float:
    s = a + b
    if s <= 0.0:
        return 0.0
    u, v = 2.0 * a / s, 2.0 * b / s
    t = 0.0
    if u > 0.0:
        t += u * math.log2(u)
    if v > 0.0:
        t += v * math.log2(v)
    return 0.5 * s * t


def _split_mass(aj, bj, lam_lo, lam_hi):
    """Split one pair onto two bracketing likelihood ratios, preserving marginals."""
    if not lam_hi > lam_lo:
        return aj, bj, 0.0, 0.0
    if math.isinf(lam_hi):
        a_lo = lam_lo * bj
        return a_lo, bj, max(aj - a_lo, 0.0), 0.0
    b_hi = min(max((aj - lam_lo * bj) / (lam_hi - lam_lo), 0.0), bj)
    b_lo = bj - b_hi
    a_lo = min(lam_lo * b_lo, aj)
    return a_lo, b_lo, aj - a_lo, b_hi


def _bucket_degrade(pf: _PairForm, k: int) -> _PairForm:
    w = _capacity_terms(pf.a, pf.b) + 1e-12 * (pf.a + pf.b)
    ids = _bucket_ids(w, k)
    starts = np.flatnonzero(np.r_[True, np.diff(ids) > 0])
    return _PairForm(np.add.reduceat(pf.a, starts), np.add.reduceat(pf.b, starts))


def _greedy_degrade(pf: _PairForm, k: int) -> _PairForm:
    """Repeatedly merge the adjacent pair costing the least capacity."""
    a = pf.a.copy()
    b = pf.b.copy()
    m = a.size
    cap = np.array([_cap_pair(a[i], b[i]) for i in range(m)])
    prev = np.arange(m) - 1
    nxt = np.arange(m) + 1
    alive = np.ones(m, dtype=bool)
    ver = np.zeros(m, dtype=np.int64)

    def loss(i, j):
        return cap[i] + cap[j] - _cap_pair(a[i] + a[j], b[i] + b[j])

    heap = [(loss(i, i + 1), i, 0, 0) for i in range(m - 1)]
    heapq.heapify(heap)
    count = m
    while count > k and heap:
        l, i, vi, vj = heapq.heappop(heap)
        j = nxt[i] if i < m else m
        if not alive[i] or j >= m or not alive[j] or ver[i] != vi or ver[j] != vj:
            continue
        a[i] += a[j]
        b[i] += b[j]
        cap[i] = _cap_pair(a[i], b[i])
        alive[j] = False
        nxt[i] = nxt[j]
        if nxt[j] < m:
            prev[nxt[j]] = i
        ver[i] += 1
        count -= 1
        if prev[i] >= 0:
            heapq.heappush(heap, (loss(prev[i], i), prev[i], int(ver[prev[i]]), int(ver[i])))
        if nxt[i] < m:
            heapq.heappush(heap, (loss(i, nxt[i]), i, int(ver[i]), int(ver[nxt[i]])))
    keep = np.flatnonzero(alive)
    return _PairForm(a[keep], b[keep])


def _degrade_to(pf: _PairForm, k: int) -> _PairForm:
    """Merge pairs (adjacent in likelihood-ratio order) down to at most k entries.

    Merging outputs is data processing, so the result is degraded with
    respect to the input channel: its capacity lower-bounds and its Z
    upper-bounds the truth.  Large alphabets are pre-reduced with a
    vectorized bucket merge, then refined greedily.
    """
    if pf.size <= k:
        return pf
    if pf.size > _PRE_FACTOR * k:
        pf = _bucket_degrade(pf, _PRE_FACTOR * k)
    return _greedy_degrade(pf, k)


def _bucket_upgrade(pf: _PairForm, k: int) -> _PairForm:
    a, b = pf.a, pf.b
    s = a + b
    w = _capacity_terms(a, b) + 1e-12 * s
    ids = _bucket_ids(w, k)
    starts = np.flatnonzero(np.r_[True, np.diff(ids) > 0])
    # one representative per bucket, endpoints forced so every entry is bracketed
    reps = []
    bounds = np.r_[starts, a.size]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        reps.append(lo + int(np.argmax(w[lo:hi])))
    reps[0] = 0
    reps[-1] = a.size - 1
    reps = np.unique(np.array(reps, dtype=np.int64))

    is_rep = np.zeros(a.size, dtype=bool)
    is_rep[reps] = True
    new_a = np.where(is_rep, a, 0.0).copy()
    new_b = np.where(is_rep, b, 0.0).copy()

    others = np.flatnonzero(~is_rep)
    if others.size:
        hi_pos = np.searchsorted(reps, others, side="left")
        lo_rep = reps[hi_pos - 1]
        hi_rep = reps[hi_pos]
        lam_lo = np.divide(a[lo_rep], b[lo_rep],
                           out=np.full(others.size, np.inf), where=b[lo_rep] > 0)
        lam_hi = np.divide(a[hi_rep], b[hi_rep],
                           out=np.full(others.size, np.inf), where=b[hi_rep] > 0)
        ao, bo = a[others], b[others]
        same = ~(lam_hi > lam_lo)
        hi_inf = np.isinf(lam_hi) & ~same
        fin = ~hi_inf & ~same
        b_hi = np.zeros(others.size)
        with np.errstate(invalid="ignore"):
            denom = np.where(fin, lam_hi - lam_lo, 1.0)
            b_hi[fin] = np.clip(((ao - lam_lo * bo) / denom)[fin], 0.0, bo[fin])
            b_lo = np.where(hi_inf, bo, bo - b_hi)
            a_lo = np.where(same, ao, np.minimum(lam_lo * b_lo, ao))
        a_hi = ao - a_lo
        np.add.at(new_a, lo_rep, a_lo)
        np.add.at(new_b, lo_rep, b_lo)
        np.add.at(new_a, hi_rep, a_hi)
        np.add.at(new_b, hi_rep, b_hi)
    keep = (new_a + new_b) > 0
    return _PairForm(new_a[keep], new_b[keep])


def _greedy_upgrade(pf: _PairForm, k: int) -> _PairForm:
    """Repeatedly eliminate the interior pair whose split onto its neighbors
    adds the least capacity."""
    a = pf.a.copy()
    b = pf.b.copy()
    m = a.size
    cap = np.array([_cap_pair(a[i], b[i]) for i in range(m)])
    prev = np.arange(m) - 1
    nxt = np.arange(m) + 1
    alive = np.ones(m, dtype=bool)
    ver = np.zeros(m, dtype=np.int64)

    def lam(i):
        return a[i] / b[i] if b[i] > 0 else math.inf

    def gain(j):
        i, l = prev[j], nxt[j]
        a_lo, b_lo, a_hi, b_hi = _split_mass(a[j], b[j], lam(i), lam(l))
        return (
            _cap_pair(a[i] + a_lo, b[i] + b_lo)
            + _cap_pair(a[l] + a_hi, b[l] + b_hi)
            - cap[i] - cap[j] - cap[l]
        )

    heap = [(gain(j), j, 0, 0, 0) for j in range(1, m - 1)]
    heapq.heapify(heap)
    count = m
    while count > k and heap:
        g, j, vj, vi, vl = heapq.heappop(heap)
        if not alive[j]:
            continue
        i, l = prev[j], nxt[j]
        if ver[j] != vj or ver[i] != vi or ver[l] != vl:
            heapq.heappush(heap, (gain(j), j, int(ver[j]), int(ver[i]), int(ver[l])))
            continue
        a_lo, b_lo, a_hi, b_hi = _split_mass(a[j], b[j], lam(i), lam(l))
        a[i] += a_lo
        b[i] += b_lo
        a[l] += a_hi
        b[l] += b_hi
        cap[i] = _cap_pair(a[i], b[i])
        cap[l] = _cap_pair(a[l], b[l])
        alive[j] = False
        nxt[i] = l
        prev[l] = i
        ver[i] += 1
        ver[l] += 1
        count -= 1
        for t in (i, l):
            if 0 <= prev[t] and nxt[t] < m and alive[t]:
                heapq.heappush(heap, (gain(t), t, int(ver[t]), int(ver[prev[t]]), int(ver[nxt[t]])))
    keep = np.flatnonzero(alive)
    return _PairForm(a[keep], b[keep])


def _upgrade_to(pf: _PairForm, k: int) -> _PairForm:
    """Split pairs onto bracketing likelihood ratios, down to at most k entries.

    Replacing a symbol pair by mass on two pairs whose likelihood ratios
    bracket its own (marginals preserved) yields an upgraded channel: its
    capacity upper-bounds and its Z lower-bounds the truth, up to
    double-precision rounding.  Large alphabets are pre-reduced with a
    vectorized split onto bucket representatives, then refined greedily.
    """
    if pf.size <= k:
        return pf
    if pf.size > _PRE_FACTOR * k:
        pf = _bucket_upgrade(pf, _PRE_FACTOR * k)
    return _greedy_upgrade(pf, k)


# ---------------------------------------------------------------------------
# Quantized evolution with interval freezing


@dataclass
class _FrozenGood:
    l2z_lo: np.ndarray
    l2z_hi: np.ndarray
    idx: np.ndarray


@dataclass
class _FrozenBad:
    l2zeta_hi: np.ndarray
    idx: np.ndarray


def _zeta_upper(zeta_measured: float) -> float:
    return zeta_measured * (1.0 + _ZETA_REL_SLACK) + _ZETA_ABS_SLACK


def evolve_quantized(
    ch: SymmetricChannel,
    m: int,
    mu: int = 256,
    freeze_z_l2: float = -128.0,
    freeze_zeta_l2: float = -40.0,
) -> BitChannelQuality:
    """Certified two-sided bounds on Z and C for every index at n = 2^m.

    Each per-bit channel is tracked twice, as a degraded and an upgraded
    approximation with at most ``mu`` outputs (``mu/2`` symbol pairs); the
    degraded side certifies z_upper/c_lower, the upgraded side z_lower /
    c_upper.  Channels whose degraded Z (resp. upgraded 1 - Z) can no longer
    re-cross ``2**freeze_z_l2`` (resp. ``2**freeze_zeta_l2``) by the last
    level are frozen into log2 intervals and propagated in closed form,
    which keeps large block lengths tractable.
    """
    if mu < 4 or mu % 2:
        raise ValueError("mu must be an even integer >= 4")
    if m < 0:
        raise ValueError("m must be non-negative")
    k = mu // 2
    base = _renormalize(_degrade_to(_pairform_from_channel(ch), k))
    base_up = _renormalize(_upgrade_to(_pairform_from_channel(ch), k))

    active: dict[int, tuple[_PairForm, _PairForm]] = {0: (base, base_up)}
    fg_idx: list[int] = []
    fg_lo: list[float] = []
    fg_hi: list[float] = []
    fb_idx: list[int] = []
    fb_hi: list[float] = []

    for level in range(m):
        remaining = m - level - 1
        # channels frozen at earlier levels evolve in closed interval form
        if fg_idx:
            idx = np.asarray(fg_idx, dtype=np.int64)
            lo = np.asarray(fg_lo)
            hi = np.asarray(fg_hi)
            fg_idx = list(np.stack([2 * idx, 2 * idx + 1], axis=1).ravel())
            fg_lo = list(np.stack([lo, 2.0 * lo], axis=1).ravel())      # check: Z >= Z, extend: Z^2
            fg_hi = list(np.stack([hi + 1.0, 2.0 * hi], axis=1).ravel())  # check: <= 2Z, extend: Z^2
        if fb_idx:
            idx = np.asarray(fb_idx, dtype=np.int64)
            hi = np.asarray(fb_hi)
            fb_idx = list(np.stack([2 * idx, 2 * idx + 1], axis=1).ravel())
            fb_hi = list(np.stack([hi, hi + 1.0], axis=1).ravel())      # check: zeta shrinks, extend: <= 2 zeta
        new_active: dict[int, tuple[_PairForm, _PairForm]] = {}
        for i, (deg, upg) in active.items():
            for branch in (0, 1):
                child = 2 * i + branch
                tf = _transform_check if branch == 0 else _transform_extend
                cd = _renormalize(_degrade_to(_dedup(tf(deg)), k))
                cu = _renormalize(_upgrade_to(_dedup(tf(upg)), k))
                z_d, _, _ = _measures(cd)
                z_u, zeta_u, _ = _measures(cu)
                l2z_d = _l2(z_d)
                l2zeta = _l2(_zeta_upper(zeta_u))
                if l2z_d + remaining <= freeze_z_l2:
                    fg_idx.append(child)
                    fg_lo.append(_l2(z_u))
                    fg_hi.append(l2z_d)
                elif l2zeta + remaining <= freeze_zeta_l2:
                    fb_idx.append(child)
                    fb_hi.append(l2zeta)
                else:
                    new_active[child] = (cd, cu)
        active = new_active

    n = 1 << m
    l2z_lo = np.zeros(n)
    l2z_hi = np.zeros(n)
    l2zeta_hi = np.zeros(n)
    l2c_hi = np.zeros(n)
    c_lo = np.zeros(n)

    for i, (deg, upg) in active.items():
        z_d, zeta_d, c_d = _measures(deg)
        z_u, zeta_u, c_u = _measures(upg)
        l2z_hi[i] = _l2(z_d)
        l2z_lo[i] = _l2(z_u)
        l2zeta_hi[i] = _l2(min(1.0, _zeta_upper(zeta_u)))
        l2c_hi[i] = _l2(c_u)
        c_lo[i] = c_d
    if fg_idx:
        idx = np.asarray(fg_idx, dtype=np.int64)
        lo = np.asarray(fg_lo)
        hi = np.asarray(fg_hi)
        l2z_lo[idx] = lo
        l2z_hi[idx] = hi
        l2zeta_hi[idx] = 0.0                       # vacuous: 1 - Z <= 1
        l2c_hi[idx] = 0.0                          # vacuous: C <= 1
        c_lo[idx] = 1.0 - np.log1p(np.exp2(hi)) / LN2
    if fb_idx:
        idx = np.asarray(fb_idx, dtype=np.int64)
        hi = np.asarray(fb_hi)
        with np.errstate(divide="ignore"):
            l2z_lo[idx] = np.log2(np.maximum(-np.expm1(hi * LN2), 0.0))
        l2z_hi[idx] = 0.0                          # vacuous: Z <= 1
        l2zeta_hi[idx] = hi
        l2c_hi[idx] = 0.5 * (1.0 + hi)             # C <= sqrt(2 (1 - Z))
        c_lo[idx] = 0.0

    return BitChannelQuality(
        n=n,
        method=f"quantized({mu})",
        l2z_lo=l2z_lo,
        l2z_hi=l2z_hi,
        l2zeta_hi=l2zeta_hi,
        l2c_hi=l2c_hi,
        c_lo=c_lo,
    )


# ---------------------------------------------------------------------------
# Index-set selection


@dataclass
class SetReport:
    """The index sets cut from a quality table (all indices 0-based, sorted).

    ``good``/``bad`` partition [n]; indices whose bounds straddle a threshold
    are assigned pessimistically (not good, not poor) and also reported.
    """

    n: int
    beta: float
    delta: float | None
    gamma: float | None
    good: np.ndarray
    bad: np.ndarray
    poor: np.ndarray
    poor_z: np.ndarray
    unresolved_good: np.ndarray
    unresolved_poor: np.ndarray

    @property
    def good_fraction(self) -> float:
        return self.good.size / self.n


def good_threshold_l2(n: int, beta: float) -> float:
    """log2 of the good-set threshold (2 to the -n^beta, divided by n)."""
    return -float(n) ** beta - math.log2(n)


def select_sets(
    q: BitChannelQuality,
    beta: float,
    delta: float | None = None,
    gamma: float | None = None,
    log2_delta: float | None = None,
    log2_gamma: float | None = None,
) -> SetReport:
    """Cut the certified good/bad, capacity-poor and Z-poor index sets.

    ``good`` holds indices whose certified z_upper clears the reliability
    threshold; ``bad`` is its complement.  ``poor`` holds indices certified
    to have capacity at most delta; ``poor_z`` those certified to have
    Z >= 1 - gamma.  Thresholds may be given in the log2 domain when the
    plain values would underflow.
    """
    if not 0.0 < beta < 0.5:
        raise ValueError(f"beta must satisfy 0 < beta < 1/2, got {beta}")
    if delta is not None and log2_delta is None:
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must satisfy 0 < delta < 1, got {delta}")
        log2_delta = math.log2(delta)
    if gamma is not None and log2_gamma is None:
        if not 0.0 < gamma < 1.0:
            raise ValueError(f"gamma must satisfy 0 < gamma < 1, got {gamma}")
        log2_gamma = math.log2(gamma)

    n = q.n
    t_l2 = good_threshold_l2(n, beta)
    good_mask = q.l2z_hi < t_l2
    bad_cert = q.l2z_lower >= t_l2
    unresolved_good = np.flatnonzero(~good_mask & ~bad_cert)

    if log2_delta is not None:
        poor_mask = q.l2c_hi <= log2_delta
        delta_plain = np.exp2(log2_delta)  # may underflow to 0; the comparison stays valid
        not_poor_cert = q.c_lower > delta_plain
        unresolved_poor = np.flatnonzero(~poor_mask & ~not_poor_cert)
        poor = np.flatnonzero(poor_mask)
    else:
        poor = np.array([], dtype=np.int64)
        unresolved_poor = np.array([], dtype=np.int64)

    if log2_gamma is not None:
        poor_z = np.flatnonzero(q.l2zeta_hi <= log2_gamma)
    else:
        poor_z = np.array([], dtype=np.int64)

    good = np.flatnonzero(good_mask)
    report = SetReport(
        n=n,
        beta=beta,
        delta=delta if delta is not None else (2.0**log2_delta if log2_delta is not None else None),
        gamma=gamma if gamma is not None else (2.0**log2_gamma if log2_gamma is not None else None),
        good=good,
        bad=np.flatnonzero(~good_mask),
        poor=poor,
        poor_z=poor_z,
        unresolved_good=unresolved_good,
        unresolved_poor=unresolved_poor,
    )
    if np.intersect1d(report.good, report.poor_z).size:
        raise AssertionError("certified good and certified Z-poor sets intersect; bounds are inconsistent")
    return report


@dataclass
class DegradationCheck:
    contained: bool
    containment_violations: np.ndarray
    z_order_violations: np.ndarray


def degradation_inclusion_check(
    q_main: BitChannelQuality, q_wiretap: BitChannelQuality, beta: float,
    log2_tol: float = 1e-9,
) -> DegradationCheck:
    """Check the per-index consequences of wiretap-degraded-from-main.

    Verifies that the certified good set of the wiretap channel is contained
    in that of the main channel, and flags indices where the certified
    bounds prove z(wiretap_i) < z(main_i) beyond a log2-domain margin, which
    would contradict degradation.
    """
    if q_main.n != q_wiretap.n:
        raise ValueError("quality tables must share the same block length")
    t_l2 = good_threshold_l2(q_main.n, beta)
    good_w = q_wiretap.l2z_hi < t_l2
    good_m = q_main.l2z_hi < t_l2
    containment_violations = np.flatnonzero(good_w & ~good_m)
    z_order_violations = np.flatnonzero(q_wiretap.l2z_hi < q_main.l2z_lower - log2_tol)
    return DegradationCheck(
        contained=containment_violations.size == 0,
        containment_violations=containment_violations,
        z_order_violations=z_order_violations,
    )
