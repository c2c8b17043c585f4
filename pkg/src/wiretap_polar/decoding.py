"""Successive cancellation decoding: plain, genie-aided, and bounded multi-path.

All decoders work on log-probability pairs (log W(y|0), log W(y|1)) per
position, combined with the exact check/extend recursions of the polar
transform.  Zero probabilities are -inf in the log domain, which the
recursions propagate without special cases.  Decoders accept a single
received word of shape (n,) or a batch of shape (B, n) and decode the batch
in lockstep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import SymmetricChannel, capacity
from .transform import bit_reversal_permutation

LN2 = math.log(2.0)


@dataclass(frozen=True)
class FrozenPattern:
    """Frozen-index set with per-index frozen values (0-based indices).

    Reports and serialized forms use 1-based indices; everything in memory
    is 0-based.
    """

    n: int
    frozen_set: np.ndarray
    frozen_values: np.ndarray | None = None

    def __post_init__(self):
        fs = np.asarray(self.frozen_set, dtype=np.int64)
        if fs.size and (np.any(np.diff(fs) <= 0) or fs[0] < 0 or fs[-1] >= self.n):
            raise ValueError("frozen_set must be strictly increasing within [0, n)")
        fs.setflags(write=False)
        object.__setattr__(self, "frozen_set", fs)
        fv = self.frozen_values
        fv = np.zeros(fs.size, dtype=np.uint8) if fv is None else np.asarray(fv, dtype=np.uint8)
        if fv.shape != (fs.size,):
            raise ValueError("frozen_values must match frozen_set in length")
        fv.setflags(write=False)
        object.__setattr__(self, "frozen_values", fv)

    @property
    def free_set(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.frozen_set] = False
        return np.flatnonzero(mask)


def channel_log_pairs(ch: SymmetricChannel, y: np.ndarray) -> np.ndarray:
    """Per-position log-probability pairs for received symbols ``y`` of shape (B, n)."""
    with np.errstate(divide="ignore"):
        lp = np.log(ch.transitions)
    y = np.asarray(y, dtype=np.int64)
    if np.any(y < 0) or np.any(y >= ch.output_alphabet_size):
        raise ValueError("received symbol outside the channel output alphabet")
    return lp[:, y].transpose(1, 0, 2)  # (B, 2, n)


def _f_pairs(l: np.ndarray, r: np.ndarray) -> np.ndarray:
    out = np.empty_like(l)
    out[:, 0] = np.logaddexp(l[:, 0] + r[:, 0], l[:, 1] + r[:, 1])
    out[:, 1] = np.logaddexp(l[:, 0] + r[:, 1], l[:, 1] + r[:, 0])
    return out


def _g_pairs(l: np.ndarray, r: np.ndarray, b: np.ndarray) -> np.ndarray:
    lb = np.where(b.astype(bool)[:, None, :], l[:, ::-1, :], l)
    out = np.empty_like(l)
    out[:, 0] = lb[:, 0] + r[:, 0]
    out[:, 1] = lb[:, 1] + r[:, 1]
    return out


class _DecodeState:
    """Accumulates decisions and the path penalty during one lockstep decode."""

    def __init__(self, batch, n, forced_mask, forced_values, tie_break, rng):
        self.n = n
        self.forced_mask = forced_mask
        self.forced_values = forced_values
        self.tie_break = tie_break
        self.rng = rng
        self.pos = 0
        self.v_hat = np.zeros((batch, n), dtype=np.uint8)
        self.metric = np.zeros(batch)
        self.metric_cum = np.zeros((batch, n))

    def decide(self, pair: np.ndarray) -> np.ndarray:
        i = self.pos
        p0, p1 = pair[:, 0], pair[:, 1]
        if self.forced_mask[i]:
            bit = self.forced_values[:, i]
        else:
            bit = (p1 > p0).astype(np.uint8)
            if self.tie_break == "random":
                ties = p0 == p1
                if ties.any():
                    bit = bit.copy()
                    bit[ties] = self.rng.integers(0, 2, int(ties.sum()), dtype=np.uint8)
        total = np.logaddexp(p0, p1)
        chosen = np.where(bit == 0, p0, p1)
        with np.errstate(invalid="ignore"):
            penalty = total - chosen
        # both-impossible pairs arise only on paths already contradicted by y
        penalty = np.where(np.isnan(penalty), np.inf, penalty)
        self.metric = self.metric + penalty
        self.metric_cum[:, i] = self.metric
        self.v_hat[:, i] = bit
        self.pos += 1
        return bit


def _sc_rec(state: _DecodeState, pairs: np.ndarray) -> np.ndarray:
    s = pairs.shape[2]
    if s == 1:
        bit = state.decide(pairs[:, :, 0])
        return bit[:, None]
    h = s // 2
    left, right = pairs[:, :, :h], pairs[:, :, h:]
    bl = _sc_rec(state, _f_pairs(left, right))
    br = _sc_rec(state, _g_pairs(left, right, bl))
    return np.concatenate([bl ^ br, br], axis=1)


def sc_engine(
    log_pairs: np.ndarray,
    forced_mask: np.ndarray,
    forced_values: np.ndarray,
    tie_break: str = "zero",
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run lockstep successive cancellation on channel log pairs.

    Parameters
    ----------
    log_pairs : ndarray, shape (B, 2, n)
        Log-probability pairs in natural position order.
    forced_mask : ndarray, shape (n,), bool
        Positions whose decisions are imposed rather than estimated.
    forced_values : ndarray, shape (B, n), uint8
        Imposed values (only read where forced_mask is set).
    tie_break : "zero" or "random"

    Returns
    -------
    (v_hat, metric, metric_cum)
        Decisions (B, n); accumulated path penalty (B,); and the running
        penalty after each decision (B, n).
    """
    if tie_break not in ("zero", "random"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    if tie_break == "random" and rng is None:
        raise ValueError("tie_break='random' needs an rng")
    batch, _, n = log_pairs.shape
    state = _DecodeState(batch, n, forced_mask, forced_values, tie_break, rng)
    _sc_rec(state, log_pairs[:, :, bit_reversal_permutation(n.bit_length() - 1)])
    return state.v_hat, state.metric, state.metric_cum


def _as_batch(y: np.ndarray) -> tuple[np.ndarray, bool]:
    y = np.asarray(y)
    if y.ndim == 1:
        return y[None, :], True
    if y.ndim == 2:
        return y, False
    raise ValueError("received word must have shape (n,) or (B, n)")


def _forced_arrays(n, batch, index_sets_and_values):
    mask = np.zeros(n, dtype=bool)
    values = np.zeros((batch, n), dtype=np.uint8)
    for idx, vals in index_sets_and_values:
        idx = np.asarray(idx, dtype=np.int64)
        mask[idx] = True
        vals = np.asarray(vals, dtype=np.uint8)
        values[:, idx] = vals if vals.ndim == 2 else vals[None, :]
    return mask, values


def sc_decode(
    y: np.ndarray,
    main: SymmetricChannel,
    pattern: FrozenPattern,
    tie_break: str = "zero",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Successive cancellation decode of received word(s) ``y``.

    Frozen positions take their pattern values; free positions follow the
    maximum-likelihood bit decision against the effective per-bit channel.
    Returns the full decided vector v-hat of length n.
    """
    yb, single = _as_batch(y)
    n = yb.shape[1]
    if pattern.n != n:
        raise ValueError(f"pattern is for n={pattern.n}, received words have n={n}")
    mask, values = _forced_arrays(n, yb.shape[0], [(pattern.frozen_set, pattern.frozen_values)])
    v_hat, _, _ = sc_engine(channel_log_pairs(main, yb), mask, values, tie_break, rng)
    return v_hat[0] if single else v_hat


def sc_decode_genie(
    y: np.ndarray,
    main: SymmetricChannel,
    free_set: np.ndarray,
    genie_values: np.ndarray,
    tie_break: str = "zero",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Successive cancellation with all non-free decisions revealed externally.

    ``genie_values`` holds the true bits of the complement of ``free_set`` in
    increasing index order (optionally batched).  Returns the decisions on
    ``free_set`` in increasing index order.
    """
    yb, single = _as_batch(y)
    n = yb.shape[1]
    free = np.asarray(free_set, dtype=np.int64)
    comp_mask = np.ones(n, dtype=bool)
    comp_mask[free] = False
    comp = np.flatnonzero(comp_mask)
    gv = np.asarray(genie_values, dtype=np.uint8)
    if gv.shape[-1] != comp.size:
        raise ValueError(f"genie_values must cover the {comp.size} non-free indices")
    mask, values = _forced_arrays(n, yb.shape[0], [(comp, gv)])
    v_hat, _, _ = sc_engine(channel_log_pairs(main, yb), mask, values, tie_break, rng)
    out = v_hat[:, np.sort(free)]
    return out[0] if single else out


def multipath_decode(
    y: np.ndarray,
    main: SymmetricChannel,
    pattern: FrozenPattern,
    branch_set: np.ndarray,
    max_paths: int,
    prune_sigma: float = 6.0,
    tie_break: str = "zero",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Successive cancellation following both alternatives at ``branch_set`` indices.

    Every surviving path forks at each branch index.  When more than
    ``max_paths`` paths are alive, the worst-penalty paths are dropped; a
    path is also dropped early when its penalty exceeds the expected
    channel log-loss by ``prune_sigma`` standard deviations (the per-step
    loss model is a heuristic, see package notes).  The best-penalty
    complete path wins.
    """
    if max_paths < 1:
        raise ValueError("max_paths must be at least 1")
    yb, single = _as_batch(y)
    batch, n = yb.shape
    if pattern.n != n:
        raise ValueError(f"pattern is for n={pattern.n}, received words have n={n}")
    branches = np.sort(np.asarray(branch_set, dtype=np.int64))
    if np.intersect1d(branches, pattern.frozen_set).size:
        raise ValueError("branch_set must be disjoint from the frozen set")
    log_pairs = channel_log_pairs(main, yb)

    # expected penalty (nats) of the true path after i+1 decisions, plus a
    # generous one-bit-per-step deviation scale
    loss_rate = (1.0 - capacity(main)) * LN2
    steps = np.arange(1, n + 1)
    expected = loss_rate * steps
    allowed = expected + prune_sigma * np.sqrt(steps) * LN2

    def run(branch_bits):
        # branch_bits: (batch, len(branches)) forced values at branch indices
        mask, values = _forced_arrays(
            n, batch, [(pattern.frozen_set, pattern.frozen_values), (branches, branch_bits)]
        )
        return sc_engine(log_pairs, mask, values, tie_break, rng)

    if branches.size == 0:
        v_hat, _, _ = run(np.zeros((batch, 0), dtype=np.uint8))
        return v_hat[0] if single else v_hat

    # candidate assignments to branch indices, grown one branch at a time;
    # dead candidates carry +inf metric per batch element
    assigns = [np.zeros((batch, 0), dtype=np.uint8)]
    alive = [np.ones(batch, dtype=bool)]
    for t, b_idx in enumerate(branches):
        forked_assigns, forked_alive = [], []
        for a, al in zip(assigns, alive):
            for bit in (0, 1):
                col = np.full((batch, 1), bit, dtype=np.uint8)
                forked_assigns.append(np.concatenate([a, col], axis=1))
                forked_alive.append(al.copy())
        assigns, alive = forked_assigns, forked_alive
        if len(assigns) <= max_paths and prune_sigma == math.inf:
            continue
        # score candidates by the penalty accumulated up to this branch index
        pad = np.zeros((batch, branches.size - t - 1), dtype=np.uint8)
        metrics = np.full((len(assigns), batch), np.inf)
        for c, (a, al) in enumerate(zip(assigns, alive)):
            _, _, cum = run(np.concatenate([a, pad], axis=1))
            metrics[c] = np.where(al, cum[:, b_idx], np.inf)
        order = np.argsort(metrics, axis=0, kind="stable")
        rank = np.empty_like(order)
        np.put_along_axis(rank, order, np.arange(len(assigns))[:, None], axis=0)
        best = metrics.min(axis=0)
        for c in range(len(assigns)):
            keep = rank[c] < max_paths
            keep &= np.isfinite(metrics[c])
            # statistical discard, but never the element's best path
            keep &= (metrics[c] <= allowed[b_idx]) | (metrics[c] == best)
            alive[c] = keep
        live = [c for c in range(len(assigns)) if alive[c].any()]
        assigns = [assigns[c] for c in live]
        alive = [alive[c] for c in live]

    results = np.full((len(assigns), batch), np.inf)
    v_hats = np.zeros((len(assigns), batch, n), dtype=np.uint8)
    for c, (a, al) in enumerate(zip(assigns, alive)):
        v_hat, metric, _ = run(a)
        v_hats[c] = v_hat
        results[c] = np.where(al, metric, np.inf)
    winner = results.argmin(axis=0)
    out = v_hats[winner, np.arange(batch)]
    return out[0] if single else out
