"""Exact small-block information-theoretic oracles, leakage bounds, and Monte Carlo.

Everything enumerable is enumerated: leakage I(U;Z) from the joint law of
message, randomizer and Eve's output; the induced channel seen by the
non-randomized inputs; its symmetry and capacity.  At realistic lengths the
module falls back to certified bounds plus Monte Carlo with conservative
confidence limits.  Entropies and mutual informations are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import stats

from .channel import (
    SymmetricChannel,
    binary_entropy,
    capacity,
    mutual_information_bits,
    sample_noise,
    apply_noise,
    with_involution,
)
from .construction import BitChannelQuality, EnumerationGuardError
from .transform import apply_transform
from .wiretap import SeededBits, WiretapCodeSpec, decode, encode, eve_attack

ENUMERATION_GUARD = 10**8

PRIOR_NAMES = ("uniform", "point_mass", "skewed")
SKEWED_ONE_PROB = 0.2


def message_prior(kind, k: int) -> np.ndarray:
    """Distribution over all 2^k messages (bit 0 of the message = MSB of the index).

    ``kind`` is "uniform", "point_mass" (alternating-bit word), "skewed"
    (independent bits with Pr{1} = 0.2), or an explicit length-2^k vector.
    """
    if isinstance(kind, np.ndarray) or isinstance(kind, (list, tuple)):
        p = np.asarray(kind, dtype=np.float64)
        if p.shape != (2**k,) or abs(p.sum() - 1.0) > 1e-10 or np.any(p < 0):
            raise ValueError("explicit prior must be a distribution over 2^k messages")
        return p
    if kind == "uniform":
        return np.full(2**k, 2.0**-k)
    if kind == "point_mass":
        word = np.arange(k) % 2  # 0101...
        idx = int("".join(map(str, word)), 2) if k else 0
        p = np.zeros(max(2**k, 1))
        p[idx] = 1.0
        return p
    if kind == "skewed":
        bits = (np.arange(2**k)[:, None] >> np.arange(k - 1, -1, -1)[None, :]) & 1
        p = np.where(bits == 1, SKEWED_ONE_PROB, 1.0 - SKEWED_ONE_PROB)
        return p.prod(axis=1)
    raise ValueError(f"unknown prior {kind!r}")


def sample_messages(kind, k: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` messages of k bits from a named prior."""
    if kind == "uniform":
        return rng.integers(0, 2, (count, k), dtype=np.uint8)
    if kind == "point_mass":
        return np.tile((np.arange(k) % 2).astype(np.uint8), (count, 1))
    if kind == "skewed":
        return (rng.random((count, k)) < SKEWED_ONE_PROB).astype(np.uint8)
    raise ValueError(f"unknown prior {kind!r}")


def _word_table(ch: SymmetricChannel, words: np.ndarray) -> np.ndarray:
    """Rows of output-word probabilities for each input bit word (output index
    base-q, position 0 most significant)."""
    count, n = words.shape
    table = np.ones((count, 1))
    for pos in range(n):
        table = (table[:, :, None] * ch.transitions[words[:, pos]][:, None, :]).reshape(count, -1)
    return table


def _all_bit_words(bits: int) -> np.ndarray:
    return ((np.arange(2**bits)[:, None] >> np.arange(bits - 1, -1, -1)[None, :]) & 1).astype(np.uint8)


def exact_leakage(
    spec: WiretapCodeSpec,
    wiretap: SymmetricChannel,
    prior="uniform",
    freeze_randomizer: bool = False,
) -> float:
    """I(U; Z) in bits by exhaustive enumeration of the joint law.

    The randomizer is uniform (or frozen to zero when ``freeze_randomizer``);
    the message follows ``prior``.  Guarded to about 1e8 enumerated terms.
    """
    n, k, r = spec.n, spec.k, spec.r
    q = wiretap.output_alphabet_size
    r_eff = 0 if freeze_randomizer else r
    if 2 ** (k + r_eff) * q**n > ENUMERATION_GUARD:
        raise EnumerationGuardError("instance too large for exact enumeration")
    us = _all_bit_words(k)
    es = np.zeros((1, r), dtype=np.uint8) if r_eff == 0 else _all_bit_words(r)
    v = np.zeros((us.shape[0] * es.shape[0], n), dtype=np.uint8)
    v[:, spec.a_set] = np.repeat(us, es.shape[0], axis=0)
    v[:, spec.r_set] = np.tile(es, (us.shape[0], 1))
    x = apply_transform(v)
    table = _word_table(wiretap, x)
    p_z_given_u = table.reshape(us.shape[0], es.shape[0], -1).mean(axis=1)
    p_u = message_prior(prior, k)
    return mutual_information_bits(p_u, p_z_given_u)


@dataclass
class WeakBound:
    """Leakage bound for the weak scheme and its ingredients."""

    value: float
    normalized: float
    epsilon_n: float
    n_epsilon_n: float
    tail_terms: float


def weak_bound(spec: WiretapCodeSpec, wiretap: SymmetricChannel | float) -> WeakBound:
    """Upper bound on I(U;Z): n * eps_n + h2(2^(-n^beta)) + (n-k) 2^(-n^beta).

    eps_n is the gap between the wiretap capacity and the randomized
    fraction |R|/n; the remaining terms bound Eve's residual uncertainty
    about the randomizer after a genie reveals the message.
    """
    if spec.scheme != "weak":
        raise ValueError("weak_bound applies to weak-scheme specs")
    c_w = capacity(wiretap) if isinstance(wiretap, SymmetricChannel) else float(wiretap)
    n, k = spec.n, spec.k
    eps_n = c_w - spec.r / n
    t = 2.0 ** (-float(n) ** spec.beta)
    tail = binary_entropy(t) + (n - k) * t
    value = n * eps_n + tail
    return WeakBound(
        value=value,
        normalized=value / n,
        epsilon_n=eps_n,
        n_epsilon_n=n * eps_n,
        tail_terms=tail,
    )


def strong_bound(spec: WiretapCodeSpec, q_wiretap: BitChannelQuality | None = None) -> float:
    """Prior-independent leakage bound: delta_n times the size of Eve's poor set."""
    if spec.scheme != "strong":
        raise ValueError("strong_bound applies to strong-scheme specs")
    poor_size = spec.k + spec.b_set.size  # A and B partition the poor set
    if poor_size == 0:
        return 0.0
    return float(np.exp2(spec.log2_delta_n + math.log2(poor_size)))


# ---------------------------------------------------------------------------
# Induced channel: the channel from non-randomized inputs to Eve


def build_induced_channel(wiretap: SymmetricChannel, r_set: np.ndarray, n: int) -> np.ndarray:
    """Transition matrix from the non-randomized input bits to the full output word.

    Row x (bits on the complement of R, most significant first) holds the
    output-word distribution averaged over uniform randomizer bits on R.
    """
    q = wiretap.output_alphabet_size
    r_set = np.sort(np.asarray(r_set, dtype=np.int64))
    r = r_set.size
    comp = np.setdiff1d(np.arange(n), r_set)
    if 2**n * q**n > ENUMERATION_GUARD:
        raise EnumerationGuardError("instance too large for exact enumeration")
    xs = _all_bit_words(comp.size)
    es = _all_bit_words(r)
    v = np.zeros((xs.shape[0] * es.shape[0], n), dtype=np.uint8)
    v[:, comp] = np.repeat(xs, es.shape[0], axis=0)
    if r:
        v[:, r_set] = np.tile(es, (xs.shape[0], 1))
    table = _word_table(wiretap, apply_transform(v))
    return table.reshape(xs.shape[0], es.shape[0], -1).mean(axis=1)


class InducedAction:
    """Group action of the non-randomized inputs on output words.

    Input difference a acts on an output word by applying the channel's
    output involution at every position where the transform of (a; 0)
    is one.
    """

    def __init__(self, wiretap: SymmetricChannel, r_set: np.ndarray, n: int):
        self.wiretap = with_involution(wiretap)
        self.n = n
        self.r_set = np.sort(np.asarray(r_set, dtype=np.int64))
        self.comp = np.setdiff1d(np.arange(n), self.r_set)
        self.q = wiretap.output_alphabet_size

    def codeword(self, a_bits: np.ndarray) -> np.ndarray:
        v = np.zeros(self.n, dtype=np.uint8)
        v[self.comp] = a_bits
        return apply_transform(v)

    def output_permutation(self, a_bits: np.ndarray) -> np.ndarray:
        """Permutation of output-word indices implementing the action of a."""
        c = self.codeword(a_bits)
        pi = self.wiretap.involution
        q, n = self.q, self.n
        idx = np.arange(q**n)
        out = np.zeros_like(idx)
        for pos in range(n):
            digit = (idx // q ** (n - 1 - pos)) % q
            if c[pos]:
                digit = pi[digit]
            out = out * q + digit
        return out


@dataclass
class InducedSymmetryReport:
    symmetric: bool
    covariance_ok: bool
    orbits_ok: bool
    orbit_labels: np.ndarray


def check_induced_symmetry(
    Q: np.ndarray, action: InducedAction, tol: float = 1e-12
) -> InducedSymmetryReport:
    """Verify that the induced channel is output-symmetric.

    Checks the covariance identity Q(z | a + x) = Q(a о z | x) on all
    triples, partitions the outputs into orbits of the action, and verifies
    that every orbit's column submatrix is strongly symmetric.  A failed
    check is a verdict, not an error.
    """
    n_in, n_out = Q.shape
    bits = n_in.bit_length() - 1
    covariance_ok = True
    labels = np.arange(n_out)
    basis_perms = []
    for a in range(1, n_in):
        a_bits = ((a >> np.arange(bits - 1, -1, -1)) & 1).astype(np.uint8)
        perm = action.output_permutation(a_bits)
        xor_rows = np.arange(n_in) ^ a
        if not np.allclose(Q[xor_rows], Q[:, perm], atol=tol, rtol=0.0):
            covariance_ok = False
        if bin(a).count("1") == 1:
            basis_perms.append(perm)
    # orbit labels: propagate minima along the generating permutations
    changed = True
    while changed:
        changed = False
        for perm in basis_perms:
            new = np.minimum(labels, labels[perm])
            if not np.array_equal(new, labels):
                labels = new
                changed = True

    orbits_ok = True
    for orbit_id in np.unique(labels):
        sub = Q[:, labels == orbit_id]
        rows = np.sort(sub, axis=1)
        cols = np.sort(sub, axis=0)
        if not (
            np.allclose(rows, rows[0], atol=tol, rtol=0.0)
            and np.allclose(cols, cols[:, :1], atol=tol, rtol=0.0)
        ):
            orbits_ok = False
            break
    return InducedSymmetryReport(
        symmetric=covariance_ok and orbits_ok,
        covariance_ok=covariance_ok,
        orbits_ok=orbits_ok,
        orbit_labels=labels,
    )


def induced_capacity_check(
    Q: np.ndarray, q_wiretap: BitChannelQuality, r_set: np.ndarray, tol: float = 1e-9
) -> tuple[float, float, bool]:
    """Exact capacity of the induced channel against the per-bit capacity sum.

    Returns (C(Q), sum over non-R indices of C(W_i), verdict that the first
    does not exceed the second beyond ``tol``).  Symmetry of the induced
    channel makes the uniform input optimal, so C(Q) is a plain mutual
    information.
    """
    n_in = Q.shape[0]
    prior = np.full(n_in, 1.0 / n_in)
    c_q = mutual_information_bits(prior, Q)
    comp = np.setdiff1d(np.arange(q_wiretap.n), np.asarray(r_set, dtype=np.int64))
    c_sum = float(np.sum(q_wiretap.c_upper[comp]))
    return c_q, c_sum, c_q <= c_sum + tol


def noiseless_main_identity(wiretap: SymmetricChannel, n: int, tol: float = 1e-9):
    """Exact I(X;Z) for uniform codewords against n times the channel capacity."""
    q = wiretap.output_alphabet_size
    if 2**n * q**n > ENUMERATION_GUARD:
        raise EnumerationGuardError("instance too large for exact enumeration")
    table = _word_table(wiretap, _all_bit_words(n))
    mi = mutual_information_bits(np.full(2**n, 2.0**-n), table)
    target = n * capacity(wiretap)
    return mi, target, abs(mi - target) <= tol


# ---------------------------------------------------------------------------
# Monte Carlo harnesses


def clopper_pearson_upper(errors: int, trials: int, confidence: float = 0.99) -> float:
    """One-sided upper confidence limit for a binomial proportion."""
    if errors >= trials:
        return 1.0
    return float(stats.beta.ppf(confidence, errors + 1, trials - errors))


@dataclass
class TrialResult:
    prior: str
    trials: int
    errors: int
    fer: float
    upper_confidence: float
    bound: float
    passed: bool


class _ReplayBits:
    """Bit source that replays one pre-drawn block (to pair randomizer bits
    across message priors)."""

    def __init__(self, stock: np.ndarray):
        self.stock = stock.reshape(-1)

    def bits(self, count: int) -> np.ndarray:
        return self.stock[:count]


def reliability_trial(
    spec: WiretapCodeSpec,
    main: SymmetricChannel,
    q_main: BitChannelQuality,
    trials: int,
    rng: np.random.Generator,
    priors=PRIOR_NAMES,
    strategy: str = "sc",
    max_paths: int | None = None,
    confidence: float = 0.99,
    chunk: int = 4096,
) -> list[TrialResult]:
    """Empirical frame-error rate per message prior against the certified bound.

    All priors see identical channel-noise realizations and randomizer bits,
    so verdict differences can only come from the messages themselves.  PASS
    means the one-sided confidence limit stays below the bound (plus a 1e-6
    absolute floor).
    """
    free = np.sort(np.concatenate([spec.a_set, spec.r_set]))
    bound = float(np.sum(q_main.z_upper[free]))
    n = spec.n
    errors = {p: 0 for p in priors}
    done = 0
    seeds = rng.spawn(len(priors) + 2)
    noise_rng, e_rng = seeds[-2], seeds[-1]
    prior_rngs = dict(zip(priors, seeds))
    while done < trials:
        b = min(chunk, trials - done)
        noise = sample_noise(main, b * n, noise_rng).reshape(b, n)
        e_cache = SeededBits(e_rng).bits(b * spec.r).reshape(b, spec.r)
        for p in priors:
            u = sample_messages(p, spec.k, b, prior_rngs[p])
            frame = encode(spec, u, rng=_ReplayBits(e_cache))
            y = apply_noise(main, frame.x, noise)
            u_hat = decode(spec, y, main, strategy=strategy, max_paths=max_paths)
            errors[p] += int(np.sum(np.any(u_hat != u, axis=1)))
        done += b
    results = []
    for p in priors:
        ucl = clopper_pearson_upper(errors[p], trials, confidence)
        results.append(
            TrialResult(
                prior=p,
                trials=trials,
                errors=errors[p],
                fer=errors[p] / trials,
                upper_confidence=ucl,
                bound=bound,
                passed=ucl <= bound + 1e-6,
            )
        )
    return results


@dataclass
class AttackResult:
    trials: int
    failures: int
    empirical_lambda: float
    upper_confidence: float
    bound: float
    passed: bool


def attack_trial(
    spec: WiretapCodeSpec,
    wiretap: SymmetricChannel,
    q_wiretap: BitChannelQuality,
    trials: int,
    rng: np.random.Generator,
    prior: str = "uniform",
    confidence: float = 0.99,
    chunk: int = 4096,
) -> AttackResult:
    """Monte Carlo estimate of Eve's randomizer-recovery failure probability.

    The genie hands Eve the message; her failure rate is compared against
    the certified sum of z_upper over R.
    """
    bound = float(np.sum(q_wiretap.z_upper[spec.r_set]))
    n = spec.n
    failures = 0
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        u = sample_messages(prior, spec.k, b, rng)
        frame = encode(spec, u, rng=SeededBits(rng))
        z = apply_noise(wiretap, frame.x, sample_noise(wiretap, b * n, rng).reshape(b, n))
        e_hat = eve_attack(spec, z, wiretap, u)
        failures += int(np.sum(np.any(e_hat != frame.e, axis=1)))
        done += b
    lam = failures / trials
    ucl = clopper_pearson_upper(failures, trials, confidence)
    return AttackResult(
        trials=trials,
        failures=failures,
        empirical_lambda=lam,
        upper_confidence=ucl,
        bound=bound,
        passed=ucl <= bound + 1e-6,
    )


# ---------------------------------------------------------------------------
# Secrecy reporting


@dataclass
class Metric:
    value: float
    provenance: str  # "exact" | "bound" | "monte_carlo"


@dataclass
class SecrecyReport:
    """All headline numbers for one code instance, each tagged with provenance."""

    n: int
    scheme: str
    rate: Metric
    secrecy_capacity: Metric
    reliability_bound: Metric
    leakage_bound_weak: Metric | None
    leakage_bound_strong: Metric | None
    n_epsilon_n: Metric
    set_sizes: dict
    empirical: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def leakage_bound(self) -> Metric:
        return self.leakage_bound_strong if self.scheme == "strong" else self.leakage_bound_weak

    def csv_row(self, wiretap_param: float) -> str:
        cs = self.secrecy_capacity.value
        pct = 100.0 * self.rate.value / cs if cs > 0 else 0.0
        return (
            f"{wiretap_param:g},{self.rate.value:.6f},{pct:.1f}%,"
            f"{self.reliability_bound.value:.3e},{self.leakage_bound.value:.3e}"
        )


CSV_HEADER = "p2,Rate,%Cs,reliability_bound,leakage_bound"


def secrecy_report(
    spec: WiretapCodeSpec,
    main: SymmetricChannel,
    wiretap: SymmetricChannel,
    q_main: BitChannelQuality,
    q_wiretap: BitChannelQuality,
    empirical: dict | None = None,
) -> SecrecyReport:
    """Assemble rate, secrecy capacity, certified bounds and set sizes."""
    if not (spec.n == q_main.n == q_wiretap.n):
        raise ValueError("inconsistent block lengths")
    free = np.sort(np.concatenate([spec.a_set, spec.r_set]))
    rel = float(np.sum(q_main.z_upper[free]))
    c_s = capacity(main) - capacity(wiretap)
    if spec.scheme == "strong":
        leak_weak = None
        leak_strong = Metric(strong_bound(spec), "bound")
        # the rate decomposes exactly over the two partitions of the index set
        poor = spec.k + spec.b_set.size
        bad_main = spec.b_set.size + spec.x_set.size
        assert spec.k == poor - bad_main + spec.x_set.size
    else:
        leak_weak = Metric(weak_bound(spec, wiretap).value, "bound")
        leak_strong = None
    eps = capacity(wiretap) - spec.r / spec.n
    return SecrecyReport(
        n=spec.n,
        scheme=spec.scheme,
        rate=Metric(spec.rate, "exact"),
        secrecy_capacity=Metric(c_s, "exact"),
        reliability_bound=Metric(rel, "bound"),
        leakage_bound_weak=leak_weak,
        leakage_bound_strong=leak_strong,
        n_epsilon_n=Metric(spec.n * eps, "exact"),
        set_sizes={
            "R": int(spec.r),
            "A": int(spec.k),
            "B": int(spec.b_set.size),
            "X": int(spec.x_set.size),
            "Y": int(spec.y_set.size),
        },
        empirical=empirical or {},
    )


# ---------------------------------------------------------------------------
# Self-check suite (exposed through the command line as `verify`)


def run_verification_suite(verbose: bool = True) -> bool:
    """Exhaustive small-block checks of the package's information-theoretic claims.

    Covers the induced-channel symmetry and capacity inequality over every
    randomizer set at n in {2, 4}, the noiseless-main mutual-information
    identity, leakage against both bounds on enumerable instances, and the
    transform involution.  Prints one PASS/FAIL line per group and returns
    overall success.
    """
    from .channel import make_bec, make_bsc
    from .construction import brute_force_bitchannels
    from .wiretap import build_spec

    ok_all = True

    def report(name, ok):
        nonlocal ok_all
        ok_all &= ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")

    rng = np.random.default_rng(0)
    v = rng.integers(0, 2, (64, 16), dtype=np.uint8)
    report("transform involution", bool(np.array_equal(apply_transform(apply_transform(v)), v)))

    channels = [make_bsc(0.3), make_bec(0.5)]
    ok = True
    for ch in channels:
        for n in (2, 4):
            qb = brute_force_bitchannels(ch, n.bit_length() - 1)
            for rbits in range(2**n):
                r_set = np.flatnonzero([(rbits >> i) & 1 for i in range(n)])
                Q = build_induced_channel(ch, r_set, n)
                ok &= bool(np.allclose(Q.sum(axis=1), 1.0, atol=1e-12))
                ok &= check_induced_symmetry(Q, InducedAction(ch, r_set, n)).symmetric
                ok &= induced_capacity_check(Q, qb, r_set)[2]
    report("induced-channel symmetry and capacity inequality (n in {2,4}, all R)", ok)

    ok = True
    for ch in channels + [make_bsc(0.25)]:
        for n in (1, 2, 4, 8):
            ok &= noiseless_main_identity(ch, n)[2]
    report("noiseless-main mutual-information identity", ok)

    ok = True
    q_main = brute_force_bitchannels(make_bsc(0.0), 3)
    for ch in channels:
        q_wire = brute_force_bitchannels(ch, 3)
        spec = build_spec(q_main, q_wire, beta=0.2, scheme="weak")
        leak = exact_leakage(spec, ch, "uniform")
        ok &= leak <= weak_bound(spec, ch).value + 1e-9
        leak0 = exact_leakage(spec, ch, "uniform", freeze_randomizer=True)
        ok &= leak0 >= spec.k * capacity(ch) - 1e-9
        strong = build_spec(q_main, q_wire, beta=0.2, scheme="strong", delta_n=0.2, c1=0.1)
        sb = strong_bound(strong)
        for prior in PRIOR_NAMES:
            ok &= exact_leakage(strong, ch, prior) <= sb + 1e-9
    report("leakage against weak and strong bounds (n = 8)", ok)

    return ok_all
