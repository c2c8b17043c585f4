import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiretap_polar.channel import SymmetricChannel, capacity, bhattacharyya, make_bec, make_bsc
from wiretap_polar.construction import (
    BitChannelQuality,
    brute_force_bitchannels,
    degradation_inclusion_check,
    evolve_bec,
    evolve_quantized,
    good_threshold_l2,
    select_sets,
)


def test_evolve_bec_one_level():
    q = evolve_bec(0.5, 1)
    assert q.z_upper.tolist() == [0.75, 0.25]
    assert np.array_equal(q.z_lower, q.z_upper)


def test_evolve_bec_noiseless():
    q = evolve_bec(0.0, 5)
    assert np.all(q.z_upper == 0.0)
    assert np.all(q.c_lower == 1.0)


def test_evolve_bec_matches_brute_force():
    for eps in (0.5, 0.3):
        exact = evolve_bec(eps, 3)
        oracle = brute_force_bitchannels(make_bec(eps), 3)
        assert np.max(np.abs(exact.z_upper - oracle.z_upper)) <= 1e-12
        assert np.max(np.abs(exact.c_lower - oracle.c_lower)) <= 1e-12


def test_evolve_bec_capacity_conservation():
    # the transform preserves total capacity; for erasure channels exactly so
    for m in (8, 12, 16):
        q = evolve_bec(0.5, m)
        n = 1 << m
        assert abs(q.c_lower.sum() / n - 0.5) <= 1e-9


def test_brute_force_single_use():
    ch = make_bsc(0.1)
    q = brute_force_bitchannels(ch, 0)
    assert q.z_upper[0] == pytest.approx(bhattacharyya(ch), abs=1e-14)
    assert q.c_upper[0] == pytest.approx(capacity(ch), abs=1e-12)


def test_brute_force_extend_branch_squares_z():
    ch = make_bsc(0.1)
    q = brute_force_bitchannels(ch, 1)
    assert q.z_upper[1] == pytest.approx(bhattacharyya(ch) ** 2, abs=1e-14)


def test_brute_force_cross_oracle_bec():
    q1 = brute_force_bitchannels(make_bec(0.5), 2)
    q2 = evolve_bec(0.5, 2)
    assert np.max(np.abs(q1.z_upper - q2.z_upper)) <= 1e-12


def test_brute_force_guard():
    with pytest.raises(ValueError):
        brute_force_bitchannels(make_bsc(0.1), 4)


def test_quantized_bec_collapses_to_exact():
    for mu in (4, 8, 64):
        q = evolve_quantized(make_bec(0.5), 3, mu=mu)
        e = evolve_bec(0.5, 3)
        assert np.max(np.abs(q.z_upper - e.z_upper)) <= 1e-9
        assert np.max(np.abs(q.z_lower - e.z_lower)) <= 1e-9
        assert np.max(np.abs(q.c_upper - e.c_upper)) <= 1e-9


@pytest.mark.parametrize("p", [0.1, 0.3])
@pytest.mark.parametrize("mu", [8, 256])
def test_quantized_brackets_brute_force(p, mu):
    oracle = brute_force_bitchannels(make_bsc(p), 3)
    q = evolve_quantized(make_bsc(p), 3, mu=mu)
    assert np.all(q.z_lower <= oracle.z_upper + 1e-12)
    assert np.all(q.z_upper >= oracle.z_lower - 1e-12)
    assert np.all(q.c_lower <= oracle.c_upper + 1e-12)
    assert np.all(q.c_upper >= oracle.c_lower - 1e-12)


def test_quantized_noiseless():
    q = evolve_quantized(make_bsc(0.0), 4, mu=16)
    assert np.all(q.z_upper == 0.0)
    assert np.all(q.c_lower == 1.0)


def test_quantized_rejects_asymmetric():
    z = SymmetricChannel(np.array([[1.0, 0.0], [0.5, 0.5]]), label="Z-channel")
    with pytest.raises(ValueError):
        evolve_quantized(z, 2)


def test_quantized_rejects_bad_mu():
    with pytest.raises(ValueError):
        evolve_quantized(make_bsc(0.1), 2, mu=5)


def test_quality_invariants():
    for q in (evolve_quantized(make_bsc(0.3), 5, mu=32), evolve_bec(0.4, 6)):
        assert np.all(q.z_lower >= 0) and np.all(q.z_upper <= 1)
        assert np.all(q.z_lower <= q.z_upper + 1e-15)
        assert np.all(q.c_lower <= q.c_upper + 1e-15)
        assert np.all(q.c_upper <= np.sqrt(1 - q.z_lower**2) + 1e-9)


def test_growing_mu_never_loosens_bounds():
    coarse = evolve_quantized(make_bsc(0.3), 5, mu=32)
    fine = evolve_quantized(make_bsc(0.3), 5, mu=128)
    assert np.all(fine.z_lower >= coarse.z_lower - 1e-12)
    assert np.all(fine.z_upper <= coarse.z_upper + 1e-12)
    assert np.all(fine.c_lower >= coarse.c_lower - 1e-12)
    assert np.all(fine.c_upper <= coarse.c_upper + 1e-12)


def test_select_sets_noiseless():
    q = evolve_bec(0.0, 4)
    rep = select_sets(q, beta=0.3, delta=0.1)
    assert rep.good.size == 16
    assert rep.poor.size == 0


def test_select_sets_pure_noise():
    q = evolve_bec(1.0, 4)
    rep = select_sets(q, beta=0.3, delta=0.01)
    assert rep.good.size == 0
    assert rep.poor.size == 16
    assert rep.poor_z.size == 0  # gamma not requested


def test_select_sets_regression_anchor():
    # frozen from an independent run of the exact erasure evolution
    rep = select_sets(evolve_bec(0.5, 10), beta=0.3)
    assert rep.good.size == 275
    assert rep.bad.size == 1024 - 275
    assert np.array_equal(np.sort(np.concatenate([rep.good, rep.bad])), np.arange(1024))


def test_select_sets_monotonicity():
    q = evolve_bec(0.5, 8)
    poor_sizes = [select_sets(q, beta=0.3, delta=d).poor.size for d in (0.01, 0.1, 0.3)]
    assert poor_sizes == sorted(poor_sizes)
    good_sizes = [select_sets(q, beta=b).good.size for b in (0.45, 0.3, 0.1)]
    assert good_sizes == sorted(good_sizes)


def test_select_sets_validates_parameters():
    q = evolve_bec(0.5, 3)
    with pytest.raises(ValueError):
        select_sets(q, beta=0.6)
    with pytest.raises(ValueError):
        select_sets(q, beta=0.3, delta=1.5)


def test_z_poor_set_limits_capacity():
    # indices whose Z is within gamma of 1 have capacity at most sqrt(2 gamma)
    m, alpha = 10, 0.3
    n = 1 << m
    gamma_l2 = -float(n) ** alpha
    q = evolve_bec(0.5, m)
    rep = select_sets(q, beta=0.1, log2_gamma=gamma_l2)
    assert rep.poor_z.size > 0
    cap_l2 = (1.0 - float(n) ** alpha) / 2.0
    assert np.all(q.l2c_hi[rep.poor_z] <= cap_l2 + 1e-9)


def test_good_and_z_poor_disjoint():
    q = evolve_bec(0.5, 8)
    rep = select_sets(q, beta=0.3, log2_gamma=-8.0)
    assert np.intersect1d(rep.good, rep.poor_z).size == 0


def test_degradation_inclusion_bec_exact():
    for m in (4, 8, 10):
        q_main = evolve_bec(0.3, m)
        q_wire = evolve_bec(0.6, m)
        chk = degradation_inclusion_check(q_main, q_wire, beta=0.3)
        assert chk.contained
        assert chk.z_order_violations.size == 0


def test_degradation_inclusion_bsc_certified():
    q_main = evolve_quantized(make_bsc(0.05), 8, mu=128)
    q_wire = evolve_quantized(make_bsc(0.2), 8, mu=128)
    chk = degradation_inclusion_check(q_main, q_wire, beta=0.3)
    assert chk.contained
    assert chk.z_order_violations.size == 0


def test_degradation_inclusion_identical():
    q = evolve_bec(0.4, 6)
    assert degradation_inclusion_check(q, q, beta=0.25).contained


def test_quality_io_round_trip(tmp_path):
    q = evolve_quantized(make_bsc(0.1), 4, mu=32)
    path = tmp_path / "q.npz"
    q.save(path)
    back = BitChannelQuality.load(path)
    assert back.n == q.n and back.method == q.method
    assert np.array_equal(back.l2z_hi, q.l2z_hi)
    assert np.array_equal(back.c_lo, q.c_lo)
    csv_path = tmp_path / "q.csv"
    q.to_csv(csv_path)
    rows = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    assert rows.shape == (16, 5)
    assert np.allclose(rows[:, 1], q.z_lower)
    assert rows[0, 0] == 1  # 1-based indices in reports


@given(st.floats(0.05, 0.95), st.integers(1, 6))
@settings(max_examples=25, deadline=None)
def test_bec_evolution_properties(eps, m):
    q = evolve_bec(eps, m)
    n = 1 << m
    # total capacity is conserved and z/c are complementary for erasure channels
    assert abs(q.c_lower.sum() - n * (1.0 - eps)) <= 1e-9 * n
    assert np.allclose(q.c_lower, 1.0 - q.z_upper, atol=1e-12)


def test_good_threshold_log_domain():
    # representable far beyond the plain-domain underflow point
    t = good_threshold_l2(2**20, 0.45)
    assert t < -500
    assert np.isfinite(t)
