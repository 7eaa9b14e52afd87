import numpy as np
import pytest

from fdrelay.channel import SystemConfig
from fdrelay.errors import InvalidInputError, NoCrossingError
from fdrelay.montecarlo import (SEED_SCHEME, DesignKnobs, antenna_split_study, evaluate_trials,
                                find_threshold, oracle_instances, run_trials, sweep_t, trial_gains,
                                trial_rng)

CFG = SystemConfig(2, 2, 3, 3, 5.0, 5.0, 0.2)


def test_trial_stream_is_seed_sequence_of_master_and_index():
    a = trial_rng(42, 7).standard_normal(4)
    b = np.random.Generator(np.random.PCG64(np.random.SeedSequence([42, 7]))).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert "SeedSequence" in SEED_SCHEME


def test_run_trials_deterministic():
    a = run_trials(CFG, 20, 5)
    b = run_trials(CFG, 20, 5)
    assert a == b
    assert [r.trial_index for r in a] == list(range(20))
    assert all(r.r_hd >= 0 and r.r_fd_worst >= 0 for r in a)


def test_trials_depend_only_on_index():
    long = run_trials(CFG, 30, 5)
    short = run_trials(CFG, 10, 5)
    assert long[:10] == short


def test_workers_do_not_change_results():
    t = [0.0, 1.0, 6.0]
    serial = evaluate_trials(CFG, t, 40, 3, workers=1, with_ub=True)
    parallel = evaluate_trials(CFG, t, 40, 3, workers=3, with_ub=True)
    for x, y in zip(serial, parallel):
        np.testing.assert_array_equal(x, y)


def test_t0_doubles_hd_per_trial():
    hd, fd, _ = evaluate_trials(CFG, [0.0], 300, 11)
    np.testing.assert_array_equal(fd[:, 0], 2 * hd)


def test_sweep_report_fields():
    rep = sweep_t(CFG, [0.0, 0.04, 1.0], 100, 8)
    assert rep.l_trials == 100 and rep.master_seed == 8
    np.testing.assert_array_equal(rep.mean_rates_fd[0], 2 * rep.mean_rates_hd[0])
    assert np.all(rep.mean_rates_hd == rep.mean_rates_hd[0])
    assert np.all(np.diff(rep.mean_rates_fd) <= 0)
    assert rep.mean_rates_ub is None
    hd, fd, _ = evaluate_trials(CFG, [0.0, 0.2, 5.0], 100, 8)
    np.testing.assert_allclose(rep.se_fd, fd.std(axis=0, ddof=1) / 10)
    np.testing.assert_allclose(rep.mean_rates_fd, fd.mean(axis=0))


def test_sweep_upper_bound_dominates():
    rep = sweep_t(CFG, [0.04, 1.0, 4.0], 100, 8, upper_bound=True)
    assert np.all(rep.mean_rates_ub >= rep.mean_rates_fd)
    hd, fd, ub = evaluate_trials(CFG, [0.2, 5.0, 20.0], 100, 8, with_ub=True)
    assert np.all(ub >= fd)


@pytest.mark.parametrize("ratios", [[-0.1, 0.0], [1.0, 0.5]])
def test_sweep_validation(ratios):
    with pytest.raises(InvalidInputError):
        sweep_t(CFG, ratios, 10, 1)


def test_empty_sweep():
    rep = sweep_t(CFG, [], 10, 1)
    assert rep.mean_rates_fd.size == 0


def test_standard_error_scaling():
    se = [sweep_t(CFG, [0.04], n, 99).se_fd[0] for n in (500, 2000, 8000)]
    for a, b in zip(se, se[1:]):
        assert abs(a / b - 2.0) <= 0.4


def test_threshold_bracket_error():
    with pytest.raises(NoCrossingError) as info:
        find_threshold(CFG, 20.0, 30.0, 50, 1)
    err = info.value
    assert err.fd_lo < err.hd
    with pytest.raises(InvalidInputError):
        find_threshold(CFG, 3.0, 1.0, 50, 1)


def test_threshold_is_a_crossing():
    t = find_threshold(CFG, 1.0, 20.0, 200, 42, tol=1e-3)
    assert 1.0 < t < 20.0
    hd, fd, _ = evaluate_trials(CFG, [t * 5.0], 200, 42)
    assert abs(fd.mean() - hd.mean()) < 0.01


def test_threshold_grows_with_relay_destination_array():
    small = find_threshold(SystemConfig(2, 2, 3, 3), 1.0, 20.0, 300, 42)
    large = find_threshold(SystemConfig(2, 3, 3, 4), 1.0, 20.0, 300, 42)
    assert large >= small


def test_split_study():
    reps = antenna_split_study(2, 10, 12, [(4, 8), (6, 6), (8, 4)], [0.04], 100, 3)
    hd = [r.mean_rates_hd[0] for r in reps]
    assert hd[0] > hd[1] > hd[2]
    assert [(r.config.k_tx, r.config.k_rx) for r in reps] == [(4, 8), (6, 6), (8, 4)]
    assert len(antenna_split_study(2, 10, 12, [(6, 6)], [0.04], 10, 3)) == 1


def test_split_study_validates_before_running():
    with pytest.raises(InvalidInputError):
        antenna_split_study(2, 10, 12, [(6, 6), (5, 5)], [0.04], 10, 3)
    with pytest.raises(InvalidInputError):
        antenna_split_study(2, 10, 12, [], [0.04], 10, 3)


def test_balance_rule_never_worse_than_plateau():
    # past the hop-rate crossing every iterate is capped by a smaller R_rd
    t = [0.5, 5.0, 20.0, 80.0]
    _, a, _ = evaluate_trials(CFG, t, 300, 4, knobs=DesignKnobs(stop_rule="plateau"))
    _, b, _ = evaluate_trials(CFG, t, 300, 4, knobs=DesignKnobs(stop_rule="balance"))
    assert np.all(a <= b)
    assert np.any(a < b)


def test_oracle_instances_deterministic():
    a = oracle_instances(2, 5, 1)
    b = oracle_instances(2, 5, 1)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x[0], y[0])
        assert x[3] == y[3]
        assert 0.04 * 5 <= x[3] <= 2.44 * 5
        assert x[1].sum() == pytest.approx(5.0)


def test_trial_gains_shapes():
    s1, s2 = trial_gains(SystemConfig(2, 3, 4, 5), 0, 0)
    assert s1.shape == (2,) and s2.shape == (3,)
