import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sinrsched.errors import ConfigError
from sinrsched.interference import Schedule
from sinrsched.traffic import (
    ArrivalConfig,
    QueueState,
    backlog_slope,
    initial_queues,
    sample_arrivals,
    total_backlog,
    update_queues,
)


class TestArrivals:
    def test_zero_rate_all_zero(self):
        rng = np.random.default_rng(0)
        a = sample_arrivals(ArrivalConfig(lam=0.0), rng, 100)
        assert (a == 0).all()

    def test_cap_truncates(self):
        rng = np.random.default_rng(1)
        a = sample_arrivals(ArrivalConfig(lam=5.0, a_max=1), rng, 1000)
        assert set(np.unique(a)) <= {0, 1}

    def test_empirical_mean(self):
        # 1e6 draws at lam=0.2 with a generous cap: within 1% of the rate
        rng = np.random.default_rng(2)
        a = sample_arrivals(ArrivalConfig(lam=0.2, a_max=50), rng, 10**6)
        assert abs(a.mean() - 0.2) < 0.002

    def test_deterministic_per_seed(self):
        a = sample_arrivals(ArrivalConfig(lam=0.7), np.random.default_rng(7), 50)
        b = sample_arrivals(ArrivalConfig(lam=0.7), np.random.default_rng(7), 50)
        assert (a == b).all()

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            ArrivalConfig(lam=-0.1)
        with pytest.raises(ConfigError):
            ArrivalConfig(lam=0.1, a_max=0)


class TestUpdateQueues:
    def test_served_with_arrivals(self):
        q = QueueState(np.array([5]))
        out = update_queues(q, Schedule.of([0]), np.array([2]))
        assert out.q[0] == 6

    def test_empty_queue_clamped(self):
        q = QueueState(np.array([0]))
        out = update_queues(q, Schedule.of([0]), np.array([0]))
        assert out.q[0] == 0

    def test_idle_link_accumulates(self):
        q = QueueState(np.array([3]))
        out = update_queues(q, Schedule.of(), np.array([1]))
        assert out.q[0] == 4

    @given(
        q=st.integers(0, 10_000),
        served=st.booleans(),
        a=st.integers(0, 50),
    )
    @settings(max_examples=300, deadline=None)
    def test_clamp_formula_and_conservation(self, q, served, a):
        s = Schedule.of([0]) if served else Schedule.of()
        out = update_queues(QueueState(np.array([q])), s, np.array([a]))
        assert out.q[0] == max(0, q - (1 if served else 0)) + a
        assert out.q[0] >= 0
        if q >= 1:
            assert out.q[0] - q == a - (1 if served else 0)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            update_queues(QueueState(np.array([1, 2])), Schedule.of(), np.array([1]))

    def test_no_service_backlog_nondecreasing(self):
        rng = np.random.default_rng(3)
        q = QueueState(np.array([4, 0, 9]))
        prev = total_backlog(q)
        for _ in range(50):
            q = update_queues(q, Schedule.of(), sample_arrivals(ArrivalConfig(0.5), rng, 3))
            assert total_backlog(q) >= prev
            prev = total_backlog(q)


class TestBacklogMetrics:
    def test_total_sum(self):
        q = QueueState(np.full(250, 100))
        assert total_backlog(q) == 25000

    def test_constant_series_zero_slope(self):
        assert backlog_slope([42.0] * 30, 30) == pytest.approx(0.0, abs=1e-12)

    def test_exact_linear_fit(self):
        series = [3 * t for t in range(100)]
        assert backlog_slope(series, 40) == pytest.approx(3.0, rel=1e-9)

    def test_window_floor(self):
        with pytest.raises(ConfigError):
            backlog_slope([1.0, 2.0], 1)


class TestQueueState:
    def test_rejects_negative(self):
        with pytest.raises(ConfigError):
            QueueState(np.array([1, -1]))

    def test_initial_range_and_determinism(self):
        a = initial_queues(np.random.default_rng(5), 200)
        b = initial_queues(np.random.default_rng(5), 200)
        assert (a.q == b.q).all()
        assert a.q.min() >= 100 and a.q.max() <= 300

    def test_frozen_array(self):
        q = initial_queues(np.random.default_rng(6), 10)
        with pytest.raises(ValueError):
            q.q[0] = 5
