import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmoqpso.archive import ParetoArchive, crowding_distance
from rmoqpso.benchmarks import flight_model, pendulum_model
from rmoqpso.control import WeightingConfig, lqr, stability_check
from rmoqpso.errors import DimensionMismatch, InfeasibleCandidate, MixedBenchmarks
from rmoqpso.objectives import (
    DwaSchedule,
    Evaluator,
    ObjectiveVector,
    aggregate_fitness,
    decode_and_evaluate,
    dominance_matrix,
    dominates,
    domination_reward,
    domination_rewards,
    dwa_weights,
    is_feasible,
    penalty_reward_factor,
    repair_probability,
    scalarized_fitness,
    swarm_fitness,
)


def ov(*vals, kind="ess", feasible=True):
    vals = list(vals) + [vals[-1]] * (5 - len(vals))
    return ObjectiveVector(*vals, tail_kind=kind, feasible=feasible)


def brute_dominates(a, b):
    better = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            better = True
    return better


def brute_front(vectors):
    return [v for v in vectors if not any(brute_dominates(w, v) for w in vectors)]


# ---------------------------------------------------------------- evaluation pipeline


def test_pendulum_unit_weights():
    b = pendulum_model()
    obj = decode_and_evaluate(np.ones(5), b)
    assert obj.feasible and obj.finite and obj.repair_prob == 1.0
    assert obj.tail_kind == "ess"
    _, gain = lqr(b.model, WeightingConfig(np.ones(4), [1.0]))
    assert stability_check(b.model, gain) < 0


def test_flight_tail_is_iae():
    obj = decode_and_evaluate(np.ones(9), flight_model())
    assert obj.tail_kind == "iae" and obj.finite


def test_negative_r_is_infeasible_but_measured():
    pos = np.array([1.0, 1.0, 1.0, 1.0, -3.0])
    obj = decode_and_evaluate(pos, pendulum_model())
    assert not obj.feasible
    assert obj.repair_prob == pytest.approx(0.8)
    # a negative Q entry is measured at 0, which still gives a stable design
    obj = decode_and_evaluate(np.array([-1.0, 1.0, 1.0, 1.0, 1.0]), pendulum_model())
    assert not obj.feasible and obj.finite
    assert obj.values().tolist() == decode_and_evaluate(np.array([0.0, 1, 1, 1, 1]), pendulum_model()).values().tolist()


def test_position_length_checked():
    with pytest.raises(DimensionMismatch):
        decode_and_evaluate(np.ones(4), pendulum_model())


def test_evaluator_memoizes():
    ev = Evaluator(pendulum_model())
    a = ev(np.ones(5))
    b = ev(np.ones(5))
    assert a is b and ev.calls == 1


def test_feasibility_boundary():
    assert is_feasible([0.0, 0.0, 1e-9], 2).all()
    assert list(is_feasible([-1e-12, 0.0, 5e-10], 2)) == [False, True, False]
    assert repair_probability([1, 1, 1, 1], 2) == 1.0
    assert repair_probability([-1, -1, 0, 0], 2) == 0.0
    assert repair_probability([-1, 1, 0, 1], 2) == 0.5


# ---------------------------------------------------------------- dominance


def test_dominance_examples():
    assert dominates(ov(1), ov(2))
    assert not dominates(ov(1), ov(1))
    a, b = ov(1, 3, 1, 1, 1), ov(2, 2, 1, 1, 1)
    assert not dominates(a, b) and not dominates(b, a)
    with pytest.raises(MixedBenchmarks):
        dominates(ov(1), ov(2, kind="iae"))


def test_dominance_partial_order_on_random_triples():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        vals = rng.integers(0, 3, size=(3, 5)).astype(float)
        a, b, c = (ov(*v) for v in vals)
        assert not dominates(a, a)
        assert not (dominates(a, b) and dominates(b, a))
        if dominates(a, b) and dominates(b, c):
            assert dominates(a, c)


def test_dominance_matrix_matches_brute_force():
    rng = np.random.default_rng(1)
    V = rng.integers(0, 4, size=(30, 5)).astype(float)
    D = dominance_matrix(V)
    for i in range(30):
        for j in range(30):
            assert D[i, j] == brute_dominates(V[i], V[j])


def test_reward_examples():
    swarm = [ov(1, 1, 0, 0, 0), ov(2, 2, 0, 0, 0), ov(3, 0, 0, 0, 0)]
    assert list(domination_rewards(swarm)) == [1, -1, 0]
    assert domination_reward(0, swarm) == 1
    assert list(domination_rewards([ov(1)] * 4)) == [0] * 4
    best = [ov(0)] + [ov(1 + k) for k in range(5)]
    assert domination_reward(0, best) == 5


def test_rewards_sum_to_zero():
    rng = np.random.default_rng(2)
    for _ in range(100):
        size = int(rng.integers(2, 30))
        swarm = [ov(*v) for v in rng.integers(0, 4, size=(size, 5)).astype(float)]
        assert domination_rewards(swarm).sum() == 0


# ---------------------------------------------------------------- factors and weights


def test_penalty_reward_examples():
    assert penalty_reward_factor(0, 20, True) == 0.5
    assert penalty_reward_factor(20, 20, True) == pytest.approx(0.0, abs=1e-150)
    assert penalty_reward_factor(0, 20, False, phi=10) == 5.0
    assert penalty_reward_factor(1, 20, True, 0.5, "literal", 10) == pytest.approx(5 / (1 + math.exp(-20)))
    assert penalty_reward_factor(-3, 20, False, 0.5, "penalty-only", 10) == 10.0
    assert penalty_reward_factor(-1000, 20, True) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        penalty_reward_factor(0, 20, True, mode="nope")


def test_dwa_examples():
    assert dwa_weights(0, 50) == (0.0, 1.0)
    w1, w2 = dwa_weights(12.5, 50)
    assert w1 == pytest.approx(1.0) and w2 == pytest.approx(0.0)
    with pytest.raises(ValueError):
        DwaSchedule(0)


@given(st.floats(0, 1e4), st.integers(1, 500))
def test_dwa_sum_and_period(t, F):
    w1, w2 = dwa_weights(t, F)
    assert 0 <= w1 <= 1 and 0 <= w2 <= 1 and w1 + w2 == pytest.approx(1.0)
    assert dwa_weights(t + F, F)[0] == pytest.approx(w1, abs=1e-9)


def test_aggregate_examples():
    assert aggregate_fitness(ov(1000, 0, 0, 0, 0), 1, 0) == pytest.approx(3.0)
    obj = ObjectiveVector(1.0, 0.5, 0.4, 2.0, 0.0)
    assert aggregate_fitness(obj, 0, 1, 1, rise_sign=-1) == pytest.approx(2.1)
    assert aggregate_fitness(obj, 0, 1, 1, rise_sign=1) == pytest.approx(2.9)
    assert aggregate_fitness(ObjectiveVector.sentinel(), 0.5, 0.5) == math.inf
    # J below 1 is floored so the log term never goes negative
    assert aggregate_fitness(ov(0.01, 0, 0, 0, 0), 1, 0) == 0.0


def test_scalarized_penalizes_infeasible():
    obj = ObjectiveVector(10.0, 0.0, 0.0, 0.0, 0.0, feasible=False)
    assert scalarized_fitness(obj, phi=10) == pytest.approx(10 * 0.5 * 1.0)


@settings(max_examples=60)
@given(
    st.lists(st.floats(0, 1e6), min_size=5, max_size=5),
    st.integers(0, 4),
    st.floats(0, 10),
    st.floats(0.01, 1),
    st.floats(0.01, 10),
)
def test_aggregate_monotone(vals, k, bump, w1, f_pr):
    a = ObjectiveVector(*vals)
    vals2 = list(vals)
    vals2[k] += bump
    b = ObjectiveVector(*vals2)
    assert aggregate_fitness(b, w1, 1 - w1, f_pr) >= aggregate_fitness(a, w1, 1 - w1, f_pr)


def test_swarm_fitness_prefers_dominant():
    swarm = [ov(10, 1, 1, 1, 0), ov(20, 2, 2, 2, 0), ov(5, 3, 3, 3, 0)]
    fit = swarm_fitness(swarm, 0.5, 0.5)
    assert fit[0] < fit[1]


# ---------------------------------------------------------------- archive


def test_archive_basics():
    arc = ParetoArchive()
    assert arc.insert([1.0], ov(1))
    assert len(arc) == 1
    assert not arc.insert([2.0], ov(2))
    assert not arc.insert([3.0], ov(1))
    assert arc.insert([4.0], ov(0.5)) and len(arc) == 1
    with pytest.raises(InfeasibleCandidate):
        arc.insert([1.0], ov(0, feasible=False))
    with pytest.raises(MixedBenchmarks):
        arc.insert([1.0], ov(0.1, kind="iae"))


def test_archive_equals_brute_force_filter():
    rng = np.random.default_rng(4)
    stream = rng.random((500, 5)) ** 3
    stream[:, 2] = rng.integers(0, 3, 500)  # ties exercise the weak inequalities
    arc = ParetoArchive(capacity=500)
    for k, v in enumerate(stream):
        arc.insert([float(k)], ov(*v))
        assert arc.check()
    got = sorted(tuple(e.objective.values()) for e in arc)
    uniq = list({tuple(v) for v in stream})
    assert got == sorted(brute_front(uniq))


def test_archive_capacity_eviction():
    arc = ParetoArchive(capacity=10)
    for k in range(50):
        x = k / 49
        arc.insert([x], ov(x, 1 - x, 0, 0, 0))
    assert len(arc) == 10 and arc.check()
    J = sorted(e.objective.J for e in arc)
    assert J[0] == 0.0 and J[-1] == 1.0  # extremes always survive


def test_crowding_distance():
    d = crowding_distance(np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]))
    assert math.isinf(d[0]) and math.isinf(d[2]) and d[1] == pytest.approx(2.0)
    assert np.all(np.isinf(crowding_distance(np.zeros((2, 3)))))


def test_archive_csv():
    arc = ParetoArchive()
    text = arc.to_csv(4, 1, "Ess", ["seed=3"])
    assert text.splitlines() == ["# seed=3", "Q1,Q2,Q3,Q4,R1,J,OS,Tr,Ts,Ess"]
    arc.insert([1, 2, 3, 4, 5], ObjectiveVector(1.5, 0.1, 0.2, 0.3, 0.0))
    row = arc.to_csv(4, 1).splitlines()[-1].split(",")
    assert len(row) == 10 and float(row[5]) == 1.5
