import numpy as np
import pytest

from evoprune.errors import InvalidSpecError
from evoprune.moea import EAConfig, Problem, TraceRow, moead_run, nsga2_run
from evoprune.pareto import dominates


def toy_problem():
    """minimize (x^2, (x-2)^2) on [-4, 4]; the Pareto set is x in [0, 2]."""

    def evaluate(g):
        x = float(g[0])
        return (x * x, (x - 2.0) ** 2)

    return Problem(
        kind="continuous",
        length=1,
        evaluate=evaluate,
        lower=np.array([-4.0]),
        upper=np.array([4.0]),
        name="toy",
    )


def target_bits_problem(n=24, seed=0):
    """Binary toy: minimize (popcount, mismatches against a fixed target)."""
    target = (np.random.default_rng(seed).random(n) < 0.5).astype(np.uint8)

    def evaluate(bits):
        return (float(bits.sum()), float(np.sum(bits != target)) / n)

    return Problem(kind="binary", length=n, evaluate=evaluate, name="bits")


def test_nsga2_converges_to_analytic_pareto_set():
    front = nsga2_run(toy_problem(), EAConfig(population=50, generations=30, seed=4))
    xs = np.array([s.genome[0] for s in front.solutions])
    assert np.all(xs >= -0.05) and np.all(xs <= 2.05)
    assert len(front) > 5


def test_nsga2_zero_generations_returns_initial_front():
    front = nsga2_run(toy_problem(), EAConfig(population=20, generations=0, seed=1))
    assert all(s.generation == 0 for s in front.solutions)
    assert 1 <= len(front) <= 20


def test_nsga2_deterministic():
    cfg = EAConfig(population=20, generations=10, seed=9)
    a = nsga2_run(toy_problem(), cfg)
    b = nsga2_run(toy_problem(), cfg)
    assert [s.objectives for s in a.solutions] == [s.objectives for s in b.solutions]


def test_nsga2_jobs_do_not_change_results():
    cfg = EAConfig(population=20, generations=8, seed=3)
    a = nsga2_run(toy_problem(), cfg, jobs=1)
    b = nsga2_run(toy_problem(), cfg, jobs=3)
    assert [s.objectives for s in a.solutions] == [s.objectives for s in b.solutions]


def test_nsga2_front_has_no_duplicate_objectives():
    front = nsga2_run(toy_problem(), EAConfig(population=30, generations=10, seed=2))
    objs = [s.objectives for s in front.solutions]
    assert len(objs) == len(set(objs))


def test_nsga2_elitist_across_generations():
    trace: list[TraceRow] = []
    nsga2_run(toy_problem(), EAConfig(population=20, generations=15, seed=11), trace=trace)
    for prev, cur in zip(trace, trace[1:]):
        for p in cur.front:
            assert not any(dominates(q, p) for q in prev.front)


def test_nsga2_trace_best_objectives_monotone():
    trace: list[TraceRow] = []
    nsga2_run(toy_problem(), EAConfig(population=20, generations=15, seed=11), trace=trace)
    f1s = [r.best_f1 for r in trace]
    f2s = [r.best_f2 for r in trace]
    assert all(a >= b for a, b in zip(f1s, f1s[1:]))
    assert all(a >= b for a, b in zip(f2s, f2s[1:]))


def test_nsga2_binary_problem_runs():
    front = nsga2_run(target_bits_problem(), EAConfig(population=16, generations=12, seed=5,
                                                      mutation_prob=0.05))
    assert len(front) >= 1
    # the all-zeros corner is always attainable
    assert min(s.f1 for s in front.solutions) == 0.0


def test_population_validation():
    with pytest.raises(InvalidSpecError):
        nsga2_run(toy_problem(), EAConfig(population=5, generations=1, seed=0))
    with pytest.raises(InvalidSpecError):
        nsga2_run(toy_problem(), EAConfig(population=20, generations=1, crossover_prob=1.5))


def test_moead_converges_and_archive_in_pareto_range():
    front = moead_run(toy_problem(), EAConfig(population=50, generations=30, seed=4))
    xs = np.array([s.genome[0] for s in front.solutions])
    assert np.all(xs >= -0.05) and np.all(xs <= 2.05)


def test_moead_ideal_point_componentwise_non_increasing():
    trace: list[TraceRow] = []
    moead_run(toy_problem(), EAConfig(population=20, generations=15, seed=6), trace=trace)
    z1 = [r.best_f1 for r in trace]
    z2 = [r.best_f2 for r in trace]
    assert all(a >= b for a, b in zip(z1, z1[1:]))
    assert all(a >= b for a, b in zip(z2, z2[1:]))


def test_moead_deterministic():
    cfg = EAConfig(population=20, generations=8, seed=12)
    a = moead_run(toy_problem(), cfg)
    b = moead_run(toy_problem(), cfg)
    assert [s.objectives for s in a.solutions] == [s.objectives for s in b.solutions]


def test_moead_neighbors_exceeding_population_rejected():
    with pytest.raises(InvalidSpecError):
        moead_run(toy_problem(), EAConfig(population=10, generations=1, moead_neighbors=11))


def test_engines_agree_on_analytic_pareto_set():
    # both engines approximate the analytic set [0, 2]; the dense moead
    # archive additionally covers every nsga2 front point within 0.05
    cfg = EAConfig(population=50, generations=50, seed=0)
    xs_n = np.sort([s.genome[0] for s in nsga2_run(toy_problem(), cfg).solutions])
    xs_m = np.sort([s.genome[0] for s in moead_run(toy_problem(), cfg).solutions])
    for xs in (xs_n, xs_m):
        assert np.all(xs >= -0.05) and np.all(xs <= 2.05)
    coverage = max(np.min(np.abs(xs_m - a)) for a in xs_n)
    assert coverage <= 0.05


def test_moead_binary_direct_and_proxy_modes():
    for proxy in (False, True):
        cfg = EAConfig(
            population=16, generations=10, seed=7, mutation_prob=0.05,
            moead_neighbors=5, moead_binary_proxy=proxy,
        )
        front = moead_run(target_bits_problem(), cfg)
        assert len(front) >= 1
        for sol in front.solutions:
            assert sol.genome.dtype == np.uint8
            assert set(np.unique(sol.genome)) <= {0, 1}
            # stored objectives reproduce from the stored genome
            f1, f2 = target_bits_problem().evaluate(sol.genome)
            assert (f1, f2) == sol.objectives
