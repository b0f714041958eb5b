"""Bi-objective evolutionary engine: NSGA-II and MOEA/D over a problem
abstraction, with Latin hypercube / random-bit initialization, SBX,
polynomial mutation, uniform crossover, and bit-flip mutation.

Randomness is organized as independent per-(generation, slot) streams
derived from one master seed, so results are bit-reproducible regardless
of how many worker threads evaluate fitness.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ContractViolationError, InvalidSpecError, ShapeError
from .fronts import FrontSolution, ParetoFront
from .pareto import pareto_indices

Objectives = tuple[float, float]

# stage codes for derived rng streams
_INIT, _SELECT, _VARY, _MOEAD = 0, 1, 2, 3


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, *key); identical keys, identical draws."""
    parts = [seed & 0xFFFFFFFFFFFFFFFF, *key]
    return np.random.default_rng(np.random.SeedSequence(parts))


@dataclass
class EAConfig:
    population: int = 50
    generations: int = 50
    crossover_prob: float = 0.9
    mutation_prob: float = 0.2
    sbx_eta: float = 15.0
    poly_eta: float = 20.0
    moead_neighbors: int = 15
    moead_mating_prob: float = 0.9
    moead_binary_proxy: bool = False
    seed: int = 0

    def validate(self) -> None:
        if self.population < 4 or self.population % 2 != 0:
            raise InvalidSpecError(f"population must be even and >= 4, got {self.population}")
        if self.generations < 0:
            raise InvalidSpecError(f"generations must be >= 0, got {self.generations}")
        for name in ("crossover_prob", "mutation_prob", "moead_mating_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidSpecError(f"{name} must be in [0, 1], got {p}")
        if self.moead_neighbors < 1:
            raise InvalidSpecError("moead_neighbors must be >= 1")


@dataclass
class Problem:
    """What the engines need to know about an optimization problem.

    evaluate maps a genome (float64 vector for continuous problems, uint8
    bit vector for binary ones) to the minimized objective pair; it must
    be pure and deterministic. initializer, when given, produces the whole
    starting population. bit_flip_bias optionally reweights per-bit
    mutation rates for binary problems.
    """

    kind: str  # "continuous" | "binary"
    length: int
    evaluate: Callable[[np.ndarray], Objectives]
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    initializer: Optional[Callable[[int, np.random.Generator], list[np.ndarray]]] = None
    bit_flip_bias: Optional[np.ndarray] = None
    name: str = "problem"

    def validate(self) -> None:
        if self.kind not in ("continuous", "binary"):
            raise InvalidSpecError(f"unknown genome kind {self.kind!r}")
        if self.length < 1:
            raise InvalidSpecError("genome length must be >= 1")
        if self.kind == "continuous":
            if self.lower is None or self.upper is None:
                raise InvalidSpecError("continuous problems need lower/upper bounds")
            if np.any(self.lower > self.upper):
                raise InvalidSpecError("lower bound exceeds upper bound")


@dataclass
class Individual:
    genome: np.ndarray
    f1: Optional[float] = None
    f2: Optional[float] = None
    rank: int = -1
    crowding: float = 0.0
    birth_gen: int = 0

    @property
    def objectives(self) -> Objectives:
        return (self.f1, self.f2)


@dataclass
class TraceRow:
    generation: int
    best_f1: float
    best_f2: float
    front: list[Objectives] = field(default_factory=list)


# ---------------------------------------------------------------------------
# sampling and variation operators


def lhs_sample(n: int, lower: np.ndarray, upper: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Latin hypercube sample: per dimension, one point in each of n strata."""
    if n < 1:
        raise InvalidSpecError("lhs_sample needs n >= 1")
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    d = len(lower)
    out = np.empty((n, d))
    for j in range(d):
        pts = (np.arange(n) + rng.random(n)) / n
        out[:, j] = lower[j] + rng.permutation(pts) * (upper[j] - lower[j])
    return out


def sbx_crossover(
    p1: np.ndarray,
    p2: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    eta: float,
    prob: float,
    rng,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover; children are clipped to the bounds."""
    c1, c2 = p1.copy(), p2.copy()
    if rng.random() >= prob:
        return c1, c2
    for i in range(len(c1)):
        if rng.random() > 0.5:
            continue
        u = rng.random()
        if u <= 0.5:
            beta = (2.0 * u) ** (1.0 / (eta + 1.0))
        else:
            beta = (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0))
        x1, x2 = c1[i], c2[i]
        c1[i] = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2)
        c2[i] = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2)
    np.clip(c1, lower, upper, out=c1)
    np.clip(c2, lower, upper, out=c2)
    return c1, c2


def polynomial_mutation(
    g: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    eta: float,
    prob: float,
    rng,
) -> np.ndarray:
    """Deb's bounded polynomial mutation, applied per gene with probability prob."""
    out = g.copy()
    for i in range(len(out)):
        if rng.random() >= prob:
            continue
        lo = lower[i] if np.ndim(lower) else float(lower)
        hi = upper[i] if np.ndim(upper) else float(upper)
        span = hi - lo
        if span <= 0:
            continue
        x = out[i]
        u = rng.random()
        mut_pow = 1.0 / (eta + 1.0)
        if u < 0.5:
            d1 = (x - lo) / span
            val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
            dq = val**mut_pow - 1.0
        else:
            d2 = (hi - x) / span
            val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
            dq = 1.0 - val**mut_pow
        out[i] = min(max(x + dq * span, lo), hi)
    return out


def uniform_crossover(
    p1: np.ndarray, p2: np.ndarray, prob: float, rng
) -> tuple[np.ndarray, np.ndarray]:
    """Swap each bit between the children with chance 0.5; multisets per
    position are conserved by construction."""
    if len(p1) != len(p2):
        raise ShapeError(f"parent lengths differ: {len(p1)} vs {len(p2)}")
    c1, c2 = p1.copy(), p2.copy()
    if rng.random() < prob:
        swap = rng.random(len(c1)) < 0.5
        c1[swap] = p2[swap]
        c2[swap] = p1[swap]
    return c1, c2


def bitflip_mutation(
    g: np.ndarray, prob: float, rng, bias: Optional[np.ndarray] = None
) -> np.ndarray:
    """Flip each bit independently with probability prob (optionally
    reweighted per bit by bias, which is normalized to mean 1)."""
    out = g.copy()
    if bias is None:
        flip = rng.random(len(out)) < prob
    else:
        mean = bias.mean()
        scaled = bias / mean if mean > 0 else np.zeros_like(bias)
        flip = rng.random(len(out)) < np.clip(prob * scaled, 0.0, 1.0)
    out[flip] ^= 1
    return out


# ---------------------------------------------------------------------------
# ranking


def fast_nondominated_sort(objectives: Sequence[Optional[Objectives]]) -> list[list[int]]:
    """Partition indices into fronts; front 0 is exactly the non-dominated set.

    Dominance matrix by broadcasting, then iterative peeling of the
    zero-domination-count layer.
    """
    for i, obj in enumerate(objectives):
        if obj is None or obj[0] is None or obj[1] is None:
            raise ContractViolationError(f"individual {i} has no evaluated objectives")
    f = np.asarray(objectives, dtype=np.float64).reshape(len(objectives), 2)
    le = (f[:, None, :] <= f[None, :, :]).all(axis=2)
    lt = (f[:, None, :] < f[None, :, :]).any(axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    n_dominating = dom.sum(axis=0).astype(np.int64)
    fronts: list[list[int]] = []
    assigned = np.zeros(len(f), dtype=bool)
    while not assigned.all():
        current = np.flatnonzero((n_dominating == 0) & ~assigned)
        fronts.append(current.tolist())
        assigned[current] = True
        n_dominating -= dom[current].sum(axis=0)
    return fronts


def crowding_distance(front_objectives: Sequence[Objectives]) -> np.ndarray:
    """Crowding distances for one front: boundary points per objective get
    +inf, interior points sum neighbor gaps over the objective range, and
    a zero-range objective contributes nothing."""
    n = len(front_objectives)
    if n == 0:
        raise InvalidSpecError("crowding_distance needs a non-empty front")
    f = np.asarray(front_objectives, dtype=np.float64).reshape(n, 2)
    dist = np.zeros(n)
    for m in range(2):
        order = np.argsort(f[:, m], kind="stable")
        span = f[order[-1], m] - f[order[0], m]
        if span <= 0:
            continue
        dist[order[0]] = dist[order[-1]] = np.inf
        for k in range(1, n - 1):
            dist[order[k]] += (f[order[k + 1], m] - f[order[k - 1], m]) / span
    return dist


# ---------------------------------------------------------------------------
# shared engine plumbing


def _evaluate_genomes(
    problem: Problem, genomes: list[np.ndarray], jobs: int
) -> list[Objectives]:
    if jobs > 1 and len(genomes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(problem.evaluate, genomes))
    return [problem.evaluate(g) for g in genomes]


def _initial_genomes(problem: Problem, n: int, rng: np.random.Generator) -> list[np.ndarray]:
    if problem.initializer is not None:
        genomes = problem.initializer(n, rng)
        if len(genomes) != n:
            raise ContractViolationError(
                f"initializer produced {len(genomes)} genomes, expected {n}"
            )
        return [np.asarray(g) for g in genomes]
    if problem.kind == "continuous":
        return list(lhs_sample(n, problem.lower, problem.upper, rng))
    return [rng.integers(0, 2, size=problem.length).astype(np.uint8) for _ in range(n)]


def _variate(
    problem: Problem, g1: np.ndarray, g2: np.ndarray, cfg: EAConfig, rng
) -> tuple[np.ndarray, np.ndarray]:
    if problem.kind == "continuous":
        c1, c2 = sbx_crossover(
            g1, g2, problem.lower, problem.upper, cfg.sbx_eta, cfg.crossover_prob, rng
        )
        c1 = polynomial_mutation(
            c1, problem.lower, problem.upper, cfg.poly_eta, cfg.mutation_prob, rng
        )
        c2 = polynomial_mutation(
            c2, problem.lower, problem.upper, cfg.poly_eta, cfg.mutation_prob, rng
        )
    else:
        c1, c2 = uniform_crossover(g1, g2, cfg.crossover_prob, rng)
        c1 = bitflip_mutation(c1, cfg.mutation_prob, rng, problem.bit_flip_bias)
        c2 = bitflip_mutation(c2, cfg.mutation_prob, rng, problem.bit_flip_bias)
    return c1, c2


def _assign_ranks(pop: list[Individual]) -> None:
    fronts = fast_nondominated_sort([ind.objectives for ind in pop])
    for rank, front in enumerate(fronts):
        crowd = crowding_distance([pop[i].objectives for i in front])
        for pos, i in enumerate(front):
            pop[i].rank = rank
            pop[i].crowding = float(crowd[pos])


def _tournament(pop: list[Individual], rng) -> Individual:
    i = int(rng.integers(len(pop)))
    j = int(rng.integers(len(pop)))
    a, b = pop[i], pop[j]
    key_a, key_b = (a.rank, -a.crowding), (b.rank, -b.crowding)
    if key_a < key_b:
        return a
    if key_b < key_a:
        return b
    return a if rng.random() < 0.5 else b


def _environmental_select(pop: list[Individual], mu: int) -> list[Individual]:
    fronts = fast_nondominated_sort([ind.objectives for ind in pop])
    survivors: list[Individual] = []
    for front in fronts:
        if len(survivors) + len(front) <= mu:
            survivors.extend(pop[i] for i in front)
            continue
        crowd = crowding_distance([pop[i].objectives for i in front])
        order = sorted(range(len(front)), key=lambda k: (-crowd[k], front[k]))
        survivors.extend(pop[front[k]] for k in order[: mu - len(survivors)])
        break
    return survivors


def _front_of(pop: list[Individual], seed: int, phase: str) -> ParetoFront:
    objs = [ind.objectives for ind in pop]
    keep = pareto_indices(objs)
    solutions = [
        FrontSolution(
            genome=pop[i].genome.copy(),
            f1=float(pop[i].f1),
            f2=float(pop[i].f2),
            phase=phase,
            generation=pop[i].birth_gen,
        )
        for i in keep
    ]
    return ParetoFront(solutions, seed=seed, phase=phase)


def _trace_front(pop_objs: list[Objectives]) -> list[Objectives]:
    return [pop_objs[i] for i in pareto_indices(pop_objs)]


# ---------------------------------------------------------------------------
# NSGA-II


def nsga2_run(
    problem: Problem,
    cfg: EAConfig,
    jobs: int = 1,
    trace: Optional[list[TraceRow]] = None,
) -> ParetoFront:
    """Elitist (mu+lambda) NSGA-II; returns the deduplicated final front."""
    cfg.validate()
    problem.validate()
    genomes = _initial_genomes(problem, cfg.population, stream(cfg.seed, _INIT, 0))
    objs = _evaluate_genomes(problem, genomes, jobs)
    pop = [Individual(g, f1=o[0], f2=o[1], birth_gen=0) for g, o in zip(genomes, objs)]

    def record(gen: int) -> None:
        if trace is None:
            return
        pop_objs = [ind.objectives for ind in pop]
        trace.append(
            TraceRow(
                generation=gen,
                best_f1=min(o[0] for o in pop_objs),
                best_f2=min(o[1] for o in pop_objs),
                front=_trace_front(pop_objs),
            )
        )

    record(0)
    for gen in range(1, cfg.generations + 1):
        _assign_ranks(pop)
        sel_rng = stream(cfg.seed, gen, _SELECT)
        offspring_genomes: list[np.ndarray] = []
        for k in range(cfg.population // 2):
            var_rng = stream(cfg.seed, gen, _VARY, k)
            p1 = _tournament(pop, sel_rng)
            p2 = _tournament(pop, sel_rng)
            offspring_genomes.extend(_variate(problem, p1.genome, p2.genome, cfg, var_rng))
        child_objs = _evaluate_genomes(problem, offspring_genomes, jobs)
        children = [
            Individual(g, f1=o[0], f2=o[1], birth_gen=gen)
            for g, o in zip(offspring_genomes, child_objs)
        ]
        pop = _environmental_select(pop + children, cfg.population)
        record(gen)
    return _front_of(pop, cfg.seed, problem.name)


# ---------------------------------------------------------------------------
# MOEA/D


def weight_vectors(n: int) -> np.ndarray:
    """n uniformly spaced weight pairs on the 2-simplex."""
    if n == 1:
        return np.array([[0.5, 0.5]])
    k = np.arange(n) / (n - 1)
    return np.column_stack([k, 1.0 - k])


def tchebycheff(lam: np.ndarray, f: Objectives, z: np.ndarray) -> float:
    """max_i lam_i * |f_i - z_i| against the ideal point z."""
    return float(max(lam[0] * abs(f[0] - z[0]), lam[1] * abs(f[1] - z[1])))


def moead_run(
    problem: Problem,
    cfg: EAConfig,
    jobs: int = 1,
    trace: Optional[list[TraceRow]] = None,
) -> ParetoFront:
    """Tchebycheff-decomposition MOEA/D with an external non-dominated archive.

    Binary problems evolve bits directly unless cfg.moead_binary_proxy is
    set, in which case real proxy genes in [0, 1] are thresholded at 0.5
    into bits just before each evaluation.
    """
    cfg.validate()
    problem.validate()
    if cfg.moead_neighbors > cfg.population:
        raise InvalidSpecError(
            f"moead_neighbors={cfg.moead_neighbors} exceeds population={cfg.population}"
        )
    n = cfg.population
    lam = weight_vectors(n)
    dists = np.sqrt(((lam[:, None, :] - lam[None, :, :]) ** 2).sum(axis=2))
    neigh = [np.argsort(dists[i], kind="stable")[: cfg.moead_neighbors] for i in range(n)]

    proxy = problem.kind == "binary" and cfg.moead_binary_proxy
    init_rng = stream(cfg.seed, _INIT, 1)
    genomes = _initial_genomes(problem, n, init_rng)
    if proxy:
        # map bit b into its half of [0, 1] so thresholding recovers it
        genomes = [(g + init_rng.random(len(g))) / 2.0 for g in genomes]
    proxy_lower = np.zeros(problem.length)
    proxy_upper = np.ones(problem.length)

    def decode(genome: np.ndarray) -> np.ndarray:
        if proxy:
            return (genome >= 0.5).astype(np.uint8)
        return genome

    objs = _evaluate_genomes(problem, [decode(g) for g in genomes], jobs)
    z = np.array([min(o[0] for o in objs), min(o[1] for o in objs)])
    archive = [
        FrontSolution(decode(g).copy(), float(o[0]), float(o[1]), problem.name, 0)
        for g, o in zip(genomes, objs)
    ]
    archive = [archive[i] for i in pareto_indices([s.objectives for s in archive])]

    def record(gen: int) -> None:
        if trace is None:
            return
        trace.append(
            TraceRow(
                generation=gen,
                best_f1=float(z[0]),
                best_f2=float(z[1]),
                front=[s.objectives for s in archive],
            )
        )

    record(0)
    for gen in range(1, cfg.generations + 1):
        for i in range(n):
            rng = stream(cfg.seed, gen, _MOEAD, i)
            pool = neigh[i] if rng.random() < cfg.moead_mating_prob else np.arange(n)
            a = int(pool[rng.integers(len(pool))])
            b = int(pool[rng.integers(len(pool))])
            if proxy:
                c1, _ = sbx_crossover(
                    genomes[a], genomes[b], proxy_lower, proxy_upper,
                    cfg.sbx_eta, cfg.crossover_prob, rng,
                )
                child = polynomial_mutation(
                    c1, proxy_lower, proxy_upper, cfg.poly_eta, cfg.mutation_prob, rng
                )
            else:
                c1, _ = _variate_first(problem, genomes[a], genomes[b], cfg, rng)
                child = c1
            f = problem.evaluate(decode(child))
            z[0] = min(z[0], f[0])
            z[1] = min(z[1], f[1])
            for j in neigh[i]:
                if tchebycheff(lam[j], f, z) <= tchebycheff(lam[j], objs[j], z):
                    genomes[j] = child
                    objs[j] = f
            archive.append(FrontSolution(decode(child).copy(), float(f[0]), float(f[1]), problem.name, gen))
        archive = [archive[i] for i in pareto_indices([s.objectives for s in archive])]
        record(gen)

    final = archive + [
        FrontSolution(decode(g).copy(), float(o[0]), float(o[1]), problem.name, cfg.generations)
        for g, o in zip(genomes, objs)
    ]
    keep = pareto_indices([s.objectives for s in final])
    return ParetoFront([final[i] for i in keep], seed=cfg.seed, phase=problem.name)


def _variate_first(
    problem: Problem, g1: np.ndarray, g2: np.ndarray, cfg: EAConfig, rng
) -> tuple[np.ndarray, np.ndarray]:
    if problem.kind == "continuous":
        c1, c2 = sbx_crossover(
            g1, g2, problem.lower, problem.upper, cfg.sbx_eta, cfg.crossover_prob, rng
        )
        c1 = polynomial_mutation(
            c1, problem.lower, problem.upper, cfg.poly_eta, cfg.mutation_prob, rng
        )
    else:
        c1, c2 = uniform_crossover(g1, g2, cfg.crossover_prob, rng)
        c1 = bitflip_mutation(c1, cfg.mutation_prob, rng, problem.bit_flip_bias)
    return c1, c2
