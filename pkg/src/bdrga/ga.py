"""Genetic-algorithm feature selection over binary masks, scored by a linear SVM."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import KTooLarge
from .svm import fit_linear_svm


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 20
    crossover_rate: float = 0.2
    mutations_per_offspring: int = 2
    generations: int = 10
    tournament_size: int = 2
    elitism: int = 1
    seed: int = 0
    svm_lambda: float = 0.01
    svm_passes: int = 200
    cv_folds: int = 3

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must lie in [0, 1]")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must lie in [0, population_size)")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")


@dataclass(eq=False)
class Chromosome:
    genes: np.ndarray
    fitness: float | None = None

    def __post_init__(self):
        self.genes = np.asarray(self.genes, dtype=np.uint8)

    def __len__(self):
        return len(self.genes)

    @property
    def key(self):
        return self.genes.tobytes()

    @property
    def n_selected(self):
        return int(self.genes.sum())

    def bits(self) -> str:
        return "".join("1" if g else "0" for g in self.genes)

    @classmethod
    def from_bits(cls, bits: str):
        return cls(np.array([c == "1" for c in bits], dtype=np.uint8))


@dataclass(eq=False)
class EvolveResult:
    best: Chromosome
    best_fitness: list = field(default_factory=list)
    evaluations: int = 0


def decode_mask(ch: Chromosome) -> np.ndarray:
    """Indices of selected features, ascending."""
    return np.flatnonzero(ch.genes)


def init_population(cfg: GaConfig, n_features: int, rng=None) -> list[Chromosome]:
    """Genes drawn independently as 1 with probability 0.5."""
    if n_features < 1:
        raise ValueError("n_features must be >= 1")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    genes = rng.random((cfg.population_size, n_features)) < 0.5
    return [Chromosome(g) for g in genes]


def cv_folds(indices, k, seed):
    perm = np.random.default_rng(seed).permutation(np.asarray(indices, dtype=int))
    return np.array_split(perm, k)


def svm_fitness(ch: Chromosome, ds, train_indices, seed: int = 0, *, lam=0.01,
                passes=200, folds=3) -> float:
    """Mean k-fold accuracy of a linear SVM on the masked training rows.

    An empty mask scores 0. Test rows are never touched.
    """
    cols = decode_mask(ch)
    if cols.size == 0:
        return 0.0
    train_indices = np.asarray(train_indices, dtype=int)
    if train_indices.size == 0:
        raise ValueError("svm_fitness needs training rows")
    X = ds.features[:, cols]
    y = ds.labels
    parts = cv_folds(train_indices, folds, seed)
    scores = []
    for k, held_out in enumerate(parts):
        if held_out.size == 0:
            continue
        fit_rows = np.concatenate([p for j, p in enumerate(parts) if j != k])
        model = fit_linear_svm(X[fit_rows], y[fit_rows], lam, passes, seed + k)
        scores.append(float(np.mean(model.predict(X[held_out]) == y[held_out])))
    return float(np.mean(scores))


def select(population, cfg: GaConfig, rng) -> Chromosome:
    """Tournament selection; ties go to the earliest draw."""
    draws = rng.integers(0, len(population), size=cfg.tournament_size)
    winner = population[draws[0]]
    for i in draws[1:]:
        if population[i].fitness > winner.fitness:
            winner = population[i]
    return winner


def crossover(a: Chromosome, b: Chromosome, rate: float, rng):
    """Single-point crossover with probability ``rate``, else copies."""
    if len(a) != len(b):
        raise ValueError("parents differ in length")
    if len(a) > 1 and rng.random() < rate:
        cut = int(rng.integers(1, len(a)))
        return (Chromosome(np.concatenate([a.genes[:cut], b.genes[cut:]])),
                Chromosome(np.concatenate([b.genes[:cut], a.genes[cut:]])))
    return Chromosome(a.genes.copy()), Chromosome(b.genes.copy())


def mutate(ch: Chromosome, k: int, rng) -> Chromosome:
    """Flip exactly ``k`` distinct, uniformly chosen genes."""
    if k > len(ch) or k < 0:
        raise KTooLarge(f"cannot flip {k} of {len(ch)} genes")
    genes = ch.genes.copy()
    pos = rng.choice(len(genes), size=k, replace=False)
    genes[pos] ^= 1
    return Chromosome(genes)


def evolve(ds, train_indices, cfg: GaConfig) -> EvolveResult:
    """Generational GA with elitism; returns the best mask ever evaluated.

    Fitness is cached per bit pattern, and each SVM uses ``cfg.seed``, so a
    chromosome's fitness does not depend on when or where it was evaluated.
    """
    rng = np.random.default_rng(cfg.seed)
    population = init_population(cfg, ds.n_features, rng)
    cache = {}
    result = EvolveResult(best=None)

    for gen in range(cfg.generations):
        for ch in population:
            if ch.key not in cache:
                cache[ch.key] = svm_fitness(ch, ds, train_indices, cfg.seed,
                                            lam=cfg.svm_lambda, passes=cfg.svm_passes,
                                            folds=cfg.cv_folds)
            ch.fitness = cache[ch.key]

        ranked = sorted(range(len(population)), key=lambda i: -population[i].fitness)
        leader = population[ranked[0]]
        if result.best is None or leader.fitness > result.best.fitness:
            result.best = Chromosome(leader.genes.copy(), leader.fitness)
        result.best_fitness.append(leader.fitness)
        if gen == cfg.generations - 1:
            break

        nxt = [Chromosome(population[i].genes.copy(), population[i].fitness)
               for i in ranked[:cfg.elitism]]
        while len(nxt) < cfg.population_size:
            a = select(population, cfg, rng)
            b = select(population, cfg, rng)
            for child in crossover(a, b, cfg.crossover_rate, rng):
                if len(nxt) < cfg.population_size:
                    nxt.append(mutate(child, cfg.mutations_per_offspring, rng))
        population = nxt

    result.evaluations = len(cache)
    return result
