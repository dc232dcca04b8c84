"""Seeded Monte Carlo sampling of the prepare-and-measure channel.

Draws are generated with the counter-based Philox 4x64 generator so runs are
bit-reproducible across platforms and independent of how trials are split:
sampling proceeds in fixed-size shards whose streams are keyed by
seed XOR shard-index, and counts are merged in shard order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import Ensemble, Povm, require_same_dim
from .retrodiction import predictive_prob

RNG_ALGORITHM = "philox4x64"
SHARD_SIZE = 1 << 16

# Joint probabilities below this are rounding residue of structurally zero
# cells (e.g. the unambiguous-discrimination condition); they are zeroed so
# that impossible outcomes never appear in the counts.
STRUCTURAL_ZERO = 1e-14


@dataclass(frozen=True, eq=False)
class SampleCounts:
    """Joint tallies N[i][j] of (prepared i, outcome j), with provenance."""

    n_total: int
    counts: np.ndarray
    seed: int
    rng_algorithm: str = RNG_ALGORITHM

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).copy()
        if int(counts.sum()) != self.n_total:
            raise ValueError("counts do not sum to n_total")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def column_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def joint_probability_table(ensemble: Ensemble, povm: Povm) -> np.ndarray:
    """Joint distribution p[i, j] = eta_i Tr(Pi_j rho_i), with structural zeros exact."""
    require_same_dim(ensemble.dim, povm.dim, "ensemble vs POVM")
    table = np.empty((len(ensemble), len(povm)))
    for i, (eta, state) in enumerate(zip(ensemble.priors, ensemble.states)):
        for j, element in enumerate(povm.elements):
            table[i, j] = float(eta) * predictive_prob(element, state)
    table[table < STRUCTURAL_ZERO] = 0.0
    return table


def _cumulative_buckets(table: np.ndarray) -> np.ndarray:
    # Extended-precision cumsum; the last bucket absorbs the rounding so that
    # every draw in [0, 1) lands in a bucket.  Capping at 1 keeps the edges
    # sorted even if accumulated roundoff pokes above 1 before the reset.
    cum = np.cumsum(table.reshape(-1).astype(np.longdouble))
    cum = np.minimum(cum.astype(np.float64), 1.0)
    cum[-1] = 1.0
    return cum


def sample(ensemble: Ensemble, povm: Povm, n: int, seed: int) -> SampleCounts:
    """Draw n preparation/outcome pairs; bit-reproducible for fixed inputs and seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    table = joint_probability_table(ensemble, povm)
    cum = _cumulative_buckets(table)
    flat = np.zeros(table.size, dtype=np.int64)
    key_base = int(seed) & 0xFFFFFFFFFFFFFFFF  # 64-bit stream key
    n_shards = (n + SHARD_SIZE - 1) // SHARD_SIZE
    for shard in range(n_shards):
        m = min(SHARD_SIZE, n - shard * SHARD_SIZE)
        rng = np.random.Generator(np.random.Philox(key=key_base ^ shard))
        u = rng.random(m)
        idx = np.searchsorted(cum, u, side="right")
        flat += np.bincount(idx, minlength=table.size)
    return SampleCounts(n, flat.reshape(table.shape), seed)


@dataclass(frozen=True, eq=False)
class StatTable:
    """Empirical estimates against analytic values with 3-sigma binomial bounds.

    Cells whose conditioning event never occurred (and, for conditionals,
    whose condition has zero analytic probability) are marked undefined and
    excluded from the violation count.
    """

    label: str
    empirical: np.ndarray
    analytic: np.ndarray
    bound_3sigma: np.ndarray
    defined: np.ndarray

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.empirical - self.analytic)

    def violations(self) -> list[tuple[int, ...]]:
        """Indices of defined cells whose deviation exceeds the 3-sigma bound."""
        mask = self.defined & (self.deviation > self.bound_3sigma)
        return [tuple(int(k) for k in idx) for idx in np.argwhere(mask)]

    @property
    def all_within(self) -> bool:
        return not self.violations()


def _three_sigma(p: np.ndarray, trials: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        var = p * (1.0 - p) / trials
    return 3.0 * np.sqrt(np.where(trials > 0, var, np.inf))


@dataclass(frozen=True, eq=False)
class EmpiricalReport:
    """Sampled estimates of the outcome, predictive, and retrodictive probabilities."""

    counts: SampleCounts
    outcome: StatTable
    predictive: StatTable
    retrodictive: StatTable

    @property
    def all_within(self) -> bool:
        return self.outcome.all_within and self.predictive.all_within and self.retrodictive.all_within


def empirical_report(counts: SampleCounts, ensemble: Ensemble, povm: Povm) -> EmpiricalReport:
    """Compare empirical frequencies from the counts with the analytic values."""
    table = joint_probability_table(ensemble, povm)
    if counts.counts.shape != table.shape:
        raise ValueError(
            f"counts shape {counts.counts.shape} does not match instance shape {table.shape}"
        )
    n = counts.n_total
    joint = counts.counts.astype(np.float64)
    rows = counts.row_totals.astype(np.float64)
    cols = counts.column_totals.astype(np.float64)

    mu = table.sum(axis=0)
    mu_hat = cols / n
    outcome = StatTable(
        "outcome",
        mu_hat,
        mu,
        _three_sigma(mu, np.full_like(mu, float(n))),
        np.ones_like(mu, dtype=bool),
    )

    eta = np.asarray(ensemble.priors)
    with np.errstate(divide="ignore", invalid="ignore"):
        predictive_analytic = np.where(eta[:, None] > 0, table / eta[:, None], 0.0)
        predictive_hat = np.where(rows[:, None] > 0, joint / rows[:, None], 0.0)
    predictive = StatTable(
        "predictive",
        predictive_hat,
        predictive_analytic,
        _three_sigma(predictive_analytic, np.broadcast_to(rows[:, None], table.shape)),
        np.broadcast_to(rows[:, None] > 0, table.shape).copy(),
    )

    with np.errstate(divide="ignore", invalid="ignore"):
        retro_analytic = np.where(mu[None, :] > 0, table / mu[None, :], 0.0)
        retro_hat = np.where(cols[None, :] > 0, joint / cols[None, :], 0.0)
    retro_defined = np.broadcast_to((cols[None, :] > 0) & (mu[None, :] > 0), table.shape).copy()
    retrodictive = StatTable(
        "retrodictive",
        retro_hat,
        retro_analytic,
        _three_sigma(retro_analytic, np.broadcast_to(cols[None, :], table.shape)),
        retro_defined,
    )
    return EmpiricalReport(counts, outcome, predictive, retrodictive)
