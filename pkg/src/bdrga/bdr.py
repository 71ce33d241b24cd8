"""Bimodal distribution removal: periodic pruning of high-error training patterns."""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .dip import dip_pvalue

log = logging.getLogger(__name__)


class Termination(str, enum.Enum):
    VARIANCE = "variance"
    DIP = "dip"
    NEVER = "never"


class Spread(str, enum.Enum):
    """Statistic compared against the threshold by the ``variance`` rule."""
    STD = "std"
    VARIANCE = "variance"


@dataclass(frozen=True)
class BdrConfig:
    interval_epochs: int = 50
    sigma_distance: float = 1.0
    variance_threshold: float = 0.01
    termination: Termination = Termination.VARIANCE
    dip_alpha: float = 0.05
    dip_bootstrap: int = 1000
    dip_seed: int = 0
    spread: Spread = Spread.STD

    def __post_init__(self):
        if self.interval_epochs < 1:
            raise ValueError("interval_epochs must be >= 1")
        if not self.sigma_distance > 0:
            raise ValueError("sigma_distance must be positive")
        if not self.variance_threshold > 0:
            raise ValueError("variance_threshold must be positive")
        if not 0 < self.dip_alpha < 1:
            raise ValueError("dip_alpha must lie in (0, 1)")
        object.__setattr__(self, "termination", Termination(self.termination))
        object.__setattr__(self, "spread", Spread(self.spread))


@dataclass(eq=False)
class BdrRoundReport:
    epoch: int
    mean_E: float
    var_E: float
    candidate_count: int
    removed_indices: list = field(default_factory=list)
    retained_size_after: int = 0
    terminated: bool = False
    # set when a pass would have emptied the training set and was skipped
    skipped_empty: bool = False

    CSV_FIELDS = ("epoch", "mean", "variance", "candidates", "removed",
                  "retained", "terminated")

    def csv_row(self):
        return (self.epoch, repr(self.mean_E), repr(self.var_E), self.candidate_count,
                len(self.removed_indices), self.retained_size_after, int(self.terminated))


def write_round_reports(path, reports):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BdrRoundReport.CSV_FIELDS)
        writer.writerows(r.csv_row() for r in reports)


def _errors(errors):
    if isinstance(errors, nn.ErrorDistribution):
        errors = errors.errors
    return np.asarray(errors, dtype=float)


def bdr_pass(errors, alpha: float) -> np.ndarray:
    """Positions flagged for removal.

    Candidates are patterns with error strictly above the mean error. A
    candidate is removed when its error exceeds the candidate mean by more
    than ``alpha`` population standard deviations of the candidate errors.
    """
    e = _errors(errors)
    candidates = np.flatnonzero(e > e.mean())
    if candidates.size == 0:
        return candidates
    ec = e[candidates]
    return candidates[ec - ec.mean() > alpha * ec.std()]


def should_stop_removal(errors, cfg: BdrConfig, dip_tester=None) -> bool:
    """Whether removal should stop for good.

    Under the ``variance`` rule the population standard deviation (or, with
    ``spread="variance"``, the population variance) of the errors is
    compared against ``cfg.variance_threshold``.

    ``dip_tester`` maps a sample to a dip-test p-value; by default a seeded
    uniform bootstrap is used.
    """
    e = _errors(errors)
    if cfg.termination is Termination.NEVER:
        return False
    if cfg.termination is Termination.VARIANCE:
        spread = e.std() if cfg.spread is Spread.STD else e.var()
        return float(spread) < cfg.variance_threshold
    if dip_tester is None:
        def dip_tester(sample):
            return dip_pvalue(sample, cfg.dip_bootstrap, cfg.dip_seed).p_value
    return dip_tester(e) > cfg.dip_alpha


class BdrHook:
    """Training hook applying the removal schedule; collects round reports."""

    def __init__(self, ds, cfg: BdrConfig, dip_tester=None, last_epoch=None):
        self.ds = ds
        self.cfg = cfg
        self.last_epoch = last_epoch
        self.dip_tester = dip_tester
        self.reports = []
        self.stopped = False

    def __call__(self, epoch, state, retained):
        if epoch % self.cfg.interval_epochs or epoch == self.last_epoch:
            return None
        dist = nn.per_pattern_errors(state, self.ds.features[retained],
                                     self.ds.labels[retained], epoch)
        e = dist.errors
        report = BdrRoundReport(epoch, float(e.mean()), float(e.var()), 0,
                                retained_size_after=len(retained))
        self.reports.append(report)

        if not self.stopped and should_stop_removal(dist, self.cfg, self.dip_tester):
            self.stopped = True
        if self.stopped:
            report.terminated = True
            return None

        report.candidate_count = int(np.count_nonzero(e > e.mean()))
        removed = bdr_pass(dist, self.cfg.sigma_distance)
        if removed.size == 0:
            return None
        if removed.size >= len(retained):
            log.warning("epoch %d: removal would empty the training set; skipped", epoch)
            report.skipped_empty = True
            return None
        report.removed_indices = [int(i) for i in retained[removed]]
        keep = np.ones(len(retained), dtype=bool)
        keep[removed] = False
        report.retained_size_after = int(keep.sum())
        return retained[keep]


@dataclass(eq=False)
class BdrResult:
    state: nn.NetworkState
    reports: list
    retained: np.ndarray
    train_loss: list
    test_loss: list

    def variance_series(self):
        return [r.var_E for r in self.reports]


def run_bdr_training(ds, split, train_cfg: nn.TrainConfig, bdr_cfg: BdrConfig,
                     seed: int, dip_tester=None) -> BdrResult:
    """Train for the full epoch budget with a BDR pass every ``interval_epochs``.

    Rounds run after the update of epochs interval, 2*interval, ... while
    training continues afterwards; nothing happens after the final epoch,
    since removed patterns could no longer change the network. Once the termination rule fires no further
    patterns are removed, but later rounds are still recorded (flagged
    ``terminated``) so the error-variance series covers the whole run.
    """
    hook = BdrHook(ds, bdr_cfg, dip_tester, last_epoch=train_cfg.epochs)
    res = nn.train(ds, split, train_cfg, seed, hooks=[hook])
    return BdrResult(res.state, hook.reports, res.retained, res.train_loss, res.test_loss)
