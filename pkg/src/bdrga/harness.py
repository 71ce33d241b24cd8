"""Experiment protocols: control, hidden-unit sweep, BDR sweep, GA groups, figure data.

Every protocol runs ``runs`` independent repetitions whose seeds are
``seed + run_index``. A run's split, weight initialisation and GA draw from
separate streams derived from that seed, so protocols that share a base
seed also share splits and can be compared pairwise.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial

import numpy as np

from . import dataset as dset
from . import nn
from .bdr import BdrConfig, BdrHook, run_bdr_training, write_round_reports
from .ga import GaConfig, decode_mask, evolve
from .stats import histogram, linear_regression

log = logging.getLogger(__name__)

PROTOCOLS = ("control", "group_b", "group_g", "hidden_sweep", "band_sweep", "figures")

DEFAULT_HIDDEN_UNITS = (24, 26, 28, 30, 32, 36, 38, 40, 44, 48, 52, 56)
DEFAULT_THRESHOLDS = (0.01, 0.05)
DEFAULT_SIGMAS = tuple(round(1.0 + 0.1 * i, 1) for i in range(11))
DEFAULT_BANDS = tuple(range(0, 24, 2))
# Feature-count groups with fewer runs than this are left out of the banding table.
MIN_GROUP_RUNS = 10

# stream tags for per-run seed derivation
_INIT_STREAM, _GA_STREAM = 1, 2


def derive_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    data: str
    protocol: str = "control"
    runs: int = 30
    seed: int = 0
    train: nn.TrainConfig = nn.TrainConfig()
    bdr: BdrConfig = BdrConfig()
    ga: GaConfig = GaConfig()
    normalization: dset.Normalization = dset.Normalization.L2
    fit_scope: str = "all"
    train_ratio: float = 0.2
    out: str | None = None
    jobs: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.fit_scope not in ("all", "train"):
            raise ValueError("fit_scope must be 'all' or 'train'")
        object.__setattr__(self, "normalization", dset.Normalization(self.normalization))

    def run_seeds(self):
        return [self.seed + i for i in range(self.runs)]


@dataclass
class RunReport:
    protocol: str
    seed: int
    test_accuracy: float
    train_accuracy: float
    final_loss: float
    epochs: int
    hidden_units: int
    retained: int | None = None
    mask: str | None = None
    n_features: int | None = None
    variance_threshold: float | None = None
    sigma_distance: float | None = None
    band: int | None = None
    terminated_epoch: int | None = None
    wall_time: float = 0.0

    FIELDS = ("protocol", "seed", "test_accuracy", "train_accuracy", "final_loss",
              "epochs", "hidden_units", "retained", "mask", "n_features",
              "variance_threshold", "sigma_distance", "band", "terminated_epoch")


# ---------------------------------------------------------------- data prep

_DATA_CACHE = {}


def load_raw(path) -> dset.Dataset:
    key = os.path.abspath(path)
    if key not in _DATA_CACHE:
        _DATA_CACHE[key] = dset.load_dataset(path)
    return _DATA_CACHE[key]


def prepare(cfg: ExperimentConfig, seed: int):
    """Normalized dataset and split for one run."""
    raw = load_raw(cfg.data)
    sp = dset.split(raw, cfg.train_ratio, seed)
    fit_on = sp.train_indices if cfg.fit_scope == "train" else None
    return dset.normalize(raw, cfg.normalization, fit_on), sp


def _finish(protocol, seed, ds, sp, res, cfg_train, t0, **extra) -> RunReport:
    state = res.state
    tr = sp.train_indices
    return RunReport(
        protocol=protocol,
        seed=seed,
        test_accuracy=nn.evaluate_accuracy(state, ds.features[sp.test_indices], ds.labels[sp.test_indices]),
        train_accuracy=nn.evaluate_accuracy(state, ds.features[tr], ds.labels[tr]),
        final_loss=res.train_loss[-1] if res.train_loss else float("nan"),
        epochs=cfg_train.epochs,
        hidden_units=cfg_train.hidden_units,
        wall_time=time.perf_counter() - t0,
        **extra,
    )


def _pmap(fn, items, jobs):
    if jobs <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------- single runs

def control_run(cfg: ExperimentConfig, seed: int, hidden_units=None) -> RunReport:
    t0 = time.perf_counter()
    train_cfg = cfg.train if hidden_units is None else replace(cfg.train, hidden_units=hidden_units)
    ds, sp = prepare(cfg, seed)
    res = nn.train(ds, sp, train_cfg, derive_seed(seed, _INIT_STREAM))
    return _finish("control", seed, ds, sp, res, train_cfg, t0)


def group_b_run(cfg: ExperimentConfig, seed: int, bdr_cfg=None):
    """One BDR-trained network. Returns the report and its round reports."""
    t0 = time.perf_counter()
    bdr_cfg = bdr_cfg or cfg.bdr
    ds, sp = prepare(cfg, seed)
    res = run_bdr_training(ds, sp, cfg.train, bdr_cfg, derive_seed(seed, _INIT_STREAM))
    stopped = [r.epoch for r in res.reports if r.terminated]
    rep = _finish("group_b", seed, ds, sp, res, cfg.train, t0,
                  retained=int(len(res.retained)),
                  variance_threshold=bdr_cfg.variance_threshold,
                  sigma_distance=bdr_cfg.sigma_distance,
                  terminated_epoch=stopped[0] if stopped else None)
    return rep, res.reports


def select_features(cfg: ExperimentConfig, seed: int):
    """Run the GA on a run's training split; returns (ds, split, best chromosome)."""
    ds, sp = prepare(cfg, seed)
    ga_cfg = replace(cfg.ga, seed=derive_seed(seed, _GA_STREAM))
    best = evolve(ds, sp.train_indices, ga_cfg).best
    return ds, sp, best


def _masked_run(ds, sp, best, train_cfg, seed, protocol, t0, **extra) -> RunReport:
    cols = decode_mask(best)
    masked = ds.select_features(cols)
    res = nn.train(masked, sp, train_cfg, derive_seed(seed, _INIT_STREAM))
    return _finish(protocol, seed, masked, sp, res, train_cfg, t0,
                   mask=best.bits(), n_features=len(cols), **extra)


def group_g_run(cfg: ExperimentConfig, seed: int) -> RunReport:
    t0 = time.perf_counter()
    ds, sp, best = select_features(cfg, seed)
    return _masked_run(ds, sp, best, cfg.train, seed, "group_g", t0)


def band_run(cfg: ExperimentConfig, seed: int, bands=DEFAULT_BANDS) -> list[RunReport]:
    t0 = time.perf_counter()
    ds, sp, best = select_features(cfg, seed)
    out = []
    for band in bands:
        hidden = max(1, best.n_selected + band)
        train_cfg = replace(cfg.train, hidden_units=hidden)
        out.append(_masked_run(ds, sp, best, train_cfg, seed, "band_sweep", t0, band=band))
        t0 = time.perf_counter()
    return out


# ---------------------------------------------------------------- protocols

def aggregate(values):
    v = np.asarray(values, dtype=float)
    return {"mean": float(v.mean()), "std": float(v.std()), "n": int(v.size)}


def run_control(cfg: ExperimentConfig) -> list[RunReport]:
    return _pmap(partial(control_run, cfg), cfg.run_seeds(), cfg.jobs)


def _hidden_task(cfg, item):
    hidden, seed = item
    return control_run(cfg, seed, hidden)


def run_hidden_sweep(cfg: ExperimentConfig, units=DEFAULT_HIDDEN_UNITS):
    """Mean test accuracy per hidden-layer width. Returns (table rows, reports)."""
    units = list(units)
    if not units:
        raise ValueError("hidden-unit list is empty")
    items = [(h, s) for h in units for s in cfg.run_seeds()]
    reports = _pmap(partial(_hidden_task, cfg), items, cfg.jobs)
    rows = []
    for h in units:
        accs = [r.test_accuracy for r in reports if r.hidden_units == h]
        agg = aggregate(accs)
        rows.append({"hidden_units": h, "accuracy": agg["mean"], "std": agg["std"], "runs": agg["n"]})
    return rows, reports


@dataclass
class GroupBResult:
    rows: list
    reports: list
    rounds: dict = field(default_factory=dict)
    regression: object = None


def _group_b_task(cfg, item):
    threshold, sigma, seed = item
    bdr_cfg = replace(cfg.bdr, variance_threshold=threshold, sigma_distance=sigma)
    return group_b_run(cfg, seed, bdr_cfg)


def run_group_b(cfg: ExperimentConfig, thresholds=DEFAULT_THRESHOLDS, sigmas=DEFAULT_SIGMAS) -> GroupBResult:
    """Cartesian sweep over variance thresholds and sigma distances.

    The regression of mean accuracy on mean retained size is taken over the
    cell means, one point per cell.
    """
    thresholds, sigmas = list(thresholds), list(sigmas)
    if not thresholds or not sigmas:
        raise ValueError("threshold and sigma grids must be non-empty")
    cells = [(t, s) for t in thresholds for s in sigmas]
    items = [(t, s, seed) for t, s in cells for seed in cfg.run_seeds()]
    outputs = _pmap(partial(_group_b_task, cfg), items, cfg.jobs)

    result = GroupBResult(rows=[], reports=[])
    for (t, s, seed), (rep, rounds) in zip(items, outputs):
        result.reports.append(rep)
        result.rounds[(t, s, seed)] = rounds
    for t, s in cells:
        reps = [r for r in result.reports if r.variance_threshold == t and r.sigma_distance == s]
        result.rows.append({
            "variance_threshold": t,
            "sigma_distance": s,
            "epochs": cfg.train.epochs,
            "retained": aggregate([r.retained for r in reps])["mean"],
            "accuracy": aggregate([r.test_accuracy for r in reps])["mean"],
            "terminated_runs": sum(r.terminated_epoch is not None for r in reps),
            "runs": len(reps),
        })
    if len(result.rows) >= 2 and len({r["retained"] for r in result.rows}) > 1:
        result.regression = linear_regression([r["retained"] for r in result.rows],
                                              [r["accuracy"] for r in result.rows])
    return result


def feature_banding(reports, min_runs=MIN_GROUP_RUNS):
    """Mean accuracy per selected-feature count, dropping sparse groups."""
    counts = sorted({r.n_features for r in reports})
    rows = []
    for k in counts:
        accs = [r.test_accuracy for r in reports if r.n_features == k]
        if len(accs) >= min_runs:
            rows.append({"n_features": k, "accuracy": float(np.mean(accs)), "runs": len(accs)})
    return rows


def run_group_g(cfg: ExperimentConfig):
    """GA-selected features per run. Returns (reports, banding rows, regression or None)."""
    reports = _pmap(partial(group_g_run, cfg), cfg.run_seeds(), cfg.jobs)
    reg = None
    if len({r.n_features for r in reports}) > 1:
        reg = linear_regression([r.n_features for r in reports], [r.test_accuracy for r in reports])
    return reports, feature_banding(reports), reg


def run_band_sweep(cfg: ExperimentConfig, bands=DEFAULT_BANDS):
    """One GA mask per run, one network per band with H = |mask| + band."""
    bands = list(bands)
    if not bands:
        raise ValueError("band list is empty")
    per_run = _pmap(partial(band_run, cfg, bands=bands), cfg.run_seeds(), cfg.jobs)
    reports = [r for group in per_run for r in group]
    rows = []
    for b in bands:
        agg = aggregate([r.test_accuracy for r in reports if r.band == b])
        rows.append({"band": b, "accuracy": agg["mean"], "std": agg["std"], "runs": agg["n"]})
    return rows, reports


class ErrorRecorder:
    """Training hook keeping the per-pattern errors of chosen epochs."""

    def __init__(self, ds, epochs):
        self.ds = ds
        self.epochs = set(epochs)
        self.errors = {}

    def __call__(self, epoch, state, retained):
        if epoch in self.epochs:
            self.errors[epoch] = nn.per_pattern_errors(
                state, self.ds.features[retained], self.ds.labels[retained], epoch)


def error_snapshots(cfg: ExperimentConfig, seed: int, epochs=None):
    """Train one control network, returning (errors by epoch, TrainResult)."""
    ds, sp = prepare(cfg, seed)
    epochs = epochs or (1, cfg.train.epochs)
    rec = ErrorRecorder(ds, epochs)
    res = nn.train(ds, sp, cfg.train, derive_seed(seed, _INIT_STREAM), hooks=[rec])
    return rec.errors, res


def emit_figures(cfg: ExperimentConfig, out_dir):
    """Write figure-data CSVs for the first run seed; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    seed = cfg.seed
    final = cfg.train.epochs
    errors, res = error_snapshots(cfg, seed, (1, final))
    written = []

    for tag, epoch in (("epoch1", 1), ("final", final)):
        if epoch not in errors:
            continue
        path = os.path.join(out_dir, f"fig_errors_{tag}.csv")
        _write_rows(path, ("bin_low", "bin_high", "count"),
                    [(repr(lo), repr(hi), c) for lo, hi, c in histogram(errors[epoch].errors).rows()])
        written.append(path)

    path = os.path.join(out_dir, "fig_loss.csv")
    _write_rows(path, ("epoch", "train_loss", "test_loss"),
                [(i + 1, repr(a), repr(b)) for i, (a, b) in enumerate(zip(res.train_loss, res.test_loss))])
    written.append(path)

    ds, sp = prepare(cfg, seed)
    bres = run_bdr_training(ds, sp, cfg.train, cfg.bdr, derive_seed(seed, _INIT_STREAM))
    path = os.path.join(out_dir, "fig_bdr_variance.csv")
    write_round_reports(path, bres.reports)
    written.append(path)

    path = os.path.join(out_dir, "fig_bdr_loss.csv")
    _write_rows(path, ("epoch", "train_loss", "test_loss"),
                [(i + 1, repr(a), repr(b)) for i, (a, b) in enumerate(zip(bres.train_loss, bres.test_loss))])
    written.append(path)
    return written


# ----------------------------------------------------------------- writing

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_reports(path, reports, timing=False):
    fields = RunReport.FIELDS + (("wall_time",) if timing else ())
    _write_rows(path, fields, [[getattr(r, f) for f in fields] for r in reports])


def write_table(path, rows):
    if not rows:
        _write_rows(path, (), [])
        return
    header = tuple(rows[0])
    _write_rows(path, header, [[row[k] for k in header] for row in rows])


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _regression_dict(reg):
    return None if reg is None else asdict(reg)


def run_protocol(cfg: ExperimentConfig, **grids):
    """Run ``cfg.protocol`` and write its outputs to ``cfg.out``; returns the summary dict."""
    out = cfg.out or "."
    os.makedirs(out, exist_ok=True)
    raw = load_raw(cfg.data)
    summary = {
        "protocol": cfg.protocol,
        "runs": cfg.runs,
        "seed": cfg.seed,
        "normalization": cfg.normalization.value,
        "fit_scope": cfg.fit_scope,
        "train": {k: (v.value if hasattr(v, "value") else v) for k, v in asdict(cfg.train).items()},
        "class_counts": raw.class_counts(),
    }
    reports = []

    if cfg.protocol == "control":
        reports = run_control(cfg)
        summary["test_accuracy"] = aggregate([r.test_accuracy for r in reports])
        summary["train_accuracy"] = aggregate([r.train_accuracy for r in reports])
        acc = summary["test_accuracy"]
        write_table(os.path.join(out, "table.csv"),
                    [{"hidden_units": cfg.train.hidden_units, "accuracy": acc["mean"],
                      "std": acc["std"], "runs": acc["n"]}])
    elif cfg.protocol == "hidden_sweep":
        rows, reports = run_hidden_sweep(cfg, grids.get("hidden_units") or DEFAULT_HIDDEN_UNITS)
        write_table(os.path.join(out, "table.csv"), rows)
        summary["table"] = rows
    elif cfg.protocol == "group_b":
        res = run_group_b(cfg, grids.get("thresholds") or DEFAULT_THRESHOLDS,
                          grids.get("sigmas") or DEFAULT_SIGMAS)
        reports = res.reports
        write_table(os.path.join(out, "table.csv"), res.rows)
        _write_rows(os.path.join(out, "fig_bdr_variance.csv"),
                    ("variance_threshold", "sigma_distance", "seed", "epoch", "variance",
                     "retained", "terminated"),
                    [(t, s, seed, r.epoch, r.var_E, r.retained_size_after, int(r.terminated))
                     for (t, s, seed), rounds in res.rounds.items() for r in rounds])
        _write_rows(os.path.join(out, "fig_size_accuracy.csv"), ("retained", "accuracy"),
                    [(r["retained"], r["accuracy"]) for r in res.rows])
        summary["table"] = res.rows
        summary["regression"] = _regression_dict(res.regression)
    elif cfg.protocol == "group_g":
        reports, banding, reg = run_group_g(cfg)
        write_table(os.path.join(out, "table.csv"), banding)
        _write_rows(os.path.join(out, "fig_features_accuracy.csv"), ("n_features", "accuracy"),
                    [(r.n_features, r.test_accuracy) for r in reports])
        summary["test_accuracy"] = aggregate([r.test_accuracy for r in reports])
        summary["banding"] = banding
        summary["regression"] = _regression_dict(reg)
    elif cfg.protocol == "band_sweep":
        rows, reports = run_band_sweep(cfg, grids.get("bands") or DEFAULT_BANDS)
        write_table(os.path.join(out, "table.csv"), rows)
        summary["table"] = rows
    elif cfg.protocol == "figures":
        summary["files"] = [os.path.basename(p) for p in emit_figures(cfg, out)]

    if reports:
        write_reports(os.path.join(out, "report.csv"), reports, cfg.timing)
    write_summary(os.path.join(out, "summary.json"), summary)
    return summary
