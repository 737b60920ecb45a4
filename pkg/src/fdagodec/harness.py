"""Seeded Monte Carlo experiment runner and report writer."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_to_dict
from .decomposition import godec_baseline, two_step_godec
from .estimation import (
    Estimate,
    TrialMetrics,
    estimate_targets,
    evaluate_trial,
    extract_target_vectors,
    find_peaks,
    power_spectrum,
    spectrum_2d,
)
from .interference import Scene, assemble_scene
from .radar import RadarConfig, Target

__all__ = [
    "TrialRecord",
    "ExperimentReport",
    "trial_seed",
    "sweep_points",
    "scene_at",
    "count_peaks",
    "target_bins",
    "spurious_peaks",
    "run_trial",
    "run_experiment",
    "spectrum_csv",
    "emit_report",
    "version_string",
]

PEAK_FLOOR_DB = -20.0


def version_string() -> str:
    return f"v{__version__}"


@dataclass
class TrialRecord:
    jammer_index: int
    snr_index: int
    trial: int
    seed: int
    jammer_deg: float | None
    snr_db: float | None
    estimates: list[Estimate]
    metrics: TrialMetrics | None
    iterations: int
    converged: bool
    fallbacks: int
    objective_trace: list[float]
    peaks_two_step: int | None = None
    peaks_baseline: int | None = None
    spurious_two_step: int | None = None
    spurious_baseline: int | None = None

    @property
    def first_sweep_fraction(self) -> float:
        """Share of the total objective decrease achieved by the first sweep."""
        tr = self.objective_trace
        total = tr[0] - tr[-1]
        if total <= 0:
            return 1.0
        return (tr[0] - tr[1]) / total


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    trials: list[TrialRecord]
    aggregates: list[dict]
    spectra: dict[str, np.ndarray] = field(default_factory=dict)


def trial_seed(base_seed: int, jammer_index: int, snr_index: int, trial: int) -> int:
    """Independent non-negative seed for one Monte Carlo trial."""
    ss = np.random.SeedSequence([base_seed, jammer_index, snr_index, trial])
    return int(ss.generate_state(1, np.uint32)[0])


def sweep_points(cfg: ExperimentConfig) -> list[tuple[int, float | None, int, float | None]]:
    """``(jammer_index, jammer_rad, snr_index, snr_db)`` for every sweep cell.

    An empty sweep keeps the scene's own target powers; an empty jammer list
    keeps the scene's own jammers.
    """
    jams = list(enumerate(cfg.jammer_angles)) or [(0, None)]
    snrs = list(enumerate(cfg.sweep)) or [(0, None)]
    return [(ji, ja, si, snr) for ji, ja in jams for si, snr in snrs]


def scene_at(scene: Scene, jammer_rad: float | None, snr_db: float | None, seed: int) -> Scene:
    targets = scene.targets
    if snr_db is not None:
        targets = tuple(dataclasses.replace(t, power_db=snr_db) for t in targets)
    jammers = scene.jammers
    if jammer_rad is not None:
        jammers = (dataclasses.replace(jammers[0], theta_j=jammer_rad),) + jammers[1:]
    return dataclasses.replace(scene, targets=targets, jammers=jammers, seed=seed)


def _peak_list(L, cfg: RadarConfig, r: int, nfft: int, floor_db: float):
    if not np.any(L):
        return []
    # Hamming taper keeps six-element sidelobes (-13 dB untapered) out of the count
    w = np.hamming(cfg.M), np.hamming(cfg.N)
    return find_peaks(power_spectrum(L, cfg, r, nfft, w), floor_db)


def count_peaks(L, cfg: RadarConfig, r: int, nfft: int, floor_db: float = PEAK_FLOOR_DB) -> int:
    """Spectral peaks within ``floor_db`` of the maximum."""
    return len(_peak_list(L, cfg, r, nfft, floor_db))


def target_bins(cfg: RadarConfig, target: Target, nfft: int) -> tuple[float, float]:
    """Fractional ``(row, col)`` spectrum bin of a target's signature."""
    s = np.sin(target.theta)
    f_t = cfg.d_t * cfg.f0 * s / cfg.c - 2 * cfg.delta_f * target.range / cfg.c
    f_r = cfg.d_r * cfg.f0 * s / cfg.c
    return np.mod(f_t, 1.0) * nfft, np.mod(f_r, 1.0) * nfft


def spurious_peaks(L, cfg: RadarConfig, r: int, nfft: int, targets: Sequence[Target],
                   floor_db: float = PEAK_FLOOR_DB) -> tuple[int, int]:
    """``(total, spurious)`` peak counts.

    A peak is genuine when it lies within half a Rayleigh cell (``1/(2M)``
    and ``1/(2N)`` cycles) of some target in both axes.
    """
    peaks = _peak_list(L, cfg, r, nfft, floor_db)
    tol_r, tol_c = nfft / (2 * cfg.M), nfft / (2 * cfg.N)
    spots = [target_bins(cfg, t, nfft) for t in targets]

    def gap(a, b):
        d = abs(a - b) % nfft
        return min(d, nfft - d)

    spurious = sum(
        not any(gap(p[0], tr) <= tol_r and gap(p[1], tc) <= tol_c for tr, tc in spots)
        for p in peaks
    )
    return len(peaks), spurious


def run_trial(cfg: ExperimentConfig, point, trial: int) -> tuple[TrialRecord, dict]:
    """One trial; returns the record and the spectra it would dump."""
    ji, jam, si, snr = point
    seed = trial_seed(cfg.scene.seed, ji, si, trial)
    scene = scene_at(cfg.scene, jam, snr, seed)
    data = assemble_scene(scene)
    solver = dataclasses.replace(cfg.solver, seed=trial_seed(cfg.solver.seed, ji, si, trial))
    res = two_step_godec(data.Y, None, solver)
    rcfg = scene.cfg
    n_targets = len(scene.targets)

    ests, metrics = [], None
    if np.any(res.L_s):
        try:
            es = estimate_targets(res.L_s, rcfg, n_targets, cfg.nfft,
                                  range_hints=[t.range for t in scene.targets])
            ests = es.estimates
            metrics = evaluate_trial(es, scene.targets, cfg.angle_thresh, cfg.range_thresh,
                                     cfg.angle_unit)
        except ValueError:
            # peak at an invisible angle counts as a failed trial
            ests, metrics = [], None

    spectra = {}
    peaks_two = peaks_base = spur_two = spur_base = None
    if cfg.experiment in ("spectrum", "pseudo-peak"):
        for j, v in extract_target_vectors(res.L_s, cfg.solver.r_s):
            spectra[f"ls_{j}"] = np.abs(spectrum_2d(v, rcfg, cfg.nfft))
    if cfg.experiment == "pseudo-peak":
        k = solver.cardinality(data.Y.shape)
        L_b, _, _ = godec_baseline(data.Y, cfg.baseline_rank, k, solver)
        peaks_two, spur_two = spurious_peaks(res.L_s, rcfg, cfg.solver.r_s, cfg.nfft, scene.targets)
        peaks_base, spur_base = spurious_peaks(L_b, rcfg, cfg.baseline_rank, cfg.nfft, scene.targets)
        for j, v in extract_target_vectors(L_b, cfg.baseline_rank):
            spectra[f"baseline_{j}"] = np.abs(spectrum_2d(v, rcfg, cfg.nfft))

    record = TrialRecord(
        jammer_index=ji,
        snr_index=si,
        trial=trial,
        seed=seed,
        jammer_deg=None if jam is None else float(np.rad2deg(jam)),
        snr_db=snr,
        estimates=ests,
        metrics=metrics,
        iterations=res.iterations,
        converged=res.converged,
        fallbacks=res.fallbacks,
        objective_trace=res.objective_trace,
        peaks_two_step=peaks_two,
        peaks_baseline=peaks_base,
        spurious_two_step=spur_two,
        spurious_baseline=spur_base,
    )
    return record, spectra


def _run_trial_star(args):
    return run_trial(*args)


def _aggregate(cfg: ExperimentConfig, records: list[TrialRecord]) -> dict:
    errors = [e for r in records if r.metrics for e in r.metrics.errors]
    dr = np.array([e[0] for e in errors])
    dth = np.array([e[1] for e in errors])
    rms = lambda x: float(np.sqrt(np.mean(x ** 2))) if x.size else float("nan")  # noqa: E731
    first = records[0]
    agg = {
        "jammer_deg": first.jammer_deg,
        "snr_db": first.snr_db,
        "trials": len(records),
        "rmse_range_m": rms(dr),
        "rmse_theta_deg": float(np.rad2deg(rms(dth))),
        "rmse_theta_rad": rms(dth),
        "success_rate": sum(bool(r.metrics and r.metrics.success) for r in records) / len(records),
        "mean_iterations": float(np.mean([r.iterations for r in records])),
        "converged_fraction": float(np.mean([r.converged for r in records])),
        "mean_first_sweep_fraction": float(np.mean([r.first_sweep_fraction for r in records])),
    }
    if cfg.experiment == "pseudo-peak":
        agg["mean_peaks_two_step"] = float(np.mean([r.peaks_two_step for r in records]))
        agg["mean_peaks_baseline"] = float(np.mean([r.peaks_baseline for r in records]))
        agg["fraction_baseline_more_peaks"] = float(
            np.mean([r.peaks_baseline > r.peaks_two_step for r in records]))
        agg["fraction_baseline_spurious"] = float(np.mean([r.spurious_baseline > 0 for r in records]))
        n = len(cfg.scene.targets)
        agg["fraction_two_step_exact"] = float(np.mean([r.peaks_two_step == n for r in records]))
    return agg


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run every ``(jammer, SNR, trial)`` cell of the configured experiment.

    Trials are independent, so ``workers > 1`` farms them out to processes;
    results are keyed by index and do not depend on the worker count.
    Spectra come from the first trial of the first sweep point.
    """
    jobs = [(cfg, p, t) for p in sweep_points(cfg) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_trial_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [run_trial(*job) for job in jobs]

    records = [r for r, _ in results]
    records.sort(key=lambda r: (r.jammer_index, r.snr_index, r.trial))
    groups: dict[tuple[int, int], list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.jammer_index, r.snr_index), []).append(r)
    aggregates = [_aggregate(cfg, g) for _, g in sorted(groups.items())]
    spectra = results[0][1] if results else {}
    return ExperimentReport(cfg, records, aggregates, spectra)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


def _join(values) -> str:
    return ";".join(_fmt(v) for v in values)


TRIAL_COLUMNS = [
    "jammer_deg", "snr_db", "trial", "seed", "est_range_m", "est_theta_deg",
    "err_range_m", "err_theta_deg", "rmse_range_m", "rmse_theta_deg", "rmse_theta_rad",
    "success", "iterations", "converged", "fallbacks", "objective_initial",
    "objective_final", "first_sweep_fraction", "peaks_two_step", "peaks_baseline",
    "spurious_two_step", "spurious_baseline",
    "objective_trace",
]


def _trial_row(r: TrialRecord) -> list[str]:
    m = r.metrics
    return [
        _fmt(r.jammer_deg),
        _fmt(r.snr_db),
        _fmt(r.trial),
        _fmt(r.seed),
        _join(e.range_m for e in r.estimates),
        _join(np.rad2deg(e.theta) for e in r.estimates),
        _join(e[0] for e in m.errors) if m else "",
        _join(np.rad2deg(e[1]) for e in m.errors) if m else "",
        _fmt(m.rmse_range_m) if m else "",
        _fmt(m.rmse_theta_deg) if m else "",
        _fmt(m.rmse_theta_rad) if m else "",
        _fmt(bool(m and m.success)),
        _fmt(r.iterations),
        _fmt(r.converged),
        _fmt(r.fallbacks),
        _fmt(r.objective_trace[0]),
        _fmt(r.objective_trace[-1]),
        _fmt(r.first_sweep_fraction),
        _fmt(r.peaks_two_step),
        _fmt(r.peaks_baseline),
        _fmt(r.spurious_two_step),
        _fmt(r.spurious_baseline),
        _join(r.objective_trace),
    ]


def spectrum_csv(mag: np.ndarray, cfg: RadarConfig) -> str:
    """Magnitude grid as CSV with frequencies centred on zero.

    Rows follow the transmit spatial frequency and columns the receive one.
    Two header rows give the column scales: normalized receive frequency and
    the matching angle in degrees (blank where no angle exists). The first
    two columns give the row scales: normalized transmit frequency and the
    broadside range folded into one ambiguity period.
    """
    nfft = mag.shape[0]
    f = (np.arange(nfft) - nfft // 2) / nfft
    grid = np.fft.fftshift(mag)
    s = f * cfg.c / (cfg.d_r * cfg.f0)
    theta = [format(float(np.rad2deg(np.arcsin(x))), ".6g") if abs(x) <= 1 else "" for x in s]
    rng_m = np.mod(-f * cfg.ambiguity_period, cfg.ambiguity_period) if cfg.delta_f else np.zeros(nfft)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["f_transmit", "range_m"] + [format(x, ".6g") for x in f])
    w.writerow(["", "theta_deg"] + theta)
    for i in range(nfft):
        w.writerow([format(f[i], ".6g"), format(float(rng_m[i]), ".6g")]
                   + [format(float(x), ".6g") for x in grid[i]])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_report(report: ExperimentReport, out_dir) -> list[Path]:
    """Write ``trials.csv``, ``summary.json`` and any ``spectrum_*.csv``.

    Output depends only on the report, so identical inputs give identical
    bytes.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    for r in report.trials:
        w.writerow(_trial_row(r))
    written = [out / "trials.csv"]
    _write(written[0], buf.getvalue())

    summary = {
        "version": version_string(),
        "experiment": report.config.experiment,
        "aggregates": report.aggregates,
        "config": config_to_dict(report.config),
    }
    written.append(out / "summary.json")
    _write(written[-1], json.dumps(summary, indent=2, sort_keys=True, allow_nan=True) + "\n")

    rcfg = report.config.scene.cfg
    for name in sorted(report.spectra):
        p = out / f"spectrum_{name}.csv"
        _write(p, spectrum_csv(report.spectra[name], rcfg))
        written.append(p)
    return written
