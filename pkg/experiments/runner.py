"""
Runner - Experiment Orchestration

Dispatches a validated ExperimentConfig to the experiment it names, writes
its CSV/JSON outputs and the metadata sidecar, and prints progress the way
the command-line front end expects.
"""

import math
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
from tqdm import tqdm

from core.diagnostics import (
    acceptance_rate,
    burn_in_summary,
    draw_count_report,
    drift_ratio,
    ks_experiment,
    regularity_moments,
    tail_slope,
)
from core.rng_core import RngStream
from core.samplers import ProposalSpec, run_chain
from core.scaling import (
    QuadratureSpec,
    acceptance_atmcmc_closed_form,
    diffusion_speed_atmcmc_closed_form,
    finite_dim_acceptance_rwmh,
    optimize_scaling,
    scaling_curves,
)
from core.targets import TargetModel, make_target

from .config import ExperimentConfig
from .outputs import write_csv, write_json, write_metadata, write_trace

# Initial states of bench-table chains come from streams offset by this amount.
INIT_STREAM_OFFSET = 2 ** 32

# KS averages are reported over t in [1, KS_WINDOW] (clipped to the horizon).
KS_WINDOW = 2000

Outcome = Tuple[List[Path], Dict[str, object]]


def _fill(x0, d: int) -> np.ndarray:
    values = np.asarray(x0, dtype=float)
    return np.full(d, values[0]) if values.size == 1 else values


def _target(config: ExperimentConfig, d: int = None) -> TargetModel:
    t = config.target
    return make_target(t.component, t.variance, t.d if d is None else d)


def run_sample(config: ExperimentConfig, out: Path, quiet: bool) -> Outcome:
    """Single chain with a stored trace (sample paths, stationary checks)."""
    p = config.params
    model = _target(config)
    spec = ProposalSpec(p.kernel, p.l, model.d, p.c)
    x0 = np.zeros(model.d) if p.x0 is None else _fill(p.x0, model.d)
    coords = None if p.coords is None else [i - 1 for i in p.coords]

    print(f">>> Running {p.kernel} chain (d={model.d}, l={p.l:g}, N={p.n_iter}, thin={p.thin})...")
    stream = RngStream(config.seed, 0)
    run = run_chain(model, spec, x0, p.n_iter, stream, thin=p.thin, coords=coords, progress=not quiet)

    summary = {
        **spec.describe(),
        "n_iter": run.n_iter,
        "thin": run.thin,
        "acceptance_rate": acceptance_rate(run),
        "continuous_draws": run.draws.continuous,
        "sign_bits": run.draws.sign_bits,
        "final_state": run.final,
    }
    if np.sum(run.iterations > p.burn_in) >= 2:
        stats = burn_in_summary(run, p.burn_in, model.marginal_cdf)
        summary["post_burn_in"] = {
            "burn_in": p.burn_in,
            "coord": stats.coord + 1,
            "n_samples": stats.n_samples,
            "mean": stats.mean,
            "variance": stats.variance,
            "ks": stats.ks,
        }
    print(f"Acceptance rate: {100.0 * summary['acceptance_rate']:.2f}%")

    files = [write_trace(out / "trace.csv", run), write_json(out / "sample_summary.json", summary)]
    return files, {"chain": 0}


def run_bench_table(config: ExperimentConfig, out: Path, quiet: bool) -> Outcome:
    """Acceptance rates over the (d, l) grid from stationary starts."""
    p = config.params
    cells = p.grid()
    rows, summary, timing = [], [], []
    stream_id = 0

    print(f">>> Running bench-table ({len(cells)} cells x {len(p.kernels)} kernels, N={p.n_iter})...")
    for d, l in tqdm(cells, disable=quiet, desc="bench-table"):
        model = _target(config, d)
        runs = {}
        for kernel in p.kernels:
            x0 = model.component.sample(RngStream(config.seed, INIT_STREAM_OFFSET + stream_id), d)
            run = run_chain(model, ProposalSpec(kernel, l, d), x0, p.n_iter,
                            RngStream(config.seed, stream_id), thin=p.n_iter, coords=[0])
            runs[kernel] = run
            rows.append([d, l, kernel, acceptance_rate(run), p.n_iter, config.seed])
            stream_id += 1

        I = model.fisher_info()
        cell = {"d": d, "l": l, "measured": {k: acceptance_rate(r) for k, r in runs.items()},
                "theory": {"rwmh": finite_dim_acceptance_rwmh(l, d, I),
                           "atmcmc": acceptance_atmcmc_closed_form(l, I)}}
        if "atmcmc" in runs and "rwmh" in runs:
            report = draw_count_report(runs["atmcmc"], runs["rwmh"])
            cell["draw_counts"] = {
                "continuous_atmcmc": report.continuous_a,
                "continuous_rwmh": report.continuous_b,
                "sign_bits_atmcmc": report.sign_bits_a,
                "continuous_ratio_rwmh_over_atmcmc": report.continuous_ratio,
            }
            timing.append({"d": d, "l": l, "seconds_atmcmc": report.elapsed_a, "seconds_rwmh": report.elapsed_b})
        summary.append(cell)
        if quiet:
            continue
        rates = "  ".join(f"{k} {100.0 * v:6.2f}%" for k, v in cell["measured"].items())
        tqdm.write(f"d={d:<4} l={l:<5g} {rates}")

    files = [
        write_csv(out / "bench_table.csv", ["d", "l", "kernel", "acceptance_rate", "n_iter", "seed"], rows),
        write_json(out / "bench_summary.json", {"cells": summary}),
        # wall-clock seconds are machine-dependent and kept out of the reproducible outputs
        write_json(out / "timing.json", {"cells": timing}),
    ]
    return files, {"chains": f"stream k for the k-th (cell, kernel) run, initial state from stream {INIT_STREAM_OFFSET}+k"}


def run_ks(config: ExperimentConfig, out: Path, quiet: bool) -> Outcome:
    """Ensemble KS-vs-time curves for two kernels from a common start."""
    p = config.params
    model = _target(config)
    specs = [
        ProposalSpec(kind, p.l, model.d, p.c if kind == "atmcmc_scaled" else None)
        for kind in (p.kernel_a, p.kernel_b)
    ]
    x0 = _fill(p.x0, model.d)

    print(f">>> Running KS experiment (d={model.d}, l={p.l:g}, L={p.chains}, T={p.horizon}, "
          f"threads={config.threads})...")
    series_a, series_b = ks_experiment(model, specs[0], specs[1], x0, n_chains=p.chains, horizon=p.horizon,
                                       seed=config.seed, coords=[i - 1 for i in p.coords],
                                       threads=config.threads, progress=not quiet)

    window = min(KS_WINDOW, p.horizon)
    summary = {"d": model.d, "l": p.l, "L": p.chains, "T": p.horizon, "x0": x0, "coords": list(p.coords),
               "window": [1, window], "kernels": {}}
    for series in (series_a, series_b):
        summary["kernels"][series.kind] = {
            "mean_ks_window": series.mean_over(1, window),
            "final_ks": float(series.ks_values[-1]),
            "tail_slope": tail_slope(series),
        }
        print(f"{series.kind:>8}: mean KS over [1, {window}] = {summary['kernels'][series.kind]['mean_ks_window']:.4f}")

    header = ["t", f"ks_{series_a.kind}", f"ks_{series_b.kind}"]
    rows = zip(series_a.times, series_a.ks_values, series_b.ks_values)
    files = [write_csv(out / "ks_series.csv", header, rows), write_json(out / "ks_summary.json", summary)]
    return files, {p.kernel_a: f"streams [0, {p.chains})", p.kernel_b: f"streams [{p.chains}, {2 * p.chains})"}


def run_scaling(config: ExperimentConfig, out: Path, quiet: bool) -> Outcome:
    """Diffusion speed / acceptance curves and the optimal scales."""
    p = config.params
    I = _target(config).fisher_info()
    quad = QuadratureSpec(upper=p.upper, abs_tol=p.abs_tol)

    print(f">>> Computing scaling curves (I={I:g}, {p.points} points on [{p.l_min:g}, {p.l_max:g}])...")
    curves = scaling_curves(I, quad, p.points, p.l_min, p.l_max)
    optima = {kind: optimize_scaling(kind, I, quad) for kind in ("rwmh", "atmcmc")}

    summary = {"fisher_info": I, "optimal": {}}
    for kind, result in optima.items():
        column = curves.h_rwmh if kind == "rwmh" else curves.h_atmcmc
        summary["optimal"][kind] = {**result.describe(), "grid_argmax_l": float(curves.l[np.argmax(column)])}
        print(f"{kind:>8}: l_opt = {result.l_opt:.4f}, alpha_opt = {result.alpha_opt:.4f}")
    l_at = optima["atmcmc"].l_opt
    summary["closed_form_check"] = {
        "h_atmcmc_at_l_opt": diffusion_speed_atmcmc_closed_form(l_at, I),
        "alpha_atmcmc_at_l_opt": acceptance_atmcmc_closed_form(l_at, I),
    }

    header = ["l", "h_rwmh", "h_atmcmc", "alpha_rwmh", "alpha_atmcmc"]
    rows = zip(curves.l, curves.h_rwmh, curves.h_atmcmc, curves.alpha_rwmh, curves.alpha_atmcmc)
    files = [write_csv(out / "scaling_curves.csv", header, rows),
             write_json(out / "scaling_summary.json", summary)]
    return files, {}


def run_drift(config: ExperimentConfig, out: Path, quiet: bool) -> Outcome:
    """PV(x)/V(x) at probe points x = (probe, 0, ..., 0)."""
    p = config.params
    model = _target(config)
    spec = ProposalSpec(p.kernel, p.l, model.d, p.c)

    print(f">>> Estimating drift ratios ({p.kernel}, l={p.l:g}, V=exp({p.s:g}|x_1|), M={p.samples})...")
    estimates = []
    for i, probe in enumerate(p.probes):
        x = np.zeros(model.d)
        x[0] = probe
        est = drift_ratio(model, spec, x, p.samples, RngStream(config.seed, i), s=p.s)
        estimates.append(est.describe())
        margin = (1.0 - est.estimate) / est.stderr if est.stderr > 0 else math.inf
        print(f"  x_1={probe:<6g} PV/V = {est.estimate:.5f} +/- {est.stderr:.5f} ({margin:+.1f} s.e. below 1)")

    files = [write_json(out / "drift_report.json", {**spec.describe(), "probes": estimates})]
    return files, {"probes": "stream i for the i-th probe"}


def run_moments(config: ExperimentConfig, out: Path, quiet: bool) -> Outcome:
    """Monte Carlo regularity moments of the component density."""
    model = _target(config)
    n = config.params.samples
    print(f">>> Estimating regularity moments (M={n})...")
    moments = regularity_moments(model, n, RngStream(config.seed, 0))
    print(f"  M1 = {moments.m1:.4f} +/- {moments.m1_stderr:.4f}")
    print(f"  M2 = {moments.m2:.4f} +/- {moments.m2_stderr:.4f}")
    files = [write_json(out / "moments.json", {**model.describe(), **moments.describe()})]
    return files, {"samples": 0}


RUNNERS: Dict[str, Callable[[ExperimentConfig, Path, bool], Outcome]] = {
    "sample": run_sample,
    "bench-table": run_bench_table,
    "ks-experiment": run_ks,
    "scaling-curves": run_scaling,
    "drift-check": run_drift,
    "moments-check": run_moments,
}


def run_experiment(config: ExperimentConfig, quiet: bool = False) -> List[Path]:
    """Run one experiment; returns every file written, metadata sidecar last."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files, streams = RUNNERS[config.kind](config, out, quiet)
    files.append(write_metadata(out, config, files, streams))
    return files
