"""Command-line front end: preset experiments and free-form runs.

Every run writes deterministic CSV data files plus a ``manifest.json``
recording the fully resolved parameters, derived quantities, tool version
and wall-clock time.  Validation failures exit nonzero with a
machine-readable error JSON on stderr.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import copy
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bands import band_edge_detunings, band_summary, find_band_minima
from .bound_states import size_sweep, steady_population
from .chiral import (
    MARKOV_THRESHOLD,
    angular_emission_factors,
    chiral_factor_closed_form,
    chiral_factor_from_rates,
    decay_rates,
    markov_validity,
)
from .config import (
    DELTA_Q_CHIRAL,
    ExperimentConfig,
    apply_override,
    config_to_raw,
    load_config_file,
    parse_config,
    preset_names,
    preset_raw,
)
from .dipole import DipoleConfig, j12_closed_form, rabi_simulation
from .dynamics import (
    assemble_system,
    directional_intensities,
    field_snapshot,
    fit_exponential_decay,
    initial_excitation,
    propagate,
    reflection_experiment,
    trajectory_arrays,
)
from .errors import BandEdgeError, ConfigError, LadderQEDError
from .output import write_csv, write_manifest

OUTPUT_ROOT_ENV = "LADDERQED_OUTPUT_ROOT"

_SUBCOMMAND_EXPERIMENT = {
    "bands": "bands",
    "emit": "chiral-emission",
    "reflect": "loss-reflection",
    "bound": "bound-state",
    "sweep-size": "size-sweep",
    "rabi": "dipole-rabi",
}


@dataclass
class RunResult:
    outdir: Path
    files: list[Path]
    derived: dict


def _resolve_outdir(output: str) -> Path:
    path = Path(output)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not path.is_absolute():
        path = Path(root) / path
    return path


def _model_manifest(config: ExperimentConfig) -> dict:
    raw = config_to_raw(config)
    raw.pop("sweep", None)
    return raw


def _emission_theory(config: ExperimentConfig) -> dict:
    """Resonance-based Markovian theory block for the manifest."""
    params = config.model
    em = config.emitters[0]
    summary = band_summary(params, n_k=5, delta_q=em.delta_q)
    derived: dict = {
        "eta": params.eta,
        "k_min": summary.k_min,
        "e_min": summary.e_min,
        "alpha": summary.alpha,
        "resonances": [{"k_r": kr, "v_g": vg} for kr, vg in summary.resonances],
    }
    if em.delta_q == DELTA_Q_CHIRAL:
        derived["delta_q_provenance"] = "reconstructed"
    forward = [(kr, vg) for kr, vg in summary.resonances if vg > 0]
    if forward:
        k_r, _ = forward[0]
        try:
            rates = decay_rates(params, k_r, em.g)
        except BandEdgeError:
            return derived
        lo, hi = band_edge_detunings(params, em.delta_q)
        ratio = markov_validity(params, rates, em.delta_q)
        derived.update(
            {
                "k_r": k_r,
                "v_g": rates.v_g,
                "gamma_a_plus": rates.gamma_a_plus,
                "gamma_a_minus": rates.gamma_a_minus,
                "gamma_b_plus": rates.gamma_b_plus,
                "gamma_b_minus": rates.gamma_b_minus,
                "gamma_total": rates.total,
                "chiral_factor_rates": chiral_factor_from_rates(rates),
                "chiral_factor_closed_form": chiral_factor_closed_form(params, k_r),
                "band_edge_detunings": [lo, hi],
                "markov_ratio": ratio,
                "markovian": bool(ratio <= MARKOV_THRESHOLD),
            }
        )
    return derived


def run_bands(config: ExperimentConfig, outdir: Path) -> RunResult:
    params = config.model
    delta_q = config.emitters[0].delta_q if config.emitters else None
    summary = band_summary(params, n_k=config.numeric.n_k, delta_q=delta_q)
    files = [
        write_csv(
            outdir / "band.csv",
            ["k", "E_minus", "E_plus", "theta", "sigma_z_minus"],
            zip(summary.k_grid, summary.e_minus, summary.e_plus, summary.theta, summary.sigma_z_minus),
        )
    ]
    # directional rates in units g^2/(2 v_g), i.e. the pure angular factors
    kr_grid = np.linspace(0.0, np.pi, (config.numeric.n_k + 1) // 2)[1:-1]
    rate_rows = []
    for kr in kr_grid:
        fa_plus, fa_minus, fb = angular_emission_factors(params, float(kr))
        rate_rows.append(
            (float(kr), fa_plus, fa_minus, fb, fb, chiral_factor_closed_form(params, float(kr)))
        )
    files.append(
        write_csv(
            outdir / "rates.csv",
            ["k_r", "gamma_A_plus", "gamma_A_minus", "gamma_B_plus", "gamma_B_minus", "chiral_factor"],
            rate_rows,
        )
    )
    files.append(
        write_csv(
            outdir / "summary.csv",
            ["k_min", "E_min", "alpha", "eta", "two_minima"],
            [(summary.k_min, summary.e_min, summary.alpha, params.eta, summary.two_minima)],
        )
    )
    derived = {"rate_units": "g^2/(2 v_g)"}
    if config.emitters:
        derived.update(_emission_theory(config))
    else:
        minima = find_band_minima(params)
        derived.update(
            {"eta": params.eta, "k_min": minima.k_min, "e_min": minima.e_min, "alpha": minima.alpha}
        )
    return RunResult(outdir, files, derived)


def _write_trajectory(outdir: Path, snapshots) -> Path:
    times, pops, fnorm = trajectory_arrays(snapshots)
    header = ["time"] + [f"pop_e{i}" for i in range(pops.shape[1])] + ["field_norm"]
    rows = [
        (float(t), *[float(p) for p in pops[i]], float(fnorm[i])) for i, t in enumerate(times)
    ]
    return write_csv(outdir / "trajectory.csv", header, rows)


def _write_snapshot(outdir: Path, state, name="snapshot.csv") -> Path:
    snap = field_snapshot(state)
    rows = [(int(x), "A", float(v)) for x, v in zip(snap.x, snap.leg_a)]
    rows += [(int(x), "B", float(v)) for x, v in zip(snap.x, snap.leg_b)]
    return write_csv(outdir / name, ["x", "leg", "intensity"], rows)


def run_emit(config: ExperimentConfig, outdir: Path) -> RunResult:
    params = config.model
    em = config.emitters[0]
    numeric = config.numeric
    t_final = numeric.t_final if numeric.t_final is not None else 100.0
    stride = numeric.stride if numeric.stride is not None else 1.0
    origin = numeric.origin if numeric.origin is not None else min(p.x for p in em.points)

    system = assemble_system(params, [em])
    snapshots = propagate(system, initial_excitation(system), t_final, stride)
    final = snapshots[-1]
    report = directional_intensities(final, origin)

    files = [_write_trajectory(outdir, snapshots), _write_snapshot(outdir, final)]
    times, pops, _ = trajectory_arrays(snapshots)
    fit_lo = numeric.fit_t_min if numeric.fit_t_min is not None else 0.05 * t_final
    fit_hi = numeric.fit_t_max if numeric.fit_t_max is not None else 0.8 * t_final
    fitted_rate = fit_exponential_decay(times, pops[:, 0], fit_lo, fit_hi)

    derived = _emission_theory(config)
    derived.update(
        {
            "origin": origin,
            "phi_a_plus": report.phi_a_plus,
            "phi_a_minus": report.phi_a_minus,
            "phi_b_plus": report.phi_b_plus,
            "phi_b_minus": report.phi_b_minus,
            "c_numeric": report.c_numeric,
            "final_emitter_population": float(pops[-1, 0]),
            "final_norm": final.norm_sq,
            "fitted_population_rate": fitted_rate,
            "fit_window": [fit_lo, fit_hi],
        }
    )
    if "gamma_total" in derived:
        expected = 2.0 * derived["gamma_total"]
        derived["rate_relative_error"] = abs(fitted_rate - expected) / expected
    return RunResult(outdir, files, derived)


def run_reflect(config: ExperimentConfig, outdir: Path) -> RunResult:
    params = config.model
    em = config.emitters[0]
    numeric = config.numeric
    t_final = numeric.t_final if numeric.t_final is not None else 180.0
    stride = numeric.stride if numeric.stride is not None else 2.0
    result = reflection_experiment(params, em, t_final=t_final, kappa=params.kappa, stride=stride)

    files = [_write_trajectory(outdir, result.snapshots)]
    files.append(
        write_csv(
            outdir / "legs.csv",
            ["time", "leg_a_intensity", "leg_b_intensity"],
            zip(result.times, result.leg_a_intensity, result.leg_b_intensity),
        )
    )
    origin = numeric.origin if numeric.origin is not None else min(p.x for p in em.points)
    wanted = numeric.snapshot_times if numeric.snapshot_times else (t_final,)
    snap_info = []
    for t_want in wanted:
        if t_want > t_final + 1e-9:
            continue
        idx = int(np.argmin(np.abs(result.times - t_want)))
        state = result.snapshots[idx]
        label = f"{state.time:g}"
        files.append(_write_snapshot(outdir, state, name=f"snapshot_t{label}.csv"))
        leg_a = float(result.leg_a_intensity[idx])
        leg_b = float(result.leg_b_intensity[idx])
        snap_info.append(
            {
                "time": state.time,
                "leg_a_intensity": leg_a,
                "leg_b_intensity": leg_b,
                "leg_b_dominates": bool(leg_b > leg_a),
                "c_numeric": directional_intensities(state, origin).c_numeric,
            }
        )
    derived = _emission_theory(config)
    derived.update(
        {
            "kappa": params.kappa,
            "snapshots": snap_info,
            "wavefront_reached_wall": result.wavefront_reached_wall,
            "warning": result.warning,
        }
    )
    return RunResult(outdir, files, derived)


def run_bound(config: ExperimentConfig, outdir: Path) -> RunResult:
    params = config.model
    em = config.emitters[0]
    numeric = config.numeric
    t_final = numeric.t_final if numeric.t_final is not None else 1000.0
    stride = numeric.stride if numeric.stride is not None else 2.0

    result = steady_population(params, em, compute_profile=True)
    system = assemble_system(params, [em])
    snapshots = propagate(system, initial_excitation(system), t_final, stride)
    times, pops, _ = trajectory_arrays(snapshots)
    window = times >= (1.0 - numeric.plateau_fraction) * t_final
    plateau = float(np.mean(pops[window, 0]))

    files = [_write_trajectory(outdir, snapshots)]
    profile = result.profile
    rows = [(int(x), "A", float(v)) for x, v in zip(profile.x, profile.leg_a)]
    rows += [(int(x), "B", float(v)) for x, v in zip(profile.x, profile.leg_b)]
    files.append(write_csv(outdir / "profile.csv", ["x", "leg", "intensity"], rows))

    minima = find_band_minima(params)
    derived = {
        "eta": params.eta,
        "k_min": minima.k_min,
        "e_min": minima.e_min,
        "alpha": minima.alpha,
        "delta_0": result.delta_0,
        "d_s": em.d_s,
        "g_abs_kmin": result.g_abs_kmin,
        "pole_y": result.pole_y,
        "residue": result.residue,
        "steady_population": result.steady_population,
        "decoupled": result.decoupled,
        "plateau_mean": plateau,
        "plateau_window": [float(times[window][0]), float(times[-1])],
        "plateau_vs_residue": abs(plateau - result.steady_population),
        "bound_state_energy": profile.energy,
        "bound_state_emitter_weight": profile.emitter_weight,
    }
    return RunResult(outdir, files, derived)


def run_sweep_size(config: ExperimentConfig, outdir: Path) -> RunResult:
    params = config.model
    template = config.emitters[0]
    result = size_sweep(params, template, d_max=config.numeric.d_max)
    files = [
        write_csv(
            outdir / "sweep.csv",
            ["d_s", "g_abs_kmin", "pole_y", "steady_population"],
            zip(
                [int(d) for d in result.d_s],
                result.g_abs_kmin,
                result.pole_y,
                result.population,
            ),
        )
    ]
    pop = result.population
    interior = np.arange(1, len(pop) - 1)
    maxima = [int(i) for i in interior if pop[i] >= pop[i - 1] and pop[i] >= pop[i + 1]]
    minima_ds = [int(i) for i in interior if pop[i] <= pop[i - 1] and pop[i] <= pop[i + 1]]
    if len(pop) > 1 and pop[0] <= pop[1]:
        minima_ds.insert(0, 0)
    derived = {
        "contrast": result.contrast,
        "period_estimate": result.period_estimate,
        "local_maxima_d_s": maxima,
        "local_minima_d_s": minima_ds,
        "delta_q": template.delta_q,
    }
    return RunResult(outdir, files, derived)


def run_rabi(config: ExperimentConfig, outdir: Path) -> RunResult:
    params = config.model
    dipole = DipoleConfig(config.emitters[0], config.emitters[1])
    coupling = j12_closed_form(params, dipole)
    result = rabi_simulation(
        params,
        dipole,
        t_final=config.numeric.t_final,
        n_samples=config.numeric.rabi_samples,
    )
    files = [
        write_csv(
            outdir / "rabi.csv",
            ["time", "P1", "P2", "field_norm"],
            zip(result.times, result.p1, result.p2, result.field_norm),
        )
    ]
    rel = (
        abs(result.j12_fit - result.j12_closed) / result.j12_closed
        if result.j12_closed > 0 and result.j12_fit == result.j12_fit
        else None
    )
    derived = {
        "d_q": dipole.d_q,
        "d_s": [dipole.emitter1.d_s, dipole.emitter2.d_s],
        "j12_closed": result.j12_closed,
        "j12_sign": coupling.sign,
        "j12_fit": result.j12_fit,
        "j12_relative_error": rel,
        "max_p2": float(result.p2.max()),
        "max_field_norm": float(result.field_norm.max()),
        "non_perturbative": result.non_perturbative,
    }
    return RunResult(outdir, files, derived)


_RUNNERS = {
    "bands": run_bands,
    "chiral-emission": run_emit,
    "loss-reflection": run_reflect,
    "bound-state": run_bound,
    "size-sweep": run_sweep_size,
    "dipole-rabi": run_rabi,
}


def run_single(config: ExperimentConfig, outdir: Path | None = None) -> RunResult:
    """Run one experiment (no sweep fan-out) and write its manifest."""
    outdir = _resolve_outdir(config.output) if outdir is None else Path(outdir)
    started = time.perf_counter()
    result = _RUNNERS[config.experiment](config, outdir)
    manifest = {
        "experiment": config.experiment,
        "parameters": _model_manifest(config),
        "derived": result.derived,
        "outputs": [p.name for p in result.files],
        "tool_version": __version__,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    result.files.append(write_manifest(outdir / "manifest.json", manifest))
    return result


def _run_sweep_entry(args: tuple[dict, dict, str]) -> str:
    base_raw, entry, outdir = args
    raw = copy.deepcopy(base_raw)
    raw.pop("sweep", None)
    for dotted, value in entry["set"].items():
        apply_override(raw, dotted, value)
    sub = parse_config(raw)
    run_single(sub, Path(outdir))
    return entry["name"]


def run(config: ExperimentConfig, jobs: int = 1) -> list[RunResult | str]:
    """Run a config; a sweep fans out into per-entry subdirectories."""
    if not config.sweep:
        return [run_single(config)]
    base_raw = config_to_raw(config)
    root = _resolve_outdir(config.output)
    tasks = [
        (base_raw, entry, str(root / entry["name"]))
        for entry in config.sweep
    ]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_sweep_entry, tasks))
    return [_run_sweep_entry(t) for t in tasks]


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _parse_set(values: list[str]) -> dict:
    overrides = {}
    for item in values:
        if "=" not in item:
            raise ConfigError(f"--set expects PATH=VALUE, got {item!r}", field=item)
        dotted, _, raw_value = item.partition("=")
        try:
            value = json.loads(raw_value)
        except json.JSONDecodeError:
            value = raw_value
        overrides[dotted] = value
    return overrides


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ladderqed",
        description="Hofstadter-ladder waveguide QED experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("preset", help="print a fully resolved preset config as JSON")
    pre.add_argument("name", nargs="?", help=f"one of: {', '.join(preset_names())}")
    pre.add_argument("--list", action="store_true", help="list preset names")

    for cmd, experiment in _SUBCOMMAND_EXPERIMENT.items():
        p = sub.add_parser(cmd, help=f"run the {experiment} experiment")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--preset", help="start from a named preset")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="PATH=VALUE",
            help="override a config field, e.g. --set model.kappa=0.01",
        )
        p.add_argument("--output", help="output directory (overrides config)")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers for sweep entries")
    return parser


def _load_raw(args) -> dict:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both", field="config")
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        if not isinstance(raw, dict):
            raise ConfigError("config file must contain a JSON object", field=None)
        return raw
    if args.preset:
        return preset_raw(args.preset)
    raise ConfigError("an experiment needs --config or --preset", field="config")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            if args.list or args.name is None:
                print("\n".join(preset_names()))
                return 0
            print(json.dumps(preset_raw(args.name), indent=2, sort_keys=True))
            return 0

        raw = _load_raw(args)
        raw["experiment"] = _SUBCOMMAND_EXPERIMENT[args.command]
        for dotted, value in _parse_set(args.set).items():
            apply_override(raw, dotted, value)
        if args.output:
            raw["output"] = args.output
        config = parse_config(raw)
        run(config, jobs=args.jobs)
        return 0
    except LadderQEDError as exc:
        payload = {"error": str(exc)}
        field = getattr(exc, "field", None)
        if field:
            payload["field"] = field
        print(json.dumps(payload), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
