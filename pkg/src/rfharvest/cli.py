"""Command-line front end.

Subcommands: ``fit``, ``outage``, ``energy``, ``charging``, ``rfid``,
``validate``.  Each takes ``--config`` (JSON scenario document),
``--output`` (file path, default stdout), ``--seed`` (overrides the
config seed) and ``--format csv|json``.  CSV output is deterministic for
a given config and seed, with 12-significant-digit number formatting.

Exit codes: 0 success, 2 configuration or validation error, 3 numerical
convergence error, 4 acceptance-suite failure (``validate`` only).
"""

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import acceptance, datasets, density, harvesters, montecarlo, rfid, stats
from .config import ScenarioConfig, default_config, dump_config, load_config
from .errors import (AliasingError, ConvergenceError, FitDivergenceError,
                     FitInfeasibleError, SupportOverflowError, ValidationError)
from .units import dbm_to_mw, mw_to_dbm

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VALIDATE = 4

_NUMERIC_ERRORS = (ConvergenceError, FitInfeasibleError, FitDivergenceError,
                   AliasingError, SupportOverflowError)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return format(float(value), ".12g")


def _emit(columns, rows, fmt: str, output, comments=()):
    if fmt == "csv":
        lines = [f"# {line}" for line in comments]
        lines.append(",".join(columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    else:
        payload = {"columns": list(columns),
                   "rows": [[v if isinstance(v, str) else float(v) for v in row]
                            for row in rows]}
        if comments:
            payload["comments"] = list(comments)
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    _write(text, output)


def _write(text: str, output):
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _models(cfg: ScenarioConfig):
    """Build every harvester model the config describes."""
    curve = datasets.resolve_curve(cfg.harvester.dataset)
    ground_truth = harvesters.ground_truth_from_fit(curve, cfg.harvester.efficiency_degree)
    if cfg.harvester.spacing == "datapoints":
        pwl = harvesters.PiecewiseLinearHarvester.from_curve(curve)
    else:
        pwl = harvesters.PiecewiseLinearHarvester.from_model(
            ground_truth, cfg.harvester.segments, cfg.harvester.spacing)
    baselines = {
        "linear": harvesters.LinearHarvester(cfg.harvester.eta_l),
        "cl": harvesters.ConstantLinearHarvester(cfg.harvester.eta_cl,
                                                 curve.sensitivity_mw),
        "clc": harvesters.ConstantLinearConstantHarvester(
            cfg.harvester.eta_clc, curve.sensitivity_mw, curve.saturation_mw),
    }
    return curve, ground_truth, pwl, baselines


def _distance_values(cfg: ScenarioConfig):
    sweep = cfg.sweep("distance_m")
    if sweep is not None:
        return sweep.values()
    return np.asarray([cfg.link["distance_m"]], dtype=float)


def cmd_fit(cfg: ScenarioConfig, args) -> int:
    curve = datasets.resolve_curve(cfg.harvester.dataset)
    eff = harvesters.fit_efficiency(curve, cfg.harvester.efficiency_degree)
    comments = [f"dataset={cfg.harvester.dataset}",
                f"degree={eff.degree}",
                f"max_residual={_fmt(eff.max_residual)}",
                f"sensitivity_mw={_fmt(eff.sensitivity_mw)}",
                f"saturation_mw={_fmt(eff.saturation_mw)}"]
    rows = [[i, w] for i, w in enumerate(eff.dbm_coefficients)]
    _emit(["coefficient_index", "dbm_coefficient"], rows, args.format, args.output,
          comments)
    return EXIT_OK


def cmd_outage(cfg: ScenarioConfig, args) -> int:
    ch = cfg.fading_channel()
    sens_sweep = cfg.sweep("sensitivity_dbm")
    if sens_sweep is not None:
        sens_values = dbm_to_mw(sens_sweep.values())
    else:
        sens_values = np.asarray([datasets.resolve_curve(cfg.harvester.dataset)
                                  .sensitivity_mw])
    pt_sweep = cfg.sweep("transmit_power_dbm")
    if pt_sweep is not None:
        pt_values = dbm_to_mw(pt_sweep.values())
    else:
        pt_values = np.asarray([cfg.link["transmit_power_mw"]], dtype=float)
    rows = []
    for sens in sens_values:
        for d in _distance_values(cfg):
            for p_t in pt_values:
                link = cfg.link_budget(distance_m=d, transmit_power_mw=p_t)
                rows.append([float(mw_to_dbm(sens)), float(d), float(mw_to_dbm(p_t)),
                             stats.sensitivity_outage(link, ch, float(sens))])
    _emit(["sensitivity_dbm", "d_m", "p_t_dbm", "outage_probability"],
          rows, args.format, args.output)
    return EXIT_OK


def cmd_energy(cfg: ScenarioConfig, args) -> int:
    ch = cfg.fading_channel()
    curve, ground_truth, pwl, baselines = _models(cfg)
    sigmoid = harvesters.fit_sigmoid(curve)
    quadratic = harvesters.fit_quadratic(curve)
    t_p = cfg.charging.spec().packet_duration_s
    pt_sweep = cfg.sweep("transmit_power_dbm")
    if pt_sweep is not None:
        scenarios = [(cfg.link["distance_m"], p_t) for p_t in dbm_to_mw(pt_sweep.values())]
    else:
        scenarios = [(d, cfg.link["transmit_power_mw"]) for d in _distance_values(cfg)]
    rows = []
    for index, (d, p_t) in enumerate(scenarios):
        link = cfg.link_budget(distance_m=d, transmit_power_mw=p_t)
        plan = montecarlo.SimulationPlan(
            trials=cfg.numerics.mc_trials, blocks_per_trial=1,
            seed=cfg.numerics.seed + index, model=ground_truth, link=link, channel=ch,
            chunk_size=cfg.numerics.chunk_size, workers=cfg.numerics.workers)
        gt_energy = montecarlo.simulate_energy(plan, t_p)
        rtol = cfg.numerics.quadrature_rtol
        row = [float(d), float(mw_to_dbm(p_t)),
               gt_energy.mean_energy_mws, gt_energy.std_error,
               t_p * stats.expected_power_piecewise(link, ch, pwl),
               t_p * stats.expected_power_linear(link, ch, cfg.harvester.eta_l),
               t_p * stats.expected_power_cl(link, ch, baselines["cl"]),
               t_p * stats.expected_power_clc(link, ch, baselines["clc"]),
               t_p * stats.expected_power_numeric(link, ch, sigmoid, rtol=rtol),
               t_p * stats.expected_power_numeric(link, ch, quadratic, rtol=rtol)]
        rows.append(row)
    _emit(["d_m", "p_t_dbm", "ground_truth_mc_mws", "ground_truth_mc_se_mws",
           "piecewise_mws", "linear_mws", "cl_mws", "clc_mws", "sigmoid_mws",
           "quadratic_mws"], rows, args.format, args.output)
    return EXIT_OK


def cmd_charging(cfg: ScenarioConfig, args) -> int:
    ch = cfg.fading_channel()
    _, _, pwl, _ = _models(cfg)
    spec = cfg.charging.spec()
    rows = []
    density_rows = []
    for index, d in enumerate(_distance_values(cfg)):
        link = cfg.link_budget(distance_m=d)
        dist = stats.harvested_power_distribution(link, ch, pwl)
        mean = stats.expected_power_piecewise(link, ch, pwl)
        var = stats.piecewise_power_variance(link, ch, pwl)
        fp = density.charging_time_analysis(dist, mean, var, spec.threshold_mw,
                                            intervals=cfg.numerics.grid_intervals)
        analytic = density.expected_charging_blocks(fp)
        plan = montecarlo.SimulationPlan(
            trials=cfg.numerics.mc_trials, blocks_per_trial=max(4 * fp.n_max, 64),
            seed=cfg.numerics.seed + index, model=pwl, link=link, channel=ch,
            chunk_size=cfg.numerics.chunk_size, workers=cfg.numerics.workers)
        samples = montecarlo.simulate_first_passage(plan, spec.threshold_mw)
        rows.append([float(d), spec.threshold_mw, analytic,
                     density.expected_charging_time(fp, cfg.charging.coherence_time_s),
                     samples.mean_blocks(), fp.residual])
        if args.density_output is not None and index == 0:
            for n in cfg.charging.density_blocks:
                grid = density.default_grid(mean, var, n,
                                            intervals=cfg.numerics.grid_intervals)
                evolved = density.sum_density(density.discretize(dist, grid), n)
                nodes = grid.nodes()
                for j in range(0, grid.points, max(1, grid.intervals // 2048)):
                    density_rows.append([n, float(nodes[j]), float(evolved.values[j])])
    _emit(["d_m", "threshold_mw", "expected_blocks", "expected_time_s",
           "expected_blocks_mc", "truncation_residual"], rows, args.format, args.output)
    if args.density_output is not None:
        _emit(["blocks", "accumulated_mw", "density_per_mw"], density_rows,
              args.format, args.density_output)
    return EXIT_OK


def cmd_rfid(cfg: ScenarioConfig, args) -> int:
    ch = cfg.fading_channel()
    _, ground_truth, pwl, baselines = _models(cfg)
    pc_sweep = cfg.sweep("tag_consumption_mw")
    if pc_sweep is not None:
        pc_values = pc_sweep.values()
    else:
        pc_values = np.asarray([cfg.rfid["tag_consumption_mw"]], dtype=float)
    closed_models = {"piecewise": pwl, "linear": baselines["linear"],
                     "cl": baselines["cl"], "clc": baselines["clc"]}
    columns = ["d_m", "p_c_mw"]
    for name in closed_models:
        columns += [name, f"{name}_mc", f"{name}_mc_se"]
    columns += ["ground_truth_mc", "ground_truth_mc_se"]
    rows = []
    row_index = 0
    for d in _distance_values(cfg):
        link = cfg.link_budget(distance_m=d)
        for p_c in pc_values:
            scn = cfg.rfid_scenario(tag_consumption_mw=p_c)
            row = [float(d), float(p_c)]
            for name, model in closed_models.items():
                closed = rfid.success_probability(scn, link, ch, model)
                mc = rfid.success_probability_mc(
                    scn, link, ch, model, cfg.numerics.mc_trials,
                    seed=cfg.numerics.seed + row_index,
                    chunk_size=cfg.numerics.chunk_size, workers=cfg.numerics.workers)
                row += [closed, mc.frequency, mc.std_error]
            gt_mc = rfid.success_probability_mc(
                scn, link, ch, ground_truth, cfg.numerics.mc_trials,
                seed=cfg.numerics.seed + row_index,
                chunk_size=cfg.numerics.chunk_size, workers=cfg.numerics.workers)
            row += [gt_mc.frequency, gt_mc.std_error]
            rows.append(row)
            row_index += 1
    _emit(columns, rows, args.format, args.output)
    return EXIT_OK


def cmd_validate(cfg: ScenarioConfig, args) -> int:
    if args.criteria:
        try:
            indices = sorted({int(part) for part in args.criteria.split(",")})
        except ValueError:
            raise ValidationError(f"invalid criteria list {args.criteria!r}") from None
        unknown = set(indices) - set(acceptance.CRITERION_INDICES)
        if unknown:
            raise ValidationError(f"unknown criteria: {sorted(unknown)}")
    else:
        indices = list(acceptance.CRITERION_INDICES)
    results = []
    for index in indices:
        result = acceptance.run_criterion(index)
        print(result.summary_line())
        results.append(result)
    payload = acceptance.report(results)
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.output is not None:
        _write(text, args.output)
    return EXIT_OK if payload["all_passed"] else EXIT_VALIDATE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfharvest",
        description="Harvested-power statistics under Nakagami block fading")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("fit", "fit the efficiency polynomial of a dataset"),
            ("outage", "sensitivity-outage probability table"),
            ("energy", "expected harvested energy per model"),
            ("charging", "expected charging time via density evolution"),
            ("rfid", "RFID success probability per model"),
            ("validate", "run the acceptance criteria")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="path to the JSON scenario config")
        cmd.add_argument("--output", help="output file (default: stdout)")
        cmd.add_argument("--seed", type=int, help="override the config seed")
        cmd.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "charging":
            cmd.add_argument("--density-output",
                             help="also dump accumulated-power densities here")
        if name == "validate":
            cmd.add_argument("--criteria",
                             help="comma-separated criterion indices (default: all)")
    sub.add_parser("print-config", help="print the default config document")
    return parser


_COMMANDS = {"fit": cmd_fit, "outage": cmd_outage, "energy": cmd_energy,
             "charging": cmd_charging, "rfid": cmd_rfid, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "print-config":
        sys.stdout.write(dump_config(default_config()))
        return EXIT_OK
    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.seed is not None:
            cfg = dataclasses.replace(
                cfg, numerics=dataclasses.replace(cfg.numerics, seed=args.seed))
        return _COMMANDS[args.command](cfg, args)
    except (ValidationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
