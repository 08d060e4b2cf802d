"""Command-line front end: one subcommand per study, CSV/SVG reports.

Parameter resolution is defaults, then the --config file, then explicit
flags.  Every run leaves a manifest next to its outputs, successful or
not, and never writes outside the chosen output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import distsim, faultlab, lightning, ml, report, stability, svg
from .svg import ChartStyle, DataSeries


class ConfigError(ValueError):
    """Bad flag or config-file entry; the run never starts."""


def _bool(value):
    if isinstance(value, bool):
        return value
    raise ConfigError(f"expected true/false, got {value!r}")


# Per-study parameters: name -> (caster, default).  The caster validates
# config-file values as well as command-line ones.
SCHEMAS = {
    "fault-lab": {"r_max": (float, 1.0), "k_max": (int, 4)},
    "lightning": {"n": (int, 5000)},
    "dist": {"case": (str, "A1"), "hours": (int, 200), "runs": (int, 0),
             "mode": (str, "internal"), "table": (str, "")},
    "stability": {"power_mw": (float, 1776.0), "duration_ms": (float, 100.0),
                  "sweep": (_bool, False)},
    "ml": {"svm_c": (float, 10.0), "epochs": (int, 2000), "lr": (float, 1.0),
           "mlp_seed": (int, 8), "split": (float, 0.5)},
}

# Which pseudo-random draw the global --seed feeds, per study.
SEED_DEFAULTS = {"fault-lab": 1, "lightning": 1, "dist": 1,
                 "stability": 0, "ml": 7}


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=None,
                        help="random seed (study-specific default)")
    shared.add_argument("--out", default=None,
                        help="output directory (default runs/<study>)")
    shared.add_argument("--threads", type=int, default=None,
                        help="worker cap for parallel studies (default 1)")
    shared.add_argument("--config", default=None,
                        help="JSON file with seed/out/threads and study keys")

    parser = argparse.ArgumentParser(
        prog="gridstudies",
        description="Power-system case studies: faults, lightning, "
                    "distribution, transient stability, and predictors.")
    parser.add_argument("--version", action="version",
                        version=f"gridstudies {report.__version__}")
    sub = parser.add_subparsers(dest="study", required=True)

    p = sub.add_parser("fault-lab", parents=[shared],
                       help="fault voltage atlas and nearest-neighbour study")
    p.add_argument("--r-max", dest="r_max", type=float, default=None,
                   help="largest random fault resistance in ohms")
    p.add_argument("--k-max", dest="k_max", type=int, default=None,
                   help="evaluate kNN for k = 1..k_max")

    p = sub.add_parser("lightning", parents=[shared],
                       help="Monte Carlo lightning flashover study")
    p.add_argument("--n", type=int, default=None, help="number of strokes")

    p = sub.add_parser("dist", parents=[shared],
                       help="distribution feeder time series and Monte Carlo")
    p.add_argument("--case", default=None,
                   help="feeder case, one of " + ", ".join(distsim.CASE_NAMES))
    p.add_argument("--hours", type=int, default=None, help="series length")
    p.add_argument("--runs", type=int, default=None,
                   help="Monte Carlo runs (0 skips the study)")
    p.add_argument("--mode", default=None, choices=("internal", "external"),
                   help="load draw source for Monte Carlo")
    p.add_argument("--table", default=None,
                   help="load table CSV for --mode external")

    p = sub.add_parser("stability", parents=[shared],
                       help="single-machine transient stability")
    p.add_argument("--power-mw", dest="power_mw", type=float, default=None,
                   help="machine active power in MW")
    p.add_argument("--duration-ms", dest="duration_ms", type=float,
                   default=None, help="fault duration in milliseconds")
    p.add_argument("--sweep", action="store_true", default=None,
                   help="run the power/duration grid instead of one case")

    p = sub.add_parser("ml", parents=[shared],
                       help="train predictors on the stability grid")
    p.add_argument("--svm-c", dest="svm_c", type=float, default=None,
                   help="SVM penalty parameter")
    p.add_argument("--epochs", type=int, default=None,
                   help="gradient-descent epochs for both networks")
    p.add_argument("--lr", type=float, default=None, help="learning rate")
    p.add_argument("--mlp-seed", dest="mlp_seed", type=int, default=None,
                   help="weight initialization seed")
    p.add_argument("--split", type=float, default=None,
                   help="training fraction of the grid")
    return parser


def _load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _resolve(args) -> dict:
    """Defaults, then config file, then explicit flags; strict keys."""
    schema = SCHEMAS[args.study]
    resolved = {name: default for name, (_, default) in schema.items()}
    resolved["seed"] = SEED_DEFAULTS[args.study]
    resolved["out"] = os.path.join("runs", args.study)
    resolved["threads"] = 1

    if args.config is not None:
        for key, value in _load_config_file(args.config).items():
            if key == "seed":
                resolved["seed"] = int(value)
            elif key == "out":
                resolved["out"] = str(value)
            elif key == "threads":
                resolved["threads"] = int(value)
            elif key in schema:
                caster = schema[key][0]
                try:
                    resolved[key] = caster(value)
                except ConfigError:
                    raise
                except (TypeError, ValueError):
                    raise ConfigError(
                        f"bad value for config key '{key}': {value!r}") from None
            else:
                raise ConfigError(f"unknown config key '{key}'")

    for key in ("seed", "out", "threads", *schema):
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value

    if resolved["threads"] < 1:
        raise ConfigError("threads must be >= 1")
    if args.study == "dist":
        if resolved["case"] not in distsim.CASE_NAMES:
            raise ConfigError(f"unknown case '{resolved['case']}', pick one "
                              f"of {', '.join(distsim.CASE_NAMES)}")
        if resolved["mode"] not in ("internal", "external"):
            raise ConfigError(f"unknown mode '{resolved['mode']}'")
        if resolved["runs"] > 0 and resolved["mode"] == "external" \
                and not resolved["table"]:
            raise ConfigError("external mode needs a load table "
                              "(--table FILE)")
    resolved["study"] = args.study
    return resolved


# -- study runners -------------------------------------------------------------

def _write_summary(out, man, lines):
    path = os.path.join(out, "summary.txt")
    report.write_text(path, lines)
    man.add_output(path)


def _write_chart(out, man, name, text):
    path = os.path.join(out, name)
    svg.write_svg(path, text)
    man.add_output(path)


def _run_fault_lab(cfg, out, man):
    train_rows = faultlab.build_dataset(faultlab.enumerate_train_cases())
    test_rows = faultlab.build_dataset(
        faultlab.sample_test_cases(cfg["seed"], cfg["r_max"]))
    for name, rows in (("train.csv", train_rows), ("test.csv", test_rows)):
        path = os.path.join(out, name)
        faultlab.write_dataset(rows, path)
        man.add_output(path)

    train = faultlab.rows_to_dataset(train_rows)
    test = faultlab.rows_to_dataset(test_rows)
    ks = list(range(1, cfg["k_max"] + 1))
    agreements = [ml.evaluate(ml.knn_fit(train, k), test).true_fraction
                  for k in ks]
    best = ks[int(np.argmax(agreements))]
    pairs = [("Training cases", len(train_rows)),
             ("Test cases", len(test_rows)),
             ("Largest fault resistance (ohm)", cfg["r_max"])]
    pairs += [(f"Agreement (k={k})", round(a, 6))
              for k, a in zip(ks, agreements)]
    pairs.append(("Best k", best))
    _write_summary(out, man, report.summary_block(pairs))

    chart = svg.render_series(
        [DataSeries(np.asarray(ks, float), np.asarray(agreements),
                    "test agreement")],
        ChartStyle("Nearest-neighbour fault identification",
                   "k", "agreement"))
    _write_chart(out, man, "agreement.svg", chart)


def _run_lightning(cfg, out, man):
    study = lightning.StudyConfig(n=cfg["n"], seed=cfg["seed"],
                                  threads=cfg["threads"])
    result = lightning.run_study(study)

    events = os.path.join(out, "events.csv")
    lightning.write_events_csv(events, result)
    man.add_output(events)
    _write_summary(out, man, lightning.summary_lines(result))

    on_line = np.asarray([im.on_line for im in result.impacts])
    chart = svg.render_histogram(
        result.sample.peak_ka[on_line], 40,
        ChartStyle("Peak current of strokes reaching the line",
                   "peak current (kA)", "count"))
    _write_chart(out, man, "peaks.svg", chart)

    groups = []
    for label in (lightning.WIRE_SHIELD, lightning.WIRE_PHASE_A,
                  lightning.WIRE_PHASE_C):
        idx = [i for i, im in enumerate(result.impacts)
               if im.wire_label == label]
        if idx:
            groups.append(DataSeries(result.sample.x_m[idx],
                                     result.sample.y_m[idx], label))
    if groups:
        chart = svg.render_scatter(
            groups, ChartStyle("Stroke terminations along the line",
                               "x (m)", "y (m)"))
        _write_chart(out, man, "impacts.svg", chart)


def _run_dist(cfg, out, man):
    feeder = distsim.build_case(cfg["case"], hours=cfg["hours"])
    daily = distsim.run_daily(feeder, hours=cfg["hours"])

    path = os.path.join(out, "daily.csv")
    distsim.write_daily_csv(daily, path)
    man.add_output(path)

    lines = [f"Case = {cfg['case']}", f"Hours = {cfg['hours']}"]
    for name in daily.element_names():
        lines.append("")
        block = [(f"{name} {label}", round(value, 3))
                 for label, value in distsim.meter_rows(daily.meter(name))]
        lines.extend(report.summary_block(block))

    hours = np.asarray([rec.hour for rec in daily.records], float)
    source_kw = np.asarray([rec.snapshot.source_kw for rec in daily.records])
    chart = svg.render_series(
        [DataSeries(hours, source_kw, "source kW")],
        ChartStyle(f"Feeder {cfg['case']} source power", "hour", "kW"))
    _write_chart(out, man, "source.svg", chart)

    if cfg["runs"] > 0:
        table = None
        if cfg["mode"] == "external":
            table = distsim.read_load_table(cfg["table"])
        mc = distsim.run_monte_carlo(feeder, cfg["runs"], mode=cfg["mode"],
                                     seed=cfg["seed"], table=table)
        path = os.path.join(out, "mc.csv")
        distsim.write_mc_csv(mc, path)
        man.add_output(path)

        lines.append("")
        lines.append(f"Monte Carlo runs = {cfg['runs']}")
        for name, st in mc.stats().items():
            block = [(f"{name} mean kW", round(st.mean_kw, 3)),
                     (f"{name} std kW", round(st.std_kw, 3)),
                     (f"{name} mean kvar", round(st.mean_kvar, 3)),
                     (f"{name} std kvar", round(st.std_kvar, 3))]
            lines.extend(report.summary_block(block))

        first = feeder.loads[0].name
        chart = svg.render_histogram(
            mc.load_kva[:, 0].real, 40,
            ChartStyle(f"{first} phase-A power over {cfg['runs']} runs",
                       "kW", "count"))
        _write_chart(out, man, "mc.svg", chart)

    _write_summary(out, man, lines)


def _run_stability(cfg, out, man):
    model = stability.SmibModel()
    if cfg["sweep"]:
        rows = stability.sweep(model)
        path = os.path.join(out, "sweep.csv")
        stability.write_sweep_csv(rows, path)
        man.add_output(path)

        groups = []
        for flag, label in ((0, "stable"), (1, "unstable")):
            sel = [r for r in rows if r.stability == flag]
            if sel:
                groups.append(DataSeries(
                    np.asarray([r.duration_ms for r in sel]),
                    np.asarray([r.power_mw for r in sel]), label))
        chart = svg.render_scatter(
            groups, ChartStyle("Stability over the power/duration grid",
                               "fault duration (ms)", "power (MW)"))
        _write_chart(out, man, "sweep.svg", chart)

        pairs = [("Grid points", len(rows)),
                 ("Stable points", sum(1 for r in rows if r.stability == 0)),
                 ("Unstable points", sum(1 for r in rows if r.stability == 1))]
        _write_summary(out, man, report.summary_block(pairs))
        return

    op = stability.OperatingPoint.from_power_factor(
        cfg["power_mw"] / model.s_base_mva)
    fault = stability.FaultEvent(duration=cfg["duration_ms"] / 1e3)
    result = stability.simulate(model, op, fault)

    path = os.path.join(out, "trace.csv")
    stability.write_trace_csv(result, path)
    man.add_output(path)

    chart = svg.render_series(
        [DataSeries(result.trace.times,
                    np.degrees(result.trace.delta_rad), "rotor angle")],
        ChartStyle(f"{cfg['power_mw']:g} MW, "
                   f"{cfg['duration_ms']:g} ms fault", "t (s)", "delta (deg)"))
    _write_chart(out, man, "trace.svg", chart)

    pairs = [("Power (MW)", cfg["power_mw"]),
             ("Fault duration (ms)", cfg["duration_ms"]),
             ("Stability", result.stability_flag),
             ("Initial angle (deg)", round(np.degrees(result.delta0_rad), 3)),
             ("Transient emf (pu)", round(result.e_prime_pu, 4))]
    _write_summary(out, man, report.summary_block(pairs))


def _run_ml(cfg, out, man):
    rows = stability.sweep()
    dataset = stability.sweep_to_dataset(rows)
    path = os.path.join(out, "dataset.csv")
    stability.write_sweep_csv(rows, path)
    man.add_output(path)

    train, test = ml.split(dataset, cfg["split"], cfg["seed"])
    scaler = ml.MinMaxScaler().fit(train.features)
    tr = ml.Dataset(scaler.transform(train.features), train.labels,
                    dataset.feature_names, dataset.label_name)
    te = ml.Dataset(scaler.transform(test.features), test.labels,
                    dataset.feature_names, dataset.label_name)

    svm_model = ml.svm_train(tr, C=cfg["svm_c"])
    big = ml.mlp_train(tr, (2, 8, 8, 1), seed=cfg["mlp_seed"],
                       epochs=cfg["epochs"], lr=cfg["lr"])
    small = ml.mlp_train(tr, (2, 1, 1), seed=cfg["mlp_seed"],
                         epochs=cfg["epochs"], lr=cfg["lr"])
    for name, model in (("svm.json", svm_model), ("mlp.json", big),
                        ("mlp_small.json", small)):
        path = os.path.join(out, name)
        ml.save_model(model, path)
        man.add_output(path)

    fresh = ml.mlp_init((2, 8, 8, 1), classes=(0, 1), seed=cfg["mlp_seed"])
    grad_err = ml.gradient_check(fresh, tr.features[:10], tr.labels[:10])

    pairs = [("Grid points", dataset.n),
             ("Training rows", tr.n),
             ("Test rows", te.n),
             ("SVM test agreement",
              round(ml.evaluate(svm_model, te).true_fraction, 6)),
             ("MLP (8,8) test agreement",
              round(ml.evaluate(big, te).true_fraction, 6)),
             ("MLP (1) test agreement",
              round(ml.evaluate(small, te).true_fraction, 6)),
             ("Gradient check max relative error", f"{grad_err:.3e}")]
    _write_summary(out, man, report.summary_block(pairs))

    pred = svm_model.predict(te.features)
    groups = []
    for flag, label in ((0, "predicted stable"), (1, "predicted unstable")):
        sel = pred == flag
        if np.any(sel):
            groups.append(DataSeries(test.features[sel, 1],
                                     test.features[sel, 0], label))
    chart = svg.render_scatter(
        groups, ChartStyle("SVM verdicts on held-out grid points",
                           "fault duration (ms)", "power (MW)"))
    _write_chart(out, man, "predictions.svg", chart)


RUNNERS = {"fault-lab": _run_fault_lab, "lightning": _run_lightning,
           "dist": _run_dist, "stability": _run_stability, "ml": _run_ml}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    manifest = report.RunManifest(config=cfg, seed=cfg["seed"])
    start = time.perf_counter()
    try:
        RUNNERS[cfg["study"]](cfg, out, manifest)
    except Exception as exc:
        manifest.elapsed_s = time.perf_counter() - start
        manifest.error = f"{type(exc).__name__}: {exc}"
        report.write_manifest(out, manifest)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest.elapsed_s = time.perf_counter() - start
    report.write_manifest(out, manifest)
    print(f"{cfg['study']}: {len(manifest.outputs)} files in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
