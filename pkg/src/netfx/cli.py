"""Command-line entry point ``netfx``.

Exit codes: 0 success, 2 configuration or input error, 3 identifiability
failure, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, GraphError, IdentifiabilityError, NoClosedFormError, SingularDesignError
from .estimator import VARIANTS, adjust_and_estimate
from .graph import d_separated, enumerate_valid_adjustment_sets, format_dag, read_dag
from .interference import FeatureSpec, degree_scaling_slope, dependency_graph, max_degree, read_network, write_network
from .panel import (PanelSchema, ingest_panel, mask_study_graph, mask_study_schema, observational_table,
                    run_observational, synthetic_panel)
from .sem import Dataset, parse_generator, simulate, simulation_graph, preset_sem
from .study import PRESETS, load_study_config, preset, run_study

EXIT_OK, EXIT_CONFIG, EXIT_IDENT, EXIT_NUMERIC = 0, 2, 3, 4


def _csv_list(text: str | None) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_study(args) -> int:
    if args.config:
        cfg = load_study_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("give --config or --preset")
    overrides = {}
    if args.n_jobs is not None:
        overrides["n_jobs"] = args.n_jobs
    if args.nrep_graph is not None:
        overrides["nrep_graph"] = args.nrep_graph
    if args.nrep_data is not None:
        overrides["nrep_data"] = args.nrep_data
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        from dataclasses import replace
        cfg = replace(cfg, **overrides)
    out = args.output or cfg.output or "study-output"

    def progress(done, total):
        if args.verbose:
            print(f"\r{done}/{total} graphs", end="", file=sys.stderr)

    table = run_study(cfg, progress=progress)
    if args.verbose:
        print(file=sys.stderr)
    table.write(out, plots=not args.no_plots)
    print(f"wrote results to {out}")
    header = "N".ljust(8) + "".join(v.rjust(14) for v in table.variants)
    for name in ("bias", "rmse", "log_variance"):
        print(f"\n{name}\n{header}")
        for i, n in enumerate(table.sizes):
            print(str(n).ljust(8) + "".join(f"{x:14.5f}" for x in table.metric(name)[i]))
    return EXIT_OK


def cmd_estimate(args) -> int:
    g = read_dag(args.graph)
    net = read_network(args.network) if args.network else None
    spec = FeatureSpec.parse(args.feature) if args.feature else (FeatureSpec.parse("frac-parents") if net else None)
    ds = Dataset.read_csv(args.data, net, spec)
    if net is not None and net.n_units != ds.n_units:
        raise ConfigError(f"network has {net.n_units} units but the data has {ds.n_units} rows")
    if spec is not None and spec.n_features != ds.n_features:
        raise ConfigError(f"feature spec has {spec.n_features} features but the data has {ds.n_features}")
    adjust = "auto" if args.adjust == "auto" else _csv_list(args.adjust)
    observed = _csv_list(args.observed) if args.observed else None
    report = adjust_and_estimate(ds, g, args.pi, args.eta, adjustment=adjust, observed=observed,
                                 variant=args.variant, level=args.level, mc_reps=args.mc_reps, seed=args.seed)
    report.notes.append(f"inputs: data={args.data} graph={args.graph} network={args.network}")
    _emit(report.to_json(), args.output)
    return EXIT_OK


def cmd_depgraph(args) -> int:
    net = read_network(args.network)
    spec = FeatureSpec.parse(args.feature)
    d = dependency_graph(net, spec)
    lines = [f"# n_units={d.n_units} max_degree={max_degree(d)}"]
    lines += [f"{i + 1}\t{j + 1}" for i, j in d.edges()]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_adjsets(args) -> int:
    g = read_dag(args.graph)
    a = _csv_list(args.exposure)
    if args.candidates:
        cand = _csv_list(args.candidates)
    else:
        cand = sorted(set(g.nodes_with_role("covariate")) - set(a) - {args.outcome})
    sets = enumerate_valid_adjustment_sets(g, a, args.outcome, cand)
    if args.json:
        print(json.dumps([sorted(z) for z in sets]))
    else:
        for z in sets:
            print("{" + ", ".join(sorted(z)) + "}")
    if not sets:
        print("no valid adjustment set among the candidates", file=sys.stderr)
        return EXIT_IDENT
    return EXIT_OK


def cmd_dsep(args) -> int:
    g = read_dag(args.graph)
    result = d_separated(g, _csv_list(args.a), _csv_list(args.b), _csv_list(args.given))
    print("true" if result else "false")
    return EXIT_OK


def cmd_slopes(args) -> int:
    gen = parse_generator(args.generator)
    sizes = [int(s) for s in _csv_list(args.sizes)]
    res = degree_scaling_slope(gen, FeatureSpec.parse(args.feature), sizes, args.reps, args.seed, args.n_jobs)
    print("N\tavg_max_degree")
    for n, a in zip(res.sizes, res.avg_max_degree):
        print(f"{n}\t{a:.4f}")
    print(f"slope\t{res.slope:.4f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    gen = parse_generator(args.generator)
    cfg = preset_sem(args.sem)
    spec = FeatureSpec.parse(args.feature)
    rng = np.random.default_rng(args.seed)
    net = gen(args.n, rng)
    ds = simulate(cfg, net, spec, rng)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    ds.to_csv(out / "data.csv")
    write_network(net, out / "network.tsv")
    (out / "graph.dag").write_text(format_dag(simulation_graph()))
    print(f"wrote data.csv, network.tsv and graph.dag to {out}")
    return EXIT_OK


def cmd_observational(args) -> int:
    schema = mask_study_schema() if args.schema == "mask" else PanelSchema(
        outcome=args.outcome, covariates=tuple(_csv_list(args.covariates)))
    panel = ingest_panel(args.data, args.adjacency, schema)
    g = read_dag(args.graph) if args.graph else mask_study_graph()
    adjust = "auto" if args.adjust == "auto" else _csv_list(args.adjust)
    reports = run_observational(panel, g, VARIANTS, args.pi, args.eta, adjust, args.level)
    table = observational_table(reports)
    print(f"rows used: {panel.n_rows}, rows dropped: {panel.n_dropped}, "
          f"adjustment set: {{{', '.join(reports['full'].adjustment_set)}}}")
    print(table.to_string(index=False, float_format=lambda x: f"{x:.4f}"))
    if args.output:
        Path(args.output).write_text(json.dumps({v: r.to_dict() for v, r in reports.items()}, indent=2))
    return EXIT_OK


def cmd_panel_fixture(args) -> int:
    fx = synthetic_panel(seed=args.seed)
    data, adj = fx.write(args.output)
    print(f"wrote {data} and {adj}; true effect {fx.true_tau:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netfx", description="Global treatment effects under network interference.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("study", help="run a replication study")
    s.add_argument("--config", help="TOML study configuration")
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--output")
    s.add_argument("--n-jobs", type=int)
    s.add_argument("--nrep-graph", type=int)
    s.add_argument("--nrep-data", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--no-plots", action="store_true")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_study)

    s = sub.add_parser("estimate", help="estimate a global effect from a dataset")
    s.add_argument("--data", required=True)
    s.add_argument("--graph", required=True)
    s.add_argument("--pi", type=float, required=True)
    s.add_argument("--eta", type=float, required=True)
    s.add_argument("--variant", choices=VARIANTS, default="full")
    s.add_argument("--adjust", default="auto", help="'auto' or comma-separated covariates")
    s.add_argument("--observed", help="covariates available for adjustment (default: all data columns)")
    s.add_argument("--network", help="TSV network used to compute the weights")
    s.add_argument("--feature", help="feature spec, e.g. frac-parents")
    s.add_argument("--level", type=float, default=0.95)
    s.add_argument("--mc-reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("depgraph", help="interference dependency graph of a network")
    s.add_argument("--network", required=True)
    s.add_argument("--feature", default="frac-parents")
    s.add_argument("--output")
    s.set_defaults(func=cmd_depgraph)

    s = sub.add_parser("adjsets", help="enumerate valid adjustment sets")
    s.add_argument("--graph", required=True)
    s.add_argument("--exposure", required=True)
    s.add_argument("--outcome", required=True)
    s.add_argument("--candidates")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_adjsets)

    s = sub.add_parser("dsep", help="test d-separation")
    s.add_argument("--graph", required=True)
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--given", default="")
    s.set_defaults(func=cmd_dsep)

    s = sub.add_parser("slopes", help="growth of the maximal dependency-graph degree")
    s.add_argument("--generator", required=True, help="er:10/N, er:0.2, er:N^-2/3, family or lattice")
    s.add_argument("--sizes", required=True)
    s.add_argument("--reps", type=int, default=100)
    s.add_argument("--feature", default="frac-parents")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n-jobs", type=int, default=1)
    s.set_defaults(func=cmd_slopes)

    s = sub.add_parser("simulate", help="draw one dataset and write data, network and graph files")
    s.add_argument("--generator", default="er:10/N")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--sem", default="erdos-renyi", choices=("erdos-renyi", "family", "lattice"))
    s.add_argument("--feature", default="frac-parents")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("observational", help="four-estimator comparison on panel data")
    s.add_argument("--data", required=True)
    s.add_argument("--adjacency", required=True)
    s.add_argument("--graph")
    s.add_argument("--schema", choices=("mask", "plain"), default="mask")
    s.add_argument("--outcome", default="Y")
    s.add_argument("--covariates")
    s.add_argument("--pi", type=float, default=1.0)
    s.add_argument("--eta", type=float, default=0.0)
    s.add_argument("--adjust", default="auto")
    s.add_argument("--level", type=float, default=0.95)
    s.add_argument("--output")
    s.set_defaults(func=cmd_observational)

    s = sub.add_parser("panel-fixture", help="write a synthetic panel with a known effect")
    s.add_argument("--output", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_panel_fixture)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IdentifiabilityError as exc:
        print(f"identifiability error: {exc}", file=sys.stderr)
        return EXIT_IDENT
    except (SingularDesignError, NoClosedFormError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, GraphError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
