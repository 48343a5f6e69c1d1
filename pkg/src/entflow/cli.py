"""Command line interface.

Subcommands: sample, run, langevin, aggregate, collapse, fss, hist.  Each
takes --config <json file> plus overrides.  Exit codes: 0 success, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dynamics, models, pipeline, spectral

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_config(args) -> dict:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    # flat overrides
    for key in ("model", "L", "realizations", "log_base", "chi0_recipe"):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "seed", None) is not None:
        cfg["master_seed"] = args.seed
    if getattr(args, "omega_estimator", None) is not None:
        cfg["omega_estimator"] = args.omega_estimator
    params = cfg.setdefault("params", {})
    for key in ("b", "h", "D"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if getattr(args, "E", None) is not None:
        cfg["E_targets"] = args.E
    return cfg


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--model", choices=[m.value for m in models.Model])
    p.add_argument("--L", type=int)
    p.add_argument("--b", type=float, nargs="+")
    p.add_argument("--h", type=float, nargs="+")
    p.add_argument("--D", type=float, nargs="+")
    p.add_argument("--E", type=float, nargs="+")
    p.add_argument("--realizations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--log-base", dest="log_base", choices=["2", "e"])
    p.add_argument("--chi0-recipe", dest="chi0_recipe")
    p.add_argument("--omega-estimator", dest="omega_estimator",
                   choices=spectral.OMEGA_ESTIMATORS)
    p.add_argument("--out", required=True)


def cmd_sample(args) -> int:
    cfg = _load_config(args)
    spec = models.build_spec(cfg["model"], cfg["L"],
                             _single_params(cfg), cfg.get("gamma", 0.5),
                             cfg.get("master_seed", 0))
    sampler = {models.Model.QREM: models.sample_qrem,
               models.Model.RFHM: models.sample_rfhm}[spec.model]
    sample = sampler(spec, cfg.get("realization_index", 0))
    np.savez(args.out, matrix=sample.matrix,
             labels=np.array(sample.basis.labels),
             seed_used=sample.seed_used, spec=spec.to_json())
    print(f"wrote {args.out}: {spec.model.value} N={spec.N}")
    return 0


def _single_params(cfg) -> dict:
    return {k: (v[0] if isinstance(v, list) else v)
            for k, v in cfg["params"].items()}


def cmd_run(args) -> int:
    cfg = _load_config(args)
    n = pipeline.run(cfg, args.out,
                     progress=(print if args.verbose else None))
    print(f"wrote {n} records to {args.out}")
    return 0


def cmd_langevin(args) -> int:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    lcfg = cfg.get("langevin", cfg)
    n = lcfg.get("N_A", 8) * lcfg.get("N_B", 8)
    grid = lcfg.get("lambda_grid") or np.geomspace(
        0.01 / n, 40.0 / n, 40).tolist()
    config = dynamics.LangevinConfig(
        N_A=lcfg.get("N_A", 8), N_B=lcfg.get("N_B", 8),
        ensemble_size=lcfg.get("ensemble_size", 500),
        lambda_grid=np.asarray(grid, dtype=float),
        d_lambda=lcfg.get("d_lambda"),
        dyson_beta=lcfg.get("dyson_beta", 1),
        init=lcfg.get("init", "weak_separability"),
        q=lcfg.get("q", 2.0),
        seed=args.seed if args.seed is not None else lcfg.get("seed", 0))
    result = dynamics.evolve(config, store_trajectories=False)
    cols = list(result.moments)
    with open(args.out, "w") as fh:
        fh.write(pipeline.CURVE_SCHEMA + "\n")
        fh.write(",".join(cols) + "\n")
        for i in range(len(result.lambda_grid)):
            fh.write(",".join(repr(float(result.moments[c][i]))
                              for c in cols) + "\n")
    print(f"wrote moment curves ({dynamics.BACKEND} backend, "
          f"{result.guard_trips} guard trips) to {args.out}")
    return 0


def cmd_aggregate(args) -> int:
    records = pipeline.read_records(args.records)
    label_fields = tuple(args.label_fields.split(","))
    curves = pipeline.aggregate(records, measure=args.measure,
                                x_field=args.x_field,
                                label_fields=label_fields,
                                normalize=args.normalize)
    pipeline.write_curves_csv(curves, args.out)
    print(f"wrote {len(curves)} curves to {args.out}")
    return 0


def cmd_collapse(args) -> int:
    curves = pipeline.read_curves_csv(args.curves)
    q = pipeline.collapse_quality(curves)
    doc = {"collapse_quality": q, "n_curves": len(curves)}
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=2)
    print(json.dumps(doc))
    return 0


def cmd_fss(args) -> int:
    records = pipeline.read_records(args.records)
    table = {}
    for rec in records:
        L = rec["L"]
        table.setdefault(L, {})[rec["params"]["h"]] = rec["n_lambda"]
    fss_table = {}
    for L, by_h in table.items():
        hs = np.array(sorted(by_h))
        fss_table[L] = (hs, np.array([by_h[h] for h in hs]))
    res = pipeline.fss_fit(fss_table)
    doc = {"h_c": res.h_c, "nu": res.nu, "quality": res.quality,
           "degenerate": res.degenerate}
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=2)
    print(json.dumps(doc))
    return 0


def cmd_hist(args) -> int:
    records = pipeline.read_records(args.records)
    out = pipeline.histogram(records, (args.nl_min, args.nl_max),
                             bins=args.bins)
    doc = {
        "edges": out["edges"].tolist(),
        "histograms": {k: v.tolist() for k, v in out["histograms"].items()},
        "ks": {f"{a} vs {b}": v for (a, b), v in out["ks"].items()},
        "counts": out["counts"],
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=2)
    print(f"wrote histogram table ({len(doc['histograms'])} combinations)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="entflow")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, fn in (("sample", cmd_sample), ("run", cmd_run)):
        p = sub.add_parser(name)
        _add_common(p)
        p.add_argument("--verbose", action="store_true")
        p.set_defaults(func=fn)

    p = sub.add_parser("langevin")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_langevin)

    p = sub.add_parser("aggregate")
    p.add_argument("--records", required=True)
    p.add_argument("--measure", default="mean_R1",
                   choices=["mean_R1", "var_R1"])
    p.add_argument("--x-field", dest="x_field", default="n_lambda")
    p.add_argument("--label-fields", dest="label_fields",
                   default="model,L,E_target")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("collapse")
    p.add_argument("--curves", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_collapse)

    p = sub.add_parser("fss")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fss)

    p = sub.add_parser("hist")
    p.add_argument("--records", required=True)
    p.add_argument("--nl-min", type=float, required=True)
    p.add_argument("--nl-max", type=float, required=True)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hist)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (pipeline.ConfigError, models.SpecError, FileNotFoundError,
            json.JSONDecodeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (pipeline.AnalysisError, dynamics.LangevinError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
