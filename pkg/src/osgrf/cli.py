"""Command-line entry point.

Subcommands: classify, qtable, limit-cov, simulate, synthesize-w, verify.
Each accepts an optional JSON config file plus flag overrides (flags win);
the merged effective config is echoed into a manifest next to the outputs,
together with a config hash, package versions, the seed, and the wall time.
Only the manifest carries wall-clock data, so rerunning a command with the
same config and seed reproduces every other output byte-for-byte.

Exit codes: 0 success, 2 config error, 3 numerical-tolerance failure,
4 resource-budget exhaustion.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError, NumericalError, ResourceBudgetError
from .spectral import ParetoProductModel
from .qtable import build_qtable, sigma_x2
from .regime import classify
from .limit_field import LimitCovariance, Synthesizer
from .graph_field import simulate_window, partial_sums
from .montecarlo import ExperimentPlan, run_invariance_experiment, \
    SCHEMA_VERSION
from . import rng


def _float_list(value):
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(v) for v in str(value).split(",")]


def _int_list(value):
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(v) for v in str(value).split(",")]


def _point_grid(value):
    """Points as 't1,t2;s1,s2;...' on the command line or nested lists in JSON."""
    if isinstance(value, (list, tuple)):
        return [tuple(float(v) for v in np.atleast_1d(pt)) for pt in value]
    return [tuple(float(v) for v in chunk.split(","))
            for chunk in str(value).split(";") if chunk.strip()]


# allowed config keys per subcommand: name -> (parser, required)
_SCHEMAS = {
    "classify": {
        "alpha": (_float_list, True),
        "alpha_prime": (_float_list, True),
        "output": (str, False),
    },
    "qtable": {
        "alpha": (_float_list, True),
        "gamma": (_float_list, False),
        "p": (float, False),
        "extent": (int, True),
        "output_dir": (str, True),
    },
    "limit-cov": {
        "alpha": (_float_list, True),
        "alpha_prime": (_float_list, True),
        "gamma": (_float_list, False),
        "p": (float, False),
        "points": (str, True),            # CSV path: t_1..t_d, s_1..s_d
        "qtable_extent": (int, False),
        "output_dir": (str, True),
    },
    "simulate": {
        "alpha": (_float_list, True),
        "gamma": (_float_list, False),
        "p": (float, False),
        "extents": (_int_list, True),
        "buffer_depth": (int, True),
        "t_grid": (_point_grid, True),
        "replicas": (int, True),
        "seed": (int, False),             # mandatory, but OSGRF_SEED may fill it
        "site_budget": (int, False),
        "output_dir": (str, True),
    },
    "synthesize-w": {
        "alpha": (_float_list, True),
        "alpha_prime": (_float_list, True),
        "gamma": (_float_list, False),
        "p": (float, False),
        "t_grid": (_point_grid, True),
        "realizations": (int, True),
        "qtable_extent": (int, False),
        "seed": (int, False),
        "output_dir": (str, True),
    },
    "verify": {
        "alpha": (_float_list, True),
        "alpha_prime": (_float_list, True),
        "gamma": (_float_list, False),
        "p": (float, False),
        "n_schedule": (_int_list, True),
        "replicas": (int, True),
        "gauss_replicas": (int, False),
        "t_grid": (_point_grid, True),
        "qtable_extent": (int, False),
        "buffer_factor": (float, False),
        "workers": (int, False),
        "seed": (int, False),
        "output_dir": (str, True),
    },
}

_STOCHASTIC = {"simulate", "synthesize-w", "verify"}


def _load_config(command, args):
    schema = _SCHEMAS[command]
    merged = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        unknown = sorted(set(raw) - set(schema))
        if unknown:
            raise ConfigError("unknown config keys: %s" % ", ".join(unknown))
        merged.update(raw)
    for key in schema:
        flag_val = getattr(args, key.replace("-", "_"), None)
        if flag_val is not None:
            merged[key] = flag_val
    if command in _STOCHASTIC and merged.get("seed") is None:
        env = os.environ.get("OSGRF_SEED")
        if env is not None:
            merged["seed"] = env
        else:
            raise ConfigError("seed is required (flag, config, or OSGRF_SEED)")
    out = {}
    for key, (parse, required) in schema.items():
        if key in merged and merged[key] is not None:
            out[key] = parse(merged[key])
        elif required:
            raise ConfigError("missing required config key: %s" % key)
    return out


def _json_dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_manifest(out_dir, command, config, seed, started):
    manifest = {
        "command": command,
        "effective_config": config,
        "config_hash": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()).hexdigest(),
        "seed": seed,
        "versions": {
            "osgrf": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": time.time() - started,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        fh.write(_json_dumps(manifest))


def _model(cfg):
    gamma = cfg.get("gamma")
    return ParetoProductModel(cfg["alpha"], gamma=gamma, p=cfg.get("p", 0.5))


def _cmd_classify(cfg):
    report = classify(cfg["alpha"], cfg["alpha_prime"])
    payload = report.to_dict()
    payload["schema_version"] = SCHEMA_VERSION
    text = _json_dumps(payload)
    if cfg.get("output"):
        with open(cfg["output"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_qtable(cfg, out_dir):
    model = _model(cfg)
    qt = build_qtable(model, cfg["extent"])
    raw = np.ascontiguousarray(qt.values, dtype="<f8").tobytes()
    with open(os.path.join(out_dir, "qtable.bin"), "wb") as fh:
        fh.write(raw)
    header = {
        "schema_version": SCHEMA_VERSION,
        "dims": list(qt.values.shape),
        "extent": int(cfg["extent"]),
        "dtype": "<f8",
        "order": "C",
        "checksum_sha256": hashlib.sha256(raw).hexdigest(),
    }
    with open(os.path.join(out_dir, "qtable.json"), "w") as fh:
        fh.write(_json_dumps(header))
    with open(os.path.join(out_dir, "qtable_summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sum_q_sq", "sigma_x2", "tail_mass"])
        w.writerow([repr(qt.sum_sq), repr(sigma_x2(qt, model.p)),
                    repr(qt.tail_mass)])
    return 0


def _cmd_limit_cov(cfg, out_dir):
    model = _model(cfg)
    report = classify(cfg["alpha"], cfg["alpha_prime"])
    if not report.valid:
        raise ConfigError("invalid regime: %s" % "; ".join(report.reasons))
    qt = build_qtable(model, cfg.get("qtable_extent", 2048))
    engine = LimitCovariance(report, model, sigma2=sigma_x2(qt, model.p))
    d = model.d
    rows = []
    with open(cfg["points"]) as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].startswith("#") or not rec[0].strip():
                continue
            try:
                vals = [float(v) for v in rec]
            except ValueError:
                continue  # header row
            if len(vals) != 2 * d:
                raise ConfigError("expected %d columns per point row" % (2 * d))
            rows.append((tuple(vals[:d]), tuple(vals[d:])))
    path = os.path.join(out_dir, "limit_cov.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_%d" % (k + 1) for k in range(d)]
                   + ["s_%d" % (k + 1) for k in range(d)]
                   + ["value", "error"])
        for t, s in rows:
            val, err = engine.cov(t, s, with_error=True)
            w.writerow([repr(v) for v in t] + [repr(v) for v in s]
                       + [repr(val), repr(err)])
    return 0


def _cmd_simulate(cfg, out_dir):
    model = _model(cfg)
    seed = int(cfg["seed"])
    budget = cfg.get("site_budget", 10 ** 8)
    d = model.d
    t_grid = cfg["t_grid"]
    path = os.path.join(out_dir, "simulate.csv")
    sidecar = None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replica"] + ["t_%d" % (k + 1) for k in range(d)]
                   + ["S", "S_centered"])
        for r in range(cfg["replicas"]):
            win = simulate_window(model, cfg["extents"], cfg["buffer_depth"],
                                  rng.derive_seed(seed, r), site_budget=budget)
            grid = partial_sums(win, t_grid)
            if sidecar is None:
                sidecar = {
                    "schema_version": SCHEMA_VERSION,
                    "extents": [int(v) for v in win.extents],
                    "buffer_depth": int(win.buffer_depth),
                    "truncated_components": int(win.truncated_components),
                    "seed": seed,
                }
            for i, t in enumerate(t_grid):
                w.writerow([r] + [repr(v) for v in t]
                           + [repr(float(grid.sums[i])),
                              repr(float(grid.centered[i]))])
    with open(os.path.join(out_dir, "simulate.json"), "w") as fh:
        fh.write(_json_dumps(sidecar))
    return 0


def _cmd_synthesize_w(cfg, out_dir):
    model = _model(cfg)
    report = classify(cfg["alpha"], cfg["alpha_prime"])
    if not report.valid:
        raise ConfigError("invalid regime: %s" % "; ".join(report.reasons))
    qt = build_qtable(model, cfg.get("qtable_extent", 2048))
    synth = Synthesizer(report, model, cfg["t_grid"],
                        sigma2=sigma_x2(qt, model.p))
    sample = synth.sample(int(cfg["seed"]), cfg["realizations"])
    d = model.d
    path = os.path.join(out_dir, "synthesize_w.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["realization"] + ["t_%d" % (k + 1) for k in range(d)]
                   + ["W"])
        for r in range(sample.shape[0]):
            for i, t in enumerate(cfg["t_grid"]):
                w.writerow([r] + [repr(v) for v in t]
                           + [repr(float(sample[r, i]))])
    return 0


def _cmd_verify(cfg, out_dir):
    plan = ExperimentPlan(
        alphas=tuple(cfg["alpha"]),
        alpha_primes=tuple(cfg["alpha_prime"]),
        gammas=tuple(cfg["gamma"]) if cfg.get("gamma") else None,
        p=cfg.get("p", 0.5),
        n_schedule=tuple(cfg["n_schedule"]),
        replicas=cfg["replicas"],
        gauss_replicas=cfg.get("gauss_replicas", 0),
        t_grid=cfg["t_grid"],
        qtable_extent=cfg.get("qtable_extent", 2048),
        buffer_factor=cfg.get("buffer_factor", 1.0),
        workers=cfg.get("workers", 1),
        seed=int(cfg["seed"]),
    )
    report = run_invariance_experiment(plan)
    with open(os.path.join(out_dir, "verdict.json"), "w") as fh:
        fh.write(_json_dumps(report.to_dict()))
    d = len(plan.alphas)
    with open(os.path.join(out_dir, "verdict.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n"] + ["t_%d" % (k + 1) for k in range(d)]
                   + ["s_%d" % (k + 1) for k in range(d)]
                   + ["empirical", "se", "target", "z"])
        for entry in report.per_n:
            for pair in entry["pairs"]:
                w.writerow([entry["n"]]
                           + [repr(v) for v in pair["t"]]
                           + [repr(v) for v in pair["s"]]
                           + [repr(pair["empirical"]), repr(pair["se"]),
                              repr(pair["target"]), repr(pair["z"])])
    if not report.passed:
        raise NumericalError("verdict outside tolerances (see verdict.json)")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="osgrf",
        description="operator-scaling random-field laboratory")
    sub = parser.add_subparsers(dest="command")
    for name, schema in _SCHEMAS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="JSON config file; flags override its keys")
        for key in schema:
            p.add_argument("--" + key.replace("_", "-"), default=None,
                           dest=key.replace("-", "_"))
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    started = time.time()
    try:
        cfg = _load_config(args.command, args)
        if args.command == "classify":
            return _cmd_classify(cfg)
        out_dir = cfg["output_dir"]
        os.makedirs(out_dir, exist_ok=True)
        handler = {
            "qtable": _cmd_qtable,
            "limit-cov": _cmd_limit_cov,
            "simulate": _cmd_simulate,
            "synthesize-w": _cmd_synthesize_w,
            "verify": _cmd_verify,
        }[args.command]
        code = handler(cfg, out_dir)
        _write_manifest(out_dir, args.command, cfg, cfg.get("seed"), started)
        return code
    except ConfigError as exc:
        sys.stderr.write("config error: %s\n" % exc)
        return 2
    except ResourceBudgetError as exc:
        sys.stderr.write("resource budget exceeded: %s\n" % exc)
        return 4
    except NumericalError as exc:
        sys.stderr.write("numerical failure: %s\n" % exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
