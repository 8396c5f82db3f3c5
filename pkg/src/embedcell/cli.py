"""Command-line runner for the embedded cell experiments.

Each subcommand writes a JSON summary and CSV tables into an output
directory and prints the headline numbers. Exit status: 0 on success,
1 on any error (including bad usage), 2 when an iteration did not converge.
"""

import argparse
import configparser
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .ecm import run_ecm_1d, run_ecm_2d
from .elastic1d import kappa_hom, stochastic_force_experiment, stochastic_to_csv
from .homogenization import delta_sweep_2d, homogenize_1d, lambda_hom_first_order
from .materials import PhaseParams
from .perturbation import perturbation_sweep
from .plasticity import PlasticMetalLaw, curve_to_csv, stress_strain_curve

OUT_ENV = "EMBEDCELL_OUT"
EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2

COMMANDS = ("ecm1d", "ecm2d", "homogenize1d", "deltasweep2d", "stochastic1d",
            "plastic1d", "perturb2d")

DEFAULTS = {
    "l": 0.01, "mesh_n": 64, "tol": 1e-8, "max_iter": 200, "seed": 0,
    "eps_list": [0.02, 0.04, 0.08], "deltas": [1.0, 0.5, 0.25], "mesh_per_period": 16,
    "mu": 1.0, "lambda_met": 1.0, "d_c": 1.0, "eps": 0.05, "vol_cer": 0.5,
    "kappa_met": 1.0, "kappa_cer": 1.0, "n_cells": [100, 1000, 10000], "samples": 200,
    "n_periods": [1, 4, 16], "alpha": 1.0, "beta": 1.0, "u_crit": 1.0,
    "l_grid": [0.1 * k for k in range(1, 21)], "assignment": "area",
}

# keys that must be given explicitly (flag or config file)
REQUIRED = {
    "ecm1d": ("kappa_met", "kappa_cer", "vol_cer"),
    "homogenize1d": ("kappa_met", "kappa_cer", "vol_cer"),
    "stochastic1d": ("kappa_met", "kappa_cer", "vol_cer"),
    "plastic1d": ("kappa_cer",),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text):
    try:
        return [float(x) for x in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}")


def _ints(text):
    try:
        return [int(x) for x in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of integers, got {text!r}")


OPTIONS = {
    # key: (type, help)
    "l": (float, "prescribed displacement of the top face"),
    "tol": (float, "relative stop tolerance"),
    "max_iter": (int, "iteration cap"),
    "mesh_n": (int, "elements per direction"),
    "seed": (int, "random seed"),
    "kappa_met": (float, "metal longitudinal modulus"),
    "kappa_cer": (float, "ceramic longitudinal modulus"),
    "vol_cer": (float, "ceramic volume fraction (probability in stochastic1d)"),
    "lambda_met": (float, "metal first Lame parameter"),
    "mu": (float, "shear modulus"),
    "eps": (float, "contrast scale"),
    "d_c": (float, "ceramic contrast direction, lambda_cer = lambda_met + eps*d_c"),
    "eps_list": (_floats, "contrast scales, ascending"),
    "deltas": (_floats, "periods 1/k, strictly decreasing"),
    "mesh_per_period": (int, "elements per period and direction"),
    "n_cells": (_ints, "cell counts"),
    "samples": (int, "samples per cell count"),
    "n_periods": (_ints, "period counts"),
    "alpha": (float, "metal elastic slope"),
    "beta": (float, "metal hardening coefficient"),
    "u_crit": (float, "metal critical strain"),
    "l_grid": (_floats, "displacements, positive ascending"),
    "assignment": (str, "material assignment on cut elements: area or centroid"),
}

COMMAND_KEYS = {
    "ecm1d": ("l", "tol", "max_iter", "kappa_met", "kappa_cer", "vol_cer"),
    "ecm2d": ("l", "tol", "max_iter", "mesh_n", "lambda_met", "mu", "eps", "d_c", "vol_cer",
              "assignment"),
    "homogenize1d": ("l", "tol", "max_iter", "kappa_met", "kappa_cer", "vol_cer", "n_periods"),
    "deltasweep2d": ("l", "lambda_met", "mu", "eps", "d_c", "vol_cer", "deltas",
                     "mesh_per_period", "assignment"),
    "stochastic1d": ("l", "seed", "kappa_met", "kappa_cer", "vol_cer", "n_cells", "samples"),
    "plastic1d": ("tol", "max_iter", "kappa_cer", "alpha", "beta", "u_crit", "l_grid"),
    "perturb2d": ("l", "mesh_n", "lambda_met", "mu", "d_c", "vol_cer", "eps_list"),
}

POSITIVE = {"l", "tol", "max_iter", "mesh_n", "kappa_met", "kappa_cer", "mu",
            "mesh_per_period", "samples", "alpha", "beta", "u_crit"}


@dataclass
class ExperimentConfig:
    command: str
    values: dict = field(default_factory=dict)
    out: str = None

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None

    @property
    def params(self):
        v = self.values
        if self.command in ("ecm2d", "deltasweep2d", "perturb2d"):
            eps = 1.0 if self.command == "perturb2d" else v["eps"]
            return PhaseParams.perturbed(v["lambda_met"], eps, v["d_c"], mu=v["mu"],
                                         vol_cer=v["vol_cer"])
        if self.command == "plastic1d":
            return None
        return PhaseParams(kappa_met=v["kappa_met"], kappa_cer=v["kappa_cer"],
                           vol_cer=v["vol_cer"])


def build_parser():
    parser = _Parser(prog="embedcell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        for key in COMMAND_KEYS[cmd]:
            typ, help_ = OPTIONS[key]
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None,
                           help=f"{help_} (default {DEFAULTS[key]})"
                           if key not in REQUIRED.get(cmd, ()) else f"{help_} (required)")
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<command>-<time>)")
    return parser


def read_config_file(path, command):
    """Parse ``key = value`` lines; keys may use dashes or underscores."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    try:
        cp.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"malformed config file: {exc}") from exc
    out = {}
    for raw, value in cp["config"].items():
        key = raw.replace("-", "_")
        if key not in COMMAND_KEYS[command]:
            raise UsageError(f"unknown config key {raw!r} for {command}")
        try:
            out[key] = OPTIONS[key][0](value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"invalid value for {raw}: {value!r}") from exc
    return out


def _validate(cfg):
    v = cfg.values
    for key, val in v.items():
        if key in POSITIVE and not val > 0:
            raise UsageError(f"{key} must be positive, got {val}")
    if "eps_list" in v:
        e = v["eps_list"]
        if len(e) < 3 or any(x <= 0 for x in e) or any(b <= a for a, b in zip(e, e[1:])):
            raise UsageError("eps_list needs >= 3 positive ascending values")
    if "assignment" in v and v["assignment"] not in ("area", "centroid"):
        raise UsageError("assignment must be area or centroid")
    if "deltas" in v:
        d = v["deltas"]
        if any(b >= a for a, b in zip(d, d[1:])):
            raise UsageError("deltas must be strictly decreasing")
    try:
        cfg.params
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_config(argv=None):
    """Flags, then config file, then defaults; required keys must be present."""
    ns = build_parser().parse_args(argv)
    cmd = ns.command
    file_values = read_config_file(ns.config, cmd) if ns.config else {}
    values = {}
    for key in COMMAND_KEYS[cmd]:
        given = getattr(ns, key)
        if given is not None:
            values[key] = given
        elif key in file_values:
            values[key] = file_values[key]
        elif key in REQUIRED.get(cmd, ()):
            raise UsageError(f"embedcell {cmd}: missing required option --{key.replace('_', '-')}")
        else:
            values[key] = DEFAULTS[key]
    cfg = ExperimentConfig(cmd, values, ns.out)
    _validate(cfg)
    return cfg


def output_dir(cfg):
    if cfg.out:
        return Path(cfg.out)
    base = Path(os.environ.get(OUT_ENV, "."))
    return base / f"{cfg.command}-{time.strftime('%Y%m%d-%H%M%S')}"


def _dump(path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _run_ecm1d(cfg, out):
    trace = run_ecm_1d(cfg.params, cfg.l, tol=cfg.tol, max_iter=cfg.max_iter)
    summary = trace.summary() | {"kappa_hom": kappa_hom(cfg.params)}
    (out / "trace.csv").write_text(trace.to_csv())
    _dump(out / "summary.json", summary)
    print(f"kappa_dummy = {trace.limit:.12g}  F = {trace.force:.12g}  "
          f"iterations = {trace.iterations}")
    return trace.converged


def _run_ecm2d(cfg, out):
    p = cfg.params
    trace = run_ecm_2d(p, cfg.mesh_n, cfg.l, tol=cfg.tol, max_iter=cfg.max_iter,
                       assignment=cfg.assignment)
    summary = trace.summary() | {"lambda_hom_first_order": lambda_hom_first_order(p)}
    (out / "trace.csv").write_text(trace.to_csv())
    _dump(out / "summary.json", summary)
    print(f"lambda_dummy = {trace.limit:.12g}  F = {trace.force:.12g}  "
          f"iterations = {trace.iterations}")
    return trace.converged


def _run_homogenize1d(cfg, out):
    res = homogenize_1d(cfg.params, cfg.l, cfg.n_periods, tol=cfg.tol, max_iter=cfg.max_iter)
    rows = ["n_periods,F"] + [f"{n},{f!r}" for n, f in zip(res["n_periods"], res["periodic_forces"])]
    (out / "periodic.csv").write_text("\n".join(rows) + "\n")
    _dump(out / "summary.json", res)
    print(f"kappa_hom = {res['kappa_hom']:.12g}  kappa_dummy = {res['ecm_limit']:.12g}  "
          f"gap = {res['gap']:.3g}")
    return res["ecm_converged"]


def _run_deltasweep2d(cfg, out):
    rep = delta_sweep_2d(cfg.params, cfg.l, cfg.deltas, cfg.mesh_per_period,
                         assignment=cfg.assignment)
    (out / "forces.csv").write_text(rep.to_csv())
    (out / "report.json").write_text(rep.to_json() + "\n")
    print(f"F_extrapolated = {rep.extrapolated_force:.12g}  "
          f"lambda_hom_estimate = {rep.lambda_hom_estimate:.12g}  "
          f"first_order = {rep.lambda_hom_first_order:.12g}")
    return True


def _run_stochastic1d(cfg, out):
    rows = stochastic_force_experiment(cfg.params, cfg.l, cfg.n_cells, cfg.samples, cfg.seed)
    (out / "stochastic.csv").write_text(stochastic_to_csv(rows))
    _dump(out / "summary.json", {"rows": [asdict(r) for r in rows], "seed": cfg.seed})
    for r in rows:
        print(f"n_cells = {r.n_cells}  mean F = {r.mean_F:.8g}  "
              f"mean |F - F_hom| = {r.mean_abs_dev:.4g}")
    return True


def _run_plastic1d(cfg, out):
    law = PlasticMetalLaw(cfg.alpha, cfg.beta, cfg.u_crit)
    pts = stress_strain_curve(cfg.l_grid, cfg.kappa_cer, law, tol=min(cfg.tol, 1e-13),
                              max_iter=max(cfg.max_iter, 500))
    (out / "curve.csv").write_text(curve_to_csv(pts))
    gap = max(abs(p.F_direct - p.F_ecm) for p in pts)
    _dump(out / "summary.json", {"points": len(pts), "max_abs_gap": gap,
                                 "plastic_points": sum(p.regime == "plastic" for p in pts)})
    print(f"points = {len(pts)}  max |F_ecm - F_direct| = {gap:.3g}")
    return True


def _run_perturb2d(cfg, out):
    sw = perturbation_sweep(cfg.lambda_met, cfg.mu, cfg.d_c, cfg.vol_cer, cfg.l,
                            cfg.mesh_n, cfg.eps_list)
    (out / "errors.csv").write_text(sw.to_csv())
    (out / "slopes.json").write_text(sw.slopes_json() + "\n")
    print(f"slope u0 = {sw.fits['order0'].slope:.4f}  "
          f"slope u0 + eps u1 = {sw.fits['order1'].slope:.4f}")
    return True


RUNNERS = {
    "ecm1d": _run_ecm1d, "ecm2d": _run_ecm2d, "homogenize1d": _run_homogenize1d,
    "deltasweep2d": _run_deltasweep2d, "stochastic1d": _run_stochastic1d,
    "plastic1d": _run_plastic1d, "perturb2d": _run_perturb2d,
}


def run_experiment(cfg):
    """Run one configured experiment; returns the exit status."""
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    _dump(out / "config.json", {"command": cfg.command, **cfg.values})
    converged = RUNNERS[cfg.command](cfg, out)
    print(f"results in {out}")
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def main(argv=None):
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        return run_experiment(cfg)
    except Exception as exc:  # every failure maps to the error status
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
