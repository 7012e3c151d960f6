"""Command-line experiment runner.

    sprp SUBCOMMAND [--config FILE.json] [overrides...]

A config is one JSON document with three blocks::

    {"model":  {"d": 3, "theta": 1.0, "density": {"kind": "gaussian"},
                "N": 2000, "rho": 0.3},
     "run":    {"replicas": 100, "seed": 1, "epsilon": 0.01, "bins": 100},
     "output": {"dir": "out"}}

``model.rho`` is a number, {"kind": "fixed", "rho": r}, {"kind": "power",
"c": c, "a": a} or {"kind": "log", "c": c}; give it or ``model.L``, not both.
Flags override config fields. Exit status: 0 all checks pass, 1 a check
failed (or a numerical procedure broke down), 2 configuration error.
"""

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import acceptance
from .errors import ConfigError, NumericError, SPRPError
from .genfun import F1, r_star, saddle
from .limits import (
    FixedRho,
    GammaHalf,
    LogRho,
    PowerRho,
    ThetaDensity,
    UniformLogScale,
    X1Law,
    classify,
    y_pmf,
)
from .partition import cycles_pgf, partition_table
from .sampler import (
    l1_pmf,
    rearrange_decreasing,
    rng_stream,
    sample_cycle_lengths_batch,
    sample_positions,
    sample_stick_breaking,
)
from .spectral import load_tabulated_csv, make_gaussian_density, make_tabulated_density_1d
from .stats import ks_distance, ks_distance_pmf, macro_fraction, tv_discrete, tv_prefix
from .weights import ModelParams, alpha_c, rho_c, weight_table

_MOD = "cli"

SUBCOMMANDS = (
    "weights", "partition", "pmf", "sample", "positions",
    "stickbreak", "regime", "limitcheck", "pgf", "accept",
)

RUN_DEFAULTS = {
    "replicas": 1,
    "seed": 0,
    "epsilon": 0.01,
    "bins": 100,
    "j_max": 50,
    "t": 2.0,
    "tau": None,
    "K": 100,
    "threshold": None,
    "criteria": None,
}


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    subcommand: str
    model: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def echo(self):
        return {"subcommand": self.subcommand, "model": self.model, "run": self.run, "output": self.output}

    # model ---------------------------------------------------------------

    def _need(self, key):
        if self.model.get(key) is None:
            raise ConfigError(f"missing required field model.{key}", _MOD)
        return self.model[key]

    def density(self):
        spec = self.model.get("density")
        if spec is None:
            raise ConfigError("missing required field model.density (e.g. {\"kind\": \"gaussian\"})", _MOD)
        if isinstance(spec, str):
            spec = {"kind": spec}
        d = int(self._need("d"))
        kind = spec.get("kind")
        if kind == "gaussian":
            cov = spec.get("covariance")
            if cov is None and "sigma" in spec:
                cov = float(spec["sigma"]) ** 2 * np.eye(d)
            return make_gaussian_density(d, None if cov is None else np.atleast_2d(np.asarray(cov, float)))
        if kind == "tabulated":
            if d != 1:
                raise ConfigError("model.density: tabulated densities are one-dimensional (d=1)", _MOD)
            if "path" in spec:
                return load_tabulated_csv(spec["path"])
            if "grid" in spec and "values" in spec:
                return make_tabulated_density_1d(np.asarray(spec["grid"], float), np.asarray(spec["values"], float))
            raise ConfigError("model.density: tabulated needs 'path' or 'grid' and 'values'", _MOD)
        raise ConfigError(f"model.density.kind must be 'gaussian' or 'tabulated', got {kind!r}", _MOD)

    def rho_spec(self):
        has_rho = self.model.get("rho") is not None
        has_L = self.model.get("L") is not None
        if has_rho == has_L:
            raise ConfigError("give exactly one of model.rho and model.L", _MOD)
        if has_L:
            N, L, d = int(self._need("N")), float(self.model["L"]), int(self._need("d"))
            return FixedRho(N / L**d)
        spec = self.model["rho"]
        if isinstance(spec, (int, float)):
            return FixedRho(float(spec))
        kind = spec.get("kind") if isinstance(spec, dict) else None
        try:
            if kind == "fixed":
                return FixedRho(float(spec["rho"]))
            if kind == "power":
                return PowerRho(float(spec["c"]), float(spec["a"]))
            if kind == "log":
                return LogRho(float(spec["c"]))
        except KeyError as e:
            raise ConfigError(f"model.rho: missing key {e.args[0]!r}", _MOD) from None
        raise ConfigError("model.rho must be a number or have kind fixed/power/log", _MOD)

    def params(self):
        dens = self.density()
        theta = float(self._need("theta"))
        N = int(self._need("N"))
        if self.model.get("L") is not None:
            return ModelParams(dens, theta, float(self.model["L"]), N)
        return ModelParams.from_rho(dens, theta, N, self.rho_spec()(N))

    # run / output --------------------------------------------------------

    def opt(self, key):
        return self.run.get(key, RUN_DEFAULTS[key])

    def outdir(self):
        return self.output.get("dir", "sprp_out")


def _set_path(cfg, path, value):
    block, key = path.split(".")
    cfg.setdefault(block, {})[key] = value


def load_config(args):
    raw = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config {args.config}: {e.strerror}", _MOD) from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {args.config} is not valid JSON: {e}", _MOD) from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object", _MOD)
    raw = copy.deepcopy(raw)
    for block in ("model", "run", "output"):
        if not isinstance(raw.setdefault(block, {}), dict):
            raise ConfigError(f"config block {block!r} must be an object", _MOD)
    unknown = set(raw) - {"model", "run", "output", "subcommand"}
    if unknown:
        raise ConfigError(f"unknown config blocks: {sorted(unknown)}", _MOD)

    for flag, path in _FLAG_PATHS.items():
        v = getattr(args, flag, None)
        if v is not None:
            _set_path(raw, path, v)
    if args.density is not None:
        raw["model"]["density"] = {"kind": "gaussian"} if args.density == "gaussian" else {"kind": "tabulated", "path": args.density}
    if args.sigma is not None:
        dens = raw["model"].setdefault("density", {"kind": "gaussian"})
        dens["sigma"] = args.sigma
    if args.rho_power is not None:
        raw["model"]["rho"] = {"kind": "power", "c": args.rho_power[0], "a": args.rho_power[1]}
    if args.rho_log is not None:
        raw["model"]["rho"] = {"kind": "log", "c": args.rho_log}
    if args.L is not None and args.rho is None and args.rho_power is None and args.rho_log is None:
        raw["model"].pop("rho", None)
    if args.criteria is not None:
        raw["run"]["criteria"] = [int(c) for c in args.criteria.split(",") if c]

    unknown_run = set(raw["run"]) - set(RUN_DEFAULTS)
    if unknown_run:
        raise ConfigError(f"unknown run fields: {sorted(unknown_run)}", _MOD)
    replicas = raw["run"].get("replicas", 1)
    if not isinstance(replicas, int) or replicas < 1:
        raise ConfigError(f"run.replicas must be an integer >= 1, got {replicas!r}", _MOD)
    return ExperimentConfig(args.subcommand, raw["model"], raw["run"], raw["output"])


_FLAG_PATHS = {
    "d": "model.d",
    "theta": "model.theta",
    "N": "model.N",
    "rho": "model.rho",
    "L": "model.L",
    "replicas": "run.replicas",
    "seed": "run.seed",
    "epsilon": "run.epsilon",
    "bins": "run.bins",
    "j_max": "run.j_max",
    "t": "run.t",
    "tau": "run.tau",
    "K": "run.K",
    "threshold": "run.threshold",
    "out": "output.dir",
}


# ---------------------------------------------------------------------------
# report and artifacts


@dataclass
class Report:
    config: dict
    constants: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    files: list = field(default_factory=list)

    def add_check(self, name, statistic, threshold, note=""):
        self.checks.append(acceptance.Check(name, float(statistic), float(threshold), note))

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def as_dict(self):
        return {
            "config": self.config,
            "constants": self.constants,
            "checks": [c.as_dict() for c in self.checks],
            "pass": self.passed,
            "files": self.files,
        }


def _json(obj):
    return json.dumps(obj, sort_keys=True, default=_jsonable)


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _write(report, outdir, name, text):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    report.files.append(name)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _histogram_csv(values, bins, weights=None):
    edges = np.linspace(0.0, 1.0, int(bins) + 1)
    cnt, _ = np.histogram(values, bins=edges, weights=weights)
    return _csv(("bin_left", "bin_right", "count"), zip(edges[:-1], edges[1:], cnt))


def _constants(cfg, params=None):
    """Whatever of rho_c, alpha_c, r_N, r_*, F_L(1), tau, nu applies to the model."""
    out = {}
    dens = cfg.density()
    theta = float(cfg._need("theta"))
    d = dens.dim
    spec = cfg.rho_spec()
    regime = classify(d, theta, dens, spec)
    out["regime"] = regime.case
    out["tau"] = regime.tau
    out["nu"] = regime.nu
    if regime.alpha is not None:
        out["alpha"] = regime.alpha
    if d >= 3:
        out["rho_c"] = rho_c(dens, theta)
    if d == 2:
        out["alpha_c"] = alpha_c(dens, theta)
    if params is None and cfg.model.get("N") is not None:
        params = cfg.params()
    if params is not None:
        out["N"] = params.N
        out["L"] = params.L
        out["rho"] = params.rho
        for key, fn in (
            ("r_N", lambda: saddle(params).r),
            ("r_star", lambda: r_star(dens, theta, params.rho)),
            ("F_L(1)", lambda: F1(params)),
        ):
            try:
                out[key] = float(fn())
            except SPRPError:
                pass
    elif isinstance(spec, FixedRho):
        try:
            out["r_star"] = r_star(dens, theta, spec.rho)
        except SPRPError:
            pass
    return out


# ---------------------------------------------------------------------------
# subcommands


def _tables(cfg):
    params = cfg.params()
    wt = weight_table(params)
    return params, wt, partition_table(wt)


def cmd_weights(cfg, rep):
    params = cfg.params()
    wt = weight_table(params)
    rep.constants.update(_constants(cfg, params))
    _write(rep, cfg.outdir(), "weights.csv", _csv(("j", "W"), ((j, wt.w[j]) for j in range(1, wt.N + 1))))


def cmd_partition(cfg, rep):
    params, wt, pt = _tables(cfg)
    rep.constants.update(_constants(cfg, params))
    rep.constants["log_H_N"] = float(pt.logH[-1])
    rep.constants["recursion_path"] = pt.path
    _write(rep, cfg.outdir(), "partition.csv", _csv(("n", "log_H"), enumerate(pt.logH)))


def cmd_pmf(cfg, rep):
    params, wt, pt = _tables(cfg)
    rep.constants.update(_constants(cfg, params))
    p = l1_pmf(wt, pt)
    N = params.N
    rep.constants["macro_fraction"] = macro_fraction(p, float(cfg.opt("epsilon")))
    _write(rep, cfg.outdir(), "pmf.csv", _csv(("j", "p"), ((j, p[j]) for j in range(1, N + 1))))
    j = np.arange(1, N + 1)
    _write(rep, cfg.outdir(), "pmf_hist.csv", _histogram_csv(j / N, cfg.opt("bins"), weights=p[1:]))


def cmd_sample(cfg, rep):
    params, wt, pt = _tables(cfg)
    rep.constants.update(_constants(cfg, params))
    seed = int(cfg.opt("seed"))
    samples = sample_cycle_lengths_batch(wt, pt, seed, cfg.opt("replicas"))
    N = params.N
    eps = float(cfg.opt("epsilon"))
    lines = []
    for i, s in enumerate(samples):
        lines.append(_json({"replica": i, "seed": seed, "lengths": s.ordered.tolist()}) + "\n")
    _write(rep, cfg.outdir(), "samples.jsonl", "".join(lines))
    # fraction of points in cycles of length >= eps N, averaged over replicas
    frac = np.mean([s.ordered[s.ordered >= eps * N].sum() / N for s in samples])
    rep.constants["macro_fraction_sampled"] = float(frac)
    first = np.array([s.ordered[0] for s in samples]) / N
    _write(rep, cfg.outdir(), "l1_hist.csv", _histogram_csv(first, cfg.opt("bins")))


def cmd_positions(cfg, rep):
    params, wt, pt = _tables(cfg)
    rep.constants.update(_constants(cfg, params))
    seed = int(cfg.opt("seed"))
    s = sample_cycle_lengths_batch(wt, pt, seed, 1, threads=1)[0]
    pos = sample_positions(params, s, rng_stream(seed, 1))
    d = params.d
    header = ["particle", "cycle"] + [f"x{i}" for i in range(d)]
    rows = ([i, int(pos.cycle_id[i])] + list(pos.x[i]) for i in range(pos.x.shape[0]))
    _write(rep, cfg.outdir(), "positions.csv", _csv(header, rows))
    wind = ([c, int(s.ordered[c])] + pos.winding[c].tolist() for c in range(s.num_cycles))
    _write(rep, cfg.outdir(), "cycles.csv", _csv(["cycle", "length"] + [f"k{i}" for i in range(d)], wind))


def cmd_stickbreak(cfg, rep):
    theta = float(cfg._need("theta"))
    tau = cfg.opt("tau")
    if tau is None:
        tau = _constants(cfg)["tau"]
    tau = float(tau)
    M = int(cfg.opt("replicas"))
    seed = int(cfg.opt("seed"))
    st = sample_stick_breaking(theta, tau, int(cfg.opt("K")), rng_stream(seed), size=M)
    rep.constants.update({"theta": theta, "tau": tau})
    ranked = rearrange_decreasing(st.x)
    lines = [_json({"replica": i, "pieces": st.x[i].tolist()}) + "\n" for i in range(M)]
    _write(rep, cfg.outdir(), "sticks.jsonl", "".join(lines))
    _write(rep, cfg.outdir(), "x1_hist.csv", _histogram_csv(st.x[:, 0], cfg.opt("bins")))
    _write(rep, cfg.outdir(), "ranked_first_hist.csv", _histogram_csv(ranked[:, 0], cfg.opt("bins")))
    thr = cfg.opt("threshold")
    # 1.95 / sqrt(M) is the 0.1% critical value of the one-sample KS statistic
    thr = 1.95 / math.sqrt(M) if thr is None else float(thr)
    rep.add_check("KS first piece vs X1 law", ks_distance(st.x[:, 0], X1Law(theta, tau).cdf), thr)


def cmd_regime(cfg, rep):
    rep.constants.update(_constants(cfg))


def cmd_limitcheck(cfg, rep):
    params, wt, pt = _tables(cfg)
    consts = _constants(cfg, params)
    rep.constants.update(consts)
    dens, theta, N = params.density, params.theta, params.N
    p = l1_pmf(wt, pt)
    j = np.arange(1, N + 1)
    case = consts["regime"]
    thr = cfg.opt("threshold")
    if case in ("SubConst", "CriticalHighD"):
        jm = int(cfg.opt("j_max"))
        y = y_pmf(dens, theta, params.rho, jm)
        rep.add_check(f"TV of L1 vs Y over j <= {jm}", tv_prefix(p, y.pmf, jm), 0.02 if thr is None else thr)
    elif case == "Sub1":
        scale = theta**2 / (2 * dens.sigma**2 * params.rho**2)
        rep.add_check("KS of scaled L1 vs Gamma(1/2)", ks_distance_pmf(j * scale, p[1:], GammaHalf()),
                      0.05 if thr is None else thr)
    elif case in ("Sub2", "Critical2D"):
        ac = consts["alpha_c"]
        rep.add_check("KS of alpha_c log L1 / rho vs U[0,1]",
                      ks_distance_pmf(ac * np.log(j) / params.rho, p[1:], UniformLogScale()),
                      0.15 if thr is None else thr)
    elif case == "Critical1D":
        law = ThetaDensity(consts["alpha"], dens.sigma, theta)
        edges = np.linspace(0.0, 1.0, int(cfg.opt("bins")) + 1)
        hist = np.histogram(j / N, bins=edges, weights=p[1:])[0]
        ref = law.bin_masses(edges)
        rep.add_check("binned TV of L1/N vs theta density", tv_discrete(hist / hist.sum(), ref / ref.sum()),
                      0.05 if thr is None else thr)
    else:
        rep.add_check("KS of L1/N vs X1 law", ks_distance_pmf(j / N, p[1:], X1Law(theta, consts["tau"])),
                      0.05 if thr is None else thr)


def cmd_pgf(cfg, rep):
    params = cfg.params()
    t = float(cfg.opt("t"))
    rep.constants.update(_constants(cfg, params))
    rep.constants["t"] = t
    rep.constants["pgf"] = cycles_pgf(params, t)


def cmd_accept(cfg, rep):
    sel = cfg.opt("criteria")
    results = acceptance.run_all(set(sel) if sel else None, echo=print)
    for r in results:
        for c in r.checks:
            rep.checks.append(acceptance.Check(f"[{r.number}] {c.name}", c.statistic, c.threshold, c.note))
    _write(rep, cfg.outdir(), "acceptance.jsonl", "".join(_json(r.as_dict()) + "\n" for r in results))


COMMANDS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}


def run(cfg):
    """Execute ``cfg`` and write its artifacts plus report.json; returns the Report."""
    rep = Report(cfg.echo())
    COMMANDS[cfg.subcommand](cfg, rep)
    rep.files.append("report.json")
    _write(rep, cfg.outdir(), "report.json", _json(rep.as_dict()) + "\n")
    rep.files.pop()
    return rep


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    ap = argparse.ArgumentParser(prog="sprp", description="Exact tables, samplers and limit checks for spatial random permutations.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="JSON config file")
    g = ap.add_argument_group("model")
    g.add_argument("--d", type=int)
    g.add_argument("--theta", type=float)
    g.add_argument("--N", type=int)
    g.add_argument("--density", help="'gaussian' or a CSV file (x,value) of a 1D density")
    g.add_argument("--sigma", type=float, help="isotropic Gaussian standard deviation")
    g.add_argument("--rho", type=float, help="fixed density N / L^d")
    g.add_argument("--rho-power", type=float, nargs=2, metavar=("C", "A"), help="rho = C N^A")
    g.add_argument("--rho-log", type=float, metavar="C", help="rho = C log N")
    g.add_argument("--L", type=float, help="torus side length (instead of rho)")
    g = ap.add_argument_group("run")
    g.add_argument("--replicas", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--bins", type=int)
    g.add_argument("--j-max", type=int)
    g.add_argument("--t", type=float, help="pgf argument")
    g.add_argument("--tau", type=float, help="unbreakable mass for stickbreak")
    g.add_argument("--K", type=int, help="stick-breaking steps")
    g.add_argument("--threshold", type=float)
    g.add_argument("--criteria", help="comma separated acceptance criteria, e.g. 1,2,11")
    ap.add_argument("--out", help="output directory (default sprp_out)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        rep = run(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except NumericError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 1
    except SPRPError as e:
        # bad parameter values are configuration problems
        print(f"config error: {e}", file=sys.stderr)
        return 2
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.statistic:.6g} <= {c.threshold:.6g}")
    if cfg.subcommand != "accept":
        for k, v in rep.constants.items():
            print(f"{k} = {v}")
    print(f"report written to {os.path.join(cfg.outdir(), 'report.json')}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
