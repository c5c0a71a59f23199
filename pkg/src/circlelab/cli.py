"""Command-line front end.

    circlelab COMMAND [--config FILE] [--map SPEC] [options]

Every run writes summary.json plus CSV tables to --out. Exit codes:
0 success, 1 golden verification mismatch, 2 invalid configuration,
3 numerical non-convergence (the summary is still written).
"""
from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .ba_extension import beltrami_field, vanishing_profile, write_field_csv
from .circle_map import (BudgetError, MapError, expansion_report, holder_distortion, make_map,
                         symmetry_modulus)
from .conjugacy import conjugacy_map, conjugacy_residual, qs_report
from .dual_deriv import (check_compatibility, check_summation, dmax_distance, dual_derivative,
                         dual_derivative_table, solenoid)
from .linear_model import check_functional_eq, delta_of, linear_model_map, reconstruct_from_dual
from .measures import (ConvergenceError, cesaro_distribution, dual_cylinder_measure,
                       entropy_cylinder, entropy_rohlin, gibbs_report, invariant_density,
                       lebesgue_density, radon_nikodym)
from .symbolic import bounded_geometry_report, partition_endpoints

SCHEMA_VERSION = 1
COMMANDS = ("map-report", "dual-deriv", "check-conditions", "conjugacy", "measure", "entropy",
            "linear-model", "ba-field", "entropy-scan-fs", "dmax")
SUMMATION_TOL = 1e-12


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    map: str = "power:d=2"
    map2: str = "power:d=2"
    depth: int = 10
    terms: int = 10
    tol: float = 1e-10
    iterations: int = 500
    grid: int = 2 ** 14
    budget: int = 2 ** 22
    out: str = "circlelab-out"
    words: list = field(default_factory=list)
    scales: list = field(default_factory=lambda: [0.25, 0.125, 0.0625, 0.03125])
    s: list = field(default_factory=lambda: [0.5, 0.7, 0.9, 0.97])
    M: float = 4.0
    range: int = 3
    seed: int = 0

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for key in ("depth", "terms", "iterations", "grid", "budget"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be positive")
        if not 0 < self.tol < 1:
            raise ConfigError("tol must lie in (0, 1)")
        if self.range < 0:
            raise ConfigError("range must be >= 0")
        if any(not 0 < t <= 1 for t in self.scales):
            raise ConfigError("scales must lie in (0, 1]")
        if self.M <= 1:
            raise ConfigError("M must exceed 1")
        if any(c not in "0123456789" for w in self.words for c in w):
            raise ConfigError("words are digit strings")
        return self


_INT = {"depth", "terms", "iterations", "grid", "budget", "range", "seed"}
_FLOAT = {"tol", "M"}
_LISTF = {"scales", "s"}
_LISTS = {"words"}


def _coerce(key, raw):
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
        if key in _LISTF:
            return [float(v) for v in str(raw).split(",") if v.strip()]
        if key in _LISTS:
            return [v.strip() for v in str(raw).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return str(raw)


def load_config(path, command):
    """[run] holds shared keys; a section named after the command overrides them."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if not os.path.exists(path):
        raise ConfigError(f"config file {path} not found")
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    known = set(RunConfig.__dataclass_fields__) - {"command"}
    out = {}
    for sec in ("run", command):
        if cp.has_section(sec):
            for k, v in cp.items(sec):
                if k not in known:
                    raise ConfigError(f"unknown config key {k!r} in [{sec}]")
                out[k] = _coerce(k, v)
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="circlelab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config")
    p.add_argument("--map")
    p.add_argument("--map2", help="second map (conjugacy source g, dmax partner, ba-field source)")
    for key in ("depth", "terms", "iterations", "grid", "budget", "range", "seed"):
        p.add_argument(f"--{key}", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--M", type=float)
    p.add_argument("--out")
    p.add_argument("--words", help="comma-separated dual words")
    p.add_argument("--scales", help="comma-separated scales t")
    p.add_argument("--s", help="comma-separated breakpoints for entropy-scan-fs")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pin", metavar="GOLDEN", help="write results as a golden file")
    g.add_argument("--verify", metavar="GOLDEN", help="compare results with a golden file")
    return p


def resolve_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(load_config(args.config, args.command))
    for key in RunConfig.__dataclass_fields__:
        if key == "command":
            continue
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _coerce(key, v) if key in _LISTF | _LISTS else v
    try:
        cfg = RunConfig(args.command, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _csv(path, header, rows):
    import csv
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for r in rows:
            wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


class Run:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.results = {}
        self.verdicts = []
        self.tables = []
        self.status = 0
        os.makedirs(cfg.out, exist_ok=True)

    def path(self, name):
        self.tables.append(name)
        return os.path.join(self.cfg.out, name)

    def verdict(self, name, ok, witness=None, detail=None):
        v = {"check": name, "verdict": "PASS" if ok else "FAIL"}
        if not ok and witness is not None:
            v["witness"] = dict(zip(("word", "depth", "value"), witness))
        if detail is not None:
            v["detail"] = detail
        self.verdicts.append(v)

    def map(self, key="map"):
        return make_map(getattr(self.cfg, key))


def cmd_map_report(run):
    cfg = run.cfg
    m = run.map()
    n = cfg.depth
    rep = expansion_report(m, n, cfg.budget)
    geo = bounded_geometry_report(m, n, cfg.budget)
    mod = symmetry_modulus(m, min(n, 8), cfg.scales)
    res = {"map": m.spec(), "degree": m.degree, "F(0)": float(m(0.0)), "F(1)": float(m(1.0)),
           "expansion": {"depth": n, "lambda": rep.lam, "iota": rep.iota, "expanding": rep.expanding},
           "geometry": {"C_n": geo.nearby, "c_n": geo.child_parent, "witness": list(geo.witness)},
           "symmetry": {"depth": mod.depth, "sup": mod.sup,
                        "samples": [[t, v] for t, v in mod.samples]}}
    if mod.omega is not None:
        res["symmetry"]["omega"] = [[t, v] for t, v in mod.omega]
        res["holder_distortion"] = holder_distortion(m, [2, 4, 6, 8])
    run.results = res
    run.verdict("expanding", rep.expanding, ("", n, rep.lam))
    partition_endpoints(m, min(n, 12), cfg.budget).to_csv(run.path("partition.csv"))
    _csv(run.path("modulus.csv"), ["t", "deviation"], mod.samples)


def cmd_dual_deriv(run):
    cfg = run.cfg
    m = run.map()
    tab = dual_derivative_table(m, cfg.depth, cfg.budget)
    tab.to_csv(run.path("dual_derivative.csv"))
    gaps = tab.gaps
    res = {"map": m.spec(), "depth": cfg.depth, "min": float(tab.values.min()),
           "max": float(tab.values.max()),
           "max_gap": float(np.nanmax(gaps)) if cfg.depth > 1 else None, "words": {}}
    for w in cfg.words:
        r = dual_derivative(m, w, max(cfg.depth, 2), cfg.tol)
        res["words"][w] = {"value": r.value, "gap": r.gap, "depth": r.depth, "converged": r.converged}
        run.verdict(f"converged {w}", r.converged, (w, r.depth, r.gap))
        if not r.converged:
            run.status = 3
    run.results = res


def cmd_check_conditions(run):
    cfg = run.cfg
    m = run.map()
    worst = None
    per = []
    for n in range(1, cfg.depth + 1):
        r = check_summation(m, n, cfg.budget)
        per.append([n, r.residual])
        if worst is None or r.residual > worst.residual:
            worst = r
    res = {"map": m.spec(), "summation": {"per_depth": per, "worst": worst.residual}}
    run.verdict("summation", worst.residual <= SUMMATION_TOL,
                (worst.witness, worst.depth, worst.residual))
    if m.degree == 2:
        cdepth = max(cfg.depth, cfg.terms + 6)
        words = cfg.words or None
        c = check_compatibility(m, words, cfg.terms, cdepth, tol=1e-3)
        res["compatibility"] = {"depth": cdepth, "terms": cfg.terms, "spread": c.spread,
                                "increment": c.increment, "verdict": c.verdict,
                                "products": {w: list(p) for w, p in zip(c.words, c.products)}}
        run.verdict("compatibility", c.verdict == "PASS", c.witness)
        sol = solenoid(m, "01", cfg.terms, cdepth)
        res["solenoid"] = {"word": "01", "ratio_form": sol.ratio_form,
                           "product_form": sol.product_form}
        _csv(run.path("compatibility.csv"), ["word"] + [f"P{i + 1}" for i in range(cfg.terms)],
             [[w] + [float(v) for v in p] for w, p in zip(c.words, c.products)])
    _csv(run.path("summation.csv"), ["depth", "residual"], per)
    run.results = res


def cmd_conjugacy(run):
    cfg = run.cfg
    f, g = run.map(), run.map("map2")
    h = conjugacy_map(f, g, cfg.depth)
    resid = conjugacy_residual(h, f, g)
    scales = [t for t in cfg.scales if t >= 4 * h.spacing]
    q = qs_report(h, scales) if scales else None
    h.to_csv(run.path("conjugacy.csv"))
    run.results = {"f": f.spec(), "g": g.spec(), "depth": cfg.depth, "knots": len(h.x),
                   "residual": resid,
                   "qs": None if q is None else {"scales": q.scales, "M": q.maxima,
                                                 "resolution": q.resolution}}
    run.verdict("equivariance", resid <= 1e-9, ("", cfg.depth, resid))


def _density(m, cfg):
    if m.kind == "power":
        return lebesgue_density(cfg.grid)
    return invariant_density(m, cfg.iterations, cfg.tol, cfg.grid)


def cmd_measure(run):
    cfg = run.cfg
    m = run.map()
    rho = _density(m, cfg)
    rho.to_csv(run.path("density.csv"))
    dist = rho.distribution()
    ces = cesaro_distribution(m, cfg.terms, budget=cfg.budget)
    diff = float(np.max(np.abs(ces.y - dist(ces.x))))
    mu = dual_cylinder_measure(m, dist, cfg.depth, cfg.budget)
    mu.to_csv(run.path("dual_measure.csv"))
    tab = dual_derivative_table(m, cfg.depth, cfg.budget)
    gib = gibbs_report(mu, tab)
    rn = radon_nikodym(mu)
    run.results = {"map": m.spec(), "density": {"iterations": rho.iterations, "residual": rho.residual,
                                                "min": float(rho.values.min()),
                                                "max": float(rho.values.max())},
                   "cesaro": {"terms": cfg.terms, "sup_diff": diff},
                   "dual_measure": {"depth": cfg.depth, "shift_consistency": mu.shift_consistency()},
                   "gibbs": {"lower": gib.lower, "upper": gib.upper},
                   "radon_nikodym": {"max_abs_diff_to_inverse_dstar":
                                     float(np.max(np.abs(rn - 1 / tab.values)))}}


def cmd_entropy(run):
    cfg = run.cfg
    m = run.map()
    rho = _density(m, cfg)
    dist = None if m.kind == "power" else rho.distribution()
    mu = dual_cylinder_measure(m, dist, cfg.depth, cfg.budget)
    est = entropy_cylinder(mu)
    rohlin = entropy_rohlin(m, rho)
    run.results = {"map": m.spec(), "depth": cfg.depth, "entropy_cylinder": est.conditional[-1],
                   "entropy_block": est.block[-1], "entropy_rohlin": rohlin,
                   "per_depth": {"conditional": est.conditional, "block": est.block}}
    _csv(run.path("entropy.csv"), ["depth", "conditional", "block"],
         [[k + 1, a, b] for k, (a, b) in enumerate(zip(est.conditional, est.block))])


def cmd_linear_model(run):
    cfg = run.cfg
    m = run.map()
    K = cfg.range
    model = linear_model_map(m, max(cfg.depth, K), K)
    resid = check_functional_eq(model)
    dl = delta_of(m, max(cfg.depth, 2))
    res = {"map": m.spec(), "delta": model.delta, "delta_gap": dl.gap, "functional_residual": resid,
           "orbit": list(model.orbit)}
    tdepth = max(K + 2, min(cfg.depth, 16 if m.degree == 2 else 8))
    if m.degree ** tdepth <= cfg.budget:
        tab = dual_derivative_table(m, tdepth, cfg.budget)
        rec = reconstruct_from_dual(tab, K)
        res["reconstruction_diff"] = float(np.max(np.abs(rec - model.orbit)))
    _csv(run.path("linear_model.csv"), ["k", "L^k(0)"],
         [[k, float(v)] for k, v in enumerate(model.orbit)])
    run.results = res


def cmd_ba_field(run):
    cfg = run.cfg
    f, g = run.map(), run.map("map2")
    h = conjugacy_map(f, g, cfg.depth)
    # sample x off the dyadic grid, where the conjugacy inherits symmetry from the fixed point
    xs = np.sort(np.random.default_rng(cfg.seed).uniform(0, 1, 16))
    ys = [t for t in cfg.scales if t >= 4 * h.spacing]
    if not ys:
        raise ValueError("every scale is below the knot resolution; raise --depth")
    rows = beltrami_field(h, xs, ys)
    write_field_csv(rows, run.path("beltrami.csv"))
    prof = vanishing_profile(h, ys, xs)
    run.results = {"f": f.spec(), "g": g.spec(), "depth": cfg.depth,
                   "profile": {"y": prof.ys, "sup_abs_mu": prof.sup_mu},
                   "min_b": float(min(_b_values(h, xs, ys)))}
    run.verdict("b_positive", run.results["min_b"] > 0)


def _b_values(h, xs, ys):
    from .ba_extension import beltrami_at
    return [beltrami_at(h, complex(x, y)).b for y in ys for x in xs]


def cmd_entropy_scan_fs(run):
    cfg = run.cfg
    rows = []
    for s in cfg.s:
        m = make_map("fs-smooth", s=s, M=cfg.M)
        h = entropy_rohlin(m, lebesgue_density(cfg.grid))
        r = 1 - s
        bound = -math.log(s) - r * (1 + s) * math.log(r / cfg.M)
        rows.append([s, h, bound])
    hs = [r[1] for r in rows]
    decreasing = all(a > b for a, b in zip(hs, hs[1:]))
    below = all(r[1] <= r[2] for r in rows)
    _csv(run.path("entropy_scan.csv"), ["s", "entropy", "bound"], rows)
    run.results = {"M": cfg.M, "rows": rows, "decreasing": decreasing, "below_bound": below}
    run.verdict("decreasing", decreasing)
    worst = max(rows, key=lambda r: r[1] - r[2])
    run.verdict("below_bound", below, (f"s={worst[0]}", 0, worst[1]))


def cmd_dmax(run):
    cfg = run.cfg
    f, g = run.map(), run.map("map2")
    a = dual_derivative_table(f, cfg.depth, cfg.budget)
    b = dual_derivative_table(g, cfg.depth, cfg.budget)
    run.results = {"a": f.spec(), "b": g.spec(), "depth_a": a.depth, "depth_b": b.depth,
                   "dmax": dmax_distance(a, b)}


HANDLERS = {
    "map-report": cmd_map_report, "dual-deriv": cmd_dual_deriv,
    "check-conditions": cmd_check_conditions, "conjugacy": cmd_conjugacy,
    "measure": cmd_measure, "entropy": cmd_entropy, "linear-model": cmd_linear_model,
    "ba-field": cmd_ba_field, "entropy-scan-fs": cmd_entropy_scan_fs, "dmax": cmd_dmax,
}


def summary(run, error=None):
    cfg = asdict(run.cfg)
    doc = {"schema_version": SCHEMA_VERSION, "command": run.cfg.command, "config": cfg,
           "results": run.results, "verdicts": run.verdicts, "tables": sorted(run.tables),
           "status": run.status,
           "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
    if error:
        doc["error"] = error
    return _clean(doc)


def dump(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _leaves(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _leaves(v, f"{prefix}/{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _leaves(v, f"{prefix}/{i}")
    else:
        yield prefix, obj


def compare_golden(results, golden):
    tol = golden.get("tolerance", {"rtol": 1e-9, "atol": 1e-12})
    want = dict(_leaves(golden["results"]))
    got = dict(_leaves(_clean(results)))
    bad = []
    for key, w in want.items():
        if key not in got:
            bad.append(f"{key}: missing")
            continue
        g = got[key]
        if isinstance(w, (int, float)) and not isinstance(w, bool) and isinstance(g, (int, float)):
            if abs(g - w) > tol["atol"] + tol["rtol"] * abs(w):
                bad.append(f"{key}: got {g!r}, golden {w!r}")
        elif g != w:
            bad.append(f"{key}: got {g!r}, golden {w!r}")
    return bad


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        make_map(cfg.map)
        if args.command in ("conjugacy", "dmax", "ba-field"):
            make_map(cfg.map2)
    except (ConfigError, MapError, OSError) as exc:
        print(f"circlelab: invalid configuration: {exc}", file=sys.stderr)
        return 2
    run = Run(cfg)
    error = None
    try:
        HANDLERS[cfg.command](run)
    except (ConvergenceError, RuntimeError) as exc:
        run.status, error = 3, str(exc)
    except (BudgetError, MapError, ValueError) as exc:
        print(f"circlelab: invalid configuration: {exc}", file=sys.stderr)
        return 2
    doc = summary(run, error)
    with open(os.path.join(cfg.out, "summary.json"), "w") as fh:
        fh.write(dump(doc))
    if error:
        print(f"circlelab: {error}", file=sys.stderr)
        return 3
    if args.pin:
        with open(args.pin, "w") as fh:
            fh.write(dump({"command": cfg.command, "results": doc["results"],
                           "tolerance": {"rtol": 1e-9, "atol": 1e-12}}))
    if args.verify:
        with open(args.verify) as fh:
            golden = json.load(fh)
        bad = compare_golden(doc["results"], golden)
        for line in bad:
            print(f"golden mismatch {line}", file=sys.stderr)
        if bad:
            return 1
    for v in doc["verdicts"]:
        print(f"{v['check']}: {v['verdict']}")
    print(f"wrote {os.path.join(cfg.out, 'summary.json')}")
    return run.status


if __name__ == "__main__":
    sys.exit(main())
