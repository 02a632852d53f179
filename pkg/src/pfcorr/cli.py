"""Command-line front end.

Subcommands::

    density    grid of the one-point function rho_1
    correlate  rho at listed point tuples
    skewpoly   expansion coefficients and skew norms as CSV
    verify     invariant suite with machine-readable pass/fail report
    mc         sampler vs analytic density comparison with per-bin z-scores
    em-check   Pfaffian-to-determinant reduction equality report
    walkers    exact vicious-walker law vs rejection simulation

Configuration is a JSON file selected with --config; command-line flags
override file values.  Exit codes: 0 pass, 1 check failure, 2 configuration
error.  The RNG seed is echoed into every output header and equal
configuration + seed produce byte-identical files.  PFCORR_THREADS sets the
sampler worker count.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import measures
from .correlations import (EnsembleSpec, PointConfiguration, correlation, density,
                           density_dx, integrate_density, integrate_pair_density,
                           make_ensemble, pair_correlation)
from .kernels import dyson_chain
from .linalg import determinant, pfaffian
from .skewpoly import classical_table, construct_numeric, pair_matrix, table_kernel
from .orthopoly import build_family, norm_closed_form
from . import montecarlo as mc
from .separable import SeparableSpec, em_reduction_check

_ENSEMBLE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "family": {"enum": ["hermite", "laguerre", "jacobi", "symhahn",
                            "dchebyshev", "dexp"]},
        "case": {"enum": ["I", "II"]},
        "N": {"type": "integer", "minimum": 1},
        "a": {"type": "number"},
        "b": {"type": "number"},
        "L": {"type": "integer", "minimum": 0},
        "q": {"type": "number"},
        "alpha": {"type": "number"},
        "taus": {"type": "array", "items": {"type": "number"}},
    },
    "required": ["family", "N"],
}

_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": ["density", "correlate", "skewpoly", "verify",
                             "mc", "em-check", "walkers"]},
        "ensemble": _ENSEMBLE_SCHEMA,
        "grid": {
            "type": "object", "additionalProperties": False,
            "properties": {"start": {"type": "number"}, "stop": {"type": "number"},
                           "count": {"type": "integer", "minimum": 1},
                           "slice": {"type": "integer", "minimum": 0}},
        },
        "points": {"type": "array", "items": {"type": "number"}},
        "tuples": {"type": "array", "items": {
            "type": "object", "additionalProperties": False,
            "properties": {"id": {"type": "string"},
                           "points": {"type": "array",
                                      "items": {"type": "array",
                                                "items": {"type": "number"}}}},
            "required": ["points"]}},
        "mc": {
            "type": "object", "additionalProperties": False,
            "properties": {"samples": {"type": "integer", "minimum": 1},
                           "seed": {"type": "integer"},
                           "bins": {"type": "integer", "minimum": 2}},
        },
        "walkers": {
            "type": "object", "additionalProperties": False,
            "properties": {"N": {"type": "integer", "minimum": 1},
                           "K": {"type": "integer", "minimum": 2},
                           "X": {"type": "array", "items": {"type": "integer"}},
                           "L": {"type": "number"},
                           "samples": {"type": "integer", "minimum": 1},
                           "seed": {"type": "integer"}},
        },
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {"path": {"type": "string"},
                           "format": {"enum": ["csv", "json"]}},
        },
        "tolerances": {"type": "object",
                       "additionalProperties": {"type": "number"}},
    },
    "required": ["command"],
}

_DEFAULT_TOL = {
    "pfaffian": 1e-10,
    "orthogonality": 1e-9,
    "table": 1e-8,
    "skew_residual": 1e-8,
    "sum_rule": 1e-6,
    "hierarchy": 1e-6,
    "gauge": 1e-9,
    "em": 1e-8,
    "mc_z": 4.0,
    "mc_frac": 0.95,
    "walker_tv_sigma": 3.0,
}


class ConfigError(Exception):
    pass


def _measure_from(ens: dict):
    fam = ens["family"]
    if fam == "laguerre":
        return measures.laguerre(ens.get("a", 0.0))
    if fam == "jacobi":
        return measures.jacobi(ens.get("a", 0.0), ens.get("b", 0.0))
    if fam == "symhahn":
        return measures.symhahn(ens.get("L", 10))
    if fam == "dchebyshev":
        return measures.dchebyshev(ens.get("L", 10))
    if fam == "dexp":
        return measures.dexp(ens.get("q", 0.5))
    return measures.hermite()


def _ensemble_from(cfg: dict) -> EnsembleSpec:
    ens = cfg.get("ensemble")
    if ens is None:
        raise ConfigError("configuration requires an 'ensemble' section")
    m = _measure_from(ens)
    case = ens.get("case", "I")
    chain = None
    if ens.get("taus"):
        if ens["family"] != "hermite" or case != "I":
            raise ConfigError("parametric chains are supported for hermite case I")
        chain = dyson_chain(ens["taus"], ens["N"])
    return make_ensemble(m, case, ens["N"], chain=chain,
                         alpha=ens.get("alpha", 0.0))


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _emit(cfg: dict, header: dict, columns, rows) -> None:
    out = cfg.get("output", {})
    fmt = out.get("format", "csv")
    path = out.get("path")
    lines = []
    if fmt == "csv":
        for k in sorted(header):
            lines.append(f"# {k}={header[k]}")
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(v) if isinstance(v, (int, float, np.floating, np.integer))
                                  else str(v) for v in row))
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({"header": header,
                           "rows": [dict(zip(columns, [float(v) if isinstance(v, (np.floating, np.integer)) else v
                                                       for v in row])) for row in rows]},
                          indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands --------------------------------------------------------------

def _cmd_density(cfg):
    spec = _ensemble_from(cfg)
    grid = cfg.get("grid")
    if cfg.get("points") is not None:
        xs = np.asarray(cfg["points"], dtype=float)
        sl = 0
    elif grid is not None:
        xs = np.linspace(grid["start"], grid["stop"], grid["count"])
        sl = grid.get("slice", 0)
    else:
        raise ConfigError("density needs 'grid' or 'points'")
    vals = density(spec, sl, xs)
    rows = [(sl, x, v) for x, v in zip(xs, vals)]
    _emit(cfg, {"command": "density", "N": spec.N, "seed": "none"},
          ("slice", "x", "rho1"), rows)
    return 0


def _cmd_correlate(cfg):
    spec = _ensemble_from(cfg)
    tuples = cfg.get("tuples")
    if tuples is None:
        raise ConfigError("correlate needs 'tuples'")
    rows = []
    for i, t in enumerate(tuples):
        pts = PointConfiguration.of(*t["points"])
        rows.append((t.get("id", str(i)), correlation(spec, pts)))
    _emit(cfg, {"command": "correlate", "N": spec.N, "seed": "none"},
          ("id", "rho"), rows)
    return 0


def _cmd_skewpoly(cfg):
    spec = _ensemble_from(cfg)
    ens = cfg["ensemble"]
    m = _measure_from(ens)
    N = ens["N"]
    fam = build_family(m, N - 1)
    try:
        table = classical_table(fam, ens.get("case", "I"), N, ens.get("alpha", 0.0))
    except ValueError:
        table = construct_numeric(spec.kernel, fam, N)
    rows = []
    for k in range(N):
        for j in range(k + 1):
            rows.append(("alpha", k, j, table.coeff[k, j]))
    for k in range(N // 2):
        rows.append(("r", k, 0, table.r[k]))
    _emit(cfg, {"command": "skewpoly", "N": N, "seed": "none"},
          ("quantity", "k", "j", "value"), rows)
    return 0


def _cmd_verify(cfg):
    tol = dict(_DEFAULT_TOL)
    tol.update(cfg.get("tolerances", {}))
    checks = []

    def check(name, value, t):
        checks.append((name, float(value), float(t), bool(value <= t)))

    rng = np.random.default_rng(12345)
    worst = 0.0
    for n in range(2, 13, 2):
        for _ in range(20):
            a = rng.standard_normal((n, n))
            a = a - a.T
            pf = pfaffian(a)
            dt = determinant(a)
            worst = max(worst, abs(pf * pf - dt) / max(abs(dt), 1e-300))
    check("pfaffian_sq_vs_det", worst, tol["pfaffian"])

    spec = _ensemble_from(cfg)
    ens = cfg["ensemble"]
    m = _measure_from(ens)
    N = spec.formal_N
    fam = build_family(m, max(N - 1, 8))
    rule = (m.quadrature_rule(4 * fam.max_order + 8) if not m.is_discrete
            else m.quadrature_rule(1))
    vals = fam.eval_all(min(8, fam.max_order), rule.nodes)
    G = (vals * rule.weights[None, :]) @ vals.T
    off = G - np.diag(np.diag(G))
    hs = np.sqrt(np.diag(G))
    check("orthogonality_residual",
          np.max(np.abs(off) / np.outer(hs, hs)), tol["orthogonality"])

    case = ens.get("case", "I")
    try:
        table = classical_table(fam, case, N, ens.get("alpha", 0.0))
        numeric = construct_numeric(table.kernel, fam, N)
        dr = np.max(np.abs(table.r[:N // 2] - numeric.r[:N // 2]) / np.abs(table.r[:N // 2]))
        check("table_vs_gram_r", dr, tol["table"])
        P = pair_matrix(numeric)
        res = P.copy()
        for k in range(N // 2):
            res[2 * k, 2 * k + 1] -= numeric.r[k]
            res[2 * k + 1, 2 * k] += numeric.r[k]
        check("skew_residual", np.max(np.abs(res)) / np.max(numeric.r[:N // 2]),
              tol["skew_residual"])
    except ValueError:
        pass

    check("sum_rule", abs(integrate_density(spec, 0) - spec.N) / spec.N,
          tol["sum_rule"])
    if not m.is_discrete:
        x0 = 0.4 if m.kind != "jacobi" else 0.2
        ip = integrate_pair_density(spec, 0, x0)
        r1 = density(spec, 0, x0)
        check("hierarchy", abs(ip - (spec.N - 1) * r1) / max(spec.N * r1, 1e-12),
              tol["hierarchy"])

    # gauge invariance: random v shifts leave rho unchanged
    vshift = rng.standard_normal((N + 1) // 2)
    spec_v = make_ensemble(m, case, ens["N"], alpha=ens.get("alpha", 0.0),
                           use_table=False, v=vshift)
    spec0 = make_ensemble(m, case, ens["N"], alpha=ens.get("alpha", 0.0),
                          use_table=False)
    xs = m.discrete_nodes()[:2] if m.is_discrete else np.array([0.1, 0.6])
    g0 = density(spec0, 0, xs)
    g1 = density(spec_v, 0, xs)
    check("gauge_invariance", np.max(np.abs(g0 - g1) / np.abs(g0)), tol["gauge"])

    rows = [(n, v, t, "pass" if ok else "fail") for (n, v, t, ok) in checks]
    _emit(cfg, {"command": "verify", "seed": 12345},
          ("check", "value", "tolerance", "status"), rows)
    return 0 if all(ok for *_, ok in checks) else 1


def _cmd_mc(cfg):
    spec = _ensemble_from(cfg)
    ens = cfg["ensemble"]
    if ens["family"] != "hermite" or spec.chain is not None:
        raise ConfigError("mc comparison supports hermite ensembles (GOE/GSE)")
    mcc = cfg.get("mc", {})
    samples = mcc.get("samples", 20000)
    seed = mcc.get("seed", 0)
    tol = dict(_DEFAULT_TOL)
    tol.update(cfg.get("tolerances", {}))
    case = ens.get("case", "I")
    batch = (mc.sample_goe(spec.N, samples, seed) if case == "I"
             else mc.sample_gse(spec.N, samples, seed))
    bins = mcc.get("bins")
    edges = None
    if bins:
        v = batch.samples.ravel()
        edges = np.linspace(v.min(), v.max(), bins + 1)
    rep = mc.compare_histogram(batch, lambda x: density_dx(spec, 0, x), bins=edges)
    rows = [(rep.edges[i], rep.edges[i + 1], rep.observed[i], rep.expected[i],
             rep.zscores[i]) for i in range(len(rep.zscores))]
    _emit(cfg, {"command": "mc", "ensemble": batch.ensemble, "N": spec.N,
                "samples": samples, "seed": seed,
                "z_tolerance": tol["mc_z"], "frac_required": tol["mc_frac"]},
          ("bin_left", "bin_right", "empirical", "analytic", "zscore"), rows)
    return 0 if rep.frac_within(tol["mc_z"]) >= tol["mc_frac"] else 1


def _cmd_em_check(cfg):
    ens = cfg.get("ensemble")
    if ens is None or not ens.get("taus"):
        raise ConfigError("em-check needs an ensemble with chain times 'taus'")
    tol = dict(_DEFAULT_TOL)
    tol.update(cfg.get("tolerances", {}))
    N = ens["N"]
    spec1 = make_ensemble(_measure_from(ens), "I", N)
    sub = dyson_chain(ens["taus"], N)
    sep = SeparableSpec(spec1, sub)
    pts_cfg = cfg.get("tuples")
    if pts_cfg:
        configs = [(t.get("id", str(i)), t["points"]) for i, t in enumerate(pts_cfg)]
    else:
        configs = [("default", [[0.3]] + [[0.1]] * sub.n_slices)]
    rows = []
    ok = True
    for cid, points in configs:
        lhs, rhs = em_reduction_check(sep, PointConfiguration.of(*points))
        rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
        ok = ok and rel <= tol["em"]
        rows.append((cid, lhs, rhs, rel, tol["em"]))
    _emit(cfg, {"command": "em-check", "N": N, "seed": "none"},
          ("id", "lhs", "rhs", "rel_error", "tolerance"), rows)
    return 0 if ok else 1


def _cmd_walkers(cfg):
    w = cfg.get("walkers")
    if w is None:
        raise ConfigError("walkers needs a 'walkers' section")
    tol = dict(_DEFAULT_TOL)
    tol.update(cfg.get("tolerances", {}))
    cfg_w = mc.WalkerConfig(w.get("N", 2), w.get("K", 6),
                            tuple(w.get("X", list(range(w.get("N", 2))))),
                            L=w.get("L", 1.0))
    samples = w.get("samples", 20000)
    seed = w.get("seed", 0)
    _, ends, rate = mc.simulate_walkers(cfg_w, samples, seed)
    law = {}
    if cfg_w.N <= 2 and cfg_w.K <= 12:
        law = mc.enumerate_vicious(cfg_w)
    else:
        for e in map(tuple, ends):
            if e not in law:
                law[e] = mc.vicious_count(cfg_w, list(e))
    surv = sum(law.values())
    rows = []
    tv = 0.0
    emp = {}
    for e in map(tuple, ends):
        emp[e] = emp.get(e, 0) + 1
    for Y in sorted(set(law) | set(emp)):
        p = law.get(Y, mc.vicious_count(cfg_w, list(Y))) / surv
        f = emp.get(Y, 0) / len(ends)
        tv += abs(p - f)
        rows.append(("/".join(map(str, Y)), p, f))
    tv *= 0.5
    # Under the exact law, f_i - p_i ~ N(0, p_i (1-p_i)/n); TV = 0.5 sum |.|
    sigmas = np.array([np.sqrt(p * (1 - p) / len(ends))
                       for p in (law[Y] / surv for Y in law)])
    mean_tv = 0.5 * np.sqrt(2.0 / np.pi) * sigmas.sum()
    sd_tv = 0.5 * np.sqrt((1.0 - 2.0 / np.pi) * np.sum(sigmas ** 2))
    bound = mean_tv + tol["walker_tv_sigma"] * sd_tv
    rows.append(("TV", tv, bound))
    _emit(cfg, {"command": "walkers", "samples": samples, "seed": seed,
                "acceptance_rate": rate},
          ("id", "exact", "empirical"), rows)
    return 0 if tv <= bound else 1


_COMMANDS = {
    "density": _cmd_density,
    "correlate": _cmd_correlate,
    "skewpoly": _cmd_skewpoly,
    "verify": _cmd_verify,
    "mc": _cmd_mc,
    "em-check": _cmd_em_check,
    "walkers": _cmd_walkers,
}


def validate_config(cfg: dict) -> None:
    try:
        import jsonschema
        jsonschema.validate(cfg, _SCHEMA)
    except ImportError:  # fall back to a minimal structural check
        if not isinstance(cfg, dict) or "command" not in cfg:
            raise ConfigError("configuration must be an object with 'command'")
        unknown = set(cfg) - set(_SCHEMA["properties"])
        if unknown:
            raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
    except Exception as exc:
        raise ConfigError(str(exc)) from None


def run(cfg: dict) -> int:
    """Validate and execute a configuration; returns the exit status."""
    validate_config(cfg)
    cmd = _COMMANDS.get(cfg["command"])
    if cmd is None:
        raise ConfigError(f"unknown command {cfg['command']!r}")
    return cmd(cfg)


def _parse_args(argv):
    ap = argparse.ArgumentParser(prog="pfcorr", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--family")
    ap.add_argument("--case", choices=["I", "II"])
    ap.add_argument("--N", type=int)
    ap.add_argument("--a", type=float)
    ap.add_argument("--b", type=float)
    ap.add_argument("--L", type=int)
    ap.add_argument("--q", type=float)
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--taus", type=float, nargs="+")
    ap.add_argument("--grid", type=float, nargs=3, metavar=("START", "STOP", "COUNT"))
    ap.add_argument("--points", type=float, nargs="+")
    ap.add_argument("--samples", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--output")
    ap.add_argument("--format", choices=["csv", "json"])
    return ap.parse_args(argv)


def _merge_flags(cfg: dict, ns) -> dict:
    ens = dict(cfg.get("ensemble", {}))
    for key in ("family", "case", "N", "a", "b", "L", "q", "alpha", "taus"):
        val = getattr(ns, key)
        if val is not None:
            ens[key] = val
    if ens:
        cfg["ensemble"] = ens
    if ns.grid is not None:
        cfg["grid"] = {"start": ns.grid[0], "stop": ns.grid[1],
                       "count": int(ns.grid[2])}
    if ns.points is not None:
        cfg["points"] = list(ns.points)
    if ns.samples is not None or ns.seed is not None:
        mcc = dict(cfg.get("mc", {}))
        if ns.samples is not None:
            mcc["samples"] = ns.samples
        if ns.seed is not None:
            mcc["seed"] = ns.seed
        cfg["mc"] = mcc
        if "walkers" in cfg:
            wc = dict(cfg["walkers"])
            if ns.samples is not None:
                wc["samples"] = ns.samples
            if ns.seed is not None:
                wc["seed"] = ns.seed
            cfg["walkers"] = wc
    if ns.output is not None or ns.format is not None:
        out = dict(cfg.get("output", {}))
        if ns.output is not None:
            out["path"] = ns.output
        if ns.format is not None:
            out["format"] = ns.format
        cfg["output"] = out
    return cfg


def main(argv=None) -> int:
    ns = _parse_args(sys.argv[1:] if argv is None else argv)
    cfg = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(json.dumps({"error": f"cannot read config: {exc}"}), file=sys.stderr)
            return 2
    cfg["command"] = ns.command
    cfg = _merge_flags(cfg, ns)
    try:
        return run(cfg)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "kind": "config"}), file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, AssertionError) as exc:
        print(json.dumps({"error": str(exc), "kind": "check"}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
