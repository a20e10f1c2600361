"""Command-line front end.

    powermix solve      --config cfg.json --out out/
    powermix residual   --set problem.family=remark4 --set 'problem.T="usquared"' ...
    powermix simulate   --set simulate.equation=example1 --seed 7
    powermix moments    --set 'moments.transform={"gamma": {"a": 2, "b": 0.5}}'
    powermix conditions --set problem.family=theorem1 --set 'problem.A={"atom": [2, 1]}'
    powermix catalog

A config is one JSON document with sections ``problem``, ``grid``,
``solver``, ``simulate``, ``moments`` and ``residual`` plus ``seed`` and
``out``. ``--set key=value`` overrides flat key paths (``grid.nodes=1024``);
values are parsed as JSON and fall back to plain strings.

Laws in ``problem`` (``T``, ``A``, ``B``, ``Lambda``) are mixing-law
descriptors: ``{"atom": [loc, mass]}``, ``{"atoms": [[loc, mass], ...]}``,
``{"uniform": [lo, hi]}``, ``{"beta_tail": a}``, ``"example2d"``,
``"usquared"``, ``{"exp": mu}``. Transforms (``problem.reference``,
``residual.candidate``, ``simulate.F``, ``moments.transform``) are catalog
descriptors ``{identifier: {param: value}}``; ``powermix catalog`` lists them.

Exit status: 0 on convergence / pass, 2 on non-convergence or a failed
check, 1 on a configuration error.
"""

import argparse
import copy
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, mixing, simulate, solver, transforms
from .errors import ConditionError, ConfigError, PowermixError
from .grid import GridSpec
from .moments import mean_from_transform, second_moment_from_transform

COMMANDS = ("solve", "residual", "simulate", "moments", "conditions", "catalog")

DEFAULTS = {
    "problem": {"family": "compound_poisson", "mu": 1.0, "T": {"atom": [0.0, 1.0]},
                "A": None, "B": None, "Lambda": None, "lambda": None, "a": None,
                "reference": None},
    "grid": {"nodes": 512, "s_max": None, "s_min": None},
    "solver": {"tol": 1e-10, "max_iters": 500, "tau_mono": 1e-9},
    "residual": {"candidate": None, "tol": 1e-6},
    "simulate": {"equation": "example1", "F": {"exponential": {"mu": 1.0}},
                 "T": {"atom": [0.0, 1.0]}, "n": 1_000_000, "n_boot": 200,
                 "level": 0.99, "blocks": 1000},
    "moments": {"transform": {"exponential": {"mu": 1.0}}, "s0": None, "levels": 6},
    "seed": 0,
    "out": "out",
}

SECTIONS = ("problem", "grid", "solver", "residual", "simulate", "moments")


@dataclass
class RunConfig:
    command: str
    problem: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    residual: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)
    moments: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "out"

    @classmethod
    def from_dict(cls, doc, command=None):
        """Fill defaults and validate; raises ``ConfigError``."""
        if not isinstance(doc, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = set(SECTIONS) | {"command", "seed", "out"}
        for key in doc:
            if key not in known:
                raise ConfigError(key, "unknown top-level key")
        cmd = command or doc.get("command")
        if cmd not in COMMANDS:
            raise ConfigError("command", f"must be one of {COMMANDS}, got {cmd!r}")
        sections = {}
        for name in SECTIONS:
            given = doc.get(name) or {}
            if not isinstance(given, dict):
                raise ConfigError(name, "section must be an object")
            for key in given:
                if key not in DEFAULTS[name]:
                    raise ConfigError(f"{name}.{key}", "unknown key")
            merged = copy.deepcopy(DEFAULTS[name])
            merged.update(copy.deepcopy(given))
            sections[name] = merged
        cfg = cls(cmd, **sections, seed=doc.get("seed", DEFAULTS["seed"]),
                  out=doc.get("out", DEFAULTS["out"]))
        cfg.validate()
        return cfg

    def to_dict(self):
        d = {"command": self.command, "seed": self.seed, "out": self.out}
        for name in SECTIONS:
            d[name] = copy.deepcopy(getattr(self, name))
        return d

    def validate(self):
        seed = self.seed
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise ConfigError("seed", "must be an integer in [0, 2^64)")
        if not isinstance(self.out, str) or not self.out:
            raise ConfigError("out", "must be a non-empty path")
        g = self.grid
        _int(g["nodes"], "grid.nodes", 8)
        for key in ("s_max", "s_min"):
            if g[key] is not None:
                _pos(g[key], f"grid.{key}")
        s = self.solver
        _pos(s["tol"], "solver.tol")
        _int(s["max_iters"], "solver.max_iters", 1)
        _num(s["tau_mono"], "solver.tau_mono", 0.0)
        p = self.problem
        try:
            solver.Family(p["family"])
        except ValueError:
            raise ConfigError("problem.family",
                              f"unknown family {p['family']!r}; one of "
                              f"{[f.value for f in solver.Family]}") from None
        _pos(p["mu"], "problem.mu")
        for key in ("lambda", "a"):
            if p[key] is not None:
                _num(p[key], f"problem.{key}")
        for key in ("T", "A", "B", "Lambda"):
            if p[key] is not None:
                _law(p[key], f"problem.{key}")
        if p["reference"] is not None:
            _transform(p["reference"], "problem.reference")
        r = self.residual
        if r["candidate"] is not None:
            _transform(r["candidate"], "residual.candidate")
        _pos(r["tol"], "residual.tol")
        m = self.simulate
        if m["equation"] not in simulate.EQUATIONS:
            raise ConfigError("simulate.equation", f"must be one of {simulate.EQUATIONS}")
        _transform(m["F"], "simulate.F")
        _law(m["T"], "simulate.T")
        _int(m["n"], "simulate.n", simulate.MIN_N)
        _int(m["n_boot"], "simulate.n_boot", 10)
        _int(m["blocks"], "simulate.blocks", 2)
        _num(m["level"], "simulate.level", 0.0)
        if not m["level"] < 1:
            raise ConfigError("simulate.level", "must be < 1")
        mo = self.moments
        _transform(mo["transform"], "moments.transform")
        if mo["s0"] is not None:
            _pos(mo["s0"], "moments.s0")
        _int(mo["levels"], "moments.levels", 1)
        if self.command == "residual" and r["candidate"] is None:
            raise ConfigError("residual.candidate", "required for the residual command")


def _num(v, name, lo=None):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(name, f"must be a finite number, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(name, f"must be >= {lo}, got {v!r}")
    return float(v)


def _pos(v, name):
    if _num(v, name) <= 0:
        raise ConfigError(name, f"must be positive, got {v!r}")


def _int(v, name, lo):
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ConfigError(name, f"must be an integer >= {lo}, got {v!r}")


def _law(desc, name):
    try:
        return mixing.from_descriptor(desc)
    except PowermixError as exc:
        raise ConfigError(name, str(exc)) from None


def _transform(desc, name):
    try:
        return transforms.from_descriptor(desc)
    except PowermixError as exc:
        raise ConfigError(name, str(exc)) from None
    except TypeError as exc:
        raise ConfigError(name, str(exc)) from None


def apply_overrides(doc, pairs):
    """Apply ``key.path=value`` overrides to a config document in place."""
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(pair, "override must look like key=value")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        parts = key.strip().split(".")
        node = doc
        for part in parts[:-1]:
            nxt = node.get(part)
            if nxt is None:
                nxt = node[part] = {}
            if not isinstance(nxt, dict):
                raise ConfigError(key, f"{part} is not a section")
            node = nxt
        node[parts[-1]] = value
    return doc


def build_problem(cfg):
    p = cfg.problem
    fam = solver.Family(p["family"])
    presets = solver._preset_laws(fam)
    laws = {}
    for key, attr in (("T", "T"), ("A", "A"), ("B", "B"), ("Lambda", "Lam")):
        if p[key] is None:
            continue
        if attr in presets:
            raise ConfigError(f"problem.{key}", f"fixed by the {fam.value} preset; remove it")
        laws[attr] = _law(p[key], f"problem.{key}")
    g = cfg.grid
    try:
        return solver.Problem(
            fam, mu=float(p["mu"]), lam=p["lambda"], a=p["a"],
            grid=GridSpec(g["nodes"], g["s_max"], g["s_min"]),
            tol=float(cfg.solver["tol"]), max_iters=cfg.solver["max_iters"],
            tau_mono=float(cfg.solver["tau_mono"]), **laws)
    except PowermixError as exc:
        raise ConfigError("problem", str(exc)) from None


def tolerances(cfg):
    return {
        "solver.tol": cfg.solver["tol"], "solver.tau_mono": cfg.solver["tau_mono"],
        "conditions.equality_rtol": solver.EQ_TOL,
        "conditions.borderline_E[T]": solver.BORDER_TOL,
        "mixing.mass_tol": mixing.MASS_TOL, "residual.tol": cfg.residual["tol"],
        "simulate.level": cfg.simulate["level"], "simulate.n_boot": cfg.simulate["n_boot"],
    }


def _write_report(cfg, body):
    os.makedirs(cfg.out, exist_ok=True)
    doc = {"tool": "powermix", "version": __version__, "command": cfg.command,
           "config": cfg.to_dict(), "tolerances": tolerances(cfg)}
    doc.update(body)
    path = os.path.join(cfg.out, "report.json")
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2)
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_nodes(path, s, values, reference=None):
    """CSV node table with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "F", "reference", "abs_gap"])
        for i in range(len(s)):
            ref = "" if reference is None else f"{reference[i]:.17g}"
            gap = "" if reference is None else f"{abs(values[i] - reference[i]):.17g}"
            w.writerow([f"{s[i]:.17g}", f"{values[i]:.17g}", ref, gap])


# --- commands -------------------------------------------------------------------

def cmd_conditions(cfg):
    prob = build_problem(cfg)
    rec = solver.check_conditions(prob)
    for name, ok, detail in rec.checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}")
    if not rec.passed:
        print("; ".join(rec.failures), file=sys.stderr)
    _write_report(cfg, {"conditions": rec.as_dict()})
    return 0 if rec.passed else 2


def cmd_solve(cfg):
    prob = build_problem(cfg)
    try:
        rep = solver.solve(prob)
    except ConditionError as exc:
        print(str(exc), file=sys.stderr)
        _write_report(cfg, {"conditions": solver.check_conditions(prob).as_dict()})
        return 2
    s, vals = rep.core_nodes, rep.core_values
    ref = None
    body = {"summary": rep.summary(), "conditions": rep.conditions.as_dict(),
            "deltas": rep.deltas, "ascents": rep.ascents,
            "m1_trace": rep.m1_trace, "m2_trace": rep.m2_trace}
    if cfg.problem["reference"] is not None:
        target = _transform(cfg.problem["reference"], "problem.reference")
        ref = np.asarray(target(s), dtype=float)
        body["reference_sup_error"] = float(np.max(np.abs(vals - ref)))
    os.makedirs(cfg.out, exist_ok=True)
    write_nodes(os.path.join(cfg.out, "nodes.csv"), s, vals, ref)
    _write_report(cfg, body)
    ok = rep.converged and rep.mono_violations == 0
    print(f"converged={rep.converged} iterations={rep.iterations} "
          f"final_delta={rep.deltas[-1]:.3g} m1={rep.m1:.12g} m2={rep.m2:.12g} "
          f"variance_residual={rep.variance_residual:.3g}"
          + (f" reference_sup_error={body['reference_sup_error']:.3g}" if ref is not None else ""))
    return 0 if ok else 2


def cmd_residual(cfg):
    prob = build_problem(cfg)
    cand = _transform(cfg.residual["candidate"], "residual.candidate")
    s, n_core = solver.grid_nodes(prob)
    s = s[:n_core]
    f = np.asarray(cand(s), dtype=float)
    if prob.family is solver.Family.REMARK4:
        img = np.exp(-mixing.sigma_star(cand, prob.T, s))
    else:
        img = solver.family_map(prob, mixing.sigma(cand, prob.T, s))
    res = float(np.max(np.abs(f - img)))
    os.makedirs(cfg.out, exist_ok=True)
    write_nodes(os.path.join(cfg.out, "nodes.csv"), s, f, img)
    ok = res <= cfg.residual["tol"]
    _write_report(cfg, {"residual": res, "passed": ok})
    print(f"residual={res:.3g} tol={cfg.residual['tol']:.3g} passed={ok}")
    return 0 if ok else 2


def cmd_simulate(cfg):
    m = cfg.simulate
    spec = simulate.EquationSpec(
        m["equation"], _transform(m["F"], "simulate.F"), _law(m["T"], "simulate.T"),
        n=m["n"], seed=cfg.seed, n_boot=m["n_boot"], level=m["level"], blocks=m["blocks"])
    rep = simulate.verify_equation(spec)
    _write_report(cfg, {"simulation": rep.as_dict()})
    print(f"{rep.equation}: gap={rep.gap:.3g} threshold={rep.threshold:.3g} passed={rep.passed}")
    return 0 if rep.passed else 2


def cmd_moments(cfg):
    mo = cfg.moments
    t = _transform(mo["transform"], "moments.transform")
    body = {"declared": {"m1": t.mean, "m2": t.m2}}
    try:
        m1 = mean_from_transform(t, s0=mo["s0"], levels=mo["levels"])
        mu = t.mean if t.mean is not None else m1.value
        m2 = second_moment_from_transform(t, mu, s0=mo["s0"], levels=mo["levels"])
    except PowermixError as exc:
        print(f"extraction failed: {exc}", file=sys.stderr)
        _write_report(cfg, dict(body, error=str(exc)))
        return 2
    body["extracted"] = {"m1": m1.value, "m1_error": m1.error, "m1_levels": m1.levels,
                         "m2": m2.value, "m2_error": m2.error, "m2_levels": m2.levels}
    _write_report(cfg, body)
    print(f"m1={m1.value:.15g} (+-{m1.error:.2g}) m2={m2.value:.15g} (+-{m2.error:.2g})")
    return 0


def cmd_catalog(cfg):
    doc = {
        "transforms": transforms.CATALOG_SCHEMA,
        "mixing_laws": {
            "atom": "[loc, mass]", "atoms": "[[loc, mass], ...]", "uniform": "[lo, hi]",
            "beta_tail": "a > 0  (F_T(x) = 1 - (1 - x)^a)",
            "example2d": "density 1/sqrt(t) - 1 on (0, 1)", "usquared": "law of U^2",
            "exp": "mean mu > 0 (truncated at the 1 - 1e-12 quantile)"},
        "families": [f.value for f in solver.Family],
        "equations": list(simulate.EQUATIONS),
    }
    print(json.dumps(doc, indent=2))
    return 0


HANDLERS = {"solve": cmd_solve, "residual": cmd_residual, "simulate": cmd_simulate,
            "moments": cmd_moments, "conditions": cmd_conditions, "catalog": cmd_catalog}


def parse_args(argv):
    ap = argparse.ArgumentParser(prog="powermix", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON config document")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a flat key path, e.g. grid.nodes=1024 (repeatable)")
    ap.add_argument("--out", help="output directory for report.json / nodes.csv")
    ap.add_argument("--seed", type=int, help="random seed (u64)")
    return ap.parse_args(argv)


def load_config(args):
    doc = {}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    apply_overrides(doc, args.set)
    if args.out is not None:
        doc["out"] = args.out
    if args.seed is not None:
        doc["seed"] = args.seed
    doc.pop("command", None)
    return RunConfig.from_dict(doc, command=args.command)


def run(cfg):
    """Execute a validated ``RunConfig``; returns the exit status."""
    try:
        return HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except PowermixError as exc:
        print(f"error [{_provenance(exc)}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def _provenance(exc):
    # module of the innermost frame that raised
    tb = exc.__traceback__
    name = "?"
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", name)
        tb = tb.tb_next
    return name


def main(argv=None):
    args = parse_args(sys.argv[1:] if argv is None else argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
