"""Command-line runner: one subcommand per estimator or oracle.

Every run writes a JSON summary (``--out``, else stdout) with the fields
``schema, experiment, model, params, seed, n, value, stderr, extra`` and,
where a table makes sense, a CSV (``--csv``).  Settings can come from a
JSON config file (``--config``); flags given on the command line win.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import jsonschema
import numpy as np

from . import acceptance, oracles
from .ensembles import MODELS, Dist, DysonString, EnsembleSpec, FrischLloyd, KronigPenney, finite_support
from .errors import NumericalError, ValidationError
from .ising import free_energy_density
from .lyapunov import gamma_furstenberg, gamma_norm_growth, strong_irreducibility
from .riccati import (RiccatiOrbitConfig, first_passage_stats, pv_gamma, rice_ids, sde_white_noise_run,
                      stationary_histogram)
from .scattering import decay_rate, reflexion_phase_histogram
from .spectral import (BoundaryData, Realization, complex_lyapunov, ids_node_counting, sample_realization,
                       spectral_parameter, weyl_cf_truncated)

SCHEMA_VERSION = 1

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "disorder-rmt experiment config",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "experiment": {"type": "string"},
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["model"],
            "properties": {"model": {"type": "string"}, "params": {"type": "object"}},
        },
        "grid": {"oneOf": [{"type": "string"}, {"type": "array", "items": {"type": "number"}}]},
        "n": {"type": "number", "minimum": 1},
        "L": {"type": "number", "exclusiveMinimum": 0},
        "replicas": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
        "csv": {"type": "string"},
        "options": {"type": "object"},
    },
}

# experiment-specific settings, with their types, accepted as flags or in "options"
OPTIONS = {
    "lyapunov": {"norm": str, "burnin": int},
    "furstenberg": {"burnin": int, "z0": float},
    "irreducible": {"depth": int},
    "ids": {"alpha": float},
    "omega": {"alpha": float},
    "weyl": {"lam": float, "eps": float, "alpha": float, "z_R": float, "realization": str},
    "riccati-hist": {"lam": float, "bins": int, "zmax": float, "burnin": int},
    "sde": {"E": float, "sigma": float, "dt": float, "bins": int, "zmax": float},
    "groundstate": {"E": float, "sigma": float, "samples": int, "dt": float, "window": float},
    "scatter": {"k": float, "phase": int, "phase_bins": int},
    "ising": {},
    "oracle": {"name": str, "E": float, "sigma": float, "lam": float, "m": float, "ell": float, "v": float,
               "p": float, "q": float, "alpha": float, "beta": float, "k": float},
    "selftest": {"only": str},
}

DEFAULTS = {"seed": 0, "replicas": 1}


# ---------------------------------------------------------------------------
# parsing helpers


def parse_grid(text) -> list[float]:
    """``"a:b:count"`` (inclusive, evenly spaced), a comma list, or a list of numbers."""
    if isinstance(text, list):
        return [float(x) for x in text]
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"grid {text!r} must look like start:stop:count")
        a, b, c = float(parts[0]), float(parts[1]), int(float(parts[2]))
        if c < 1:
            raise ValidationError("grid count must be positive")
        return [float(x) for x in np.linspace(a, b, c)]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse grid {text!r}") from None


def parse_value(text: str):
    """A model parameter from the command line.

    JSON is tried first (numbers, objects); otherwise ``kind:p1,p2`` names
    a distribution, with ``choice:v1,v2|p1,p2`` for discrete laws.
    """
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    if ":" not in text:
        raise ValidationError(f"cannot parse parameter value {text!r}")
    kind, rest = text.split(":", 1)
    try:
        if kind == "choice":
            vals, probs = rest.split("|")
            return Dist.choice([float(x) for x in vals.split(",")], [float(x) for x in probs.split(",")]).to_dict()
        args = [float(x) for x in rest.split(",") if x]
    except ValueError:
        raise ValidationError(f"cannot parse distribution {text!r}") from None
    return Dist(kind, tuple(args)).to_dict()


def _merge(file_cfg: dict, args: argparse.Namespace, experiment: str) -> dict:
    cfg = dict(file_cfg)
    cfg["experiment"] = experiment
    for key in ("n", "L", "replicas", "seed", "workers", "out", "csv", "grid"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    model = dict(cfg.get("model", {}))
    if args.model is not None:
        if model.get("model") not in (None, args.model):
            model = {}
        model["model"] = args.model
    params = dict(model.get("params", {}))
    # distribution shorthand is accepted in config files as well as on the command line
    for k, v in params.items():
        if isinstance(v, str):
            params[k] = parse_value(v)
    if params:
        model["params"] = params
    if args.set:
        for item in args.set:
            if "=" not in item:
                raise ValidationError(f"--set expects key=value, got {item!r}")
            k, v = item.split("=", 1)
            params[k] = parse_value(v)
        model["params"] = params
    if model:
        cfg["model"] = model
    opts = dict(cfg.get("options", {}))
    for name, typ in OPTIONS[experiment].items():
        val = getattr(args, name, None)
        if val is not None:
            opts[name] = val
    unknown = set(opts) - set(OPTIONS[experiment])
    if unknown:
        raise ValidationError(f"unknown options {sorted(unknown)} for {experiment}")
    for name, typ in OPTIONS[experiment].items():
        if name in opts and opts[name] is not None:
            try:
                opts[name] = typ(opts[name])
            except (TypeError, ValueError):
                raise ValidationError(f"option {name} must be {typ.__name__}") from None
    cfg["options"] = opts
    for k, v in DEFAULTS.items():
        cfg.setdefault(k, v)
    cfg.setdefault("schema", SCHEMA_VERSION)
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"config: {exc.message}") from None
    return cfg


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"config {path}: {exc.message}") from None
    return cfg


def _spec(cfg, default=None) -> EnsembleSpec:
    model = cfg.get("model")
    if model is None:
        if default is None:
            raise ValidationError("this experiment needs --model")
        return default
    return EnsembleSpec.from_dict(model)


def _need(opts, name, what):
    if opts.get(name) is None:
        raise ValidationError(f"{what} needs --{name.replace('_', '-')}")
    return opts[name]


def _n(cfg, default):
    return int(float(cfg.get("n", default)))


# ---------------------------------------------------------------------------
# outputs


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def summary(cfg, spec, value, stderr=None, n=None, extra=None) -> dict:
    return _jsonable({
        "schema": SCHEMA_VERSION,
        "experiment": cfg["experiment"],
        "model": spec.tag if spec is not None else None,
        "params": spec.to_dict()["params"] if spec is not None else cfg.get("options", {}),
        "seed": cfg["seed"],
        "n": n,
        "value": value,
        "stderr": stderr,
        "extra": extra or {},
    })


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


# ---------------------------------------------------------------------------
# experiments


def run_lyapunov(cfg):
    spec = _spec(cfg)
    o = cfg["options"]
    est = gamma_norm_growth(spec, _n(cfg, 1e6), cfg["seed"], burnin=o.get("burnin", 1000),
                            norm=o.get("norm", "vector"), replicas=cfg["replicas"], workers=cfg.get("workers"))
    return summary(cfg, spec, est.value, est.stderr, est.n)


def run_furstenberg(cfg):
    spec = _spec(cfg)
    o = cfg["options"]
    est = gamma_furstenberg(spec, o.get("burnin", 1000), _n(cfg, 1e6), cfg["seed"], z0=o.get("z0"))
    return summary(cfg, spec, est.value, est.stderr, est.n)


def run_irreducible(cfg):
    spec = _spec(cfg)
    v = strong_irreducibility(finite_support(spec), depth=cfg["options"].get("depth", 4))
    return summary(cfg, spec, v.tag, extra={"witness_slopes": v.slopes()})


def ids_oracle(spec, lam):
    """Closed-form N for the models that have one, else nan."""
    if isinstance(spec, FrischLloyd) and spec.coupling.kind == "constant" and spec.coupling.params[0] == 0.0:
        return math.sqrt(lam) / math.pi if lam > 0 else 0.0
    if (isinstance(spec, DysonString) and spec.mass.kind == "exponential" and spec.spacing.kind == "exponential"
            and lam > 0):
        return oracles.kotani_N(lam, spec.mass.params[0], spec.spacing.params[0])
    if isinstance(spec, KronigPenney) and spec.v >= 0:
        # Bloch number in the extended zone; for v >= 0 band j sits in (j pi, (j+1) pi] of k ell
        if lam <= 0:
            return 0.0
        k = math.sqrt(lam)
        c = math.cos(k * spec.ell) + spec.v * math.sin(k * spec.ell) / (2 * k)
        j = math.ceil(k * spec.ell / math.pi) - 1
        if abs(c) > 1:
            return j / spec.ell
        q = j * math.pi + (math.acos(c) if j % 2 == 0 else math.pi - math.acos(c))
        return q / (math.pi * spec.ell)
    return math.nan


def _grid_or_single(cfg, spec):
    if "grid" in cfg:
        return parse_grid(cfg["grid"])
    return [float(spectral_parameter(spec))]


def run_ids(cfg):
    spec = _spec(cfg)
    rows = []
    for lam in _grid_or_single(cfg, spec):
        est = ids_node_counting(spec, lam, L=float(cfg.get("L", 1e4)), replicas=cfg["replicas"], rng=cfg["seed"],
                                alpha=cfg["options"].get("alpha", math.pi / 2), workers=cfg.get("workers"))
        rows.append((lam, est.value, ids_oracle(spec, lam), est.stderr))
    if "csv" in cfg:
        write_csv(cfg["csv"], ["lam", "N_mc", "N_oracle", "N_stderr"], rows)
    last = rows[-1]
    return summary(cfg, spec, last[1], last[3], None,
                   {"grid": [r[0] for r in rows], "N_mc": [r[1] for r in rows], "N_oracle": [r[2] for r in rows]})


def omega_oracle(spec, lam):
    if (isinstance(spec, FrischLloyd) and lam < 0 and spec.coupling.kind == "exponential"
            and spec.spacing.kind == "exponential"):
        return complex(oracles.nieuwenhuizen_omega_negative(lam, spec.spacing.params[0], spec.coupling.params[0]))
    if isinstance(spec, DysonString) and spec.mass.kind == "constant" and spec.spacing.kind == "constant":
        return oracles.homogeneous_string(lam, spec.mass.params[0], spec.spacing.params[0]).Omega
    if isinstance(spec, KronigPenney) and lam > 0:
        gamma = oracles.kronig_penney_gamma(math.sqrt(lam), spec.ell, spec.v)
        N = ids_oracle(spec, lam)
        return complex(gamma, -math.pi * N if math.isfinite(N) else math.nan)
    return complex(math.nan, math.nan)


def run_omega(cfg):
    spec = _spec(cfg)
    rows = []
    for lam in _grid_or_single(cfg, spec):
        est = complex_lyapunov(spec, lam, L=float(cfg.get("L", 1e4)), replicas=cfg["replicas"], rng=cfg["seed"],
                               alpha=cfg["options"].get("alpha", math.pi / 2), workers=cfg.get("workers"))
        ref = omega_oracle(spec, lam)
        rows.append((lam, est.value.real, est.value.imag, ref.real, ref.imag, est.gamma.stderr, est.N.stderr))
    if "csv" in cfg:
        write_csv(cfg["csv"], ["lam", "re_mc", "im_mc", "re_oracle", "im_oracle", "re_stderr", "N_stderr"], rows)
    r = rows[-1]
    return summary(cfg, spec, complex(r[1], r[2]), complex(r[5], math.pi * r[6]), None,
                   {"oracle": complex(r[3], r[4]), "grid": [x[0] for x in rows]})


def run_weyl(cfg):
    o = cfg["options"]
    spec = None
    if o.get("realization"):
        real = Realization.from_csv(o["realization"])
    else:
        spec = _spec(cfg)
        n = cfg.get("n")
        real = sample_realization(spec, cfg["seed"], L=None if n is not None else float(cfg.get("L", 100.0)),
                                  n=None if n is None else int(n))
    bc = BoundaryData(alpha=o.get("alpha", math.pi / 2), z_R=o.get("z_R", math.inf))
    lams = parse_grid(cfg["grid"]) if "grid" in cfg else [_need(o, "lam", "weyl")]
    eps = o.get("eps", 0.0)
    vals = [weyl_cf_truncated(real, complex(lam, eps), bc) for lam in lams]
    if "csv" in cfg:
        write_csv(cfg["csv"], ["lam", "eps", "w_re", "w_im"], [(lam, eps, w.real, w.imag) for lam, w in zip(lams, vals)])
    return summary(cfg, spec, vals[-1], None, real.n, {"L": real.L, "grid": lams})


def run_riccati_hist(cfg):
    spec = _spec(cfg)
    o = cfg["options"]
    rc = RiccatiOrbitConfig(lam=o.get("lam"), burnin=o.get("burnin", 1000), steps=_n(cfg, 1e6), zmax=o.get("zmax"))
    hist = stationary_histogram(spec, rc, o.get("bins", 400), cfg["seed"])
    if "csv" in cfg:
        hist.to_csv(cfg["csv"])
    extra = {"tail_mass": hist.tail_mass}
    try:
        extra["rice_N"] = rice_ids(hist)
    except NumericalError as exc:
        extra["rice_N"] = f"unresolved: {exc}"
    extra["pv_mean"] = pv_gamma(hist)
    return summary(cfg, spec, extra["pv_mean"], None, hist.n, extra)


def run_sde(cfg):
    o = cfg["options"]
    E, sigma = _need(o, "E", "sde"), _need(o, "sigma", "sde")
    rc = RiccatiOrbitConfig(zmax=o.get("zmax"))
    res = sde_white_noise_run(E, sigma, float(cfg.get("L", 1e4)), o.get("dt"), rc, cfg["seed"], bins=o.get("bins"))
    extra = {"gamma": res.gamma.value, "gamma_stderr": res.gamma.stderr, "crossings": res.crossings,
             "N_oracle": oracles.halperin_N(E, sigma), "Omega_oracle": oracles.halperin_omega(E, sigma)}
    extra.update(res.extra)
    if res.hist is not None:
        if "csv" in cfg:
            res.hist.to_csv(cfg["csv"])
        try:
            extra["rice_N"] = rice_ids(res.hist)
        except NumericalError as exc:
            extra["rice_N"] = f"unresolved: {exc}"
    return summary(cfg, None, res.N.value, res.N.stderr, res.steps, extra)


def run_groundstate(cfg):
    o = cfg["options"]
    E, sigma = _need(o, "E", "groundstate"), _need(o, "sigma", "groundstate")
    N = oracles.halperin_N(E, sigma)
    fp = first_passage_stats(E, sigma, o.get("samples", 1000), cfg["seed"], dt=o.get("dt"),
                             window=o.get("window", 3.0 / N))
    if "csv" in cfg:
        fp.to_csv(cfg["csv"])
    return summary(cfg, None, fp.mean, fp.stderr, fp.taus.size,
                   {"tau_oracle": 1.0 / N, "window": fp.window, "level_counts": fp.count_table()})


def run_scatter(cfg):
    spec = _spec(cfg)
    o = cfg["options"]
    k = o.get("k", math.sqrt(spec.E) if getattr(spec, "E", 0) > 0 else 1.0)
    lengths = parse_grid(cfg.get("grid", "50:300:6"))
    fit = decay_rate(spec, k, lengths, max(cfg["replicas"], 2), cfg["seed"], workers=cfg.get("workers"))
    extra = fit.to_dict()
    if o.get("phase"):
        ps = reflexion_phase_histogram(spec, int(o["phase"]), cfg["seed"] + 1, k=k, workers=cfg.get("workers"))
        extra["phase_degenerate"] = ps.degenerate
        if "csv" in cfg and not ps.degenerate:
            ps.to_csv(cfg["csv"], o.get("phase_bins", 32))
    elif "csv" in cfg:
        write_csv(cfg["csv"], ["L", "mean_log_T", "sem"], zip(fit.lengths, fit.means, fit.sems))
    return summary(cfg, spec, fit.slope, fit.stderr, len(lengths), extra)


def run_ising(cfg):
    spec = _spec(cfg)
    res = free_energy_density(spec, _n(cfg, 1e4), max(cfg["replicas"], 2), cfg["seed"], workers=cfg.get("workers"))
    return summary(cfg, spec, res.free_energy_density, res.stderr, res.n, {"replicas": res.replicas})


ORACLES = {
    "halperin": (("E", "sigma"), lambda E, sigma: {"N": oracles.halperin_N(E, sigma),
                                                    "Omega": oracles.halperin_omega(E, sigma)}),
    "kotani": (("lam", "m", "ell"), lambda lam, m, ell: (
        {"N": oracles.kotani_N(lam, m, ell)} if lam > 0 else {"mean_minus_w": oracles.kotani_letac_mean_w(lam, m, ell)})),
    "nieuwenhuizen": (("lam", "ell", "v"), lambda lam, ell, v: {"Omega": oracles.nieuwenhuizen_omega_negative(lam, ell, v)}),
    "free": (("alpha", "lam"), lambda alpha, lam: vars(oracles.free_case(alpha, lam))),
    "kronig-penney": (("k", "ell", "v"), lambda k, ell, v: {"in_band": oracles.kronig_penney_in_band(k, ell, v),
                                                          "gamma": oracles.kronig_penney_gamma(k, ell, v)}),
    "homogeneous-string": (("lam", "m", "ell"), lambda lam, m, ell: vars(oracles.homogeneous_string(lam, m, ell))),
    "dyson-type-i": (("lam", "p", "q"), lambda lam, p, q: {"mean_w": oracles.dyson_typeI(lam, p, q)}),
    "cohen-newman": (("alpha", "beta"), lambda alpha, beta: {
        "gamma_quadrature": oracles.cohen_newman_gamma_quadrature(alpha, beta),
        "gamma_closed": oracles.cohen_newman_gamma_closed(alpha, beta)}),
    "lifshitz": (("E", "sigma"), lambda E, sigma: {"log_N": oracles.lifshitz_tail(E, sigma)}),
}


def run_oracle(cfg):
    o = cfg["options"]
    name = _need(o, "name", "oracle")
    if name not in ORACLES:
        raise ValidationError(f"unknown oracle {name!r}; known: {sorted(ORACLES)}")
    args, fn = ORACLES[name]
    if "grid" in cfg:
        var = args[0]
        xs = parse_grid(cfg["grid"])
        vals = []
        for x in xs:
            kw = {a: (x if a == var else _need(o, a, f"oracle {name}")) for a in args}
            vals.append(fn(**kw))
        if "csv" in cfg:
            keys = list(vals[0])
            rows = []
            for x, v in zip(xs, vals):
                row = [x]
                for key in keys:
                    val = v[key]
                    row += [val.real, val.imag] if isinstance(val, complex) else [val]
                rows.append(row)
            header = [var]
            for key in keys:
                header += [f"{key}_re", f"{key}_im"] if isinstance(vals[0][key], complex) else [key]
            write_csv(cfg["csv"], header, rows)
        value = vals
    else:
        value = fn(**{a: _need(o, a, f"oracle {name}") for a in args})
    out = summary(cfg, None, value)
    out["params"] = _jsonable({"name": name, **o})
    return out


def run_selftest(cfg):
    only = cfg["options"].get("only")
    numbers = None if not only else {int(x) for x in only.split(",")}
    results = acceptance.run_all(numbers, echo=lambda line: print(line, file=sys.stderr, flush=True))
    passed = sum(r.passed for r in results)
    out = summary(cfg, None, f"{passed}/{len(results)}", extra={
        str(r.number): {"title": r.title, "passed": r.passed, "detail": r.detail} for r in results})
    out["_failed"] = passed != len(results)
    return out


EXPERIMENTS = {
    "lyapunov": (run_lyapunov, "lyapunov.gamma_norm_growth", "telescopic norm-growth Lyapunov exponent"),
    "furstenberg": (run_furstenberg, "lyapunov.gamma_furstenberg", "Furstenberg-formula Lyapunov exponent"),
    "irreducible": (run_irreducible, "lyapunov.strong_irreducibility", "strong-irreducibility search"),
    "ids": (run_ids, "spectral.ids_node_counting", "integrated density of states by node counting"),
    "omega": (run_omega, "spectral.complex_lyapunov", "complex Lyapunov exponent"),
    "weyl": (run_weyl, "spectral.weyl_cf_truncated", "truncated Weyl coefficient of one realization"),
    "riccati-hist": (run_riccati_hist, "riccati.stationary_histogram", "stationary Riccati histogram"),
    "sde": (run_sde, "riccati.sde_white_noise_run", "white-noise Riccati SDE"),
    "groundstate": (run_groundstate, "riccati.first_passage_stats", "ground-state first-passage statistics"),
    "scatter": (run_scatter, "scattering.decay_rate", "transmission decay and reflexion phase"),
    "ising": (run_ising, "ising.free_energy_density", "random-field Ising free energy"),
    "oracle": (run_oracle, "oracles", "closed-form oracle values"),
    "selftest": (run_selftest, "acceptance", "run the acceptance checks"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="disorder-rmt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name, (_, _, helptext) in EXPERIMENTS.items():
        sp = sub.add_parser(name, help=helptext, description=helptext)
        sp.add_argument("--config", help="JSON config file; flags override it")
        sp.add_argument("--model", choices=sorted(MODELS), help="ensemble tag")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="model parameter, e.g. E=4 or coupling=exponential:1 (repeatable)")
        sp.add_argument("--n", type=float, help="number of factors, steps or spins")
        sp.add_argument("--L", type=float, help="sample length")
        sp.add_argument("--replicas", type=int)
        sp.add_argument("--grid", help="start:stop:count or a comma list")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int, help="worker threads (default DISORDER_RMT_THREADS or 1)")
        sp.add_argument("--out", help="JSON summary path (default stdout)")
        sp.add_argument("--csv", help="CSV data path")
        for opt, typ in OPTIONS[name].items():
            sp.add_argument("--" + opt.replace("_", "-"), dest=opt, type=typ)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _, where, _ = EXPERIMENTS[args.experiment]
    try:
        cfg = _merge(load_config(args.config), args, args.experiment)
        out = EXPERIMENTS[args.experiment][0](cfg)
    except ValidationError as exc:
        print(f"disorder-rmt {args.experiment}: invalid input in {where}: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError) as exc:
        print(f"disorder-rmt {args.experiment}: numerical failure in {where}: {exc}", file=sys.stderr)
        return 3
    failed = out.pop("_failed", False)
    text = json.dumps(out, indent=2)
    if cfg.get("out"):
        with open(cfg["out"], "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 3 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
