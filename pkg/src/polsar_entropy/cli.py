"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .entropy import SHANNON, EntropyKind, entropy
from .errors import InputError, NumericalError, UnsupportedKindError, WishartError
from .fixtures import ESAR_LOOKS, REGIONS, sigma_u
from .inference import aic, estimate
from .polsar_io import (
    CovarianceStack,
    Rectangle,
    extract_region,
    load_stack,
    read_mask,
    subsample_without_replacement,
    write_csv_stack,
    write_stack,
)
from .simulate import MCConfig, mc_power_experiment, replica_rng, sample_wishart
from .stats import (
    CONVENTIONS,
    TWO_SIDED,
    confidence_interval,
    entropy_test,
    estimate_entropy,
    goodness_of_fit,
)
from .wishart import WishartParams

REPORT_SCHEMA = "polsar-entropy/report"
REPORT_VERSION = 1

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3


def _g(x):
    return f"{x:.6g}"


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _parse_kinds(text):
    return [EntropyKind.parse(t) for t in text.split(",") if t.strip()]


def _parse_floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_fixture(text, index=1):
    """A named region (``A1``) or ``m=3,looks=1.361,det=355494.5,n=3708``."""
    if text in REGIONS:
        r = REGIONS[text]
        return r.name, r.params(), r.n
    fields = {}
    for token in text.split(","):
        key, sep, val = token.partition("=")
        if not sep:
            raise InputError(f"fixture {text!r}: expected a region name or key=value pairs")
        fields[key.strip()] = val.strip()
    try:
        m = int(fields.pop("m", 3))
        looks = float(fields.pop("looks"))
        n = int(fields.pop("n"))
        if "logdet" in fields:
            log_det = float(fields.pop("logdet"))
        else:
            log_det = math.log(float(fields.pop("det")))
        name = fields.pop("name", f"F{index}")
    except (KeyError, ValueError) as exc:
        raise InputError(f"fixture {text!r}: need looks, n and det (or logdet): {exc}") from None
    if fields:
        raise InputError(f"fixture {text!r}: unknown keys {sorted(fields)}")
    return name, WishartParams.from_log_det(m, looks, log_det), n


def _without_report_path(argv):
    """``argv`` minus ``--json PATH``, so where a report is written does not change it."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--json":
            skip = True
        elif not a.startswith("--json="):
            out.append(a)
    return out


class Report:
    """JSON run report; ``timing`` is kept out of the digest."""

    def __init__(self, command, argv, seed):
        self.body = {
            "schema": REPORT_SCHEMA,
            "version": REPORT_VERSION,
            "tool_version": __version__,
            "command": command,
            "argv": _without_report_path(argv),
            "seed": seed,
            "inputs": {},
        }
        self._start = time.perf_counter()

    def add_input(self, path):
        self.body["inputs"][os.path.basename(path)] = _sha256(path)

    def digest(self):
        payload = json.dumps(self.body, sort_keys=True, default=_json_default).encode()
        return hashlib.sha256(payload).hexdigest()

    def finish(self, path=None):
        out = dict(self.body)
        out["digest"] = self.digest()
        out["timing"] = {"elapsed_seconds": time.perf_counter() - self._start}
        text = json.dumps(out, indent=2, default=_json_default) + "\n"
        if path:
            with open(path, "w") as fh:
                fh.write(text)
        return out


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, EntropyKind):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _load_regions(args, report):
    """(name, SampleSet) pairs from --stack with --region/--mask."""
    if not args.stack:
        return []
    stack = load_stack(args.stack)
    report.add_input(args.stack)
    specs = []
    for i, text in enumerate(args.region or [], 1):
        name, sep, rect = text.partition("=")
        if not sep:
            name, rect = f"R{i}", text
        specs.append((name, Rectangle.parse(rect)))
    for i, path in enumerate(args.mask or [], 1):
        report.add_input(path)
        specs.append((f"M{i}", read_mask(path)))
    if not specs:
        specs.append(("full", Rectangle(0, 0, stack.cols - 1, stack.rows - 1)))
    rng = replica_rng(args.seed, 0)
    out = []
    for name, spec in specs:
        try:
            sample = extract_region(stack, spec)
            if args.subsample:
                sample = subsample_without_replacement(sample, args.subsample, rng)
        except WishartError as exc:
            raise type(exc)(f"region {name}: {exc}") from exc
        out.append((name, sample))
    return out


def _fit(name, sample, branch=None):
    try:
        return estimate(sample, branch=branch)
    except WishartError as exc:
        raise type(exc)(f"region {name}: {exc}") from exc


def _populations(args, report):
    """(name, params, n, extra-info) from stack regions and fixtures."""
    pops = []
    for name, sample in _load_regions(args, report):
        fit = _fit(name, sample, getattr(args, "branch", None))
        pops.append((name, fit.params, sample.size, _fit_summary(fit)))
    for i, text in enumerate(args.fixture or [], 1):
        name, params, n = _parse_fixture(text, i)
        pops.append((name, params, n, {"fixture": text}))
    if not pops:
        raise InputError("no input: give --stack (with regions) or --fixture")
    return pops


def _fit_summary(fit):
    p = fit.params
    return {
        "n": fit.n,
        "log_det_sigma": p.log_det_sigma,
        "trace_sigma": p.sigma.trace(),
        "looks": p.looks,
        "branch": fit.branch,
        "relaxed": p.relaxed,
        "residual": fit.residual,
        "iterations": fit.iterations,
        "log_likelihood": fit.log_likelihood,
    }


def cmd_estimate(args, report, out):
    rows = []
    for name, sample in _load_regions(args, report):
        fit = _fit(name, sample, args.branch)
        info = _fit_summary(fit)
        info["region"] = name
        info["aic_free"] = aic(sample, fit.params, l_fixed=False)
        info["aic_fixed"] = aic(sample, fit.params.with_looks(args.fixed_looks), l_fixed=True)
        info["fixed_looks"] = args.fixed_looks
        rows.append(info)
        flag = " (relaxed: L < m)" if info["relaxed"] else ""
        out.write(
            f"{name}: N={info['n']} ln|Sigma|={_g(info['log_det_sigma'])} "
            f"tr={_g(info['trace_sigma'])} L={_g(info['looks'])}{flag} "
            f"AIC(L free)={_g(info['aic_free'])} AIC(L={_g(args.fixed_looks)})={_g(info['aic_fixed'])}\n"
        )
    if not rows:
        raise InputError("estimate needs --stack")
    report.body["regions"] = rows


def cmd_entropy(args, report, out):
    kinds = _parse_kinds(args.kinds)
    if args.ci:
        for k in kinds:
            if k.name == "tsallis":
                raise UnsupportedKindError(
                    f"{k}: no asymptotic variance, so no confidence interval; rerun with --no-ci"
                )
    regions = []
    for name, params, n, info in _populations(args, report):
        entry = dict(info, region=name, n=n, looks=params.looks, relaxed=params.relaxed, entropies=[])
        for kind in kinds:
            rec = {"kind": str(kind)}
            if args.ci:
                est = estimate_entropy(kind, params, n)
                ci = confidence_interval(est, args.level, args.convention)
                rec.update(value=est.value, variance=est.variance, lower=ci.lower, upper=ci.upper,
                           level=args.level, convention=args.convention)
                out.write(f"{name} {kind}: {_g(est.value)} [{_g(ci.lower)}, {_g(ci.upper)}]\n")
            else:
                rec["value"] = entropy(kind, params).value
                out.write(f"{name} {kind}: {_g(rec['value'])}\n")
            entry["entropies"].append(rec)
        regions.append(entry)
    report.body["regions"] = regions


def cmd_test(args, report, out):
    kinds = _parse_kinds(args.kinds)
    levels = _parse_floats(args.levels)
    pops = _populations(args, report)
    if len(pops) < 2:
        raise InputError(f"the contrast test needs at least two regions, got {len(pops)}")
    tests = []
    for kind in kinds:
        ests = [estimate_entropy(kind, params, n) for _, params, n, _ in pops]
        res = entropy_test(ests, levels)
        tests.append({
            "kind": str(kind),
            "regions": [p[0] for p in pops],
            "entropies": [e.value for e in ests],
            "statistic": res.statistic,
            "df": res.df,
            "p_value": res.p_value,
            "pooled_mean": res.pooled_mean,
            "reject": {repr(a): res.decisions[a] for a in levels},
        })
        decisions = " ".join(f"{a:g}:{'reject' if res.decisions[a] else 'keep'}" for a in levels)
        out.write(f"{kind}: S={_g(res.statistic)} df={res.df} p={_g(res.p_value)} {decisions}\n")
    report.body["tests"] = tests


def cmd_gof(args, report, out):
    refs = {}
    for text in args.reference:
        k, sep, v = text.partition("=")
        if not sep:
            raise InputError(f"reference must be KIND=VALUE, got {text!r}")
        refs[EntropyKind.parse(k)] = float(v)
    levels = _parse_floats(args.levels)
    results = []
    for name, params, n, _ in _populations(args, report):
        for kind, v in refs.items():
            res = goodness_of_fit(estimate_entropy(kind, params, n), v, levels)
            results.append({"region": name, "kind": str(kind), "reference": v,
                            "statistic": res.statistic, "df": res.df, "p_value": res.p_value,
                            "reject": {repr(a): res.decisions[a] for a in levels}})
            out.write(f"{name} {kind}: S={_g(res.statistic)} p={_g(res.p_value)}\n")
    report.body["tests"] = results


def _params_from_spec(spec, default_looks=ESAR_LOOKS):
    spec = spec or {}
    sigma = sigma_u()
    if "sigma" in spec and spec["sigma"] != "sigma_u":
        sigma = np.asarray(spec["sigma"], dtype=float)
        if sigma.ndim == 3:  # [re, im] pairs
            sigma = sigma[..., 0] + 1j * sigma[..., 1]
    scale = float(spec.get("scale", 1.0))
    p = WishartParams(sigma, float(spec.get("looks", default_looks)))
    return p.with_sigma(p.sigma.scaled(scale)) if scale != 1.0 else p


def cmd_simulate(args, report, out):
    cfg_dict = {}
    if args.config:
        with open(args.config) as fh:
            cfg_dict = json.load(fh)
        report.add_input(args.config)
    null = cfg_dict.pop("null", None)
    alternative = cfg_dict.pop("alternative", None)
    if args.replicas is not None:
        cfg_dict["replicas"] = args.replicas
    if args.seed_given:
        cfg_dict["master_seed"] = args.seed
    if args.sample_sizes:
        cfg_dict["sample_sizes"] = [int(x) for x in _parse_floats(args.sample_sizes)]
    if args.kinds:
        cfg_dict["kinds"] = args.kinds.split(",")
    cfg = MCConfig.from_dict(cfg_dict)
    p1 = _params_from_spec(null)
    p2 = _params_from_spec(alternative) if alternative is not None else p1
    pair = "size" if alternative is None else "power"
    res = mc_power_experiment(p1, p2, cfg, workers=args.workers, pair=pair)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, f"{args.prefix}.csv")
    json_path = os.path.join(args.out_dir, f"{args.prefix}.json")
    with open(csv_path, "w") as fh:
        fh.write(res.to_csv())
    with open(json_path, "w") as fh:
        fh.write(res.to_json())
    report.body["outputs"] = {"csv": csv_path, "json": json_path}
    report.body["config"] = cfg.to_dict()
    for c in res.cells:
        rates = " ".join(f"{a:g}:{c.rate(a):.4f}" for a in cfg.levels)
        out.write(f"{c.kind} N={c.n}: {rates} mean S={_g(c.mean_statistic)} cv={_g(c.cv)}\n")


def _looks_grid(text):
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1.0
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [lo + i * step for i in range(count)]
    return _parse_floats(text)


def cmd_casestudy(args, report, out):
    looks = _looks_grid(args.looks)
    betas = _parse_floats(args.betas)
    scales = _parse_floats(args.scales)
    kinds = [SHANNON] + [EntropyKind.tsallis(b) for b in betas] + [EntropyKind.renyi(b) for b in betas]
    base = sigma_u()
    lines = ["k,looks," + ",".join(str(k) for k in kinds)]
    for k in scales:
        sigma = base.scaled(1.0 + k)
        for L in looks:
            p = WishartParams(sigma, L)
            vals = [entropy(kind, p).value for kind in kinds]
            lines.append(f"{k!r},{L!r}," + ",".join(repr(v) for v in vals))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        report.body["outputs"] = {"csv": args.out}
    else:
        out.write(text)
    report.body["grid"] = {"looks": looks, "betas": betas, "scales": scales}


def cmd_synth(args, report, out):
    """Synthetic stack of vertical bands, band ``i`` drawn at ``scale_i * Sigma_U``."""
    scales = args.band or [1.0]
    rng = replica_rng(args.seed, 1)
    base = WishartParams(sigma_u(), args.looks)
    bands = []
    for s in scales:
        p = base.with_sigma(base.sigma.scaled(s)) if s != 1.0 else base
        sample = sample_wishart(p, args.rows * args.cols, rng)
        bands.append(sample.data.reshape(args.rows, args.cols, 3, 3))
    stack = CovarianceStack(np.concatenate(bands, axis=1))
    if args.out.lower().endswith(".csv"):
        write_csv_stack(stack, args.out)
    else:
        write_stack(stack, args.out)
    report.body["outputs"] = {"stack": args.out}
    out.write(f"wrote {stack.rows}x{stack.cols} stack with {len(scales)} band(s) to {args.out}\n")


def _add_region_args(p, branch=True):
    p.add_argument("--stack", help="PCSK covariance stack (or .csv interchange)")
    p.add_argument("--region", action="append", metavar="[NAME=]x0,y0,x1,y1",
                   help="inclusive pixel rectangle; repeatable")
    p.add_argument("--mask", action="append", metavar="PATH", help="PMSK mask; repeatable")
    p.add_argument("--subsample", type=int, help="draw this many pixels per region without replacement")
    if branch:
        p.add_argument("--branch", type=int, help="force the looks root to interval (k, k+1)")


def _add_fixture_arg(p):
    p.add_argument("--fixture", action="append", metavar="SPEC",
                   help="region name (A1..A3, B1..B3) or m=3,looks=..,det=..,n=..; repeatable")


def build_parser():
    parser = argparse.ArgumentParser(prog="polsar-entropy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--json", metavar="PATH", help="write the JSON run report here")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", parents=[common], help="ML fits and AIC per region")
    _add_region_args(p)
    p.add_argument("--fixed-looks", type=float, default=ESAR_LOOKS)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("entropy", parents=[common], help="entropies with confidence intervals")
    _add_region_args(p)
    _add_fixture_arg(p)
    p.add_argument("--kinds", default="shannon,renyi:0.1,renyi:0.8")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--convention", choices=CONVENTIONS, default=TWO_SIDED)
    p.add_argument("--ci", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("test", parents=[common], help="entropy contrast test across regions")
    _add_region_args(p)
    _add_fixture_arg(p)
    p.add_argument("--kinds", default="shannon,renyi:0.1,renyi:0.8")
    p.add_argument("--levels", default="0.01,0.05,0.1")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("gof", parents=[common], help="goodness of fit against a reference entropy")
    _add_region_args(p)
    _add_fixture_arg(p)
    p.add_argument("--reference", action="append", required=True, metavar="KIND=VALUE")
    p.add_argument("--levels", default="0.01,0.05,0.1")
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo size/power campaign")
    p.add_argument("--config", help="JSON: MCConfig fields plus optional 'null'/'alternative' parameters")
    p.add_argument("--replicas", type=int)
    p.add_argument("--sample-sizes")
    p.add_argument("--kinds")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="mc_report")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("casestudy", parents=[common], help="entropy curves over L for scaled Sigma_U")
    p.add_argument("--looks", default="3:50")
    p.add_argument("--betas", default="0.1,0.5,0.8")
    p.add_argument("--scales", default="0,0.1,0.2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_casestudy)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic stack drawn around Sigma_U")
    p.add_argument("--rows", type=int, default=20)
    p.add_argument("--cols", type=int, default=20)
    p.add_argument("--looks", type=float, default=ESAR_LOOKS)
    p.add_argument("--band", type=float, action="append", metavar="SCALE")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None, out=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    report = Report(args.command, argv, args.seed)
    try:
        args.func(args, report, out)
    except (InputError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.json:
        report.finish(args.json)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
