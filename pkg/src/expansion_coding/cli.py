"""Command-line front end: parameter sweeps, simulations and the
verification suite.  Output is CSV (default) or JSON on stdout or ``--out``.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
"""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, aen, montecarlo, source
from .errors import DomainError
from .expansion import LevelRange, binary_profile, sample_levels

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

HEADERS = {
    "expand": ["level", "b_l"],
    "aen-sweep": ["snr_db", "scheme", "q", "L1", "L2", "rate", "capacity", "gap"],
    "rd-sweep": ["D_target", "scheme", "rate", "distortion", "shannon", "gap"],
    "simulate": ["level", "quantity", "frequency", "analytic", "z"],
    "verify": ["check", "passed", "detail"],
}

AEN_SCHEMES = [aen.CARRIES_AS_NOISE, aen.DECODE_CARRIES, aen.QARY_DECODE_CARRIES]
RD_SCHEMES = [source.ONE_SIDED, source.SUCCESSIVE, source.SHANNON]


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def _pmap(fn, items, jobs):
    # rows keep grid order regardless of completion order
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _explicit_range(cfg):
    lo, hi = cfg.get("lo"), cfg.get("hi")
    if (lo is None) != (hi is None):
        raise DomainError("--lo and --hi must be given together")
    return None if lo is None else LevelRange(lo, hi)


# ---------------------------------------------------------------- commands


def run_expand(cfg):
    lam = cfg["lam"]
    rng = LevelRange(cfg["lo"], cfg["hi"])
    prof = binary_profile(lam, rng)
    header = list(HEADERS["expand"])
    rows = [[int(l), p] for l, p in zip(rng.levels, prof.probs)]
    if cfg.get("n"):
        freqs = sample_levels(prof, cfg["n"], cfg["seed"]).mean(axis=0)
        header.append("empirical")
        for row, f in zip(rows, freqs):
            row.append(float(f))
    return header, rows, True


def _aen_points(cfg):
    e_z = cfg["e_z"]
    if cfg.get("e_x"):
        specs = [aen.ChannelSpec(e_x, e_z) for e_x in cfg["e_x"]]
    else:
        specs = [aen.ChannelSpec.from_snr(db_to_linear(db), e_z) for db in cfg["snr_db"]]
    points = []
    for spec in specs:
        for scheme in cfg["scheme"]:
            qs = cfg["q"] if scheme == aen.QARY_DECODE_CARRIES else [2]
            points += [(spec, scheme, q) for q in qs]
    return points


def run_aen_sweep(cfg):
    fixed = _explicit_range(cfg)
    eps = cfg["epsilon"]

    def one(point):
        spec, scheme, q = point
        rng = fixed or aen.compliant_range(spec, eps, q)
        if scheme == aen.CARRIES_AS_NOISE:
            rep = aen.rate_carries_as_noise(spec, rng)
        elif scheme == aen.DECODE_CARRIES:
            rep = aen.rate_decoding_carries(spec, rng)
        else:
            rep = aen.rate_qary_decoding_carries(spec, rng, q)
        return [spec.snr_db, scheme, q, rng.l1, rng.l2, rep.total, rep.capacity, rep.gap]

    rows = _pmap(one, _aen_points(cfg), cfg.get("jobs"))
    return HEADERS["aen-sweep"], rows, True


def _distortions(cfg):
    if cfg.get("distortion"):
        return list(cfg["distortion"])
    return list(np.geomspace(cfg["d_min"], cfg["d_max"], cfg["points"]))


def rd_margin(cfg):
    if cfg.get("margin") is not None:
        return cfg["margin"]
    return math.ceil(-math.log2(cfg["epsilon"]) - 1e-9)


def run_rd_sweep(cfg):
    spec = source.SourceSpec(cfg["lam"])
    fixed = _explicit_range(cfg)
    margin = rd_margin(cfg)
    points = [(d, s) for d in _distortions(cfg) for s in cfg["scheme"]]

    def one(point):
        d, scheme = point
        if scheme == source.SHANNON:
            pt = source.shannon_point(spec, d)
        else:
            rng = fixed or source.compliant_range(spec, d, margin)
            pt = source.SCHEMES[scheme](spec, d, rng)
        return [d, scheme, pt.rate, pt.distortion, pt.shannon_rate, pt.gap]

    rows = _pmap(one, points, cfg.get("jobs"))
    for kind in cfg.get("quantizer") or []:
        for k in cfg.get("k") or []:
            pt = source.quantizer_baseline(spec, k, kind)
            rows.append([None, pt.scheme, pt.rate, pt.distortion, pt.shannon_rate, pt.gap])
    return HEADERS["rd-sweep"], rows, True


def _channel(cfg):
    if cfg.get("e_x") and len(cfg["e_x"]) != 1:
        raise DomainError("simulate takes a single --e-x")
    if cfg.get("e_x"):
        return aen.ChannelSpec(cfg["e_x"][0], cfg["e_z"])
    if len(cfg["snr_db"]) != 1:
        raise DomainError("simulate takes a single --snr-db")
    return aen.ChannelSpec.from_snr(db_to_linear(cfg["snr_db"][0]), cfg["e_z"])


def run_simulate(cfg):
    what = cfg["what"]
    rng = LevelRange(cfg["lo"], cfg["hi"])
    n, seed = cfg["n"], cfg["seed"]
    if what == "expansion":
        rep = montecarlo.validate_expansion(cfg["lam"], rng, n, seed)
        rows = [[s.level, s.quantity, s.frequency, s.analytic, s.z] for s in rep.per_level_stats]
        rows.append([None, "ks", rep.ks_statistic, rep.ks_threshold, None])
        return HEADERS["simulate"], rows, rep.passed
    spec = _channel(cfg)
    if what == "carries":
        rep = montecarlo.simulate_carries(spec, rng, n, seed)
        rows = [[s.level, s.quantity, s.frequency, s.analytic, s.z] for s in rep.per_level_stats]
        return HEADERS["simulate"], rows, rep.passed
    est = montecarlo.empirical_level_mi(spec, rng, n, seed, model=cfg["model"])
    rows = [
        [e.level, "mi", e.empirical, e.analytic, (e.empirical - e.analytic) / e.bootstrap_std if e.bootstrap_std > 0 else 0.0]
        for e in est
    ]
    return HEADERS["simulate"], rows, all(e.ok for e in est)


def verification_checks(full=False, n=None, seed=2014, inject_fault=False):
    """Run the bound inventory and Monte Carlo positive controls.

    Yields ``(name, passed, detail)`` triples.
    """
    n = n or (100_000 if full else 20_000)
    wide = LevelRange(-30, 30)
    for k in range(-5, 6):
        e_z = 2.0**k
        for snr_exp in (0, 5, 10, 15, 20):
            spec = aen.ChannelSpec(e_z * 2.0**snr_exp, e_z)
            ent = aen.verify_entropy_bounds(spec, wide)
            car = aen.verify_carry_bound(spec, wide)
            bad = ent.violations + car.violations
            yield (
                f"bounds e_z=2^{k} snr=2^{snr_exp}",
                not bad,
                f"{len(bad)} violations of {len(ent.checks) + len(car.checks)}",
            )
    for eps in (0.5, 0.1, 0.01):
        v = aen.gap_report(eps, aen.ChannelSpec.from_snr(1.0 / eps))
        yield (
            f"decode-carries gap eps={eps}",
            v.passed,
            f"gap={v.gap_decode_carries:.6g} bound={v.bound_decode_carries:.6g}",
        )
    for lam in (0.5, 1.0, 2.0):
        for frac in (0.5, 0.1, 0.01, 0.001):
            v = source.gap_check(source.SourceSpec(lam), frac / lam)
            yield (
                f"rd gap lam={lam} D={frac}/lam",
                v.passed and v.one_sided.distortion == v.successive.distortion,
                f"gap1={v.gap_one_sided:.6g} gap2={v.gap_successive:.6g} bound={v.bound:.6g}",
            )
    spec = aen.ChannelSpec(2.0**10, 1.0)
    rng = aen.compliant_range(spec, 0.01)
    diff = abs(aen.rate_qary_decoding_carries(spec, rng, 2).total - aen.rate_decoding_carries(spec, rng).total)
    yield ("q-ary q=2 consistency", diff <= 1e-9, f"|diff|={diff:.3g}")

    rep = montecarlo.validate_expansion(1.0, LevelRange(-10, 10), n, seed)
    yield ("mc expansion", rep.passed, f"ks={rep.ks_statistic:.5f} threshold={rep.ks_threshold:.5f}")
    spec = aen.ChannelSpec(2.0**8, 1.0)
    rng = LevelRange(-5, 12)
    override = None
    if inject_fault:
        c = aen.carry_profile(aen.input_profile(spec, rng), aen.noise_profile(spec, rng))
        override = c.replace(3, min(0.5, c.at(3) + 0.1))
    rep = montecarlo.simulate_carries(spec, rng, n, seed, carry_override=override)
    worst = max(abs(s.z) for s in rep.per_level_stats)
    yield ("mc carries", rep.passed, f"max|z|={worst:.3f}")
    if full:
        est = montecarlo.empirical_level_mi(aen.ChannelSpec(2.0**15, 1.0), LevelRange(-5, 20), n, seed)
        yield ("mc level mi", all(e.ok for e in est), f"levels={len(est)}")


def run_verify(cfg):
    rows = [
        [name, ok, detail]
        for name, ok, detail in verification_checks(
            cfg.get("full", False), cfg.get("n"), cfg["seed"], cfg.get("inject_fault", False)
        )
    ]
    return HEADERS["verify"], rows, all(r[1] for r in rows)


COMMANDS = {
    "expand": run_expand,
    "aen-sweep": run_aen_sweep,
    "rd-sweep": run_rd_sweep,
    "simulate": run_simulate,
    "verify": run_verify,
}


# ---------------------------------------------------------------- parsing


def build_parser():
    parser = argparse.ArgumentParser(
        prog="expansion-coding",
        description="Expansion coding for AEN channels and exponential sources.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    def common(p, seed=True):
        p.add_argument("--out", help="write output to PATH instead of stdout")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--config", help="JSON config file (same schema as the JSON output's 'config')")
        p.add_argument("--jobs", type=int, default=1, help="worker threads for sweep points")
        if seed:
            p.add_argument("--seed", type=int, default=2014)

    p = sub.add_parser("expand", help="per-level probabilities of the binary expansion")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--lo", type=int, default=-10)
    p.add_argument("--hi", type=int, default=10)
    p.add_argument("--n", type=int, help="also sample N expansions and report frequencies")
    common(p)

    p = sub.add_parser(
        "aen-sweep",
        help="achievable rates over an SNR grid",
        description="Ranges default to the minimal window compliant with --epsilon "
        "(L1 >= -log eps - log E_Z, L2 >= -log eps + log E_X, logs base q); "
        "--lo/--hi fix the window instead.",
    )
    p.add_argument("--snr-db", type=float, nargs="+", default=[float(x) for x in range(0, 41, 5)])
    p.add_argument("--e-x", type=float, nargs="+", help="input means (instead of --snr-db)")
    p.add_argument("--e-z", type=float, default=1.0)
    p.add_argument("--scheme", nargs="+", choices=AEN_SCHEMES, default=AEN_SCHEMES[:2])
    p.add_argument("--q", type=int, nargs="+", default=[2, 4, 8, 16])
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--lo", type=int)
    p.add_argument("--hi", type=int)
    common(p, seed=False)

    p = sub.add_parser(
        "rd-sweep",
        help="rate-distortion pairs over a distortion grid",
        description="Ranges default to the minimal compliant window "
        "(L1 >= -log D, L2 >= -log lambda^2 D) widened by ceil(-log2 epsilon) "
        "levels at each end; --margin or --lo/--hi override.",
    )
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--distortion", type=float, nargs="+")
    p.add_argument("--d-min", type=float, default=1e-3)
    p.add_argument("--d-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=31)
    p.add_argument("--scheme", nargs="+", choices=RD_SCHEMES, default=RD_SCHEMES)
    p.add_argument("--quantizer", nargs="*", choices=["linear", "nonlinear"], default=[])
    p.add_argument("--k", type=int, nargs="+", default=[1, 2, 4, 8, 16, 32, 64])
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--margin", type=int)
    p.add_argument("--lo", type=int)
    p.add_argument("--hi", type=int)
    common(p, seed=False)

    p = sub.add_parser("simulate", help="Monte Carlo validation")
    p.add_argument("what", choices=["expansion", "carries", "mi"])
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--snr-db", type=float, nargs="+", default=[10 * math.log10(2.0**8)])
    p.add_argument("--e-x", type=float, nargs="+")
    p.add_argument("--e-z", type=float, default=1.0)
    p.add_argument("--lo", type=int, default=-10)
    p.add_argument("--hi", type=int, default=10)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--model", choices=[aen.DECODE_CARRIES, aen.CARRIES_AS_NOISE], default=aen.DECODE_CARRIES)
    common(p)

    p = sub.add_parser("verify", help="run the bound inventory and Monte Carlo controls")
    p.add_argument("--full", action="store_true", help="n=100000 simulations plus the MI check")
    p.add_argument("--n", type=int)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    common(p)
    return parser


def load_config(path):
    with open(path) as fh:
        data = json.load(fh)
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(argv, parser=None):
    """Parse ``argv``; values from ``--config`` replace the defaults, so
    explicit command-line flags still win."""
    parser = parser or build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return vars(args)
    loaded = load_config(args.config)
    if loaded.get("command", args.command) != args.command:
        raise DomainError(f"config is for {loaded['command']!r}, not {args.command!r}")
    sub = parser.subcommands[args.command]
    known = set(vars(args)) - {"command", "config"}
    sub.set_defaults(**{k: v for k, v in loaded.items() if k in known})
    return vars(parser.parse_args(argv))


def render(cfg, header, rows, fmt_name):
    if fmt_name == "json":
        config = {k: v for k, v in cfg.items() if k not in {"config", "out", "inject_fault"}}
        obj = {
            "config": config,
            "rows": [
                {h: (None if v is None else (float(v) if isinstance(v, (float, np.floating)) else v)) for h, v in zip(header, r)}
                for r in rows
            ],
            "version": __version__,
        }
        return json.dumps(obj, indent=2, default=_json_default, allow_nan=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(type(obj))


def main(argv=None):
    parser = build_parser()
    try:
        cfg = resolve(argv, parser)
        header, rows, ok = COMMANDS[cfg["command"]](cfg)
    except (DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(cfg, header, rows, cfg.get("format") or "csv")
    if cfg.get("out"):
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
