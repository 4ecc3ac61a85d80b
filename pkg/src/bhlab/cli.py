"""``bh-lab`` command-line front end.

Every command accepts ``--config FILE`` (JSON) plus flags; flags win over
the file.  JSON outputs embed the resolved configuration.  Exit codes:
0 success, 1 runtime failure, 2 configuration error, 3 failed verification.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import models, stats
from .errors import BHLabError, ConfigError, Inadmissible, OrderingImpossible, ProfileInvalid
from .localroots import LocalDataCache, local_table
from .polyarith import Irreducible, Reducible, irreducibility_status, normalize_tuple, parse_tuple
from .sieve import ResidueFamily, sifted_count_report, primes_up_to
from .singular import EXP_MINUS_GAMMA, ThresholdProfile, check_admissible, main_term, singular_series

CONFIG_KEYS = {
    "tuple", "model", "seed", "profile", "x", "y", "lo", "hi", "range", "trials", "cutoff",
    "out", "format", "cache_dir", "precision", "assume_irreducible", "n", "toy_primes", "bound",
}
MODEL_KEYS = {"kind", "seed", "t", "z", "granville_y", "profile"}
DEFAULT_TUPLE = "X,X+2"


def _number(text, name):
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise ConfigError([(name, f"not a number: {text!r}")])
    return int(v) if v.is_integer() else v


def _numbers(value, name) -> list:
    if isinstance(value, (list, tuple)):
        return [_number(v, name) for v in value]
    return [_number(v, name) for v in str(value).split(",") if v.strip()]


@dataclass
class RunConfig:
    """Validated settings for one command."""

    tuple_spec: object = DEFAULT_TUPLE
    tuple: object = None  # PolyTuple after validation
    kind: str = "m2"
    seed: int = 0
    profile: ThresholdProfile = field(default_factory=ThresholdProfile.desk)
    granville_y: float = 10.0
    x: list = field(default_factory=list)
    y: int | None = None
    lo: int | None = None
    hi: int | None = None
    trials: int = 200
    cutoff: list = field(default_factory=lambda: [10**6])
    out: str | None = None
    format: str | None = None
    cache_dir: str | None = None
    precision: str = "double"
    assume_irreducible: bool = False
    n: int = 1000
    toy_primes: list = field(default_factory=lambda: [3, 5, 7])
    bound: int = 10**6
    warnings: list = field(default_factory=list)

    def model_spec(self) -> models.ModelSpec:
        return models.ModelSpec(self.kind, self.seed, self.profile, self.granville_y)

    def resolved(self) -> dict:
        """The configuration as embedded in JSON outputs (no thread count)."""
        out = {
            "tuple": self.tuple.to_lists() if self.tuple is not None else None,
            "shift": self.tuple.shift if self.tuple is not None else None,
            "model": {"kind": self.kind, "seed": self.seed},
            "profile": self.profile.to_dict(),
            "precision": self.precision,
            "cutoff": self.cutoff,
        }
        if self.kind == "granville":
            out["model"]["granville_y"] = self.granville_y
        for key in ("x", "y", "lo", "hi", "trials"):
            val = getattr(self, key)
            if val not in (None, []):
                out[key] = val
        return out


def _profile_from(value, base: ThresholdProfile | None = None) -> ThresholdProfile:
    if isinstance(value, ThresholdProfile):
        return value
    if value in (None, "desk"):
        return ThresholdProfile.desk()
    if value == "paper":
        return ThresholdProfile.paper()
    if isinstance(value, dict):
        unknown = set(value) - {"t", "z", "clamp", "start", "name"}
        if unknown:
            raise ConfigError([("profile", f"unknown keys {sorted(unknown)}")])
        prof = base or ThresholdProfile.desk()
        kw = {}
        for which in ("t", "z"):
            if which in value:
                kind, param = _threshold_from(value[which], which)
                kw[f"{which}_kind"], kw[f"{which}_param"] = kind, param
        for key in ("clamp", "start", "name"):
            if key in value:
                kw[key] = value[key]
        kw.setdefault("name", "custom")
        return replace(prof, **kw)
    raise ConfigError([("profile", f"expected 'desk', 'paper' or an object, got {value!r}")])


def _threshold_from(value, which):
    # "paper", a number (fixed) or {"exp_pow": a} / {"pow": b} / {"fixed": c}
    if value == "paper":
        return "paper", 0.0 if which == "t" else EXP_MINUS_GAMMA
    if isinstance(value, (int, float)):
        return "fixed", float(value)
    if isinstance(value, dict) and len(value) == 1:
        (kind, param), = value.items()
        return kind, float(param)
    raise ConfigError([(f"profile.{which}", f"cannot read threshold {value!r}")])


def _load_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError([("config", f"cannot read {path}: {exc.strerror}")])
    except json.JSONDecodeError as exc:
        raise ConfigError([("config", f"invalid JSON: {exc}")])
    if not isinstance(data, dict):
        raise ConfigError([("config", "top level must be an object")])
    return data


def _merge(file_cfg: dict, args) -> dict:
    """File values overridden by any flag that was given."""
    problems = [(k, "unknown key") for k in sorted(set(file_cfg) - CONFIG_KEYS)]
    model = file_cfg.get("model", {})
    if isinstance(model, str):
        model = {"kind": model}
    if not isinstance(model, dict):
        problems.append(("model", "must be an object or a kind name"))
        model = {}
    problems += [(f"model.{k}", "unknown key") for k in sorted(set(model) - MODEL_KEYS)]
    if problems:
        raise ConfigError(problems)
    merged = {k: v for k, v in file_cfg.items() if k != "model"}
    for key in ("kind", "granville_y"):
        if key in model:
            merged[key] = model[key]
    if "seed" in model:
        merged.setdefault("seed", model["seed"])
    prof = model.get("profile", merged.get("profile"))
    if "t" in model or "z" in model:
        spec = dict(prof) if isinstance(prof, dict) else {}
        base = prof if isinstance(prof, str) else None
        spec.update({k: model[k] for k in ("t", "z") if k in model})
        prof = (base, spec)
    if prof is not None:
        merged["profile"] = prof
    flags = {
        "tuple": args.tuple, "kind": args.model, "seed": args.seed, "profile": args.profile,
        "x": args.x, "y": args.y, "range": args.range, "trials": args.trials, "cutoff": args.cutoff,
        "out": args.out, "format": args.format, "cache_dir": args.cache_dir, "precision": args.precision,
        "granville_y": args.granville_y, "n": args.n, "toy_primes": args.toy_primes,
        "bound": args.bound,
    }
    for key, val in flags.items():
        if val is not None:
            merged[key] = val
    if args.assume_irreducible:
        merged["assume_irreducible"] = True
    return merged


def parse_config(args, needs_tuple: bool = True) -> RunConfig:
    """Build and validate a RunConfig from ``args`` (an argparse namespace)."""
    raw = _load_file(args.config) if args.config else {}
    merged = _merge(raw, args)
    cfg = RunConfig()
    problems = []

    def take(key, conv):
        if key in merged:
            try:
                setattr(cfg, key, conv(merged[key]))
            except ConfigError as exc:
                problems.extend(exc.problems)
            except (TypeError, ValueError) as exc:
                problems.append((key, str(exc)))

    take("kind", str)
    if cfg.kind not in models.KINDS + ("oracle",):
        problems.append(("model.kind", f"unknown model {cfg.kind!r}"))
    take("seed", lambda v: int(_number(v, "seed")))
    if not 0 <= cfg.seed < 1 << 64:
        problems.append(("seed", "must be a 64-bit unsigned integer"))
    take("granville_y", float)
    if "profile" in merged:
        prof = merged["profile"]
        try:
            if isinstance(prof, tuple):
                cfg.profile = _profile_from(prof[1], _profile_from(prof[0]))
            else:
                cfg.profile = _profile_from(prof)
        except (ConfigError, ProfileInvalid) as exc:
            problems.extend(exc.problems if isinstance(exc, ConfigError) else [("profile", str(exc))])
    take("x", lambda v: _numbers(v, "x"))
    take("y", lambda v: int(_number(v, "y")))
    take("trials", lambda v: int(_number(v, "trials")))
    take("cutoff", lambda v: [int(c) for c in _numbers(v, "cutoff")])
    take("out", str)
    take("format", str)
    take("precision", str)
    take("assume_irreducible", bool)
    take("n", lambda v: int(_number(v, "n")))
    take("toy_primes", lambda v: [int(p) for p in _numbers(v, "toy_primes")])
    take("bound", lambda v: int(_number(v, "bound")))
    for key in ("lo", "hi"):
        take(key, lambda v, key=key: int(_number(v, key)))
    if "range" in merged:
        try:
            lo, hi = str(merged["range"]).split(":")
            cfg.lo, cfg.hi = int(_number(lo, "range")), int(_number(hi, "range"))
        except ValueError:
            problems.append(("range", "expected LO:HI"))
    if cfg.precision not in ("double", "extended"):
        problems.append(("precision", "must be 'double' or 'extended'"))
    if cfg.format not in (None, "csv", "json"):
        problems.append(("format", "must be 'csv' or 'json'"))
    cfg.cache_dir = merged.get("cache_dir") or os.environ.get("BH_LAB_CACHE")
    if cfg.lo is not None and cfg.hi is not None and cfg.hi < cfg.lo:
        problems.append(("range", "hi must be >= lo"))
    if problems:
        raise ConfigError(problems)

    if needs_tuple:
        cfg.tuple_spec = merged.get("tuple", DEFAULT_TUPLE)
        cfg.tuple = _validate_tuple(cfg.tuple_spec, cfg.assume_irreducible)

    # profile check over the range the command will touch
    if cfg.kind in ("m1", "m2", "bft_r"):
        lo = cfg.lo if cfg.lo is not None else 10
        hi = cfg.hi if cfg.hi is not None else max([lo] + [int(2 * v) for v in cfg.x])
        try:
            cfg.warnings += cfg.profile.validate(lo, hi)
        except ProfileInvalid as exc:
            raise ConfigError([("profile", str(exc))])
    return cfg


def _validate_tuple(spec, assume_irreducible: bool):
    try:
        raw = parse_tuple(spec) if isinstance(spec, str) else list(spec)
        tup = normalize_tuple(raw)
    except OrderingImpossible as exc:
        raise ConfigError([("tuple", str(exc))])
    except (ValueError, TypeError) as exc:
        raise ConfigError([("tuple", f"cannot parse {spec!r}: {exc}")])
    check_admissible(tup)
    if not assume_irreducible:
        for f in tup.original:
            status = irreducibility_status(f)
            if isinstance(status, Reducible):
                raise ConfigError([("tuple", f"{f} is reducible")])
            if not isinstance(status, Irreducible):
                raise ConfigError([("tuple", f"irreducibility of {f} undetermined; pass --assume-irreducible")])
    return tup


# --- output ---------------------------------------------------------------------------

def _emit(cfg: RunConfig, args, payload=None, csv_rows=None, header=None):
    if csv_rows is not None and (cfg.format or "csv") == "csv":
        text = ",".join(header) + "\n" + "".join(",".join(_fmt(v) for v in row) + "\n" for row in csv_rows)
    else:
        if payload is None:
            payload = {"rows": [dict(zip(header, row)) for row in csv_rows]}
        doc = {"config": cfg.resolved(), **payload}
        if not args.no_timestamp:
            doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if cfg.out and args.command != "sample":
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


# --- commands ----------------------------------------------------------------------------

def cmd_check(cfg, args) -> int:
    tup = cfg.tuple
    rows = []
    for f in tup.original:
        status = irreducibility_status(f)
        rows.append({"polynomial": str(f), "irreducibility": type(status).__name__.lower(), "detail": repr(status)})
    payload = {"admissible": True, "shift": tup.shift, "normalized": [str(f) for f in tup.polys], "polynomials": rows}
    if cfg.format == "json":
        _emit(cfg, args, payload)
    else:
        print("admissible: yes")
        print(f"shift N: {tup.shift}")
        print(f"normalized: {tup}")
        for r in rows:
            print(f"{r['polynomial']}: {r['detail']}")
    return 0


def _cache(cfg):
    return LocalDataCache(cfg.cache_dir) if cfg.cache_dir else None


def cmd_constants(cfg, args) -> int:
    rows = []
    for P in cfg.cutoff:
        est = singular_series(cfg.tuple, P, cfg.precision, _cache(cfg))
        rows.append((cfg.tuple.hash, P, est.direct, est.mertens, est.spread))
    _emit(cfg, args, csv_rows=rows, header=("tuple_hash", "P", "direct", "mertens", "spread"))
    return 0


def _require_x(cfg):
    if not cfg.x:
        raise ConfigError([("x", "required")])


def _series_S(cfg):
    return singular_series(cfg.tuple, max(cfg.cutoff), cfg.precision, _cache(cfg)).value


def cmd_predict(cfg, args) -> int:
    _require_x(cfg)
    S = _series_S(cfg)
    rows = [(x, main_term(cfg.tuple, S, x, cfg.y, cfg.precision)) for x in cfg.x]
    _emit(cfg, args, csv_rows=rows, header=("x", "M"))
    return 0


def _source(cfg):
    return stats.ORACLE if cfg.kind == "oracle" else models.SetInstance(cfg.model_spec())


def cmd_count(cfg, args) -> int:
    _require_x(cfg)
    src = _source(cfg)
    S = _series_S(cfg)
    rows = []
    for x in cfg.x:
        c = stats.count_hits(src, cfg.tuple, int(x), args.threads)
        M = main_term(cfg.tuple, S, x)
        rows.append({"x": int(x), "count": c, "M": M, "relative_gap": (c - M) / M})
    cfg.format = cfg.format or "json"
    _emit(cfg, args, {"S": S, "counts": rows})
    return 0


def cmd_series(cfg, args) -> int:
    _require_x(cfg)
    series = stats.hit_series(_source(cfg), cfg.tuple, cfg.x, _series_S(cfg), threads=args.threads)
    _emit(cfg, args, csv_rows=series.rows, header=("x", "count", "M", "delta"))
    return 0


def cmd_sample(cfg, args) -> int:
    if cfg.kind == "oracle":
        raise ConfigError([("model.kind", "sample needs a random model")])
    if cfg.lo is None or cfg.hi is None:
        raise ConfigError([("range", "required (LO:HI)")])
    if not cfg.out:
        raise ConfigError([("out", "required for sample")])
    inst = models.SetInstance(cfg.model_spec())
    bits = inst.materialize(cfg.lo, cfg.hi, args.threads)
    models.write_bitmap(cfg.out, cfg.lo, cfg.hi, bits)
    digest = hashlib.sha256(Path(cfg.out).read_bytes()).hexdigest()
    cfg.format = "json"
    _emit(cfg, args, {"file": str(cfg.out), "popcount": int(bits.sum()), "sha256": digest,
                      "clamp_count": inst.clamp_count})
    return 0


def cmd_simulate(cfg, args) -> int:
    if cfg.kind == "oracle":
        raise ConfigError([("model.kind", "simulate needs a random model")])
    _require_x(cfg)
    x = int(cfg.x[0])
    y = cfg.y if cfg.y is not None else x
    summary = stats.monte_carlo(cfg.model_spec(), cfg.tuple, x, y, cfg.trials, args.threads,
                                S=_series_S(cfg))
    d = summary.to_dict()
    payload = {k: d[k] for k in ("spec", "tuple", "x", "y", "trials", "mean", "exact_mean", "variance",
                                 "M", "var_over_M2", "seeds_hash", "clamp_count")}
    cfg.format = "json"
    _emit(cfg, args, payload)
    return 0


# --- verification suites ---------------------------------------------------------------

def verify_sifted_counts(cfg, args) -> tuple:
    gen = np.random.default_rng(cfg.seed)
    ratios = []
    for _ in range(20):
        fam = ResidueFamily.random(50, 3, gen)
        ratios.append(sifted_count_report(fam, 10**6, 10**6, args.threads).ratio)
    periodic = sifted_count_report(ResidueFamily.zero_classes(10), 0, 210)
    ok = all(0.99 <= r <= 1.01 for r in ratios) and periodic.ratio == 1.0
    return ok, {"ratios": ratios, "periodic_ratio": periodic.ratio, "periodic_count": periodic.count}


def verify_expectation(cfg, args) -> tuple:
    tup, n, prof = cfg.tuple, cfg.n, cfg.profile
    exact = stats.expected_Rn_exact(tup, n, prof)
    trials = 10_000
    values = tup.values(n)
    exposure = [[int(p) for p in stats.primes(prof.z(v)) if prof.t(v) < p] for v in values]
    hits = 0
    for i in range(trials):
        seed = stats.trial_seed(cfg.seed, i)
        hits += all(v % p != models.residue_for_prime(seed, p) for v, ps in zip(values, exposure) for p in ps)
    q = float(exact)
    sigma = math.sqrt(q * (1 - q) / trials)
    mean = hits / trials
    ok = abs(mean - q) <= 4 * sigma if sigma > 0 else mean == q
    return ok, {"n": n, "exact": f"{exact.numerator}/{exact.denominator}", "mean": mean, "sigma": sigma}


def _toy_profile(toy_primes) -> ThresholdProfile:
    ps = sorted(set(toy_primes))
    prof = ThresholdProfile.fixed(ps[0] - 1, ps[-1])
    got = [int(p) for p in stats.primes(ps[-1]) if p > ps[0] - 1]
    if got != ps:
        raise ConfigError([("toy_primes", "must be all primes in a range (lo, hi]")])
    return prof


def verify_pair(cfg, args) -> tuple:
    prof = _toy_profile(cfg.toy_primes)
    gen = np.random.default_rng(cfg.seed)
    pool = [normalize_tuple(parse_tuple(s)) for s in ("X", "X,X+2", "X,X+2,X+6", "X^2+1", "X,X+4", "2X+1,X")]
    mismatches = []
    cases = 0
    for i in range(50):
        tup = pool[i % len(pool)]
        n1 = int(gen.integers(1, 60))
        if i % 5 == 0:
            n2 = n1  # diagonal
        elif i % 5 == 1:
            n2 = n1 + 2  # degenerate for the twin-style tuples
        else:
            n2 = int(gen.integers(1, 60))
        a = stats.expected_pair_exact(tup, n1, n2, prof)
        b = stats.brute_force_pair(tup, n1, n2, prof)
        cases += 1
        if a != b:
            mismatches.append({"tuple": str(tup), "n1": n1, "n2": n2, "exact": str(a), "brute": str(b)})
    return not mismatches, {"toy_primes": cfg.toy_primes, "cases": cases, "mismatches": mismatches}


def verify_factorization(cfg, args) -> tuple:
    spec = models.ModelSpec("m2", cfg.seed, cfg.profile)
    lo = cfg.lo if cfg.lo is not None else 100
    hi = cfg.hi if cfg.hi is not None else 10**4
    bad = stats.factorization_check(spec, cfg.tuple, lo, hi)
    return bad == 0, {"lo": lo, "hi": hi, "mismatches": bad}


VERIFY = {
    "lemma22": verify_sifted_counts,
    "expectation": verify_expectation,
    "pair": verify_pair,
    "factorization": verify_factorization,
}


def cmd_verify(cfg, args) -> int:
    ok, detail = VERIFY[args.suite](cfg, args)
    cfg.format = "json"
    _emit(cfg, args, {"suite": args.suite, "passed": ok, **detail})
    return 0 if ok else 3


def cmd_cache(cfg, args) -> int:
    if not cfg.cache_dir:
        raise ConfigError([("cache_dir", "set --cache-dir or BH_LAB_CACHE")])
    root = Path(cfg.cache_dir)
    if args.action == "clear":
        LocalDataCache(root).clear()
        for path in root.glob("primes-*.txt"):
            path.unlink()
        print(f"cleared {root}")
        return 0
    table = primes_up_to(cfg.bound, root / f"primes-{cfg.bound}.txt")
    msg = f"primes <= {cfg.bound}: {len(table)}"
    if cfg.tuple is not None:
        local_table(cfg.tuple, table.upto(LocalDataCache.MAX_P), LocalDataCache(root))
        msg += f"; local data for {cfg.tuple.hash}"
    print(msg)
    return 0


COMMANDS = {
    "check": cmd_check,
    "constants": cmd_constants,
    "predict": cmd_predict,
    "sample": cmd_sample,
    "count": cmd_count,
    "series": cmd_series,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "cache": cmd_cache,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--tuple", help='polynomials, e.g. "X,X+2"')
    common.add_argument("--model", help="cramer, granville, m1, m2, bft_r or oracle")
    common.add_argument("--seed", help="64-bit master seed (default 0)")
    common.add_argument("--profile", help="desk (default) or paper")
    common.add_argument("--granville-y", dest="granville_y", type=float)
    common.add_argument("--x", help="x value(s), comma separated")
    common.add_argument("--y", help="window length")
    common.add_argument("--range", help="LO:HI")
    common.add_argument("--trials")
    common.add_argument("--cutoff", help="prime cutoff(s) P, comma separated")
    common.add_argument("--n", help="index n for verify expectation")
    common.add_argument("--toy-primes", dest="toy_primes", help="e.g. 3,5,7")
    common.add_argument("--bound", help="prime cache bound")
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--cache-dir", dest="cache_dir")
    common.add_argument("--precision", choices=("double", "extended"))
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--assume-irreducible", action="store_true")
    common.add_argument("--no-timestamp", action="store_true")

    parser = argparse.ArgumentParser(prog="bh-lab", description="Bateman-Horn random prime model experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "verify":
            p.add_argument("suite", choices=sorted(VERIFY))
        if name == "cache":
            p.add_argument("action", choices=("build", "clear"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    tupleless = args.command in ("cache", "sample") or (args.command == "verify" and args.suite in ("lemma22", "pair"))
    needs_tuple = not tupleless or args.tuple is not None
    try:
        cfg = parse_config(args, needs_tuple)
        for w in cfg.warnings:
            print(f"warning: {w}", file=sys.stderr)
        code = COMMANDS[args.command](cfg, args)
    except Inadmissible as exc:
        print(f"config error: tuple: inadmissible at p = {exc.p}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        for key, msg in exc.problems:
            print(f"config error: {key}: {msg}", file=sys.stderr)
        return 2
    except BHLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
