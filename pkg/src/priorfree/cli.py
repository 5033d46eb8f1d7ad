"""Command-line batch runner.

    priorfree verify-types --n-max 6
    priorfree slepian-wolf --config sw1.json --out results/
    priorfree acceptance --out acceptance/ --seed 7

Protocol subcommands write ``trials.csv`` (one row per trial, in trial order)
and ``summary.json``.  Wall-clock timestamps appear only in the summary's
``metadata`` block, so every other byte is fixed by the config and seed.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from collections import Counter
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from . import __version__
from .acceptance import DEFAULT_SEED, TRIAL_COLUMNS, abort_bound, run_acceptance
from .config import ExperimentConfig, FixedInputs, IidInputs
from .info import Dist, conditional_entropy, conditional_mutual_information
from .oracles import binomial_estimate, judge, verify_cardinality_suite
from .protocols import (ProtocolParams, estimate_joint_type, run_int2, run_int3, run_rst1,
                        run_rst2, run_sw1, run_sw2, run_sw3, trial_randomness)
from .protocols.estimation import max_cell_deviation
from .protocols.rates import delta_triple, estimation_failure_bound, eta1, eta2
from .randomness import NewmanStrings, child_seed, sample_categorical

SUMMARY_SCHEMA = "priorfree.experiment/1"
FAMILIES = {
    "estimate": ("estimate",),
    "slepian-wolf": ("sw1", "sw2", "sw3"),
    "reverse-shannon": ("rst1", "rst2"),
    "interactive": ("int2", "int3"),
}
# who draws and transmits the string index in newman mode: the party speaking first
NEWMAN_SENDER = {"sw1": "A", "sw3": "A", "rst1": "A", "int3": "A",
                 "sw2": "B", "rst2": "B", "int2": "B", "estimate": None}

PRESETS = {
    "estimate": {"protocol": "estimate", "inputs": {"kind": "iid",
                                                    "joint": [[0.4, 0.1], [0.1, 0.4]]},
                 "params": {"n": 100, "delta": 0.25, "delta_s": 0.2}, "trials": 200},
    "slepian-wolf": {"protocol": "sw1", "inputs": {"kind": "iid",
                                                   "joint": [[0.45, 0.05], [0.05, 0.45]]},
                     "params": {"n": 8, "delta": 0.1}, "trials": 200},
    "reverse-shannon": {"protocol": "rst1", "channels": ["bsc(0.2)"],
                        "inputs": {"kind": "fixed", "x": [0] * 8, "y": [0] * 8},
                        "params": {"n": 8, "delta": 0.15, "delta_prime": 0.15,
                                   "delta_double_prime": 0.15}, "trials": 200},
    "interactive": {"protocol": "int2", "channels": ["bsc(0.2)", "bsc(0.3)"],
                    "inputs": {"kind": "fixed", "x": [0] * 6, "y": [0] * 6},
                    "params": {"n": 6, "delta": 0.3, "delta_prime": 0.3,
                               "delta_double_prime": 0.15, "delta_s": 0.5}, "trials": 200},
}


class InputSource:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(child_seed(cfg.seed, 0xC0DE).generate_state(2))

    def pair(self, trial: int) -> tuple[np.ndarray, np.ndarray]:
        law, n = self.cfg.inputs, self.cfg.params.n
        if isinstance(law, FixedInputs):
            return np.array(law.x), np.array(law.y)
        if isinstance(law, IidInputs):
            joint = np.asarray(law.joint, dtype=float)
            cells = sample_categorical(np.tile(joint.ravel(), (n, 1)), self.rng)
            return cells // self.cfg.y_size, cells % self.cfg.y_size
        x, y = law.pairs[trial % len(law.pairs)]
        return np.array(x), np.array(y)


def _true_type(x, y, xs, ys) -> np.ndarray:
    t = np.zeros((xs, ys))
    np.add.at(t, (x, y), 1.0 / len(x))
    return t


def _one(cfg: ExperimentConfig, params: ProtocolParams, x, y, rand):
    xs, ys = cfg.x_size, cfg.y_size
    t = _true_type(x, y, xs, ys) if cfg.t_tilde == "exact" else np.asarray(cfg.t_tilde, float)
    p = cfg.protocol
    if p == "sw1":
        return run_sw1(x, y, t, params, rand, xs, ys)
    if p == "sw2":
        return run_sw2(x, y, params, rand, xs, ys)
    if p == "sw3":
        return run_sw3(x, y, cfg.spec().channels[0].table, params, rand, xs, ys)
    if p == "rst1":
        return run_rst1(x, y, t, cfg.spec().channels[0], params, rand, xs, ys)
    if p == "rst2":
        return run_rst2(x, y, cfg.spec().channels[0], params, rand, xs, ys)
    if p == "int2":
        return run_int2(x, y, cfg.spec(), params, rand)
    return run_int3(x, y, cfg.spec(), params, rand)


def _rate_cap(cfg: ExperimentConfig, params: ProtocolParams, x, y) -> Optional[int]:
    """Per-run communication cap on the true joint type, where one is stated."""
    n, xs, ys = params.n, cfg.x_size, cfg.y_size
    t = _true_type(x, y, xs, ys)
    try:
        if cfg.protocol == "sw1":
            return math.ceil(n * (conditional_entropy(Dist(t), (0,), (1,))
                                  + eta1(n, params.delta, xs, ys, params.o)))
        if cfg.protocol == "rst1":
            p = cfg.spec().channels[0].table
            joint = Dist(np.einsum("xm,xy->mxy", p, t))
            dmax = max(params.delta, params.delta_prime, params.delta_double_prime)
            return math.ceil(n * (conditional_mutual_information(joint, (0,), (1,), (2,))
                                  + eta2(n, dmax, p.shape[1], xs, ys, params.o)))
    except ValueError:
        return None
    return None


def _failure_bound(cfg: ExperimentConfig, params: ProtocolParams) -> Optional[float]:
    n, p = params.n, cfg.protocol
    if p == "sw1":
        return 2.0 ** (-n * params.delta)
    if p == "estimate":
        return estimation_failure_bound(params.m, params.delta, cfg.x_size, cfg.y_size)
    if p in ("rst1", "rst2", "int2", "int3"):
        spec = cfg.spec()
        m_size = max(spec.message_sizes)
        dt = delta_triple(n, params.delta_prime, m_size, cfg.x_size, cfg.y_size)
        d_min = min(params.delta, dt, params.delta_double_prime)
        return abort_bound(n, d_min, spec.j)
    return None


def run_experiment(cfg: ExperimentConfig, out: Path) -> dict:
    """Run ``cfg.trials`` trials, writing trials.csv and summary.json into ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    params = cfg.params.build()
    newman = None
    if cfg.mode == "newman":
        newman = NewmanStrings.draw(cfg.newman.strings, cfg.newman.seed)
    source = InputSource(cfg)
    tags: Counter = Counter()
    successes = cc_sum = sr_sum = over_cap = checked = 0
    with open(out / "trials.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_COLUMNS)
        for trial in range(cfg.trials):
            x, y = source.pair(trial)
            rand = trial_randomness(cfg.seed, trial, cfg.mode, newman,
                                    NEWMAN_SENDER[cfg.protocol] if newman else None)
            if cfg.protocol == "estimate":
                ta, tb, led = estimate_joint_type(x, y, cfg.x_size, cfg.y_size, params, rand)
                ok = max_cell_deviation(tb, x, y, cfg.x_size, cfg.y_size) <= params.delta
                status, tag, correct = "success", "" if ok else "E_est", ok
            else:
                o = _one(cfg, params, x, y, rand)
                led, status, tag = o.ledger, o.status, o.error_tag or ""
                correct = o.success and o.agreement
                if cfg.protocol.startswith("sw"):
                    correct = o.success and np.array_equal(o.transcript[0], x)
            tags[tag or "none"] += 1
            if status == "success" and correct is not False:
                successes += 1
                cc_sum += led.comm_bits
                sr_sum += led.shared_bits
                cap = _rate_cap(cfg, params, x, y)
                if cap is not None:
                    checked += 1
                    over_cap += led.comm_bits > cap
            w.writerow([trial, cfg.protocol, cfg.seed, status, tag,
                        ";".join(str(b) for b in led.round_bits()), led.comm_bits,
                        led.shared_structural, led.shared_rate, led.private_A, led.private_B,
                        int(bool(correct))])
    n = params.n
    failures = cfg.trials - successes
    stats = {
        "trials": cfg.trials,
        "successes": successes,
        "failure_rate": failures / cfg.trials if cfg.trials else None,
        "mean_cc_per_n": cc_sum / successes / n if successes else None,
        "mean_sr_per_n": sr_sum / successes / n if successes else None,
        "error_tags": dict(sorted(tags.items())),
        "rate_cap_checked": checked,
        "rate_cap_violations": over_cap,
    }
    reports = []
    bound = _failure_bound(cfg, params)
    if bound is not None and cfg.trials:
        reports.append(judge(f"{cfg.protocol}_failure_rate", bound,
                             binomial_estimate(failures, cfg.trials)).as_row())
    summary = {
        "schema": SUMMARY_SCHEMA,
        "metadata": {"version": __version__, "started_unix": started,
                     "finished_unix": time.time()},
        "config": cfg.model_dump(mode="json"),
        "newman": {"strings": newman.s, "verified": False} if newman else None,
        "stats": stats,
        "bound_reports": reports,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


def _experiment_config(args, family: str) -> ExperimentConfig:
    if args.config:
        raw = json.loads(Path(args.config).read_text())
    else:
        raw = dict(PRESETS[family])
    for key, val in (("seed", args.seed), ("trials", args.trials), ("mode", args.mode)):
        if val is not None:
            raw[key] = val
    cfg = ExperimentConfig.model_validate(raw)
    if cfg.protocol not in FAMILIES[family]:
        raise ValueError(f"protocol {cfg.protocol!r} does not belong to '{family}' "
                         f"(expected one of {', '.join(FAMILIES[family])})")
    return cfg


def _cmd_protocol(args) -> int:
    cfg = _experiment_config(args, args.command)
    out = Path(args.out or cfg.output or f"results/{cfg.protocol}")
    summary = run_experiment(cfg, out)
    s = summary["stats"]
    print(f"{cfg.protocol}: {s['successes']}/{s['trials']} succeeded; "
          f"failure rate {s['failure_rate']}; mean CC/n {s['mean_cc_per_n']}; "
          f"rate-cap violations {s['rate_cap_violations']}/{s['rate_cap_checked']}")
    for r in summary["bound_reports"]:
        print(f"  {r['name']}: bound {r['bound_value']:.4g}, verdict {r['verdict']}")
    bad = any(r["verdict"] == "fail" for r in summary["bound_reports"])
    return 1 if bad or s["rate_cap_violations"] else 0


def _cmd_verify_types(args) -> int:
    arities = tuple(int(a) for a in args.arities.split("x"))
    rep = verify_cardinality_suite(args.n_max, arities)
    print(f"{rep.checks} checks over n <= {args.n_max}, alphabets {arities}: "
          f"{len(rep.violations)} violations")
    for kind, k in sorted(rep.by_kind.items()):
        print(f"  {kind}: {k}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "verify_types.json").write_text(json.dumps(
            {"checks": rep.checks, "by_kind": rep.by_kind, "violations": rep.violations},
            indent=2))
    return 0 if rep.ok else 1


def _cmd_acceptance(args) -> int:
    out = Path(args.out or "acceptance")
    seed = DEFAULT_SEED if args.seed is None else args.seed
    only = set(args.only.split(",")) if args.only else None
    results = run_acceptance(out, seed, args.scale, determinism=not args.no_determinism,
                             only=only)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="priorfree", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    vt = sub.add_parser("verify-types", help="exhaustive cardinality checks")
    vt.add_argument("--n-max", type=int, default=6)
    vt.add_argument("--arities", default="2x2", help="e.g. 2x3")
    vt.add_argument("--out")
    vt.set_defaults(func=_cmd_verify_types)

    for name in FAMILIES:
        p = sub.add_parser(name, help=f"run a {name} experiment (preset if no --config)")
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out")
        p.add_argument("--mode", choices=("unbounded", "newman"))
        p.set_defaults(func=_cmd_protocol)

    acc = sub.add_parser("acceptance", help="run the acceptance suite")
    acc.add_argument("--seed", type=int)
    acc.add_argument("--out")
    acc.add_argument("--scale", type=float, default=1.0, help="multiply every trial count")
    acc.add_argument("--only", help="comma-separated criterion ids, e.g. AC-1,AC-10")
    acc.add_argument("--no-determinism", action="store_true", help="skip the rerun check")
    acc.set_defaults(func=_cmd_acceptance)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as err:
        for e in err.errors():
            loc = ".".join(str(p) for p in e["loc"]) or "<root>"
            print(f"config error at {loc}: {e['msg']}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
