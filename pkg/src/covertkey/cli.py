"""Command-line front end.

Every command takes a mandatory ``--seed`` and writes deterministic output,
so re-running with the same arguments reproduces artifacts byte for byte.

Exit codes
----------
0 success, 2 usage error, 3 unreadable channel or config, 4 failed
precondition or channel hypothesis, 5 size guard, 6 failed verdict.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import concentration, estimator, oneshot, protocol, rates
from .channel import example_fig2, load_channel, validate_hypotheses
from .errors import (
    ChannelParseError,
    DomainError,
    GuardError,
    InfeasibleSelectionError,
    PreconditionError,
    SearchFailureError,
)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_PRECONDITION, EXIT_GUARD, EXIT_VERDICT = 0, 2, 3, 4, 5, 6

log = logging.getLogger("covertkey")


class VerdictFailure(Exception):
    pass


# -- helpers --------------------------------------------------------------------


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ChannelParseError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ChannelParseError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ChannelParseError(f"{path}: top level must be an object")
    data["_base"] = str(Path(path).resolve().parent)
    return data


def _channel(args, cfg):
    ref = args.channel or cfg.get("channel", "fig2")
    if ref == "fig2":
        return example_fig2()
    path = Path(ref)
    if not path.is_absolute() and args.channel is None and "_base" in cfg:
        path = Path(cfg["_base"]) / path
    if not path.exists():
        raise ChannelParseError(f"channel file {path} not found")
    return load_channel(path)


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return "" if v is None else str(v)


def _require(cfg, key, cast=float):
    if key not in cfg:
        raise ChannelParseError(f"config is missing {key!r}")
    try:
        return cast(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ChannelParseError(f"config field {key!r}: {exc}") from exc


def _protocol_config(cfg, args) -> protocol.ProtocolConfig:
    m = cfg.get("m_override")
    return protocol.ProtocolConfig(
        n=_require(cfg, "n", int),
        g=_require(cfg, "g", int),
        alpha=_require(cfg, "alpha"),
        kappa=_require(cfg, "kappa"),
        zeta=float(cfg.get("zeta", 0.1)),
        mu=float(cfg.get("mu", 0.1)),
        mode=args.mode or cfg.get("mode", "oracle"),
        code_count=int(cfg.get("code_count", 1)),
        seed=args.seed,
        m_override=tuple(m) if m else None,
    )


# -- commands -------------------------------------------------------------------


def cmd_rates(args, cfg):
    ch = _channel(args, cfg)
    report = validate_hypotheses(ch, 1e-9)
    if not report.active_ok:
        raise PreconditionError("channel fails the active-warden hypotheses: " + "; ".join(report.failures()))
    grid = rates.beta_grid(args.grid or int(cfg.get("grid", 101)))
    pairing = args.pairing or cfg.get("pairing", "derived")
    pairings = rates.PAIRINGS if pairing == "both" else (pairing,)
    points = [p for pr in pairings for p in rates.rate_curve(ch, grid, pr)]
    with _output(args.out) as fh:
        rates.write_rate_csv(points, fh)


def _states(cfg, n_prime, seed):
    spec = cfg.get("states", {"kind": "constant-weight", "beta": 0.0})
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
    try:
        return protocol.make_states(spec, n_prime, rng)
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, (PreconditionError, DomainError)):
            raise
        raise ChannelParseError(f"bad state generator: {exc}") from exc


def _summary_rows(report: protocol.MetricsReport, cfg: protocol.ProtocolConfig, wt: int):
    d = report.to_dict()
    d.pop("extra")
    d.update(mode=cfg.mode, state_weight=wt, p_halt_exact=report.extra.get("p_halt_exact"))
    return d


def _simulation_checks(report: protocol.MetricsReport) -> list:
    """Invariant checks on a finished simulation; returns failure messages."""
    bad = []
    if report.halted + report.completed != report.trials:
        bad.append("trial accounting does not sum")
    for name in ("p_e", "secrecy_tv", "independence_tv", "public_uniformity_tv"):
        v = getattr(report, name)
        if v is not None and not math.isnan(v) and not -1e-12 <= v <= 1 + 1e-12:
            bad.append(f"{name}={v} outside [0, 1]")
    if report.covertness_kl is not None and report.covertness_kl < -1e-12:
        bad.append("negative covertness divergence")
    if report.exact and report.completed:
        if abs(report.p_e - report.p_e_exact) > 4 * max(report.p_e_sigma, 1.0 / report.completed):
            bad.append("Monte-Carlo error rate disagrees with exact value beyond 4 sigma")
        if report.secrecy_tv_mc is not None and abs(report.secrecy_tv_mc - report.secrecy_tv) > 4 * max(
            report.secrecy_sigma, 1e-12
        ):
            bad.append("Monte-Carlo secrecy disagrees with exact value beyond 4 sigma")
    return bad


def cmd_simulate(args, cfg):
    ch = _channel(args, cfg)
    pcfg = _protocol_config(cfg, args)
    trials = args.trials or int(cfg.get("trials", 1000))
    s = _states(cfg, pcfg.n_prime, args.seed)
    if args.out is None:
        raise PreconditionError("simulate needs --out for the trial records")
    out = Path(args.out)
    with open(out, "w") as fh:
        report = protocol.evaluate(ch, s, pcfg, trials, sink=lambda o: fh.write(o.to_json() + "\n"))
    row = _summary_rows(report, pcfg, int(s.sum()))
    summary = out.with_name(out.name + ".summary.csv")
    with open(summary, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(row))
        w.writerow([_fmt(v) for v in row.values()])
    bad = _simulation_checks(report)
    if bad:
        raise VerdictFailure("; ".join(bad))


def _finish_checks(checks, out):
    with _output(out) as fh:
        concentration.write_checks_csv(checks, fh)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise VerdictFailure(f"{len(failed)} check(s) failed: {', '.join(failed)}")


def cmd_verify_lemma1(args, cfg):
    grid = [tuple(row) for row in cfg.get("grid", concentration.DEFAULT_LEMMA1_GRID)]
    trials = args.trials or int(cfg.get("trials", 1_000_000))
    checks = concentration.lemma1_suite(grid, trials, args.seed, args.bound_scale)
    _finish_checks(checks, args.out)


def cmd_verify_oneshot(args, cfg):
    src = oneshot.binary_chain_source(
        float(cfg.get("px1", 0.5)), float(cfg.get("flip_y", 0.1)), float(cfg.get("flip_z", 0.2))
    )
    draws = args.trials or int(cfg.get("codebooks", 1000))
    rng = np.random.default_rng(args.seed)
    checks = []
    for m1 in cfg.get("m1", (2, 4)):
        for m2 in cfg.get("m2", (2, 4)):
            r = oneshot.verify_oneshot_bounds(src, int(m1), int(m2), draws, rng, bound_scale=args.bound_scale)
            params = {"m1": m1, "m2": m2, "admissible": r.admissible}
            checks.append(concentration.BoundCheck("reliability", params, r.error_bound, r.mean_error, r.error_se, draws))
            checks.append(concentration.BoundCheck("secrecy", params, r.secrecy_bound, r.mean_leakage, r.leakage_se, draws))
    _finish_checks(checks, args.out)


def cmd_estimate_beta(args, cfg):
    ch = _channel(args, cfg)
    checks = estimator.estimator_suite(
        ch,
        n_prime=int(cfg.get("n_prime", 5000)),
        beta=float(cfg.get("beta", 0.3)),
        lams=tuple(cfg.get("lams", (0.05, 0.1, 0.2))),
        ells=tuple(int(v) for v in cfg.get("ells", (100, 1000))),
        trials=args.trials or int(cfg.get("trials", 4000)),
        halt=tuple(cfg.get("halt", (10_000, 0.05, 0.15))),
        seed=args.seed,
        bound_scale=args.bound_scale,
    )
    _finish_checks(checks, args.out)


def cmd_derandomize(args, cfg):
    ch = _channel(args, cfg)
    pcfg = _protocol_config(cfg, args)
    raw = cfg.get("state_set")
    if not raw:
        raise ChannelParseError("config needs a non-empty 'state_set'")
    state_set = [protocol._check_states(s, pcfg.n_prime) for s in raw]
    eps_prime = _require(cfg, "eps_prime")
    family = protocol.CodeFamily(ch, pcfg)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(3,)))
    res = protocol.derandomize(
        family, state_set, eps_prime, rng, L=cfg.get("L"), retries=int(cfg.get("retries", 200))
    )
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["state", "p_error", "secrecy", "eps_prime", "L", "verdict"])
        for s, avg in zip(state_set, res.averages):
            ok = avg["p_error"] <= eps_prime and avg["secrecy"] <= eps_prime
            w.writerow(["".join(map(str, s)), _fmt(avg["p_error"]), _fmt(avg["secrecy"]),
                        _fmt(eps_prime), res.L, "pass" if ok else "fail"])


COMMANDS = {
    "rates": cmd_rates,
    "simulate": cmd_simulate,
    "verify-lemma1": cmd_verify_lemma1,
    "verify-oneshot": cmd_verify_oneshot,
    "estimate-beta": cmd_estimate_beta,
    "derandomize": cmd_derandomize,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config")
    common.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")
    common.add_argument("--out", help="output path (default stdout where allowed)")
    common.add_argument("--channel", help="channel spec JSON, or 'fig2' for the built-in example")
    common.add_argument("--grid", type=int, help="number of beta grid points")
    common.add_argument("--trials", type=int, help="trial / draw count")
    common.add_argument("--mode", choices=protocol.MODES)
    common.add_argument("--pairing", choices=rates.PAIRINGS + ("both",))
    common.add_argument("--bound-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="covertkey", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    if args.seed < 0 or args.seed >= 1 << 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _load_config(args.config)
        COMMANDS[args.command](args, cfg)
    except ChannelParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GuardError as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (VerdictFailure, SearchFailureError) as exc:
        print(f"verdict: {exc}", file=sys.stderr)
        return EXIT_VERDICT
    except (PreconditionError, DomainError, InfeasibleSelectionError) as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
