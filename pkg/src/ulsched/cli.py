"""Command-line experiment runner.

Each subcommand builds a request, runs it through the service layer
(in-process unless --service-url points at a remote instance), and
writes the returned table as CSV with a `#` metadata header.  Units on
flags are human-facing: densities per km², powers in dBm, thresholds in
dB; conversion to SI happens once, inside the service boundary.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from typing import List, Optional, Sequence, Tuple

from .client import ServiceError, post_experiment
from .csvio import write_table


def _parse_grid(text: str, what: str) -> Tuple[float, float, int]:
    """Parse 'start:stop:count' (or a single value) into grid fields."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return v, v, 1
        if len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            return start, stop, count
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(
        f"{what} must be 'start:stop:count' or a single value, got {text!r}")


def _parse_engines(text: str) -> List[str]:
    engines = [e.strip() for e in text.split(",") if e.strip()]
    if not engines:
        raise argparse.ArgumentTypeError("engines list is empty")
    return engines


def _add_channel_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--alpha", type=float, default=4.0,
                    help="path-loss exponent (> 2, default 4)")
    ap.add_argument("--noise-dbm", type=float, default=-90.0,
                    help="noise power sigma^2 in dBm (default -90)")
    ap.add_argument("--pu-dbm", type=float, default=23.0,
                    help="maximum transmit power P_u in dBm (default 23)")
    ap.add_argument("--rho-dbm", type=float, default=-70.0,
                    help="power-control target rho_o in dBm (default -70)")


def _add_density_flags(ap: argparse.ArgumentParser, ue_required: bool) -> None:
    ap.add_argument("--lambda-bs-per-km2", type=float, required=True,
                    help="BS density per km^2")
    ap.add_argument("--lambda-ue-per-km2", type=float,
                    required=ue_required, default=None if ue_required else 0.0,
                    help="user density per km^2")


def _add_sim_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--trials", type=int, default=10_000,
                    help="Monte Carlo trials (default 10000)")
    ap.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    ap.add_argument("--window-radius-m", type=float, default=None,
                    help="simulation disc radius in meters "
                         "(default max(10/sqrt(lambda_bs), 4R))")
    ap.add_argument("--jobs", type=int, default=1,
                    help="parallel trial workers (default 1; results "
                         "identical for any value)")


def _add_io_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--out", default="-",
                    help="output CSV path, '-' for stdout (default)")
    ap.add_argument("--service-url", default=None,
                    help="run against a remote `ulsched serve` instance "
                         "instead of in-process")


def _add_engines_flag(ap: argparse.ArgumentParser, default: str) -> None:
    ap.add_argument("--engines", type=_parse_engines, default=default.split(","),
                    help=f"comma list from analytic-1,analytic-2,sim "
                         f"(default {default})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ulsched",
        description="Uplink SINR / rate experiments for Poisson cellular "
                    "networks with best-fade scheduling")
    sub = ap.add_subparsers(dest="command", required=True)

    ccdf = sub.add_parser("ccdf", help="SINR CCDF vs threshold")
    _add_density_flags(ccdf, ue_required=True)
    _add_channel_flags(ccdf)
    _add_sim_flags(ccdf)
    ccdf.add_argument("--theta-db", default="-20:30:101",
                      help="threshold grid start:stop:count in dB "
                           "(default -20:30:101)")
    _add_engines_flag(ccdf, "analytic-1,analytic-2,sim")
    _add_io_flags(ccdf)

    rate = sub.add_parser("rate", help="mean spectral efficiencies and gain")
    _add_density_flags(rate, ue_required=True)
    _add_channel_flags(rate)
    _add_sim_flags(rate)
    _add_engines_flag(rate, "analytic-1,analytic-2,sim")
    _add_io_flags(rate)

    gain = sub.add_parser("gain", help="scheduling gain vs density ratio")
    gain.add_argument("--lambda-bs-per-km2", type=float, required=True,
                      help="fixed BS density per km^2; users are swept")
    _add_channel_flags(gain)
    _add_sim_flags(gain)
    gain.add_argument("--ratio-grid", default="1:10:10",
                      help="lambda_ue/lambda_bs grid start:stop:count "
                           "(default 1:10:10)")
    gain.add_argument("--model", choices=("auto", "voronoi", "range"),
                      default="auto",
                      help="user-count model for the analytic column "
                           "(default auto = validity-based)")
    _add_engines_flag(gain, "analytic-1,sim")
    _add_io_flags(gain)

    val = sub.add_parser("validity", help="g1/g2 model-validity indicators")
    _add_channel_flags(val)
    val.add_argument("--lambda-bs-grid", default="0.1:100:31",
                     help="BS density sweep start:stop:count per km^2, "
                          "log spaced (default 0.1:100:31)")
    _add_io_flags(val)

    pmf = sub.add_parser("pmf", help="involved-user count distribution")
    _add_density_flags(pmf, ue_required=True)
    _add_channel_flags(pmf)
    _add_sim_flags(pmf)
    pmf.add_argument("--n-max", type=int, default=None,
                     help="largest n row (default: cover all but 1e-9 mass)")
    _add_engines_flag(pmf, "analytic-1,analytic-2,sim")
    _add_io_flags(pmf)

    dump = sub.add_parser("dump-realization",
                          help="one network snapshot as a point table")
    _add_density_flags(dump, ue_required=True)
    _add_channel_flags(dump)
    _add_sim_flags(dump)
    dump.add_argument("--trial-index", type=int, default=0,
                      help="which trial's snapshot to dump (default 0)")
    _add_io_flags(dump)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    return ap


def _params_payload(args, with_ue: bool = True) -> dict:
    d = {"lambda_bs_per_km2": args.lambda_bs_per_km2, "alpha": args.alpha,
         "noise_dbm": args.noise_dbm, "pu_dbm": args.pu_dbm,
         "rho_dbm": args.rho_dbm}
    if with_ue:
        d["lambda_ue_per_km2"] = args.lambda_ue_per_km2
    return d


def _sim_payload(args) -> dict:
    return {"trials": args.trials, "seed": args.seed,
            "window_radius_m": args.window_radius_m, "jobs": args.jobs}


def _request_for(args) -> Tuple[str, dict]:
    cmd = args.command
    if cmd == "ccdf":
        start, stop, count = _parse_grid(args.theta_db, "--theta-db")
        return "/ccdf", {
            "params": _params_payload(args), "sim": _sim_payload(args),
            "grid": {"start_db": start, "stop_db": stop, "count": count},
            "engines": args.engines}
    if cmd == "rate":
        return "/rate", {"params": _params_payload(args),
                         "sim": _sim_payload(args), "engines": args.engines}
    if cmd == "gain":
        start, stop, count = _parse_grid(args.ratio_grid, "--ratio-grid")
        return "/gain", {
            "params": _params_payload(args, with_ue=False),
            "sim": _sim_payload(args),
            "ratios": {"start": start, "stop": stop, "count": count},
            "model": args.model, "engines": args.engines}
    if cmd == "validity":
        start, stop, count = _parse_grid(args.lambda_bs_grid,
                                         "--lambda-bs-grid")
        return "/validity", {
            "channel": {"alpha": args.alpha, "noise_dbm": args.noise_dbm,
                        "pu_dbm": args.pu_dbm, "rho_dbm": args.rho_dbm},
            "lambdas": {"start_per_km2": start, "stop_per_km2": stop,
                        "count": count}}
    if cmd == "pmf":
        return "/pmf", {"params": _params_payload(args),
                        "sim": _sim_payload(args), "engines": args.engines,
                        "n_max": args.n_max}
    if cmd == "dump-realization":
        return "/dump-realization", {"params": _params_payload(args),
                                     "sim": _sim_payload(args),
                                     "trial_index": args.trial_index}
    raise AssertionError(f"unhandled command {cmd}")


def _fail(error: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": error, "message": message}) + "\n")
    return 2


_GRID_FLAGS = ("--theta-db", "--ratio-grid", "--lambda-bs-grid")
_GRID_VALUE = re.compile(r"^-?\d[\d.eE:+-]*$")


def _absorb_negative_grids(argv: Sequence[str]) -> List[str]:
    """Join grid flags with values like '-10:20:31' that argparse would
    otherwise mistake for options."""
    out: List[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok in _GRID_FLAGS and i + 1 < len(argv)
                and argv[i + 1].startswith("-")
                and _GRID_VALUE.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_absorb_negative_grids(argv))
    if args.command == "serve":
        import uvicorn

        from .service.app import app
        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    path, payload = _request_for(args)
    try:
        body = post_experiment(path, payload, base_url=args.service_url)
    except ServiceError as exc:
        if isinstance(exc.body, dict):
            detail = exc.body.get("message") or json.dumps(
                exc.body.get("detail", exc.body))
            return _fail(exc.body.get("error", f"http-{exc.status_code}"),
                         detail)
        return _fail(f"http-{exc.status_code}", str(exc.body))
    rows = body["rows"]
    if args.out == "-":
        write_table(sys.stdout, body["columns"], rows, body["manifest"])
    else:
        write_table(args.out, body["columns"], rows, body["manifest"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
