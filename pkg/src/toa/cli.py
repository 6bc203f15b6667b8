"""Command-line front end: ``toa kijowski|halfline|extension|moments|check``.

Exit codes: 0 success or check passed, 1 check failed, 2 invalid input,
3 resolution guard tripped.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import arrival, extensions, halfline
from .config import DEFAULT_CONFIG, RunConfig
from .errors import PreconditionError, ResolutionError, ToaError
from .numerics import Grid
from .states import to_energy_channels

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_RESOLUTION = 0, 1, 2, 3
CHECKS = ("covariance", "second-moment", "deficiency", "kernel", "flux-equality",
          "alpha-violation")

log = logging.getLogger("toa")


def _fmt(x: float) -> str:
    return format(float(x), ".15g")


def _meta_lines(meta: dict) -> list[str]:
    return [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]


def write_table(out, columns: dict, meta: dict, fmt: str):
    """Write named columns as CSV (with ``#`` header comments) or JSON."""
    names = list(columns)
    if fmt == "json":
        doc = {name: [float(v) for v in columns[name]] for name in names}
        doc["meta"] = meta
        out.write(json.dumps(doc, sort_keys=True) + "\n")
        return
    lines = _meta_lines(meta)
    lines.append(",".join(names))
    for row in zip(*(columns[n] for n in names)):
        lines.append(",".join(_fmt(v) for v in row))
    out.write("\n".join(lines) + "\n")


def _load_config(args) -> RunConfig:
    if args.config:
        return RunConfig.load(args.config)
    return RunConfig.from_dict(DEFAULT_CONFIG)


def _time_grid(args, state) -> Grid:
    if args.tmin is None or args.tmax is None:
        lo, hi = arrival.arrival_window(state)
        tmin = lo if args.tmin is None else args.tmin
        tmax = hi if args.tmax is None else args.tmax
    else:
        tmin, tmax = args.tmin, args.tmax
    return arrival.time_grid(state, tmin, tmax, args.nt)


def _base_meta(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "config_sha256": cfg.digest(),
            "hbar": cfg.constants.hbar, "mass": cfg.constants.mass,
            "momentum_grid": {"pmax": cfg.pmax, "n": cfg.n}}


def cmd_kijowski(args, out) -> int:
    cfg = _load_config(args)
    state = cfg.state()
    tgrid = _time_grid(args, state)
    dist = arrival.kijowski_distribution(state, tgrid)
    meta = _base_meta(cfg, "kijowski")
    meta.update({
        "norm_deficit": 1.0 - dist.total,
        "channel_split": [dist.metadata["total_plus"], dist.metadata["total_minus"]],
        "time_grid": tgrid.as_dict(),
        "momentum_envelope": dist.metadata["momentum_envelope"],
    })
    write_table(out, {"t": tgrid.nodes, "density": dist.density}, meta, args.format)
    return EXIT_OK


def cmd_halfline(args, out) -> int:
    cfg = _load_config(args)
    state = halfline.linear_exponential_state(args.lam, constants=cfg.constants)
    pmax = args.prange
    pgrid = Grid.symmetric(pmax, int(round(2 * pmax / args.dp)) + 1)
    dist = halfline.momentum_density(state, pgrid)
    meta = _base_meta(cfg, "halfline")
    meta.update({"state": f"2 lam^1.5 x exp(-lam x), lam={args.lam}",
                 "total": dist.total, "momentum_grid": pgrid.as_dict(),
                 "position_grid": state.samples.grid.as_dict()})
    write_table(out, {"p": pgrid.nodes, "density": dist.density}, meta, args.format)
    return EXIT_OK


def _extension_grid(args, state) -> Grid:
    if args.tmin is not None and args.tmax is not None:
        return arrival.time_grid(state, args.tmin, args.tmax, args.nt)
    lo, hi = arrival.arrival_window(state)
    span = max(abs(lo), abs(hi))
    return arrival.time_grid(state, -span, span, args.nt)


def cmd_extension(args, out) -> int:
    cfg = _load_config(args)
    state = cfg.state()
    channels = to_energy_channels(state)
    tgrid = _extension_grid(args, state)
    dist = extensions.alpha_distribution(channels, args.alpha, tgrid)
    meta = _base_meta(cfg, "extension")
    meta.update({"alpha": dist.metadata["alpha"], "total": dist.total,
                 "channel_norms": list(dist.metadata["channel_norms"]),
                 "time_grid": tgrid.as_dict()})
    write_table(out, {"t": tgrid.nodes, "density": dist.density}, meta, args.format)
    return EXIT_OK


def cmd_moments(args, out) -> int:
    cfg = _load_config(args)
    state = cfg.state()
    tgrid = _time_grid(args, state)
    report = {"config_sha256": cfg.digest()}
    t_flux, flux_check = arrival.arrival_mean_flux(state, tgrid)
    report["t_flux"] = t_flux
    report["t_operator"] = flux_check.values["t_operator"]
    try:
        t_pres, pres_check = arrival.presence_mean(state, tgrid)
        report["t_presence"] = t_pres
        report["t_presence_integral"] = pres_check.values["t_integral"]
    except PreconditionError as exc:
        report["t_presence"] = None
        report["t_presence_reason"] = str(exc)
    sm = arrival.second_moment_check(state, tgrid)
    report["second_moment_dist"] = sm.values["second_moment_dist"]
    report["second_moment_operator"] = sm.values["second_moment_operator"]
    report["kijowski_mean"] = arrival.kijowski_distribution(state, tgrid).mean()
    if args.field is not None:
        fd = extensions.constant_field_distribution(state, args.field)
        report["field"] = args.field
        report["constant_field_mean"] = fd.mean()
        report["constant_field_operator_mean"] = extensions.constant_field_mean(state, args.field)
    out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _run_check(args):
    which = args.which
    if which == "deficiency":
        cfg = _load_config(args)
        return arrival.deficiency_check(cfg.constants)
    if which == "kernel":
        cfg = _load_config(args)
        pgrid = Grid.symmetric(4.0, 801)
        f = halfline.gaussian_window(-0.5, 0.4, 1.0)
        g = halfline.gaussian_window(0.8, 0.3, -1.5)
        return halfline.overlap_kernel_check(f, g, pgrid, xmax=40.0, constants=cfg.constants)
    cfg = _load_config(args)
    state = cfg.state()
    if which == "covariance":
        return arrival.covariance_check(state, args.tau, _time_grid(args, state))
    if which == "second-moment":
        return arrival.second_moment_check(state, _time_grid(args, state))
    if which == "flux-equality":
        return arrival.arrival_mean_flux(state, _time_grid(args, state))[1]
    if which == "alpha-violation":
        channels = to_energy_channels(state)
        return extensions.alpha_covariance_violation(
            channels, args.alpha, args.tau, _extension_grid(args, state))
    raise PreconditionError(f"unknown check {which!r}")


def cmd_check(args, out) -> int:
    report = _run_check(args)
    out.write(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n")
    return EXIT_OK if report.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (default: built-in Gaussian)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tmin", type=float)
    common.add_argument("--tmax", type=float)
    common.add_argument("--nt", type=int)
    common.add_argument("--tau", type=float, default=1.0)
    common.add_argument("--alpha", type=float, default=0.0)
    common.add_argument("--field", type=float)

    parser = argparse.ArgumentParser(prog="toa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("kijowski", parents=[common], help="arrival-time density at x = 0")
    hl = sub.add_parser("halfline", parents=[common], help="half-line momentum density")
    hl.add_argument("--lam", type=float, default=1.0)
    hl.add_argument("--prange", type=float, default=40.0)
    hl.add_argument("--dp", type=float, default=0.05)
    sub.add_parser("extension", parents=[common], help="density of the T'_alpha extension")
    sub.add_parser("moments", parents=[common], help="mean arrival/presence times")
    ck = sub.add_parser("check", parents=[common], help="run one invariant check")
    ck.add_argument("which", choices=CHECKS)
    return parser


COMMANDS = {"kijowski": cmd_kijowski, "halfline": cmd_halfline,
            "extension": cmd_extension, "moments": cmd_moments, "check": cmd_check}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING, format="toa: %(message)s")
    out = open(args.out, "w", newline="\n") if args.out else sys.stdout
    try:
        return COMMANDS[args.command](args, out)
    except ResolutionError as exc:
        print(f"toa: resolution guard: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION
    except PreconditionError as exc:
        print(f"toa: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ToaError as exc:
        print(f"toa: {exc}", file=sys.stderr)
        return EXIT_FAILED
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
