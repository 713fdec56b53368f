"""Command-line front end.

Four subcommands: analyze (one parameter point), sweep (tables over T /
beta / H / R), optimize (delay-optimal interval, or energy-optimal under a
delay cap with --dmax) and simulate (Monte-Carlo replication).  Parameters
come from flat flags, a JSON config file, or both (flags win).  All
emitted numbers carry 12 significant digits so outputs can serve as exact
regression baselines.

Exit codes: 0 ok, 2 config error, 4 infeasible delay bound,
3 unstable queue / no stable interval, 5 divergence under --require-stable.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .energy import ecr as ecr_of, optimize_energy_under_delay
from .errors import (
    EmptyStableRangeError,
    InfeasibleConstraintError,
    InstabilityError,
    PacketizationError,
)
from .model import (
    expected_delay,
    interarrival_moments,
    service_moments,
    stability_report,
    waiting_time_kingman,
)
from .optimize import optimal_interval
from .params import CodingProfile, Mode, SystemParams
from .simulate import SimConfig, simulate, write_packet_trace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_INFEASIBLE = 4
EXIT_DIVERGED = 5

SWEEP_VARIABLES = ("T", "beta", "H", "R")

SWEEP_BASE_COLUMNS = (
    "value",
    "stable",
    "utilization",
    "formation",
    "waiting",
    "service",
    "total",
    "cv_service",
    "ecr",
)
SWEEP_OPTIMAL_COLUMNS = ("t_star", "total_at_t_star")
SWEEP_SIM_COLUMNS = (
    "sim_formation",
    "sim_waiting",
    "sim_service",
    "sim_total",
    "sim_stderr_total",
    "sim_diverged",
)


# ----------------------------------------------------------------------
# number formatting: every float is printed with 12 significant digits
# ----------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return '"nan"'
        if math.isinf(value):
            return '"inf"' if value > 0 else '"-inf"'
        return format(value, ".12g")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot format {type(value)!r}")


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON with fixed float formatting (insertion order kept)."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{dumps(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _fmt(obj)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".12g")
    return str(value)


def _write_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# argument parsing and config merging
# ----------------------------------------------------------------------

def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, default=None, help="bits per symbol")
    parser.add_argument("--header", type=int, default=None, help="header bits")
    parser.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="symbol arrival rate (1/sec)")
    parser.add_argument("--rate", type=float, default=None, help="channel rate (bit/sec)")
    parser.add_argument("--ber", type=float, default=None, help="bit error probability")
    parser.add_argument("--interval", type=float, default=None,
                        help="packetization interval (sec)")
    parser.add_argument("--mode", choices=["efficient", "slotted"], default=None)
    parser.add_argument("--power", type=float, default=None, help="transmit power (W)")
    parser.add_argument("--coding", type=str, default=None,
                        help="rd,rh,bd,bh coding profile")
    parser.add_argument("--config", type=str, default=None, help="JSON config file")
    parser.add_argument("--out", type=str, default=None, help="output file (default stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="packetizer",
        description="Delay- and energy-optimal packetization intervals "
                    "for a Poisson-fed ARQ link.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="delay breakdown and stability at one point")
    _add_shared(p)

    p = sub.add_parser("sweep", help="table of model outputs over one variable")
    _add_shared(p)
    p.add_argument("--var", choices=list(SWEEP_VARIABLES), default=None)
    p.add_argument("--start", type=float, default=None)
    p.add_argument("--stop", type=float, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--log", action="store_true", default=None,
                   help="log-spaced sweep points")
    p.add_argument("--optimal", action="store_true", default=None,
                   help="add the delay-optimal interval per row")
    p.add_argument("--with-sim", dest="with_sim", action="store_true", default=None,
                   help="add Monte-Carlo columns per row")
    p.add_argument("--symbols", type=int, default=None)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("optimize", help="delay-optimal T*, or energy-optimal with --dmax")
    _add_shared(p)
    p.add_argument("--dmax", type=float, default=None,
                   help="expected-delay bound (enables energy mode)")

    p = sub.add_parser("simulate", help="one Monte-Carlo replication")
    _add_shared(p)
    p.add_argument("--symbols", type=int, default=None)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--require-stable", dest="require_stable", action="store_true",
                   default=None, help="exit 5 if the replication diverged")
    p.add_argument("--trace", type=str, default=None, help="per-packet CSV trace file")
    p.add_argument("--compare", action="store_true", default=None,
                   help="report analytic values and relative errors")

    return parser


def _merge(args: argparse.Namespace) -> dict:
    """Flag values override config-file values override defaults."""
    merged: dict = {}
    if args.config:
        try:
            with open(args.config) as handle:
                merged.update(json.load(handle))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config file: {exc}") from exc
    for key, value in vars(args).items():
        if key in ("config", "out", "command"):
            continue
        if value is not None:
            merged[key] = value
    return merged


def _parse_coding(raw) -> CodingProfile | None:
    if raw is None:
        return None
    if isinstance(raw, str):
        parts = raw.split(",")
        if len(parts) != 4:
            raise ValueError("coding must be rd,rh,bd,bh")
        raw = [float(p) for p in parts]
    if len(raw) != 4:
        raise ValueError("coding must list rd,rh,bd,bh")
    rd, rh, bd, bh = (float(v) for v in raw)
    return CodingProfile(data_rate=rd, header_rate=rh, data_ber=bd, header_ber=bh)


def _require(cfg: dict, key: str):
    if cfg.get(key) is None:
        raise ValueError(f"missing required parameter: {key}")
    return cfg[key]


def _build_params(cfg: dict, need_interval: bool = True) -> SystemParams:
    interval = cfg.get("interval")
    if need_interval:
        interval = _require(cfg, "interval")
    return SystemParams(
        symbol_bits=int(_require(cfg, "n")),
        header_bits=int(_require(cfg, "header")),
        arrival_rate=float(_require(cfg, "lam")),
        channel_rate=float(_require(cfg, "rate")),
        bit_error_prob=float(_require(cfg, "ber")),
        interval=float(interval) if interval is not None else 1.0,
        mode=Mode(cfg.get("mode") or "efficient"),
        transmit_power=float(cfg.get("power") or 1.0),
        coding=_parse_coding(cfg.get("coding")),
    )


def _config_echo(cfg: dict, keys) -> dict:
    return {k: cfg.get(k) for k in keys}

_PARAM_KEYS = ("n", "header", "lam", "rate", "ber", "interval", "mode",
               "power", "coding", "format")


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------

def _moments_dict(m) -> dict:
    return {
        "mean": m.mean,
        "second_moment": m.second_moment,
        "variance": m.variance,
        "cv2": m.cv2,
    }


def cmd_analyze(cfg: dict, out_path: str | None) -> int:
    params = _build_params(cfg)
    report = stability_report(params)
    if not report.is_stable:
        sys.stderr.write(
            f"unstable queue: utilization {report.utilization:.6g} >= 1; "
            f"minimum channel rate {report.min_channel_rate:.6g} bit/s\n"
        )
        return EXIT_UNSTABLE
    delay = expected_delay(params)
    payload = {
        "config": _config_echo(cfg, _PARAM_KEYS),
        "stability": {
            "utilization": report.utilization,
            "is_stable": report.is_stable,
            "min_channel_rate": report.min_channel_rate,
            "asymptotic_rate_bounds": list(report.asymptotic_rate_bounds),
        },
        "delay": {
            "formation": delay.formation,
            "waiting": delay.waiting,
            "service": delay.service,
            "total": delay.total,
        },
        "service_moments": _moments_dict(service_moments(params)),
        "interarrival_moments": _moments_dict(interarrival_moments(params)),
    }
    if cfg.get("format") == "csv":
        row = {
            **{k: payload["stability"][k] for k in
               ("utilization", "is_stable", "min_channel_rate")},
            "rate_bound_low": report.asymptotic_rate_bounds[0],
            "rate_bound_high": report.asymptotic_rate_bounds[1],
            **{k: payload["delay"][k] for k in
               ("formation", "waiting", "service", "total")},
        }
        _emit(_write_csv(list(row.keys()), [row]), out_path)
    else:
        _emit(dumps(payload) + "\n", out_path)
    return EXIT_OK


_SWEEP_FIELD = {"T": "interval", "beta": "ber", "H": "header", "R": "rate"}


def _sweep_values(cfg: dict) -> list[float]:
    start = float(_require(cfg, "start"))
    stop = float(_require(cfg, "stop"))
    points = int(_require(cfg, "points"))
    if points < 1 or stop < start:
        raise ValueError("sweep range must be nonempty and ordered")
    if points == 1:
        return [start]
    if cfg.get("log"):
        if start <= 0:
            raise ValueError("log-spaced sweep requires positive start")
        la, lb = math.log(start), math.log(stop)
        return [math.exp(la + (lb - la) * i / (points - 1)) for i in range(points)]
    return [start + (stop - start) * i / (points - 1) for i in range(points)]


def _sweep_row(params: SystemParams, value: float, cfg: dict, index: int) -> dict:
    row: dict = {"value": value}
    report = stability_report(params)
    row["stable"] = report.is_stable
    row["utilization"] = report.utilization
    try:
        moments = service_moments(params)
        row["service"] = moments.mean
        row["cv_service"] = math.sqrt(moments.cv2)
    except OverflowError:
        moments = None
        row["service"] = None
        row["cv_service"] = None
    row["formation"] = params.interval / 2.0
    if report.is_stable:
        waiting = waiting_time_kingman(params)
        row["waiting"] = waiting
        row["total"] = row["formation"] + waiting + moments.mean
    else:
        row["waiting"] = None
        row["total"] = None
    try:
        row["ecr"] = ecr_of(params)
    except (ValueError, OverflowError):
        row["ecr"] = None
    if cfg.get("optimal"):
        try:
            opt = optimal_interval(params)
            row["t_star"] = opt.t_star
            row["total_at_t_star"] = opt.delay_at_t_star.total
        except EmptyStableRangeError:
            row["t_star"] = None
            row["total_at_t_star"] = None
    if cfg.get("with_sim"):
        sim_cfg = SimConfig(
            num_symbols=int(cfg.get("symbols") or 100_000),
            warmup_symbols=cfg.get("warmup"),
            seed=int(cfg.get("seed") or 0) + index,
        )
        result, _, _ = simulate(params, sim_cfg)
        row["sim_formation"] = result.mean_formation
        row["sim_waiting"] = result.mean_waiting
        row["sim_service"] = result.mean_service
        row["sim_total"] = result.mean_total
        row["sim_stderr_total"] = result.stderr_total
        row["sim_diverged"] = result.diverged
    return row


def cmd_sweep(cfg: dict, out_path: str | None) -> int:
    var = _require(cfg, "var")
    if var not in SWEEP_VARIABLES:
        raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}")
    values = _sweep_values(cfg)
    base = _build_params(cfg, need_interval=(var != "T"))

    columns = list(SWEEP_BASE_COLUMNS)
    if cfg.get("optimal"):
        columns += list(SWEEP_OPTIMAL_COLUMNS)
    if cfg.get("with_sim"):
        columns += list(SWEEP_SIM_COLUMNS)

    rows = []
    for i, value in enumerate(values):
        override = {_SWEEP_FIELD[var]: value}
        merged = {**cfg, **override}
        params = _build_params(merged) if var != "T" else base.with_interval(value)
        if var == "H":
            params = _build_params({**merged, "header": int(round(value))})
        rows.append(_sweep_row(params, value, cfg, i))

    if cfg.get("format") == "csv":
        _emit(_write_csv(columns, rows), out_path)
    else:
        payload = {
            "config": _config_echo(
                cfg, _PARAM_KEYS + ("var", "start", "stop", "points", "log",
                                    "optimal", "with_sim", "symbols", "warmup", "seed")
            ),
            "columns": columns,
            "rows": rows,
        }
        _emit(dumps(payload) + "\n", out_path)
    return EXIT_OK


def cmd_optimize(cfg: dict, out_path: str | None) -> int:
    params = _build_params(cfg, need_interval=False)
    echo_keys = _PARAM_KEYS + ("dmax",)
    if cfg.get("dmax") is not None:
        result = optimize_energy_under_delay(params, float(cfg["dmax"]))
        payload = {
            "config": _config_echo(cfg, echo_keys),
            "mode": "energy",
            "t_star": result.t_star_constrained,
            "ecr": result.ecr_at_constrained,
            "binding": result.binding.value,
            "corner_points": list(result.corner_points),
            "t_star_unconstrained": result.t_star_unconstrained,
            "ecr_unconstrained": result.ecr_at_star,
            "evaluations": result.evaluations,
        }
    else:
        opt = optimal_interval(params)
        payload = {
            "config": _config_echo(cfg, echo_keys),
            "mode": "delay",
            "t_star": opt.t_star,
            "delay": {
                "formation": opt.delay_at_t_star.formation,
                "waiting": opt.delay_at_t_star.waiting,
                "service": opt.delay_at_t_star.service,
                "total": opt.delay_at_t_star.total,
            },
            "stable_range": [opt.stable_range.lower, opt.stable_range.upper],
            "method": opt.method.value,
            "evaluations": opt.evaluations,
        }
    _emit(dumps(payload) + "\n", out_path)
    return EXIT_OK


def cmd_simulate(cfg: dict, out_path: str | None) -> int:
    params = _build_params(cfg)
    sim_cfg = SimConfig(
        num_symbols=int(_require(cfg, "symbols")),
        warmup_symbols=cfg.get("warmup"),
        seed=int(_require(cfg, "seed")),
    )
    result, packets, _ = simulate(params, sim_cfg)
    if cfg.get("trace"):
        write_packet_trace(packets, cfg["trace"])
    payload = {
        "config": _config_echo(
            cfg, _PARAM_KEYS + ("symbols", "warmup", "seed",
                                "require_stable", "compare")
        ),
        "result": {
            "n_symbols": result.n_symbols,
            "n_packets": result.n_packets,
            "mean_formation": result.mean_formation,
            "mean_waiting": result.mean_waiting,
            "mean_service": result.mean_service,
            "mean_total": result.mean_total,
            "stderr_total": result.stderr_total,
            "mean_retransmissions": result.mean_retransmissions,
            "empirical_utilization": result.empirical_utilization,
            "diverged": result.diverged,
        },
    }
    if cfg.get("compare"):
        try:
            delay = expected_delay(params)
            analytic = {
                "formation": delay.formation,
                "waiting": delay.waiting,
                "service": delay.service,
                "total": delay.total,
            }
            sim_vals = {
                "formation": result.mean_formation,
                "waiting": result.mean_waiting,
                "service": result.mean_service,
                "total": result.mean_total,
            }
            payload["analytic"] = analytic
            payload["relative_error"] = {
                k: (sim_vals[k] - analytic[k]) / analytic[k] if analytic[k] else None
                for k in analytic
            }
        except InstabilityError:
            payload["analytic"] = None
            payload["relative_error"] = None
    _emit(dumps(payload) + "\n", out_path)
    if cfg.get("require_stable") and result.diverged:
        sys.stderr.write("replication diverged (unstable queue)\n")
        return EXIT_DIVERGED
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge(args)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out)
        if args.command == "optimize":
            return cmd_optimize(cfg, args.out)
        return cmd_simulate(cfg, args.out)
    except (ValueError, OverflowError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (InstabilityError, EmptyStableRangeError) as exc:
        sys.stderr.write(f"unstable: {exc}\n")
        return EXIT_UNSTABLE
    except InfeasibleConstraintError as exc:
        sys.stderr.write(f"infeasible: {exc}\n")
        return EXIT_INFEASIBLE
    except PacketizationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
