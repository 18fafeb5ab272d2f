"""Command-line front end: ``hypolift {spectral,rates,simulate,estimate,verify}``.

Parameters come from built-in defaults, then an optional ``--config`` JSON
file, then command-line flags (flags win). The resolved configuration is
written to ``<out>/config.json`` and can be fed back through ``--config``.

Exit codes: 0 success, 1 a ``verify`` check failed, 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, io, rates, spectral
from .dynamics.ensemble import DEFAULT_SCHEME, SCHEMES, Ensemble, SchemeSpec, run_ensemble
from .errors import (
    HypoliftError,
    InsufficientData,
    InvalidParameter,
    UnsupportedDynamics,
    WindowOutOfRange,
)
from .model import (
    GLE,
    KIND_NAMES,
    RHMC,
    AdaptiveLangevin,
    GaussianTarget,
    KineticLangevin,
    Overdamped,
    ZigZag,
    build_drift_system,
)

GLOBAL = {"seed": (int, 0), "threads": (int, 1), "out": (str, ".")}

_KIND_PARAMS = {
    "dynamics": (str, "gle", KIND_NAMES),
    "m": (float, 1.0),
    "d": (int, 1),
    "gamma": (float, None),
    "lambda": (float, None),
    "eps": (float, 1.0),
}

SCHEMA = {
    "spectral": {
        **_KIND_PARAMS,
        "optimal": (bool, False),
        "optimize_friction": (bool, False),
        "friction_criterion": (str, "gap", ("gap", "relaxation")),
        "t_max": (float, 10.0),
        "n_points": (int, 1001),
    },
    "rates": {
        "mode": (str, "ald-optimal", ("theorem", "ald", "ald-optimal", "sweep")),
        "P_v": (float, 1.0),
        "R": (float, 1.0),
        "C0T": (float, 0.0),
        "C1T": (float, 0.0),
        "T": (float, 1.0),
        "convention": (str, "energy", ("energy", "norm")),
        "P_q": (float, 1.0),
        "d": (int, 1),
        "eps": (float, 1.0),
        "gamma": (float, 1.0),
        "M": (float, 0.0),
        "L": (float, 1.0),
        "sweep_param": (str, "eps", ("eps", "gamma", "P_q", "M", "L", "d")),
        "sweep_min": (float, 1e-3),
        "sweep_max": (float, 1e3),
        "sweep_n": (int, 61),
    },
    "simulate": {
        **_KIND_PARAMS,
        "dynamics": (str, "kinetic", KIND_NAMES),
        "potential": (str, "quadratic", ("quadratic",)),
        "optimal": (bool, False),
        "scheme": (str, None, tuple(SCHEMES)),
        "h": (float, 0.01),
        "n_traj": (int, 1000),
        "t_max": (float, 10.0),
        "n_times": (int, 101),
        "name": (str, "ensemble"),
        "csv": (bool, False),
    },
    "estimate": {
        **_KIND_PARAMS,
        "exact": (bool, False),
        "optimal": (bool, False),
        "ensemble": (str, "ensemble"),
        "shift": (float, 0.5),
        "t_max": (float, 30.0),
        "n_points": (int, 601),
        "observable": (int, 0),
        "max_lag": (float, None),
        "n_blocks": (int, 20),
    },
    "verify": {
        "suite": (str, "moments", ("moments", "stationarity")),
        "d": (int, 1),
        "m": (float, 1.0),
        "n_samples": (int, 1_000_000),
        "n_traj": (int, 10_000),
        "T": (float, 10.0),
        "h": (float, 0.01),
    },
}

HELP = {
    "dynamics": "dynamics kind",
    "m": "target precision (N(0, 1/m) per coordinate)",
    "d": "dimension",
    "gamma": "friction / refresh rate",
    "lambda": "GLE coupling",
    "eps": "adaptive Langevin thermostat mass",
    "optimal": "use the gap-optimal GLE parameters for this m",
    "optimize_friction": "kinetic Langevin: choose the optimal friction",
    "friction_criterion": "optimal friction by spectral gap or by relaxation time",
    "exact": "estimate from exact Gaussian laws instead of an ensemble",
    "ensemble": "ensemble path stem (relative to --out) to read",
    "suite": "verification suite",
    "mode": "which rate to evaluate",
    "convention": "prefactor C for the squared norm (energy) or the norm",
}


@dataclass
class RunConfig:
    """A validated parameter record for one command."""

    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 1
    out: str = "."

    def to_dict(self) -> dict:
        return {"command": self.command, "seed": self.seed, "threads": self.threads, "out": self.out, **self.params}

    def to_json(self) -> str:
        return json.dumps(io.to_jsonable(self.to_dict()), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict, command: str | None = None) -> "RunConfig":
        data = dict(data)
        cmd = data.pop("command", None) or command
        if command is not None and cmd != command:
            raise InvalidParameter(f"config is for command {cmd!r}, not {command!r}")
        if cmd not in SCHEMA:
            raise InvalidParameter(f"unknown command {cmd!r}")
        schema = SCHEMA[cmd]
        unknown = set(data) - set(schema) - set(GLOBAL)
        if unknown:
            raise InvalidParameter(f"unknown config keys for {cmd}: {sorted(unknown)}")
        glob = {k: _coerce(k, GLOBAL[k], data.get(k, GLOBAL[k][1])) for k in GLOBAL}
        params = {k: _coerce(k, spec, data.get(k, spec[1])) for k, spec in schema.items()}
        return cls(cmd, params, **glob)


def _coerce(key, spec, value):
    typ, default = spec[0], spec[1]
    if value is None:
        return None
    if typ is bool:
        if not isinstance(value, bool):
            raise InvalidParameter(f"{key} must be true/false, got {value!r}")
        return value
    if typ is int:
        if isinstance(value, bool) or not float(value).is_integer():
            raise InvalidParameter(f"{key} must be an integer, got {value!r}")
        value = int(value)
    elif typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidParameter(f"{key} must be a number, got {value!r}")
        value = float(value)
    elif not isinstance(value, str):
        raise InvalidParameter(f"{key} must be a string, got {value!r}")
    if len(spec) > 2 and value not in spec[2]:
        raise InvalidParameter(f"{key} must be one of {list(spec[2])}, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _kind(p: dict):
    name, m = p["dynamics"], p["m"]
    if name == "overdamped":
        return Overdamped()
    if name == "gle":
        if p.get("optimal") or (p["lambda"] is None and p["gamma"] is None):
            opt = spectral.optimal_gle_params(m, numeric=False)
            return GLE(opt.coupling, opt.gamma)
        if p["lambda"] is None or p["gamma"] is None:
            raise InvalidParameter("gle needs both --lambda and --gamma (or --optimal)")
        return GLE(p["lambda"], p["gamma"])
    gamma = p["gamma"]
    if name == "kinetic":
        if p.get("optimize_friction") or gamma is None:
            gamma, _ = spectral.optimal_langevin_friction(m, p.get("friction_criterion", "gap"))
        return KineticLangevin(gamma)
    gamma = 1.0 if gamma is None else gamma
    if name == "ald":
        return AdaptiveLangevin(p["eps"], gamma)
    return RHMC(gamma) if name == "rhmc" else ZigZag(gamma)


def _target(p: dict) -> GaussianTarget:
    return GaussianTarget(p["m"], p["d"])


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.to_json())
    return out


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_spectral(cfg: RunConfig) -> int:
    p = cfg.params
    kind = _kind(p)
    if not kind.linear:
        raise UnsupportedDynamics(f"{kind.name} has no linear drift; spectral analysis needs overdamped, kinetic or gle")
    times = np.linspace(0.0, p["t_max"], p["n_points"])
    report = spectral.spectral_report(kind, _target(p), curve_times=times)
    out = _out(cfg)
    data = report.to_dict()
    data["dynamics"] = kind.to_dict()
    data["m"] = p["m"]
    io.write_json(out / "spectral.json", data)
    io.write_norm_csv(out / "norm_curve.csv", report.norm_curve)
    print(f"gap={report.gap:.10g} t_rel={report.t_rel:.10g}")
    return 0


def cmd_rates(cfg: RunConfig) -> int:
    p = cfg.params
    mode = p["mode"]
    rows, summary = [], {"mode": mode}
    if mode == "theorem":
        inputs = rates.RateInputs(p["P_v"], p["R"], p["C0T"], p["C1T"], p["T"])
        lam, C = rates.theorem_rate(inputs, p["convention"])
        rows.append(("T", p["T"], lam, p["T"], C))
        summary.update(lambda_T=lam, C=C)
    elif mode in ("ald", "ald-optimal"):
        if mode == "ald-optimal":
            opt = rates.ald_optimal_params(p["P_q"], p["d"], p["M"], p["L"])
            base = opt.config(p["P_q"], p["d"], p["M"], p["L"])
            summary.update(lambda_closed_form=opt.lambda_closed, eps_sq=opt.eps_sq, gamma=opt.gamma)
        else:
            base = rates.ALDConfig(p["P_q"], p["d"], p["eps"], p["gamma"], p["M"], p["L"])
        consts = rates.ald_constants(base)
        bound = rates.ald_rate_bound(base)
        lam_thm, C_thm = rates.theorem_rate(consts.rate_inputs(base.gamma), p["convention"])
        rows.append(("ald_bound", base.eps, bound, consts.T, float(np.exp(consts.T * bound))))
        rows.append(("ald_theorem", base.eps, lam_thm, consts.T, C_thm))
        summary.update(
            lambda_bound=bound, lambda_theorem=lam_thm, T=consts.T, c0=consts.c0, c1=consts.c1,
            C0T_sq=consts.C0T_sq, C1T_sq=consts.C1T_sq, P_x=consts.P_x,
        )
    else:
        base = rates.ALDConfig(p["P_q"], p["d"], p["eps"], p["gamma"], p["M"], p["L"])
        values = np.geomspace(p["sweep_min"], p["sweep_max"], p["sweep_n"])
        if p["sweep_param"] == "d":
            values = np.unique(np.rint(values).astype(int).clip(1))
        rows = rates.ald_sweep(base, p["sweep_param"], values)
        if p["sweep_param"] == "d":
            rows = [(a, int(b), c, d_, e) for a, b, c, d_, e in rows]
    out = _out(cfg)
    io.write_rates_csv(out / "rates.csv", rows)
    io.write_json(out / "rates.json", summary)
    for r in rows[:5]:
        print(",".join(str(x) for x in r))
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    p = cfg.params
    kind = _kind(p)
    times = np.linspace(0.0, p["t_max"], p["n_times"])
    spec = SchemeSpec(p["scheme"] or DEFAULT_SCHEME[kind.name], p["h"])
    ens = run_ensemble(kind, spec, _target(p), p["n_traj"], times, cfg.seed, threads=cfg.threads)
    out = _out(cfg)
    bin_path, _ = ens.save(out / p["name"])
    if p["csv"]:
        ens.to_csv(out / f"{p['name']}.csv")
    var = ens.states[:, -1].var(axis=0)
    print(f"wrote {bin_path} shape={ens.states.shape} final variances={np.round(var, 4).tolist()}")
    return 0


def cmd_estimate(cfg: RunConfig) -> int:
    p = cfg.params
    out = _out(cfg)
    if p["exact"]:
        kind = _kind(p)
        if not kind.linear:
            raise UnsupportedDynamics(f"exact laws need linear dynamics, not {kind.name}")
        sys_ = build_drift_system(kind, GaussianTarget(p["m"]))
        S = sys_.stationary_covariance()
        mean0 = np.zeros(sys_.n)
        mean0[0] = p["shift"]
        law0 = analysis.GaussianLaw(mean0, S)
        curve = analysis.decay_curve(sys_, law0, times=np.linspace(0.0, p["t_max"], p["n_points"]))
        summary = {
            "source": "exact",
            "dynamics": kind.to_dict(),
            "gap": spectral.spectral_gap(sys_),
            **io.fit_summary(curve),
        }
    else:
        stem = out / p["ensemble"]
        if not stem.with_suffix(".json").exists():
            raise InvalidParameter(f"no ensemble at {stem}.json; run `simulate` first")
        ens = Ensemble.load(stem)
        span = ens.times[-1] - ens.times[0]
        dt = ens.times[1] - ens.times[0]
        max_lag = p["max_lag"] if p["max_lag"] is not None else 0.5 * span
        lags = np.arange(0, int(round(max_lag / dt)) + 1) * dt
        curve = analysis.empirical_autocov(ens, p["observable"], lags, n_blocks=p["n_blocks"])
        summary = {
            "source": "ensemble",
            "dynamics": ens.kind.to_dict(),
            "observable": p["observable"],
            "variance": float(curve.values[0]),
            "variance_se": float(curve.stderr[0]),
            **io.fit_summary(curve),
        }
    io.write_curve_csv(out / "decay_curve.csv", curve)
    io.write_json(out / "estimate.json", summary)
    print(f"fitted_rate={curve.fitted_rate:.6g} prefactor={curve.fitted_prefactor:.6g} window={curve.fit_window}")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    p = cfg.params
    if p["suite"] == "moments":
        rows = analysis.verify_moments(p["d"], p["n_samples"], cfg.seed)
    else:
        target = GaussianTarget(p["m"], p["d"])
        opt = spectral.optimal_gle_params(p["m"], numeric=False)
        kinds = [
            Overdamped(),
            KineticLangevin(2.0 * np.sqrt(p["m"])),
            GLE(opt.coupling, opt.gamma),
            AdaptiveLangevin(1.0, 1.0),
            RHMC(1.0),
            ZigZag(1.0),
        ]
        rows = []
        for i, kind in enumerate(kinds):
            rows += analysis.stationarity_check(
                kind, target, p["n_traj"], p["T"], seed=cfg.seed + i, h=p["h"], threads=cfg.threads
            )
    passed = all(r["passed"] for r in rows)
    out = _out(cfg)
    io.write_json(out / "verify.json", {"suite": p["suite"], "passed": passed, "checks": rows})
    for r in rows:
        print(("PASS " if r["passed"] else "FAIL ") + ", ".join(f"{k}={v}" for k, v in r.items() if k != "passed"))
    return 0 if passed else 1


COMMANDS = {
    "spectral": cmd_spectral,
    "rates": cmd_rates,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_global(parser):
    g = parser.add_argument_group("global")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (default 1)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default .)")
    g.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file; flags override its values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypolift", description=__doc__.splitlines()[0])
    _add_global(parser)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMA.items():
        sp = sub.add_parser(name, help=COMMANDS[name].__name__.replace("cmd_", "") + " command")
        _add_global(sp)
        for key, spec in schema.items():
            flag = "--" + key.replace("_", "-")
            default = spec[1]
            help_ = f"{HELP.get(key, key)} (default {default})"
            if spec[0] is bool:
                sp.add_argument(flag, dest=key, action="store_true", default=argparse.SUPPRESS, help=help_)
            else:
                kw = {"choices": spec[2]} if len(spec) > 2 else {}
                sp.add_argument(flag, dest=key, type=spec[0], default=argparse.SUPPRESS, help=help_, **kw)
    return parser


def resolve_config(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    data = {}
    config = ns.pop("config", None)
    if config is not None:
        try:
            data = json.loads(Path(config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParameter(f"cannot read config {config!r}: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidParameter("config must be a JSON object")
    data.update(ns)
    return RunConfig.from_dict(data, command)


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        return COMMANDS[cfg.command](cfg)
    except (InvalidParameter, UnsupportedDynamics, WindowOutOfRange, InsufficientData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (HypoliftError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
