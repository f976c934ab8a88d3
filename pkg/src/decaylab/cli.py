"""``decaylab`` command line: evolve, bounds, figure and verify.

Exit codes: 0 success, 1 usage error, 2 physics-constraint violation,
3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__, bounds, meson, scalar, verify
from .dynamics import Basis
from .presets import ParticlePreset, get_preset
from .units import parse_rate

EXIT_OK, EXIT_USAGE, EXIT_PHYSICS, EXIT_VERIFY = 0, 1, 2, 3
SIG_DIGITS = 12

MESON_STATES = ("K0", "K0bar", "KS", "KL", "K1", "K2", "vacuum")
SCALAR_STATES = ("pi0", "vacuum")

PHYSICS_ERRORS = (
    bounds.PhysicsConstraintError,
    meson.NotCompletelyPositiveError,
    meson.LindbladFamilyError,
    meson.SuperselectionError,
)


class UsageError(Exception):
    pass


def fmt(x) -> str:
    return f"{float(x):.{SIG_DIGITS}g}"


@dataclass
class RunConfig:
    """Everything a command needs; built from a config file plus CLI overrides."""

    preset: str = "K0"
    initial: str | None = None
    t_start: float | None = None
    t_stop: float | None = None
    points: int | None = None
    log: bool | None = None
    lam: float | None = None
    lambda_scale: float | None = None
    gamma_s: float | None = None
    gamma_l: float | None = None
    delta_m: float | None = None
    delta_l: float | None = None
    tau_s: float | None = None
    tau_l: float | None = None
    mu: float | None = None
    z: float | None = None
    which: str | None = None
    out: str | None = None

    def validate_grid(self) -> None:
        if self.t_start is not None and self.t_start < 0:
            raise UsageError("t-start must be >= 0")
        if self.t_start is not None and self.t_stop is not None and not self.t_stop > self.t_start:
            raise UsageError("t-stop must be greater than t-start")
        if self.points is not None and self.points < 2:
            raise UsageError("points must be >= 2")
        if self.log and self.t_start is not None and self.t_start <= 0:
            raise UsageError("a log grid needs t-start > 0")


# key -> parser; rates accept an optional "MeV" suffix
_RATE_KEYS = {"lam", "gamma_s", "gamma_l", "delta_m", "mu"}
_FLOAT_KEYS = {"t_start", "t_stop", "lambda_scale", "delta_l", "tau_s", "tau_l", "z"}
_ALIASES = {"lambda": "lam"}


def _parse_bool(text: str) -> bool:
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on", "log"):
        return True
    if s in ("0", "false", "no", "off", "lin", "linear"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _coerce(key: str, value):
    if value is None or not isinstance(value, str):
        return value
    try:
        if key in _RATE_KEYS:
            return parse_rate(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key == "points":
            return int(value)
        if key == "log":
            return _parse_bool(value)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {value!r}") from exc
    return value.strip()


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_config(file_values: dict, cli_values: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    merged = {}
    for source in (file_values, cli_values):
        for key, value in source.items():
            key = _ALIASES.get(key, key)
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
            if value is not None:
                merged[key] = _coerce(key, value)
    cfg = RunConfig(**merged)
    cfg.validate_grid()
    return cfg


def resolve_preset(cfg: RunConfig) -> ParticlePreset:
    try:
        pr = get_preset(cfg.preset)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    changes = {}
    try:
        if pr.is_meson:
            for key, attr in (("gamma_s", "gamma_S"), ("gamma_l", "gamma_L"),
                              ("delta_m", "delta_m"), ("delta_l", "delta_L")):
                if getattr(cfg, key) is not None:
                    changes[attr] = getattr(cfg, key)
            if cfg.tau_s is not None:
                changes["gamma_S"] = 1.0 / cfg.tau_s
            if cfg.tau_l is not None:
                changes["gamma_L"] = 1.0 / cfg.tau_l
        else:
            if cfg.gamma_s is not None:
                changes["gamma"] = cfg.gamma_s
            if cfg.tau_s is not None:
                changes["gamma"] = 1.0 / cfg.tau_s
            if cfg.mu is not None:
                changes["mu"] = cfg.mu
            if cfg.z is not None:
                changes["z"] = cfg.z
        if cfg.lam is not None:
            changes["lam"] = cfg.lam
        if changes:
            pr = pr.with_params(**changes)
        if cfg.lambda_scale is not None:
            if not pr.is_meson:
                raise UsageError("--lambda-scale needs a meson preset")
            pr = pr.with_params(lam=cfg.lambda_scale * bounds.lambda_max(pr.params).lambda_max)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PHYSICS_ERRORS):
            raise
        raise UsageError(str(exc)) from exc
    return pr


def time_grid(cfg: RunConfig, start: float, stop: float, points: int, log: bool) -> np.ndarray:
    start = cfg.t_start if cfg.t_start is not None else start
    stop = cfg.t_stop if cfg.t_stop is not None else stop
    points = cfg.points if cfg.points is not None else points
    log = cfg.log if cfg.log is not None else log
    if not stop > start or points < 2 or start < 0:
        raise UsageError("invalid time grid")
    if log:
        if start <= 0:
            raise UsageError("a log grid needs t-start > 0")
        return np.logspace(np.log10(start), np.log10(stop), points)
    return np.linspace(start, stop, points)


def _describe(pr: ParticlePreset) -> str:
    p = pr.params
    if pr.is_meson:
        return (f"gamma_S={fmt(p.gamma_S)} gamma_L={fmt(p.gamma_L)} delta_m={fmt(p.delta_m)} "
                f"delta_L={fmt(p.delta_L)} lambda={fmt(p.lam)}")
    return f"gamma={fmt(p.gamma)} mu={fmt(p.mu)} lambda={fmt(p.lam)} z={p.z}"


def write_csv(stream, command: str, pr: ParticlePreset, header: list[str], rows, extra=()) -> None:
    stream.write(f"# decaylab {__version__}\n")
    stream.write(f"# command: {command}\n")
    stream.write(f"# preset: {pr.name}\n")
    stream.write(f"# params: {_describe(pr)}\n")
    for line in extra:
        stream.write(f"# {line}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])


def _emit(cfg: RunConfig, writer) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            writer(fh)
    else:
        writer(sys.stdout)


def _rho_columns(dim: int) -> list[str]:
    return [f"{part}_rho{i}{j}" for i in range(dim) for j in range(dim) for part in ("re", "im")]


def _rho_values(rho: np.ndarray) -> list[float]:
    out = []
    for z in rho.reshape(-1):
        out.extend((z.real, z.imag))
    return out


def evolve_rows(pr: ParticlePreset, initial: str, ts) -> tuple[list[str], list[list[float]]]:
    """Rows for ``evolve``; meson density entries are in the strangeness basis."""
    if pr.is_meson:
        p = pr.params
        r0 = meson.prepare_tilde(initial, p.delta_L, pr.epsilon)
        header = ["t"] + _rho_columns(3) + ["p_K0", "p_K0bar", "p_vac", "closure", "strangeness"]
        rows = []
        for t in ts:
            rt = meson.evolve_tilde(r0, p, float(t))
            rho = meson.convert(rt.matrix, Basis.SL_TILDE, Basis.STRANGENESS, pr.epsilon)
            pk, pkb, pv = rho[0, 0].real, rho[1, 1].real, rho[2, 2].real
            rows.append([t] + _rho_values(rho) + [pk, pkb, pv, pk + pkb + pv, pk - pkb])
        return header, rows
    p = pr.params
    rho0 = scalar.pure_state(initial)
    header = ["t"] + _rho_columns(2) + ["p_pi0", "p_vac", "closure"]
    rows = []
    for t in ts:
        rho = scalar.evolve_scalar_general(rho0, p, float(t))
        rows.append([t] + _rho_values(rho) + [rho[0, 0].real, rho[1, 1].real, np.trace(rho).real])
    return header, rows


def cmd_evolve(cfg: RunConfig) -> int:
    pr = resolve_preset(cfg)
    allowed = MESON_STATES if pr.is_meson else SCALAR_STATES
    initial = cfg.initial or allowed[0]
    lookup = {s.lower(): s for s in allowed}
    if initial.lower() not in lookup:
        raise UsageError(f"initial state {initial!r} not available for {pr.name}; choose from {list(allowed)}")
    initial = lookup[initial.lower()]
    scale = pr.params.tau_S if pr.is_meson else 1.0 / pr.params.gamma
    ts = time_grid(cfg, 0.0, 10.0 * scale, 101, False)
    if not pr.is_meson and pr.params.lam > 0 and not scalar.z_admissible(pr.params):
        raise bounds.PhysicsConstraintError("z violates complete positivity for these parameters")
    if pr.is_meson and pr.params.delta_L > 0:
        lm = bounds.lambda_max(pr.params).lambda_max
        if pr.params.lam > lm:
            raise bounds.PhysicsConstraintError(
                f"lambda = {fmt(pr.params.lam)} exceeds lambda_max = {fmt(lm)}: evolution not completely positive")
    header, rows = evolve_rows(pr, initial, ts)
    _emit(cfg, lambda fh: write_csv(fh, "evolve", pr, header, rows, [f"initial: {initial}"]))
    return EXIT_OK


def _require_meson(pr: ParticlePreset, command: str) -> None:
    if not pr.is_meson:
        raise UsageError(f"{command} needs a meson preset (K0 or B0)")


def bounds_table(pr: ParticlePreset) -> tuple[str, bounds.BoundReport | None, bool]:
    """Human-readable report; returns ``(text, report, ok)``."""
    p = pr.params
    nb = bounds.necessary_delta_bound(p)
    lines = [f"preset                 {pr.name}",
             f"delta_L                {fmt(p.delta_L)}",
             f"necessary bound        {fmt(nb.bound)}  (delta_L <= sqrt(G_S G_L)/dm: {'ok' if nb.ok else 'VIOLATED'})"]
    if not nb.ok:
        lines.append("ok                     false")
        lines.append("no admissible lambda: the CP family fails at small t for any lambda")
        return "\n".join(lines) + "\n", None, False
    rep = bounds.lambda_max(p)
    lines += [f"t_plus [s]             {fmt(rep.t_plus)}",
              f"lambda_max [1/s]       {fmt(rep.lambda_max)}",
              f"lambda_max 1st order   {fmt(rep.lambda_max_first_order)}"]
    if pr.measured_lambda is not None:
        m = pr.measured_lambda
        inside = bounds.experimental_lambda_check(rep.lambda_max, m.value, m.err_lo, m.err_hi)
        lines.append(f"measured lambda        {fmt(m.value)} (-{fmt(m.err_lo)} +{fmt(m.err_hi)}): "
                     f"{'inside' if inside else 'outside'} [0, lambda_max]")
    if rep.lambda_max < 0:
        lines.append("ok                     false")
        lines.append("no admissible lambda >= 0: even lambda = 0 is not completely positive")
        return "\n".join(lines) + "\n", rep, False
    lines.append("ok                     true")
    return "\n".join(lines) + "\n", rep, True


def cmd_bounds(cfg: RunConfig) -> int:
    pr = resolve_preset(cfg)
    _require_meson(pr, "bounds")
    text, rep, ok = bounds_table(pr)
    sys.stdout.write(text)
    if not ok:
        return EXIT_PHYSICS
    if cfg.out:
        rows = [(t, lo, hi) for t, lo, hi in rep.grid]
        with open(cfg.out, "w", newline="") as fh:
            write_csv(fh, "bounds", pr, ["t", "lambda_lower", "lambda_upper"], rows,
                      [f"t_plus: {fmt(rep.t_plus)}", f"lambda_max: {fmt(rep.lambda_max)}"])
    return EXIT_OK


def figure_rows(pr: ParticlePreset, which: str, ts) -> tuple[list[str], list[list[float]], list[str]]:
    p = pr.params
    if which == "fig1":
        d = bounds.discriminant(p, ts)
        return ["t", "discriminant", "scaled_discriminant"], \
            [[t, a, p.delta_L ** 2 * a] for t, a in zip(ts, d)], []
    if which == "fig2":
        bounds._require_bounded(p)
        rep = bounds.lambda_max(p)
        rows = []
        for t in ts:
            b = bounds.lambda_bounds_at(p, float(t), rep.t_plus)
            rows.append([t, b.lower, b.upper, rep.lambda_max])
        return ["t", "lambda_lower", "lambda_upper", "lambda_max"], rows, \
            [f"t_plus: {fmt(rep.t_plus)}"]
    raise UsageError(f"unknown figure {which!r}; choose fig1 or fig2")


def cmd_figure(cfg: RunConfig) -> int:
    pr = resolve_preset(cfg)
    _require_meson(pr, "figure")
    which = (cfg.which or "fig1").lower()
    if which not in ("fig1", "fig2"):
        raise UsageError(f"unknown figure {which!r}; choose fig1 or fig2")
    tp = bounds.t_plus(pr.params)
    ts = time_grid(cfg, 1e-3 * tp, 1e3 * tp, 601, True)
    header, rows, extra = figure_rows(pr, which, ts)
    _emit(cfg, lambda fh: write_csv(fh, f"figure {which}", pr, header, rows, extra))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.preset and cfg.preset.lower() == "pi0":
        presets = []
    elif any(getattr(cfg, k) is not None for k in ("lam", "lambda_scale", "delta_l", "delta_m",
                                                   "gamma_s", "gamma_l", "tau_s", "tau_l")):
        presets = [resolve_preset(cfg)]
    else:
        presets = verify.default_meson_presets()
    threads = int(os.environ.get("DECAYLAB_THREADS", os.cpu_count() or 1))
    results = verify.run_all(presets, threads=threads)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "max_residual", "tolerance", "passed", "detail"])
    for r in results:
        w.writerow([r.name, f"{r.max_residual:.{SIG_DIGITS}g}", f"{r.tolerance:.3g}",
                    "pass" if r.passed else "FAIL", r.detail])
    text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).write_text(f"# decaylab {__version__}\n# command: verify\n" + text)
    sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(parser: argparse.ArgumentParser) -> None:
    add = parser.add_argument
    add("--preset", help="K0, B0 or pi0")
    add("--config", help="key=value file; command-line options override it")
    add("--initial", help="initial state: " + "|".join(MESON_STATES) + " (mesons) or pi0|vacuum")
    add("--t-start", help="first time [s]")
    add("--t-stop", help="last time [s]")
    add("--points", help="number of grid points (>= 2)")
    add("--log", action="store_const", const="true", help="log-spaced grid")
    add("--lin", dest="log", action="store_const", const="false", help="linearly spaced grid")
    add("--lambda", dest="lam", help="decoherence rate [1/s, or value followed by MeV]")
    add("--lambda-scale", help="set lambda to this multiple of lambda_max")
    add("--gamma-s", help="K_S width (or pi0 width) [1/s or MeV]")
    add("--gamma-l", help="K_L width [1/s or MeV]")
    add("--delta-m", help="mass difference [1/s or MeV]")
    add("--delta-l", help="K_S-K_L overlap")
    add("--tau-s", help="K_S (or pi0) lifetime [s]")
    add("--tau-l", help="K_L lifetime [s]")
    add("--mu", help="pi0 coherence phase rate [1/s or MeV]")
    add("--z", help="pi0 coherence-transfer amplitude")
    add("--out", help="output CSV path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="decaylab", description="Decay and decoherence of neutral mesons as CP semigroups.")
    parser.add_argument("--version", action="version", version=f"decaylab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, doc in (("evolve", "time evolution as CSV"),
                      ("bounds", "complete-positivity bounds on lambda"),
                      ("figure", "figure data as CSV"),
                      ("verify", "run the invariant suites")):
        sp = sub.add_parser(name, help=doc)
        if name == "figure":
            sp.add_argument("which", nargs="?", help="fig1 (discriminant) or fig2 (allowed lambda)")
        _common(sp)
    return parser


COMMANDS = {"evolve": cmd_evolve, "bounds": cmd_bounds, "figure": cmd_figure, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    values = vars(args).copy()
    command = values.pop("command")
    config_path = values.pop("config")
    try:
        file_values = read_config_file(config_path) if config_path else {}
        cfg = build_config(file_values, values)
        return COMMANDS[command](cfg)
    except UsageError as exc:
        print(f"decaylab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PHYSICS_ERRORS as exc:
        print(f"decaylab: physics constraint violated: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
