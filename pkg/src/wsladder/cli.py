"""``wsladder <predict|spectrum|evolve|sweep> --config run.json [--out DIR]``.

Exit codes: 0 success, 1 computation failure, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import svg
from .dynamics import PropagationError, StepSizeError, default_time_window, propagate
from .model import LatticeSpec, PulseKind, PulseSchedule, build_hamiltonian
from .observables import cell_variance, mean_cell, prediction_fidelity
from .spectrum import EigenSolverError, eigen_decompose, interval_bounds, predict_transport
from .sweep import boundary_gamma, run_sweep


class ConfigError(ValueError):
    pass


_TOP_KEYS = {"n_sites", "delta", "tau", "pulse", "gamma", "gamma_sweep", "integrator", "output"}
_PULSE_KEYS = {"kind", "T", "alpha", "beta"}
_SWEEP_KEYS = {"min", "max", "steps"}
_INTEGRATOR_KEYS = {"dt", "window"}
_OUTPUT_KEYS = {"dir", "emit_trajectory", "emit_svg"}


@dataclass
class RunConfig:
    n_sites: int
    delta: float = 1.0
    tau: float = 1.0
    pulse_kind: PulseKind = PulseKind.SIGMOID
    pulse_T: Optional[float] = None
    pulse_alpha: float = 0.0
    pulse_beta: float = 0.0
    gamma: Optional[float] = None
    gamma_sweep: Optional[tuple[float, float, int]] = None
    dt: Optional[float] = None
    window: Optional[tuple[float, float]] = None
    out_dir: str = "out"
    emit_trajectory: bool = True
    emit_svg: bool = False
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def spec(self) -> LatticeSpec:
        return LatticeSpec(self.n_sites, self.delta)

    def schedule(self, gamma: Optional[float] = None) -> PulseSchedule:
        g = self.gamma if gamma is None else gamma
        if self.pulse_kind is PulseKind.CONSTANT:
            return PulseSchedule.constant(self.pulse_alpha, self.pulse_beta)
        if g is None:
            raise ConfigError("this command needs a scalar 'gamma'")
        if self.pulse_kind is PulseKind.TRUNCATED:
            return PulseSchedule.truncated(g, self.tau, self.pulse_T)
        return PulseSchedule.sigmoid(g, self.tau)

    def gamma_grid(self) -> list[float]:
        if self.gamma_sweep is None:
            if self.gamma is None:
                raise ConfigError("need 'gamma' or 'gamma_sweep'")
            return [self.gamma]
        lo, hi, steps = self.gamma_sweep
        if steps == 1:
            return [lo]
        return [float(v) for v in np.linspace(lo, hi, steps)]


def _reject_unknown(section: dict, allowed: set, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = sorted(set(section) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _number(value, name: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{name} must be a finite number")
    if positive and value <= 0:
        raise ConfigError(f"{name} must be > 0")
    return float(value)


def parse_config(data: dict) -> RunConfig:
    """Validate a decoded JSON config; every problem raises :class:`ConfigError`."""
    _reject_unknown(data, _TOP_KEYS, "config")
    if "n_sites" not in data:
        raise ConfigError("missing 'n_sites'")
    n_sites = data["n_sites"]
    if isinstance(n_sites, bool) or not isinstance(n_sites, int):
        raise ConfigError("n_sites must be an integer")
    cfg = RunConfig(n_sites=n_sites, raw=data)
    cfg.delta = _number(data.get("delta", 1.0), "delta", positive=True)
    cfg.tau = _number(data.get("tau", 1.0), "tau", positive=True)

    pulse = data.get("pulse", {"kind": "sigmoid"})
    _reject_unknown(pulse, _PULSE_KEYS, "pulse")
    try:
        cfg.pulse_kind = PulseKind(pulse.get("kind", "sigmoid"))
    except ValueError:
        raise ConfigError(f"pulse.kind must be one of {[k.value for k in PulseKind]}") from None
    if cfg.pulse_kind is PulseKind.TRUNCATED:
        if "T" not in pulse:
            raise ConfigError("truncated pulse needs 'T'")
        cfg.pulse_T = _number(pulse["T"], "pulse.T", positive=True)
    elif "T" in pulse:
        raise ConfigError("pulse.T only applies to kind 'truncated'")
    if cfg.pulse_kind is PulseKind.CONSTANT:
        cfg.pulse_alpha = _number(pulse.get("alpha", 0.0), "pulse.alpha")
        cfg.pulse_beta = _number(pulse.get("beta", 0.0), "pulse.beta")
        if cfg.pulse_alpha < 0 or cfg.pulse_beta < 0:
            raise ConfigError("constant hoppings must be >= 0")
    elif "alpha" in pulse or "beta" in pulse:
        raise ConfigError("pulse.alpha/beta only apply to kind 'constant'")

    if "gamma" in data and "gamma_sweep" in data:
        raise ConfigError("give either 'gamma' or 'gamma_sweep', not both")
    if "gamma" in data:
        cfg.gamma = _number(data["gamma"], "gamma", positive=True)
    if "gamma_sweep" in data:
        gs = data["gamma_sweep"]
        _reject_unknown(gs, _SWEEP_KEYS, "gamma_sweep")
        missing = _SWEEP_KEYS - set(gs)
        if missing:
            raise ConfigError(f"gamma_sweep missing {', '.join(sorted(missing))}")
        steps = gs["steps"]
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            raise ConfigError("gamma_sweep.steps must be a positive integer")
        lo = _number(gs["min"], "gamma_sweep.min")
        hi = _number(gs["max"], "gamma_sweep.max")
        if lo < 0 or hi < lo or (steps > 1 and hi == lo):
            raise ConfigError("gamma_sweep needs 0 <= min < max")
        cfg.gamma_sweep = (lo, hi, steps)

    integ = data.get("integrator", {})
    _reject_unknown(integ, _INTEGRATOR_KEYS, "integrator")
    if integ.get("dt") is not None:
        cfg.dt = _number(integ["dt"], "integrator.dt", positive=True)
    if integ.get("window") is not None:
        w = integ["window"]
        if not isinstance(w, list) or len(w) != 2:
            raise ConfigError("integrator.window must be [t_start, t_end]")
        w0, w1 = _number(w[0], "window[0]"), _number(w[1], "window[1]")
        if w1 <= w0:
            raise ConfigError("integrator.window must have t_end > t_start")
        cfg.window = (w0, w1)

    out = data.get("output", {})
    _reject_unknown(out, _OUTPUT_KEYS, "output")
    cfg.out_dir = str(out.get("dir", cfg.out_dir))
    for key in ("emit_trajectory", "emit_svg"):
        if key in out:
            if not isinstance(out[key], bool):
                raise ConfigError(f"output.{key} must be true or false")
            setattr(cfg, key, out[key])

    try:
        cfg.spec
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_config(data)


def fmt(value) -> str:
    """12 significant digits, '.' separator; integers stay integers."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    v = float(value)
    if v == 0.0:
        return "0"
    return format(v, ".12g")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _interval_text(n: int) -> str:
    lo, hi = interval_bounds(n)
    return f"({lo:.6g}, {hi:.6g})"


def cmd_predict(cfg: RunConfig, out_dir: Path) -> str:
    spec = cfg.spec
    lines = []
    for gamma in cfg.gamma_grid():
        if gamma <= 0:
            raise ConfigError("predict needs gamma > 0")
        p = predict_transport(spec, gamma)
        ratio = gamma / spec.delta
        lines.append(f"gamma={fmt(gamma)} gamma/delta={fmt(ratio)}")
        lines.append(f"  n={p.quantum_number}, cell {p.target_cell}")
        lines.append(f"  theta={fmt(p.theta)} rad")
        a, b = 2 * p.quantum_number - 1, 2 * p.quantum_number
        lines.append(
            f"  target state: {fmt(math.cos(p.theta))}|{a}> + {fmt(math.sin(p.theta))}|{b}>"
        )
        lines.append(f"  interval: {_interval_text(p.quantum_number)} (quantum number capped at {spec.n_cells})")
        if p.on_boundary:
            lines.append("  warning: gamma/delta lies on an interval boundary; the lower interval is assigned")
    return "\n".join(lines)


def _spectrum_rows(cfg: RunConfig, late: bool):
    spec = cfg.spec
    for gamma in cfg.gamma_grid():
        H = build_hamiltonian(spec, gamma, 0.0) if late else build_hamiltonian(spec, 0.0, gamma)
        values = eigen_decompose(H).eigenvalues
        for rank, value in enumerate(values, start=1):
            yield gamma / spec.delta, rank, value / spec.delta


def cmd_spectrum(cfg: RunConfig, out_dir: Path) -> str:
    header = ["gamma_over_delta", "rank", "eigenvalue_over_delta"]
    written = []
    for name, late in (("spectrum_early", False), ("spectrum_late", True)):
        rows = list(_spectrum_rows(cfg, late))
        write_csv(out_dir / f"{name}.csv", header, rows)
        written.append(f"{name}.csv")
        if cfg.emit_svg:
            series = []
            for rank in range(1, cfg.n_sites + 1):
                pts = [(x, y) for x, r, y in rows if r == rank]
                series.append((f"rank {rank}", [p[0] for p in pts], [p[1] for p in pts]))
            when = "late" if late else "early"
            text = svg.line_chart(series, f"eigenvalues at {when} times, N={cfg.n_sites}", "gamma/delta", "E/delta", legend=False)
            (out_dir / f"{name}.svg").write_text(text, encoding="utf-8")
            written.append(f"{name}.svg")
    return "wrote " + ", ".join(written)


def _window(cfg: RunConfig, schedule: PulseSchedule) -> tuple[float, float]:
    if cfg.window is not None:
        return cfg.window
    if schedule.kind is PulseKind.CONSTANT:
        raise ConfigError("constant pulses need integrator.window")
    return default_time_window(schedule)


def cmd_evolve(cfg: RunConfig, out_dir: Path) -> str:
    if cfg.gamma_sweep is not None:
        raise ConfigError("evolve takes a scalar 'gamma', not 'gamma_sweep'")
    spec = cfg.spec
    schedule = cfg.schedule()
    t0, t1 = _window(cfg, schedule)
    result = propagate(spec, schedule, t0, t1, cfg.dt, record=True, max_samples=2000 if cfg.emit_trajectory else 2)
    header = ["t"] + [f"p_{j}" for j in range(1, spec.n_sites + 1)] + ["norm"]
    rows = ([t, *p, nm] for t, p, nm in zip(result.t_grid, result.trajectory, result.norms))
    write_csv(out_dir / "trajectory.csv", header, rows)
    if cfg.emit_svg:
        cells = result.trajectory.reshape(len(result.t_grid), -1, 2).sum(axis=2)
        series = [(f"cell {k}", result.t_grid, cells[:, k]) for k in range(spec.n_cells)]
        text = svg.line_chart(series, "cell occupation", "t", "probability")
        (out_dir / "trajectory.svg").write_text(text, encoding="utf-8")
    final = result.final_state
    summary = f"mean_cell={fmt(mean_cell(final))} variance={fmt(cell_variance(final))}"
    if schedule.kind is not PulseKind.CONSTANT and spec.delta > 0:
        summary += f" fidelity={fmt(prediction_fidelity(final, predict_transport(spec, schedule.gamma)))}"
    summary += f" norm_drift={fmt(result.norm_drift)}"
    return summary


SWEEP_HEADER = [
    "gamma",
    "gamma_over_delta",
    "mean_cell",
    "variance",
    "predicted_n",
    "predicted_cell",
    "fidelity",
    "norm_drift",
]


def write_sweep_outputs(cfg: RunConfig, out_dir: Path, result) -> None:
    """sweep.csv, plus sweep.svg with the predicted boundaries when requested."""
    spec = cfg.spec
    write_csv(out_dir / "sweep.csv", SWEEP_HEADER, ([getattr(r, k) for k in SWEEP_HEADER] for r in result.rows))
    if cfg.emit_svg:
        g = result.column("gamma")
        bounds = [boundary_gamma(k, spec.delta) for k in range(1, spec.n_cells)]
        text = svg.line_chart(
            [("mean cell", g, result.column("mean_cell"))],
            f"average final cell, N={spec.n_sites}, delta={fmt(spec.delta)}",
            "gamma",
            "mean cell",
            vlines=bounds,
            legend=False,
        )
        (out_dir / "sweep.svg").write_text(text, encoding="utf-8")


def sweep_from_config(cfg: RunConfig, workers: int = 1):
    if cfg.gamma_sweep is None:
        raise ConfigError("sweep needs 'gamma_sweep'")
    if cfg.pulse_kind is PulseKind.CONSTANT:
        raise ConfigError("sweep needs a sigmoid or truncated pulse")
    gammas = cfg.gamma_grid()
    if gammas[0] <= 0:
        raise ConfigError("sweep needs gamma_sweep.min > 0")
    return run_sweep(cfg.spec, cfg.schedule(gammas[0]), gammas, dt=cfg.dt, window=cfg.window, workers=workers)


def cmd_sweep(cfg: RunConfig, out_dir: Path, workers: int = 1) -> str:
    result = sweep_from_config(cfg, workers)
    write_sweep_outputs(cfg, out_dir, result)
    failed = [r for r in result.rows if r.error]
    if failed:
        raise PropagationError(f"{len(failed)} sweep point(s) failed, first: {failed[0].error}")
    return f"wrote sweep.csv ({len(result.rows)} rows)"


COMMANDS = {"predict": cmd_predict, "spectrum": cmd_spectrum, "evolve": cmd_evolve, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wsladder", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--workers", type=int, default=1, help="worker processes for sweep")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config)
        out_dir = Path(args.out if args.out else cfg.out_dir)
        if args.command != "predict":
            out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "sweep":
            text = cmd_sweep(cfg, out_dir, workers=max(1, args.workers))
        else:
            text = COMMANDS[args.command](cfg, out_dir)
    except (ConfigError, StepSizeError) as exc:
        print(f"wsladder: config error: {exc}", file=sys.stderr)
        return 2
    except (PropagationError, EigenSolverError, FloatingPointError) as exc:
        print(f"wsladder: computation failed: {exc}", file=sys.stderr)
        return 1
    print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
