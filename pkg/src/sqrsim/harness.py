"""Gate presets, amplitude sweeps, file export and the command-line interface.

Presets carry the standard parameter sets of the three demonstration gates.
For bare/SC1 contexts the detuning defaults to 10x the pulse amplitude; the
Raman-synthesized SC2 context uses its own regime (omega0 = 500, detuning
100x). Both are plain defaults and overridable everywhere.

Exports are flat CSV (full-precision, one header row) or JSON with run
metadata. The CLI exposes four subcommands: simulate, sweep, pulses and
feasibility; `key = value` config files can seed any flag.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .cd import CdOptions, sqr_cd_couplings
from .evolve import EvolutionTrace, Scheme, population_summary, run
from .sqr import GateSpec, PulseConfig, QubitState, make_gate, pulse_value
from .sc2 import feasibility_residual, solve_controls

TOOL_VERSION = "0.1.0"

GATE_ANGLES = {
    "identity": (math.pi / 8, math.pi, 0.0),
    "pauli-x": (math.pi / 4, math.pi, math.pi),
    "hadamard": (math.pi / 8, math.pi, math.pi),
}

GATE_OMEGA0 = {"identity": 250.0, "pauli-x": 750.0, "hadamard": 350.0}

SC2_OMEGA0 = 500.0
BARE_DELTA_RATIO = 10.0
SC2_DELTA_RATIO = 100.0


class UnknownPresetError(ValueError):
    def __init__(self, name: str):
        self.valid = sorted(GATE_ANGLES)
        super().__init__(f"unknown gate {name!r}; valid names: {', '.join(self.valid)}")


@dataclass(frozen=True)
class Preset:
    """A named gate with its standard pulse configuration."""

    name: str
    gate: GateSpec
    cfg: PulseConfig


def preset(
    name: str,
    scheme: Scheme = Scheme.BARE,
    omega0: Optional[float] = None,
    delta_ratio: Optional[float] = None,
    delta_cap: Optional[float] = None,
    **cfg_overrides,
) -> Preset:
    """Standard parameters of one demonstration gate.

    identity: chi = pi/8, eta = pi, delta = 0, omega0 = 250
    pauli-x:  chi = pi/4, eta = pi, delta = pi, omega0 = 750
    hadamard: chi = pi/8, eta = pi, delta = pi, omega0 = 350

    Shared timing: T = 20, t0 = 1.6, sigma = 2, window [-2T, 0]. For the
    SC2 scheme omega0 defaults to 500 and the detuning to 100*omega0;
    otherwise the detuning defaults to 10*omega0. All overridable.
    """
    if name not in GATE_ANGLES:
        raise UnknownPresetError(name)
    chi, eta, delta = GATE_ANGLES[name]
    gate = make_gate(chi, eta, delta, label=name)
    if omega0 is None:
        omega0 = SC2_OMEGA0 if scheme is Scheme.SC2 else GATE_OMEGA0[name]
    if delta_cap is None:
        if delta_ratio is None:
            delta_ratio = SC2_DELTA_RATIO if scheme is Scheme.SC2 else BARE_DELTA_RATIO
        delta_cap = delta_ratio * omega0
    cfg = PulseConfig(omega0=omega0, delta_cap=delta_cap, **cfg_overrides)
    return Preset(name=name, gate=gate, cfg=cfg)


@dataclass(frozen=True)
class SweepRow:
    gate: str
    omega0: float
    fidelity_bare: Optional[float]
    fidelity_shortcut: Optional[float]
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    """Bare vs shortcut fidelity per (gate, amplitude) grid point."""

    rows: tuple[SweepRow, ...]
    metadata: dict = field(default_factory=dict, compare=False)


def sweep(
    gates: Sequence[str],
    scheme: Scheme,
    omega0_grid: Sequence[float],
    delta_ratio: float = BARE_DELTA_RATIO,
    opts: CdOptions = CdOptions(),
    psi0: Optional[QubitState] = None,
    **cfg_overrides,
) -> SweepResult:
    """Amplitude sweep: one bare and one shortcut fidelity per grid point.

    The detuning is tied to the amplitude as delta_ratio * omega0 at every
    point. A failed integration marks the row instead of aborting the sweep.
    Rows are gate-major with strictly increasing omega0 inside each gate.
    """
    if scheme is Scheme.BARE:
        raise ValueError("sweep compares a shortcut scheme against bare; pick SC1 or SC2")
    grid = [float(x) for x in omega0_grid]
    if not grid or any(x <= 0 for x in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("omega0 grid must be nonempty, positive and strictly increasing")
    for name in gates:
        if name not in GATE_ANGLES:
            raise UnknownPresetError(name)

    rows = []
    for name in gates:
        chi, eta, delta = GATE_ANGLES[name]
        gate = make_gate(chi, eta, delta, label=name)
        for omega0 in grid:
            cfg = PulseConfig(omega0=omega0, delta_cap=delta_ratio * omega0, **cfg_overrides)
            try:
                f_bare = run(Scheme.BARE, gate, cfg, psi0=psi0, opts=opts).fidelity
                f_short = run(scheme, gate, cfg, psi0=psi0, opts=opts).fidelity
                rows.append(SweepRow(name, omega0, f_bare, f_short))
            except Exception as err:  # per-point failure stays in-row
                rows.append(SweepRow(name, omega0, None, None, error=str(err)))
    metadata = {
        "scheme": scheme.value,
        "delta_rule": f"{delta_ratio}*omega0",
        "gates": list(gates),
        "omega0_grid": grid,
        "timing": {
            "T": cfg_overrides.get("T", 20.0),
            "t0": cfg_overrides.get("t0", 1.6),
            "sigma": cfg_overrides.get("sigma", 2.0),
        },
        "tool_version": TOOL_VERSION,
    }
    return SweepResult(rows=tuple(rows), metadata=metadata)


@dataclass(frozen=True)
class ScheduleTable:
    """Sampled control schedule: named real-valued columns over a time grid."""

    times: np.ndarray
    columns: tuple[tuple[str, np.ndarray], ...]
    metadata: dict = field(default_factory=dict, compare=False)


def sample_schedule(
    scheme: Scheme,
    gate: GateSpec,
    cfg: PulseConfig,
    opts: CdOptions = CdOptions(),
    n_points: int = 2000,
) -> ScheduleTable:
    """Sample the drive schedule of one scheme on a uniform grid.

    Columns are magnitude/phase pairs per drive channel; SC1 adds the three
    real counterdiabatic couplings, SC2 adds the three ground detunings.
    """
    times = np.linspace(cfg.t_min, cfg.t_max, n_points)
    cols: list[tuple[str, np.ndarray]] = []
    pulses = [pulse_value(i, times, cfg, gate) for i in (1, 2, 3)]
    for i, vals in enumerate(pulses, start=1):
        cols.append((f"mag_O{i}", np.abs(vals)))
        cols.append((f"ph_O{i}", np.angle(vals)))
    if scheme is Scheme.SC1:
        w = np.array(
            [
                (lambda c: (c.omega1, c.omega2, c.omega3))(sqr_cd_couplings(t, cfg, gate, opts))
                for t in times
            ]
        )
        cols.append(("w1", w[:, 0]))
        cols.append(("w2", w[:, 1]))
        cols.append(("w3", w[:, 2]))
    elif scheme is Scheme.SC2:
        drives = np.empty((times.size, 5), dtype=np.complex128)
        detunings = np.empty((times.size, 3), dtype=np.float64)
        for k, t in enumerate(times):
            c = solve_controls(t, cfg, gate, opts)
            drives[k] = c.drives()
            detunings[k] = c.detunings()
        for i in range(5):
            cols.append((f"mag_Ot{i + 1}", np.abs(drives[:, i])))
            cols.append((f"ph_Ot{i + 1}", np.angle(drives[:, i])))
        for i in range(3):
            cols.append((f"d{i + 1}", detunings[:, i]))
    metadata = {
        "scheme": scheme.value,
        "gate": gate.label,
        "omega0": cfg.omega0,
        "delta_cap": cfg.delta_cap,
        "tool_version": TOOL_VERSION,
    }
    return ScheduleTable(times=times, columns=tuple(cols), metadata=metadata)


# ---------------------------------------------------------------------------
# export / import


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([("" if v is None else repr(v) if isinstance(v, float) else v) for v in row])


def _trace_table(trace: EvolutionTrace):
    dim = trace.populations.shape[1]
    header = ["t"] + [f"p{i + 1}" for i in range(dim)]
    for i in range(dim):
        header += [f"re_psi{i + 1}", f"im_psi{i + 1}"]
    rows = []
    for k in range(trace.times.size):
        row = [float(trace.times[k])] + [float(p) for p in trace.populations[k]]
        for i in range(dim):
            row += [float(trace.states[k, i].real), float(trace.states[k, i].imag)]
        rows.append(row)
    return header, rows


def export(obj, path, fmt: str = "csv") -> Path:
    """Write a trace, sweep or schedule to `path` as CSV or JSON."""
    path = Path(path)
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(obj, EvolutionTrace):
        header, rows = _trace_table(obj)
        if fmt == "csv":
            _write_csv(path, header, rows)
        else:
            payload = {
                "kind": "trace",
                "metadata": {**obj.meta, "tool_version": TOOL_VERSION},
                "fidelity": obj.fidelity,
                "norm_drift": obj.norm_drift,
                "columns": header,
                "rows": rows,
            }
            path.write_text(json.dumps(payload))
    elif isinstance(obj, SweepResult):
        header = ["omega0", "gate", "scheme", "fidelity_bare", "fidelity_shortcut"]
        scheme = obj.metadata.get("scheme", "")
        rows = [
            [r.omega0, r.gate, scheme, r.fidelity_bare, r.fidelity_shortcut] for r in obj.rows
        ]
        if fmt == "csv":
            _write_csv(path, header, rows)
        else:
            payload = {
                "kind": "sweep",
                "metadata": obj.metadata,
                "rows": [
                    {
                        "gate": r.gate,
                        "omega0": r.omega0,
                        "fidelity_bare": r.fidelity_bare,
                        "fidelity_shortcut": r.fidelity_shortcut,
                        "error": r.error,
                    }
                    for r in obj.rows
                ],
            }
            path.write_text(json.dumps(payload))
    elif isinstance(obj, ScheduleTable):
        header = ["t"] + [name for name, _ in obj.columns]
        arrays = [obj.times] + [vals for _, vals in obj.columns]
        rows = [[float(a[k]) for a in arrays] for k in range(obj.times.size)]
        if fmt == "csv":
            _write_csv(path, header, rows)
        else:
            payload = {
                "kind": "schedule",
                "metadata": {**obj.metadata, "tool_version": TOOL_VERSION},
                "columns": header,
                "rows": rows,
            }
            path.write_text(json.dumps(payload))
    else:
        raise TypeError(f"cannot export object of type {type(obj).__name__}")
    return path


def load_sweep(path) -> SweepResult:
    """Re-import a sweep exported as JSON."""
    payload = json.loads(Path(path).read_text())
    if payload.get("kind") != "sweep":
        raise ValueError(f"{path} does not contain a sweep")
    rows = tuple(
        SweepRow(
            gate=r["gate"],
            omega0=float(r["omega0"]),
            fidelity_bare=r["fidelity_bare"],
            fidelity_shortcut=r["fidelity_shortcut"],
            error=r.get("error"),
        )
        for r in payload["rows"]
    )
    return SweepResult(rows=rows, metadata=payload["metadata"])


# ---------------------------------------------------------------------------
# CLI


def _read_config(path: str) -> dict:
    """Parse a `key = value` config file; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _coerce(raw: str):
    low = raw.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    return raw


def _apply_config(args: argparse.Namespace, config: dict, argv: Sequence[str]) -> None:
    """Fill args from config values unless the flag appeared on the command line."""
    given = {a.split("=", 1)[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, raw in config.items():
        if key in given or not hasattr(args, key):
            continue
        setattr(args, key, _coerce(raw))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqrsim",
        description="STIRAP-based qubit rotations with counterdiabatic shortcuts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file; flags override it")
        p.add_argument("--omega0", type=float, default=None, help="pulse amplitude")
        p.add_argument("--delta-cap", type=float, default=None, help="excited-state detuning")
        p.add_argument(
            "--delta-ratio", type=float, default=None, help="detuning as a multiple of omega0"
        )
        p.add_argument("--out", default=None, help="output file path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--rtol", type=float, default=1e-9)
        p.add_argument("--atol", type=float, default=1e-12)

    p_sim = sub.add_parser("simulate", help="run one evolution and print the fidelity")
    common(p_sim)
    p_sim.add_argument("--gate", required=True)
    p_sim.add_argument("--scheme", choices=("bare", "sc1", "sc2"), default="bare")
    p_sim.add_argument("--alpha", default=None, help="initial |1> amplitude, as re or re,im")
    p_sim.add_argument("--beta", default=None, help="initial |2> amplitude, as re or re,im")
    p_sim.add_argument("--method", choices=("fast", "reference"), default="fast")

    p_sweep = sub.add_parser("sweep", help="bare vs shortcut fidelity over an amplitude grid")
    common(p_sweep)
    p_sweep.add_argument("--gates", required=True, help="comma-separated gate names")
    p_sweep.add_argument("--scheme", choices=("sc1", "sc2"), default="sc1")
    p_sweep.add_argument("--omega0-min", type=float, required=True)
    p_sweep.add_argument("--omega0-max", type=float, required=True)
    p_sweep.add_argument("--points", type=int, required=True)

    p_pulses = sub.add_parser("pulses", help="export the drive schedule of one scheme")
    common(p_pulses)
    p_pulses.add_argument("--gate", required=True)
    p_pulses.add_argument("--scheme", choices=("bare", "sc1", "sc2"), default="bare")
    p_pulses.add_argument("--points", type=int, default=2000)

    p_feas = sub.add_parser(
        "feasibility", help="phase-constraint violation of a 4-level synthesis over time"
    )
    common(p_feas)
    p_feas.add_argument("--gate", required=True)
    p_feas.add_argument("--points", type=int, default=500)

    return parser


def _parse_amplitude(text: str) -> complex:
    parts = [float(x) for x in text.split(",")]
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise ValueError(f"bad amplitude {text!r}")


def _preset_from_args(args, scheme: Scheme) -> Preset:
    return preset(
        args.gate,
        scheme=scheme,
        omega0=args.omega0,
        delta_ratio=args.delta_ratio,
        delta_cap=args.delta_cap,
        rtol=args.rtol,
        atol=args.atol,
    )


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.config:
            _apply_config(args, _read_config(args.config), argv)

        if args.command == "simulate":
            scheme = Scheme(args.scheme)
            pre = _preset_from_args(args, scheme)
            psi0 = QubitState.ground()
            if args.alpha is not None or args.beta is not None:
                alpha = _parse_amplitude(args.alpha) if args.alpha else 0j
                beta = _parse_amplitude(args.beta) if args.beta else 0j
                norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
                if norm == 0:
                    raise ValueError("initial state must be nonzero")
                psi0 = QubitState(alpha / norm, beta / norm)
            trace = run(scheme, pre.gate, pre.cfg, psi0=psi0, method=args.method)
            print(f"fidelity = {trace.fidelity!r}")
            print(f"norm_drift = {trace.norm_drift:.3e}")
            for level, pmax, pfinal in population_summary(trace):
                print(f"level {level}: max_pop = {pmax:.6f} final_pop = {pfinal:.6f}")
            if args.out:
                export(trace, args.out, args.format)
                print(f"wrote {args.out}")

        elif args.command == "sweep":
            gates = [g.strip() for g in args.gates.split(",") if g.strip()]
            grid = np.linspace(args.omega0_min, args.omega0_max, args.points)
            delta_ratio = args.delta_ratio if args.delta_ratio is not None else BARE_DELTA_RATIO
            result = sweep(
                gates,
                Scheme(args.scheme),
                grid,
                delta_ratio=delta_ratio,
                rtol=args.rtol,
                atol=args.atol,
            )
            if args.out:
                export(result, args.out, args.format)
                print(f"wrote {args.out}")
            else:
                print("omega0,gate,scheme,fidelity_bare,fidelity_shortcut")
                for r in result.rows:
                    print(
                        f"{r.omega0!r},{r.gate},{args.scheme},"
                        f"{'' if r.fidelity_bare is None else repr(r.fidelity_bare)},"
                        f"{'' if r.fidelity_shortcut is None else repr(r.fidelity_shortcut)}"
                    )

        elif args.command == "pulses":
            scheme = Scheme(args.scheme)
            pre = _preset_from_args(args, scheme)
            table = sample_schedule(scheme, pre.gate, pre.cfg, n_points=args.points)
            out = args.out or f"{args.gate}-{args.scheme}-schedule.{args.format}"
            export(table, out, args.format)
            print(f"wrote {out}")

        elif args.command == "feasibility":
            pre = _preset_from_args(args, Scheme.SC2)
            times = np.linspace(pre.cfg.t_min, pre.cfg.t_max, args.points)
            residuals = np.array(
                [feasibility_residual(t, pre.cfg, pre.gate) for t in times]
            )
            print(f"max_residual_rad = {float(residuals.max())!r}")
            if args.out:
                table = ScheduleTable(
                    times=times,
                    columns=(("residual_rad", residuals),),
                    metadata={"gate": args.gate, "tool_version": TOOL_VERSION},
                )
                export(table, args.out, args.format)
                print(f"wrote {args.out}")

        return 0
    except UnknownPresetError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli())
