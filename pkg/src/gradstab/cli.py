"""Command-line front end.

Subcommands ``mlf eval``, ``classify``, ``simulate`` and ``table1``. Runs are
described by an INI file (``--config``); without one, the closed-loop example on
(0, 1) with ``y0 = x^2 (x - 1)`` is used. Real values in the config accept
simple expressions in ``pi`` such as ``pi^2`` or ``-3*pi**2``.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import csv
import io
import json
import math
import operator
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import mlf
from .errors import GradStabError
from .fdesolver import (
    default_time_grid,
    evolve_homogeneous,
    sample_field,
    sample_gradient_field,
    state_norm,
)
from .spectral import (
    Family,
    FeedbackLaw,
    Polynomial,
    SampledGrid,
    SpectralSystem,
    VerdictKind,
    build_sine_1d,
    build_sine_2d,
    classify_stability,
    closed_loop,
    decompose,
    load_custom_table,
    partition_spectrum,
    project_initial_state,
)
from .stabilizer import (
    REFERENCE_TABLE1,
    TABLE1_Q,
    ExperimentSpec,
    run_algorithm,
    run_decomposition_feedback,
    table1_experiment,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_SATISFIED = 2

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


class ConfigError(GradStabError, ValueError):
    pass


def parse_real(text: str) -> float:
    """Evaluate a number or an arithmetic expression in ``pi``."""
    src = str(text).strip().replace("^", "**")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse real value {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"unsupported expression {text!r}")

    return float(ev(tree))


def parse_reals(text: str) -> tuple[float, ...]:
    items = [s for s in str(text).replace(";", ",").split(",") if s.strip()]
    return tuple(parse_real(s) for s in items)


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def _fmt_list(xs) -> str:
    return ", ".join(repr(float(x)) for x in xs)


@dataclass(frozen=True)
class RunConfig:
    family: str = "sine1d"
    shift: float = math.pi**2
    truncation: int = 64
    table: str = ""
    q: tuple[float, ...] = (0.9,)
    y0_polynomial: tuple[float, ...] = (0.0, 0.0, -1.0, 1.0)
    y0_samples: str = ""
    feedback_mode: str = "uniform"
    gains: tuple[float, ...] = (-math.pi,)
    L_scale: float = math.pi
    beta: float = 3 * math.pi**2
    t_max: float = 20.0
    step: float = 0.1
    geometric_early: bool = True
    epsilon: float = 5e-3
    snapshots: tuple[float, ...] = (0.0, 0.9, 2.0, 6.0, 15.0, 20.0)
    points: int = 101
    table1_q: tuple[float, ...] = TABLE1_Q
    table1_horizon: float = 20.0

    def validate(self) -> "RunConfig":
        if self.family not in {f.value for f in Family}:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.truncation < 1:
            raise ConfigError("truncation must be at least 1")
        for q in (*self.q, *self.table1_q):
            if not 0 < q <= 1:
                raise ConfigError(f"q values must lie in (0, 1], got {q}")
        if not self.q or not self.table1_q:
            raise ConfigError("q lists must be nonempty")
        if self.feedback_mode not in {"none", "uniform", "per_mode", "unstable_only"}:
            raise ConfigError(f"unknown feedback mode {self.feedback_mode!r}")
        if self.family == Family.CUSTOM_TABLE.value and not Path(self.table).is_file():
            raise ConfigError(f"custom spectral table {self.table!r} not found")
        if self.y0_samples and not Path(self.y0_samples).is_file():
            raise ConfigError(f"initial-state sample file {self.y0_samples!r} not found")
        if not self.epsilon > 0 or not self.t_max > 0 or not self.step > 0:
            raise ConfigError("epsilon, t_max and step must be positive")
        if self.points < 2:
            raise ConfigError("points must be at least 2")
        return self

    # -- INI round trip -------------------------------------------------------

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        cp.read_string(text)
        d = cls()
        kw = {}

        def get(section, key, conv):
            if cp.has_option(section, key):
                try:
                    return conv(cp.get(section, key))
                except (ValueError, ConfigError) as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from exc
            return None

        def boolean(s):
            s = s.strip().lower()
            if s in {"1", "true", "yes", "on"}:
                return True
            if s in {"0", "false", "no", "off"}:
                return False
            raise ConfigError(f"not a boolean: {s!r}")

        spec = {
            ("system", "family"): ("family", str.strip),
            ("system", "shift"): ("shift", parse_real),
            ("system", "truncation"): ("truncation", int),
            ("system", "table"): ("table", str.strip),
            ("run", "q"): ("q", parse_reals),
            ("run", "epsilon"): ("epsilon", parse_real),
            ("initial_state", "polynomial"): ("y0_polynomial", parse_reals),
            ("initial_state", "samples"): ("y0_samples", str.strip),
            ("feedback", "mode"): ("feedback_mode", str.strip),
            ("feedback", "gains"): ("gains", parse_reals),
            ("feedback", "L_scale"): ("L_scale", parse_real),
            ("feedback", "beta"): ("beta", parse_real),
            ("grid", "t_max"): ("t_max", parse_real),
            ("grid", "step"): ("step", parse_real),
            ("grid", "geometric_early"): ("geometric_early", boolean),
            ("output", "snapshots"): ("snapshots", parse_reals),
            ("output", "points"): ("points", int),
            ("table1", "q"): ("table1_q", parse_reals),
            ("table1", "horizon"): ("table1_horizon", parse_real),
        }
        known = {(s, k.lower()) for s, k in spec}
        for section in cp.sections():
            for key in cp.options(section):
                if (section, key) not in known:
                    raise ConfigError(f"unknown config key [{section}] {key}")
        for (section, key), (name, conv) in spec.items():
            val = get(section, key.lower(), conv)
            if val is not None:
                kw[name] = val
        return replace(d, **kw).validate()

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["system"] = {"family": self.family, "shift": repr(self.shift), "truncation": str(self.truncation)}
        if self.table:
            cp["system"]["table"] = self.table
        cp["run"] = {"q": _fmt_list(self.q), "epsilon": repr(self.epsilon)}
        cp["initial_state"] = {"polynomial": _fmt_list(self.y0_polynomial)}
        if self.y0_samples:
            cp["initial_state"]["samples"] = self.y0_samples
        cp["feedback"] = {
            "mode": self.feedback_mode,
            "gains": _fmt_list(self.gains),
            "L_scale": repr(self.L_scale),
            "beta": repr(self.beta),
        }
        cp["grid"] = {
            "t_max": repr(self.t_max),
            "step": repr(self.step),
            "geometric_early": "true" if self.geometric_early else "false",
        }
        cp["output"] = {"snapshots": _fmt_list(self.snapshots), "points": str(self.points)}
        cp["table1"] = {"q": _fmt_list(self.table1_q), "horizon": repr(self.table1_horizon)}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    # -- library objects --------------------------------------------------------

    def build_system(self) -> SpectralSystem:
        if self.family == Family.SINE_1D.value:
            return build_sine_1d(self.shift, self.truncation)
        if self.family == Family.SINE_2D.value:
            return build_sine_2d(self.truncation)
        return load_custom_table(Path(self.table))

    def initial_state(self, family: str | None = None):
        """Initial-state descriptor; on the unit square the polynomial acts as ``p(x1) p(x2)``."""
        if self.y0_samples:
            if (family or self.family) != Family.SINE_1D.value:
                raise ConfigError("sampled initial states are supported for sine1d only")
            text = Path(self.y0_samples).read_text()
            data = np.loadtxt(io.StringIO(text), comments="#", delimiter="," if "," in text else None, ndmin=2)
            if data.shape[1] != 2:
                raise ConfigError("initial-state samples need two columns: x, y")
            return SampledGrid(data[:, 0], data[:, 1])
        p = Polynomial(self.y0_polynomial)
        if (family or self.family) == Family.SINE_2D.value:
            return lambda x1, x2: p(x1) * p(x2)
        return p

    def feedback(self, system: SpectralSystem) -> FeedbackLaw:
        N = system.N
        if self.feedback_mode == "none":
            return FeedbackLaw.zero(N)
        if self.feedback_mode == "uniform":
            if len(self.gains) != 1:
                raise ConfigError("uniform feedback takes a single gain")
            return FeedbackLaw.uniform(N, self.gains[0], self.L_scale)
        if self.feedback_mode == "per_mode":
            if len(self.gains) > N:
                raise ConfigError("more gains than modes")
            g = np.zeros(N)
            g[: len(self.gains)] = self.L_scale * np.asarray(self.gains)
            return FeedbackLaw(g)
        return FeedbackLaw.unstable_only(N, self.gains, self.L_scale)

    def time_grid(self) -> np.ndarray:
        return default_time_grid(self.t_max, self.step, geometric_early=self.geometric_early)


def load_config(path: str | None, truncation: int | None = None) -> RunConfig:
    if path is None:
        cfg = RunConfig().validate()
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {path!r} not found")
        cfg = RunConfig.from_ini(p.read_text())
    if truncation is not None:
        cfg = replace(cfg, truncation=int(truncation)).validate()
    return cfg


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _pi2_multiple(x: float) -> str:
    r = x / math.pi**2
    if abs(r - round(r)) < 1e-9:
        k = int(round(r))
        return "pi^2" if k == 1 else f"{k}*pi^2"
    return ""


# -- commands -------------------------------------------------------------------


def cmd_mlf(args) -> int:
    try:
        v = mlf.ml2(args.q, args.alpha, args.z)
    except GradStabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(_fmt(v))
    return EXIT_OK


def cmd_classify(args, cfg: RunConfig) -> int:
    system = cfg.build_system()
    cl = closed_loop(system, cfg.feedback(system))
    verdict = classify_stability(cl)
    part = partition_spectrum(cl)
    if args.json:
        out = {
            "kind": verdict.kind.value,
            "xi": verdict.xi,
            "C": verdict.C,
            "b": verdict.b,
            "witness": verdict.witness,
            "omega1": list(part.omega1),
            "omega2_count": len(part.omega2),
            "omega2_sup": part.omega2[0] if part.omega2 else None,
            "gradient_null": list(part.gradient_null),
        }
        print(json.dumps(out))
    else:
        print(f"omega1: {len(part.omega1)} value(s) {[_fmt(v) for v in part.omega1[:5]]}")
        sup = _fmt(part.omega2[0]) if part.omega2 else "-"
        print(f"omega2: {len(part.omega2)} value(s), sup = {sup}")
        print(f"gradient-null: {len(part.gradient_null)} value(s)")
        if verdict.kind is VerdictKind.MITTAG_LEFFLER_STABLE:
            tag = _pi2_multiple(verdict.xi)
            print(f"{verdict.kind.value} xi={_fmt(verdict.xi)}" + (f" ({tag})" if tag else "") + f" C={_fmt(verdict.C)}")
        elif verdict.kind is VerdictKind.CRITERIA_NOT_SATISFIED:
            print(f"{verdict.kind.value} witness={_fmt(verdict.witness)}")
        else:
            print(verdict.kind.value)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "verdict.txt").write_text(f"{verdict.kind.value}\n", encoding="utf-8")
    return EXIT_NOT_SATISFIED if verdict.kind is VerdictKind.CRITERIA_NOT_SATISFIED else EXIT_OK


def _field_points(system: SpectralSystem, n: int):
    x = np.linspace(0.0, 1.0, n)
    if system.family is Family.SINE_2D:
        X, Y = np.meshgrid(x, x, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])
    return x


def cmd_simulate(args, cfg: RunConfig) -> int:
    out = Path(args.out or ".")
    system = cfg.build_system()
    if system.family is Family.CUSTOM_TABLE:
        raise ConfigError("simulate needs an analytic family to sample fields")
    fb = cfg.feedback(system)
    y0 = cfg.initial_state(system.family.value)
    times = cfg.time_grid()
    qs = args.q if args.q else cfg.q
    for q in qs:
        target = out if len(qs) == 1 else out / f"q{q:g}"
        target.mkdir(parents=True, exist_ok=True)
        if cfg.feedback_mode == "unstable_only":
            dec = decompose(system, cfg.beta)
            report = run_decomposition_feedback(dec, cfg.gains, cfg.L_scale, y0, q, times, epsilon=cfg.epsilon)
        else:
            report = run_algorithm(system, fb, y0, q, cfg.epsilon, times)
        _write_csv(
            target / "norms.csv",
            ["t", "state_norm", "gradient_norm"],
            zip(report.trajectory.times, report.state_norms, report.gradient_norms),
        )
        c0 = project_initial_state(system, y0)
        snaps = sorted(set(cfg.snapshots))
        snap_traj = evolve_homogeneous(report.system, c0, q, snaps)
        pts = _field_points(system, cfg.points)
        for t, a in zip(snap_traj.times, snap_traj.coeffs):
            y = sample_field(report.system, a, pts)
            gy = sample_gradient_field(report.system, a, pts)
            if system.family is Family.SINE_2D:
                rows = zip(pts[:, 0], pts[:, 1], y, gy[:, 0], gy[:, 1])
                header = ["x1", "x2", "y", "grad_x1", "grad_x2"]
            else:
                rows = zip(pts, y, gy)
                header = ["x", "y", "grad_y"]
            _write_csv(target / f"field_t{t:g}.csv", header, rows)
        lines = [
            f"q = {_fmt(q)}",
            f"epsilon = {_fmt(report.epsilon)}",
            f"terminated = {str(report.terminated).lower()}",
            f"t_hit = {_fmt(report.t_hit) if report.t_hit is not None else 'none'}",
            f"final_gradient_norm = {_fmt(report.final_gradient_norm)}",
            f"initial_state_norm = {_fmt(state_norm(system, c0))}",
            f"initial_gradient_norm = {_fmt(report.gradient_norms[0])}",
            f"verdict = {report.verdict.kind.value}",
        ]
        (target / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"q={q:g}: terminated={report.terminated} t_hit={report.t_hit} -> {target}")
    return EXIT_OK


def cmd_table1(args, cfg: RunConfig) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    system = cfg.build_system()
    qs = tuple(args.q) if args.q else cfg.table1_q
    spec = ExperimentSpec(
        q_list=qs,
        horizon=cfg.table1_horizon,
        epsilon=cfg.epsilon,
        initial_state=cfg.initial_state(system.family.value),
        system=system,
        feedback=cfg.feedback(system),
    )
    rows = table1_experiment(spec)
    table = []
    for q, err in rows:
        ref = REFERENCE_TABLE1.get(round(q, 10), None)
        table.append((q, err, _fmt(ref) if ref is not None else ""))
        print(f"q={q:<5g} gradient_error={_fmt(err)}  reference={_fmt(ref) if ref is not None else '-'}")
    _write_csv(out / "table1.csv", ["q", "gradient_error", "paper_value_if_known"], table)
    errs = [e for _, e in rows]
    mono = all(a > b for a, b in zip(errs, errs[1:]))
    print(f"monotonicity check (strictly decreasing in q): {'PASS' if mono else 'FAIL'}")
    return EXIT_OK


def _q_list(text: str) -> tuple[float, ...]:
    try:
        return parse_reals(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="INI run configuration")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--truncation", type=int, default=argparse.SUPPRESS, help="number of modes N")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="reserved; runs are deterministic")
    common.add_argument("--dump-config", action="store_true", default=argparse.SUPPRESS,
                        help="print the effective configuration and exit")

    parser = argparse.ArgumentParser(prog="gradstab", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command")

    p_mlf = sub.add_parser("mlf", help="Mittag-Leffler function")
    mlf_sub = p_mlf.add_subparsers(dest="mlf_command", required=True)
    p_eval = mlf_sub.add_parser("eval", help="evaluate E_{q,alpha}(z)", parents=[common])
    p_eval.add_argument("--q", type=parse_real, required=True)
    p_eval.add_argument("--alpha", type=parse_real, default=1.0)
    p_eval.add_argument("--z", type=parse_real, required=True)

    p_cls = sub.add_parser("classify", help="spectral stability verdict", parents=[common])
    p_cls.add_argument("--json", action="store_true", help="machine-readable output")

    for name, hlp in (("simulate", "closed-loop trajectories and field snapshots"), ("table1", "gradient error at the horizon for several q")):
        p = sub.add_parser(name, help=hlp, parents=[common])
        p.add_argument("--q", type=_q_list, default=None, help="comma-separated fractional orders")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("config", None), ("out", None), ("truncation", None), ("seed", None), ("dump_config", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.command is None and not args.dump_config:
        parser.error("a command is required")
    if args.command == "mlf":
        return cmd_mlf(args)
    try:
        cfg = load_config(args.config, args.truncation)
        if args.dump_config:
            sys.stdout.write(cfg.to_ini())
            return EXIT_OK
        if args.command == "classify":
            return cmd_classify(args, cfg)
        if args.command == "simulate":
            return cmd_simulate(args, cfg)
        return cmd_table1(args, cfg)
    except (GradStabError, OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
