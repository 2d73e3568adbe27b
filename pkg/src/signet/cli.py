"""Command-line entry point: ``signet <command> [options]``.

Exit codes: 0 success, 2 resonant input refused, 3 parse or validation error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import acceptance
from .basis import gram_report, riesz_transform
from .errors import InputError, NumericalError, ResonanceError, SignetError
from .evolution import SpectralState, SubspaceX, evolve_heat, evolve_schrodinger, project, reconstruct
from .functions import from_callable
from .graph import Network, parse_network
from .oracle import fd_assemble, fd_eigenvalues
from .spectra import PSEUDO, STANDARD, Spectrum, spectrum_for_network
from .stationary import SourceTerm, residual_norm, solve_stationary
from .wellposed import RESONANCE_TOL, resonance_verdict

EXIT_OK = 0
EXIT_RESONANT = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4

SAMPLES_PER_EDGE = 256
COMMANDS = ("resonance", "spectrum", "solve", "evolve", "oracle", "verify")


@dataclass(frozen=True)
class RunConfig:
    command: str
    network_path: Path | None = None
    operator: str = STANDARD
    n_max: int = 10
    truncation: int | None = None
    t_list: tuple[float, ...] = (0.0,)
    output_dir: Path = Path(".")
    force: bool = False
    ratio: Fraction | None = None
    source_expr: str = "1"
    init_expr: str | None = None
    init_mode: int | None = None
    equation: str = "schrodinger"
    n_f: int | None = None
    h: float | None = None
    count: int = 10
    criteria: tuple[int, ...] = ()
    tolerances: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.n_max < 1:
            raise InputError("--n-max must be >= 1")

    def tol(self, name: str, default: float) -> float:
        return self.tolerances.get(name, default)


# ---------------------------------------------------------------- helpers


_EXPR_NAMES = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "abs", "pi", "where")
}


def edge_expression(text: str):
    """Compile an expression in ``x`` (local coordinate) and ``edge`` (edge id)."""
    try:
        code = compile(text, "<expr>", "eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse expression {text!r}: {exc.msg}") from None
    for name in code.co_names:
        if name not in _EXPR_NAMES and name not in ("x", "edge"):
            raise InputError(f"expression uses unknown name {name!r}")

    def fn(edge_id: int, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, float)
        value = eval(code, {"__builtins__": {}}, {**_EXPR_NAMES, "x": x, "edge": edge_id})
        return np.broadcast_to(np.asarray(value, float), x.shape).copy()

    return fn


def load_network(path: Path | None) -> Network:
    if path is None:
        raise InputError("this command needs -f NETWORK")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_network(text)


def _fmt(value: float) -> str:
    return "%.17g" % value


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def _edge_samples(network: Network):
    for e in network.edges:
        yield e.id, np.linspace(0.0, e.length, SAMPLES_PER_EDGE)


def _spectrum(config: RunConfig, network: Network) -> Spectrum:
    return spectrum_for_network(network, config.operator, config.n_max, config.ratio, config.force)


def _say(message: str) -> None:
    print(message, file=sys.stdout)


# ---------------------------------------------------------------- commands


def cmd_resonance(config: RunConfig) -> int:
    network = load_network(config.network_path)
    verdict = resonance_verdict(network, config.tol("resonance", RESONANCE_TOL))
    _say(f"topology      {network.topology.value}")
    _say(f"criterion     {verdict.criterion}")
    if verdict.critical_value is not None:
        _say(f"critical      {_fmt(verdict.critical_value)}")
    _say(f"determinant   {_fmt(verdict.determinant)}")
    _say(f"margin        {_fmt(verdict.margin)}")
    _say(f"well_posed    {'yes' if verdict.well_posed else 'no'}")
    if verdict.detail:
        _say(f"note          {verdict.detail}")
    if not verdict.well_posed:
        if verdict.criterion == "forbidden-ratio":
            part = network.partition()
            reason = (
                f"|k-|/k+ equals the forbidden ratio {verdict.critical_value:.12g} "
                f"(D/(N-D) = {part.D}/{part.N - part.D} for equal lengths)"
            )
        else:
            reason = f"{verdict.criterion} vanishes (margin {verdict.margin:.3e})"
        print(f"signet: resonant network: {reason}", file=sys.stderr)
        return EXIT_RESONANT
    return EXIT_OK


def cmd_spectrum(config: RunConfig) -> int:
    network = load_network(config.network_path)
    sp = _spectrum(config, network)
    out = config.output_dir
    pairs = sp.all_pairs()
    write_csv(
        out / "spectrum.csv",
        ("index", "family", "lambda", "multiplicity"),
        ((i, p.family, float(p.lam), p.multiplicity) for i, p in enumerate(pairs, start=1)),
    )
    grids = dict(_edge_samples(network))

    def rows():
        for i, p in enumerate(pairs, start=1):
            for j, fn in enumerate(p.functions, start=1):
                for eid in fn.edge_ids:
                    x = grids[eid]
                    for xv, v in zip(x, fn(eid, x)):
                        yield i, j, eid, float(xv), float(v)

    write_csv(out / "eigenfunctions.csv", ("pair_index", "basis_index", "edge_id", "x", "value"), rows())
    _say(f"{len(pairs)} eigenpairs ({len(sp.basis_functions())} functions) written to {out}")
    return EXIT_OK


def cmd_solve(config: RunConfig) -> int:
    network = load_network(config.network_path)
    fn = edge_expression(config.source_expr)
    source = SourceTerm({e.id: (lambda x, eid=e.id: fn(eid, x)) for e in network.edges})
    psi = solve_stationary(network, source, force=config.force)
    grids = dict(_edge_samples(network))
    write_csv(
        config.output_dir / "solution.csv",
        ("edge_id", "x", "psi"),
        ((eid, float(xv), float(v)) for eid, x in grids.items() for xv, v in zip(x, psi(eid, x))),
    )
    _say(f"weak residual {residual_norm(network, psi, source):.3e}")
    return EXIT_OK


def cmd_evolve(config: RunConfig) -> int:
    network = load_network(config.network_path)
    sp = _spectrum(config, network)
    available = len(sp.basis_functions())
    truncation = min(config.truncation or sp.complete_count(), available)
    if config.init_mode is not None:
        if not 1 <= config.init_mode <= truncation:
            raise InputError(f"--init-mode must lie in [1, {truncation}]")
        coeffs = np.zeros(truncation)
        coeffs[config.init_mode - 1] = 1.0
        state = SpectralState(sp, coeffs, truncation)
    else:
        f = from_callable(network, edge_expression(config.init_expr or "0"))
        state = project(f, sp, truncation)
    x = SubspaceX(config.n_f) if config.n_f is not None else None
    if config.operator == PSEUDO and config.equation == "schrodinger":
        print("signet: pseudo Schrodinger group is not unitary in plain L2", file=sys.stderr)
    grids = dict(_edge_samples(network))
    rows = []
    for t in config.t_list:
        if config.equation == "schrodinger":
            evolved = evolve_schrodinger(state, t, allow_non_unitary=True)
        else:
            evolved = evolve_heat(state, t, x)
        u = reconstruct(evolved, SAMPLES_PER_EDGE)
        for eid, xs in grids.items():
            values = np.asarray(u(eid, xs), complex)
            for xv, v in zip(xs, values):
                rows.append((float(t), eid, float(xv), float(v.real), float(v.imag)))
    write_csv(config.output_dir / "trajectory.csv", ("t", "edge_id", "x", "re_value", "im_value"), rows)
    _say(f"{len(config.t_list)} time(s), truncation {truncation}, written to {config.output_dir}")
    return EXIT_OK


def _default_h(network: Network) -> float:
    return min(e.length for e in network.edges) / 500.0


def _compare_with_oracle(config: RunConfig, network: Network, sp: Spectrum):
    count = min(config.count, sp.complete_count())
    closed = np.sort(sp.eigenvalues()[: sp.complete_count()])
    closed = closed[np.argsort(np.abs(closed), kind="stable")][:count]
    closed = np.sort(closed)
    h = config.h or _default_h(network)
    fd = fd_eigenvalues(fd_assemble(network, h, config.operator), count)
    n = min(len(closed), len(fd))
    scale = np.maximum(np.abs(closed[:n]), 1e-12)
    rel = np.abs(fd[:n] - closed[:n]) / scale
    return closed[:n], fd[:n], rel, h


def cmd_oracle(config: RunConfig) -> int:
    network = load_network(config.network_path)
    h = config.h or _default_h(network)
    try:
        sp = _spectrum(config, network)
    except (InputError, ResonanceError) as exc:
        print(f"signet: no closed form for comparison ({exc})", file=sys.stderr)
        sp = None
    if sp is None:
        fd = fd_eigenvalues(fd_assemble(network, h, config.operator), config.count)
        rows = [(i, float(v), "", "") for i, v in enumerate(fd, start=1)]
    else:
        closed, fd, rel, h = _compare_with_oracle(config, network, sp)
        rows = [(i, float(f), float(c), float(r)) for i, (f, c, r) in enumerate(zip(fd, closed, rel), start=1)]
    write_csv(config.output_dir / "oracle.csv", ("index", "fd_lambda", "closed_lambda", "rel_error"), rows)
    _say(f"{len(rows)} oracle eigenvalues at h = {h:g} written to {config.output_dir}")
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    if config.network_path is None:
        results = acceptance.run_all(set(config.criteria) or None)
        for r in results:
            _say(r.line())
        return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL
    network = load_network(config.network_path)
    sp = _spectrum(config, network)
    size = min(config.truncation or 30, len(sp.basis_functions()))
    ok = True
    if sp.operator == STANDARD:
        report = gram_report(sp, size=size)
        gram_ok = max(report.max_offdiag, report.max_diag_dev) < config.tol("gram", 1e-9)
        _say("gram (plain)")
    else:
        report = gram_report(sp, size=size)
        _say("gram (plain)")
        _say(report.render().rstrip())
        report = gram_report(riesz_transform(sp), size=size)
        gram_ok = math.isfinite(report.condition_estimate)
        _say("gram (transformed)")
    _say(report.render().rstrip())
    ok &= gram_ok
    closed, fd, rel, h = _compare_with_oracle(config, network, sp)
    oracle_ok = closed.size > 0 and bool(np.all(rel <= config.tol("rtol", 1e-3)))
    _say(f"oracle h={h:g}: {closed.size} eigenvalues, max rel error {np.max(rel) if rel.size else math.nan:.3e}")
    ok &= oracle_ok
    _say(f"gram {'PASS' if gram_ok else 'FAIL'}, oracle {'PASS' if oracle_ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_NUMERICAL


HANDLERS = {
    "resonance": cmd_resonance,
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "evolve": cmd_evolve,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
}


def run(config: RunConfig) -> int:
    try:
        return HANDLERS[config.command](config)
    except ResonanceError as exc:
        print(f"signet: resonant input refused: {exc}", file=sys.stderr)
        return EXIT_RESONANT
    except (InputError, ValueError) as exc:
        print(f"signet: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, SignetError, np.linalg.LinAlgError) as exc:
        print(f"signet: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


# ---------------------------------------------------------------- argument parsing


def _ratio(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code; argparse's own 2 means "resonant" here."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="signet", description="Sign-changing conductivity problems on star and tadpole networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, network_required=True):
        p.add_argument("-f", "--file", dest="network", type=Path, required=network_required, help="network description")
        p.add_argument("-o", "--output-dir", type=Path, default=Path("."))
        p.add_argument("--resonance-tol", type=float, help="margin below which a network counts as resonant")

    def spectral(p):
        p.add_argument("--operator", choices=(STANDARD, PSEUDO), default=STANDARD)
        p.add_argument("--n-max", type=int, default=10, help="members per eigenvalue family")
        p.add_argument("--ratio", type=_ratio, help="declared rational L1/L2 for pseudo tadpoles")
        p.add_argument("--force", action="store_true", help="proceed on resonant input")

    p = sub.add_parser("resonance", help="classify well-posedness")
    common(p)
    p = sub.add_parser("spectrum", help="write spectrum.csv and eigenfunctions.csv")
    common(p)
    spectral(p)
    p = sub.add_parser("solve", help="solve the stationary problem")
    common(p)
    p.add_argument("--source-expr", default="1", help="source f(x, edge), numpy syntax")
    p.add_argument("--force", action="store_true")
    p = sub.add_parser("evolve", help="spectral Schrodinger or heat evolution")
    common(p)
    spectral(p)
    p.add_argument("--equation", choices=("schrodinger", "heat"), default="schrodinger")
    init = p.add_mutually_exclusive_group(required=True)
    init.add_argument("--init-expr", help="initial state f(x, edge)")
    init.add_argument("--init-mode", type=int, help="start from basis function number k (1-based)")
    p.add_argument("--truncation", type=int)
    p.add_argument("--t", dest="t_list", type=float, nargs="+", default=[0.0])
    p.add_argument("--n-f", type=int, help="admit the first n_f negative modes in the heat flow")
    p = sub.add_parser("oracle", help="finite-difference eigenvalues, compared with closed forms")
    common(p)
    spectral(p)
    p.add_argument("--h", type=float)
    p.add_argument("--count", type=int, default=10)
    p = sub.add_parser("verify", help="acceptance checks, or Gram plus oracle checks for one network")
    common(p, network_required=False)
    spectral(p)
    p.add_argument("--h", type=float)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--truncation", type=int)
    p.add_argument("--criteria", type=int, nargs="+", default=[])
    p.add_argument("--rtol", type=float, help="oracle relative tolerance")
    p.add_argument("--gram-tol", type=float, help="Gram identity tolerance")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    tolerances = {}
    for key, attr in (("resonance", "resonance_tol"), ("rtol", "rtol"), ("gram", "gram_tol")):
        value = getattr(args, attr, None)
        if value is not None:
            tolerances[key] = value
    return RunConfig(
        command=args.command,
        network_path=args.network,
        operator=getattr(args, "operator", STANDARD),
        n_max=getattr(args, "n_max", 10),
        truncation=getattr(args, "truncation", None),
        t_list=tuple(getattr(args, "t_list", (0.0,))),
        output_dir=args.output_dir,
        force=getattr(args, "force", False),
        ratio=getattr(args, "ratio", None),
        source_expr=getattr(args, "source_expr", "1"),
        init_expr=getattr(args, "init_expr", None),
        init_mode=getattr(args, "init_mode", None),
        equation=getattr(args, "equation", "schrodinger"),
        n_f=getattr(args, "n_f", None),
        h=getattr(args, "h", None),
        count=getattr(args, "count", 10),
        criteria=tuple(getattr(args, "criteria", ())),
        tolerances=tolerances,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except InputError as exc:
        print(f"signet: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
