"""Command-line interface.

Subcommands:

* ``theory``      -- closed-form limit quantities as a JSON report
* ``simulate``    -- one replicated Monte Carlo run (CSV + JSON outputs)
* ``rate-study``  -- the same across an increasing grid of m values
* ``oracle``      -- simulation with the fixed-rho rescaling applied

Every run writes a ``config.json`` echo sufficient to reproduce it exactly.
A flat key=value config file (keys mirror the long flag names) can seed any
subcommand; explicit flags override it.  The output directory defaults to
``./equifdp_out``, overridable by the ``EQUIFDP_OUTDIR`` environment variable
and the ``--out`` flag, in increasing precedence.

Exit codes: 0 on completed computation, 2 on usage errors, 1 on runtime
failures.  Statistical tolerance violations are reported inside the JSON
only, unless ``--check`` is given, which turns them into exit code 3.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ._version import __version__
from .asymptotics import MixtureCdf, asymptotic_law
from .errors import EquifdpError
from .experiment import (
    ExperimentConfig,
    check_tolerances,
    config_to_dict,
    rate_study,
    run,
    write_replicates_csv,
    write_summary_json,
)
from .gaussian import phi_upper_inv, std_normal_density
from .model import FixedRho, ModelParams, PowerLaw, ThetaOverM
from .oracle import OracleParams
from .procedures import BH, FixedThreshold

ENV_OUTDIR = "EQUIFDP_OUTDIR"
DEFAULT_OUTDIR = "equifdp_out"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CHECK_FAILED = 3


def _add_model_flags(p: argparse.ArgumentParser, with_m: bool = True) -> None:
    if with_m:
        p.add_argument("--m", type=int, help="number of hypotheses")
    p.add_argument("--pi0", type=float, required=True, help="proportion of true nulls")
    p.add_argument("--mu", type=float, required=True, help="alternative mean shift")
    p.add_argument("--alpha", type=float, required=True, help="BH level")


def _add_regime_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--rho", type=float, help="equi-correlation held fixed in m")
    g.add_argument("--theta", type=float, help="regime rho_m = theta/m")
    g.add_argument("--gamma", type=float, help="regime rho_m = rho-coef * m**-gamma")
    p.add_argument("--rho-coef", type=float, default=1.0, help="coefficient for --gamma")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--replicates", type=int, default=1000, help="Monte Carlo replicates")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="worker threads (results are worker-count independent)")
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--check", action="store_true",
                   help="exit nonzero when statistical tolerances are violated")
    p.add_argument("--config", type=str, default=None,
                   help="flat key=value file mirroring flag names; flags override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equifdp",
        description="FDP of the BH procedure under Gaussian equi-correlation: "
        "theory evaluation and Monte Carlo verification",
    )
    parser.add_argument("--version", action="version", version=f"equifdp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_theory = sub.add_parser("theory", help="closed-form limit quantities as JSON")
    _add_model_flags(p_theory, with_m=False)
    g = p_theory.add_mutually_exclusive_group(required=True)
    g.add_argument("--theta", type=float, help="regime m*rho_m -> theta")
    g.add_argument("--case-ii", action="store_true",
                   help="regime m*rho_m -> inf with rho_m -> 0")
    p_theory.add_argument("--threshold", type=float, default=None,
                          help="evaluate a fixed threshold instead of BH")
    p_theory.add_argument("--out", type=str, default=None, help="output directory")
    p_theory.add_argument("--config", type=str, default=None,
                          help="flat key=value file mirroring flag names")

    p_sim = sub.add_parser("simulate", help="replicated Monte Carlo run")
    _add_model_flags(p_sim)
    _add_regime_flags(p_sim)
    p_sim.add_argument("--threshold", type=float, default=None,
                       help="use a fixed threshold instead of BH")
    _add_run_flags(p_sim)

    p_rate = sub.add_parser("rate-study", help="simulate across a grid of m values")
    p_rate.add_argument("--m-grid", type=str, required=True,
                        help="comma-separated increasing m values (>= 3)")
    _add_model_flags(p_rate, with_m=False)
    _add_regime_flags(p_rate)
    p_rate.add_argument("--threshold", type=float, default=None,
                        help="use a fixed threshold instead of BH")
    _add_run_flags(p_rate)

    p_oracle = sub.add_parser("oracle", help="simulate with the fixed-rho rescaling")
    _add_model_flags(p_oracle)
    p_oracle.add_argument("--rho", type=float, required=True,
                          help="known fixed equi-correlation in (0, 1)")
    _add_run_flags(p_oracle)

    return parser


# --- config file ---------------------------------------------------------------

_TRUE_WORDS = {"true", "1", "yes", "on"}
_FALSE_WORDS = {"false", "0", "no", "off"}
_BOOLEAN_KEYS = {"check", "case-ii"}  # the store_true flags


def _config_tokens(path: str) -> list[str]:
    """Turn a flat key=value file into CLI tokens; keys mirror flag names."""
    tokens: list[str] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise EquifdpError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _BOOLEAN_KEYS:
            low = value.lower()
            if low in _TRUE_WORDS:
                tokens.append(f"--{key}")
            elif low not in _FALSE_WORDS:
                raise EquifdpError(f"{path}:{lineno}: {key} must be true or false")
        else:
            tokens.extend([f"--{key}", value])
    return tokens


def _inject_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv  # let argparse report the missing value
    tokens = _config_tokens(argv[idx + 1])
    # insert right after the subcommand so explicit flags still win
    return argv[:1] + tokens + argv[1:]


# --- helpers ---------------------------------------------------------------------


def _outdir(args) -> Path:
    out = args.out or os.environ.get(ENV_OUTDIR) or DEFAULT_OUTDIR
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, obj) -> None:
    with path.open("w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _echo_config(outdir: Path, args, extra: dict) -> None:
    echo = {"version": __version__, "command": args.command}
    echo.update(extra)
    _write_json(outdir / "config.json", echo)


def _procedure_from(args) -> BH | FixedThreshold:
    threshold = getattr(args, "threshold", None)
    if threshold is not None:
        return FixedThreshold(threshold)
    return BH(args.alpha)


def _regime_from(args, parser: argparse.ArgumentParser, m: int):
    """Map regime flags to (rho at this m, declared sequence or None)."""
    if args.theta is not None:
        seq = ThetaOverM(args.theta)
        return seq.rho_at(m), seq
    if args.gamma is not None:
        seq = PowerLaw(args.rho_coef, args.gamma)
        return seq.rho_at(m), seq
    if args.rho is not None:
        if args.rho == 0.0:
            seq = ThetaOverM(0.0)
            return 0.0, seq
        if 0.0 < args.rho < 1.0:
            return args.rho, FixedRho(args.rho)
        # fixed negative or boundary rho: valid model, no declared regime
        return args.rho, None
    parser.error("one of --rho, --theta, --gamma is required")


def _finish_run(args, summary, outdir: Path) -> int:
    write_replicates_csv(summary, outdir / "replicates.csv")
    write_summary_json(summary, outdir / "summary.json")
    violations = check_tolerances(summary)
    ratio = summary.variance_ratio
    print(
        f"wrote {outdir}/summary.json: mean_fdp={summary.mean_fdp:.6f}"
        + (f" variance_ratio={ratio:.4f}" if ratio is not None else " (no theory)")
        + (f" violations={violations}" if violations else "")
    )
    if args.check and violations:
        return EXIT_CHECK_FAILED
    return EXIT_OK


# --- subcommands -----------------------------------------------------------------


def _cmd_theory(args, parser) -> int:
    cdf = MixtureCdf(args.pi0, args.mu)
    procedure = _procedure_from(args)
    # case-ii variance does not depend on the power-law constants; any
    # representative sequence selects the regime
    rho_seq = PowerLaw(1.0, 0.5) if args.case_ii else ThetaOverM(args.theta)
    law = asymptotic_law(cdf, procedure, rho_seq)
    report = {
        "version": __version__,
        "params": {"pi0": args.pi0, "mu": args.mu, "alpha": args.alpha},
        "procedure": {"kind": "fixed", "t": args.threshold}
        if args.threshold is not None
        else {"kind": "bh", "alpha": args.alpha},
        "theory": law.to_dict(),
    }
    if args.threshold is None:
        # closed-form BH constants, printed next to the generic-pipeline values
        t_star = law.t_star
        sigma2_cf = args.pi0 * args.alpha**2 * (1.0 - t_star) / t_star
        z = phi_upper_inv(t_star)
        c_cf = (args.pi0 * args.alpha / t_star) * std_normal_density(z)
        variance_cf = c_cf**2 if args.case_ii else sigma2_cf + args.theta * c_cf**2
        report["bh_closed_form"] = {
            "t_star": t_star,
            "center": args.pi0 * args.alpha,
            "sigma2": sigma2_cf,
            "c_squared": c_cf**2,
            "variance": variance_cf,
        }
    print(json.dumps(report, indent=2))
    if args.out is not None:
        outdir = _outdir(args)
        _write_json(outdir / "theory.json", report)
        _echo_config(outdir, args, report["params"] | {"procedure": report["procedure"]})
    return EXIT_OK


def _cmd_simulate(args, parser) -> int:
    rho, rho_seq = _regime_from(args, parser, args.m)
    params = ModelParams(m=args.m, pi0=args.pi0, mu=args.mu, rho=rho)
    config = ExperimentConfig(
        params=params,
        procedure=_procedure_from(args),
        rho_seq=rho_seq,
        replicates=args.replicates,
        seed=args.seed,
    )
    outdir = _outdir(args)
    _echo_config(outdir, args, config_to_dict(config) | {"workers": args.workers})
    summary = run(config, workers=args.workers)
    return _finish_run(args, summary, outdir)


def _cmd_rate_study(args, parser) -> int:
    try:
        grid = tuple(int(tok) for tok in args.m_grid.split(",") if tok.strip())
    except ValueError:
        parser.error(f"--m-grid must be comma-separated integers, got {args.m_grid!r}")
    if len(grid) < 3:
        parser.error("--m-grid needs at least 3 points")
    m0 = grid[0]
    rho, rho_seq = _regime_from(args, parser, m0)
    params = ModelParams(m=m0, pi0=args.pi0, mu=args.mu, rho=rho)
    config = ExperimentConfig(
        params=params,
        procedure=_procedure_from(args),
        rho_seq=rho_seq,
        replicates=args.replicates,
        seed=args.seed,
        m_grid=grid,
    )
    outdir = _outdir(args)
    _echo_config(outdir, args, config_to_dict(config) | {"workers": args.workers})
    result = rate_study(config, workers=args.workers)
    result.write_csv(outdir / "rate_study.csv")
    _write_json(
        outdir / "summary.json",
        {
            "version": __version__,
            "config": config_to_dict(config),
            "rows": result.table(),
            "tolerance_violations": {
                str(s.m): check_tolerances(s) for s in result.rows
            },
        },
    )
    print(f"wrote {outdir}/rate_study.csv with {len(grid)} rows")
    if args.check and any(check_tolerances(s) for s in result.rows):
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _cmd_oracle(args, parser) -> int:
    if not (0.0 < args.rho < 1.0):
        parser.error(f"--rho must lie strictly inside (0, 1), got {args.rho}")
    base = ModelParams(m=args.m, pi0=args.pi0, mu=args.mu, rho=args.rho)
    config = ExperimentConfig(
        params=OracleParams(base),
        procedure=BH(args.alpha),
        replicates=args.replicates,
        seed=args.seed,
    )
    outdir = _outdir(args)
    _echo_config(outdir, args, config_to_dict(config) | {"workers": args.workers})
    summary = run(config, workers=args.workers)
    return _finish_run(args, summary, outdir)


_COMMANDS = {
    "theory": _cmd_theory,
    "simulate": _cmd_simulate,
    "rate-study": _cmd_rate_study,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _inject_config(argv)
    except (OSError, EquifdpError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, parser)
    except EquifdpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
