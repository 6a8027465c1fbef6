"""Command-line interface: ``stiefel-inj <command> [options]``.

Exit codes: 0 success, 2 argument or dimension error, 3 verification
failure, 4 I/O error.  The number of sweep worker processes is read from
``STIEFELINJ_WORKERS`` (default: number of CPUs).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .certificate import (
    DEFAULT_MAX_ITERATIONS,
    SweepGrid,
    default_grid,
    profile_records,
    run_certificate,
    run_sweep,
)
from .config import TOL
from .conjugate import build_witness, inj_upper_bound, solve_t_root, verify_witness
from .errors import InvalidDims, NegativeEigenvalueAmbiguity
from .stiefel import BetaParam

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("bound", "troot", "witness", "certify", "sweep", "profile")
DEFAULT_DELTAS = (1.0, 0.1, 0.01, 0.001, 0.0001)
WORKERS_ENV = "STIEFELINJ_WORKERS"

# Stable column orders of the CSV outputs.
COLUMNS = {
    "bound": ("beta", "t_root", "conj_bound", "loop_bound", "inj_upper", "regime", "n", "p", "exact", "inj_over_pi"),
    "troot": ("beta", "t_root", "length", "length_over_pi"),
    "witness": ("beta", "n", "p", "branch", "t_conj", "w", "length", "conj_bound", "residual"),
    "certify": ("beta", "rho", "found", "iterations", "witness_length", "seed"),
    "sweep": ("beta", "rho", "found", "iterations", "witness_length", "seed"),
    "profile": ("delta", "iterations", "found", "rho", "seed"),
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    p: int | None = None
    beta: float | None = None
    rho: float | None = None
    max_iters: int = DEFAULT_MAX_ITERATIONS
    seed: int = 0
    out_path: str | None = None
    format: str = "csv"
    emit_plot_script: bool = False
    strict_log: bool = False
    pi_branch: bool = False
    betas: list = field(default_factory=list)
    offsets: list = field(default_factory=list)
    deltas: list = field(default_factory=list)
    figure: str | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if (self.rho is not None) != (self.command == "certify"):
            raise UsageError("--rho is required for certify and only accepted there")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if self.max_iters < 1:
            raise UsageError("--max-iters must be positive")
        if self.beta is not None:
            BetaParam(self.beta)
        n, p = self.n, self.p
        if self.command == "troot":
            return
        if n is None or p is None:
            raise UsageError("--n and --p are required")
        if self.command == "bound":
            ok = n >= 2 and 1 <= p <= n
        elif self.command == "witness":
            ok = 2 <= p <= n - 2
        else:
            ok = n >= 2 and 1 <= p <= n - 1
        if not ok:
            raise InvalidDims(f"(n, p) = ({n}, {p}) not allowed for {self.command}")
        if self.emit_plot_script and not self.out_path:
            raise UsageError("--emit-plot-script needs --out")


def _expand(token):
    """``"0.1:0.05:1.5"`` (start:step:stop, inclusive) or a single float."""
    if ":" in token:
        start, step, stop = (float(x) for x in token.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("range step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(count)]
    return [float(token)]


def _flatten(lists):
    return [x for chunk in lists for x in chunk] if lists is not None else None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", dest="out_path", metavar="PATH", help="write to PATH instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="unsigned 64-bit seed")
    common.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERATIONS)
    common.add_argument("--strict-log", action="store_true",
                        help="fail on rotations with an eigenvalue at -1 instead of pairing them")

    dims = argparse.ArgumentParser(add_help=False)
    dims.add_argument("--n", type=int, required=True)
    dims.add_argument("--p", type=int, required=True)

    parser = argparse.ArgumentParser(prog="stiefel-inj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bound", parents=[common, dims], help="injectivity-radius upper bound")
    s.add_argument("--beta", type=float, required=True)

    s = sub.add_parser("troot", parents=[common], help="conjugate time t_root(beta)")
    s.add_argument("--beta", type=float, required=True)

    s = sub.add_parser("witness", parents=[common, dims], help="build and verify a conjugate point")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--pi-branch", action="store_true", help="use t = pi, w = 0")

    s = sub.add_parser("certify", parents=[common, dims], help="run the randomized certificate once")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--rho", type=float, required=True)

    s = sub.add_parser("sweep", parents=[common, dims], help="certificate over a (beta, offset) grid")
    s.add_argument("--betas", type=_expand, nargs="*", help="values or start:step:stop ranges")
    s.add_argument("--offsets", type=_expand, nargs="*", help="offsets added to the upper bound")
    s.add_argument("--emit-plot-script", action="store_true")
    s.add_argument("--figure", metavar="PNG", help="render the figure to this file")

    s = sub.add_parser("profile", parents=[common, dims], help="iterations against the margin delta")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--deltas", type=_expand, nargs="*")
    s.add_argument("--emit-plot-script", action="store_true")
    s.add_argument("--figure", metavar="PNG", help="render the figure to this file")
    return parser


def config_from_args(ns):
    cfg = RunConfig(command=ns.command)
    for name in ("n", "p", "beta", "rho", "max_iters", "seed", "out_path", "format",
                 "emit_plot_script", "strict_log", "pi_branch", "figure"):
        if getattr(ns, name, None) is not None:
            setattr(cfg, name, getattr(ns, name))
    if ns.command == "sweep":
        betas, offsets = _flatten(ns.betas), _flatten(ns.offsets)
        grid = default_grid()
        cfg.betas = list(grid.betas) if betas is None else betas
        cfg.offsets = list(grid.rho_offsets) if offsets is None else offsets
    if ns.command == "profile":
        deltas = _flatten(ns.deltas)
        cfg.deltas = list(DEFAULT_DELTAS) if deltas is None else deltas
    return cfg


# --------------------------------------------------------------------------
# Output


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isinf(value) or math.isnan(value) else f"{value:.17g}"
    return str(value)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render(cfg, rows):
    columns = COLUMNS[cfg.command]
    if cfg.format == "json":
        doc = {
            "command": cfg.command,
            "config": {k: _json_safe(v) for k, v in asdict(cfg).items()},
            "columns": list(columns),
            "records": [{k: _json_safe(row.get(k)) for k in row} for row in rows],
        }
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# Commands


def cmd_bound(cfg):
    row = inj_upper_bound(cfg.beta, cfg.n, cfg.p).as_dict()
    row["inj_over_pi"] = row["inj_upper"] / math.pi
    return [row], EXIT_OK


def cmd_troot(cfg):
    t = solve_t_root(cfg.beta)
    length = t * math.sqrt(2.0)
    return [{"beta": cfg.beta, "t_root": t, "length": length, "length_over_pi": length / math.pi}], EXIT_OK


def cmd_witness(cfg):
    mp = BetaParam(cfg.beta)
    wit = build_witness(mp, cfg.n, cfg.p, use_pi_branch=cfg.pi_branch)
    residual = verify_witness(wit)
    row = {
        "beta": mp.beta, "n": cfg.n, "p": cfg.p, "branch": wit.branch, "t_conj": wit.t_conj,
        "w": wit.w, "length": wit.length,
        "conj_bound": min(solve_t_root(mp.beta), math.pi) * math.sqrt(2.0), "residual": residual,
    }
    return [row], (EXIT_OK if residual <= TOL.witness_cli else EXIT_VERIFY)


def cmd_certify(cfg):
    rec = run_certificate(BetaParam(cfg.beta), cfg.n, cfg.p, cfg.rho, cfg.max_iters, cfg.seed,
                          strict_log=cfg.strict_log)
    return [rec.as_dict()], EXIT_OK


def _workers():
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def cmd_sweep(cfg):
    grid = SweepGrid(tuple(cfg.betas), tuple(cfg.offsets), cfg.max_iters, cfg.n, cfg.p, cfg.seed)
    records = run_sweep(grid, workers=_workers(), strict_log=cfg.strict_log)
    return [r.as_dict() for r in records], EXIT_OK


def cmd_profile(cfg):
    mp = BetaParam(cfg.beta)
    records = profile_records(mp, cfg.n, cfg.p, cfg.deltas, cfg.max_iters, cfg.seed,
                              strict_log=cfg.strict_log)
    rows = [
        {"delta": float(d), "rho": r.rho, "found": r.found, "iterations": r.iterations, "seed": r.seed}
        for d, r in zip(cfg.deltas, records)
    ]
    return rows, EXIT_OK


HANDLERS = {
    "bound": cmd_bound,
    "troot": cmd_troot,
    "witness": cmd_witness,
    "certify": cmd_certify,
    "sweep": cmd_sweep,
    "profile": cmd_profile,
}


def _emit_figures(cfg, rows):
    from . import plotting

    if cfg.figure:
        if cfg.command == "sweep":
            plotting.plot_sweep(rows, cfg.figure, cfg.n, cfg.p)
        else:
            plotting.plot_profile(rows, cfg.figure, cfg.beta, cfg.n, cfg.p)
    if cfg.emit_plot_script:
        out = Path(cfg.out_path)
        script = out.with_name(out.stem + "_plot.py")
        src = plotting.plot_script(cfg.command, out, out.with_suffix(".png"), cfg.n, cfg.p, cfg.betas)
        _write(script, src)


def run(cfg, stdout=None):
    """Validate ``cfg``, dispatch it and write the output; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        cfg.validate()
        rows, code = HANDLERS[cfg.command](cfg)
    except (UsageError, InvalidDims, ValueError) as exc:
        print(f"stiefel-inj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NegativeEigenvalueAmbiguity as exc:
        print(f"stiefel-inj: strict log: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    text = render(cfg, rows)
    try:
        if cfg.out_path:
            _write(cfg.out_path, text)
        else:
            stdout.write(text)
        if cfg.command in ("sweep", "profile"):
            _emit_figures(cfg, rows)
    except OSError as exc:
        print(f"stiefel-inj: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
