"""Command-line front end: ``gnbergman {formula,verify,eval,metric,residual,membership,jet}``.

Exit codes: 0 success, 1 verification failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curves import CurveSpec, format_complex, parse_complex, parse_point
from .geometry import (
    bergman_metric_at,
    disc_grid,
    gn_membership,
    max_root_modulus,
    pullback_residual,
)
from .kernel import (
    MAX_N,
    KernelFormula,
    OutOfDomainError,
    SingularInputError,
    kernel_direct_eval,
    kernel_formula_eval,
    kernel_formula_eval_many,
    log_kernel_jet,
    rationalize_kernel,
)
from .sampling import sample_pairs
from .symfun import symmetrize_point

logger = logging.getLogger("gnbergman")

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class InvalidInput(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    n: int
    seed: int = 0
    samples: int = 1000
    radius: float = 0.8
    separation: float = 0.05
    tolerance: float = 1e-9
    formula_path: Path | None = None
    out_path: Path | None = None

    def validate(self) -> None:
        if not 1 <= self.n <= MAX_N:
            raise InvalidInput(f"n out of supported range 1..{MAX_N}")
        if not 0 < self.radius < 1:
            raise InvalidInput("radius must lie in (0, 1)")
        if self.samples < 1:
            raise InvalidInput("samples must be >= 1")
        if not self.tolerance > 0:
            raise InvalidInput("tolerance must be > 0")
        if self.seed < 0:
            raise InvalidInput("seed must be non-negative")
        if self.separation < 0:
            raise InvalidInput("separation must be non-negative")


def _fmt(x) -> str:
    return format_complex(x) if isinstance(x, complex) or np.iscomplexobj(x) else f"{x:.15g}"


def _load_formula(n: int, path: Path | None) -> KernelFormula:
    if path is not None:
        f = KernelFormula.from_json(Path(path).read_text())
        if f.n != n:
            raise InvalidInput(f"formula file is for n={f.n}, not n={n}")
        return f
    return rationalize_kernel(n)


def _point(text: str, n: int, name: str) -> np.ndarray:
    try:
        pt = parse_point(text)
    except ValueError as exc:
        raise InvalidInput(f"malformed {name}: {exc}") from None
    if pt.size != n:
        raise InvalidInput(f"{name} has {pt.size} coordinates, expected {n}")
    return pt


def _member(pt: np.ndarray, name: str) -> None:
    if not gn_membership(pt):
        raise InvalidInput(f"{name} is outside G_{pt.size}: largest root modulus {max_root_modulus(pt):.15g}")


def _curve(text: str, target: str, name: str) -> CurveSpec:
    try:
        return CurveSpec.parse(text, target)
    except ValueError as exc:
        raise InvalidInput(f"malformed curve {name}: {exc}") from None


# --- subcommands --------------------------------------------------------------

def cmd_formula(args) -> int:
    cfg = RunConfig("formula", args.n, out_path=args.out)
    if not 1 <= cfg.n <= MAX_N:
        raise InvalidInput(f"n out of supported range 1..{MAX_N}")
    f = rationalize_kernel(cfg.n)
    out = Path(args.out) if args.out else Path(f"kernel_n{cfg.n}.json")
    out.write_text(f.to_json())
    print(f"wrote {out}")
    for name, poly in (("H1", f.H1), ("H2", f.H2)):
        degs = ",".join(str(d) for d in poly.max_degrees())
        print(f"{name}: {len(poly)} terms, total degree {poly.total_degree()}, max degrees [{degs}]")
    print(f"pi_power: {f.pi_power}")
    return EXIT_OK


def verify_report(cfg: RunConfig, dps: int | None) -> tuple[list[str], float]:
    """Cross-validate direct and formula evaluation; returns report lines and max error."""
    f = _load_formula(cfg.n, cfg.formula_path)
    lams, mus = sample_pairs(cfg.seed, cfg.n, cfg.samples, cfg.radius, cfg.separation)
    direct = np.array([kernel_direct_eval(l, m) for l, m in zip(lams, mus)])
    xis = np.array([symmetrize_point(l) for l in lams])
    etas = np.array([symmetrize_point(m) for m in mus])
    if dps is None:
        formula = kernel_formula_eval_many(f, xis, etas)
    else:
        formula = np.array([kernel_formula_eval(f, x, e, dps=dps) for x, e in zip(xis, etas)])
    rel = np.abs(formula - direct) / np.abs(direct)
    worst = int(np.argmax(rel))
    lines = [
        f"n: {cfg.n}",
        f"seed: {cfg.seed}",
        f"samples: {cfg.samples}",
        f"radius: {cfg.radius:.15g}",
        f"separation: {cfg.separation:.15g}",
        f"precision: {'double' if dps is None else f'{dps} digits'}",
        f"max relative error: {rel.max():.15g}",
        f"median relative error: {float(np.median(rel)):.15g}",
        f"worst sample: {worst}",
        f"tolerance: {cfg.tolerance:.15g}",
    ]
    return lines, float(rel.max())


def default_dps(n: int) -> int | None:
    # the expanded n=4 denominator loses ~8 digits to cancellation in double
    return 30 if n >= 4 else None


def cmd_verify(args) -> int:
    cfg = RunConfig(
        "verify", args.n, args.seed, args.samples, args.radius, args.separation, args.tol, args.formula
    )
    cfg.validate()
    dps = default_dps(cfg.n) if args.dps is None else (args.dps or None)
    lines, worst = verify_report(cfg, dps)
    passed = worst <= cfg.tolerance
    lines.append(f"result: {'PASS' if passed else 'FAIL'}")
    print("\n".join(lines))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_eval(args) -> int:
    f = _load_formula(_check_n(args.n), args.formula)
    xi = _point(args.xi, f.n, "xi")
    eta = _point(args.eta, f.n, "eta")
    _member(xi, "xi")
    _member(eta, "eta")
    print(_fmt(complex(kernel_formula_eval(f, xi, eta, dps=args.dps))))
    return EXIT_OK


def cmd_metric(args) -> int:
    f = _load_formula(_check_n(args.n), args.formula)
    xi = _point(args.xi, f.n, "xi")
    _member(xi, "xi")
    g = bergman_metric_at(f, xi, dps=args.dps)
    for row in g:
        print("[" + ", ".join(_fmt(complex(v)) for v in row) + "]")
    return EXIT_OK


def cmd_membership(args) -> int:
    xi = _point(args.xi, _check_n(args.n), "xi")
    inside = gn_membership(xi, args.tol)
    print(f"{'inside' if inside else 'outside'} (largest root modulus {max_root_modulus(xi):.15g})")
    return EXIT_OK


def cmd_residual(args) -> int:
    n = _check_n(args.n)
    if not 0 < args.radius < 1:
        raise InvalidInput("radius must lie in (0, 1)")
    F = _curve(args.F, "euclidean", "F")
    G = _curve(args.G, "symmetrized", "G")
    if G.dim != n:
        raise InvalidInput(f"G has {G.dim} components, expected {n}")
    f = _load_formula(n, args.formula)
    try:
        grid = disc_grid(args.radius, args.per_side)
        result = pullback_residual(F, G, f, grid, method=args.method)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    if args.csv:
        result.write_csv(args.csv)
    if args.summary:
        result.write_summary(args.summary)
    print(f"sup-norm: {result.sup_norm:.15g}")
    print(f"mean: {result.mean:.15g}")
    print(f"points: {result.residual.size}, excluded: {result.excluded}")
    return EXIT_OK


def cmd_jet(args) -> int:
    n = _check_n(args.n)
    G = _curve(args.G, "symmetrized", "G")
    if G.dim != n:
        raise InvalidInput(f"G has {G.dim} components, expected {n}")
    try:
        z = parse_complex(args.z)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    f = _load_formula(n, args.formula)
    try:
        value = log_kernel_jet(f, G, z, args.delta)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    print(_fmt(complex(value)))
    return EXIT_OK


def _check_n(n: int) -> int:
    if not 1 <= n <= MAX_N:
        raise InvalidInput(f"n out of supported range 1..{MAX_N}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnbergman", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log pipeline progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_formula(p):
        p.add_argument("--formula", type=Path, help="load a KernelFormula JSON instead of rebuilding")

    p = sub.add_parser("formula", help="build H1/H2 and write the KernelFormula JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_formula)

    p = sub.add_parser("verify", help="cross-check formula against the direct determinant formula")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--radius", type=float, default=0.8)
    p.add_argument("--separation", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--dps", type=int, help="formula evaluation digits (0 forces double; default: auto)")
    with_formula(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="evaluate K(xi, eta)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--xi", required=True)
    p.add_argument("--eta", required=True)
    p.add_argument("--dps", type=int)
    with_formula(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("metric", help="Bergman metric matrix at xi")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--xi", required=True)
    p.add_argument("--dps", type=int)
    with_formula(p)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("residual", help="isometry residual of curves F into C^m and G into G_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--F", required=True, help='components ";"-separated, coefficients low to high, e.g. "0,1"')
    p.add_argument("--G", required=True, help='e.g. "0,1;0" for G(z) = (z, 0)')
    p.add_argument("--radius", type=float, default=0.4)
    p.add_argument("--per-side", type=int, default=21)
    p.add_argument("--method", choices=("symbolic", "fd"), default="symbolic")
    p.add_argument("--csv", type=Path)
    p.add_argument("--summary", type=Path)
    with_formula(p)
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("membership", help="test whether xi lies in G_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--xi", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_membership)

    p = sub.add_parser("jet", help="d^delta/d(conj w)^delta log K(G(z), G(w)) at w = 0")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--G", required=True)
    p.add_argument("--z", default="0")
    p.add_argument("--delta", type=int, default=1)
    with_formula(p)
    p.set_defaults(func=cmd_jet)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except (InvalidInput, OutOfDomainError, SingularInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
