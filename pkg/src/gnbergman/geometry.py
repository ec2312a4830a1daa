"""Numerical geometry of the symmetrized polydisc with its Bergman metric."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .curves import CurveSpec
from .kernel import KernelFormula, OutOfDomainError, _formula_point, kernel_formula_eval
from .symfun import fiber_roots

__all__ = [
    "BranchError",
    "ResidualResult",
    "gn_membership",
    "max_root_modulus",
    "bergman_metric_at",
    "metric_finite_difference",
    "is_hermitian",
    "is_positive_definite",
    "log_kernel",
    "diastasis_eval",
    "potential_eval",
    "centered_potential",
    "disc_grid",
    "pullback_residual",
]

MEMBERSHIP_TOL = 1e-9
FD_STEP = 1e-4
# 5-point central first-derivative stencil
_FD_OFFSETS = (-2, -1, 1, 2)
_FD_WEIGHTS = (1 / 12, -8 / 12, 8 / 12, -1 / 12)


class BranchError(ValueError):
    """Continuation of log K ran into (numerically) zero kernel values."""


def max_root_modulus(xi: Sequence[complex]) -> float:
    roots = fiber_roots(xi)
    return float(np.max(np.abs(roots))) if roots.size else 0.0


def gn_membership(xi: Sequence[complex], tol: float = MEMBERSHIP_TOL) -> bool:
    """True iff every root of the associated monic polynomial has modulus < 1 - tol."""
    return max_root_modulus(xi) < 1 - tol


def _require_member(xi, tol: float, what: str = "xi") -> None:
    r = max_root_modulus(xi)
    if not r < 1 - tol:
        raise OutOfDomainError(f"{what} is outside G_n (largest root modulus {r:.15g})")


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    return bool(np.all(np.abs(m - m.conj().T) <= tol * max(1.0, np.abs(m).max())))


def is_positive_definite(m: np.ndarray) -> bool:
    m = np.asarray(m)
    herm = (m + m.conj().T) / 2
    return bool(np.linalg.eigvalsh(herm).min() > 0)


def bergman_metric_at(
    f: KernelFormula, xi: Sequence[complex], dps: int | None = None, check: bool = True
) -> np.ndarray:
    """Metric coefficients ``g[j, k] = d_xi_j d_etab_k log K`` on the diagonal.

    Derivatives of H1 and H2 are exact polynomials; only their values are
    numeric.  For ``log H``: ``H_jk/H - H_j H_k/H**2``.
    """
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if xi.size != f.n:
        raise ValueError(f"xi must have {f.n} coordinates")
    if check:
        _require_member(xi, 1e-6)
    point = _formula_point(xi, xi)
    n = f.n
    g = np.zeros((n, n), dtype=complex)
    for which, sign in (("H1", 1.0), ("H2", -1.0)):
        h = getattr(f, which).evaluate(point, dps)
        if h == 0:
            raise OutOfDomainError(f"{which} vanishes on the diagonal at {xi}")
        hx = np.array([f.xi_partial(which, j).evaluate(point, dps) for j in range(n)])
        he = np.array([f.eta_partial(which, (k,)).evaluate(point, dps) for k in range(n)])
        hxe = np.array(
            [[f.xi_eta_partial(which, j, k).evaluate(point, dps) for k in range(n)] for j in range(n)]
        )
        g += sign * (hxe / h - np.outer(hx, he) / h**2)
    return g


def log_kernel(f: KernelFormula, xi, eta, dps: int | None = None) -> complex:
    """Principal-branch log of the kernel value."""
    return complex(np.log(complex(kernel_formula_eval(f, xi, eta, dps=dps))))


def metric_finite_difference(
    f: KernelFormula, xi: Sequence[complex], h: float = FD_STEP, dps: int | None = None
) -> np.ndarray:
    """Finite-difference estimate of :func:`bergman_metric_at`.

    ``log K(xi + s e_j, xi + t e_k)`` is holomorphic in ``s`` and
    antiholomorphic in ``t``, so real-direction derivatives in ``s`` and
    ``t`` are the required Wirtinger derivatives.  Uses the 5-point stencil
    along each axis.  Values are taken relative to the centre to stay on
    one branch.
    """
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    n = xi.size
    base = kernel_formula_eval(f, xi, xi, dps=dps)
    g = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            acc = 0j
            for a, wa in zip(_FD_OFFSETS, _FD_WEIGHTS):
                for b, wb in zip(_FD_OFFSETS, _FD_WEIGHTS):
                    x = xi.copy()
                    y = xi.copy()
                    x[j] += a * h
                    y[k] += b * h
                    acc += wa * wb * np.log(kernel_formula_eval(f, x, y, dps=dps) / base)
            g[j, k] = acc / h**2
    return g


def diastasis_eval(f: KernelFormula, xi, eta, dps: int | None = None, check: bool = True) -> float:
    """``log K(xi,xi) + log K(eta,eta) - log K(xi,eta) - log K(eta,xi)``."""
    if check:
        _require_member(xi, MEMBERSHIP_TOL, "xi")
        _require_member(eta, MEMBERSHIP_TOL, "eta")
    d = (
        log_kernel(f, xi, xi, dps)
        + log_kernel(f, eta, eta, dps)
        - log_kernel(f, xi, eta, dps)
        - log_kernel(f, eta, xi, dps)
    )
    if abs(d.imag) > 1e-10 * max(1.0, abs(d.real)):
        raise ArithmeticError(f"diastasis has imaginary residue {d.imag:.3e}")
    return float(d.real)


def potential_eval(
    f: KernelFormula, G: CurveSpec, z: complex, w: complex, steps: int = 64, max_refine: int = 12
) -> complex:
    """``log K(G(z), G(w))`` continued from the real value at ``w = z``.

    The phase is tracked along the segment from ``z`` to ``w``; steps are
    halved where the phase jumps by more than pi/4.
    """
    if G.dim != f.n:
        raise ValueError(f"curve has {G.dim} components, kernel has n={f.n}")
    gz = G(z)

    def kval(t: float) -> complex:
        return kernel_formula_eval(f, gz, G(z + t * (w - z)))

    k0 = kval(0.0)
    if not (abs(k0.imag) <= 1e-10 * abs(k0) and k0.real > 0):
        raise BranchError(f"diagonal kernel value {k0} is not positive")
    phase = 0.0
    prev_t, prev_k = 0.0, k0
    targets = list(np.linspace(0.0, 1.0, steps + 1)[1:])
    depth = {t: 0 for t in targets}
    while targets:
        t = targets[0]
        k = kval(t)
        if abs(k) < 1e-300:
            raise BranchError(f"kernel vanishes near w = {z + t * (w - z)}")
        jump = float(np.angle(k / prev_k))
        if abs(jump) > math.pi / 4:
            d = depth.pop(t) + 1
            if d > max_refine:
                raise BranchError("phase tracking failed: kernel too close to zero along the path")
            mid = (prev_t + t) / 2
            targets.insert(0, mid)
            depth[mid] = d
            depth[t] = d
            continue
        phase += jump
        prev_t, prev_k = t, k
        targets.pop(0)
        depth.pop(t, None)
    return complex(math.log(abs(prev_k)), phase)


def centered_potential(f: KernelFormula, G: CurveSpec, z: complex, w: complex) -> complex:
    """``log K(z,w) - log K(z,0) - log K(0,w) + log K(0,0)`` along ``G``."""
    return (
        potential_eval(f, G, z, w)
        - potential_eval(f, G, z, 0.0)
        - potential_eval(f, G, 0.0, w)
        + potential_eval(f, G, 0.0, 0.0)
    )


def disc_grid(radius: float, per_side: int) -> np.ndarray:
    """Square lattice points (row-major, y outer) inside the closed disc of ``radius``."""
    if per_side < 2 or not radius > 0:
        raise ValueError("degenerate grid")
    xs = np.linspace(-radius, radius, per_side)
    pts = [complex(x, y) for y in xs for x in xs if x * x + y * y <= radius * radius * (1 + 1e-12)]
    return np.array(pts, dtype=complex)


@dataclass
class ResidualResult:
    z: np.ndarray
    residual: np.ndarray
    excluded: int
    method: str = "symbolic"
    excluded_points: list = field(default_factory=list)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.residual))) if self.residual.size else 0.0

    @property
    def mean(self) -> float:
        return float(np.mean(self.residual)) if self.residual.size else 0.0

    def summary(self) -> dict:
        return {
            "sup_norm": self.sup_norm,
            "mean": self.mean,
            "points": int(self.residual.size),
            "excluded": int(self.excluded),
            "method": self.method,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["re(z)", "im(z)", "residual"])
            for z, r in zip(self.z, self.residual):
                writer.writerow([f"{z.real:.15g}", f"{z.imag:.15g}", f"{r:.15g}"])

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _euclidean_part(F: CurveSpec, z: complex) -> float:
    # d/dz d/dzbar sum |f_i|^2 = sum |f_i'|^2
    return float(np.sum(np.abs(F.derivative(1)(z)) ** 2))


def _potential(F: CurveSpec, G: CurveSpec, f: KernelFormula, z: complex) -> float:
    gz = G(z)
    return float(np.sum(np.abs(F(z)) ** 2)) - math.log(kernel_formula_eval(f, gz, gz).real)


def _residual_fd(F, G, f, z: complex, h: float) -> float:
    # d dbar = Laplacian / 4, 5-point stencil per axis
    w2 = (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)
    offs = (-2, -1, 0, 1, 2)
    lap = 0.0
    for direction in (1.0, 1j):
        lap += sum(w * _potential(F, G, f, z + o * h * direction) for o, w in zip(offs, w2)) / h**2
    return lap / 4


def pullback_residual(
    F: CurveSpec,
    G: CurveSpec,
    f: KernelFormula,
    grid: np.ndarray,
    method: str = "symbolic",
    h: float = FD_STEP,
) -> ResidualResult:
    """``r(z) = d/dz d/dzbar [ sum |f_i(z)|^2 - log K(G(z), G(z)) ]`` over ``grid``.

    ``method="symbolic"`` pulls back the exact metric along ``G'``;
    ``method="fd"`` differentiates the potential numerically.  Grid points
    where ``G`` leaves ``G_n`` are dropped and counted.
    """
    if F.target != "euclidean" or G.target != "symmetrized":
        raise ValueError("F must target C^m and G must target G_n")
    if G.dim != f.n:
        raise ValueError(f"G has {G.dim} components, kernel has n={f.n}")
    grid = np.asarray(grid, dtype=complex).reshape(-1)
    if grid.size == 0:
        raise ValueError("degenerate grid")
    if method not in ("symbolic", "fd"):
        raise ValueError(f"unknown method {method!r}")
    dG = G.derivative(1)
    kept, values, dropped = [], [], []
    for z in grid:
        gz = G(z)
        if not gn_membership(gz, 1e-6):
            dropped.append(complex(z))
            continue
        if method == "symbolic":
            gp = dG(z)
            metric = bergman_metric_at(f, gz, check=False)
            pulled = np.real(gp @ metric @ np.conj(gp))
            r = _euclidean_part(F, z) - float(pulled)
        else:
            r = _residual_fd(F, G, f, z, h)
        kept.append(complex(z))
        values.append(r)
    if not kept:
        raise OutOfDomainError("G leaves G_n at every grid point")
    return ResidualResult(
        np.array(kept), np.array(values, dtype=float), len(dropped), method, dropped
    )
