"""Bergman kernel of the symmetrized polydisc.

Three routes to the same function:

* :func:`kernel_direct_eval` pulls the polydisc kernel back through the
  symmetrization map (singular where two coordinates coincide);
* :func:`kernel_closed_form_n2` is the explicit two-dimensional formula;
* :func:`rationalize_kernel` builds exact polynomials ``H1``, ``H2`` with
  ``K(xi, eta) = H1(xi, conj eta) / (pi**n * H2(xi, conj eta))``.
"""

from __future__ import annotations

import itertools
import json
import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .curves import CurveSpec
from .polyalg import NotDivisibleError, Polynomial, RationalFunction, VariableArena, poly_from_terms
from .symfun import NotSymmetricError, decompose_symmetric, is_critical, vandermonde_eval

__all__ = [
    "MAX_N",
    "KernelFormula",
    "SingularInputError",
    "OutOfDomainError",
    "PipelineError",
    "formula_arena",
    "polydisc_arena",
    "kernel_direct_eval",
    "kernel_closed_form_n2",
    "leibniz_numerator",
    "expanded_denominator",
    "vandermonde_divide",
    "h2_from_factorization",
    "h2_from_expansion",
    "rationalize_kernel",
    "kernel_formula_eval",
    "kernel_formula_eval_many",
    "log_kernel_jet",
]

logger = logging.getLogger(__name__)

MAX_N = 4
SINGULAR_TOL = 1e-12


class SingularInputError(ValueError):
    """Direct formula requested on the critical set (0/0)."""


class OutOfDomainError(ValueError):
    pass


class PipelineError(RuntimeError):
    """An exact step that cannot fail in theory did fail: implementation bug."""


def polydisc_arena(n: int) -> VariableArena:
    return VariableArena.block("l", n) + VariableArena.block("mb", n)


def formula_arena(n: int) -> VariableArena:
    return VariableArena.block("xi", n) + VariableArena.block("etab", n)


@dataclass(frozen=True, eq=False)
class KernelFormula:
    n: int
    H1: Polynomial
    H2: Polynomial
    pi_power: int
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def arena(self) -> VariableArena:
        return self.H1.arena

    def __eq__(self, other):
        if not isinstance(other, KernelFormula):
            return NotImplemented
        return (self.n, self.pi_power, self.H1, self.H2) == (other.n, other.pi_power, other.H1, other.H2)

    def __hash__(self):
        return hash((self.n, self.pi_power, self.H1, self.H2))

    def as_rational_function(self) -> RationalFunction:
        return RationalFunction(self.H1, self.H2, self.pi_power)

    def to_json(self) -> str:
        """Canonical text; identical input gives byte-identical output."""
        doc = {
            "n": self.n,
            "pi_power": self.pi_power,
            "vars": list(self.arena.names),
            "H1": self.H1.to_json_terms(),
            "H2": self.H2.to_json_terms(),
        }
        return json.dumps(doc, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "KernelFormula":
        doc = json.loads(text)
        try:
            n = int(doc["n"])
            arena = VariableArena(doc["vars"])
            if arena != formula_arena(n):
                raise ValueError(f"unexpected variables {arena.names} for n={n}")
            h1 = poly_from_terms(doc["H1"], arena)
            h2 = poly_from_terms(doc["H2"], arena)
            pi_power = int(doc["pi_power"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed kernel formula document: {exc!r}") from None
        return cls(n, h1, h2, pi_power)

    def eta_partial(self, which: str, multi: tuple[int, ...]) -> Polynomial:
        """Cached derivative of H1 or H2 in the etab variables listed in ``multi``."""
        key = (which, tuple(sorted(multi)))
        poly = self._cache.get(key)
        if poly is None:
            if not multi:
                poly = getattr(self, which)
            else:
                poly = self.eta_partial(which, key[1][:-1]).partial(self.n + key[1][-1])
            self._cache[key] = poly
        return poly

    def xi_eta_partial(self, which: str, j: int, k: int) -> Polynomial:
        key = (which, "mixed", j, k)
        poly = self._cache.get(key)
        if poly is None:
            poly = self.eta_partial(which, (k,)).partial(j)
            self._cache[key] = poly
        return poly

    def xi_partial(self, which: str, j: int) -> Polynomial:
        key = (which, "xi", j)
        poly = self._cache.get(key)
        if poly is None:
            poly = getattr(self, which).partial(j)
            self._cache[key] = poly
        return poly


# --- direct and closed-form evaluation ----------------------------------------

def kernel_direct_eval(lam: Sequence[complex], mu: Sequence[complex], dps: int | None = None) -> complex:
    """Kernel at ``(pi_n(lam), pi_n(mu))`` from the polydisc determinant formula."""
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    mu = np.asarray(mu, dtype=complex).reshape(-1)
    n = lam.size
    if mu.size != n or n == 0:
        raise ValueError("lam and mu must have the same positive length")
    if is_critical(lam, SINGULAR_TOL) or is_critical(mu, SINGULAR_TOL):
        raise SingularInputError("singular: use kernel_formula_eval (point lies on the critical set)")
    if dps is not None:
        import mpmath

        with mpmath.workdps(dps):
            lm = [mpmath.mpc(complex(z)) for z in lam]
            mb = [mpmath.conj(mpmath.mpc(complex(z))) for z in mu]
            mat = mpmath.matrix(n, n)
            for j in range(n):
                for k in range(n):
                    mat[j, k] = 1 / (1 - lm[j] * mb[k]) ** 2
            vl = mpmath.mpc(1)
            vm = mpmath.mpc(1)
            for a, b in itertools.combinations(range(n), 2):
                vl *= lm[a] - lm[b]
                vm *= mb[a] - mb[b]
            return complex(mpmath.det(mat) / (mpmath.pi ** n * vl * vm))
    mat = 1.0 / (1.0 - np.outer(lam, np.conj(mu))) ** 2
    det = np.linalg.det(mat)
    return complex(det / (np.pi ** n * vandermonde_eval(lam) * np.conj(vandermonde_eval(mu))))


def kernel_closed_form_n2(s1: complex, p1: complex, s2: complex, p2: complex) -> complex:
    """The explicit two-dimensional kernel at ((s1, p1), (s2, p2))."""
    sb, pb = np.conj(s2), np.conj(p2)
    num = 2 - s1 * sb + 2 * p1 * pb
    bracket = 1 - s1 * sb + (s1**2 - 2 * p1) * pb - p1 * s1 * sb * pb + p1 * sb**2 + p1**2 * pb**2
    if bracket == 0:
        raise OutOfDomainError("denominator vanishes: input outside G_2 x G_2")
    return complex(num / (np.pi**2 * bracket**2))


# --- rationalization pipeline -------------------------------------------------

def _one_minus(arena: VariableArena, i: int, j: int) -> Polynomial:
    return Polynomial.constant(arena, 1) - Polynomial.var(arena, i) * Polynomial.var(arena, j)


def leibniz_numerator(n: int) -> Polynomial:
    """``P1`` in the polydisc arena.

    The determinant of ``1/(1 - l_j mb_k)^2`` equals ``P1 / P2`` with
    ``P2 = prod_{i,j} (1 - l_i mb_j)^2``; ``P1`` is the Leibniz sum of the
    row-cleared matrix ``M_jk = prod_{k' != k} (1 - l_j mb_k')^2``.  Shared
    row prefixes of the permutation products are reused.
    """
    arena = polydisc_arena(n)
    sq = [[_one_minus(arena, j, n + k) ** 2 for k in range(n)] for j in range(n)]
    one = Polynomial.constant(arena, 1)
    M = []
    for j in range(n):
        row = []
        for k in range(n):
            entry = one
            for kk in range(n):
                if kk != k:
                    entry = entry * sq[j][kk]
            row.append(entry)
        M.append(row)

    prefixes: dict[tuple[int, ...], Polynomial] = {(): one}

    def prefix(cols: tuple[int, ...]) -> Polynomial:
        if cols not in prefixes:
            prefixes[cols] = prefix(cols[:-1]) * M[len(cols) - 1][cols[-1]]
        return prefixes[cols]

    p1 = Polynomial.zero(arena)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        term = prefix(perm[:-1]) * M[n - 1][perm[-1]]
        p1 = p1 - term if inversions % 2 else p1 + term
    return p1


def expanded_denominator(n: int) -> Polynomial:
    """``P2 = prod_{i,j} (1 - l_i mb_j)^2`` fully expanded (large for n = 4)."""
    arena = polydisc_arena(n)
    p2 = Polynomial.constant(arena, 1)
    for i in range(n):
        for j in range(n):
            p2 = p2 * _one_minus(arena, i, n + j) ** 2
    return p2


def vandermonde_divide(p1: Polynomial, n: int) -> Polynomial:
    """Divide exactly by ``prod_{i<j}(l_i - l_j) * prod_{r<s}(mb_r - mb_s)``."""
    q = p1
    for offset in (0, n):
        for i, j in itertools.combinations(range(n), 2):
            try:
                q = q.exact_div_linear(offset + i, offset + j)
            except NotDivisibleError as exc:
                raise PipelineError(f"Vandermonde division failed: {exc}") from exc
    return q


def h2_from_factorization(n: int) -> Polynomial:
    """``H2`` via ``prod_j (1 - xi_1 mb_j + xi_2 mb_j^2 - ...)^2``, reduced in mb."""
    mixed = VariableArena.block("xi", n) + VariableArena.block("mb", n)
    one = Polynomial.constant(mixed, 1)
    p = one
    for j in range(n):
        mbj = Polynomial.var(mixed, n + j)
        factor = one
        power = one
        for k in range(1, n + 1):
            power = power * mbj
            term = Polynomial.var(mixed, k - 1) * power
            factor = factor - term if k % 2 else factor + term
        p = p * factor * factor
    reduced = decompose_symmetric(p, [f"mb{j}" for j in range(1, n + 1)], names=("etab",))
    return reduced.embed(formula_arena(n))


def h2_from_expansion(n: int) -> Polynomial:
    """``H2`` by two-block reduction of the fully expanded ``P2`` (small n only)."""
    arena = polydisc_arena(n)
    return decompose_symmetric(expanded_denominator(n), arena.names[:n], arena.names[n:])


@lru_cache(maxsize=None)
def rationalize_kernel(n: int) -> KernelFormula:
    """Exact ``H1``, ``H2`` with ``K = H1 / (pi**n H2)`` for 1 <= n <= 4."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n={n} out of supported range 1..{MAX_N}")
    t0 = time.perf_counter()
    arena = polydisc_arena(n)
    p1 = leibniz_numerator(n)
    logger.info("n=%d: P1 has %d terms (%.2fs)", n, len(p1), time.perf_counter() - t0)
    p1_reduced = vandermonde_divide(p1, n)
    logger.info("n=%d: P1/Vandermonde has %d terms (%.2fs)", n, len(p1_reduced), time.perf_counter() - t0)
    try:
        h1 = decompose_symmetric(p1_reduced, arena.names[:n], arena.names[n:])
        h2 = h2_from_factorization(n)
    except NotSymmetricError as exc:
        raise PipelineError(f"symmetry check failed: {exc}") from exc
    logger.info(
        "n=%d: H1 %d terms, H2 %d terms (%.2fs)", n, len(h1), len(h2), time.perf_counter() - t0
    )
    return KernelFormula(n, h1, h2, n)


def _formula_point(xi, eta) -> np.ndarray:
    return np.concatenate([np.asarray(xi, dtype=complex).reshape(-1), np.conj(np.asarray(eta, dtype=complex).reshape(-1))])


def kernel_formula_eval(
    f: KernelFormula, xi: Sequence[complex], eta: Sequence[complex], strict: bool = False,
    dps: int | None = None,
) -> complex:
    """``H1(xi, conj eta) / (pi**n H2(xi, conj eta))``; defined on the critical image too."""
    if strict:
        from .geometry import gn_membership

        for name, pt in (("xi", xi), ("eta", eta)):
            if not gn_membership(pt):
                raise OutOfDomainError(f"{name} is not in G_{f.n}")
    point = _formula_point(xi, eta)
    if point.size != 2 * f.n:
        raise ValueError(f"points must have {f.n} coordinates")
    h2 = f.H2.evaluate(point, dps)
    if h2 == 0:
        raise OutOfDomainError("H2 vanishes: input outside G_n x G_n")
    return f.H1.evaluate(point, dps) / (np.pi ** f.pi_power * h2)


def kernel_formula_eval_many(f: KernelFormula, xis: np.ndarray, etas: np.ndarray) -> np.ndarray:
    """Vectorized double-precision :func:`kernel_formula_eval` over rows."""
    pts = np.concatenate([np.asarray(xis, dtype=complex), np.conj(np.asarray(etas, dtype=complex))], axis=1)
    h2 = f.H2.evaluate_many(pts)
    if np.any(h2 == 0):
        raise OutOfDomainError("H2 vanishes: input outside G_n x G_n")
    return f.H1.evaluate_many(pts) / (np.pi ** f.pi_power * h2)


# --- log-kernel jets ----------------------------------------------------------

def _log_derivatives(f: KernelFormula, which: str, point: np.ndarray, order: int):
    """Derivative tensors of ``log H`` in the etab variables, up to ``order``."""
    n = f.n
    h = f.eta_partial(which, ()).evaluate(point)
    if h == 0:
        raise OutOfDomainError(f"{which} vanishes at the jet base point")
    d1 = np.array([f.eta_partial(which, (k,)).evaluate(point) for k in range(n)])
    out = [d1 / h]
    if order >= 2:
        d2 = np.array([[f.eta_partial(which, (k, l)).evaluate(point) for l in range(n)] for k in range(n)])
        out.append(d2 / h - np.outer(d1, d1) / h**2)
    if order >= 3:
        d3 = np.array(
            [[[f.eta_partial(which, (k, l, m)).evaluate(point) for m in range(n)] for l in range(n)] for k in range(n)]
        )
        sym = (
            np.einsum("kl,m->klm", d2, d1) + np.einsum("km,l->klm", d2, d1) + np.einsum("lm,k->klm", d2, d1)
        )
        out.append(d3 / h - sym / h**2 + 2 * np.einsum("k,l,m->klm", d1, d1, d1) / h**3)
    return out


def log_kernel_jet(f: KernelFormula, G: CurveSpec, z: complex, delta: int, check_domain: bool = True) -> complex:
    """``(d/d conj w)^delta log K(G(z), G(w))`` at ``w = 0``, for ``1 <= delta <= 3``."""
    if not 1 <= delta <= 3:
        raise ValueError(f"jet order {delta} unsupported (1..3)")
    if G.dim != f.n:
        raise ValueError(f"curve has {G.dim} components, kernel has n={f.n}")
    g_z, g_0 = G(z), G(0.0)
    if check_domain:
        from .geometry import gn_membership

        if not (gn_membership(g_z) and gn_membership(g_0)):
            raise OutOfDomainError("curve leaves G_n at z or at 0")
    # derivatives of conj(G(w)) in conj(w) at 0 are conjugated Taylor derivatives
    d = np.conj(G.taylor_derivatives(delta, 0.0))
    if not np.any(d):
        return 0j
    point = _formula_point(g_z, g_0)
    total = 0j
    for which, sign in (("H1", 1.0), ("H2", -1.0)):
        L = _log_derivatives(f, which, point, delta)
        if delta == 1:
            val = L[0] @ d[0]
        elif delta == 2:
            val = d[0] @ L[1] @ d[0] + L[0] @ d[1]
        else:
            val = (
                np.einsum("klm,k,l,m->", L[2], d[0], d[0], d[0])
                + 3 * (d[1] @ L[1] @ d[0])
                + L[0] @ d[2]
            )
        total += sign * val
    return complex(total)
