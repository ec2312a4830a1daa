"""Symmetrization map, Vandermonde products and symmetric-polynomial reduction.

The reduction to elementary symmetric polynomials is the classical
leading-term algorithm.  Because the input is verified symmetric before
reduction, only monomials whose block exponents are weakly decreasing
(partition representatives) are stored; every other monomial is a
permutation of one of those and carries the same coefficient.
"""

from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from functools import lru_cache
from typing import Sequence

import numpy as np

from .polyalg import Polynomial, VariableArena, _normalize

__all__ = [
    "NotSymmetricError",
    "symmetrize_point",
    "elementary_symmetric_poly",
    "vandermonde",
    "vandermonde_eval",
    "is_critical",
    "fiber_roots",
    "root_matching_error",
    "is_symmetric",
    "decompose_symmetric",
    "substitute_elementary",
]

logger = logging.getLogger(__name__)

MAX_REDUCTION_STEPS = 10**7


class NotSymmetricError(ValueError):
    pass


def _as_complex_array(point) -> np.ndarray:
    arr = np.asarray(point, dtype=complex).reshape(-1)
    return arr


def symmetrize_point(lam: Sequence[complex]) -> np.ndarray:
    """Elementary symmetric functions ``(e_1(lam), ..., e_n(lam))``.

    Coordinates are sorted before the recurrence so the floating-point
    result is bitwise independent of input order.
    """
    lam = _as_complex_array(lam)
    if lam.size == 0:
        raise ValueError("symmetrize_point needs at least one coordinate")
    coords = sorted(lam.tolist(), key=lambda z: (z.real, z.imag))
    n = len(coords)
    e = [1 + 0j] + [0j] * n
    for m, x in enumerate(coords, start=1):
        for k in range(m, 0, -1):
            e[k] = e[k] + x * e[k - 1]
    return np.array(e[1:], dtype=complex)


def _block_indices(arena: VariableArena, block) -> list[int]:
    if isinstance(block, VariableArena):
        block = block.names
    return [arena.index(v) for v in block]


def elementary_symmetric_poly(arena: VariableArena, block, k: int) -> Polynomial:
    """``sigma_k`` in the block variables of ``arena``."""
    idx = _block_indices(arena, block)
    n = len(idx)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    terms = {}
    for combo in itertools.combinations(idx, k):
        exps = [0] * len(arena)
        for i in combo:
            exps[i] = 1
        terms[tuple(exps)] = 1
    return Polynomial(arena, terms)


def vandermonde(arena: VariableArena, block) -> Polynomial:
    """``prod_{i<j} (x_i - x_j)`` over the block, in block order."""
    idx = _block_indices(arena, block)
    result = Polynomial.constant(arena, 1)
    for a, b in itertools.combinations(idx, 2):
        result = result * (Polynomial.var(arena, a) - Polynomial.var(arena, b))
    return result


def vandermonde_eval(point: Sequence[complex]) -> complex:
    pt = _as_complex_array(point)
    result = 1 + 0j
    for a, b in itertools.combinations(range(pt.size), 2):
        result *= pt[a] - pt[b]
    return complex(result)


def is_critical(lam: Sequence[complex], tol: float = 0.0) -> bool:
    """Whether ``lam`` lies (within ``tol``) on the set where the Vandermonde vanishes."""
    return abs(vandermonde_eval(lam)) <= tol


def fiber_roots(xi: Sequence[complex]) -> np.ndarray:
    """Roots of ``t^n - xi_1 t^(n-1) + xi_2 t^(n-2) - ... + (-1)^n xi_n``.

    Computed as eigenvalues of the companion matrix (LAPACK balances it).
    Returned sorted by (real, imag).
    """
    xi = _as_complex_array(xi)
    n = xi.size
    if n == 0:
        return np.zeros(0, dtype=complex)
    # monic coefficients c_k of t^(n-k): c_k = (-1)^k xi_k
    c = np.array([(-1) ** k * xi[k - 1] for k in range(1, n + 1)], dtype=complex)
    companion = np.zeros((n, n), dtype=complex)
    companion[0, :] = -c
    if n > 1:
        companion[1:, :-1] = np.eye(n - 1)
    roots = np.linalg.eigvals(companion)
    return np.array(sorted(roots.tolist(), key=lambda z: (z.real, z.imag)), dtype=complex)


def root_matching_error(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Largest distance after greedily pairing closest roots of two multisets."""
    left = list(_as_complex_array(a))
    right = list(_as_complex_array(b))
    if len(left) != len(right):
        raise ValueError("multisets differ in size")
    pairs = sorted(
        (abs(x - y), i, j) for i, x in enumerate(left) for j, y in enumerate(right)
    )
    used_l, used_r = set(), set()
    worst = 0.0
    for d, i, j in pairs:
        if i in used_l or j in used_r:
            continue
        used_l.add(i)
        used_r.add(j)
        worst = max(worst, d)
    return worst


# --- symmetric reduction -----------------------------------------------------

def is_symmetric(p: Polynomial, block) -> bool:
    """Check invariance under the adjacent transpositions of the block."""
    idx = _block_indices(p.arena, block)
    return all(p.swap(a, b) == p for a, b in zip(idx, idx[1:]))


def _is_partition(exps: Sequence[int]) -> bool:
    return all(exps[i] >= exps[i + 1] for i in range(len(exps) - 1))


def _subset_masks(n: int, k: int) -> list[tuple[int, ...]]:
    return [tuple(1 if i in combo else 0 for i in range(n)) for combo in itertools.combinations(range(n), k)]


def _times_sigma(f: dict, n: int, k: int) -> dict:
    """Multiply a symmetric polynomial, stored by partition coefficients, by sigma_k."""
    masks = _subset_masks(n, k)
    candidates = set()
    for b in f:
        for m in masks:
            cand = tuple(sorted((x + y for x, y in zip(b, m)), reverse=True))
            candidates.add(cand)
    out = {}
    for a in candidates:
        total = 0
        for m in masks:
            diff = [x - y for x, y in zip(a, m)]
            if min(diff) < 0:
                continue
            total += f.get(tuple(sorted(diff, reverse=True)), 0)
        if total:
            out[a] = total
    return out


@lru_cache(maxsize=None)
def _sigma_monomial_partitions(n: int, s: tuple[int, ...]) -> dict:
    """Partition coefficients of ``sigma_1^s_1 ... sigma_n^s_n`` in n variables."""
    for k in range(n - 1, -1, -1):
        if s[k]:
            parent = s[:k] + (s[k] - 1,) + s[k + 1:]
            return _times_sigma(_sigma_monomial_partitions(n, parent), n, k + 1)
    return {(0,) * n: 1}


def _grlex_key(a: tuple[int, ...]):
    return (sum(a), a)


def _reduce_block(rep: dict, n: int, budget: list[int]) -> dict:
    """Leading-term reduction over one block.

    ``rep`` maps a partition (block exponents) to a coefficient dict
    ``{other_key: rational}``.  Returns ``{sigma_exponents: coefficient dict}``.
    Mutates ``rep``.
    """
    out = {}
    while rep:
        lead = max(rep, key=_grlex_key)
        coef = rep.pop(lead)
        budget[0] += 1
        if budget[0] > MAX_REDUCTION_STEPS:
            raise RuntimeError(
                f"symmetric reduction exceeded {MAX_REDUCTION_STEPS} steps; last leading exponent {lead}"
            )
        s = tuple(lead[i] - lead[i + 1] for i in range(n - 1)) + (lead[-1],)
        out[s] = coef
        for b, k in _sigma_monomial_partitions(n, s).items():
            if b == lead:
                continue
            target = rep.get(b)
            if target is None:
                target = rep[b] = {}
            for ok, oc in coef.items():
                v = target.get(ok, 0) - k * oc
                if v:
                    target[ok] = v
                else:
                    target.pop(ok, None)
            if not target:
                del rep[b]
    return out


def _sigma_names(prefixes: Sequence[str], n: int) -> list[str]:
    return [f"{prefix}{i}" for prefix in prefixes for i in range(1, n + 1)]


def decompose_symmetric(
    p: Polynomial,
    block,
    second_block=None,
    names: Sequence[str] = ("xi", "etab"),
) -> Polynomial:
    """Rewrite a (bi)symmetric polynomial in elementary symmetric polynomials.

    ``block`` names the variables p is symmetric in; with ``second_block``
    p must also be symmetric in those, independently.  The result lives in
    an arena ``xi1..xin`` (and ``etab1..etabn``) followed by any remaining
    variables of ``p``, unchanged.

    Raises :class:`NotSymmetricError` if an adjacent transposition of a
    block changes ``p``.
    """
    arena = p.arena
    blocks = [_block_indices(arena, block)]
    if second_block is not None:
        blocks.append(_block_indices(arena, second_block))
    n = len(blocks[0])
    if any(len(b) != n for b in blocks):
        raise ValueError("both blocks must have the same size")
    used = [i for b in blocks for i in b]
    if len(set(used)) != len(used):
        raise ValueError("blocks overlap")
    for b in blocks:
        if not is_symmetric(p, b):
            raise NotSymmetricError(
                "input is not symmetric in " + ", ".join(arena.names[i] for i in b)
            )
    rest = [i for i in range(len(arena)) if i not in used]
    out_arena = VariableArena(_sigma_names(names[: len(blocks)], n) + [arena.names[i] for i in rest])
    if n == 0:
        return p.embed(out_arena)

    budget = [0]
    # group by first block; keep only partition representatives of every block
    rep: dict = defaultdict(dict)
    for exps, c in p.as_dict().items():
        parts = [tuple(exps[i] for i in b) for b in blocks]
        if not all(_is_partition(x) for x in parts):
            continue
        other = tuple(x for part in parts[1:] for x in part) + tuple(exps[i] for i in rest)
        rep[parts[0]][other] = c
    reduced = _reduce_block(dict(rep), n, budget)

    if second_block is not None:
        rep2: dict = defaultdict(dict)
        for s1, coef in reduced.items():
            for other, c in coef.items():
                rep2[other[:n]][s1 + other[n:]] = c
        reduced2 = _reduce_block(dict(rep2), n, budget)
        terms = {}
        for s2, coef in reduced2.items():
            for other, c in coef.items():
                terms[other[:n] + s2 + other[n:]] = c
    else:
        terms = {s1 + other: c for s1, coef in reduced.items() for other, c in coef.items()}
    logger.debug("symmetric reduction: %d steps, %d output terms", budget[0], len(terms))
    return Polynomial(out_arena, {k: _normalize(v) for k, v in terms.items()})


def substitute_elementary(
    q: Polynomial, target: VariableArena, blocks: Sequence, n: int | None = None
) -> Polynomial:
    """Inverse of :func:`decompose_symmetric`: replace sigma variables by sigma_k polynomials.

    ``blocks`` lists, per sigma block of ``q``'s arena, the target variables
    it came from.  Remaining variables of ``q`` map to target variables by name.
    """
    blocks = [_block_indices(target, b) for b in blocks]
    n = len(blocks[0]) if n is None else n
    values = []
    for b in blocks:
        values.extend(elementary_symmetric_poly(target, b, k) for k in range(1, n + 1))
    for name in q.arena.names[len(values):]:
        values.append(Polynomial.var(target, name))
    return q.compose(values)
