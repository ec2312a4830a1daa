"""Shared generators for randomized tests."""

import itertools
import random
from fractions import Fraction

from gnbergman.polyalg import Polynomial, VariableArena


def random_polynomial(rng: random.Random, arena: VariableArena, degree: int, terms: int) -> Polynomial:
    out = {}
    nv = len(arena)
    for _ in range(terms):
        d = rng.randint(0, degree)
        exps = [0] * nv
        for _ in range(d):
            exps[rng.randrange(nv)] += 1
        out[tuple(exps)] = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
    return Polynomial(arena, out)


def symmetrize_polynomial(p: Polynomial, block: list[int]) -> Polynomial:
    """Sum of p over all permutations of the block variables."""
    total = {}
    for perm in itertools.permutations(block):
        for exps, c in p.as_dict().items():
            new = list(exps)
            for src, dst in zip(block, perm):
                new[dst] = exps[src]
            key = tuple(new)
            total[key] = total.get(key, 0) + c
    return Polynomial(p.arena, total)


def random_symmetric(rng: random.Random, n: int, degree: int, terms: int = 4) -> Polynomial:
    arena = VariableArena.block("x", n)
    base = random_polynomial(rng, arena, degree, terms)
    return symmetrize_polynomial(base, list(range(n)))
