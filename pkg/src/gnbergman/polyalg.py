"""Exact sparse multivariate polynomials over the rationals.

Polynomials live in a :class:`VariableArena`, an ordered tuple of symbol
names.  Monomials are ordered graded-lexicographically with the arena order
as tie-break; that order drives leading terms, serialization and numeric
summation order.

Internally a monomial is packed into a single Python int::

    key = deg << (B * nv) | e_0 << (B * (nv - 1)) | ... | e_{nv-1}

so that monomial multiplication is integer addition and the grlex
comparison is integer comparison.  Coefficients are ``int`` when integral
and :class:`fractions.Fraction` otherwise.
"""

from __future__ import annotations

import json
import re
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "VariableArena",
    "Polynomial",
    "RationalFunction",
    "PolynomialError",
    "ArenaMismatchError",
    "NotDivisibleError",
    "ParseError",
    "poly_mul",
    "poly_exact_div_linear",
    "poly_eval",
    "ratfn_partial",
    "poly_serialize",
    "poly_parse",
]

FIELD_BITS = 16
_FIELD_MASK = (1 << FIELD_BITS) - 1
_MAX_DEGREE = _FIELD_MASK


class PolynomialError(Exception):
    """Base class for polynomial arithmetic failures."""


class ArenaMismatchError(PolynomialError, ValueError):
    pass


class NotDivisibleError(PolynomialError, ArithmeticError):
    """Raised when an exact division leaves a nonzero remainder."""


class ParseError(PolynomialError, ValueError):
    pass


def _normalize(c):
    """Return ``c`` as an int if integral, else as a reduced Fraction."""
    if isinstance(c, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        return _normalize(Fraction(c.numerator, c.denominator))
    raise TypeError(f"coefficient must be an exact rational, got {type(c).__name__}")


@dataclass(frozen=True)
class VariableArena:
    """Ordered, duplicate-free set of formal variable names."""

    names: tuple[str, ...]

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        for name in names:
            if not isinstance(name, str) or not name:
                raise ValueError(f"invalid variable name {name!r}")
        object.__setattr__(self, "names", names)

    @classmethod
    def block(cls, prefix: str, n: int) -> "VariableArena":
        return cls(f"{prefix}{i}" for i in range(1, n + 1))

    def __len__(self) -> int:
        return len(self.names)

    def __add__(self, other: "VariableArena") -> "VariableArena":
        return VariableArena(self.names + other.names)

    def index(self, var: int | str) -> int:
        if isinstance(var, str):
            try:
                return self.names.index(var)
            except ValueError:
                raise KeyError(f"unknown variable {var!r}") from None
        if not 0 <= var < len(self.names):
            raise IndexError(f"variable index {var} out of range for {len(self.names)} variables")
        return var

    # packing helpers -------------------------------------------------------
    def _shift(self, i: int) -> int:
        return FIELD_BITS * (len(self.names) - 1 - i)

    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != len(self.names):
            raise ValueError(f"monomial has {len(exps)} exponents, arena has {len(self.names)}")
        key = 0
        deg = 0
        for e in exps:
            e = int(e)
            if e < 0:
                raise ValueError("negative exponent")
            deg += e
            key = (key << FIELD_BITS) | e
        if deg > _MAX_DEGREE:
            raise OverflowError(f"total degree {deg} exceeds {_MAX_DEGREE}")
        return (deg << (FIELD_BITS * len(self.names))) | key

    def unpack(self, key: int) -> tuple[int, ...]:
        nv = len(self.names)
        return tuple((key >> (FIELD_BITS * (nv - 1 - i))) & _FIELD_MASK for i in range(nv))

    def unit(self, i: int) -> int:
        """Packed key of the monomial ``x_i``."""
        return (1 << (FIELD_BITS * len(self.names))) | (1 << self._shift(i))

    def degree_of(self, key: int) -> int:
        return key >> (FIELD_BITS * len(self.names))


class Polynomial:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("arena", "_terms", "_numeric", "_fixed")

    def __init__(self, arena: VariableArena, terms: Mapping[Sequence[int], object] | None = None):
        packed: dict[int, object] = {}
        for exps, c in (terms or {}).items():
            c = _normalize(c)
            if c:
                key = arena.pack(exps)
                packed[key] = packed.get(key, 0) + c
        self.arena = arena
        self._terms = {k: _normalize(v) for k, v in packed.items() if v}
        self._numeric = None
        self._fixed = None

    @classmethod
    def _from_packed(cls, arena: VariableArena, terms: dict[int, object]) -> "Polynomial":
        # caller guarantees normalized nonzero coefficients
        p = cls.__new__(cls)
        p.arena = arena
        p._terms = terms
        p._numeric = None
        p._fixed = None
        return p

    @classmethod
    def constant(cls, arena: VariableArena, c=1) -> "Polynomial":
        c = _normalize(c)
        return cls._from_packed(arena, {0: c} if c else {})

    @classmethod
    def zero(cls, arena: VariableArena) -> "Polynomial":
        return cls._from_packed(arena, {})

    @classmethod
    def var(cls, arena: VariableArena, v: int | str) -> "Polynomial":
        return cls._from_packed(arena, {arena.unit(arena.index(v)): 1})

    # inspection ------------------------------------------------------------
    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def terms(self) -> list[tuple[tuple[int, ...], object]]:
        """Terms as ``(exponents, coefficient)`` in descending grlex order."""
        return [(self.arena.unpack(k), self._terms[k]) for k in sorted(self._terms, reverse=True)]

    def as_dict(self) -> dict[tuple[int, ...], object]:
        return {self.arena.unpack(k): c for k, c in self._terms.items()}

    def coefficient(self, exps: Sequence[int]):
        return self._terms.get(self.arena.pack(exps), 0)

    def leading_term(self) -> tuple[tuple[int, ...], object]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        k = max(self._terms)
        return self.arena.unpack(k), self._terms[k]

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return self.arena.degree_of(max(self._terms))

    def degree_in(self, v: int | str) -> int:
        i = self.arena.index(v)
        shift = self.arena._shift(i)
        return max(((k >> shift) & _FIELD_MASK for k in self._terms), default=-1)

    def max_degrees(self) -> tuple[int, ...]:
        exps = [self.arena.unpack(k) for k in self._terms]
        return tuple(max(col) for col in zip(*exps)) if exps else (0,) * len(self.arena)

    def is_constant(self) -> bool:
        return all(k == 0 for k in self._terms)

    # arithmetic ------------------------------------------------------------
    def _check(self, other: "Polynomial") -> None:
        if self.arena != other.arena:
            raise ArenaMismatchError(f"arena mismatch: {self.arena.names} vs {other.arena.names}")

    def _coerce(self, other) -> "Polynomial | None":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Polynomial.constant(self.arena, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = _normalize(v)
            else:
                out.pop(k, None)
        return Polynomial._from_packed(self.arena, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._from_packed(self.arena, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            c = _normalize(other)
            if not c:
                return Polynomial.zero(self.arena)
            return Polynomial._from_packed(
                self.arena, {k: _normalize(v * c) for k, v in self._terms.items()}
            )
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        if self.total_degree() + other.total_degree() > _MAX_DEGREE:
            raise OverflowError("product degree exceeds packed monomial capacity")
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        b_items = list(b.items())
        acc: dict[int, object] = defaultdict(int)
        for ka, ca in a.items():
            for kb, cb in b_items:
                acc[ka + kb] += ca * cb
        return Polynomial._from_packed(
            self.arena, {k: _normalize(v) for k, v in acc.items() if v}
        )

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a non-negative int")
        result = Polynomial.constant(self.arena, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.arena == other.arena and self._terms == other._terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self._terms == Polynomial.constant(self.arena, other)._terms
        return NotImplemented

    def __hash__(self):
        return hash((self.arena, frozenset(self._terms.items())))

    def scale_to_monic_sign(self) -> "Polynomial":
        """Multiply by -1 if needed so the leading coefficient is positive."""
        if self._terms and self._terms[max(self._terms)] < 0:
            return -self
        return self

    # calculus and substitution ---------------------------------------------
    def partial(self, v: int | str) -> "Polynomial":
        i = self.arena.index(v)
        shift = self.arena._shift(i)
        unit = self.arena.unit(i)
        out = {}
        for k, c in self._terms.items():
            e = (k >> shift) & _FIELD_MASK
            if e:
                out[k - unit] = c * e
        return Polynomial._from_packed(self.arena, out)

    def exact_div_linear(self, i: int | str, j: int | str) -> "Polynomial":
        """Divide exactly by ``x_i - x_j``; see :func:`poly_exact_div_linear`."""
        i, j = self.arena.index(i), self.arena.index(j)
        if i == j:
            raise ValueError("divisor x_i - x_i is zero")
        shift = self.arena._shift(i)
        ui, uj = self.arena.unit(i), self.arena.unit(j)
        # bucket by exponent of x_i, then eliminate from the top degree down
        buckets: dict[int, dict[int, object]] = defaultdict(dict)
        for k, c in self._terms.items():
            buckets[(k >> shift) & _FIELD_MASK][k] = c
        quotient: dict[int, object] = {}
        top = max(buckets, default=0)
        for d in range(top, 0, -1):
            level = buckets.pop(d, None)
            if not level:
                continue
            lower = buckets[d - 1]
            for k, c in level.items():
                if not c:
                    continue
                qk = k - ui
                quotient[qk] = c
                nk = qk + uj
                lower[nk] = lower.get(nk, 0) + c
        remainder = {k: c for k, c in buckets.get(0, {}).items() if c}
        if remainder:
            raise NotDivisibleError(
                f"not divisible by ({self.arena.names[i]} - {self.arena.names[j]}): "
                f"{len(remainder)} remainder terms (input is not alternating in this pair)"
            )
        return Polynomial._from_packed(self.arena, {k: _normalize(c) for k, c in quotient.items()})

    def swap(self, i: int | str, j: int | str) -> "Polynomial":
        """Exchange two variables."""
        i, j = self.arena.index(i), self.arena.index(j)
        si, sj = self.arena._shift(i), self.arena._shift(j)
        out = {}
        for k, c in self._terms.items():
            ei = (k >> si) & _FIELD_MASK
            ej = (k >> sj) & _FIELD_MASK
            k2 = k - (ei << si) - (ej << sj) + (ej << si) + (ei << sj)
            out[k2] = c
        return Polynomial._from_packed(self.arena, out)

    def embed(self, arena: VariableArena, mapping: Mapping[int | str, int | str] | None = None) -> "Polynomial":
        """Re-express in ``arena``; variables map by name unless ``mapping`` says otherwise."""
        targets = []
        for i, name in enumerate(self.arena.names):
            src = mapping.get(name, mapping.get(i)) if mapping else None
            targets.append(arena.index(src if src is not None else name))
        out: dict[int, object] = {}
        for k, c in self._terms.items():
            exps = [0] * len(arena)
            for i, e in enumerate(self.arena.unpack(k)):
                exps[targets[i]] += e
            nk = arena.pack(exps)
            out[nk] = out.get(nk, 0) + c
        return Polynomial._from_packed(arena, {k: _normalize(c) for k, c in out.items() if c})

    def compose(self, values: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute ``values[i]`` (polynomials in a common arena) for variable ``i``."""
        if len(values) != len(self.arena):
            raise ValueError("need one value per variable")
        target = values[0].arena
        for v in values:
            if v.arena != target:
                raise ArenaMismatchError("substituted values must share one arena")
        powers: list[list[Polynomial]] = [[Polynomial.constant(target, 1)] for _ in values]
        result = Polynomial.zero(target)
        for exps, c in self.terms():
            term = Polynomial.constant(target, c)
            for i, e in enumerate(exps):
                while len(powers[i]) <= e:
                    powers[i].append(powers[i][-1] * values[i])
                if e:
                    term = term * powers[i][e]
            result = result + term
        return result

    # numerics --------------------------------------------------------------
    def _numeric_form(self):
        if self._numeric is None:
            keys = sorted(self._terms, reverse=True)
            exps = np.array([self.arena.unpack(k) for k in keys], dtype=np.int64).reshape(
                len(keys), len(self.arena)
            )
            coefs = np.array([float(self._terms[k]) for k in keys], dtype=np.float64)
            self._numeric = (exps, coefs, keys)
        return self._numeric

    def evaluate(self, point: Sequence[complex], dps: int | None = None) -> complex:
        """Evaluate at a complex point; ``dps`` switches to fixed-point integers at that precision."""
        if len(point) != len(self.arena):
            raise ValueError(f"point has {len(point)} coordinates, arena has {len(self.arena)}")
        if dps is not None:
            return self._evaluate_fixed(point, dps)
        return complex(self.evaluate_many(np.asarray(point, dtype=complex)[None, :])[0])

    def evaluate_many(self, points: np.ndarray, chunk: int = 256) -> np.ndarray:
        """Vectorized double-precision evaluation at the rows of ``points``."""
        points = np.asarray(points, dtype=complex)
        if points.ndim != 2 or points.shape[1] != len(self.arena):
            raise ValueError(f"points must have shape (N, {len(self.arena)})")
        exps, coefs, _ = self._numeric_form()
        out = np.zeros(points.shape[0], dtype=complex)
        if not len(coefs):
            return out
        maxdeg = int(exps.max())
        for start in range(0, points.shape[0], chunk):
            pts = points[start:start + chunk]
            # powers[m, v, d] = pts[m, v] ** d
            powers = np.ones((pts.shape[0], pts.shape[1], maxdeg + 1), dtype=complex)
            for d in range(1, maxdeg + 1):
                powers[:, :, d] = powers[:, :, d - 1] * pts
            monos = np.ones((pts.shape[0], len(coefs)), dtype=complex)
            for v in range(pts.shape[1]):
                monos *= powers[:, v, exps[:, v]]
            out[start:start + chunk] = monos @ coefs
        return out

    def _fixed_form(self):
        """Terms split into (first-half, second-half) monomial indices for fixed-point use."""
        if self._fixed is None:
            nv = len(self.arena)
            half = nv // 2
            left: dict[tuple, int] = {}
            right: dict[tuple, int] = {}
            rows = []
            for exps, c in self.terms():
                a, b = exps[:half], exps[half:]
                ia = left.setdefault(a, len(left))
                ib = right.setdefault(b, len(right))
                if isinstance(c, Fraction):
                    rows.append((ia, ib, c.numerator, c.denominator))
                else:
                    rows.append((ia, ib, c, 1))
            self._fixed = (half, list(left), list(right), rows)
        return self._fixed

    def _evaluate_fixed(self, point, dps: int) -> complex:
        """Evaluate with scaled-integer arithmetic at about ``dps`` significant digits.

        Coordinates are rounded to multiples of ``2**-bits``; every product is
        truncated back to that grid, so the absolute error per operation is
        ``~2**-bits`` and independent of cancellation in the final sum.
        """
        bits = int(dps * 3.33) + 64
        one = 1 << bits

        def fix(x: float) -> int:
            return round(Fraction(x) * one)

        coords = [(fix(complex(z).real), fix(complex(z).imag)) for z in point]

        def cmul(u, v):
            return ((u[0] * v[0] - u[1] * v[1]) >> bits, (u[0] * v[1] + u[1] * v[0]) >> bits)

        half, left, right, rows = self._fixed_form()
        cache: dict[tuple[int, tuple[int, ...]], tuple[int, int]] = {}

        def mono(offset: int, exps: tuple[int, ...]):
            key = (offset, exps)
            val = cache.get(key)
            if val is None:
                for i in range(len(exps) - 1, -1, -1):
                    if exps[i]:
                        parent = exps[:i] + (exps[i] - 1,) + exps[i + 1:]
                        val = cmul(mono(offset, parent), coords[offset + i])
                        break
                else:
                    val = (one, 0)
                cache[key] = val
            return val

        lv = [mono(0, a) for a in left]
        rv = [mono(half, b) for b in right]
        re_total = Fraction(0)
        im_total = Fraction(0)
        by_den: dict[int, list[int]] = {}
        for ia, ib, num, den in rows:
            re_, im_ = cmul(lv[ia], rv[ib])
            acc = by_den.setdefault(den, [0, 0])
            acc[0] += num * re_
            acc[1] += num * im_
        for den, (re_, im_) in by_den.items():
            re_total += Fraction(re_, den * one)
            im_total += Fraction(im_, den * one)
        return complex(float(re_total), float(im_total))

    def evaluate_many_precise(self, points: np.ndarray, dps: int = 30) -> np.ndarray:
        points = np.asarray(points, dtype=complex)
        return np.array([self._evaluate_fixed(p, dps) for p in points], dtype=complex)

    # text ------------------------------------------------------------------
    def to_json_terms(self) -> list[dict]:
        return [{"c": _coef_text(c), "e": list(exps)} for exps, c in self.terms()]

    def __repr__(self) -> str:
        return f"Polynomial({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for exps, c in self.terms():
            mono = "*".join(
                name if e == 1 else f"{name}^{e}" for name, e in zip(self.arena.names, exps) if e
            )
            coef = _coef_text(c)
            if not mono:
                parts.append(coef)
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{coef}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _coef_text(c) -> str:
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    return str(c)


_COEF_RE = re.compile(r"^-?\d+(/[1-9]\d*)?$")


def _parse_coef(text: str):
    if not isinstance(text, str) or not _COEF_RE.match(text):
        raise ParseError(f"malformed coefficient {text!r}")
    if "/" in text:
        num, den = text.split("/")
        c = Fraction(int(num), int(den))
        if c.denominator != int(den) or c.denominator == 1:
            raise ParseError(f"coefficient {text!r} is not in lowest terms")
        return c
    return int(text)


# module-level operations ----------------------------------------------------

def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


def poly_exact_div_linear(p: Polynomial, i: int | str, j: int | str) -> Polynomial:
    """Return ``q`` with ``q * (x_i - x_j) == p``.

    Raises :class:`NotDivisibleError` if the synthetic division leaves a
    remainder, which for the kernel pipeline means the numerator was not
    alternating in the pair ``(i, j)``.
    """
    return p.exact_div_linear(i, j)


def poly_eval(p: Polynomial, point: Sequence[complex], dps: int | None = None) -> complex:
    return p.evaluate(point, dps=dps)


def poly_serialize(p: Polynomial, header: bool = False) -> str:
    """Canonical compact JSON text of the term list (optionally with a vars header)."""
    terms = p.to_json_terms()
    if header:
        return json.dumps({"vars": list(p.arena.names), "terms": terms}, separators=(",", ":"))
    return json.dumps(terms, separators=(",", ":"))


def poly_from_terms(terms, arena: VariableArena) -> Polynomial:
    if not isinstance(terms, list):
        raise ParseError("term list must be a JSON array")
    out: dict[int, object] = {}
    for t in terms:
        if not isinstance(t, dict) or set(t) != {"c", "e"}:
            raise ParseError(f"malformed term {t!r}")
        c = _parse_coef(t["c"])
        if c == 0:
            raise ParseError("zero coefficient stored")
        e = t["e"]
        if not isinstance(e, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in e):
            raise ParseError(f"malformed exponent list {e!r}")
        if len(e) != len(arena):
            raise ParseError(f"exponent list {e} does not match {len(arena)} variables")
        if any(x < 0 for x in e):
            raise ParseError("negative exponent")
        key = arena.pack(e)
        if key in out:
            raise ParseError(f"duplicate monomial {e}")
        out[key] = c
    return Polynomial._from_packed(arena, out)


def poly_parse(text: str, arena: VariableArena | None = None) -> Polynomial:
    """Parse either a bare term list or ``{"vars": [...], "terms": [...]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if isinstance(data, dict):
        if set(data) != {"vars", "terms"}:
            raise ParseError("header form needs exactly 'vars' and 'terms'")
        header = VariableArena(data["vars"])
        if arena is None:
            arena = header
        elif header != arena:
            unknown = set(header.names) - set(arena.names)
            raise ParseError(f"unknown variables {sorted(unknown)}" if unknown else "variable order mismatch")
        data = data["terms"]
    if arena is None:
        raise ParseError("bare term list needs an arena")
    return poly_from_terms(data, arena)


@dataclass(frozen=True)
class RationalFunction:
    """``numerator / (pi**pi_power * denominator)`` without gcd reduction.

    The only normalization is by a scalar sign: the numerator's leading
    coefficient (denominator's, if the numerator is zero) is made positive.
    """

    numerator: Polynomial
    denominator: Polynomial
    pi_power: int = 0

    def __post_init__(self):
        if self.numerator.arena != self.denominator.arena:
            raise ArenaMismatchError("numerator and denominator arenas differ")
        if self.denominator.is_zero():
            raise ZeroDivisionError("denominator is the zero polynomial")
        lead = self.numerator if self.numerator else self.denominator
        if lead._terms[max(lead._terms)] < 0:
            object.__setattr__(self, "numerator", -self.numerator)
            object.__setattr__(self, "denominator", -self.denominator)

    @property
    def arena(self) -> VariableArena:
        return self.numerator.arena

    def partial(self, v: int | str) -> "RationalFunction":
        num, den = self.numerator, self.denominator
        return RationalFunction(
            num.partial(v) * den - num * den.partial(v), den * den, self.pi_power
        )

    def evaluate(self, point: Sequence[complex], dps: int | None = None) -> complex:
        den = self.denominator.evaluate(point, dps)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at this point")
        return self.numerator.evaluate(point, dps) / (den * np.pi ** self.pi_power)

    def equivalent(self, other: "RationalFunction") -> bool:
        """Cross-multiplied equality (no gcd needed)."""
        return (
            self.pi_power == other.pi_power
            and self.numerator * other.denominator == other.numerator * self.denominator
        )


def ratfn_partial(r: RationalFunction, v: int | str) -> RationalFunction:
    return r.partial(v)
