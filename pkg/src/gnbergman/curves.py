"""Polynomial holomorphic curves and the ``a+bi`` text syntax used by the CLI."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["CurveSpec", "parse_complex", "parse_point", "format_complex"]

_COMPLEX_RE = re.compile(
    r"""^\s*(?P<re>[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?
         \s*(?P<im>[+-]\s*(\d+\.?\d*|\.\d+)?([eE][+-]?\d+)?\s*[ij])?\s*$""",
    re.VERBOSE,
)


def parse_complex(text: str) -> complex:
    """Parse ``a``, ``bi``, ``a+bi`` or ``a-bi`` (``j`` accepted for ``i``)."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex number")
    # pure imaginary like "2i", "-i"
    m = re.fullmatch(r"([+-]?)(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)?[ij]", s)
    if m:
        mag = float(m.group(2)) if m.group(2) else 1.0
        return complex(0.0, -mag if m.group(1) == "-" else mag)
    m = _COMPLEX_RE.match(s)
    if not m or m.group("re") is None:
        raise ValueError(f"malformed complex number {text!r}")
    real = float(m.group("re"))
    imag = 0.0
    if m.group("im"):
        body = m.group("im")[:-1]
        sign = -1.0 if body.startswith("-") else 1.0
        digits = body[1:]
        imag = sign * (float(digits) if digits else 1.0)
    return complex(real, imag)


def parse_point(text: str) -> np.ndarray:
    """Comma-separated complex coordinates."""
    return np.array([parse_complex(t) for t in text.split(",")], dtype=complex)


def format_complex(z: complex, digits: int = 15) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.{digits}g}"
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{z.real:.{digits}g}{sign}{abs(z.imag):.{digits}g}i"


@dataclass(frozen=True)
class CurveSpec:
    """Componentwise polynomial curve ``z -> (c_1(z), ..., c_d(z))``.

    ``components[k]`` holds coefficients from low to high degree.
    ``target`` is ``"euclidean"`` (F into C^m) or ``"symmetrized"`` (G into G_n).
    """

    components: tuple[tuple[complex, ...], ...]
    target: str = "symmetrized"

    def __init__(self, components: Sequence[Sequence[complex]], target: str = "symmetrized"):
        if target not in ("euclidean", "symmetrized"):
            raise ValueError(f"unknown curve target {target!r}")
        comps = tuple(tuple(complex(c) for c in comp) or (0j,) for comp in components)
        if not comps:
            raise ValueError("a curve needs at least one component")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "target", target)

    @classmethod
    def parse(cls, text: str, target: str = "symmetrized") -> "CurveSpec":
        """``"0,1;0"`` means components ``(z, 0)``."""
        comps = [[parse_complex(c) for c in part.split(",")] for part in text.split(";")]
        return cls(comps, target)

    @property
    def dim(self) -> int:
        return len(self.components)

    def __call__(self, z: complex) -> np.ndarray:
        return np.array([np.polyval(comp[::-1], z) for comp in self.components], dtype=complex)

    def derivative(self, order: int = 1) -> "CurveSpec":
        comps = []
        for comp in self.components:
            c = np.array(comp, dtype=complex)
            for _ in range(order):
                c = c[1:] * np.arange(1, len(c)) if len(c) > 1 else np.zeros(1, dtype=complex)
            comps.append(c if len(c) else np.zeros(1, dtype=complex))
        return CurveSpec(comps, self.target)

    def taylor_derivatives(self, order: int, at: complex = 0.0) -> np.ndarray:
        """Array ``D[m-1, k] = c_k^(m)(at)`` for m = 1..order."""
        return np.array([self.derivative(m)(at) for m in range(1, order + 1)], dtype=complex)

    def is_constant(self) -> bool:
        return all(all(c == 0 for c in comp[1:]) for comp in self.components)
