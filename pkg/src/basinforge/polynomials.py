"""Complex polynomials, Horner evaluation with derivatives, and root catalogs."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

DEFAULT_MATCH_TOLERANCE = 1e-15
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial with complex coefficients, lowest degree first."""

    coefficients: tuple[complex, ...]
    name: str = ""

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("a polynomial needs at least one coefficient")
        if coeffs[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in coeffs):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)
        if not self.name:
            object.__setattr__(self, "name", format_polynomial(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def has_real_coefficients(self) -> bool:
        return all(c.imag == 0 for c in self.coefficients)

    def __call__(self, z):
        return eval_with_derivatives(self, z, 0)[0]


@dataclass(frozen=True)
class RootCatalog:
    """Known roots of a polynomial; each one is an attractor label."""

    roots: tuple[complex, ...]
    match_tolerance: float = DEFAULT_MATCH_TOLERANCE

    def __post_init__(self):
        roots = tuple(complex(r) for r in self.roots)
        if not roots:
            raise ValueError("root catalog is empty")
        if not self.match_tolerance > 0:
            raise ValueError("match_tolerance must be positive")
        for a in range(len(roots)):
            for b in range(a + 1, len(roots)):
                if abs(roots[a] - roots[b]) <= 10 * self.match_tolerance:
                    raise ValueError(f"roots {a} and {b} are not distinct")
        object.__setattr__(self, "roots", roots)

    def __len__(self):
        return len(self.roots)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.roots, dtype=complex)

    def check(self, p: Polynomial, residual: float = 1e-12) -> None:
        """Raise ValueError if any root is not a root of ``p``."""
        values = np.abs(eval_with_derivatives(p, self.as_array(), 0)[0])
        bad = np.flatnonzero(values >= residual)
        if bad.size:
            raise ValueError(f"|f(r)| >= {residual:g} for catalog roots {bad.tolist()}")

    def conjugate_permutation(self, tol: float = 1e-12) -> list[int] | None:
        """Index of conj(r) for each root r, or None if the set is not closed."""
        arr = self.as_array()
        perm = []
        for r in arr:
            d = np.abs(arr - np.conj(r))
            k = int(np.argmin(d))
            if d[k] > tol:
                return None
            perm.append(k)
        return perm


def eval_with_derivatives(p: Polynomial, z, order: int = 1):
    """Return ``[f(z), f'(z), ..., f^(order)(z)]`` using one synthetic-division pass.

    ``z`` may be a scalar or an array; each entry of the result has the same
    shape. ``order`` is limited to 0..3.
    """
    if not 0 <= order <= 3:
        raise ValueError("order must be in [0, 3]")
    coeffs = p.coefficients
    z = np.asarray(z, dtype=complex)
    acc = [np.full(z.shape, coeffs[-1], dtype=complex)]
    acc += [np.zeros(z.shape, dtype=complex) for _ in range(order)]
    for c in coeffs[-2::-1]:
        # update higher accumulators first so each sees the previous pass
        for k in range(order, 0, -1):
            acc[k] = acc[k] * z + acc[k - 1]
        acc[0] = acc[0] * z + c
    # Taylor coefficients -> derivatives
    out = [acc[k] * math.factorial(k) for k in range(order + 1)]
    if out[0].ndim == 0:
        return [complex(v) for v in out]
    return out


def rounding_bound(p: Polynomial, z) -> np.ndarray:
    """A-priori bound on the rounding error of Horner's rule at ``z``.

    ``|f(z)|`` below this value means ``z`` is a root to working precision.
    """
    absz = np.abs(np.asarray(z, dtype=complex))
    acc = np.full(absz.shape, abs(p.coefficients[-1]))
    for c in p.coefficients[-2::-1]:
        acc = acc * absz + abs(c)
    return 2 * max(p.degree, 1) * _EPS * acc


def unity_roots(n: int, match_tolerance: float = DEFAULT_MATCH_TOLERANCE) -> RootCatalog:
    """The n-th roots of unity ``exp(2 pi i k / n)``, k = 0..n-1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    roots = []
    for k in range(n):
        # exact values on the axes keep conjugate pairs bit-for-bit symmetric
        if 4 * k % n == 0:
            roots.append([1, 1j, -1, -1j][4 * k // n])
            continue
        theta = 2 * math.pi * k / n
        if 2 * k > n:
            theta = -2 * math.pi * (n - k) / n
        roots.append(complex(math.cos(theta), math.sin(theta)))
    return RootCatalog(tuple(roots), match_tolerance)


def unity_polynomial(n: int) -> Polynomial:
    """``z**n - 1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Polynomial((-1,) + (0,) * (n - 1) + (1,), name=f"z^{n}-1")


_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COEFF_RE = re.compile(rf"^\s*({_NUM})\s*(?:([+-])\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*[ij])?\s*$")


def parse_complex(text: str) -> complex:
    """Parse ``re[+|-]imi`` (``1+0i``, ``-0.5-0.866i``, ``2``)."""
    m = _COEFF_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse complex number {text!r}")
    re_part = float(m.group(1))
    if m.group(2) is None:
        return complex(re_part, 0.0)
    im = float(m.group(3)) if m.group(3) else 1.0
    return complex(re_part, -im if m.group(2) == "-" else im)


def parse_polynomial(text: str) -> Polynomial:
    """Parse comma-separated coefficients, lowest degree first.

    >>> parse_polynomial("-1+0i,0+0i,0+0i,1+0i").degree
    3
    """
    parts = [s for s in text.split(",")]
    if not parts or any(not s.strip() for s in parts):
        raise ValueError(f"empty coefficient in {text!r}")
    return Polynomial(tuple(parse_complex(s) for s in parts))


def parse_root_catalog(text: str, match_tolerance: float = DEFAULT_MATCH_TOLERANCE) -> RootCatalog:
    """Roots one per line (or comma separated); ``#`` starts a comment."""
    items = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            items += [s for s in line.split(",") if s.strip()]
    return RootCatalog(tuple(parse_complex(s) for s in items), match_tolerance)


def format_complex(c: complex) -> str:
    sign = "-" if math.copysign(1.0, c.imag) < 0 else "+"
    return f"{c.real:.17g}{sign}{abs(c.imag):.17g}i"


def format_polynomial(coeffs) -> str:
    return ",".join(format_complex(complex(c)) for c in coeffs)
