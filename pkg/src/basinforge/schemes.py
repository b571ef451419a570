"""The sixteen one-step root-finding maps and a convergence-order estimator.

Every scheme is written once against a small evaluation kernel so the same
code path serves single points and whole grids (numpy arrays). A scheme
returns the next iterate; the kernel records two side conditions per entry:

* a denominator whose modulus fell below ``TINY_DENOMINATOR``;
* an intermediate point (not the starting point) that is already a root to
  working precision (``|f| <= rounding_bound``); that point becomes the next
  iterate and later sub-steps are ignored for the entry. Without this, the
  multipoint schemes would divide differences of pure rounding noise.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction

import numpy as np

from .polynomials import Polynomial, eval_with_derivatives, rounding_bound

TINY_DENOMINATOR = 1e-16
DEFAULT_KING_BETA = -0.5


class StepStatus(IntEnum):
    OK = 0
    TINY_DENOMINATOR = 1
    NON_FINITE = 2


@dataclass(frozen=True)
class StepResult:
    next: complex
    status: StepStatus


class NotEnoughIterates(ValueError):
    """The error sequence is too short to form a single order estimate."""


@dataclass(frozen=True)
class SchemeId:
    index: int
    name: str
    label: str
    claimed_order: int
    evals_per_step: int

    @property
    def efficiency_index(self) -> float:
        return self.claimed_order ** (1.0 / self.evals_per_step)

    def __str__(self):
        return self.name


class _Kernel:
    def __init__(self, p: Polynomial, x):
        self.p = p
        self.tiny = np.zeros(np.shape(x), dtype=bool)
        self.live = np.ones(np.shape(x), dtype=bool)
        self.settled = np.zeros(np.shape(x), dtype=complex)

    def f(self, z, order=0, settle=False):
        vals = eval_with_derivatives(self.p, z, order)
        if settle:
            self._settle(z, vals[0])
        return vals

    def _settle(self, z, fz):
        hit = self.live & (np.abs(fz) <= rounding_bound(self.p, z))
        if hit.any():
            self.settled[hit] = z[hit]
            self.live &= ~hit

    def const(self, value):
        return float(value)

    def div(self, a, b):
        b = np.asarray(b)
        small = (b.real * b.real + b.imag * b.imag) < TINY_DENOMINATOR**2
        self.tiny |= self.live & small
        return a / b

    def inverse_interpolation(self, x, fx, dfx, pts, vals):
        """Value at 0 of the polynomial R with R(f(x)) = x, R'(f(x)) = 1/f'(x)
        and R(vals[k]) = pts[k]; Newton divided differences on the double node."""
        nodes = [fx, fx] + list(vals)
        values = [x] + list(pts)
        first = [self.div(1.0, dfx)]
        first += [self.div(values[i + 1] - values[i], nodes[i + 2] - nodes[i + 1])
                  for i in range(len(pts))]
        coeffs = [x]
        level = first
        order = 1
        while level:
            coeffs.append(level[0])
            order += 1
            level = [self.div(level[i + 1] - level[i], nodes[i + order] - nodes[i])
                     for i in range(len(level) - 1)]
        # R(0) = sum_k R[t0..tk] * prod_{m<k} (0 - t_m)
        result = coeffs[0]
        prod = 1.0
        for k in range(1, len(coeffs)):
            prod = prod * (-nodes[k - 1])
            result = result + coeffs[k] * prod
        return result


# --- the update maps -------------------------------------------------------
# Each takes (kernel, x, params) and returns the next iterate.


def _newton(k, x, prm):
    f, d1 = k.f(x, 1)
    return x - k.div(f, d1)


def _halley(k, x, prm):
    f, d1, d2 = k.f(x, 2)
    return x - k.div(2 * f * d1, 2 * d1 * d1 - f * d2)


def _chebyshev(k, x, prm):
    f, d1, d2 = k.f(x, 2)
    u = k.div(f, d1)
    L = k.div(u * d2, d1)
    return x - u * (1 + L / 2)


def _super_halley(k, x, prm):
    f, d1, d2 = k.f(x, 2)
    u = k.div(f, d1)
    L = k.div(u * d2, d1)
    return x - u * (1 + k.div(L, 2 * (1 - L)))


def _modified_super_halley(k, x, prm):
    # super Halley with f'' replaced by a divided difference of f' at x - 2u/3
    f, d1 = k.f(x, 1)
    u = k.div(f, d1)
    _, dy = k.f(x - 2 * u / 3, 1)
    L = k.div(1.5 * (d1 - dy), d1)
    return x - u * (1 + k.div(L, 2 * (1 - L)))


def _king_step(k, x, f, d1, prm):
    beta = prm["king_beta"]
    y = x - k.div(f, d1)
    (fy,) = k.f(y, 0, settle=True)
    z = y - k.div(fy, d1) * k.div(f + beta * fy, f + (beta - 2) * fy)
    return y, fy, z


def _king(k, x, prm):
    f, d1 = k.f(x, 1)
    return _king_step(k, x, f, d1, prm)[2]


def _jarratt(k, x, prm):
    f, d1 = k.f(x, 1)
    u = k.div(f, d1)
    _, dy = k.f(x - 2 * u / 3, 1)
    return x - 0.5 * k.div(3 * dy + d1, 3 * dy - d1) * u


def _kung_traub(k, x, prm):
    f, d1 = k.f(x, 1)
    y = x - k.div(f, d1)
    (fy,) = k.f(y, 0, settle=True)
    diff = f - fy
    return y - k.div(f * f * fy, d1 * diff * diff)


def _maheshwari(k, x, prm):
    f, d1 = k.f(x, 1)
    y = x - k.div(f, d1)
    (fy,) = k.f(y, 0, settle=True)
    return x - k.div(k.div(fy * fy, f) - k.div(f * f, fy - f), d1)


# fifth-order member of Murakami's family; exact rationals so the map can also
# be evaluated in extended precision
MURAKAMI_COEFFICIENTS = dict(
    a1=Fraction(3, 10), a2=Fraction(-1, 2), a3=Fraction(2, 3),
    b1=Fraction(-15, 32), b2=Fraction(75, 32), beta=Fraction(1, 2), gamma=Fraction(0),
)


def _murakami(k, x, prm):
    c = {key: k.const(v) for key, v in MURAKAMI_COEFFICIENTS.items()}
    f, d1 = k.f(x, 1)
    w1 = k.div(f, d1)
    _, d_w = k.f(x - w1, 1)
    w2 = k.div(f, d_w)
    _, d_y = k.f(x - c["beta"] * w1 - c["gamma"] * w2, 1)
    w3 = k.div(f, d_y)
    psi = k.div(f, c["b1"] * d1 + c["b2"] * d_w)
    return x - c["a1"] * w1 - c["a2"] * w2 - c["a3"] * w3 - psi


def _neta6(k, x, prm):
    f, d1 = k.f(x, 1)
    _, fy, z = _king_step(k, x, f, d1, prm)
    (fz,) = k.f(z, 0, settle=True)
    return z - k.div(fz, d1) * k.div(f - fy, f - 3 * fy)


def _chun_neta(k, x, prm):
    f, d1 = k.f(x, 1)
    y = x - k.div(f, d1)
    (fy,) = k.f(y, 0, settle=True)
    t = k.div(fy, f)
    z = y - k.div(fy, d1 * (1 - t) ** 2)
    (fz,) = k.f(z, 0, settle=True)
    s = k.div(fz, f)
    return z - k.div(fz, d1 * (1 - t - s) ** 2)


def _neta_johnson(k, x, prm):
    # Jarratt step followed by a Newton correction
    z = _jarratt(k, x, prm)
    fz, dz = k.f(z, 1, settle=True)
    return z - k.div(fz, dz)


def _neta_petkovic(k, x, prm):
    f, d1 = k.f(x, 1)
    y, fy, z = _king_step(k, x, f, d1, prm)
    (fz,) = k.f(z, 0, settle=True)
    return k.inverse_interpolation(x, f, d1, [y, z], [fy, fz])


def _neta_multipoint(k, x, kung_traub_second):
    f, d1 = k.f(x, 1)
    y = x - k.div(f, d1)
    (fy,) = k.f(y, 0, settle=True)
    if kung_traub_second:
        z = k.inverse_interpolation(x, f, d1, [y], [fy])
    else:
        z = y - k.div(fy, d1)
    (fz,) = k.f(z, 0, settle=True)
    w = k.inverse_interpolation(x, f, d1, [y, z], [fy, fz])
    (fw,) = k.f(w, 0, settle=True)
    return k.inverse_interpolation(x, f, d1, [y, z, w], [fy, fz, fw])


def _neta14(k, x, prm):
    return _neta_multipoint(k, x, kung_traub_second=False)


def _neta16(k, x, prm):
    return _neta_multipoint(k, x, kung_traub_second=True)


_TABLE = [
    # index, name, label, order, evaluations per step, update map
    (1, "newton", "Newton-Raphson", 2, 2, _newton),
    (2, "halley", "Halley", 3, 3, _halley),
    (3, "chebyshev", "Chebyshev", 3, 3, _chebyshev),
    (4, "super-halley", "super Halley", 4, 3, _super_halley),
    (5, "modified-super-halley", "modified super Halley", 4, 3, _modified_super_halley),
    (6, "king", "King", 4, 3, _king),
    (7, "jarratt", "Jarratt", 4, 3, _jarratt),
    (8, "kung-traub", "Kung-Traub", 4, 3, _kung_traub),
    (9, "maheshwari", "Maheshwari", 4, 3, _maheshwari),
    (10, "murakami", "Murakami", 5, 4, _murakami),
    (11, "neta6", "Neta (6th order)", 6, 4, _neta6),
    (12, "chun-neta", "Chun-Neta", 6, 4, _chun_neta),
    (13, "neta-johnson", "Neta-Johnson", 8, 5, _neta_johnson),
    (14, "neta-petkovic", "Neta-Petkovic", 8, 4, _neta_petkovic),
    (15, "neta14", "Neta (14th order)", 14, 5, _neta14),
    (16, "neta16", "Neta (16th order)", 16, 5, _neta16),
]

SCHEMES: tuple[SchemeId, ...] = tuple(SchemeId(i, n, lab, o, e) for i, n, lab, o, e, _ in _TABLE)
_MAPS = {i: fn for i, _, _, _, _, fn in _TABLE}
_ALIASES = {
    "newtonraphson": 1,
    "neta": 11,
    "neta6th": 11,
    "neta14th": 15,
    "neta16th": 16,
}


def _squash(name: str) -> str:
    return re.sub(r"[^a-z0-9]", "", name.lower())


def get_scheme(key) -> SchemeId:
    """Look a scheme up by index (1-16), SchemeId, or case-insensitive name."""
    if isinstance(key, SchemeId):
        return key
    if isinstance(key, (int, np.integer)) or (isinstance(key, str) and key.strip().isdigit()):
        idx = int(key)
        if not 1 <= idx <= len(SCHEMES):
            raise KeyError(f"no scheme with index {idx}")
        return SCHEMES[idx - 1]
    wanted = _squash(str(key))
    for s in SCHEMES:
        if _squash(s.name) == wanted:
            return s
    if wanted in _ALIASES:
        return SCHEMES[_ALIASES[wanted] - 1]
    raise KeyError(f"unknown scheme {key!r}")


def step_array(scheme, z, p: Polynomial, king_beta: float = DEFAULT_KING_BETA):
    """Apply one iteration to every entry of ``z``.

    Returns ``(next, status)`` arrays; ``status`` holds ``StepStatus`` codes.
    """
    s = get_scheme(scheme)
    x = np.asarray(z, dtype=complex)
    k = _Kernel(p, x)
    with np.errstate(all="ignore"):
        nxt = _MAPS[s.index](k, x, {"king_beta": king_beta})
        nxt = np.where(k.live, nxt, k.settled)
        status = np.full(x.shape, StepStatus.OK, dtype=np.uint8)
        status[~np.isfinite(nxt)] = StepStatus.NON_FINITE
        status[k.tiny] = StepStatus.TINY_DENOMINATOR
    return nxt, status


def step(scheme, z: complex, p: Polynomial, king_beta: float = DEFAULT_KING_BETA) -> StepResult:
    """One iteration from a single point."""
    if p.degree < 1:
        raise ValueError("polynomial must have degree >= 1")
    nxt, status = step_array(scheme, np.array([z], dtype=complex), p, king_beta)
    return StepResult(complex(nxt[0]), StepStatus(int(status[0])))


def iterate_errors(scheme, p: Polynomial, z0: complex, root: complex | None = None,
                   max_steps: int = 50, king_beta: float = DEFAULT_KING_BETA):
    """Iterate from ``z0`` and return ``|z_n - r|`` for n = 0, 1, ...

    Stops when the iterate stops changing or a step fails. Without ``root``
    the final iterate stands in for the root.
    """
    zs = [complex(z0)]
    for _ in range(max_steps):
        res = step(scheme, zs[-1], p, king_beta)
        if res.status != StepStatus.OK:
            break
        zs.append(res.next)
        if zs[-1] == zs[-2]:
            break
    r = zs[-1] if root is None else complex(root)
    return [abs(z - r) for z in zs]


def order_from_errors(errors, floor: float = 1e-14) -> float:
    """Average COC over the last usable triples ``(e_{n-1}, e_n, e_{n+1})``.

    A triple is usable when its errors are strictly decreasing, below 1 and
    above ``floor`` (near the rounding floor of double precision). The
    estimate averages the last two usable triples, or takes the only one.
    """
    rhos = []
    for n in range(1, len(errors) - 1):
        a, b, c = errors[n - 1], errors[n], errors[n + 1]
        if min(a, b, c) <= floor or not (1 > a > b > c):
            continue
        rhos.append(math.log(c / b) / math.log(b / a))
    if not rhos:
        raise NotEnoughIterates("no usable error triple")
    tail = rhos[-2:]
    return sum(tail) / len(tail)


def computational_order(scheme, p: Polynomial, z0: complex, root: complex | None = None,
                        king_beta: float = DEFAULT_KING_BETA) -> float:
    """Numerical order of convergence of ``scheme`` started at ``z0``."""
    return order_from_errors(iterate_errors(scheme, p, z0, root, king_beta=king_beta))
