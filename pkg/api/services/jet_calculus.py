"""
twistorkit jet calculus
Second-order forward-mode differentiation over the 4 chart variables.

A Jet2 carries a scalar together with its gradient and Hessian. The Hessian
is stored packed (10 upper-triangular entries), so symmetry is structural.
Everything downstream that needs derivatives of metric components is built
on this carrier.
"""

import math
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from services.errors import ArgumentError, EvaluationError

DIM = 4
PACKED = DIM * (DIM + 1) // 2
_ROWS, _COLS = np.triu_indices(DIM)
# packed index of (i, j) for any order of i, j
_PACK_INDEX = np.zeros((DIM, DIM), dtype=int)
for _k, (_i, _j) in enumerate(zip(_ROWS, _COLS)):
    _PACK_INDEX[_i, _j] = _k
    _PACK_INDEX[_j, _i] = _k

Number = Union[int, float]


def pack_symmetric(matrix: np.ndarray) -> np.ndarray:
    """Packed upper triangle of the symmetric part of a 4x4 matrix."""
    sym = 0.5 * (np.asarray(matrix, dtype=float) + np.asarray(matrix, dtype=float).T)
    return sym[_ROWS, _COLS].copy()


def unpack_symmetric(packed: np.ndarray) -> np.ndarray:
    """Full 4x4 symmetric matrix from its packed upper triangle."""
    return np.asarray(packed, dtype=float)[_PACK_INDEX]


def _sym_outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # packed (a⊗b + b⊗a)
    return a[_ROWS] * b[_COLS] + a[_COLS] * b[_ROWS]


def _outer(a: np.ndarray) -> np.ndarray:
    return a[_ROWS] * a[_COLS]


class ElementaryFunction(str, Enum):
    """Elementary functions the jet layer (and the expression language) knows."""
    SIN = "sin"
    COS = "cos"
    EXP = "exp"
    LOG = "log"
    SQRT = "sqrt"
    TANH = "tanh"
    POW = "pow"
    RECIPROCAL = "reciprocal"


class Jet2:
    """Value, gradient and packed Hessian of a scalar in 4 variables."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: Optional[np.ndarray] = None,
                 hess: Optional[np.ndarray] = None):
        self.value = float(value)
        self.grad = np.zeros(DIM) if grad is None else np.asarray(grad, dtype=float)
        self.hess = np.zeros(PACKED) if hess is None else np.asarray(hess, dtype=float)

    @classmethod
    def constant(cls, value: Number) -> "Jet2":
        return cls(value)

    @classmethod
    def from_full(cls, value: float, grad: Sequence[float], hessian: np.ndarray) -> "Jet2":
        return cls(value, np.asarray(grad, dtype=float), pack_symmetric(hessian))

    @property
    def hessian(self) -> np.ndarray:
        return unpack_symmetric(self.hess)

    def copy(self) -> "Jet2":
        return Jet2(self.value, self.grad.copy(), self.hess.copy())

    # ── arithmetic ──────────────────────────────────────────────

    def __add__(self, other: Union["Jet2", Number]) -> "Jet2":
        if isinstance(other, Jet2):
            return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)
        return Jet2(self.value + other, self.grad.copy(), self.hess.copy())

    __radd__ = __add__

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other: Union["Jet2", Number]) -> "Jet2":
        return self + (-other)

    def __rsub__(self, other: Number) -> "Jet2":
        return (-self) + other

    def __mul__(self, other: Union["Jet2", Number]) -> "Jet2":
        if isinstance(other, Jet2):
            return jet_mul(self, other)
        return Jet2(self.value * other, self.grad * other, self.hess * other)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["Jet2", Number]) -> "Jet2":
        if isinstance(other, Jet2):
            return jet_mul(self, jet_unary(ElementaryFunction.RECIPROCAL, other))
        if other == 0:
            raise EvaluationError("division by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other: Number) -> "Jet2":
        return jet_unary(ElementaryFunction.RECIPROCAL, self) * other

    def __pow__(self, exponent: Union["Jet2", Number]) -> "Jet2":
        if isinstance(exponent, Jet2):
            if np.any(exponent.grad) or np.any(exponent.hess):
                return jet_unary(ElementaryFunction.EXP,
                                 exponent * jet_unary(ElementaryFunction.LOG, self))
            exponent = exponent.value
        return jet_pow(self, exponent)

    def __rpow__(self, base: Number) -> "Jet2":
        if base <= 0:
            raise EvaluationError("non-positive base with variable exponent", base=base)
        return jet_unary(ElementaryFunction.EXP, self * math.log(base))

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad.tolist()!r})"


def jet_var(index: int, x: float) -> Jet2:
    """Coordinate jet: value x, gradient the index-th basis vector."""
    if not isinstance(index, (int, np.integer)) or not 0 <= index < DIM:
        raise ArgumentError(f"jet variable index {index} out of range 0..{DIM - 1}", index=index)
    grad = np.zeros(DIM)
    grad[index] = 1.0
    return Jet2(x, grad)


def jet_point(x: Sequence[float]) -> list:
    """The four coordinate jets at a point."""
    return [jet_var(i, float(x[i])) for i in range(DIM)]


def jet_mul(a: Jet2, b: Jet2) -> Jet2:
    """Leibniz rule to second order."""
    return Jet2(
        a.value * b.value,
        a.value * b.grad + b.value * a.grad,
        a.value * b.hess + b.value * a.hess + _sym_outer(a.grad, b.grad),
    )


def _chain(a: Jet2, f0: float, f1: float, f2: float) -> Jet2:
    return Jet2(f0, f1 * a.grad, f1 * a.hess + f2 * _outer(a.grad))


def jet_unary(f: ElementaryFunction, a: Jet2, exponent: Optional[Number] = None) -> Jet2:
    """Chain rule to second order for an elementary function."""
    v = a.value
    if f is ElementaryFunction.SIN:
        s, c = math.sin(v), math.cos(v)
        return _chain(a, s, c, -s)
    if f is ElementaryFunction.COS:
        s, c = math.sin(v), math.cos(v)
        return _chain(a, c, -s, -c)
    if f is ElementaryFunction.EXP:
        e = math.exp(v)
        return _chain(a, e, e, e)
    if f is ElementaryFunction.LOG:
        if v <= 0:
            raise EvaluationError(f"log of non-positive value {v}", value=v)
        return _chain(a, math.log(v), 1.0 / v, -1.0 / (v * v))
    if f is ElementaryFunction.SQRT:
        if v <= 0:
            raise EvaluationError(f"sqrt of non-positive value {v}", value=v)
        r = math.sqrt(v)
        return _chain(a, r, 0.5 / r, -0.25 / (r * v))
    if f is ElementaryFunction.TANH:
        t = math.tanh(v)
        d = 1.0 - t * t
        return _chain(a, t, d, -2.0 * t * d)
    if f is ElementaryFunction.RECIPROCAL:
        if v == 0:
            raise EvaluationError("reciprocal of zero")
        inv = 1.0 / v
        return _chain(a, inv, -inv * inv, 2.0 * inv * inv * inv)
    if f is ElementaryFunction.POW:
        if exponent is None:
            raise ArgumentError("pow needs an exponent")
        return jet_pow(a, exponent)
    raise ArgumentError(f"unsupported elementary function {f}")


def jet_pow(a: Jet2, exponent: Number) -> Jet2:
    """a**p for rational p; non-integer p needs a positive base."""
    p = Fraction(exponent).limit_denominator(10**6) if not isinstance(exponent, int) else exponent
    v = a.value
    if isinstance(p, Fraction) and p.denominator == 1:
        p = int(p)
    if isinstance(p, int):
        if p == 0:
            return Jet2(1.0)
        if p == 1:
            return a.copy()
        if p == 2:
            return jet_mul(a, a)
        if p < 0 and v == 0:
            raise EvaluationError("negative power of zero")
        return _chain(a, v ** p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))
    if v <= 0:
        raise EvaluationError(f"non-integer power of non-positive value {v}", value=v)
    q = float(exponent)
    return _chain(a, v ** q, q * v ** (q - 1.0), q * (q - 1.0) * v ** (q - 2.0))


def jet_sin(a: Jet2) -> Jet2:
    return jet_unary(ElementaryFunction.SIN, a)


def jet_cos(a: Jet2) -> Jet2:
    return jet_unary(ElementaryFunction.COS, a)


def jet_exp(a: Jet2) -> Jet2:
    return jet_unary(ElementaryFunction.EXP, a)


def jet_log(a: Jet2) -> Jet2:
    return jet_unary(ElementaryFunction.LOG, a)


def jet_sqrt(a: Jet2) -> Jet2:
    return jet_unary(ElementaryFunction.SQRT, a)


def jet_sum(jets: Sequence[Jet2]) -> Jet2:
    total = Jet2(0.0)
    for j in jets:
        total = total + j
    return total


# ─────────────────────────────────────────────────────────────
# Finite-difference oracle
# ─────────────────────────────────────────────────────────────

def _gradient_fd(f: Callable[[np.ndarray], float], x: np.ndarray, h: float) -> np.ndarray:
    grad = np.zeros(DIM)
    for i in range(DIM):
        e = np.zeros(DIM)
        e[i] = h
        grad[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return grad


def _hessian_fd(f: Callable[[np.ndarray], float], x: np.ndarray, h: float, f0: float) -> np.ndarray:
    hess = np.zeros((DIM, DIM))
    for i in range(DIM):
        ei = np.zeros(DIM)
        ei[i] = h
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h * h)
        for j in range(i + 1, DIM):
            ej = np.zeros(DIM)
            ej[j] = h
            hess[i, j] = hess[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h * h)
    return hess


def fd_oracle(f: Callable[[np.ndarray], float], x: Sequence[float], h: float = 1e-4,
              hess_step: Optional[float] = None) -> Jet2:
    """Central-difference Jet2 of a scalar field, one Richardson level.

    The gradient uses step h, the Hessian step hess_step (default 10·h).
    Domain failures of f on the stencil surface as EvaluationError.
    """
    if h <= 0:
        raise ArgumentError("finite-difference step must be positive", h=h)
    x = np.asarray(x, dtype=float)
    hh = 10.0 * h if hess_step is None else hess_step

    def safe(y: np.ndarray) -> float:
        try:
            return float(f(y))
        except EvaluationError:
            raise
        except Exception as exc:  # noqa: BLE001 - any evaluator failure is a stencil failure
            raise EvaluationError(f"stencil point outside the field's domain: {exc}",
                                  point=y) from exc

    f0 = safe(x)
    g_h = _gradient_fd(safe, x, h)
    g_h2 = _gradient_fd(safe, x, h / 2.0)
    grad = (4.0 * g_h2 - g_h) / 3.0
    H_h = _hessian_fd(safe, x, hh, f0)
    H_h2 = _hessian_fd(safe, x, hh / 2.0, f0)
    hess = (4.0 * H_h2 - H_h) / 3.0
    return Jet2.from_full(f0, grad, hess)
