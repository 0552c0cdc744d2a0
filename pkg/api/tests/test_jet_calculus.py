"""
Jet2 arithmetic against sympy and the finite-difference oracle.
"""

import math

import numpy as np
import pytest
import sympy as sp

from services.errors import ArgumentError, EvaluationError
from services.jet_calculus import (
    ElementaryFunction, Jet2, fd_oracle, jet_exp, jet_log, jet_point, jet_pow, jet_sin, jet_sqrt,
    jet_unary, jet_var, pack_symmetric, unpack_symmetric,
)

X = sp.symbols("x1:5")
POINT = np.array([0.3, -0.7, 0.45, 1.1])


def _sympy_jet(expr):
    subs = dict(zip(X, POINT))
    value = float(expr.subs(subs))
    grad = np.array([float(sp.diff(expr, v).subs(subs)) for v in X])
    hess = np.array([[float(sp.diff(expr, a, b).subs(subs)) for b in X] for a in X])
    return value, grad, hess


def _assert_jet(jet: Jet2, expected, tol=1e-12):
    value, grad, hess = expected
    assert jet.value == pytest.approx(value, abs=tol)
    np.testing.assert_allclose(jet.grad, grad, atol=tol)
    np.testing.assert_allclose(jet.hessian, hess, atol=tol)


def test_pack_unpack_is_symmetric(rng):
    m = rng.normal(size=(4, 4))
    m = m + m.T
    np.testing.assert_array_equal(unpack_symmetric(pack_symmetric(m)), m)


def test_products_and_quotients_match_sympy():
    x1, x2, x3, x4 = jet_point(POINT)
    jet = x1 * x2 * x3 - x4 / (1.0 + x1 * x1) + 3.0
    expr = X[0] * X[1] * X[2] - X[3] / (1 + X[0] ** 2) + 3
    _assert_jet(jet, _sympy_jet(expr))


@pytest.mark.parametrize("name", ["sin", "cos", "exp", "tanh"])
def test_elementary_functions_match_sympy(name):
    x1, x2, x3, x4 = jet_point(POINT)
    f = ElementaryFunction(name)
    jet = jet_unary(f, x1 * x4 + x2 * x3)
    expr = getattr(sp, name)(X[0] * X[3] + X[1] * X[2])
    _assert_jet(jet, _sympy_jet(expr))


def test_log_sqrt_and_rational_powers():
    x1, x2, x3, x4 = jet_point(POINT)
    r2 = x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4
    jet = jet_log(r2) + jet_sqrt(1.0 + r2) * jet_pow(r2, 1.5) - jet_pow(r2, -2)
    r2s = sum(v ** 2 for v in X)
    expr = sp.log(r2s) + sp.sqrt(1 + r2s) * r2s ** sp.Rational(3, 2) - r2s ** -2
    _assert_jet(jet, _sympy_jet(expr), tol=1e-10)


def test_variable_exponent_goes_through_exp_log():
    x1, x2, _, x4 = jet_point(POINT)
    jet = (x4 * x4) ** (x1 + x2)
    expr = (X[3] ** 2) ** (X[0] + X[1])
    _assert_jet(jet, _sympy_jet(expr), tol=1e-11)


def test_jet_agrees_with_fd_oracle():
    def field(x):
        return math.sin(x[0] * x[1]) * math.exp(0.5 * x[2]) / (2.0 + x[3] ** 2)

    x1, x2, x3, x4 = jet_point(POINT)
    jet = jet_sin(x1 * x2) * jet_exp(0.5 * x3) / (2.0 + x4 * x4)
    oracle = fd_oracle(field, POINT)
    assert jet.value == pytest.approx(oracle.value, abs=1e-14)
    np.testing.assert_allclose(jet.grad, oracle.grad, atol=1e-9)
    np.testing.assert_allclose(jet.hessian, oracle.hessian, atol=1e-6)


def test_jet_var_rejects_bad_index():
    with pytest.raises(ArgumentError):
        jet_var(4, 0.0)


@pytest.mark.parametrize("make", [
    lambda j: jet_log(j - 1.0),
    lambda j: jet_sqrt(-j),
    lambda j: 1.0 / (j - 1.0),
    lambda j: jet_pow(j - 1.0, 0.5),
])
def test_domain_failures_raise_evaluation_error(make):
    with pytest.raises(EvaluationError):
        make(Jet2(1.0))


def test_fd_oracle_rejects_non_positive_step():
    with pytest.raises(ArgumentError):
        fd_oracle(lambda x: 0.0, POINT, h=0.0)


def _random_jet(rng):
    return Jet2(rng.normal(), rng.normal(size=4), rng.normal(size=10))


def _assert_same(a: Jet2, b: Jet2):
    assert a.value == pytest.approx(b.value, rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(a.grad, b.grad, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(a.hess, b.hess, rtol=1e-12, atol=1e-12)


def test_product_is_commutative_and_associative(rng):
    for _ in range(20):
        a, b, c = _random_jet(rng), _random_jet(rng), _random_jet(rng)
        _assert_same(a * b, b * a)
        _assert_same((a * b) * c, a * (b * c))
        _assert_same((a + b) + c, a + (b + c))
        _assert_same(a * (b + c), a * b + a * c)
