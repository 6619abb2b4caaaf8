import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpkahler.jets import Jet, jet_matmul


def fd_grad_hess(fun, x, h=1e-3):
    """4th-order central differences."""
    x = np.asarray(x, dtype=float)
    d = x.size
    e = np.eye(d)
    c = [1 / 12, -8 / 12, 8 / 12, -1 / 12]
    s = [-2, -1, 1, 2]
    grad = np.array([sum(ck * fun(x + sk * h * e[i]) for ck, sk in zip(c, s)) / h for i in range(d)])
    hess = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            def gi(y):
                return sum(ck * fun(y + sk * h * e[i]) for ck, sk in zip(c, s)) / h
            hess[i, j] = sum(ck * gi(x + sk * h * e[j]) for ck, sk in zip(c, s)) / h
    return grad, hess


def rational(x, y, z):
    return x * x * y / (1.0 + x * x + y * y) - 3.0 * z * y + 1.0 / (2.0 + z * z) ** 2


def test_variables_seed_identity():
    xs = Jet.variables([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(np.stack([x.d1 for x in xs]), np.eye(3))
    assert all(np.all(x.d2 == 0) for x in xs)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_rational_expression_matches_finite_differences(x):
    j = rational(*Jet.variables(x))
    grad, hess = fd_grad_hess(lambda p: rational(*p), x)
    assert j.val == pytest.approx(rational(*x), rel=1e-14, abs=1e-14)
    np.testing.assert_allclose(j.d1, grad, atol=1e-8)
    np.testing.assert_allclose(j.d2, hess, atol=1e-6)


def test_hessian_is_symmetric():
    j = rational(*Jet.variables([0.3, -0.7, 1.1]))
    np.testing.assert_allclose(j.d2, j.d2.T, atol=1e-15)


def test_compose_is_chain_rule():
    (x, y) = Jet.variables([0.4, 0.9])
    u = x * y
    s = u.compose(np.sin(u.val), np.cos(u.val), -np.sin(u.val))
    grad, hess = fd_grad_hess(lambda p: np.sin(p[0] * p[1]), [0.4, 0.9])
    np.testing.assert_allclose(s.d1, grad, atol=1e-9)
    np.testing.assert_allclose(s.d2, hess, atol=1e-7)


def test_array_jets_broadcast_and_matmul():
    x, y = Jet.variables([0.5, -1.5])
    M = Jet.zeros((2, 2), 2)
    M[0, 0] = x
    M[0, 1] = x * y
    M[1, 0] = 1.0
    M[1, 1] = y * y
    P = jet_matmul(M, M)
    def val(p):
        a, b = p
        m = np.array([[a, a * b], [1.0, b * b]])
        return m @ m
    for i in range(2):
        for k in range(2):
            g, H = fd_grad_hess(lambda p: val(p)[i, k], [0.5, -1.5])
            np.testing.assert_allclose(P[i, k].d1, g, atol=1e-8)
            np.testing.assert_allclose(P[i, k].d2, H, atol=1e-6)


def test_integer_power_and_division():
    (x,) = Jet.variables([1.3])
    p = x**3 / (x + 1.0)
    f = lambda v: v**3 / (v + 1.0)
    g, H = fd_grad_hess(lambda q: f(q[0]), [1.3])
    np.testing.assert_allclose(p.d1, g, atol=1e-9)
    np.testing.assert_allclose(p.d2, H, atol=1e-7)
    with pytest.raises(ValueError):
        x**-1
