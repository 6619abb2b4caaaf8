"""Second-order forward-mode automatic differentiation.

A :class:`Jet` is an array of truncated Taylor polynomials of degree two in
``D`` real variables.  It carries the value, gradient and Hessian of every
entry, so arithmetic on jets yields exact (to roundoff) first and second
partial derivatives of whatever expression was evaluated.

Leading axes index the array entries; the trailing one (gradient) or two
(Hessian) axes index the differentiation variables.
"""

from __future__ import annotations

import numpy as np


class Jet:
    __slots__ = ("val", "d1", "d2")
    __array_priority__ = 100.0

    def __init__(self, val, d1, d2):
        self.val = np.asarray(val, dtype=float)
        self.d1 = np.asarray(d1, dtype=float)
        self.d2 = np.asarray(d2, dtype=float)

    # -- construction -----------------------------------------------------
    @classmethod
    def variables(cls, x) -> list["Jet"]:
        """Independent variables seeded at the point ``x``."""
        x = np.asarray(x, dtype=float)
        dim = x.size
        eye = np.eye(dim)
        zero = np.zeros((dim, dim))
        return [cls(x[i], eye[i], zero) for i in range(dim)]

    @classmethod
    def constant(cls, value, dim: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        return cls(value, np.zeros(value.shape + (dim,)), np.zeros(value.shape + (dim, dim)))

    @classmethod
    def zeros(cls, shape, dim: int) -> "Jet":
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        return cls(np.zeros(shape), np.zeros(shape + (dim,)), np.zeros(shape + (dim, dim)))

    @classmethod
    def stack(cls, items, dim: int) -> "Jet":
        jets = [it if isinstance(it, Jet) else cls.constant(it, dim) for it in items]
        return cls(
            np.stack([j.val for j in jets]),
            np.stack([j.d1 for j in jets]),
            np.stack([j.d2 for j in jets]),
        )

    @property
    def dim(self) -> int:
        return self.d1.shape[-1]

    @property
    def shape(self) -> tuple:
        return self.val.shape

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.dim)

    # -- indexing ---------------------------------------------------------
    def __getitem__(self, idx) -> "Jet":
        return Jet(self.val[idx], self.d1[idx], self.d2[idx])

    def __setitem__(self, idx, other) -> None:
        other = self._lift(other)
        self.val[idx] = other.val
        self.d1[idx] = other.d1
        self.d2[idx] = other.d2

    def sum(self, axis: int) -> "Jet":
        if axis < 0:
            axis += self.val.ndim
        return Jet(self.val.sum(axis), self.d1.sum(axis), self.d2.sum(axis))

    def transpose(self, *axes) -> "Jet":
        n = self.val.ndim
        return Jet(
            self.val.transpose(axes),
            self.d1.transpose(axes + (n,)),
            self.d2.transpose(axes + (n, n + 1)),
        )

    # -- arithmetic -------------------------------------------------------
    def __neg__(self) -> "Jet":
        return Jet(-self.val, -self.d1, -self.d2)

    def __add__(self, other) -> "Jet":
        o = self._lift(other)
        return Jet(self.val + o.val, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Jet":
        return self._lift(other) - self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return Jet(self.val * c, self.d1 * c[..., None], self.d2 * c[..., None, None])
        a, b = self, other
        va, vb = a.val[..., None], b.val[..., None]
        d1 = va * b.d1 + vb * a.d1
        outer = a.d1[..., :, None] * b.d1[..., None, :]
        d2 = va[..., None] * b.d2 + vb[..., None] * a.d2 + outer + np.swapaxes(outer, -1, -2)
        return Jet(a.val * b.val, d1, d2)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, k: int) -> "Jet":
        if k != int(k) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        v = self.val
        k = int(k)
        if k == 0:
            return Jet.constant(np.ones_like(v), self.dim)
        return self.compose(v**k, k * v ** (k - 1), k * (k - 1) * v ** max(k - 2, 0))

    def reciprocal(self) -> "Jet":
        r = 1.0 / self.val
        return self.compose(r, -r * r, 2.0 * r**3)

    def compose(self, f0, f1, f2) -> "Jet":
        """Apply a univariate function given its value and first two
        derivatives at ``self.val``."""
        f0, f1, f2 = (np.asarray(x, dtype=float) for x in (f0, f1, f2))
        d1 = f1[..., None] * self.d1
        outer = self.d1[..., :, None] * self.d1[..., None, :]
        d2 = f1[..., None, None] * self.d2 + f2[..., None, None] * outer
        return Jet(np.broadcast_to(f0, self.val.shape).copy(), d1, d2)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, dim={self.dim})"


def jet_matmul(a: Jet, b: Jet) -> Jet:
    """Matrix product of two 2-d jet arrays."""
    return (a[:, :, None] * b[None, :, :]).sum(axis=1)
