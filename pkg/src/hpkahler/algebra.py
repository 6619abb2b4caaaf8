"""Pointwise Kahler curvature algebra.

Tensors are plain numpy arrays of covariant components together with the
metric used to raise indices.  The verifier works in a g-orthonormal frame
adapted to J, where the metric is the identity and Frobenius products are
frame independent, but every routine here accepts a general metric.

Conventions: ``gJ(X, Y) = g(JX, Y)`` has components ``(J^T g)``, and a
curvature tensor acts on a vector through ``T(X, Y) Z`` with
``g(T(X, Y) Z, W) = T(X, Y, Z, W)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AlgebraError(ValueError):
    pass


@dataclass
class CurvatureTensor:
    components: np.ndarray
    metric: np.ndarray

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    def raised(self) -> np.ndarray:
        """T[x, y, z, e] with the last index raised: components of T(X, Y)Z."""
        return np.einsum("xyzf,fe->xyze", self.components, np.linalg.inv(self.metric))

    def __add__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        return CurvatureTensor(self.components + other.components, self.metric)

    def __sub__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        return CurvatureTensor(self.components - other.components, self.metric)

    def __mul__(self, c: float) -> "CurvatureTensor":
        return CurvatureTensor(c * self.components, self.metric)

    __rmul__ = __mul__


@dataclass
class QCHFit:
    a: float
    b: float
    c: float
    residual: float
    gram_condition: float

    def law(self, s):
        """Holomorphic sectional curvature a + b s + c s^2, s = |X_D|^2/|X|^2."""
        return self.a + self.b * s + self.c * s * s

    def valid(self, fit_tol: float = 1e-6) -> bool:
        return self.residual <= fit_tol


def _check_pair(g: np.ndarray, J: np.ndarray, tol: float = 1e-10) -> None:
    dim = g.shape[0]
    scale = max(1.0, np.abs(g).max())
    if np.abs(J @ J + np.eye(dim)).max() > tol * max(1.0, np.abs(J).max() ** 2):
        raise AlgebraError("J^2 != -1")
    if np.abs(J.T @ g @ J - g).max() > tol * scale:
        raise AlgebraError("J is not g-orthogonal")


def pi_tensor(g: np.ndarray, J: np.ndarray) -> CurvatureTensor:
    """Constant holomorphic sectional curvature tensor, normalised so that
    Pi(X, JX, JX, X) = 1 for unit X."""
    _check_pair(g, J)
    gJ = J.T @ g
    P = 0.25 * (
        np.einsum("yz,xu->xyzu", g, g)
        - np.einsum("xz,yu->xyzu", g, g)
        + np.einsum("yz,xu->xyzu", gJ, gJ)
        - np.einsum("xz,yu->xyzu", gJ, gJ)
        - 2.0 * np.einsum("xy,zu->xyzu", gJ, gJ)
    )
    return CurvatureTensor(P, g)


def restricted_metric(g: np.ndarray, pD: np.ndarray) -> np.ndarray:
    """h = g(p_D ., p_D .)."""
    return pD.T @ g @ pD


def distribution_form(J: np.ndarray, gD: np.ndarray) -> np.ndarray:
    """omega(X, Y) = h(JX, Y)."""
    return J.T @ gD


def phi_tensor(g: np.ndarray, J: np.ndarray, gD: np.ndarray, omega: np.ndarray) -> CurvatureTensor:
    if np.abs(gD - gD.T).max() > 1e-12 * max(1.0, np.abs(gD).max()):
        raise AlgebraError("restricted metric is not symmetric")
    ginv = np.linalg.inv(g)
    rank = int(round(np.trace(ginv @ gD)))
    if rank != 2:
        raise AlgebraError(f"restricted metric has rank {rank}, expected 2")
    gJ = J.T @ g
    h, w = gD, omega
    F = 0.125 * (
        np.einsum("yz,xu->xyzu", g, h)
        - np.einsum("xz,yu->xyzu", g, h)
        + np.einsum("xu,yz->xyzu", g, h)
        - np.einsum("yu,xz->xyzu", g, h)
        + np.einsum("yz,xu->xyzu", gJ, w)
        - np.einsum("xz,yu->xyzu", gJ, w)
        + np.einsum("xu,yz->xyzu", gJ, w)
        - np.einsum("yu,xz->xyzu", gJ, w)
        - 2.0 * np.einsum("xy,zu->xyzu", gJ, w)
        - 2.0 * np.einsum("zu,xy->xyzu", gJ, w)
    )
    return CurvatureTensor(F, g)


def psi_tensor(omega: np.ndarray, g: np.ndarray) -> CurvatureTensor:
    return CurvatureTensor(-np.einsum("xy,zu->xyzu", omega, omega), g)


def qch_model_tensors(g: np.ndarray, J: np.ndarray, pD: np.ndarray) -> tuple:
    gD = restricted_metric(g, pD)
    omega = distribution_form(J, gD)
    return pi_tensor(g, J), phi_tensor(g, J, gD, omega), psi_tensor(omega, g)


def derivation_action(T: CurvatureTensor, S) -> np.ndarray:
    """(T.S)(X, Y; Z1..Z4) = -sum_i S(Z1, .., T(X, Y) Zi, .., Z4)."""
    S = S.components if isinstance(S, CurvatureTensor) else np.asarray(S)
    if S.shape != (T.dim,) * 4:
        raise AlgebraError(f"dimension mismatch: {S.shape} vs dim {T.dim}")
    Tu = T.raised()
    return -(
        np.einsum("xyae,ebcd->xyabcd", Tu, S)
        + np.einsum("xybe,aecd->xyabcd", Tu, S)
        + np.einsum("xyce,abed->xyabcd", Tu, S)
        + np.einsum("xyde,abce->xyabcd", Tu, S)
    )


def hp_residual(R: CurvatureTensor, Pi: CurvatureTensor, phi: float, floor: float | None = None) -> float:
    """Relative max-norm residual of R.R = phi Pi.R.

    The denominator is max(|R.R|, |Pi.R|, floor) with a floor of |R|^2 by
    default: where R is semisymmetric both sides are pure roundoff and the
    residual is then measured against the natural scale of R.R.
    """
    RR = derivation_action(R, R)
    PR = derivation_action(Pi, R)
    if floor is None:
        floor = max(np.abs(R.components).max() ** 2, 1e-14 * R.dim**2)
    denom = max(np.abs(RR).max(), np.abs(PR).max(), floor)
    return float(np.abs(RR - phi * PR).max() / denom)


def frobenius(A: np.ndarray, B: np.ndarray, g: np.ndarray) -> float:
    ginv = np.linalg.inv(g)
    if np.allclose(ginv, np.eye(g.shape[0]), rtol=0.0, atol=1e-14):
        return float(np.sum(A * B))
    return float(np.einsum("ijkl,ia,jb,kc,ld,abcd->", A, ginv, ginv, ginv, ginv, B))


def qch_fit(R: CurvatureTensor, Pi: CurvatureTensor, Phi: CurvatureTensor, Psi: CurvatureTensor,
            max_condition: float = 1e12) -> QCHFit:
    """Least-squares projection of R onto span{Pi, Phi, Psi} via the 3x3
    Gram system."""
    g = R.metric
    basis = [Pi.components, Phi.components, Psi.components]
    gram = np.array([[frobenius(A, B, g) for B in basis] for A in basis])
    rhs = np.array([frobenius(A, R.components, g) for A in basis])
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond > max_condition:
        raise AlgebraError(f"Gram matrix is singular (condition {cond:.3e})")
    a, b, c = np.linalg.solve(gram, rhs)
    diff = R.components - a * basis[0] - b * basis[1] - c * basis[2]
    norm = np.sqrt(frobenius(R.components, R.components, g))
    res = np.sqrt(max(frobenius(diff, diff, g), 0.0)) / norm if norm > 0 else 0.0
    return QCHFit(float(a), float(b), float(c), float(res), cond)


def holomorphic_sectional_curvature(R: CurvatureTensor, J: np.ndarray, X) -> float:
    X = np.asarray(X, dtype=float)
    g = R.metric
    nx = X @ g @ X
    if nx <= 0.0:
        raise AlgebraError("zero vector")
    JX = J @ X
    return float(np.einsum("ijkl,i,j,k,l->", R.components, X, JX, JX, X) / nx**2)


def probe_qch_law(R: CurvatureTensor, J: np.ndarray, pD: np.ndarray, fit: QCHFit, directions) -> float:
    """Max |K(X) - (a + b s + c s^2)| over the given directions,
    s = |X_D|^2 / |X|^2."""
    g = R.metric
    worst = 0.0
    for X in np.atleast_2d(directions):
        XD = pD @ X
        s = (XD @ g @ XD) / (X @ g @ X)
        worst = max(worst, abs(holomorphic_sectional_curvature(R, J, X) - fit.law(s)))
    return worst


def symmetry_residuals(R: np.ndarray) -> dict:
    """Curvature symmetries, first Bianchi, relative to max |R|."""
    scale = max(np.abs(R).max(), 1e-300)
    return {
        "skew_12": float(np.abs(R + R.transpose(1, 0, 2, 3)).max() / scale),
        "skew_34": float(np.abs(R + R.transpose(0, 1, 3, 2)).max() / scale),
        "pair": float(np.abs(R - R.transpose(2, 3, 0, 1)).max() / scale),
        "bianchi": float(np.abs(R + np.einsum("yzxw->xyzw", R) + np.einsum("zxyw->xyzw", R)).max() / scale),
    }


def j_invariance_residual(R: np.ndarray, J: np.ndarray) -> float:
    """max |R(JX, JY, Z, W) - R(X, Y, Z, W)| relative to max |R|."""
    RJ = np.einsum("abzw,ax,by->xyzw", R, J, J)
    return float(np.abs(RJ - R).max() / max(np.abs(R).max(), 1e-300))
