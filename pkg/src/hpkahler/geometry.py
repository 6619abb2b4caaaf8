"""The metric dt^2 + f^2 (dpsi + A)^2 + h^2 g_FS in explicit coordinates.

Real coordinates are ordered (t, psi, Re w_1, Im w_1, ..., Re w_m, Im w_m)
with m = n - 1 affine coordinates on the base CP^{n-1}.  The base carries
the Fubini-Study metric of holomorphic sectional curvature 4 (potential
log(1 + |w|^2)) and the connection potential A satisfies dA = 2 omega_FS.

Every metric-derived quantity is differentiated with second-order jets,
so Christoffel symbols, curvature and nabla J are exact up to roundoff and
the accuracy of the profile ODE solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import CurvatureTensor
from .jets import Jet, jet_matmul
from .profile import ProfileSolution

#: Sign in J d/dt = ORIENTATION * (1/f) d/dpsi.  Chosen by
#: :func:`calibrate_orientation`; only +1 gives a parallel J.
ORIENTATION = 1


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ChartPoint:
    t: float
    psi: float
    w: tuple

    def __init__(self, t: float, psi: float, w: Sequence[complex]):
        object.__setattr__(self, "t", float(t))
        object.__setattr__(self, "psi", float(psi))
        object.__setattr__(self, "w", tuple(complex(z) for z in w))

    @property
    def n(self) -> int:
        return len(self.w) + 1

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def coords(self) -> np.ndarray:
        base = [c for z in self.w for c in (z.real, z.imag)]
        return np.array([self.t, self.psi] + base, dtype=float)

    @classmethod
    def from_coords(cls, x) -> "ChartPoint":
        x = np.asarray(x, dtype=float)
        w = [complex(x[k], x[k + 1]) for k in range(2, x.size, 2)]
        return cls(x[0], x[1], w)

    def check_interior(self, L: float, margin: float = 0.05) -> None:
        if not (margin * L <= self.t <= (1.0 - margin) * L):
            raise GeometryError(f"t={self.t} outside the interior [{margin}L, {1 - margin}L], L={L}")

    def to_dict(self) -> dict:
        return {"t": self.t, "psi": self.psi, "w": [[z.real, z.imag] for z in self.w]}


@dataclass
class MetricJet:
    """Metric with its partials: ``dg[i, j, k] = d_k g_ij`` and
    ``ddg[i, j, k, l] = d_k d_l g_ij``."""

    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray

    @classmethod
    def from_jet(cls, gj: Jet) -> "MetricJet":
        return cls(gj.val.copy(), gj.d1.copy(), gj.d2.copy())

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def to_dict(self) -> dict:
        return {"g": self.g.tolist(), "dg": self.dg.tolist(), "ddg": self.ddg.tolist()}


@dataclass
class ComplexStructure:
    J: np.ndarray


# -- base CP^{n-1} ----------------------------------------------------------


def base_complex_structure(m: int) -> np.ndarray:
    """Standard J on (Re w, Im w) pairs: d/du -> d/dv, d/dv -> -d/du."""
    Jb = np.zeros((2 * m, 2 * m))
    for k in range(m):
        Jb[2 * k + 1, 2 * k] = 1.0
        Jb[2 * k, 2 * k + 1] = -1.0
    return Jb


def _fs_metric(u: list, v: list) -> Jet:
    """Real FS metric components from the Hermitian matrix
    H_jk = delta_jk/rho - conj(w_j) w_k / rho^2, rho = 1 + |w|^2."""
    m = len(u)
    dim = u[0].dim
    rho = 1.0 + sum((u[k] * u[k] + v[k] * v[k] for k in range(m)), Jet.constant(0.0, dim))
    inv = rho.reciprocal()
    inv2 = inv * inv
    G = Jet.zeros((2 * m, 2 * m), dim)
    for j in range(m):
        for k in range(m):
            re = (u[j] * u[k] + v[j] * v[k]) * inv2
            if j == k:
                re = inv - re
            else:
                re = -re
            im = -(u[j] * v[k] - v[j] * u[k]) * inv2
            G[2 * j, 2 * k] = re
            G[2 * j + 1, 2 * k + 1] = re
            G[2 * j, 2 * k + 1] = im
            G[2 * j + 1, 2 * k] = -im
    return G


def _connection(u: list, v: list) -> Jet:
    """A = (i/2)(dbar - d) log(1 + |w|^2) = sum (u dv - v du) / rho."""
    m = len(u)
    dim = u[0].dim
    rho = 1.0 + sum((u[k] * u[k] + v[k] * v[k] for k in range(m)), Jet.constant(0.0, dim))
    inv = rho.reciprocal()
    A = Jet.zeros(2 * m, dim)
    for k in range(m):
        A[2 * k] = -v[k] * inv
        A[2 * k + 1] = u[k] * inv
    return A


def _base_jets(w: Sequence[complex]):
    x = np.array([c for z in w for c in (complex(z).real, complex(z).imag)], dtype=float)
    xs = Jet.variables(x)
    return xs[0::2], xs[1::2]


def fubini_study(w: Sequence[complex]) -> tuple:
    """FS metric (holomorphic sectional curvature 4) and its Kahler form
    omega_FS(X, Y) = g_FS(J X, Y) at the affine point ``w``."""
    u, v = _base_jets(w)
    G = _fs_metric(u, v).val
    Jb = base_complex_structure(len(u))
    return G, Jb.T @ G


def fubini_study_jet(w: Sequence[complex]) -> Jet:
    u, v = _base_jets(w)
    return _fs_metric(u, v)


def connection_one_form(w: Sequence[complex]) -> np.ndarray:
    u, v = _base_jets(w)
    return _connection(u, v).val


def connection_jet(w: Sequence[complex]) -> Jet:
    u, v = _base_jets(w)
    return _connection(u, v)


# -- total space ------------------------------------------------------------


def _profile_jets(t: Jet, sol: ProfileSolution):
    h, hp = (float(x) for x in sol.state(t.val))
    prof = sol.profile
    hpp = 0.5 * float(prof.deriv(h, 1))
    hppp = 0.5 * float(prof.deriv(h, 2)) * hp
    return t.compose(h, hp, hpp), t.compose(hp, hpp, hppp)


def _assemble(point: ChartPoint, sol: ProfileSolution, orientation: int = ORIENTATION):
    """Metric and complex structure as jets in all 2n coordinates."""
    xs = Jet.variables(point.coords)
    dim = len(xs)
    m = point.n - 1
    h, hp = _profile_jets(xs[0], sol)
    f = h * hp
    u, v = xs[2::2], xs[3::2]
    G = _fs_metric(u, v)
    A = _connection(u, v)
    f2 = f * f
    h2 = h * h

    g = Jet.zeros((dim, dim), dim)
    g[0, 0] = 1.0
    g[1, 1] = f2
    fA = A * f2
    g[1, 2:] = fA
    g[2:, 1] = fA
    g[2:, 2:] = A[:, None] * A[None, :] * f2 + G * h2

    eps = float(orientation)
    Jb = base_complex_structure(m)
    J = Jet.zeros((dim, dim), dim)
    J[1, 0] = f.reciprocal() * eps
    J[0, 1] = -f * eps
    J[2:, 2:] = Jet.constant(Jb, dim)
    # column b: (Jb d_b)^H + A_b J d_psi
    J[1, 2:] = -(A[:, None] * Jb).sum(axis=0)
    J[0, 2:] = -(A * f) * eps
    return g, J


def metric_jet(point: ChartPoint, sol: ProfileSolution) -> MetricJet:
    g, _ = _assemble(point, sol)
    mj = MetricJet.from_jet(g)
    if np.linalg.eigvalsh(mj.g).min() <= 0.0:
        raise GeometryError(f"metric not positive definite at {point}")
    return mj


def complex_structure(point: ChartPoint, sol: ProfileSolution, orientation: int = ORIENTATION) -> ComplexStructure:
    _, J = _assemble(point, sol, orientation)
    return ComplexStructure(J.val.copy())


def christoffels(jet: MetricJet) -> np.ndarray:
    """Gamma[k, i, j] = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
    ginv = np.linalg.inv(jet.g)
    first = _christoffel_first(jet.dg)
    return np.einsum("kl,lij->kij", ginv, first)


def _christoffel_first(dg: np.ndarray) -> np.ndarray:
    # first[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    return 0.5 * (np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg))


def christoffel_derivatives(jet: MetricJet) -> np.ndarray:
    """dGamma[k, i, j, m] = d_m Gamma^k_ij."""
    ginv = np.linalg.inv(jet.g)
    first = _christoffel_first(jet.dg)
    ddg = jet.ddg
    dfirst = 0.5 * (np.einsum("jlim->lijm", ddg) + np.einsum("iljm->lijm", ddg) - np.einsum("ijlm->lijm", ddg))
    dginv = -np.einsum("ka,abm,bl->klm", ginv, jet.dg, ginv)
    return np.einsum("klm,lij->kijm", dginv, first) + np.einsum("kl,lijm->kijm", ginv, dfirst)


def riemann_from_jet(jet: MetricJet) -> np.ndarray:
    """R[i, j, k, l] = g(R(d_i, d_j) d_k, d_l) with
    R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y]."""
    gam = christoffels(jet)
    dgam = christoffel_derivatives(jet)
    up = (
        np.einsum("pjki->ijkp", dgam)
        - np.einsum("pikj->ijkp", dgam)
        + np.einsum("mjk,pim->ijkp", gam, gam)
        - np.einsum("mik,pjm->ijkp", gam, gam)
    )
    return np.einsum("ijkp,pl->ijkl", up, jet.g)


def riemann(point: ChartPoint, sol: ProfileSolution) -> CurvatureTensor:
    jet = metric_jet(point, sol)
    return CurvatureTensor(riemann_from_jet(jet), jet.g)


def scalar_curvature_from(R: np.ndarray, g: np.ndarray) -> float:
    ginv = np.linalg.inv(g)
    return float(np.einsum("ijkl,jk,il->", R, ginv, ginv))


def scalar_curvature(point: ChartPoint, sol: ProfileSolution) -> float:
    R = riemann(point, sol)
    return scalar_curvature_from(R.components, R.metric)


def nabla_J_from(gam: np.ndarray, J: Jet) -> np.ndarray:
    """N[i, a, b] = (nabla_i J)^a_b."""
    dJ = np.einsum("abi->iab", J.d1)
    Jv = J.val
    return dJ + np.einsum("aic,cb->iab", gam, Jv) - np.einsum("cib,ac->iab", gam, Jv)


def nabla_J(point: ChartPoint, sol: ProfileSolution, orientation: int = ORIENTATION) -> np.ndarray:
    g, J = _assemble(point, sol, orientation)
    return nabla_J_from(christoffels(MetricJet.from_jet(g)), J)


def kahler_form_differential(g: Jet, J: Jet) -> np.ndarray:
    """dOmega[a, b, c] for Omega(X, Y) = g(JX, Y), i.e. Omega = J^T g."""
    omega = jet_matmul(J.transpose(1, 0), g)
    S = np.einsum("bca->abc", omega.d1)  # S[a, b, c] = d_a Omega_bc
    return S + np.einsum("bca->abc", S) + np.einsum("cab->abc", S)


def d_omega(point: ChartPoint, sol: ProfileSolution, orientation: int = ORIENTATION) -> np.ndarray:
    g, J = _assemble(point, sol, orientation)
    return kahler_form_differential(g, J)


def adapted_frame(g: np.ndarray) -> np.ndarray:
    """g-orthonormal frame by Gram-Schmidt on the coordinate fields in
    order (d_t, d_psi, base lifts).  Columns are frame vectors."""
    dim = g.shape[0]
    E = np.zeros((dim, dim))
    for a in range(dim):
        v = np.eye(dim)[:, a]
        for b in range(a):
            v = v - (E[:, b] @ g @ v) * E[:, b]
        E[:, a] = v / np.sqrt(v @ g @ v)
    return E


def projector_from(g: np.ndarray, J: np.ndarray) -> np.ndarray:
    """g-orthogonal projector onto D = span{d_t, J d_t}."""
    dim = g.shape[0]
    e1 = np.eye(dim)[:, 0] / np.sqrt(g[0, 0])
    e2 = J @ e1
    e2 = e2 / np.sqrt(e2 @ g @ e2)
    return np.outer(e1, e1) @ g + np.outer(e2, e2) @ g


def distribution_projector(point: ChartPoint, sol: ProfileSolution) -> np.ndarray:
    g, J = _assemble(point, sol)
    return projector_from(g.val, J.val)


@dataclass
class PointGeometry:
    """Everything the verifier needs at one chart point."""

    point: ChartPoint
    metric: MetricJet
    J: np.ndarray
    R: np.ndarray
    nabla_J: np.ndarray
    d_omega: np.ndarray
    frame: np.ndarray
    projector: np.ndarray
    lie_psi_g: float
    lie_psi_J: float

    def to_frame(self, T: np.ndarray) -> np.ndarray:
        """Components of a covariant tensor in the orthonormal frame."""
        out = T
        for _ in range(T.ndim):
            out = np.tensordot(out, self.frame, axes=([0], [0]))
        return out

    @property
    def frame_J(self) -> np.ndarray:
        return np.linalg.solve(self.frame, self.J @ self.frame)

    @property
    def frame_nabla_J(self) -> np.ndarray:
        E = self.frame
        Einv = np.linalg.inv(E)
        return np.einsum("iab,ix,ya,bz->xyz", self.nabla_J, E, Einv, E)

    @property
    def scalar_curvature(self) -> float:
        return scalar_curvature_from(self.R, self.metric.g)


def evaluate_point(point: ChartPoint, sol: ProfileSolution, orientation: int = ORIENTATION,
                   margin: float = 0.05) -> PointGeometry:
    point.check_interior(sol.L, margin)
    g, J = _assemble(point, sol, orientation)
    mj = MetricJet.from_jet(g)
    if np.linalg.eigvalsh(mj.g).min() <= 0.0:
        raise GeometryError(f"metric not positive definite at {point}")
    gam = christoffels(mj)
    return PointGeometry(
        point=point,
        metric=mj,
        J=J.val.copy(),
        R=riemann_from_jet(mj),
        nabla_J=nabla_J_from(gam, J),
        d_omega=kahler_form_differential(g, J),
        frame=adapted_frame(mj.g),
        projector=projector_from(mj.g, J.val),
        # d/dpsi has constant components, so its Lie derivatives are d_psi
        lie_psi_g=float(np.abs(mj.dg[:, :, 1]).max()),
        lie_psi_J=float(np.abs(J.d1[:, :, 1]).max()),
    )


def calibrate_orientation(sol: ProfileSolution, point: ChartPoint) -> dict:
    """Pick the sign in J d/dt = +-(1/f) d/dpsi that makes J parallel.

    Returns the chosen sign with max |nabla J| and max |dOmega| for both
    candidates, so the decision can be recorded in reports.
    """
    scores = {}
    for eps in (1, -1):
        scores[eps] = {
            "nabla_J": float(np.max(np.abs(nabla_J(point, sol, eps)))),
            "d_omega": float(np.max(np.abs(d_omega(point, sol, eps)))),
        }
    best = min(scores, key=lambda e: scores[e]["nabla_J"] + scores[e]["d_omega"])
    return {"orientation": best, "probe": point.to_dict(),
            "scores": {str(k): v for k, v in scores.items()}}
