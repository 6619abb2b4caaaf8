"""Profile polynomials P and the ODE h'' = P'(h)/2 they generate.

A profile is an even polynomial with P(0) = 1, P'(0) = 0, P(1) = 0,
P'(1) = -2 that is positive on [0, 1).  Solving the ODE from
(h, h') = (0, 1) gives the warping function h on [0, L], where L is the
first zero of h'.  The circle-fibre length is f = h h' and the
pseudosymmetry function is phi = -2 P'(h) / h, evaluated through the
exact quotient polynomial P'(s)/s.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import sympy
from numpy.polynomial import polynomial as npoly
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar


class ProfileError(ValueError):
    """Raised when a profile is inadmissible or its ODE solve fails."""

    def __init__(self, message: str, witness: Optional[float] = None):
        super().__init__(message)
        self.witness = witness


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    return Fraction(float(c))


@dataclass(frozen=True)
class Profile:
    """Even polynomial P(t) = sum coeffs[k] t**k.

    Coefficients are held as exact fractions (floats convert exactly), so
    the boundary clauses can be checked in rational arithmetic.
    """

    coeffs: tuple
    alpha: Optional[float] = None

    def __post_init__(self):
        cs = [_as_fraction(c) for c in self.coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def float_coeffs(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t):
        return npoly.polyval(t, self.float_coeffs)

    def deriv(self, t, order: int = 1):
        return npoly.polyval(t, npoly.polyder(self.float_coeffs, order))

    @property
    def quotient_coeffs(self) -> np.ndarray:
        """Coefficients of the polynomial P'(s)/s (exact for even P)."""
        cs = self.coeffs
        q = [float(k * cs[k]) for k in range(2, len(cs))]
        return np.array(q) if q else np.zeros(1)

    def exact_value(self, t: Fraction, order: int = 0) -> Fraction:
        total = Fraction(0)
        for k, c in enumerate(self.coeffs):
            if k < order or c == 0:
                continue
            fall = math.prod(range(k - order + 1, k + 1))
            total += c * fall * t ** (k - order)
        return total

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "coeffs": [float(c) for c in self.coeffs]}


def p_alpha_unchecked(alpha: float) -> Profile:
    """P_alpha without the admissibility check (for diagnostics)."""
    a = _as_fraction(alpha)
    return Profile((Fraction(1), Fraction(0), a - 1, Fraction(0), -2 * a, Fraction(0), a), alpha=float(alpha))


def p_alpha(alpha: float) -> Profile:
    """The family P_a(t) = 1 + (a-1) t^2 - 2a t^4 + a t^6.

    Raises
    ------
    ProfileError
        If ``alpha <= -4``; the error carries a witness t in (0, 1) where
        P_a(t) <= 0.
    """
    prof = p_alpha_unchecked(alpha)
    outcome = validate_profile(prof)
    if not outcome.passed:
        raise ProfileError(
            f"P_alpha with alpha={alpha} is not positive on [0, 1): "
            f"P({outcome.witness:.12g}) = {float(prof(outcome.witness)):.3e}",
            witness=outcome.witness,
        )
    return prof


@dataclass
class ValidationOutcome:
    clauses: dict
    witness: Optional[float] = None
    grid_min: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())

    def failed(self) -> list:
        return [k for k, ok in self.clauses.items() if not ok]


def _isolated_roots(prof: Profile, lo: Fraction, hi: Fraction) -> list:
    """Real roots of P in [lo, hi], isolated exactly and refined to 1e-13."""
    t = sympy.Symbol("t")
    poly = sympy.Poly(
        sum(sympy.Rational(c.numerator, c.denominator) * t**k for k, c in enumerate(prof.coeffs)),
        t,
        domain="QQ",
    )
    if poly.degree() < 1:
        return []
    ivs = poly.intervals(eps=sympy.Rational(1, 10**13), inf=sympy.Rational(lo.numerator, lo.denominator),
                         sup=sympy.Rational(hi.numerator, hi.denominator))
    return [float(a + b) / 2 for (a, b), _mult in ivs]


def validate_profile(prof: Profile, tol: float = 1e-12, grid: int = 10_000) -> ValidationOutcome:
    """Check evenness, the four boundary clauses and positivity on [0, 1).

    Failures are returned as data.  Positivity is decided by exact real-root
    isolation on the rational coefficients (a dense grid alone misses
    tangential zeros such as the double root of P_{-4} at 1/sqrt(2)); the
    grid minimum is reported alongside.
    """
    zero, one = Fraction(0), Fraction(1)
    clauses = {
        "even": all(c == 0 for c in prof.coeffs[1::2]),
        "P(0)=1": abs(prof.exact_value(zero) - 1) <= tol,
        "P'(0)=0": abs(prof.exact_value(zero, 1)) <= tol,
        "P(1)=0": abs(prof.exact_value(one)) <= tol,
        "P'(1)=-2": abs(prof.exact_value(one, 1) + 2) <= tol,
    }
    ts = np.linspace(0.0, 1.0 - 1e-6, grid)
    vals = prof(ts)
    grid_min = float(vals.min())
    witness = None
    roots = [r for r in _isolated_roots(prof, zero, one) if r < 1.0 - 1e-9]
    if roots:
        witness = roots[0]
    elif grid_min <= 0.0:
        witness = float(ts[np.argmin(vals)])
    clauses["positive on [0,1)"] = witness is None and grid_min > 0.0
    return ValidationOutcome(clauses=clauses, witness=witness, grid_min=grid_min)


@dataclass(frozen=True)
class ODETolerances:
    rtol: float = 1e-12
    atol: float = 1e-12
    energy_tol: float = 1e-10
    endpoint_tol: float = 1e-7
    t_max: float = 50.0
    method: str = "DOP853"


@dataclass(frozen=True)
class ProfileSolution:
    """Dense trajectory of (h, h') with detected endpoint L.

    The trajectory covers [-L/4, 5L/4]: the negative part supports parity
    checks at 0 and the part beyond L supports parity checks of f about L.
    ``nodes`` holds the accepted integrator steps on [0, L].
    """

    profile: Profile
    L: float
    nodes: np.ndarray
    tolerances: ODETolerances
    _segments: tuple = field(repr=False, compare=False)

    @property
    def t_range(self) -> tuple:
        return self._segments[0][0], self._segments[-1][1]

    def state(self, t) -> np.ndarray:
        """(h, h') at ``t``; shape (2,) for scalar t, (2, N) for arrays."""
        t_arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t_arr).ravel()
        lo, hi = self.t_range
        slack = 1e-12 * max(1.0, self.L)
        if np.any(flat < lo - slack) or np.any(flat > hi + slack):
            raise ValueError(f"t outside the integrated range [{lo}, {hi}]")
        out = np.empty((2, flat.size))
        done = np.zeros(flat.size, dtype=bool)
        for a, b, dense in self._segments:
            mask = ~done & (flat >= min(a, b) - slack) & (flat <= max(a, b) + slack)
            if mask.any():
                out[:, mask] = dense(np.clip(flat[mask], min(a, b), max(a, b)))
                done |= mask
        if t_arr.ndim == 0:
            return out[:, 0]
        return out.reshape((2,) + t_arr.shape)

    def h(self, t):
        return self.state(t)[0]

    def hp(self, t):
        return self.state(t)[1]

    def hpp(self, t):
        return 0.5 * self.profile.deriv(self.h(t), 1)

    def hppp(self, t):
        h, hp = self.state(t)
        return 0.5 * self.profile.deriv(h, 2) * hp

    def to_dict(self) -> dict:
        d = self.profile.to_dict()
        d.update(
            L=self.L,
            tolerances=asdict(self.tolerances),
            nodes=[{"t": float(t), "h": float(h), "hp": float(hp)} for t, h, hp in self.nodes],
        )
        return d


def _rhs(prof: Profile):
    dq = npoly.polyder(prof.float_coeffs)

    def f(_t, y):
        return [y[1], 0.5 * npoly.polyval(y[0], dq)]

    return f


def _energy_drift(prof: Profile, h, hp) -> float:
    return float(np.max(np.abs(hp**2 - prof(h))))


def solve_profile(prof: Profile, tol: ODETolerances = ODETolerances()) -> ProfileSolution:
    """Integrate h'' = P'(h)/2 from (0, 1) and locate L where h' = 0.

    L is the first transversal zero of h' (h''(L) = -1), found by the
    integrator's event root-finding on the dense output.
    """
    outcome = validate_profile(prof)
    if not outcome.passed:
        raise ProfileError(f"profile fails validation: {outcome.failed()}", witness=outcome.witness)

    rhs = _rhs(prof)
    opts = dict(method=tol.method, rtol=tol.rtol, atol=tol.atol, dense_output=True)

    def turning(_t, y):
        return y[1]

    turning.terminal = True
    turning.direction = -1

    fwd = solve_ivp(rhs, (0.0, tol.t_max), [0.0, 1.0], events=turning, **opts)
    if not fwd.success or len(fwd.t_events[0]) == 0:
        raise ProfileError(f"h' did not reach 0 before t_max={tol.t_max}")
    L = float(fwd.t_events[0][0])
    if np.any(fwd.y[1][fwd.t < L] <= 0.0):
        raise ProfileError("h' became non-positive before the endpoint")

    y_L = fwd.sol(L)
    back = solve_ivp(rhs, (0.0, -0.25 * L), [0.0, 1.0], **opts)
    beyond = solve_ivp(rhs, (L, 1.25 * L), y_L, **opts)
    for seg in (back, beyond):
        if not seg.success:
            raise ProfileError(f"integration failed: {seg.message}")

    drift = max(
        _energy_drift(prof, fwd.y[0], fwd.y[1]),
        _energy_drift(prof, back.y[0], back.y[1]),
        _energy_drift(prof, beyond.y[0], beyond.y[1]),
    )
    if drift > tol.energy_tol:
        raise ProfileError(f"energy invariant drifted by {drift:.3e} > {tol.energy_tol:.1e}")

    keep = fwd.t <= L
    nodes = np.column_stack([np.append(fwd.t[keep], L), np.append(fwd.y[0][keep], y_L[0]),
                             np.append(fwd.y[1][keep], y_L[1])])
    segments = ((-0.25 * L, 0.0, back.sol), (0.0, L, fwd.sol), (L, 1.25 * L, beyond.sol))
    return ProfileSolution(profile=prof, L=L, nodes=nodes, tolerances=tol, _segments=segments)


def _check_range(sol: ProfileSolution, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    slack = 1e-12 * sol.L
    if np.any(t < -slack) or np.any(t > sol.L + slack):
        raise ValueError(f"t must lie in [0, L] = [0, {sol.L}]")
    return np.clip(t, 0.0, sol.L)


def eval_f(sol: ProfileSolution, t):
    """Fibre length f = h h' on [0, L]."""
    h, hp = sol.state(_check_range(sol, t))
    return h * hp


def phi_of_h(prof: Profile, h):
    """phi = -2 P'(h)/h via the exact quotient polynomial."""
    return -2.0 * npoly.polyval(h, prof.quotient_coeffs)


def eval_phi(sol: ProfileSolution, t):
    """Pseudosymmetry function phi(t) = -2 P'(h(t)) / h(t) on [0, L].

    At t = 0 this is -2 P''(0), obtained without any division.
    """
    return phi_of_h(sol.profile, sol.h(_check_range(sol, t)))


@dataclass
class BoundaryReport:
    h0: float
    hp0_minus_1: float
    hL_minus_1: float
    hpL: float
    fL: float
    fpL_plus_1: float
    h_parity_at_0: float
    f_parity_at_L: float
    energy_drift: float

    def max_endpoint(self) -> float:
        return max(self.hL_minus_1, self.hpL, self.fL, self.fpL_plus_1)

    def to_dict(self) -> dict:
        return asdict(self)


def boundary_report(sol: ProfileSolution, grid: int = 64) -> BoundaryReport:
    """Residuals of the smooth-extension conditions at t = 0 and t = L."""
    L = sol.L
    h0, hp0 = sol.state(0.0)
    hL, hpL = sol.state(L)
    hppL = sol.hpp(L)
    s = np.linspace(L / 4 / grid, L / 4, grid)
    h_par = float(np.max(np.abs(sol.h(-s) + sol.h(s))))
    hl, hpl = sol.state(L - s)
    hr, hpr = sol.state(L + s)
    f_par = float(np.max(np.abs(hl * hpl + hr * hpr)))
    ts = np.linspace(0.0, L, 4 * grid + 1)
    h, hp = sol.state(ts)
    return BoundaryReport(
        h0=abs(float(h0)),
        hp0_minus_1=abs(float(hp0) - 1.0),
        hL_minus_1=abs(float(hL) - 1.0),
        hpL=abs(float(hpL)),
        fL=abs(float(hL * hpL)),
        fpL_plus_1=abs(float(hpL**2 + hL * hppL) + 1.0),
        h_parity_at_0=h_par,
        f_parity_at_L=f_par,
        energy_drift=max(_energy_drift(sol.profile, h, hp),
                         _energy_drift(sol.profile, sol.nodes[:, 1], sol.nodes[:, 2])),
    )


@dataclass
class PhiMinimum:
    value: float
    t: float
    h: float


def phi_minimum(sol: ProfileSolution, grid: int = 2048) -> PhiMinimum:
    """Minimum of phi over [0, L]: grid search, then bounded Brent
    refinement on the bracketing cell."""
    ts = np.linspace(0.0, sol.L, grid)
    vals = eval_phi(sol, ts)
    i = int(np.argmin(vals))
    best_t, best_v = float(ts[i]), float(vals[i])
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, grid - 1)]
    if hi > lo:
        res = minimize_scalar(lambda t: float(eval_phi(sol, t)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * sol.L})
        if res.fun < best_v:
            best_t, best_v = float(res.x), float(res.fun)
    return PhiMinimum(value=best_v + 0.0, t=best_t, h=float(sol.h(best_t)))


def profile_table(sol: ProfileSolution, points: int = 201) -> dict:
    """Columns t, h, h', f, phi on a uniform grid of [0, L]."""
    ts = np.linspace(0.0, sol.L, points)
    h, hp = sol.state(ts)
    return {"t": ts, "h": h, "hp": hp, "f": h * hp, "phi": phi_of_h(sol.profile, h)}


def profile_from_coeffs(coeffs: Sequence) -> Profile:
    return Profile(tuple(coeffs))
