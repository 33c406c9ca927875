"""Closed-form results and reduced scalar solvers used to validate the engine.

Nothing here calls the trajectory engine. The scalar delay equations are
integrated by a separate fixed-step RK4 method of steps (:func:`solve_scalar_dde`)
so that agreement with :mod:`qmm.integrator` is a genuine cross-check.

Reduced orbits of the purely memory-made (2,2) model:

* theta-orbit (``mu_hat = 0``, constant azimuth):
  ``theta' = -lambda_im sin(theta_t - theta_{t-a})``. Linear solutions
  ``theta = alpha t + beta`` need ``alpha + lambda_im sin(a alpha) = 0``.
* phi-orbit (constant polar angle): five categories, see
  :func:`phi_orbit_classify`. Along the orbit the azimuth obeys
  ``phi' = -(lambda_im + mu_hat**2/lambda_im) sin(phi_t - phi_{t-a})``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit
from scipy.optimize import bisect

from .errors import DomainError

ScalarHistory = Callable[[float], float]

#: Zero tests of the phi-orbit categories.
EXACT_TOL = 1e-12


# ---------------------------------------------------------------------------
# transcendental roots


def _bracketed_roots(f: Callable[[float], float], grid: np.ndarray, xtol: float) -> list[float]:
    values = np.array([f(x) for x in grid])
    roots = [float(x) for x, v in zip(grid, values) if v == 0.0]
    sign_change = np.nonzero(values[:-1] * values[1:] < 0.0)[0]
    for i in sign_change:
        roots.append(float(bisect(f, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps,
                                  maxiter=400)))
    return sorted(roots)


@dataclass(frozen=True)
class SlopeRoots:
    """Real roots of ``alpha + lambda_im sin(a alpha) = 0``, sorted, zero included."""

    roots: tuple[float, ...]
    lambda_im: float
    a: float

    def residual(self, alpha: float) -> float:
        return abs(alpha + self.lambda_im * math.sin(self.a * alpha))

    @property
    def nonzero(self) -> tuple[float, ...]:
        return tuple(r for r in self.roots if r != 0.0)

    def nearest(self, value: float) -> float:
        return min(self.roots, key=lambda r: abs(r - value))


def alpha_roots(lambda_im: float, a: float, grid_points: int = 10_000) -> SlopeRoots:
    """All slopes of linear theta-orbit solutions.

    Every root obeys ``|alpha| <= |lambda_im|`` because the rate is bounded by
    ``|lambda_im|``. The positive half-range is scanned on a grid of
    ``grid_points`` intervals, each sign change is refined by bisection, and
    the negative roots follow from the odd symmetry.
    """
    if a <= 0.0:
        raise DomainError(f"the delay must be positive, got a={a}")
    bound = abs(lambda_im)
    if bound == 0.0:
        return SlopeRoots((0.0,), lambda_im, a)

    def f(x: float) -> float:
        return x + lambda_im * math.sin(a * x)

    grid = np.linspace(0.0, bound, grid_points + 1)[1:]
    positive = [r for r in _bracketed_roots(f, grid, 1e-14) if r > 0.0]
    # the scan starts just right of zero; a root hiding in the first cell
    # shows up as a sign change between 0+ and the first grid point
    tiny = bound * 1e-9
    if f(tiny) * f(grid[0]) < 0.0:
        positive.append(float(bisect(f, tiny, grid[0], xtol=1e-14)))
    positive = sorted(set(positive))
    roots = [-r for r in reversed(positive)] + [0.0] + positive
    return SlopeRoots(tuple(roots), lambda_im, a)


def theta_orbit_threshold(lambda_im: float) -> float:
    """Smallest delay ``1/|lambda_im|`` that admits non-constant theta-orbits."""
    if lambda_im == 0.0:
        raise DomainError("lambda_im = 0 leaves no theta-orbit dynamics; the threshold is undefined")
    return 1.0 / abs(lambda_im)


def phi_orbit_threshold(lambda_im: float, mu_hat: float) -> float:
    """Delay threshold ``|lambda_im| / (lambda_im**2 + mu_hat**2)`` of the phi-orbit."""
    if lambda_im == 0.0:
        raise DomainError("lambda_im = 0 leaves the reduced phi-orbit equation undefined")
    return abs(lambda_im) / (lambda_im**2 + mu_hat**2)


def characteristic_gamma_roots(lambda_im: float, a: float, alpha: float,
                               resolution: float = 1e-3, bound: float = 20.0) -> list[float]:
    """Real roots of ``gamma + lambda cos(a alpha)(1 - exp(-a gamma)) = 0`` on ``[-bound, bound]``."""
    c = lambda_im * math.cos(a * alpha)

    def g(x: float) -> float:
        return x + c * (1.0 - math.exp(-a * x))

    n = int(round(bound / resolution))
    grid = np.arange(-n, n + 1) * resolution
    return _bracketed_roots(g, grid, 1e-13)


# ---------------------------------------------------------------------------
# scalar delay equations

RHS_SINE = 0      # x' = -c0 sin(x - x_delayed)
RHS_LINEAR = 1    # x' = c0 (x - x_delayed)
RHS_PHI_MODE = 2  # x' = c0 [c2 - cot(c0 t + c1)] (x - x_delayed)

STATUS_OK = 0
STATUS_DIVERGED = 1


@njit(cache=True)
def _scalar_rhs(kind, t, x, xd, c):
    if kind == RHS_SINE:
        return -c[0] * math.sin(x - xd)
    if kind == RHS_LINEAR:
        return c[0] * (x - xd)
    return c[0] * (c[2] - 1.0 / math.tan(c[0] * t + c[1])) * (x - xd)


@njit(cache=True)
def _delayed(x, f, hist, n, i, half, h):
    """Value at node ``i - n`` plus ``half`` half-steps (``half`` in 0, 1, 2)."""
    j = i - n
    if j < n or (j == n and half == 0):
        return hist[2 * j + half]
    if half == 0:
        return x[j]
    if half == 2:
        return x[j + 1]
    return 0.5 * (x[j] + x[j + 1]) + 0.125 * h * (f[j] - f[j + 1])


@njit(cache=True)
def _dde_rk4(kind, c, hist, n, n_total, h, blowup):
    x = np.full(n_total + 1, np.nan)
    f = np.full(n_total + 1, np.nan)
    for k in range(n + 1):
        x[k] = hist[2 * k]
    status = STATUS_OK
    last = n_total
    for i in range(n, n_total):
        t = i * h
        xd0 = _delayed(x, f, hist, n, i, 0, h)
        k1 = _scalar_rhs(kind, t, x[i], xd0, c)
        f[i] = k1
        xd1 = _delayed(x, f, hist, n, i, 1, h)
        xd2 = _delayed(x, f, hist, n, i, 2, h)
        k2 = _scalar_rhs(kind, t + 0.5 * h, x[i] + 0.5 * h * k1, xd1, c)
        k3 = _scalar_rhs(kind, t + 0.5 * h, x[i] + 0.5 * h * k2, xd1, c)
        k4 = _scalar_rhs(kind, t + h, x[i] + h * k3, xd2, c)
        x[i + 1] = x[i] + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not math.isfinite(x[i + 1]) or abs(x[i + 1]) > blowup:
            status = STATUS_DIVERGED
            last = i + 1
            break
    if status == STATUS_OK:
        f[n_total] = _scalar_rhs(kind, n_total * h, x[n_total],
                                 _delayed(x, f, hist, n, n_total, 0, h), c)
    return status, last, x, f


@dataclass(frozen=True)
class ScalarSolution:
    """Solution of a scalar delay equation on a uniform grid starting at ``t = 0``.

    ``x`` on ``[0, a]`` is the sampled history; ``xdot`` is NaN there.
    ``t_diverged`` is set when the solution left the divergence bound.
    """

    t: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    a: float
    t_diverged: Optional[float] = None

    def after(self, t_min: float) -> np.ndarray:
        return self.t >= t_min - 1e-9 * max(1.0, abs(t_min))


def solve_scalar_dde(kind: int, coeffs, history_fn: ScalarHistory, a: float, t_end: float,
                     steps_per_a: int = 400, blowup: float = np.inf) -> ScalarSolution:
    """Fixed-step RK4 method of steps for ``x' = F(t, x_t, x_{t-a})``.

    The history is sampled exactly at every half step on ``[0, a]``; inside
    the computed region half-step delayed values come from cubic Hermite
    interpolation with the stored node derivatives.
    """
    if a <= 0.0:
        raise DomainError(f"the delay must be positive, got a={a}")
    n = int(steps_per_a)
    h = a / n
    n_total = int(round(t_end / h))
    if n_total < n:
        raise DomainError("t_end must cover at least the history interval")
    hist = np.array([float(history_fn(k * 0.5 * h)) for k in range(2 * n + 1)])
    c = np.zeros(3)
    coeffs = np.asarray(coeffs, float)
    c[: len(coeffs)] = coeffs
    status, last, x, f = _dde_rk4(kind, c, hist, n, n_total, h, float(blowup))
    t = np.arange(n_total + 1) * h
    if status == STATUS_DIVERGED:
        return ScalarSolution(t[: last + 1], x[: last + 1], f[: last + 1], a, float(t[last]))
    return ScalarSolution(t, x, f, a)


def solve_theta_orbit(history_fn: ScalarHistory, lambda_im: float, a: float, t_end: float,
                      steps_per_a: int = 400) -> ScalarSolution:
    """``theta' = -lambda_im sin(theta_t - theta_{t-a})`` with ``theta = history_fn`` on ``[0, a]``."""
    return solve_scalar_dde(RHS_SINE, [lambda_im], history_fn, a, t_end, steps_per_a)


def solve_phi_orbit_reduced(history_fn: ScalarHistory, lambda_im: float, mu_hat: float, a: float,
                            t_end: float, steps_per_a: int = 400) -> ScalarSolution:
    """Reduced phi-orbit equation ``phi' = -(lambda_im + mu_hat**2/lambda_im) sin(phi_t - phi_{t-a})``."""
    if lambda_im == 0.0:
        raise DomainError("lambda_im = 0 leaves the reduced phi-orbit equation undefined")
    coupling = lambda_im + mu_hat**2 / lambda_im
    return solve_scalar_dde(RHS_SINE, [coupling], history_fn, a, t_end, steps_per_a)


def solve_exciton_mode(history_fn: ScalarHistory, lambda_im: float, a: float, alpha: float,
                       t_end: float, steps_per_a: int = 400) -> ScalarSolution:
    """First-order theta fluctuation ``x' = -lambda_im cos(a alpha)(x_t - x_{t-a})``."""
    return solve_scalar_dde(RHS_LINEAR, [-lambda_im * math.cos(a * alpha)], history_fn, a, t_end,
                            steps_per_a)


@dataclass(frozen=True)
class PhiModeReport:
    solution: ScalarSolution
    max_abs: float
    initial_amplitude: float
    diverged: bool
    t_divergence: Optional[float]


def solve_phi_exciton_mode(history_fn: ScalarHistory, alpha: float, beta: float, a: float,
                           t_end: float, steps_per_a: int = 400,
                           growth_limit: float = 1e3) -> PhiModeReport:
    """First-order phi fluctuation ``x' = alpha [cot(a alpha) - cot(alpha t + beta)](x_t - x_{t-a})``.

    Integration stops once ``|x|`` exceeds ``growth_limit`` times the largest
    history amplitude; the report then carries the time of divergence.
    """
    if alpha == 0.0:
        raise DomainError("the phi mode equation needs a non-zero background slope")
    n = int(steps_per_a)
    grid = np.linspace(0.0, a, n + 1)
    amp0 = float(np.max(np.abs([history_fn(s) for s in grid])))
    limit = growth_limit * amp0 if amp0 > 0.0 else np.inf
    coeffs = [alpha, beta, 1.0 / math.tan(a * alpha)]
    sol = solve_scalar_dde(RHS_PHI_MODE, coeffs, history_fn, a, t_end, steps_per_a, blowup=limit)
    finite = sol.x[np.isfinite(sol.x)]
    return PhiModeReport(sol, float(np.max(np.abs(finite))), amp0, sol.t_diverged is not None,
                         sol.t_diverged)


# ---------------------------------------------------------------------------
# infancy and near-Markovian series


def infancy_coefficients(theta0: float, theta_b: float, dtheta_b: float,
                         ddtheta_b: float) -> tuple[float, float, float]:
    """Taylor coefficients of an infant theta-orbit in ``tau = |lambda_im| t``.

    ``theta_b`` and its derivatives are taken at the start of the memory pool,
    ``theta0`` at the outset of the memory-made dynamics.
    """
    d = theta0 - theta_b
    s, c = math.sin(d), math.cos(d)
    t1 = s
    t2 = 0.5 * c * (s - dtheta_b)
    t3 = (math.sin(3 * d) - s + (1.0 - 3.0 * math.cos(2 * d) - 2.0 * s * dtheta_b) * dtheta_b
          - 2.0 * c * ddtheta_b) / 12.0
    return t1, t2, t3


@dataclass(frozen=True)
class NearMarkovSeries:
    """Second-order small-delay solution of the hybrid (2,2) model with ``B = B_z z``.

    ``theta_coeffs[n]`` and ``phi_coeffs[n]`` are polynomial coefficients of the
    order-``n`` angles in ascending powers of ``t``, with ``t`` measured from the
    outset of the memory-made dynamics.
    """

    c1: float
    c2: float
    theta_coeffs: tuple[tuple[float, ...], ...]
    phi_coeffs: tuple[tuple[float, ...], ...]

    @staticmethod
    def _poly(coeffs, t):
        t = np.asarray(t, float)
        return sum(c * t**k for k, c in enumerate(coeffs))

    def theta(self, t, a: float, order: int = 2):
        return sum(a**n * self._poly(self.theta_coeffs[n], t) for n in range(order + 1))

    def phi(self, t, a: float, order: int = 2):
        return sum(a**n * self._poly(self.phi_coeffs[n], t) for n in range(order + 1))


def hybrid_near_markovian(c1: float, c2: float, lambda_re: float, lambda_im: float,
                          b_z: float) -> NearMarkovSeries:
    if abs(math.sin(c1)) < EXACT_TOL:
        raise DomainError("the near-Markovian series divides by sin(c1); c1 at a pole is excluded")
    s1, s2, cc = math.sin(c1), math.sin(2.0 * c1), math.cos(c1)
    theta = (
        (c1,),
        (0.0, -s1 * lambda_re * b_z),
        (0.0, 0.25 * (8.0 * s1 * lambda_im * lambda_re - s2 * lambda_im * b_z) * b_z,
         0.25 * s2 * lambda_re**2 * b_z**2),
    )
    phi = (
        (c2, b_z),
        (0.0, -lambda_im * b_z),
        (0.0, 0.5 * (b_z * lambda_re * cc + 2.0 * (lambda_im**2 - lambda_re**2)) * b_z),
    )
    return NearMarkovSeries(c1, c2, theta, phi)


# ---------------------------------------------------------------------------
# phi-orbit categories


class PhiOrbitCategory(str, enum.Enum):
    GENERIC_TRIPLET = "generic_triplet"
    ARBITRARY_AT_POLE = "arbitrary_at_pole"
    MU_ONLY_DISCRETE = "mu_only_discrete"
    CONSTANT = "constant"
    LAMBDA_ONLY_EQUATOR = "lambda_only_equator"


@dataclass(frozen=True)
class PhiOrbitSolution:
    """Outcome of :func:`phi_orbit_classify`.

    ``slope`` is the closed-form azimuth rate when the category has a single
    one. ``delay_phase`` is ``slope * a`` modulo ``2 pi`` for the generic
    triplet: a linear azimuth keeps ``theta`` constant only when the delay
    satisfies ``slope * a = delay_phase (mod 2 pi)``. ``slopes`` lists the
    discrete rates of the fine-tuned categories (needs ``a``).
    """

    category: PhiOrbitCategory
    slope: Optional[float] = None
    delay_phase: Optional[float] = None
    slopes: tuple[float, ...] = field(default_factory=tuple)

    def compatible_delays(self, count: int = 3) -> list[float]:
        """Smallest positive delays on which the generic-triplet solution is exact."""
        if self.category != PhiOrbitCategory.GENERIC_TRIPLET or not self.slope:
            return []
        if self.slope > 0.0:
            ks = range(0 if self.delay_phase > 0.0 else 1, count + 1)
        else:
            ks = range(-1, -count - 2, -1)
        return [(self.delay_phase + 2.0 * math.pi * k) / self.slope for k in ks][:count]


def _zero(x: float) -> bool:
    return abs(x) < EXACT_TOL


def phi_orbit_classify(lambda_im: float, mu_hat: float, theta0: float,
                       a: Optional[float] = None) -> PhiOrbitSolution:
    """Sort a constant-``theta`` (2,2) configuration into one of five categories."""
    s, c = math.sin(theta0), math.cos(theta0)
    li0, mu0 = _zero(lambda_im), _zero(mu_hat)
    if not li0 and not mu0:
        if _zero(s):
            return PhiOrbitSolution(PhiOrbitCategory.ARBITRARY_AT_POLE)
        slope = 2.0 * c * (lambda_im**2 + mu_hat**2) * mu_hat / (lambda_im**2 * c**2 + mu_hat**2)
        # theta stays put only if tan(slope a / 2) = -mu_hat / (lambda_im cos theta0)
        phase = 2.0 * math.atan2(-mu_hat, lambda_im * c) if not _zero(c) else math.copysign(
            math.pi, -mu_hat * lambda_im)
        return PhiOrbitSolution(PhiOrbitCategory.GENERIC_TRIPLET, slope,
                                float(np.mod(phase, 2.0 * math.pi)))
    if li0 and not mu0 and a is not None:
        x = 2.0 * a * mu_hat * c / math.pi
        k2 = round(x)
        if abs(x - k2) < EXACT_TOL * max(1.0, abs(x)) and int(k2) % 2 == 1:
            rate = k2 * math.pi / a
            return PhiOrbitSolution(PhiOrbitCategory.MU_ONLY_DISCRETE, rate, None, (rate,))
    if mu0 and not li0 and _zero(c):
        slopes = alpha_roots(lambda_im, a).roots if a is not None else ()
        return PhiOrbitSolution(PhiOrbitCategory.LAMBDA_ONLY_EQUATOR, None, None, slopes)
    return PhiOrbitSolution(PhiOrbitCategory.CONSTANT, 0.0)


def mu_only_discrete_family(mu_hat: float, a: float, k: int) -> tuple[float, float]:
    """Fine-tuned ``(theta0, slope)`` of the ``mu_hat``-only family for integer ``k``."""
    arg = (2 * k + 1) * math.pi / (2.0 * a * mu_hat)
    if abs(arg) > 1.0:
        raise DomainError(f"no real polar angle for k={k}: |(2k+1) pi/(2 a mu_hat)| = {abs(arg):.6g} > 1")
    return math.acos(arg), (2 * k + 1) * math.pi / a
