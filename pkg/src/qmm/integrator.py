"""Two-stage trajectory construction: kicker-filled memory pool, then delay dynamics.

Two engines are available:

``rk4_delay``
    Fixed-step RK4 on a uniform grid with ``a = N dt``. Stage evaluations read
    the delayed states from cubic Hermite interpolants of stored nodes and node
    derivatives. Cartesian states are renormalised after every step and the
    pre-renormalisation norm drift is recorded.

``method_of_steps``
    Advances in blocks whose length equals the shortest delay. Each block is an
    ordinary initial value problem (adaptive DOP853) whose delayed inputs are
    the dense outputs of earlier blocks, or the exact pool history. It shares no
    interpolation code with ``rk4_delay`` and serves as an independent
    cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Optional

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels as K
from .errors import AccuracyError, PoleError, RangeError, ValidationError
from .hamiltonians import CouplingSet
from .qubit import BlochAngles, angles_from_vectors, vectors_from_angles

Model = Literal["qmm11", "qmm22", "qmm23", "qmm33", "hybrid22"]
MODEL_CODES = {"qmm11": K.QMM11, "qmm22": K.QMM22, "qmm23": K.QMM23,
               "qmm33": K.QMM33, "hybrid22": K.HYBRID22}
ENGINES = ("rk4_delay", "method_of_steps")
REPRESENTATIONS = ("cartesian", "polar")

#: Per-step renormalisation drift above which a run is aborted.
DRIFT_LIMIT = 1e-5

HistoryFn = Callable[[float], "BlochAngles | tuple[float, float]"]


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one trajectory deterministically."""

    model: Model
    couplings: CouplingSet
    a: float
    theta0: float = 1.001
    phi0: float = 0.089
    t_end_in_a: float = 100.0
    r: float = 1.0
    dt_in_a: float = 1.0 / 200.0
    engine: str = "rk4_delay"
    representation: str = "cartesian"
    decimation: int = 10

    def __post_init__(self):
        if self.model not in MODEL_CODES:
            raise ValidationError(f"unknown model {self.model!r}; expected one of {sorted(MODEL_CODES)}")
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValidationError(f"a must be > 0, got {self.a}")
        if not (math.isfinite(self.r) and self.r >= 1.0):
            raise ValidationError(f"r must satisfy r ≥ 1 (b = a/r ≤ a), got {self.r}")
        if not (0 < self.dt_in_a <= 1.0 / 50.0):
            raise ValidationError(f"dt_in_a must lie in (0, 1/50], got {self.dt_in_a}")
        n = 1.0 / self.dt_in_a
        if abs(n - round(n)) > 1e-9:
            raise ValidationError("1/dt_in_a must be an integer so that a is a whole number of steps")
        if self.model == "qmm33" and self.r > round(n):
            raise ValidationError("r too large: b = a/r must be at least one step")
        if self.t_end_in_a < 1.0:
            raise ValidationError("t_end_in_a must be at least 1 (the kicker interval)")
        if self.engine not in ENGINES:
            raise ValidationError(f"unknown engine {self.engine!r}; expected one of {ENGINES}")
        if self.representation not in REPRESENTATIONS:
            raise ValidationError(f"unknown representation {self.representation!r}")
        if self.decimation < 1:
            raise ValidationError("decimation must be a positive integer")

    @property
    def steps_per_a(self) -> int:
        return int(round(1.0 / self.dt_in_a))

    @property
    def dt(self) -> float:
        return self.a / self.steps_per_a

    @property
    def b(self) -> float:
        return self.a / self.r

    @property
    def t_end(self) -> float:
        return self.t_end_in_a * self.a

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


@dataclass
class HistoryBuffer:
    """Uniformly sampled Bloch-vector history with node derivatives.

    ``d_left_end`` optionally overrides the derivative at the last node when it
    is approached from the left (the kicker-side derivative at ``t = a``).
    """

    t0: float
    dt: float
    samples: np.ndarray
    derivs: np.ndarray
    d_left_end: Optional[np.ndarray] = None

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (len(self.samples) - 1)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.samples))


def history_interpolate(buf: HistoryBuffer, t: float) -> np.ndarray:
    """Cubic Hermite interpolation of the history, renormalised to unit length."""
    s = (t - buf.t0) / buf.dt
    n = len(buf.samples) - 1
    if s < -1e-9 or s > n + 1e-9:
        raise RangeError(f"t={t} outside history coverage [{buf.t0}, {buf.t_end}]")
    s = min(max(s, 0.0), float(n))
    j = min(int(math.floor(s)), n - 1) if n > 0 else 0
    u = s - j
    if u == 0.0 or n == 0:
        v = buf.samples[j].copy()
    elif u == 1.0:
        v = buf.samples[j + 1].copy()
    else:
        d1 = buf.derivs[j + 1]
        if j + 1 == n and buf.d_left_end is not None:
            d1 = buf.d_left_end
        h = buf.dt
        v = ((2 * u**3 - 3 * u**2 + 1) * buf.samples[j] + (u**3 - 2 * u**2 + u) * h * buf.derivs[j]
             + (-2 * u**3 + 3 * u**2) * buf.samples[j + 1] + (u**3 - u**2) * h * d1)
    return v / np.linalg.norm(v)


def kicker_rotation(r0: np.ndarray, b_y: float, t) -> np.ndarray:
    """Closed-form solution of ``dr/dt = B x r`` for ``B = (0, b_y, 0)``."""
    t = np.asarray(t, dtype=float)
    ang = b_y * t
    c, s = np.cos(ang), np.sin(ang)
    x0, y0, z0 = r0
    x = x0 * c + z0 * s
    z = z0 * c - x0 * s
    y = np.full_like(ang, y0)
    return np.stack([x, y, z], axis=-1)


def _r0(cfg: RunConfig) -> np.ndarray:
    return vectors_from_angles(cfg.theta0, cfg.phi0)


def fill_memory_pool(cfg: RunConfig) -> HistoryBuffer:
    """Kicker evolution on ``[0, a]`` sampled on the integration grid."""
    n = cfg.steps_per_a
    t = cfg.dt * np.arange(n + 1)
    b_y = cfg.couplings.b_kicker_y
    samples = kicker_rotation(_r0(cfg), b_y, t)
    field_vec = np.array([0.0, b_y, 0.0])
    derivs = np.cross(field_vec, samples)
    return HistoryBuffer(0.0, cfg.dt, samples, derivs, derivs[-1].copy())


def _as_angles(v) -> tuple[float, float]:
    if isinstance(v, BlochAngles):
        return float(v.theta), float(v.phi)
    th, ph = v
    return float(th), float(ph)


def _derivative(fn: Callable[[float], float], t: float, lo: float, hi: float, eps: float) -> float:
    """Fourth-order finite difference that never samples outside ``[lo, hi]``."""
    if t - 2 * eps >= lo and t + 2 * eps <= hi:
        return (fn(t - 2 * eps) - 8 * fn(t - eps) + 8 * fn(t + eps) - fn(t + 2 * eps)) / (12 * eps)
    sgn = 1.0 if t - 2 * eps < lo else -1.0
    f = [fn(t + sgn * k * eps) for k in range(5)]
    return sgn * (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * eps)


def sample_custom_history(history_fn: HistoryFn, a: float, dt: float,
                          ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Sample angle history on the grid; returns ``theta, phi, dtheta, dphi``."""
    n = int(round(a / dt))
    ts = dt * np.arange(n + 1)
    eps = min(1e-4, 0.25 * dt)
    th_fn = lambda s: _as_angles(history_fn(s))[0]  # noqa: E731
    ph_fn = lambda s: _as_angles(history_fn(s))[1]  # noqa: E731
    th = np.array([th_fn(s) for s in ts])
    ph = np.array([ph_fn(s) for s in ts])
    dth = np.array([_derivative(th_fn, s, 0.0, a, eps) for s in ts])
    dph = np.array([_derivative(ph_fn, s, 0.0, a, eps) for s in ts])
    if not (np.all(np.isfinite(th)) and np.all(np.isfinite(ph))):
        raise ValidationError("history function returned non-finite angles on [0, a]")
    return th, ph, dth, dph


def _angle_rates_to_vector(th, ph, dth, dph) -> np.ndarray:
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    e_th = np.stack([ct * cp, ct * sp, -st], axis=-1)
    e_ph = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    return e_th * np.asarray(dth)[..., None] + e_ph * (st * np.asarray(dph))[..., None]


def _vector_rates_to_angles(r, drdt) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    th, ph = angles_from_vectors(r)
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    dth = drdt[..., 0] * ct * cp + drdt[..., 1] * ct * sp - drdt[..., 2] * st
    with np.errstate(divide="ignore", invalid="ignore"):
        dph = (-drdt[..., 0] * sp + drdt[..., 1] * cp) / st
    return th, ph, dth, dph


@dataclass
class Trajectory:
    """Decimated trajectory with delayed states and integration diagnostics.

    ``r_delay_a`` and ``r_delay_b`` hold the interpolated states at ``t - a``
    and ``t - b`` (NaN inside the memory pool). ``theta`` and ``phi`` are the
    raw integrated angles for polar runs and derived angles otherwise.
    """

    t: np.ndarray
    r: np.ndarray
    drdt: np.ndarray
    r_delay_a: np.ndarray
    r_delay_b: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    config: RunConfig
    max_step_drift: float = 0.0
    total_drift: float = 0.0
    n_steps: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def a(self) -> float:
        return self.config.a

    def after(self, t_min: float) -> np.ndarray:
        """Boolean mask of samples with ``t >= t_min``."""
        return self.t >= t_min - 1e-9 * max(1.0, abs(t_min))


def _n_total(cfg: RunConfig) -> int:
    return int(round(cfg.t_end_in_a * cfg.steps_per_a))


def _check_status(status: int, cfg: RunConfig, node: int, drift: float) -> None:
    if status == K.STATUS_DRIFT:
        raise AccuracyError(
            f"renormalisation drift {drift:.3e} per step exceeded {DRIFT_LIMIT:g} at "
            f"t={node * cfg.dt:.6g}; reduce dt_in_a (currently {cfg.dt_in_a:g})")
    if status == K.STATUS_POLE:
        raise PoleError(
            f"polar representation reached a pole (sin(theta) < {K.POLE_TOL:g}) at "
            f"t≈{node * cfg.dt:.6g}; use the cartesian representation")


def _pool_arrays(cfg: RunConfig, history_fn: Optional[HistoryFn]):
    """Pool samples, node derivatives and the left derivative at ``t = a``."""
    n = cfg.steps_per_a
    if history_fn is None:
        buf = fill_memory_pool(cfg)
        if cfg.representation == "cartesian":
            return buf.samples, buf.derivs, buf.d_left_end
        th, ph, dth, dph = _vector_rates_to_angles(buf.samples, buf.derivs)
        if np.any(np.abs(np.sin(th)) < K.POLE_TOL):
            raise PoleError("kicker history passes through a pole; use the cartesian representation")
    else:
        th, ph, dth, dph = sample_custom_history(history_fn, cfg.a, cfg.dt)
        if cfg.representation == "cartesian":
            y = vectors_from_angles(th, ph)
            d = _angle_rates_to_vector(th, ph, dth, dph)
            return y, d, d[n].copy()
    y = np.stack([th, ph, np.zeros_like(th)], axis=-1)
    d = np.stack([dth, dph, np.zeros_like(th)], axis=-1)
    return y, d, d[n].copy()


def _finish(cfg, idx, y, d, ya, yb, max_drift, sum_drift, n_steps, engine) -> Trajectory:
    t = idx * cfg.dt
    if cfg.representation == "polar":
        theta, phi = y[:, 0].copy(), y[:, 1].copy()
        r = vectors_from_angles(theta, phi)
        drdt = _angle_rates_to_vector(theta, phi, d[:, 0], d[:, 1])
        ra = vectors_from_angles(ya[:, 0], ya[:, 1])
        rb = vectors_from_angles(yb[:, 0], yb[:, 1])
    else:
        r, drdt, ra, rb = y, d, ya, yb
        theta, phi = angles_from_vectors(r)
    if cfg.model != "qmm33":
        rb = np.full_like(ra, np.nan)
    return Trajectory(t=t, r=r, drdt=drdt, r_delay_a=ra, r_delay_b=rb, theta=theta, phi=phi,
                      config=cfg, max_step_drift=float(max_drift), total_drift=float(sum_drift),
                      n_steps=int(n_steps), meta={"engine": engine})


def _simulate_rk4(cfg: RunConfig, history_fn: Optional[HistoryFn]) -> Trajectory:
    pool_y, pool_d, d_left = _pool_arrays(cfg, history_fn)
    n_total = _n_total(cfg)
    rep = K.CARTESIAN if cfg.representation == "cartesian" else K.POLAR
    lag_b = cfg.steps_per_a / cfg.r
    status, last, idx, y, d, ya, yb, max_drift, sum_drift = K.run_rk4_delay(
        MODEL_CODES[cfg.model], rep, cfg.couplings.as_params(), np.ascontiguousarray(pool_y),
        np.ascontiguousarray(pool_d), np.ascontiguousarray(d_left), float(lag_b), cfg.dt,
        n_total, cfg.decimation, DRIFT_LIMIT)
    _check_status(status, cfg, last, max_drift)
    return _finish(cfg, idx, y, d, ya, yb, max_drift, sum_drift, n_total - cfg.steps_per_a,
                   "rk4_delay")


def _simulate_mos(cfg: RunConfig, history_fn: Optional[HistoryFn]) -> Trajectory:
    a, n = cfg.a, cfg.steps_per_a
    polar = cfg.representation == "polar"
    code = MODEL_CODES[cfg.model]
    p = cfg.couplings.as_params()
    block = cfg.b if cfg.model == "qmm33" else a

    if history_fn is None:
        r0 = _r0(cfg)
        b_y = cfg.couplings.b_kicker_y
        grid = np.linspace(0.0, a, n + 1)
        ph_grid = _pool_arrays(cfg, None)[0][:, 1] if polar else None

        def pool(s: float) -> np.ndarray:
            v = kicker_rotation(r0, b_y, s)
            if not polar:
                return v
            th = float(np.arctan2(np.hypot(v[0], v[1]), v[2]))
            ph = float(np.arctan2(v[1], v[0]))
            # follow the branch of the continuously unwrapped grid azimuth
            ref = float(np.interp(s, grid, ph_grid))
            ph += 2 * np.pi * np.round((ref - ph) / (2 * np.pi))
            return np.array([th, ph, 0.0])
    else:
        def pool(s: float) -> np.ndarray:
            th, ph = _as_angles(history_fn(s))
            if polar:
                return np.array([th, ph, 0.0])
            return vectors_from_angles(th, ph)

    sols: list = []

    def state_at(s: float) -> np.ndarray:
        if s <= a or not sols:
            # round-off can put t - b a hair past a while the first block is still being solved
            return pool(min(max(s, 0.0), a))
        k = min(int((s - a) / block), len(sols) - 1)
        while k > 0 and s < sols[k].t_min:
            k -= 1
        v = sols[k](s)
        if not polar:
            v = v / np.linalg.norm(v)
        return v

    ya, yb, out = np.zeros(3), np.zeros(3), np.zeros(3)
    pole_hit = [False]

    def f(t, y):
        ya[:] = state_at(t - a)
        if code == K.QMM33:
            yb[:] = state_at(t - cfg.b)
        if polar:
            if not K.rhs_polar(code, y, ya, yb, p, out):
                pole_hit[0] = True
                return np.zeros(3)
        else:
            K.rhs_cartesian(code, y, ya, yb, p, out)
        return out.copy()

    t_end = cfg.t_end
    t_cur = a
    y = pool(a)
    max_drift = 0.0
    while t_cur < t_end - 1e-12:
        t_next = min(t_cur + block, t_end)
        sol = solve_ivp(f, (t_cur, t_next), y, method="DOP853", rtol=1e-11, atol=1e-12,
                        dense_output=True)
        if pole_hit[0]:
            _check_status(K.STATUS_POLE, cfg, int(t_cur / cfg.dt), 0.0)
        sols.append(sol.sol)
        y = sol.y[:, -1].copy()
        if not polar:
            nrm = float(np.linalg.norm(y))
            max_drift = max(max_drift, abs(nrm - 1.0))
            y /= nrm
        t_cur = t_next

    n_total = _n_total(cfg)
    idx = np.arange(0, n_total + 1, cfg.decimation)
    ts = idx * cfg.dt
    Y = np.array([state_at(s) for s in ts])
    D = np.full_like(Y, np.nan)
    YA = np.full_like(Y, np.nan)
    YB = np.full_like(Y, np.nan)
    for i, s in enumerate(ts):
        if s >= a - 1e-12:
            D[i] = f(s, Y[i])
            YA[i] = ya
            YB[i] = yb
    # pool derivatives by differencing the exact pool function
    for i, s in enumerate(ts):
        if s < a - 1e-12:
            eps = 1e-6
            D[i] = (pool(s + eps) - pool(max(s - eps, 0.0))) / (s + eps - max(s - eps, 0.0))
    return _finish(cfg, idx, Y, D, YA, YB, max_drift, 0.0, n_total - n, "method_of_steps")


def simulate(cfg: RunConfig) -> Trajectory:
    """Kicker on ``[0, a]`` followed by memory-made dynamics up to ``t_end``."""
    return simulate_with_custom_history(cfg, None)


def simulate_with_custom_history(cfg: RunConfig, history_fn: Optional[HistoryFn]) -> Trajectory:
    """Like :func:`simulate` but with the pool sampled from ``history_fn`` on ``[0, a]``."""
    if cfg.engine == "rk4_delay":
        return _simulate_rk4(cfg, history_fn)
    return _simulate_mos(cfg, history_fn)


def rhs(model: Model, r_now, r_past_a, r_past_b, couplings: CouplingSet) -> np.ndarray:
    """Bloch-vector velocity of a model (``r_past_b`` is read only by qmm33)."""
    out = np.zeros(3)
    rb = np.zeros(3) if r_past_b is None else np.asarray(r_past_b, float)
    K.rhs_cartesian(MODEL_CODES[model], np.asarray(r_now, float), np.asarray(r_past_a, float),
                    rb, couplings.as_params(), out)
    return out


def rhs_polar(model: Model, angles_now: BlochAngles, angles_past_a: BlochAngles,
              angles_past_b: Optional[BlochAngles], couplings: CouplingSet) -> tuple[float, float]:
    """``(dtheta/dt, dphi/dt)`` from the printed polar systems."""
    s = np.array([angles_now.theta, angles_now.phi, 0.0])
    sa = np.array([angles_past_a.theta, angles_past_a.phi, 0.0])
    sb = np.zeros(3) if angles_past_b is None else np.array([angles_past_b.theta, angles_past_b.phi, 0.0])
    out = np.zeros(3)
    if not K.rhs_polar(MODEL_CODES[model], s, sa, sb, couplings.as_params(), out):
        raise PoleError("sin(theta) below pole tolerance; use the cartesian rhs")
    return float(out[0]), float(out[1])
