"""Lie brackets, averaged comparison systems, and the practical-stability probe.

The transformed loop has the control-affine shape

    dz/dt = b0(z, t) + sum_i sqrt(w_i) (b_c_i(z, t) cos(w_i t) - b_s_i(z, t) sin(w_i t))

and its Lie-bracket average is b0 - (1/2) sum_i [b_c_i, b_s_i].  The averaged
right-hand sides below are the closed forms of that bracket sum; the numeric
``lie_bracket`` operator exists so tests can confirm the identity instead of
trusting the algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .controllers import (
    EsParams,
    TransformedState,
    es_closed_loop,
    growth_drift,
    transformed_geometry,
)
from .errors import CapabilityError, IntegrationDiverged
from .maps import CostMap
from .schedules import ASYMPTOTIC, EXPONENTIAL, NOMINAL
from .sim import STEPS_PER_PERIOD, integrate

Array = np.ndarray

JACOBIAN_STEP = 1e-6


def _jacobian(field: Callable, x: Array, t: float, h: float) -> Array:
    """Central-difference Jacobian d(field)/dx, column j with step h*max(1,|x_j|)."""
    cols = []
    for j in range(x.size):
        hj = h * max(1.0, abs(x[j]))
        e = np.zeros(x.size)
        e[j] = hj
        cols.append((np.asarray(field(x + e, t), dtype=float) - np.asarray(field(x - e, t), dtype=float)) / (2.0 * hj))
    return np.column_stack(cols)


def lie_bracket(f: Callable, g: Callable, x, t: float, h: float = JACOBIAN_STEP) -> Array:
    """[f, g](x, t) = (dg/dx) f - (df/dx) g with finite-difference Jacobians."""
    if h <= 0.0:
        raise ValueError(f"step size must be positive, got {h}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    fv = np.asarray(f(x, t), dtype=float)
    gv = np.asarray(g(x, t), dtype=float)
    if not (np.all(np.isfinite(fv)) and np.all(np.isfinite(gv))):
        raise FloatingPointError(f"non-finite vector field value at x = {x}, t = {t}")
    out = _jacobian(g, x, t, h) @ fv - _jacobian(f, x, t, h) @ gv
    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"non-finite Lie bracket at x = {x}, t = {t}")
    return out


def transformed_b_fields(p: EsParams, map: CostMap):
    """Decomposition of the transformed loop into (b0, [(b_c_i, b_s_i), ...]).

    Fields act on the packed state z = [theta_f_1..theta_f_n, eta_f].  The
    dither-paired fields carry the cos/sin of the per-channel phase; only b0
    touches eta_f.
    """
    n = p.n
    sqrt_alpha = np.sqrt(p.alpha)

    def b0(z: Array, t: float) -> Array:
        g, _, xi2k, jf, _ = transformed_geometry(p, map, z[:n], z[n], t)
        out = np.empty(n + 1)
        out[:n] = g * z[:n]
        out[n] = (2.0 * map.kappa * g - p.omega_h) * z[n] + p.omega_h * xi2k * jf
        return out

    def make_pair(i: int):
        def b_c(z: Array, t: float) -> Array:
            _, _, _, _, phase = transformed_geometry(p, map, z[:n], z[n], t)
            out = np.zeros(n + 1)
            out[i] = sqrt_alpha[i] * math.cos(phase[i])
            return out

        def b_s(z: Array, t: float) -> Array:
            _, _, _, _, phase = transformed_geometry(p, map, z[:n], z[n], t)
            out = np.zeros(n + 1)
            out[i] = sqrt_alpha[i] * math.sin(phase[i])
            return out

        return b_c, b_s

    return b0, [make_pair(i) for i in range(n)]


def grad_jf(p: EsParams, map: CostMap, theta_f: Array, t: float) -> Array:
    """d J_f / d theta_f = grad J(theta_f/xi + theta*) / xi."""
    xi = p.schedule.xi(t)
    return map.gradient(map.optimum + theta_f / xi) / xi


def averaged_drift_term(p: EsParams, map: CostMap, theta_f: Array, t: float) -> Array:
    """The bracket sum (1/2) sum_i k_i alpha_i phi(t) (dJ_f/dtheta_f_i) e_i."""
    return 0.5 * p.k * p.alpha * p.schedule.phi(t) * grad_jf(p, map, theta_f, t)


def _averaged_rates(p: EsParams, map: CostMap, theta_f: Array, eta_f: float, t: float):
    g = growth_drift(p.schedule, t)
    log_xi = p.schedule.log_xi(t)
    xi2k = math.exp(2.0 * map.kappa * log_xi)
    jf = map.centered_value(map.optimum + theta_f * math.exp(-log_xi))
    theta_f_dot = g * theta_f - averaged_drift_term(p, map, theta_f, t)
    eta_f_dot = (2.0 * map.kappa * g - p.omega_h) * eta_f + p.omega_h * xi2k * jf
    return theta_f_dot, eta_f_dot


def averaged_asymptotic_rhs(p: EsParams, map: CostMap, s: TransformedState, t: float):
    """Averaged transformed dynamics under a power-law schedule."""
    if p.schedule.kind != ASYMPTOTIC:
        raise CapabilityError(f"asymptotic averaged dynamics need an asymptotic schedule, got '{p.schedule.kind}'")
    if map.optimum is None or map.optimal_value is None:
        raise CapabilityError(f"map '{map.name}' lacks optimum/optimal_value")
    return _averaged_rates(p, map, s.theta_f, s.eta_f, t)


def averaged_exponential_rhs(p: EsParams, map: CostMap, s: TransformedState, t: float):
    """Averaged transformed dynamics under an exponential schedule; strongly convex maps only."""
    if p.schedule.kind != EXPONENTIAL:
        raise CapabilityError(f"exponential averaged dynamics need an exponential schedule, got '{p.schedule.kind}'")
    if map.kappa != 1:
        raise CapabilityError(f"exponential averaged dynamics cover kappa = 1 maps, got kappa = {map.kappa}")
    if map.optimum is None or map.optimal_value is None:
        raise CapabilityError(f"map '{map.name}' lacks optimum/optimal_value")
    return _averaged_rates(p, map, s.theta_f, s.eta_f, t)


def averaged_closed_loop(p: EsParams, map: CostMap):
    """rhs(x, t) of the averaged system over x = [theta_f..., eta_f].

    Covers all three schedule kinds; the nominal case degenerates to the
    classic constant-gain averaged loop (xi = 1, zero growth drift).
    """
    if map.optimum is None or map.optimal_value is None:
        raise CapabilityError(f"map '{map.name}' lacks optimum/optimal_value")
    n = p.n

    def rhs(x: Array, t: float) -> Array:
        theta_f_dot, eta_f_dot = _averaged_rates(p, map, x[:n], x[n], t)
        out = np.empty(n + 1)
        out[:n] = theta_f_dot
        out[n] = eta_f_dot
        return out

    return rhs


@dataclass(frozen=True)
class ProbeConfig:
    """Sweep settings for the empirical practical-stability probe.

    omega_values  ascending dither base frequencies to try
    epsilon       target neighborhood radius around the optimum
    delta         initial-condition ball radius (epsilon <= delta)
    horizon       integration span per trial
    trials        seeded initial conditions per omega
    seed          draw seed; trials are shared across omega values
    """

    omega_values: Tuple[float, ...]
    epsilon: float
    delta: float
    horizon: float
    trials: int
    seed: int

    def __post_init__(self):
        vals = tuple(float(w) for w in self.omega_values)
        object.__setattr__(self, "omega_values", vals)
        if len(vals) == 0:
            raise ValueError("omega_values must not be empty")
        if any(w <= 0.0 for w in vals) or any(a >= b for a, b in zip(vals, vals[1:])):
            raise ValueError(f"omega_values must be ascending and positive, got {vals}")
        if self.epsilon <= 0.0 or self.delta <= 0.0:
            raise ValueError("epsilon and delta must be positive")
        if self.epsilon > self.delta:
            raise ValueError(f"epsilon = {self.epsilon} must not exceed delta = {self.delta}")
        if self.horizon <= 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class ProbeRow:
    """One (omega, trial) outcome.

    entry_time  elapsed time of the first recorded sample inside the
                epsilon-ball; inf when the trajectory never enters
    stayed      whether every sample after entry remained inside
    sup_gap     sup over samples of |theta_full - theta_averaged| with the
                averaged run mapped back through theta* + theta_f/xi(t);
                inf when either integration diverged
    """

    omega: float
    trial: int
    entry_time: float
    stayed: bool
    sup_gap: float


def probe_rows_csv(rows: Sequence[ProbeRow]) -> str:
    lines = ["omega,trial,entry_time,stayed,sup_gap"]
    for row in rows:
        lines.append(
            f"{format(row.omega, '.17g')},{row.trial},{format(row.entry_time, '.17g')},"
            f"{int(row.stayed)},{format(row.sup_gap, '.17g')}"
        )
    return "\n".join(lines) + "\n"


def practical_stability_probe(p: EsParams, map: CostMap, cfg: ProbeConfig) -> List[ProbeRow]:
    """Empirical check of practical uniform stability over an omega sweep.

    For each omega and each seeded initial input in the delta-ball around the
    optimum (eta starts on the measured cost), integrates the full loop and
    reports epsilon-neighborhood entry time, whether the trajectory stayed,
    and the sup-norm gap to the matched averaged trajectory.  The evidence is
    finite-sample only: it can refute but never prove the semi-global claim.
    Diverged integrations are recorded as rows with inf markers, not raised.
    """
    if map.optimum is None or map.optimal_value is None:
        raise CapabilityError(f"map '{map.name}' lacks optimum/optimal_value; the probe needs both")
    star = map.optimum
    rng = np.random.default_rng(cfg.seed)
    dirs = rng.standard_normal((cfg.trials, map.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = cfg.delta * rng.random(cfg.trials) ** (1.0 / map.dim)
    theta0s = star + radii[:, None] * dirs

    t0 = p.schedule.t0
    rows: List[ProbeRow] = []
    for omega in cfg.omega_values:
        pw = p.with_omega(omega)
        dt = (2.0 * math.pi / float(np.max(pw.omegas))) / STEPS_PER_PERIOD
        for trial in range(cfg.trials):
            theta0 = theta0s[trial]
            eta0 = map(theta0)
            x0 = np.append(theta0, eta0)
            try:
                full = integrate(
                    es_closed_loop(pw, map), x0, t0, t0 + cfg.horizon, dt,
                    record_every=STEPS_PER_PERIOD, n=map.dim,
                )
            except (IntegrationDiverged, OverflowError, FloatingPointError):
                rows.append(ProbeRow(omega, trial, math.inf, False, math.inf))
                continue

            dist = np.linalg.norm(full.theta - star, axis=1)
            inside = dist <= cfg.epsilon
            hits = np.flatnonzero(inside)
            if hits.size:
                first = int(hits[0])
                entry_time = float(full.times[first] - t0)
                stayed = bool(np.all(inside[first:]))
            else:
                entry_time, stayed = math.inf, False

            # matched transformed start: xi(t0) = 1, so theta_f = theta - theta*
            xf0 = np.append(theta0 - star, eta0 - map.optimal_value)
            try:
                avg = integrate(
                    averaged_closed_loop(pw, map), xf0, t0, t0 + cfg.horizon, dt,
                    record_every=STEPS_PER_PERIOD, n=map.dim,
                )
                xi_vals = np.array([pw.schedule.xi(t) for t in avg.times])
                theta_bar = star + avg.theta / xi_vals[:, None]
                sup_gap = float(np.max(np.linalg.norm(full.theta - theta_bar, axis=1)))
            except (IntegrationDiverged, OverflowError, FloatingPointError):
                sup_gap = math.inf
            rows.append(ProbeRow(omega, trial, entry_time, stayed, sup_gap))
    return rows
