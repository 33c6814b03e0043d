#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Mean-field (Bloch) dynamics of the dissipative LMG model and its steady states.

With X = <Jx>/j, Y = <Jy>/j, Z = <Jz>/j (j = N/2) and <Jk Jl> -> <Jk><Jl>:

    dX/dt =  2hY - Gamma_b Z X - gamma_dep X/2
    dY/dt = -2hX + 2 lambda Z X - Gamma_b Z Y - gamma_dep Y/2
    dZ/dt = -2 lambda X Y + Gamma_b (X^2 + Y^2)

Steady states come in two flavors. "paper" evaluates the closed form of the broken
phase as given (its X does not satisfy X^2 + Y^2 + Z^2 = 1). "oracle" solves the four stationarity
equations (three rates plus the unit-norm constraint) numerically. With dephasing the system has
no exact broken-phase root since d(r^2)/dt = -gamma_dep (X^2 + Y^2); the oracle then reports the
least-squares minimizer and flags it inconsistent.
"""

import math
import logging

import numpy as np
from scipy.optimize import least_squares

from litelmg.common import Settings, ConfigError, NumericalError, rk4_step, step_count, is_finite
from litelmg.common import run_parallel, csv_content

logger = logging.getLogger(__name__)

modes    = ["paper", "oracle"]
branches = ["normal", "inverted", "broken-plus", "broken-minus", "none"]

# Types --------------------------------------------------------------------------------------------

class BlochVector(Settings):
    def __init__(self, x, y, z):
        self.x = float(x)
        self.y = float(y)
        self.z = float(z)

    @classmethod
    def from_array(cls, a):
        return cls(a[0], a[1], a[2])

    @classmethod
    def undefined(cls):
        return cls(math.nan, math.nan, math.nan)

    def as_array(self):
        return np.array([self.x, self.y, self.z])

    @property
    def norm2(self):
        return self.x**2 + self.y**2 + self.z**2


class SteadyStateResult(Settings):
    def __init__(self, branch, bloch, z0, r0, residual, mode, consistent=True):
        assert branch in branches
        assert mode in modes
        residual = tuple(float(r) for r in residual)
        self.set_attributes(locals())

    @property
    def residual_norm(self):
        return math.sqrt(sum(r*r for r in self.residual))


class BlochTrajectory(Settings):
    def __init__(self, times, states):
        self.set_attributes(locals())

    @property
    def final(self):
        return BlochVector.from_array(self.states[-1])

    def __len__(self):
        return len(self.times)


class PhaseSweepPoint(Settings):
    def __init__(self, lambda_over_gamma, gamma_b_over_gamma, gamma_dep_over_gamma, h_over_gamma,
                 first_moments, branch, mode, residual_norm, lambda_c_over_gamma):
        self.set_attributes(locals())
        b = first_moments
        self.quadratic_moments = (b.x*b.x, b.y*b.y, b.z*b.z)

# Equations of motion ------------------------------------------------------------------------------

def _rhs(v, h, lam, gamma_b, gamma_dep):
    x, y, z = v
    return np.array([
         2*h*y - gamma_b*z*x - gamma_dep*x/2,
        -2*h*x + 2*lam*z*x - gamma_b*z*y - gamma_dep*y/2,
        -2*lam*x*y + gamma_b*(x*x + y*y),
    ])


def bloch_rhs(s, h, lam, gamma_b, gamma_dep):
    dx, dy, dz = _rhs((s.x, s.y, s.z), h, lam, gamma_b, gamma_dep)
    return float(dx), float(dy), float(dz)


def _residual(v, h, lam, gamma_b, gamma_dep):
    x, y, z = v
    r = np.empty(4)
    r[:3] = _rhs(v, h, lam, gamma_b, gamma_dep)
    r[3]  = x*x + y*y + z*z - 1
    return r


def _jacobian(v, h, lam, gamma_b, gamma_dep):
    x, y, z = v
    return np.array([
        [-gamma_b*z - gamma_dep/2,    2*h,                         -gamma_b*x],
        [-2*h + 2*lam*z,              -gamma_b*z - gamma_dep/2,    2*lam*x - gamma_b*y],
        [-2*lam*y + 2*gamma_b*x,      -2*lam*x + 2*gamma_b*y,      0.0],
        [2*x,                         2*y,                         2*z],
    ])


def steady_state_residual(s, h, lam, gamma_b, gamma_dep):
    """Residuals of the three stationarity equations and of the unit-norm constraint."""
    return _residual((s.x, s.y, s.z), h, lam, gamma_b, gamma_dep)

# Integration --------------------------------------------------------------------------------------

# Max growth of r^2 over one step without dephasing.
_norm_growth_limit = 1e-9
_max_halvings      = 20

def integrate_bloch(s0, h, lam, gamma_b, gamma_dep, t_end, dt_max=0.01, samples=None):
    """Fixed-step RK4 integration of the Bloch equations from s0 to t_end.

    Returns a BlochTrajectory with about `samples` recorded states (every step if None). Without
    dephasing a step that grows r^2 by more than 1e-9 is redone as two half steps.
    """
    n_steps = step_count(t_end, dt_max)
    dt      = t_end/n_steps
    every   = 1 if samples is None else max(1, n_steps//samples)
    f       = lambda t, v: _rhs(v, h, lam, gamma_b, gamma_dep)

    def guarded_step(t, v, dt, depth=0):
        w = rk4_step(f, t, v, dt)
        if gamma_dep == 0 and is_finite(w) and np.dot(w, w) - np.dot(v, v) > _norm_growth_limit:
            if depth >= _max_halvings:
                raise NumericalError("r^2 keeps growing at t = {}, even with step {}".format(t, dt),
                    time=t, last_state=BlochVector.from_array(v))
            half = guarded_step(t, v, dt/2, depth + 1)
            return guarded_step(t + dt/2, half, dt/2, depth + 1)
        return w

    v      = np.array([s0.x, s0.y, s0.z], dtype=float)
    times  = [0.0]
    states = [v.copy()]
    for k in range(n_steps):
        t = k*dt
        w = guarded_step(t, v, dt)
        if not is_finite(w):
            raise NumericalError("Bloch integration diverged at t = {}".format(t + dt),
                time=t, last_state=BlochVector.from_array(v))
        v = w
        if (k + 1) % every == 0 or k + 1 == n_steps:
            times.append((k + 1)*dt)
            states.append(v.copy())
    return BlochTrajectory(np.array(times), np.array(states))

# Critical point -----------------------------------------------------------------------------------

def critical_coupling(h, gamma_b):
    """lambda_c = h + Gamma_b^2/(4h); gamma_dep does not enter."""
    if not h > 0:
        raise ValueError("h must be positive, got {}".format(h))
    return h + gamma_b**2/(4*h)

# Steady states ------------------------------------------------------------------------------------

def _r0(gamma_b, gamma_dep):
    if gamma_b > 0:
        return gamma_dep/(2*gamma_b)
    return 0.0 if gamma_dep == 0 else math.inf


def _result(branch, v, z0, r0, mode, params, consistent=None):
    bloch    = BlochVector.from_array(v)
    residual = steady_state_residual(bloch, *params)
    if consistent is None:
        consistent = bool(np.linalg.norm(residual) < 1e-10)
    return SteadyStateResult(branch, bloch, z0, r0, residual, mode, consistent)


def _normal(mode, params):
    _, _, gamma_b, gamma_dep = params
    return _result("normal", (0.0, 0.0, 1.0), 1.0, _r0(gamma_b, gamma_dep), mode, params)


def _none(mode, r0, reason):
    logger.debug("No %s-mode broken solution: %s", mode, reason)
    return SteadyStateResult("none", BlochVector.undefined(), math.nan, r0, [math.nan]*4, mode, False)


def broken_phase_paper(h, lam, gamma_b, gamma_dep):
    """Closed-form broken phase, both sign branches, evaluated literally.

    Returns [broken-plus, broken-minus], or a single "none" result when the closed form has no
    real solution (negative discriminant, Z above 1, or no Gamma_b).
    """
    params = (h, lam, gamma_b, gamma_dep)
    r0     = _r0(gamma_b, gamma_dep)
    if not gamma_b > 0:
        return [_none("paper", r0, "Gamma_b = 0")]
    disc = lam**2 - gamma_b**2*(1 + r0*lam/h)
    if disc < 0:
        return [_none("paper", r0, "negative discriminant {}".format(disc))]
    z0 = (2*h/gamma_b**2)*(lam - math.sqrt(disc))
    z  = z0 - r0
    x2 = (1 - z**2)/(1 + gamma_b*z0**2/(2*h))
    if x2 < 0:
        return [_none("paper", r0, "Z = {} outside [-1, 1]".format(z))]
    x = math.sqrt(x2)
    y = (gamma_b/(2*h))*z0*x
    return [
        _result("broken-plus",  ( x,  y, z), z0, r0, "paper", params),
        _result("broken-minus", (-x, -y, z), z0, r0, "paper", params),
    ]


def steady_state_paper(h, lam, gamma_b, gamma_dep):
    params = (h, lam, gamma_b, gamma_dep)
    if lam <= critical_coupling(h, gamma_b):
        return [_normal("paper", params)]
    return broken_phase_paper(h, lam, gamma_b, gamma_dep)


def _classify(v):
    x, y, z = v
    if math.hypot(x, y) < 1e-6:
        return "normal" if z > 0 else "inverted"
    lead = x if abs(x) >= 1e-9 else y
    return "broken-plus" if lead > 0 else "broken-minus"


def _seeds(h, lam, gamma_b, gamma_dep):
    s = 1/math.sqrt(2)
    seeds = [
        (0.0, 0.0,  1.0), (0.0, 0.0, -1.0),
        (1.0, 0.0,  0.0), (-1.0, 0.0, 0.0),
        (0.0, 1.0,  0.0), (0.0, -1.0, 0.0),
    ]
    paper = [r for r in broken_phase_paper(h, lam, gamma_b, gamma_dep) if r.branch != "none"]
    if paper:
        seeds += [tuple(r.bloch.as_array()) for r in paper]
    else:
        seeds += [(s, 0.0, s), (-s, 0.0, s)]
    return seeds


def steady_state_oracle(h, lam, gamma_b, gamma_dep, tol=1e-12, max_iterations=200):
    """Steady states from a multi-start damped Gauss-Newton (Levenberg-Marquardt) solve.

    Returns one result per distinct solution found. Without dephasing only exact roots
    (residual < 1e-10) are kept; with dephasing every converged minimizer is returned with
    consistent=False unless its residual vanishes.
    """
    params = (h, lam, gamma_b, gamma_dep)
    r0     = _r0(gamma_b, gamma_dep)
    found  = []
    for seed in _seeds(*params):
        res = least_squares(_residual, np.array(seed, dtype=float), jac=_jacobian, args=params,
            method="lm", xtol=tol, ftol=tol, gtol=tol, max_nfev=max_iterations)
        norm = float(np.linalg.norm(res.fun))
        if res.status <= 0 or not is_finite(res.x):
            logger.debug("Seed %s did not converge: %s", seed, res.message)
            continue
        if gamma_dep == 0 and norm >= 1e-10:
            logger.debug("Seed %s stopped at residual %g, not a root", seed, norm)
            continue
        v      = res.x
        branch = _classify(v)
        if branch == "normal":
            v = (0.0, 0.0, 1.0)
        elif branch == "inverted":
            v = (0.0, 0.0, -1.0)
        if any(np.max(np.abs(np.asarray(v) - f.bloch.as_array())) < 1e-6 for f in found):
            continue
        z0 = v[2] + r0 if math.isfinite(r0) else v[2]
        found.append(_result(branch, v, z0, r0, "oracle", params))

    if not found:
        logger.warning("Oracle found no steady state for h=%g, lambda=%g, Gamma_b=%g, gamma_dep=%g",
            *params)
        return [SteadyStateResult("none", BlochVector.undefined(), math.nan, r0, [math.nan]*4,
            "oracle", False)]
    return sorted(found, key=lambda r: branches.index(r.branch))

# Phase diagram sweeps -----------------------------------------------------------------------------

sweep_axes = ["gamma_b", "gamma_dep"]

def _select(results):
    for branch in ["broken-plus", "normal"]:
        for r in results:
            if r.branch == branch:
                return r
    return None


def _sweep_point(item):
    h, lam, gamma_b, gamma_dep, mode = item
    lambda_c = critical_coupling(h, gamma_b)
    solve    = steady_state_paper if mode == "paper" else steady_state_oracle
    try:
        chosen = _select(solve(h, lam, gamma_b, gamma_dep))
    except (ValueError, ArithmeticError, NumericalError) as e:
        logger.warning("Sweep point lambda=%g Gamma_b=%g gamma_dep=%g failed: %s", lam, gamma_b, gamma_dep, e)
        chosen = None
    if chosen is None:
        return PhaseSweepPoint(lam, gamma_b, gamma_dep, h, BlochVector.undefined(), "gap", mode,
            math.nan, lambda_c)
    return PhaseSweepPoint(lam, gamma_b, gamma_dep, h, chosen.bloch, chosen.branch, mode,
        chosen.residual_norm, lambda_c)


def sweep_phase_diagram(lambdas, axis, values, h=1.0, gamma_b=0.0, gamma_dep=0.0, mode="paper", threads=1):
    """Steady state on a lambda x (Gamma_b or gamma_dep) grid, all rates in units of gamma.

    Points are ordered value-major, lambda-minor. The broken-plus branch is reported where it
    exists; failed points come back as "gap" rows.
    """
    lambdas = [float(l) for l in lambdas]
    values  = [float(v) for v in values]
    if not lambdas or not values:
        raise ConfigError("Empty sweep grid")
    if axis not in sweep_axes:
        raise ConfigError("Unknown sweep axis {}, expected one of {}".format(axis, ", ".join(sweep_axes)))
    if mode not in modes:
        raise ConfigError("Unknown mode {}, expected one of {}".format(mode, ", ".join(modes)))
    if not h > 0:
        raise ConfigError("h must be positive, got {}".format(h))

    items = []
    for value in values:
        gb = value if axis == "gamma_b"   else gamma_b
        gd = value if axis == "gamma_dep" else gamma_dep
        for lam in lambdas:
            items.append((h, lam, gb, gd, mode))
    logger.info("Sweeping %d points (%s mode)", len(items), mode)
    points = run_parallel(_sweep_point, items, threads)
    gaps = sum(1 for p in points if p.branch == "gap")
    if gaps:
        logger.warning("%d of %d sweep points have no steady state", gaps, len(points))
    return points


class TransitionJump(Settings):
    def __init__(self, lambda_c, lambda_below, lambda_above, z_below, z_above):
        self.set_attributes(locals())
        self.jump = abs(z_above - z_below)


def transition_jump(points):
    """|Delta Z| between the last point at or below lambda_c and the first solved point above it.

    points must come from one slice of a sweep (same Gamma_b, gamma_dep and h).
    """
    points = sorted(points, key=lambda p: p.lambda_over_gamma)
    below  = [p for p in points if p.lambda_over_gamma <= p.lambda_c_over_gamma and p.branch != "gap"]
    above  = [p for p in points if p.lambda_over_gamma >  p.lambda_c_over_gamma and p.branch != "gap"]
    if not below or not above:
        return None
    lo, hi = below[-1], above[0]
    return TransitionJump(lo.lambda_c_over_gamma, lo.lambda_over_gamma, hi.lambda_over_gamma,
        lo.first_moments.z, hi.first_moments.z)

# CSV ----------------------------------------------------------------------------------------------

sweep_header = [
    "lambda_over_gamma", "gamma_b_over_gamma", "gamma_dep_over_gamma",
    "X", "Y", "Z", "X2", "Y2", "Z2",
    "branch", "mode", "residual_norm",
    "h_over_gamma", "lambda_c_over_gamma",
]

def sweep_csv(points):
    rows = []
    for p in points:
        b = p.first_moments
        rows.append([p.lambda_over_gamma, p.gamma_b_over_gamma, p.gamma_dep_over_gamma,
            b.x, b.y, b.z, *p.quadratic_moments,
            p.branch, p.mode, p.residual_norm,
            p.h_over_gamma, p.lambda_c_over_gamma])
    return csv_content(sweep_header, rows)
