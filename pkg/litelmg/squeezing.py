#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Spin-squeezing parameter of a collective spin.

The mean spin fixes n0 = (sin th cos ph, sin th sin ph, cos th); the two perpendicular axes
n1 = (-sin ph, cos ph, 0) and n2 = (cos th cos ph, cos th sin ph, -sin th) span the plane in which
the variance is minimized:

    xi^2 = (2/N)[A + B - sqrt((A - B)^2 + 4 C^2)]

with A, B the variances of J_n1, J_n2 and C their symmetrized covariance.
The root holds 4C^2, the minimum over the quadrature angle.
"""

import math
import logging

import numpy as np

from litelmg.common import Settings
from litelmg.dicke import expectations

logger = logging.getLogger(__name__)

# Exceptions ---------------------------------------------------------------------------------------

class DegenerateDirectionError(ValueError):
    """Mean spin vanishes: no frame, no squeezing parameter."""

# Moments ------------------------------------------------------------------------------------------

class SpinMoments(Settings):
    def __init__(self, first, second, n_spins):
        first  = np.asarray(first,  dtype=float)
        second = np.asarray(second, dtype=float)
        if first.shape != (3,) or second.shape != (3, 3):
            raise ValueError("expected 3 first moments and a 3x3 second-moment matrix")
        if not np.allclose(second, second.T, rtol=0, atol=1e-9*max(1.0, np.max(np.abs(second)))):
            raise ValueError("second-moment matrix is not symmetric")
        self.set_attributes(locals())

    @classmethod
    def from_density(cls, rho, ops):
        first, second = expectations(rho, ops)
        return cls(first, second, ops.n_spins)

    @property
    def j(self):
        return self.n_spins/2

    def covariance(self, u, v):
        """Symmetrized covariance of J.u and J.v."""
        u, v = np.asarray(u), np.asarray(v)
        return float(u @ self.second @ v - (u @ self.first)*(v @ self.first))


class SqueezingResult(Settings):
    def __init__(self, xi2, xi2_db, theta, phi, beta_opt):
        self.set_attributes(locals())

    def as_record(self):
        return dict(self.as_dict())

# Frame --------------------------------------------------------------------------------------------

def mean_spin_direction(first, n_spins, tol=1e-9):
    """Spherical angles (theta in [0, pi], phi in [0, 2pi)) of the mean spin."""
    x, y, z = (float(v) for v in first)
    r = math.sqrt(x*x + y*y + z*z)
    if not r > tol*n_spins/2:
        raise DegenerateDirectionError("mean spin |<J>| = {:g} vanishes (tolerance {:g}): "
            "the squeezing parameter is undefined".format(r, tol*n_spins/2))
    theta = math.acos(max(-1.0, min(1.0, z/r)))
    phi   = math.atan2(y, x) % (2*math.pi)
    return theta, phi


def perpendicular_frame(theta, phi):
    n1 = np.array([-math.sin(phi), math.cos(phi), 0.0])
    n2 = np.array([math.cos(theta)*math.cos(phi), math.cos(theta)*math.sin(phi), -math.sin(theta)])
    return n1, n2


def mean_direction_vector(theta, phi):
    return np.array([math.sin(theta)*math.cos(phi), math.sin(theta)*math.sin(phi), math.cos(theta)])

# Squeezing ----------------------------------------------------------------------------------------

def to_db(xi2):
    if not xi2 > 0:
        raise ValueError("xi2 must be positive to convert to dB, got {}".format(xi2))
    return 10*math.log10(xi2)


def squeezing_parameter(m):
    theta, phi = mean_spin_direction(m.first, m.n_spins)
    n1, n2 = perpendicular_frame(theta, phi)
    A = m.covariance(n1, n1)
    B = m.covariance(n2, n2)
    C = m.covariance(n1, n2)
    xi2 = (2/m.n_spins)*(A + B - math.sqrt((A - B)**2 + 4*C**2))
    # Var(cos b J_n1 + sin b J_n2) is smallest at this b.
    beta = (0.5*math.atan2(2*C, A - B) + math.pi/2) % math.pi
    if xi2 <= 0:
        logger.warning("Non-positive squeezing parameter %g (moments are not those of a state)", xi2)
        xi2_db = -math.inf
    else:
        xi2_db = to_db(xi2)
    return SqueezingResult(xi2=xi2, xi2_db=xi2_db, theta=theta, phi=phi, beta_opt=beta)


def perpendicular_variance(m, beta):
    """(4/N) Var(J_n_perp(beta)), n_perp = cos(beta) n1 + sin(beta) n2."""
    theta, phi = mean_spin_direction(m.first, m.n_spins)
    n1, n2 = perpendicular_frame(theta, phi)
    u = math.cos(beta)*n1 + math.sin(beta)*n2
    return (4/m.n_spins)*m.covariance(u, u)


def trajectory_squeezing(first, second, n_spins):
    """xi^2 at every sample of a recorded expectation series."""
    return np.array([squeezing_parameter(SpinMoments(f, s, n_spins)).xi2
        for f, s in zip(first, second)])

# Time scales --------------------------------------------------------------------------------------

def squeezing_window(times, xi2):
    """(t_min, xi2_min, t_exit): the deepest point and the first later time xi2 is back at >= 1.

    t_exit is None when the series stays squeezed up to its end.
    """
    times = np.asarray(times, dtype=float)
    xi2   = np.asarray(xi2,   dtype=float)
    if len(times) == 0 or len(times) != len(xi2):
        raise ValueError("times and xi2 must be non-empty and of equal length")
    k = int(np.argmin(xi2))
    t_exit = None
    for t, v in zip(times[k:], xi2[k:]):
        if v >= 1:
            t_exit = float(t)
            break
    return float(times[k]), float(xi2[k]), t_exit


def physical_time_us(t, gamma):
    """Dimensionless time t (in units of 1/gamma) in microseconds, gamma given as gamma/2pi in MHz."""
    if not gamma > 0:
        raise ValueError("gamma must be positive, got {}".format(gamma))
    return t/(2*math.pi*gamma)
