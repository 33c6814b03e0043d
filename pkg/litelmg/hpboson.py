#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Holstein-Primakoff boson reduction of the two-axis model.

With J+ = sqrt(N) d^dagger, J- = sqrt(N) d, Jz = d^dagger d - N/2 the weak-excitation dynamics is

    drho/dt = -i[H_T, rho] + Gamma_a D[d] + Gamma_b D[d^dagger] + gamma_dep D[d^dagger d]
    H_T     = -2h d^dagger d - lambda (d^2 + d^dagger^2)

H_T is quadratic and the dissipators are linear or number-conserving, so n = <d^dagger d>,
m = <d^2> and <d> obey a closed linear system. evolve_moments integrates that system;
evolve_fock integrates the master equation in a truncated Fock space and only serves as a check.
The vacuum is the fully polarized state; xi^2 = 1 + 2n - 2|m| when <d> = 0.
"""

import math
import cmath
import logging

import numpy as np

from litelmg.common import Settings, ConfigError, NumericalError, rk4_step, step_count, csv_content, run_parallel
from litelmg.lmgmap import LmgParams
from litelmg.dicke import LindbladChannel, lindblad_rhs, master_step
from litelmg.squeezing import SqueezingResult, to_db

logger = logging.getLogger(__name__)

solvers = ["moments", "fock"]

# Moments ------------------------------------------------------------------------------------------

class SecondMoments(Settings):
    def __init__(self, n, m, first=0j):
        n     = float(n)
        m     = complex(m)
        first = complex(first)
        self.set_attributes(locals())

    @classmethod
    def vacuum(cls):
        return cls(0.0, 0j, 0j)

    @classmethod
    def from_array(cls, y):
        return cls(y[0].real, y[1], y[2])

    def as_array(self):
        return np.array([self.n, self.m, self.first], dtype=complex)

    @property
    def physicality_margin(self):
        # n(n+1) - |m|^2 >= 0 for every state; zero for pure squeezed vacua.
        return self.n*(self.n + 1) - abs(self.m)**2

    def is_physical(self, tol=1e-9):
        return self.n >= -tol and self.physicality_margin >= -tol*max(1.0, self.n*(self.n + 1))


def moment_rhs(s, h, lam, gamma_a, gamma_b, gamma_dep):
    """(dn/dt, dm/dt, d<d>/dt) of the closed moment system."""
    n, m, d = s.n, s.m, s.first
    dn = 4*lam*m.imag - 2*gamma_a*n + 2*gamma_b*(n + 1)
    dm = 4j*h*m + 1j*lam*(4*n + 2) - 2*(gamma_a - gamma_b)*m - 4*gamma_dep*m
    dd = 1j*(2*h*d + 2*lam*d.conjugate()) - (gamma_a - gamma_b + gamma_dep)*d
    return dn, dm, dd


def _moment_vector_rhs(y, h, lam, gamma_a, gamma_b, gamma_dep):
    dn, dm, dd = moment_rhs(SecondMoments.from_array(y), h, lam, gamma_a, gamma_b, gamma_dep)
    return np.array([dn, dm, dd], dtype=complex)


class MomentTrajectory(Settings):
    def __init__(self, times, n, m, first, dt):
        self.set_attributes(locals())

    def __len__(self):
        return len(self.times)

    def moments(self, k):
        return SecondMoments(self.n[k], self.m[k], self.first[k])

    @property
    def xi2(self):
        return 1 + 2*self.n - 2*np.abs(self.m)

    @property
    def antisqueezing(self):
        return 1 + 2*self.n + 2*np.abs(self.m)


def evolve_moments(s0, params, t_end, dt, samples=None, physicality_abort=1e-6):
    """RK4 integration of the moment system; every step is recorded unless `samples` is given.

    The physicality margin n(n+1) - |m|^2 is watched every step; a relative violation above
    physicality_abort raises NumericalError (the step is too large).
    """
    if not s0.is_physical():
        raise ConfigError("initial moments are not physical: n = {}, |m| = {}".format(s0.n, abs(s0.m)))
    n_steps = step_count(t_end, dt)
    dt      = t_end/n_steps
    every   = 1 if samples is None else max(1, n_steps//max(1, samples))
    args    = (params.h, params.lam, params.gamma_a, params.gamma_b, params.gamma_dep)
    f       = lambda t, y: _moment_vector_rhs(y, *args)
    logger.debug("Moment evolution: %d steps of %g", n_steps, dt)

    y = s0.as_array()
    times, ys = [0.0], [y]
    for k in range(n_steps):
        new = rk4_step(f, k*dt, y, dt)
        t   = (k + 1)*dt
        if not np.all(np.isfinite(new)):
            raise NumericalError("Moment evolution diverged at t = {}".format(t),
                time=t, last_state=SecondMoments.from_array(y))
        s = SecondMoments.from_array(new)
        if s.physicality_margin < -physicality_abort*max(1.0, s.n*(s.n + 1)):
            raise NumericalError("Moments became unphysical at t = {} (n(n+1) - |m|^2 = {:g}); "
                "decrease dt".format(t, s.physicality_margin), time=t, last_state=SecondMoments.from_array(y))
        y = new
        if (k + 1) % every == 0 or k + 1 == n_steps:
            times.append(t)
            ys.append(y)

    ys = np.array(ys)
    return MomentTrajectory(
        times = np.array(times),
        n     = ys[:, 0].real.copy(),
        m     = ys[:, 1].copy(),
        first = ys[:, 2].copy(),
        dt    = dt,
    )

# Fock space ---------------------------------------------------------------------------------------

def annihilation(n_max):
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


class FockDensityMatrix(Settings):
    def __init__(self, n_max, entries):
        entries = np.asarray(entries, dtype=complex)
        if entries.shape != (n_max + 1, n_max + 1):
            raise ValueError("expected a {0}x{0} matrix, got {1}".format(n_max + 1, entries.shape))
        self.set_attributes(locals())

    @classmethod
    def vacuum(cls, n_max):
        return cls.from_ket(n_max, [1])

    @classmethod
    def from_ket(cls, n_max, amplitudes):
        # Amplitudes of |0>, |1>, ...; missing ones are zero.
        psi = np.zeros(n_max + 1, dtype=complex)
        psi[:len(amplitudes)] = amplitudes
        psi = psi/np.linalg.norm(psi)
        return cls(n_max, np.outer(psi, psi.conj()))

    @property
    def top_occupation(self):
        return float(self.entries[-1, -1].real)

    def moments(self):
        d = annihilation(self.n_max)
        return _fock_moments(self.entries, d)


def _fock_moments(rho, d):
    n     = np.trace(rho @ d.conj().T @ d).real
    m     = np.trace(rho @ d @ d)
    first = np.trace(rho @ d)
    return SecondMoments(n, m, first)


def fock_hamiltonian(n_max, params):
    d  = annihilation(n_max)
    dd = d.conj().T
    return -2*params.h*(dd @ d) - params.lam*(d @ d + dd @ dd)


def fock_dissipators(n_max, params):
    d  = annihilation(n_max)
    dd = d.conj().T
    out = [
        LindbladChannel(d,       params.gamma_a,   "a"),
        LindbladChannel(dd,      params.gamma_b,   "b"),
        LindbladChannel(dd @ d,  params.gamma_dep, "dephasing"),
    ]
    return [c for c in out if c.rate > 0]


class FockTrajectory(Settings):
    def __init__(self, times, n, m, first, top_occupation, final, dt):
        self.set_attributes(locals())

    @property
    def xi2(self):
        return 1 + 2*self.n - 2*np.abs(self.m)


def evolve_fock(rho0, params, t_end, dt, samples=200, step_factor=0.1, truncation=1e-6):
    """RK4 integration of the boson master equation in the Fock space of rho0."""
    if rho0.top_occupation >= truncation:
        raise ConfigError("initial state occupies |{}> with {:g}: raise n_max".format(
            rho0.n_max, rho0.top_occupation))
    H        = fock_hamiltonian(rho0.n_max, params)
    channels = fock_dissipators(rho0.n_max, params)
    d        = annihilation(rho0.n_max)
    dt       = master_step(dt, H, channels, step_factor)
    n_steps  = step_count(t_end, dt)
    dt       = t_end/n_steps
    every    = max(1, n_steps//max(1, samples))
    f        = lambda t, r: lindblad_rhs(r, H, channels)
    logger.info("Fock evolution: n_max %d, %d steps of %g", rho0.n_max, n_steps, dt)

    times, moments, tops = [], [], []

    def record(t, rho):
        times.append(t)
        moments.append(_fock_moments(rho, d))
        tops.append(float(rho[-1, -1].real))

    rho = rho0.entries.copy()
    record(0.0, rho)
    for k in range(n_steps):
        new = rk4_step(f, k*dt, rho, dt)
        t   = (k + 1)*dt
        if not np.all(np.isfinite(new)):
            raise NumericalError("Fock evolution diverged at t = {}".format(t),
                time=t, last_state=FockDensityMatrix(rho0.n_max, rho))
        top = float(new[-1, -1].real)
        if top >= truncation:
            raise NumericalError("Fock truncation exceeded at t = {}: |{}> holds {:g}; "
                "increase n_max".format(t, rho0.n_max, top),
                time=t, last_state=FockDensityMatrix(rho0.n_max, rho))
        rho = (new + new.conj().T)/2
        if (k + 1) % every == 0 or k + 1 == n_steps:
            record(t, rho)

    return FockTrajectory(
        times          = np.array(times),
        n              = np.array([s.n for s in moments]),
        m              = np.array([s.m for s in moments]),
        first          = np.array([s.first for s in moments]),
        top_occupation = np.array(tops),
        final          = FockDensityMatrix(rho0.n_max, rho),
        dt             = dt,
    )

# Squeezing ----------------------------------------------------------------------------------------

def hp_squeezing(s, n_spins):
    if abs(s.first) >= 1e-9:
        raise ValueError("<d> = {} is not zero: the closed form needs a centered state".format(s.first))
    if s.n > 0.01*n_spins:
        logger.warning("Weak-excitation bound violated: n/N = %g > 0.01", s.n/n_spins)
    xi2 = 1 + 2*s.n - 2*abs(s.m)
    # The squeezed quadrature sits a quarter turn from the phase of m/2.
    beta = (cmath.phase(s.m)/2 + math.pi/2) % math.pi
    return SqueezingResult(xi2=xi2, xi2_db=to_db(xi2), theta=0.0, phi=0.0, beta_opt=beta)


def antisqueezing(s):
    return 1 + 2*s.n + 2*abs(s.m)

# Rate grid ----------------------------------------------------------------------------------------

grid_gammas     = [0.1, 0.01, 0.001]
grid_gamma_deps = [0.02, 0.03, 0.04]

class GridCurve(Settings):
    def __init__(self, gamma, gamma_dep, diagonal_pair, antidiagonal_pair, headline):
        self.set_attributes(locals())


def rate_grid():
    """All 9 (Gamma, gamma_dep) combinations, Gamma-major.

    The two rate triples pair up either index by index (diagonal_pair: (0.1, 0.02), (0.01, 0.03),
    (0.001, 0.04)) or in reverse order (antidiagonal_pair), which holds the headline curve
    (0.001, 0.02). Both pairings are flagged.
    """
    curves = []
    for i, gamma in enumerate(grid_gammas):
        for k, gamma_dep in enumerate(grid_gamma_deps):
            curves.append(GridCurve(
                gamma             = gamma,
                gamma_dep         = gamma_dep,
                diagonal_pair     = i == k,
                antidiagonal_pair = i + k == 2,
                headline          = (gamma, gamma_dep) == (0.001, 0.02)))
    return curves


def grid_params(curve, lam=1.0, h=0.0, n_spins=1e12):
    return LmgParams.from_dimensionless(h=h, lam=lam, chi=-1.0, gamma_a=curve.gamma,
        gamma_b=curve.gamma, gamma_dep=curve.gamma_dep, n_spins=n_spins)


def _grid_point(item):
    curve, lam, h, t_end, dt = item
    return evolve_moments(SecondMoments.vacuum(), grid_params(curve, lam, h), t_end, dt)


def run_rate_grid(t_end, dt, lam=1.0, h=0.0, curves=None, threads=1):
    """Moment trajectories of every grid curve, in grid order."""
    curves = rate_grid() if curves is None else list(curves)
    if not curves:
        raise ConfigError("empty squeezing grid")
    items  = [(c, lam, h, t_end, dt) for c in curves]
    trajectories = run_parallel(_grid_point, items, threads)
    return list(zip(curves, trajectories))

# CSV ----------------------------------------------------------------------------------------------

squeeze_header = ["t", "n", "re_m", "im_m", "xi2", "xi2_db", "solver"]

def _xi2_db(xi2):
    return to_db(xi2) if xi2 > 0 else -math.inf


def _squeeze_rows(trajectory, solver):
    rows = []
    for t, n, m, xi2 in zip(trajectory.times, trajectory.n, trajectory.m, trajectory.xi2):
        rows.append([float(t), float(n), float(m.real), float(m.imag), float(xi2), float(_xi2_db(xi2)), solver])
    return rows


def squeeze_csv(trajectory, solver="moments"):
    if solver not in solvers:
        raise ConfigError("Unknown solver {}, expected one of {}".format(solver, ", ".join(solvers)))
    return csv_content(squeeze_header, _squeeze_rows(trajectory, solver))


def squeeze_grid_csv(results, solver="moments"):
    rows = []
    for curve, trajectory in results:
        for row in _squeeze_rows(trajectory, solver):
            rows.append(row + [float(curve.gamma), float(curve.gamma_dep)])
    return csv_content(squeeze_header + ["gamma", "gamma_dep"], rows)
