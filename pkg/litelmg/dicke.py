#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Exact finite-N dynamics in the symmetric (j = N/2) Dicke sector.

Basis index k holds |j, m> with m = -j + k. Lindblad dissipators follow

    D[O] rho = 2 O rho O^dagger - O^dagger O rho - rho O^dagger O

(twice the usual normalization); every rate in this package is a rate for that form.
"""

import math
import logging

import numpy as np
from scipy.linalg import expm

from litelmg.common import Settings, ConfigError, NumericalError, rk4_step, step_count, csv_content
from litelmg.lmgmap import eliminate_channel

logger = logging.getLogger(__name__)

# Default cap on N (dense (N+1)x(N+1) matrices).
DIMENSION_CAP = 400

# Operators ----------------------------------------------------------------------------------------

class CollectiveOperators(Settings):
    def __init__(self, n_spins, jx, jy, jz, jp, jm):
        self.set_attributes(locals())
        self.j         = n_spins/2
        self.dimension = n_spins + 1
        self.m         = np.arange(self.dimension) - self.j

    @property
    def identity(self):
        return np.eye(self.dimension, dtype=complex)

    def casimir(self):
        return self.jx @ self.jx + self.jy @ self.jy + self.jz @ self.jz


def build_operators(n_spins, cap=DIMENSION_CAP):
    if int(n_spins) != n_spins or n_spins < 1:
        raise ConfigError("n_spins must be a positive integer, got {}".format(n_spins))
    n_spins = int(n_spins)
    if n_spins > cap:
        raise ConfigError("n_spins = {} exceeds the Dicke dimension cap {}".format(n_spins, cap))
    j = n_spins/2
    m = np.arange(n_spins + 1) - j
    # <j, m+1|J+|j, m> = sqrt(j(j+1) - m(m+1))
    jp = np.diag(np.sqrt(j*(j + 1) - m[:-1]*(m[:-1] + 1)), k=-1).astype(complex)
    jm = jp.conj().T.copy()
    jx = (jp + jm)/2
    jy = (jp - jm)/2j
    jz = np.diag(m).astype(complex)
    return CollectiveOperators(n_spins, jx, jy, jz, jp, jm)

# States -------------------------------------------------------------------------------------------

class DensityMatrix(Settings):
    def __init__(self, entries):
        entries = np.asarray(entries, dtype=complex)
        assert entries.ndim == 2 and entries.shape[0] == entries.shape[1]
        self.entries   = entries
        self.dimension = entries.shape[0]

    @classmethod
    def from_ket(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi/np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def trace(self):
        return complex(np.trace(self.entries))

    def hermiticity_error(self):
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh((self.entries + self.entries.conj().T)/2)[0])

    def expect(self, op):
        return complex(np.trace(self.entries @ op))

    def check(self, tol=1e-10, positivity=-1e-8):
        """Raise ValueError unless hermitian, unit trace and positive within tolerances."""
        if self.hermiticity_error() > tol:
            raise ValueError("Density matrix is not hermitian (error {})".format(self.hermiticity_error()))
        if abs(self.trace - 1) > tol:
            raise ValueError("Density matrix trace is {}".format(self.trace))
        if self.min_eigenvalue() < positivity:
            raise ValueError("Density matrix has eigenvalue {}".format(self.min_eigenvalue()))


def coherent_spin_state(n_spins, theta, phi, cap=DIMENSION_CAP):
    """Coherent spin state |theta, phi>: |j, j> rotated to the direction (theta, phi).

    Built as exp(-i phi Jz) exp(-i theta Jy)|j, j>, so <J>/j = (sin th cos ph, sin th sin ph, cos th).
    """
    ops  = build_operators(n_spins, cap)
    top  = np.zeros(ops.dimension, dtype=complex)
    top[-1] = 1
    psi  = expm(-1j*phi*ops.jz) @ (expm(-1j*theta*ops.jy) @ top)
    return DensityMatrix.from_ket(psi)


def ground_state(H):
    """Lowest eigenvalue of a Hermitian matrix and its (normalized) eigenvector."""
    w, v = np.linalg.eigh(H)
    return float(w[0]), v[:, 0]


def expectations(rho, ops):
    """First and symmetrized second moments of the collective spin in state rho."""
    J      = [ops.jx, ops.jy, ops.jz]
    r      = rho.entries if isinstance(rho, DensityMatrix) else rho
    first  = np.array([np.trace(r @ a).real for a in J])
    second = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            s = np.trace(r @ (J[a] @ J[b] + J[b] @ J[a])).real/2
            second[a, b] = second[b, a] = s
    return first, second

# Hamiltonians -------------------------------------------------------------------------------------

def build_lmg_hamiltonian(ops, p):
    """-2h Jz - (2 lambda/N)(Jx^2 + chi Jy^2)."""
    if ops.n_spins != p.n_spins:
        raise ConfigError("operators are built for N = {}, parameters for N = {}".format(
            ops.n_spins, p.n_spins))
    if not math.isfinite(p.chi):
        raise ConfigError("chi must be finite to build a Hamiltonian")
    n = ops.n_spins
    H = -2*p.h*ops.jz - (2*p.lam/n)*(ops.jx @ ops.jx + p.chi*(ops.jy @ ops.jy))
    return (H + H.conj().T)/2


def _channel_operator(ops, c):
    return c.l_alpha*ops.jp + c.l_beta*ops.jm


def build_generic_hamiltonian(ops, a, b, mu0):
    """mu0 Jz - sum_i zeta_i/(N K_i) A_i A_i^dagger, A_i = L_alpha^i J+ + L_beta^i J-."""
    n = ops.n_spins
    H = mu0*ops.jz
    for c in [a, b]:
        A = _channel_operator(ops, c)
        H = H - (c.zeta/(n*c.k_denominator))*(A @ A.conj().T)
    return (H + H.conj().T)/2

# Dissipators --------------------------------------------------------------------------------------

class LindbladChannel(Settings):
    def __init__(self, operator, rate, label=""):
        if rate < 0:
            raise ValueError("rate must be nonnegative, got {}".format(rate))
        operator = np.asarray(operator, dtype=complex)
        self.set_attributes(locals())
        self._prepare()

    def _prepare(self):
        O = self.operator
        self._adjoint  = O.conj().T
        self._number   = self._adjoint @ O
        self._diagonal = bool(np.count_nonzero(O - np.diag(np.diag(O))) == 0)
        if self._diagonal:
            o = np.diag(O)
            # D[O] acts element-wise for diagonal O.
            self._mask = 2*np.outer(o, o.conj()) - np.abs(o)[:, None]**2 - np.abs(o)[None, :]**2

    def apply(self, rho):
        if self._diagonal:
            return self.rate*self._mask*rho
        O, Od, N = self.operator, self._adjoint, self._number
        return self.rate*(2*(O @ rho @ Od) - N @ rho - rho @ N)

    def norm_estimate(self):
        return 2*self.rate*np.linalg.norm(self.operator, 2)**2


def build_dissipators(ops, channels, gamma_dep):
    """Channel i gives jump A_i^dagger = L_alpha^i* J- + L_beta^i* J+ at rate kappa_i/(N K_i)."""
    out = []
    for label, c in zip(["a", "b"], channels):
        e = eliminate_channel(c)
        if e.rate == 0 or (e.jump_alpha == 0 and e.jump_beta == 0):
            continue
        out.append(LindbladChannel(e.jump_alpha*ops.jm + e.jump_beta*ops.jp, e.rate/ops.n_spins, label))
    if gamma_dep > 0:
        out.append(LindbladChannel(ops.jz, gamma_dep, "dephasing"))
    return out


def reduced_dissipators(ops, p, variant):
    """Per-variant dissipators of the dimensionless model.

    two-axis and isotropic: (Gamma_a/N) D[J-] + (Gamma_b/N) D[J+]; one-axis:
    (Gamma_a/(2N)) D[2Jx] + (Gamma_b/N) D[J+]; plus gamma_dep D[Jz]. The one-axis jump is
    sigma_a (J- + J+)/sqrt(2) with Gamma_a = sigma_a^2 kappa_a/K_a, hence the 1/2 on D[2Jx].
    """
    n = ops.n_spins
    if variant in ["two-axis", "isotropic", "generic"]:
        first = LindbladChannel(ops.jm, p.gamma_a/n, "a")
    elif variant == "one-axis":
        first = LindbladChannel(2*ops.jx, p.gamma_a/(2*n), "a")
    else:
        raise ConfigError("Unknown variant {}".format(variant))
    out = [first, LindbladChannel(ops.jp, p.gamma_b/n, "b"), LindbladChannel(ops.jz, p.gamma_dep, "dephasing")]
    return [c for c in out if c.rate > 0]


def lindblad_rhs(rho, H, channels):
    """-i[H, rho] + sum rate*(2 O rho O^dagger - O^dagger O rho - rho O^dagger O)."""
    d = -1j*(H @ rho - rho @ H)
    for c in channels:
        d = d + c.apply(rho)
    return d

# Evolution ----------------------------------------------------------------------------------------

class MasterTrajectory(Settings):
    def __init__(self, times, first, second, trace_err, min_eig, final, dt, states=None):
        self.set_attributes(locals())

    @property
    def jx(self):
        return self.first[:, 0]

    @property
    def jy(self):
        return self.first[:, 1]

    @property
    def jz(self):
        return self.first[:, 2]

    @property
    def cov_12(self):
        return self.second[:, 0, 1] - self.first[:, 0]*self.first[:, 1]


def master_step(dt_user, H, channels, step_factor=0.01, stability_factor=1.0):
    """RK4 step: dt_user capped by step_factor/||H|| and stability_factor/||D||."""
    dt = dt_user
    h_norm = np.max(np.abs(np.linalg.eigvalsh(H))) if H.size else 0.0
    if h_norm > 0:
        dt = min(dt, step_factor/h_norm)
    d_norm = sum(c.norm_estimate() for c in channels)
    if d_norm > 0:
        dt = min(dt, stability_factor/d_norm)
    return dt


def evolve_master(rho0, H, channels, t_end, dt, ops=None, samples=200, step_factor=0.01,
                  positivity_abort=-1e-6, keep_states=False):
    """Fixed-step RK4 integration of the master equation.

    Expectations of the collective spin are recorded on about `samples` evenly spaced times (ops
    required for those). Each step is renormalized to unit trace; the recorded trace_err is the
    largest |Tr(rho) - 1| a step produced before renormalizing, since the previous sample.
    Positivity is checked at the recorded samples only.
    """
    if not isinstance(rho0, DensityMatrix):
        rho0 = DensityMatrix(rho0)
    rho0.check(tol=1e-8)
    if ops is None:
        ops = build_operators(rho0.dimension - 1)
    if ops.dimension != rho0.dimension:
        raise ConfigError("state dimension {} does not match operators {}".format(
            rho0.dimension, ops.dimension))

    dt      = master_step(dt, H, channels, step_factor)
    n_steps = step_count(t_end, dt)
    dt      = t_end/n_steps
    every   = max(1, n_steps//max(1, samples))
    states  = [] if keep_states else None
    f       = lambda t, r: lindblad_rhs(r, H, channels)
    logger.info("Master equation: dimension %d, %d channels, %d steps of %g",
        rho0.dimension, len(channels), n_steps, dt)

    times, firsts, seconds, trace_errs, min_eigs = [], [], [], [], []

    def record(t, rho, trace_err):
        first, second = expectations(rho, ops)
        w = float(np.linalg.eigvalsh((rho + rho.conj().T)/2)[0])
        times.append(t)
        firsts.append(first)
        seconds.append(second)
        trace_errs.append(trace_err)
        min_eigs.append(w)
        if keep_states:
            states.append(DensityMatrix(rho.copy()))
        if w < positivity_abort:
            raise NumericalError("Density matrix lost positivity at t = {} (eigenvalue {}); "
                "decrease dt".format(t, w), time=t, last_state=DensityMatrix(rho))

    rho = rho0.entries.copy()
    record(0.0, rho, abs(np.trace(rho) - 1))
    drift = 0.0
    for k in range(n_steps):
        t   = k*dt
        new = rk4_step(f, t, rho, dt)
        if not np.all(np.isfinite(new)):
            raise NumericalError("Master equation diverged at t = {}".format(t + dt),
                time=t, last_state=DensityMatrix(rho))
        new   = (new + new.conj().T)/2
        trace = np.trace(new).real
        drift = max(drift, abs(trace - 1))
        rho   = new/trace
        if (k + 1) % every == 0 or k + 1 == n_steps:
            record((k + 1)*dt, rho, drift)
            drift = 0.0

    return MasterTrajectory(
        times     = np.array(times),
        first     = np.array(firsts),
        second    = np.array(seconds),
        trace_err = np.array(trace_errs),
        min_eig   = np.array(min_eigs),
        final     = DensityMatrix(rho),
        dt        = dt,
        states    = states,
    )

# CSV ----------------------------------------------------------------------------------------------

master_header = ["t", "jx", "jy", "jz", "jx2", "jy2", "jz2", "cov_12", "trace_err", "min_eig"]

def master_csv(trajectory):
    tr   = trajectory
    rows = []
    for k, t in enumerate(tr.times):
        rows.append([float(t), *[float(v) for v in tr.first[k]],
            float(tr.second[k, 0, 0]), float(tr.second[k, 1, 1]), float(tr.second[k, 2, 2]),
            float(tr.cov_12[k]), float(tr.trace_err[k]), float(tr.min_eig[k])])
    return csv_content(master_header, rows)
