#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Physical NV-ensemble/two-cavity device and its effective Raman parameters.

The device is two coupled cavities whose symmetric/antisymmetric supermodes (a, b) each drive a
Raman transition of the NV spin ensemble with two Rabi fields. Eliminating the excited levels leaves
a collective Stark shift mu0, supermode frequency pulls zeta_a/zeta_b and four complex spin-photon
products L = sigma*alpha, sigma*beta, one pair per supermode. Only those products are stored: the
split into sigma and (alpha, beta) is a gauge choice that nothing downstream depends on.

Units: every frequency is value/2pi in MHz (see litelmg.common).
"""

import math
import cmath
import logging
from typing import Optional

from litelmg.common import Settings, ConfigError, flat_record

logger = logging.getLogger(__name__)

# Helpers ------------------------------------------------------------------------------------------

# N the reference couplings are given at.
PRESET_N = 1e12

_delta_names = ["Delta_a1", "Delta_a2", "Delta_b1", "Delta_b2"]

def _four(name, values):
    if values is None:
        return None
    values = list(values)
    if len(values) != 4:
        raise ConfigError("{}: expected 4 values, got {}".format(name, len(values)))
    return values


def normal_mode_transform(omega_c1, omega_c2, epsilon, eta1, eta2):
    """Supermode frequencies and couplings of two cavities coupled at rate epsilon.

    Returns (nu_a, nu_b, (g1, g2, g3, g4)); supermode a is the symmetric one.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive, got {}".format(epsilon))
    center = (omega_c1 + omega_c2)/2
    nu_a   = center + epsilon
    nu_b   = center - epsilon
    g13    = eta1/math.sqrt(2)
    g24    = eta2/math.sqrt(2)
    return nu_a, nu_b, (g13, g24, g13, g24)

# Device -------------------------------------------------------------------------------------------

class PhysicalDeviceParams(Settings):
    def __init__(self,
            n_spins: float,                     # N, float since it reaches 1e12
            omega_rabi,                         # Omega_1..Omega_4, complex (magnitude + phase)
            delta,                              # Delta_a1, Delta_a2, Delta_b1, Delta_b2, signed
            kappa,                              # kappa_a, kappa_b (or one value for both)
            g=None,                             # g_1..g_4, single-spin couplings
            g_collective=None,                  # sqrt(N)*g_1..g_4, alternative to g
            gamma_dep: float = 0.0,             # collective dephasing rate
            delta_b: Optional[float] = None,    # Zeeman splitting, regime validation only
            label: Optional[str] = None,
        ):
        n_spins = float(n_spins)
        if not n_spins > 0:
            raise ConfigError("n_spins must be positive, got {}".format(n_spins))
        if (g is None) == (g_collective is None):
            raise ConfigError("exactly one of g and g_collective must be given")
        omega_rabi = tuple(complex(o) for o in _four("omega_rabi", omega_rabi))
        delta      = tuple(float(d) for d in _four("delta", delta))
        for _name, _d in zip(_delta_names, delta):
            if _d == 0:
                raise ConfigError("{} is zero: zero detuning is not allowed".format(_name))
        if isinstance(kappa, (int, float)):
            kappa = (kappa, kappa)
        kappa = tuple(float(k) for k in kappa)
        if len(kappa) != 2 or not all(k > 0 for k in kappa):
            raise ConfigError("kappa must be two positive rates, got {}".format(kappa))
        if g is not None:
            g = tuple(float(v) for v in _four("g", g))
            g_collective = tuple(math.sqrt(n_spins)*v for v in g)
        else:
            g_collective = tuple(float(v) for v in _four("g_collective", g_collective))
            g = tuple(v/math.sqrt(n_spins) for v in g_collective)
        if any(v < 0 for v in g):
            raise ConfigError("couplings must be nonnegative (phases go on omega_rabi)")
        if gamma_dep < 0:
            raise ConfigError("gamma_dep must be nonnegative, got {}".format(gamma_dep))
        self.set_attributes(locals())
        self.gamma_dep = float(gamma_dep)

    def as_record(self):
        items = [("n_spins", self.n_spins)]
        items += [("g{}".format(k + 1), v) for k, v in enumerate(self.g)]
        items += [("g_collective{}".format(k + 1), v) for k, v in enumerate(self.g_collective)]
        items += [("omega{}".format(k + 1), v) for k, v in enumerate(self.omega_rabi)]
        items += [(name.lower(), v) for name, v in zip(_delta_names, self.delta)]
        items += [("kappa_a", self.kappa[0]), ("kappa_b", self.kappa[1])]
        items += [("gamma_dep", self.gamma_dep), ("delta_b", self.delta_b), ("label", self.label)]
        return flat_record(items)


class EffectiveRamanParams(Settings):
    def __init__(self, mu0, zeta_a, zeta_b, eta_a_minus, eta_b_minus,
                 l_alpha_a, l_beta_a, l_alpha_b, l_beta_b):
        self.set_attributes(locals())

    @property
    def sigma_a(self):
        return math.sqrt(abs(self.l_alpha_a)**2 + abs(self.l_beta_a)**2)

    @property
    def sigma_b(self):
        return math.sqrt(abs(self.l_alpha_b)**2 + abs(self.l_beta_b)**2)

    def as_record(self):
        return flat_record(self.as_dict().items())


def effective_raman_params(p):
    """Effective Raman parameters of a device, transcribed term by term."""
    n = p.n_spins
    d_a1, d_a2, d_b1, d_b2 = p.delta
    o1, o2, o3, o4         = p.omega_rabi
    # Work with collective couplings G = sqrt(N)*g so N g^2 never leaves the G^2 scale.
    G1, G2, G3, G4         = p.g_collective

    mu0_g = (G1**2/d_a1 - G2**2/d_a2 + G3**2/d_b1 - G4**2/d_b2)/n
    mu0_o = (abs(o1)**2/d_a2 + abs(o2)**2/d_a1 - abs(o3)**2/d_b2 - abs(o4)**2/d_b1)/4

    zeta_a = (G1**2/d_a1 - G2**2/d_a2)/2
    zeta_b = (G3**2/d_b1 - G4**2/d_b2)/2

    return EffectiveRamanParams(
        mu0         = mu0_g + mu0_o,
        zeta_a      = zeta_a,
        zeta_b      = zeta_b,
        eta_a_minus = zeta_a*2/n,
        eta_b_minus = zeta_b*2/n,
        l_alpha_a   =  G1*o2.conjugate()/(2*d_a1),
        l_beta_a    = -G2*o1.conjugate()/(2*d_a2),
        l_alpha_b   =  G3*o4.conjugate()/(2*d_b1),
        l_beta_b    = -G4*o3.conjugate()/(2*d_b2),
    )

# Regime validation --------------------------------------------------------------------------------

class RegimeWarning(Settings):
    # ratio = required/available: above 1 means the condition is violated, inf when nothing is
    # available at all.
    def __init__(self, condition, lhs, rhs):
        if lhs > 0:
            ratio = rhs/lhs
        else:
            ratio = math.inf
        self.set_attributes(locals())

    def as_record(self):
        return flat_record(self.as_dict().items())


def _check(warnings, condition, lhs, rhs):
    if not lhs >= rhs:
        w = RegimeWarning(condition, lhs, rhs)
        logger.warning("Regime condition violated: %s (%g < %g, ratio %g)", condition, lhs, rhs, w.ratio)
        warnings.append(w)


def bad_cavity_condition(channel, kappa, zeta, sigma, mu0, ratio=10.0):
    """Bad-cavity check of one supermode; returns a RegimeWarning or None."""
    warnings = []
    _check(warnings,
        condition = "sqrt(kappa_{0}^2 + zeta_{0}^2) >= R*max(sigma_{0}, |mu0|)".format(channel),
        lhs       = math.sqrt(kappa**2 + zeta**2),
        rhs       = ratio*max(sigma, abs(mu0)))
    return warnings[0] if warnings else None


def validate_regime(p, e, ratio=10.0):
    """List the violated validity conditions of the effective model (never raises)."""
    warnings = []
    drive = max(max(p.g), max(abs(o) for o in p.omega_rabi))
    d_a1, d_a2, d_b1, d_b2 = p.delta

    if p.delta_b is None:
        logger.debug("No Zeeman splitting given, skipping the delta_B condition")
    else:
        _check(warnings, "delta_B >= R*max(g_k, |Omega_k|)", abs(p.delta_b), ratio*drive)

    for label, value in [
            ("|Delta_a1 + Delta_b1|", abs(d_a1 + d_b1)),
            ("|Delta_a1 - Delta_b1|", abs(d_a1 - d_b1)),
            ("|Delta_a2 + Delta_b2|", abs(d_a2 + d_b2)),
            ("|Delta_a2 - Delta_b2|", abs(d_a2 - d_b2)),
        ]:
        _check(warnings, label + " >= R*max(g_k, |Omega_k|)", value, ratio*drive)

    for channel, kappa, zeta, sigma in [
            ("a", p.kappa[0], e.zeta_a, e.sigma_a),
            ("b", p.kappa[1], e.zeta_b, e.sigma_b),
        ]:
        w = bad_cavity_condition(channel, kappa, zeta, sigma, e.mu0, ratio)
        if w is not None:
            warnings.append(w)
    return warnings

# Presets ------------------------------------------------------------------------------------------

class _PresetColumn(Settings):
    def __init__(self, g_collective, omega_rabi, delta, phases):
        self.set_attributes(locals())

# Magnitudes as listed; detuning signs and Rabi phases chosen so the L products come out with the
# listed signs (two-axis sigma_b*beta_b = -0.3, isotropic sigma_b*beta_b = +0.3, ...).
_presets = {
    "two-axis": _PresetColumn(
        g_collective = 12,
        omega_rabi   = (4, 1, 1, 4),
        delta        = (20, 80, 80, 20),
        phases       = (math.pi, 0, 0, 0)),
    "isotropic": _PresetColumn(
        g_collective = 12,
        omega_rabi   = (0, 1, 1, 0),
        delta        = (20, 80, -80, -20),
        phases       = (0, 0, 0, 0)),
    "one-axis": _PresetColumn(
        g_collective = 12,
        omega_rabi   = (7, 3, 0.77, 0),
        delta        = (30, 70, 50, 50),
        phases       = (math.pi, 0, math.pi, 0)),
}

preset_variants = list(_presets.keys())


def _phased(magnitude, phase):
    # Phase pi is stored as an exact sign flip.
    if phase == math.pi:
        return complex(-magnitude)
    if phase == 0:
        return complex(magnitude)
    return cmath.rect(magnitude, phase)


def device_preset(variant, n_spins=PRESET_N, kappa=0.1, gamma_dep=0.0, delta_b=None):
    """Device parameters of one reference device, couplings rescaled to n_spins."""
    try:
        column = _presets[variant]
    except KeyError:
        raise ConfigError("Unknown variant {}, expected one of {}".format(
            variant, ", ".join(preset_variants)))
    scale = math.sqrt(n_spins/PRESET_N)
    return PhysicalDeviceParams(
        n_spins      = n_spins,
        g_collective = [scale*column.g_collective]*4,
        omega_rabi   = [_phased(o, ph) for o, ph in zip(column.omega_rabi, column.phases)],
        delta        = column.delta,
        kappa        = kappa,
        gamma_dep    = gamma_dep,
        delta_b      = delta_b,
        label        = variant,
    )


def preset_phases(variant):
    """Rabi phases (radians) a preset puts on Omega_1..Omega_4."""
    return _presets[variant].phases
