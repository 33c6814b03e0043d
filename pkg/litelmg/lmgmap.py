#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Bad-cavity elimination of the supermodes and the generalized LMG parameters.

Each supermode i contributes -(zeta_i/(N K_i)) A_i A_i^dagger to the spin Hamiltonian and a collective
jump A_i^dagger at rate kappa_i/(N K_i), with A_i = L_alpha^i J+ + L_beta^i J- and
K_i = kappa_i^2 + zeta_i^2. Expanding A A^dagger gives

    H_LMG = -2h Jz - (2 lambda/N)(Jx^2 + chi Jy^2).

The expansion uses |L_alpha +- L_beta|^2, which equals the (L_alpha +- L_beta)^2 of real products.
"""

import math
import logging

from litelmg.common import Settings, ConfigError, flat_record
from litelmg.device import effective_raman_params

logger = logging.getLogger(__name__)

# Channels -----------------------------------------------------------------------------------------

class ChannelParams(Settings):
    def __init__(self, l_alpha, l_beta, zeta, kappa):
        if not kappa > 0:
            raise ConfigError("kappa must be positive, got {}".format(kappa))
        l_alpha = complex(l_alpha)
        l_beta  = complex(l_beta)
        self.set_attributes(locals())
        self.k_denominator = kappa**2 + zeta**2

    @classmethod
    def from_effective(cls, e, kappa, channel):
        if channel == "a":
            return cls(e.l_alpha_a, e.l_beta_a, e.zeta_a, kappa)
        if channel == "b":
            return cls(e.l_alpha_b, e.l_beta_b, e.zeta_b, kappa)
        raise ValueError("Unknown channel {}".format(channel))

    @property
    def sigma2(self):
        return abs(self.l_alpha)**2 + abs(self.l_beta)**2

    # |L_alpha + L_beta|^2 and |L_alpha - L_beta|^2: the Jx^2 and Jy^2 weights of A A^dagger.
    @property
    def sum2(self):
        return abs(self.l_alpha + self.l_beta)**2

    @property
    def diff2(self):
        return abs(self.l_alpha - self.l_beta)**2


class ChannelElimination(Settings):
    def __init__(self, Lambda, Gamma, jump_alpha, jump_beta, rate):
        self.set_attributes(locals())


def eliminate_channel(c):
    """Coupling Lambda and collective decay Gamma of one supermode.

    sigma^2 = |L_alpha|^2 + |L_beta|^2 (the alpha^2 + beta^2 = 1 gauge). The jump operator of the
    channel is jump_alpha*J- + jump_beta*J+ with prefactor rate = kappa/K (divide by N for the
    master equation rate).
    """
    return ChannelElimination(
        Lambda     = c.sigma2*c.zeta/c.k_denominator,
        Gamma      = c.sigma2*c.kappa/c.k_denominator,
        jump_alpha = c.l_alpha.conjugate(),
        jump_beta  = c.l_beta.conjugate(),
        rate       = c.kappa/c.k_denominator,
    )

# LMG parameters -----------------------------------------------------------------------------------

class LmgParams(Settings):
    def __init__(self,
            h: float,                   # -2h Jz
            lam: float,                 # -(2 lambda/N)(Jx^2 + chi Jy^2)
            chi: float,
            gamma_a: float,             # Gamma_a/N D[T_a^dagger]
            gamma_b: float,             # Gamma_b/N D[T_b^dagger]
            gamma_dep: float,           # gamma_dep D[Jz]
            n_spins: float,
            chi_degenerate: bool = False,  # chi was 0/0 and set to 1
        ):
        if gamma_a < 0 or gamma_b < 0 or gamma_dep < 0:
            raise ConfigError("rates must be nonnegative: gamma_a={}, gamma_b={}, gamma_dep={}".format(
                gamma_a, gamma_b, gamma_dep))
        if not n_spins > 0:
            raise ConfigError("n_spins must be positive, got {}".format(n_spins))
        self.set_attributes(locals())

    @classmethod
    def from_dimensionless(cls, h, lam, chi, gamma_a=0.0, gamma_b=0.0, gamma_dep=0.0, n_spins=1.0):
        return cls(float(h), float(lam), float(chi), float(gamma_a), float(gamma_b),
            float(gamma_dep), float(n_spins))

    @property
    def r0(self):
        return self.gamma_dep/(2*self.gamma_b)

    def as_record(self):
        items = [("h", self.h), ("lambda", self.lam), ("chi", self.chi),
                 ("gamma_a", self.gamma_a), ("gamma_b", self.gamma_b),
                 ("gamma_dep", self.gamma_dep), ("n_spins", self.n_spins),
                 ("chi_degenerate", self.chi_degenerate)]
        return flat_record(items)


def lmg_params(a, b, mu0, gamma_dep, n_spins):
    ea = eliminate_channel(a)
    eb = eliminate_channel(b)
    Ka, Kb = a.k_denominator, b.k_denominator

    minus_2h = mu0 \
        - a.zeta*(abs(a.l_alpha)**2 - abs(a.l_beta)**2)/(n_spins*Ka) \
        - b.zeta*(abs(b.l_alpha)**2 - abs(b.l_beta)**2)/(n_spins*Kb)
    two_lam = a.zeta*a.sum2/Ka + b.zeta*b.sum2/Kb

    num   = Kb*a.zeta*a.diff2 + Ka*b.zeta*b.diff2
    den   = Kb*a.zeta*a.sum2  + Ka*b.zeta*b.sum2
    scale = Kb*abs(a.zeta)*(a.sum2 + a.diff2) + Ka*abs(b.zeta)*(b.sum2 + b.diff2)
    tiny  = 1e-14*scale

    degenerate = False
    if abs(den) <= tiny and abs(num) <= tiny:
        logger.warning("chi is 0/0 (numerator %g, denominator %g): using the isotropic limit chi = 1", num, den)
        chi        = 1.0
        degenerate = True
    elif den == 0:
        logger.warning("lambda vanishes with a finite Jy^2 term: chi is infinite")
        chi = math.copysign(math.inf, num)
    else:
        chi = num/den

    for name, c in [("a", a), ("b", b)]:
        if abs((c.l_alpha*c.l_beta.conjugate()).imag) > 1e-12*max(c.sigma2, 1e-300):
            logger.warning("Channel %s has complex L_alpha*L_beta^*: the twisting axes are rotated "
                "away from x/y and the LMG form is approximate", name)

    return LmgParams(
        h              = -minus_2h/2,
        lam            = two_lam/2,
        chi            = chi,
        gamma_a        = ea.Gamma,
        gamma_b        = eb.Gamma,
        gamma_dep      = float(gamma_dep),
        n_spins        = float(n_spins),
        chi_degenerate = degenerate,
    )


def lmg_params_from_device(p, e=None):
    """Device -> effective Raman parameters -> channels -> LMG parameters."""
    if e is None:
        e = effective_raman_params(p)
    a = ChannelParams.from_effective(e, p.kappa[0], "a")
    b = ChannelParams.from_effective(e, p.kappa[1], "b")
    return lmg_params(a, b, e.mu0, p.gamma_dep, p.n_spins)

# Variants -----------------------------------------------------------------------------------------

variants = ["two-axis", "isotropic", "one-axis", "generic"]

def classify_variant(p, tol=1e-6):
    if not tol > 0:
        raise ValueError("tol must be positive, got {}".format(tol))
    if abs(p.chi + 1) <= tol:
        return "two-axis"
    if abs(p.chi - 1) <= tol:
        return "isotropic"
    if abs(p.chi) <= tol:
        return "one-axis"
    return "generic"
