"""Shared fixtures and frozen reference values.

All REF_* constants were computed independently of the package with a
40-digit mpmath session: band extrema by root-finding on the exact
dispersion derivative (cross-checked by brute-force grid argmin), the
resonance by bisection on the dispersion, the self-energy by adaptive
quadrature, and the pole by high-precision root-finding on the real
reduction.  Tests compare the package against these numbers, not against
itself.
"""

import numpy as np
import pytest

from ladderqed import LadderParams

# reference waveguide: t=2, t'=1, phi=pi/3 (eta = 1/4)
REF_K_MIN = 1.0234576938533465  # asin(sqrt(35/48))
REF_E_MIN = -4.1633319989322655  # -(2/3) sqrt(39)
REF_ALPHA = 1.8681617943926832  # half the exact second derivative at k_min
REF_E_MINUS_0 = -3.0
REF_E_MINUS_PI = 1.0
REF_E_PLUS_0 = -1.0

# resonance of the lower band at the reconstructed detuning -2.042
REF_DELTA_Q = -2.042
REF_K_R = 2.1297158030084269
REF_V_G = 3.4345354388336785
REF_THETA_KR = 0.32817553470605739
REF_FACTOR_A_PLUS = 0.94734401047853277
REF_FACTOR_A_MINUS = 7.120365517375667e-04
REF_FACTOR_B = 0.025971976484864831
REF_GAMMA_TOT_G04 = 0.023292815411206504  # g=0.4
REF_C_RATES = 0.94734401047853277
REF_C_CLOSED = 0.94521003992069769

# spot values at the quoted momentum k = 2.1298
REF_THETA_SPOT = 0.32819160409300455
REF_SPIN_SPOT = 0.94662679437651972
REF_V_G_SPOT = 3.4346707031878873
REF_E_MINUS_SPOT = -2.0417108167539658

# below-band reference emitter: delta_q = -4.2, g = 0.1
REF_DELTA_0 = 0.036668001067734529
REF_SIGMA_CF_S0 = 0.076415091054469407  # |G|^2/(2 sqrt(alpha delta_0)), d_s=0
REF_G_ABS_DS3 = 7.1204521239568269e-03  # 0.2 |cos(3 k_min / 2)|
REF_POLE_Y_DS0 = 4.9770245089730755e-02
REF_POLE_Y_DS3 = 9.6730226478493849e-05
REF_POP_DS = {
    0: 0.60289157252603194,
    1: 0.62858867139632039,
    2: 0.74448919948275066,
    3: 0.99737412242549390,
    9: 0.97750247555204591,
}
REF_CONTRAST = 0.60447886000879204
REF_PERIOD = 6.1391744328221523

# |self-energy| from adaptive quadrature at s = i*y, d_s=0 (lower band only)
REF_Q_ABS = {0.0: 0.072827832471170897, 1.0: 0.05034161783188951, 3.0: 0.034392219897669641}

# dipole-dipole reference: g = 0.015 coincident pairs, D_q = 4
REF_J12 = 9.8171180206265162e-04
REF_J12_SLOPE = -0.14009943201881577  # -sqrt(delta_0/alpha)

MAX_GROUP_SPEED = 3.7063271  # max |dE/dk| over both bands


@pytest.fixture(scope="session")
def ref_params():
    return LadderParams(t=2.0, t_prime=1.0, phi=np.pi / 3, n_cells=1000, boundary="periodic")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
