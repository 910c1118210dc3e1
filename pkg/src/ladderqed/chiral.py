"""Closed-form Markovian emission theory: directional rates and chirality.

A small emitter resonant with the lower band at momentum ``k_r`` (taken in
(0, pi) with positive group velocity, so "+" means right-moving) decays
into the four channels (leg A/B, direction +/-) at rates set by the
eigenmode angle at ``±k_r``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bands import band_edge_detunings, eigenmode_angle, group_velocity
from .errors import BandEdgeError, ChiralityUndefinedError, ParameterError
from .lattice import LadderParams

#: Ratio Gamma_tot / min(band-edge detunings) below which we call a decay
#: Markovian.  Artifact convention; the theory only requires "much smaller".
MARKOV_THRESHOLD = 0.05

_VG_TOL = 1e-9


@dataclass(frozen=True)
class DecayRates:
    """Directional decay rates at a resonant momentum.

    ``gamma_b_plus == gamma_b_minus`` exactly: the B-channel factor depends
    only on sin(theta), which is even under k -> -k.
    """

    gamma_a_plus: float
    gamma_a_minus: float
    gamma_b_plus: float
    gamma_b_minus: float
    k_r: float
    v_g: float

    @property
    def total(self) -> float:
        return self.gamma_a_plus + self.gamma_a_minus + self.gamma_b_plus + self.gamma_b_minus


def angular_emission_factors(params: LadderParams, k_r: float) -> tuple[float, float, float]:
    """Dimensionless directional factors (A+, A-, B) at ``±k_r``.

    Rates are these factors times g²/(2 v_g); they sum to one (with B
    counted twice).
    """
    th = float(eigenmode_angle(params, k_r))
    fa_plus = ((np.cos(th) + 1.0) / 2.0) ** 2
    fa_minus = ((np.cos(np.pi - th) + 1.0) / 2.0) ** 2  # theta_{-k} = pi - theta_k
    fb = (np.sin(th) / 2.0) ** 2
    return float(fa_plus), float(fa_minus), float(fb)


def decay_rates(params: LadderParams, k_r: float, g: float) -> DecayRates:
    """Markovian emission rates ``Gamma_{A±} = g²/(2 v_g) ((cos theta_{±k_r}+1)/2)²``
    and ``Gamma_{B±} = g²/(2 v_g) (sin theta_{±k_r}/2)²``.

    Requires ``k_r`` strictly inside (0, pi) with positive group velocity;
    at a band extremum the Markovian theory is invalid.
    """
    if not 0.0 < k_r < np.pi:
        raise ParameterError(f"k_r must lie in (0, pi), got {k_r}")
    v_g = float(group_velocity(params, k_r))
    if v_g <= _VG_TOL:
        raise BandEdgeError(
            f"group velocity {v_g:.3e} at k_r={k_r} is not positive; "
            "Markovian rates are undefined at a band extremum"
        )
    fa_plus, fa_minus, fb = angular_emission_factors(params, k_r)
    pref = g * g / (2.0 * v_g)
    gb = pref * fb
    return DecayRates(pref * fa_plus, pref * fa_minus, gb, gb, k_r, v_g)


def chiral_factor_from_rates(rates: DecayRates) -> float:
    """C = Gamma_{A+} / (sum of all four rates), in [0, 1]."""
    total = rates.total
    if total <= 0.0:
        raise ChiralityUndefinedError("all decay rates vanish; chiral factor undefined")
    return rates.gamma_a_plus / total


def chiral_factor_closed_form(params: LadderParams, k_r: float) -> float:
    """Analytic chiral factor C = (f+|f|)² / ((f+|f|)² + 2 eta²) at ``k_r``.

    Reduces to 1/(1 + eta²/(2 f²)) for 0 < phi < pi and to exactly 0 when
    f(k_r) < 0 (emission then avoids the right-moving A channel entirely).
    """
    if k_r <= 0.0:
        raise ParameterError(f"k_r must be positive, got {k_r}")
    f = np.sin(params.phi) * np.sin(k_r)
    num = (f + abs(f)) ** 2
    return float(num / (num + 2.0 * params.eta**2))


def markov_validity(params: LadderParams, rates: DecayRates, delta_q: float) -> float:
    """Ratio Gamma_tot / min(distance to the bounding band extrema).

    Values at or below :data:`MARKOV_THRESHOLD` indicate exponential
    (Markovian) decay.
    """
    lo, hi = band_edge_detunings(params, delta_q)
    edge = min(lo, hi)
    if edge <= 0.0:
        return np.inf
    return rates.total / edge
