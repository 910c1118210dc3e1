"""Waveguide-mediated dipole-dipole exchange between two below-band emitters.

Two emitters with identical detuning below the band edge exchange the
excitation coherently through the overlap of their photonic bound states.
The closed-form rate decays exponentially with the center-to-center
distance D_q; full-lattice Rabi simulations validate it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .bands import find_band_minima
from .bound_states import structure_factor
from .dynamics import assemble_system, initial_excitation, propagate, trajectory_arrays
from .dynamics import EmitterSpec
from .errors import ParameterError, RegimeError
from .lattice import LadderParams

#: Peak instantaneous field norm above which the waveguide is no longer
#: "only virtually excited" and the perturbative picture is flagged.
VIRTUAL_EXCITATION_BOUND = 0.05

#: The resolvent derivation carries an overall minus sign for the exchange
#: term; exchange dynamics depends only on |J12|, so the magnitude is
#: reported with this fixed sign flag.
J12_SIGN = -1


@dataclass(frozen=True)
class DipoleConfig:
    """Two identically detuned emitters in separation-form coupling topology."""

    emitter1: EmitterSpec
    emitter2: EmitterSpec

    def __post_init__(self):
        if self.emitter1.delta_q != self.emitter2.delta_q:
            raise ParameterError("dipole-dipole theory assumes identical detunings")
        if abs(self.d_q) <= max(self.emitter1.d_s, self.emitter2.d_s):
            raise ParameterError(
                f"separation form requires |D_q| > d_s (got D_q={self.d_q}, "
                f"d_s={max(self.emitter1.d_s, self.emitter2.d_s)})"
            )

    @property
    def d_q(self) -> float:
        """Center-to-center distance (x2_+ + x2_-)/2 - (x1_+ + x1_-)/2."""
        return self.emitter2.center - self.emitter1.center


@dataclass(frozen=True)
class DipoleCoupling:
    """|J12| plus the recorded overall sign convention."""

    magnitude: float
    sign: int = J12_SIGN

    @property
    def value(self) -> float:
        return self.sign * self.magnitude


def j12_closed_form(params: LadderParams, config: DipoleConfig) -> DipoleCoupling:
    """|J12| = |G1(k_min)||G2(k_min)| / (2 sqrt(alpha delta_0)) * exp(-sqrt(delta_0/alpha) D_q).

    Effective-mass result; at D_q = 0 with identical emitters it reduces to
    the closed-form self-energy at s = 0.
    """
    minima = find_band_minima(params)
    if not minima.two_minima:
        raise RegimeError("band minimum is not split; no ±k_min exchange channel")
    delta_0 = minima.e_min - config.emitter1.delta_q
    if delta_0 <= 0:
        raise RegimeError(f"delta_q={config.emitter1.delta_q} is not below the band edge")
    g1 = abs(structure_factor(config.emitter1, minima.k_min))
    g2 = abs(structure_factor(config.emitter2, minima.k_min))
    magnitude = (
        g1
        * g2
        / (2.0 * np.sqrt(minima.alpha * delta_0))
        * np.exp(-np.sqrt(delta_0 / minima.alpha) * abs(config.d_q))
    )
    return DipoleCoupling(float(magnitude))


def effective_two_emitter_model(j12: float, times) -> np.ndarray:
    """Idealized exchange curve P2(t) = sin²(J12 t) of the two-level model."""
    if j12 == 0:
        raise ParameterError("effective model needs a nonzero exchange rate")
    return np.sin(j12 * np.asarray(times)) ** 2


@dataclass(frozen=True)
class RabiResult:
    """Full-lattice exchange dynamics and the fitted rate."""

    times: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    field_norm: np.ndarray
    j12_closed: float
    j12_fit: float
    fit_amplitude: float
    non_perturbative: bool


def rabi_simulation(
    params: LadderParams,
    config: DipoleConfig,
    t_final: float | None = None,
    n_samples: int = 400,
) -> RabiResult:
    """Propagate emitter 1's excitation and fit P2(t) to A sin²(J t).

    ``t_final`` defaults to one full exchange period pi/J12 of the closed
    form.  The fit runs over the first exchange period only (later times
    drift from residual waveguide dressing); the amplitude is left free
    because the dressed maximum is below one.  If the instantaneous field
    norm ever exceeds :data:`VIRTUAL_EXCITATION_BOUND`, the result is
    flagged non-perturbative (but still returned).
    """
    coupling = j12_closed_form(params, config)
    if t_final is None:
        if coupling.magnitude == 0:
            raise ParameterError("J12 = 0: provide t_final explicitly")
        t_final = float(np.pi / coupling.magnitude)
    system = assemble_system(params, [config.emitter1, config.emitter2])
    snapshots = propagate(system, initial_excitation(system, 0), t_final, t_final / n_samples)
    times, pops, field_norm = trajectory_arrays(snapshots)
    p1, p2 = pops[:, 0], pops[:, 1]

    j12_fit = float("nan")
    fit_amplitude = float("nan")
    if coupling.magnitude > 0:
        window = times <= min(t_final, np.pi / coupling.magnitude)
        try:
            popt, _ = curve_fit(
                lambda t, amp, j: amp * np.sin(j * t) ** 2,
                times[window],
                p2[window],
                p0=[1.0, coupling.magnitude],
            )
            fit_amplitude = float(popt[0])
            j12_fit = float(abs(popt[1]))
        except RuntimeError:
            pass  # fit can fail for near-decoupled pairs; NaN marks that

    non_perturbative = bool(field_norm.max() > VIRTUAL_EXCITATION_BOUND)
    if non_perturbative:
        warnings.warn(
            f"waveguide not only virtually excited: peak field norm "
            f"{field_norm.max():.3f} > {VIRTUAL_EXCITATION_BOUND}",
            stacklevel=2,
        )
    return RabiResult(
        times=times,
        p1=p1,
        p2=p2,
        field_norm=field_norm,
        j12_closed=coupling.magnitude,
        j12_fit=j12_fit,
        fit_amplitude=fit_amplitude,
        non_perturbative=non_perturbative,
    )
