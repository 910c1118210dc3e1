"""Analytic band diagnostics for the ladder waveguide.

Dispersion, eigenmode angle and spin texture, group velocity, band minima
with effective-mass curvature, and inversion of the lower band at a given
detuning.  Everything here is a pure function of :class:`LadderParams`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateAngleError, ParameterError
from .lattice import LadderParams

_ROOT_XTOL = 1e-14


def _f(params: LadderParams, k):
    return np.sin(params.phi) * np.sin(k)


def _radical(params: LadderParams, k):
    """sqrt(f(k)^2 + eta^2), the half band splitting in units of 2t."""
    return np.sqrt(_f(params, k) ** 2 + params.eta**2)


def dispersion(params: LadderParams, k):
    """Band energies ``E_∓(k) = -2t [g(k) ± sqrt(f² + η²)]``.

    Returns ``(e_minus, e_plus)`` with ``e_minus <= e_plus``; accepts scalar
    or array ``k``.
    """
    g = np.cos(params.phi) * np.cos(k)
    r = _radical(params, k)
    return -2.0 * params.t * (g + r), -2.0 * params.t * (g - r)


def eigenmode_angle(params: LadderParams, k):
    """Mixing angle theta_k = atan2(eta, f(k)), continuous in (0, pi).

    The lower-band eigenvector is (cos(theta/2), sin(theta/2)) in the
    (A, B) leg basis, so cos(theta) = f/sqrt(f²+η²) and sin(theta) >= 0.
    """
    f = _f(params, k)
    if params.eta == 0 and np.any(np.asarray(f) == 0):
        raise DegenerateAngleError("theta undefined: eta = 0 and f(k) = 0")
    return np.arctan2(params.eta, f)


def spin_expectation(params: LadderParams, k, band: str = "lower"):
    """Leg-population imbalance <sigma_z> of a band eigenmode.

    ``cos(theta_k)`` for the lower band, ``-cos(theta_k)`` for the upper;
    odd in k, hence the spin-momentum locking.
    """
    if band not in ("lower", "upper"):
        raise ParameterError(f"band must be 'lower' or 'upper', got {band!r}")
    c = np.cos(eigenmode_angle(params, k))
    return c if band == "lower" else -c


def group_velocity(params: LadderParams, k):
    """dE_-/dk = -2t sin(k) (-cos(phi) + sin²(phi) cos(k)/sqrt(f²+η²))."""
    if params.eta == 0 and np.any(_radical(params, k) == 0):
        raise DegenerateAngleError("group velocity undefined at a band crossing (eta = 0)")
    return (
        -2.0
        * params.t
        * np.sin(k)
        * (-np.cos(params.phi) + np.sin(params.phi) ** 2 * np.cos(k) / _radical(params, k))
    )


def _curvature(params: LadderParams, k: float) -> float:
    """d²E_-/dk² in closed form (f'' = -f)."""
    f = _f(params, k)
    fp = np.sin(params.phi) * np.cos(k)
    r = _radical(params, k)
    gpp = -np.cos(params.phi) * np.cos(k)
    rpp = (fp**2 - f**2) / r - (f * fp) ** 2 / r**3
    return -2.0 * params.t * (gpp + rpp)


@dataclass(frozen=True)
class BandMinima:
    """Location and quadratic shape of the lower-band minimum.

    ``alpha`` uses the half-curvature convention, i.e. the quadratic model
    is ``E_-(k) ≈ e_min + alpha (k - k_min)²`` (so alpha = E''/2).
    ``two_minima`` is False when the spin-orbit term is too weak to split
    the minimum away from k = 0 (or pi), in which case ``k_min`` is that
    single location.
    """

    k_min: float
    e_min: float
    alpha: float
    two_minima: bool


def find_band_minima(params: LadderParams) -> BandMinima:
    """Locate the lower-band minimum (pair) and its effective-mass curvature.

    In the split regime sin²(phi) > eta² cot²(phi) the minima sit at
    ``±k_min`` with ``sin(k_min) = sqrt(sin²phi − eta²cot²phi)``; the
    analytic seed is refined by bracketed root finding on dE_-/dk.
    """
    sphi, cphi = np.sin(params.phi), np.cos(params.phi)
    split = sphi**2 - params.eta**2 * (cphi / sphi) ** 2 if sphi != 0 else -1.0
    if split <= 0:
        # single minimum at k = 0 or pi, whichever is lower
        cands = [0.0, np.pi]
        energies = [float(dispersion(params, k)[0]) for k in cands]
        k0 = cands[int(np.argmin(energies))]
        return BandMinima(k0, min(energies), 0.5 * _curvature(params, k0), False)

    seed = float(np.arcsin(np.sqrt(split)))
    if cphi < 0:
        seed = np.pi - seed
    # the seed is exact analytically; brentq guards against roundoff drift
    lo, hi = max(seed - 1e-3, 1e-12), min(seed + 1e-3, np.pi - 1e-12)
    vlo, vhi = group_velocity(params, lo), group_velocity(params, hi)
    k_min = float(brentq(lambda k: group_velocity(params, k), lo, hi, xtol=_ROOT_XTOL)) if vlo * vhi < 0 else seed
    e_min = float(dispersion(params, k_min)[0])
    return BandMinima(k_min, e_min, 0.5 * _curvature(params, k_min), True)


def resonant_momentum(params: LadderParams, delta_q: float) -> list[float]:
    """All positive momenta k_r in (0, pi] with E_-(k_r) = delta_q, ascending.

    Empty when the detuning lies outside the lower band.  A detuning at the
    band minimum returns the single tangency point k_min.
    """
    minima = find_band_minima(params)
    n_grid = 8001
    ks = np.linspace(0.0, np.pi, n_grid)
    diff = dispersion(params, ks)[0] - delta_q
    if delta_q < minima.e_min or delta_q > float(np.max(diff + delta_q)):
        return []
    if abs(delta_q - minima.e_min) <= 1e-9 * max(1.0, abs(minima.e_min)):
        return [minima.k_min]

    roots: list[float] = []
    for i in range(n_grid - 1):
        a, b = diff[i], diff[i + 1]
        if a == 0.0 and ks[i] > 0.0:
            roots.append(float(ks[i]))
        elif a * b < 0:
            roots.append(
                float(
                    brentq(
                        lambda k: float(dispersion(params, k)[0]) - delta_q,
                        ks[i],
                        ks[i + 1],
                        xtol=_ROOT_XTOL,
                    )
                )
            )
    if diff[-1] == 0.0:
        roots.append(float(np.pi))
    return sorted(set(roots))


def band_edge_detunings(params: LadderParams, delta_q: float) -> tuple[float, float]:
    """Distances from ``delta_q`` to the lower-band extremal energies
    bounding the window it sits in.

    The extremal (zero-group-velocity) energies of the lower band are
    E_-(0), E_-(pi) and, in the split regime, E_min; the returned pair is
    (delta_q - E_below, E_above - delta_q) for the two extrema that bracket
    the detuning.
    """
    minima = find_band_minima(params)
    extrema = {float(dispersion(params, 0.0)[0]), float(dispersion(params, np.pi)[0])}
    if minima.two_minima:
        extrema.add(minima.e_min)
    levels = sorted(extrema)
    if delta_q < levels[0] or delta_q > levels[-1]:
        raise ParameterError(
            f"delta_q={delta_q} outside the lower band [{levels[0]}, {levels[-1]}]"
        )
    below = max(e for e in levels if e <= delta_q)
    above = min(e for e in levels if e >= delta_q)
    if above == below:  # exactly at an extremum: open the window to the next level
        higher = [e for e in levels if e > delta_q]
        if higher:
            above = min(higher)
        else:
            below = max(e for e in levels if e < delta_q)
    return delta_q - below, above - delta_q


@dataclass(frozen=True)
class BandSummary:
    """Sampled band data plus derived scalars, ready for CSV export."""

    k_grid: np.ndarray
    e_minus: np.ndarray
    e_plus: np.ndarray
    theta: np.ndarray
    sigma_z_minus: np.ndarray
    k_min: float
    e_min: float
    alpha: float
    two_minima: bool
    resonances: tuple[tuple[float, float], ...]  # (k_r, v_g) pairs


def band_summary(params: LadderParams, n_k: int = 2001, delta_q: float | None = None) -> BandSummary:
    """Sample the bands on a symmetric k grid and collect band diagnostics.

    When ``delta_q`` is given, the resonant momenta of the lower band and
    their group velocities are attached.
    """
    ks = np.linspace(-np.pi, np.pi, n_k)
    e_minus, e_plus = dispersion(params, ks)
    theta = eigenmode_angle(params, ks)
    minima = find_band_minima(params)
    resonances: tuple[tuple[float, float], ...] = ()
    if delta_q is not None:
        resonances = tuple(
            (kr, float(group_velocity(params, kr))) for kr in resonant_momentum(params, delta_q)
        )
    return BandSummary(
        k_grid=ks,
        e_minus=e_minus,
        e_plus=e_plus,
        theta=theta,
        sigma_z_minus=np.cos(theta),
        k_min=minima.k_min,
        e_min=minima.e_min,
        alpha=minima.alpha,
        two_minima=minima.two_minima,
        resonances=resonances,
    )
