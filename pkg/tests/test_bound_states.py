import numpy as np
import pytest

from conftest import (
    REF_ALPHA,
    REF_CONTRAST,
    REF_DELTA_0,
    REF_G_ABS_DS3,
    REF_K_MIN,
    REF_PERIOD,
    REF_POLE_Y_DS0,
    REF_POLE_Y_DS3,
    REF_POP_DS,
    REF_Q_ABS,
    REF_SIGMA_CF_S0,
)
from ladderqed import (
    EmitterSpec,
    LadderParams,
    Site,
    assemble_system,
    bound_state_pole,
    initial_excitation,
    propagate,
    self_energy_closed_form,
    self_energy_quadrature,
    size_sweep,
    steady_population,
    structure_factor,
    trajectory_arrays,
)
from ladderqed.errors import IntegrationError, ParameterError, RegimeError

P = LadderParams(n_cells=400, boundary="open")


def giant(ds, g=0.1, delta_q=-4.2, x0=199):
    return EmitterSpec(delta_q, g, (Site(x0, "A"), Site(x0 + ds, "A")))


# --------------------------------------------------------- structure factor


def test_structure_factor_small_vs_coincident():
    small = EmitterSpec(-4.2, 0.1, (Site(5, "A"),))
    assert structure_factor(small, 0.7) == pytest.approx(0.1 * np.exp(-0.7j * 5), abs=1e-15)
    assert abs(structure_factor(giant(0), 1.3)) == pytest.approx(0.2, abs=1e-14)


def test_structure_factor_two_point_magnitude(rng):
    for ds in (1, 2, 3, 5):
        em = giant(ds)
        for k in rng.uniform(-np.pi, np.pi, 20):
            expected = 2 * 0.1 * abs(np.cos(k * ds / 2))
            assert abs(structure_factor(em, k)) == pytest.approx(expected, abs=1e-13)


def test_structure_factor_destructive_at_band_minimum():
    assert abs(structure_factor(giant(3), REF_K_MIN)) == pytest.approx(REF_G_ABS_DS3, abs=1e-14)


def test_structure_factor_constructive_point():
    # phase 2*pi across d_s = 6 at k = pi/3 restores the full coupling
    assert abs(structure_factor(giant(6), np.pi / 3)) == pytest.approx(0.2, abs=1e-14)


def test_structure_factor_bound():
    em = giant(4)
    for k in np.linspace(-np.pi, np.pi, 50):
        assert abs(structure_factor(em, k)) <= 2 * 0.1 + 1e-14


def test_structure_factor_symmetric_in_k():
    em = giant(3)
    assert abs(structure_factor(em, REF_K_MIN)) == pytest.approx(
        abs(structure_factor(em, -REF_K_MIN)), abs=1e-15
    )


# -------------------------------------------------------------- self-energy


def test_self_energy_quadrature_matches_reference():
    for yfac, ref in REF_Q_ABS.items():
        val = self_energy_quadrature(P, giant(0), 1j * yfac * REF_DELTA_0)
        assert abs(val.real) < 1e-12  # pure -i * positive on the imaginary axis
        assert -val.imag == pytest.approx(ref, rel=1e-8)


def test_self_energy_quadrature_zero_coupling():
    em = EmitterSpec(-4.2, 0.0, (Site(199, "A"),))
    assert self_energy_quadrature(P, em, 0j) == 0.0


def test_self_energy_quadrature_g_scaling():
    v1 = self_energy_quadrature(P, giant(0, g=0.1), 0j)
    v2 = self_energy_quadrature(P, giant(0, g=0.2), 0j)
    assert v2 == pytest.approx(4.0 * v1, rel=1e-12)


def test_self_energy_quadrature_rejects_contour_pole():
    inside = EmitterSpec(-2.0, 0.1, (Site(199, "A"),))  # detuning inside the band
    with pytest.raises(IntegrationError):
        self_energy_quadrature(P, inside, 0j)


def test_self_energy_quadrature_rejects_mixed_legs():
    em = EmitterSpec(-4.2, 0.1, (Site(199, "A"), Site(202, "B")))
    with pytest.raises(ParameterError):
        self_energy_quadrature(P, em, 0j)


def test_self_energy_closed_form_reference():
    val = self_energy_closed_form(P, giant(0), 0j)
    assert val.imag == 0.0
    assert val.real == pytest.approx(REF_SIGMA_CF_S0, rel=1e-12)


def test_self_energy_closed_form_real_positive_on_pole_axis():
    for y in (0.0, 0.5 * REF_DELTA_0, 3.0 * REF_DELTA_0):
        val = self_energy_closed_form(P, giant(0), 1j * y)
        assert val.imag == pytest.approx(0.0, abs=1e-15)
        expected = 0.04 / (2 * np.sqrt(REF_ALPHA * (REF_DELTA_0 + y)))
        assert val.real == pytest.approx(expected, rel=1e-12)


def test_self_energy_closed_form_zero_coupling():
    em = EmitterSpec(-4.2, 0.0, (Site(199, "A"), Site(202, "A")))
    assert self_energy_closed_form(P, em, 0j) == 0.0


def test_quadrature_vs_closed_form_at_band_edge():
    # the effective-mass form overshoots the exact kernel by ~5% at s=0
    quad = abs(self_energy_quadrature(P, giant(0), 0j))
    closed = self_energy_closed_form(P, giant(0), 0j).real
    assert abs(closed - quad) / quad < 0.05


def test_quadrature_vs_closed_form_improves_toward_edge():
    # the approximation tightens as delta_0 -> 0 (same relative y grid)
    def max_rel(delta_q):
        em0 = giant(0, delta_q=delta_q)
        d0 = abs(self_energy_closed_form(P, em0, 0j).real)  # only used for scale
        d0 = -4.1633319989322655 - delta_q
        rels = []
        for yfac in (0.0, 1.0, 3.0):
            q = abs(self_energy_quadrature(P, em0, 1j * yfac * d0))
            c = self_energy_closed_form(P, em0, 1j * yfac * d0).real
            rels.append(abs(c - q) / q)
        return max(rels)

    assert max_rel(-4.18) < max_rel(-4.2) < max_rel(-4.3)


# --------------------------------------------------------------------- pole


def test_pole_reference_values():
    assert bound_state_pole(P, giant(0)).y == pytest.approx(REF_POLE_Y_DS0, rel=1e-10)
    assert bound_state_pole(P, giant(3)).y == pytest.approx(REF_POLE_Y_DS3, rel=1e-10)


def test_pole_solves_real_reduction():
    pole = bound_state_pole(P, giant(1))
    g_abs = abs(structure_factor(giant(1), REF_K_MIN))
    resid = pole.y * np.sqrt(REF_ALPHA * (REF_DELTA_0 + pole.y)) - g_abs**2 / 2
    assert abs(resid) < 1e-14


def test_pole_monotone_in_coupling():
    ys = [bound_state_pole(P, giant(0, g=g)).y for g in (0.05, 0.1, 0.2, 0.4)]
    assert all(a < b for a, b in zip(ys, ys[1:]))


def test_pole_bound():
    for ds in range(7):
        pole = bound_state_pole(P, giant(ds))
        g_abs = abs(structure_factor(giant(ds), REF_K_MIN))
        assert 0.0 < pole.y <= g_abs**2 / (2 * np.sqrt(REF_ALPHA * REF_DELTA_0)) * (1 + 1e-12)


def test_pole_decoupled_flag():
    em = EmitterSpec(-4.2, 0.0, (Site(199, "A"), Site(199, "A")))
    pole = bound_state_pole(P, em)
    assert pole.y == 0.0 and pole.decoupled


def test_pole_requires_below_band_detuning():
    with pytest.raises(RegimeError):
        bound_state_pole(P, giant(0, delta_q=-4.0))  # above the band edge


# ---------------------------------------------------------------- residue


@pytest.mark.parametrize("ds", [0, 1, 2, 3, 9])
def test_steady_population_reference(ds):
    res = steady_population(P, giant(ds), compute_profile=False)
    assert res.steady_population == pytest.approx(REF_POP_DS[ds], rel=1e-9)
    assert 0 < res.residue <= 1.0
    assert res.delta_0 == pytest.approx(REF_DELTA_0, abs=1e-12)


def test_steady_population_decoupled_limit():
    res = steady_population(P, giant(0, g=1e-7), compute_profile=False)
    assert res.steady_population > 1.0 - 1e-5


def test_bound_profile_localized():
    res = steady_population(P, giant(0))
    prof = res.profile
    assert prof.energy < -4.1633319989322655
    # the eigenvector's emitter weight IS the residue; the trapped
    # population after a quench is its square
    assert prof.emitter_weight == pytest.approx(res.residue, abs=0.02)
    assert prof.emitter_weight**2 == pytest.approx(res.steady_population, abs=0.02)
    peak = max(prof.leg_a.max(), prof.leg_b.max())
    reach = 20.0 / np.sqrt(REF_DELTA_0 / REF_ALPHA)  # far outside the decay length
    far = np.abs(prof.x - 199) > reach
    if far.any():
        assert prof.leg_a[far].max() < 1e-3 * peak
    # envelope decays monotonically (compare 5-cell coarse bins rightward)
    right = prof.leg_a[202:380]
    bins = right[: len(right) // 5 * 5].reshape(-1, 5).sum(axis=1)
    assert all(b <= a * 1.001 for a, b in zip(bins, bins[1:]))


def test_bound_profile_prefers_leg_a():
    prof = steady_population(P, giant(0)).profile
    assert prof.leg_a.sum() > 10 * prof.leg_b.sum()


# -------------------------------------------------------------- size sweep


@pytest.fixture(scope="module")
def sweep():
    return size_sweep(P, giant(0), d_max=12)


def test_sweep_extrema_positions(sweep):
    pop = sweep.population
    assert int(np.argmin(pop)) == 0
    assert int(np.argmax(pop)) == 3
    # local maxima near odd multiples of pi/k_min (3.07, 9.21), minima near 0, 6.14
    interior = range(1, len(pop) - 1)
    maxima = [i for i in interior if pop[i] >= pop[i - 1] and pop[i] >= pop[i + 1]]
    minima = [i for i in interior if pop[i] <= pop[i - 1] and pop[i] <= pop[i + 1]]
    assert maxima == [3, 9]
    assert minima == [6]
    assert abs(3 - np.pi / REF_K_MIN) <= 1.0 and abs(9 - 3 * np.pi / REF_K_MIN) <= 1.0
    assert abs(6 - 2 * np.pi / REF_K_MIN) <= 1.0


def test_sweep_contrast_and_period(sweep):
    assert sweep.contrast == pytest.approx(REF_CONTRAST, rel=1e-9)
    assert sweep.period_estimate == pytest.approx(REF_PERIOD, rel=1e-12)


def test_sweep_contrast_rises_away_from_edge():
    far = size_sweep(LadderParams(n_cells=400), giant(0, delta_q=-4.8), d_max=12)
    near = size_sweep(LadderParams(n_cells=400), giant(0, delta_q=-4.25), d_max=12)
    assert near.contrast < far.contrast < 1.0


def test_sweep_requires_two_point_template():
    with pytest.raises(ParameterError):
        size_sweep(P, EmitterSpec(-4.2, 0.1, (Site(199, "A"),)), d_max=4)


# ------------------------------------------------- dynamical cross-checks


@pytest.mark.parametrize("ds", [0, 1, 2])
def test_plateau_matches_residue(ds):
    # time-averaged trapped population over [800, 1000] vs closed-form residue
    system = assemble_system(P, [giant(ds)])
    snaps = propagate(system, initial_excitation(system), 1000.0, 2.0)
    times, pops, _ = trajectory_arrays(snaps)
    plateau = float(np.mean(pops[times >= 800.0, 0]))
    assert abs(plateau - REF_POP_DS[ds]) < 0.03


def test_plateau_effective_mass_gap_at_destructive_point():
    # at d_s=3 the constant-coupling approximation collapses; the true
    # plateau sits near 0.94, well below the closed form's 0.9974
    system = assemble_system(P, [giant(3)])
    snaps = propagate(system, initial_excitation(system), 1000.0, 2.0)
    times, pops, _ = trajectory_arrays(snaps)
    plateau = float(np.mean(pops[times >= 800.0, 0]))
    assert plateau == pytest.approx(0.940, abs=0.01)
    assert abs(plateau - REF_POP_DS[3]) > 0.03
