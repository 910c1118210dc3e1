import numpy as np
import pytest

from conftest import MAX_GROUP_SPEED, REF_DELTA_Q, REF_GAMMA_TOT_G04
from ladderqed import (
    EmitterSpec,
    LadderParams,
    Site,
    assemble_system,
    dense_oracle_propagate,
    directional_intensities,
    field_snapshot,
    fit_exponential_decay,
    initial_excitation,
    propagate,
    reflection_experiment,
    trajectory_arrays,
)
from ladderqed.errors import (
    AssemblyError,
    ChiralityUndefinedError,
    IntegrationError,
    OracleSizeError,
    ParameterError,
)


def emitter(delta_q=-4.2, g=0.1, points=((18, "A"), (21, "A"))):
    return EmitterSpec(delta_q, g, tuple(Site(x, leg) for x, leg in points))


def small_system(n=40, kappa=0.0, boundary="open", em=None):
    params = LadderParams(n_cells=n, kappa=kappa, boundary=boundary)
    if em is None:
        em = emitter() if n >= 22 else emitter(points=((n // 2, "A"),))
    return assemble_system(params, [em])


# ----------------------------------------------------------------- assembly


def test_emitter_spec_validation():
    with pytest.raises(ParameterError):
        EmitterSpec(-4.2, 0.1, ())
    giant = emitter()
    assert giant.d_s == 3
    assert giant.center == 19.5
    small = emitter(points=((5, "A"),))
    assert small.d_s == 0


def test_assemble_dimensions_and_couplings():
    system = small_system(n=4, em=emitter(points=((0, "A"),), g=0.3, delta_q=-1.5))
    assert system.dim == 9
    dense = system.matrix.toarray()
    assert dense[0, 0] == -1.5
    assert dense[0, 1] == 0.3 and dense[1, 0] == 0.3  # site (0, A) sits right after the emitter
    assert np.max(np.abs(dense - dense.conj().T)) == 0.0


def test_assemble_giant_couples_both_points():
    system = small_system(n=6, em=emitter(points=((0, "A"), (3, "A")), g=0.2))
    dense = system.matrix.toarray()
    assert dense[0, 1] == 0.2 and dense[0, 4] == 0.2


def test_assemble_coincident_points_double_coupling():
    system = small_system(n=6, em=emitter(points=((2, "A"), (2, "A")), g=0.2))
    assert system.matrix.toarray()[0, 3] == pytest.approx(0.4)


def test_assemble_two_emitters_dimension():
    params = LadderParams(n_cells=8)
    system = assemble_system(
        params, [emitter(points=((1, "A"),)), emitter(points=((5, "A"),))]
    )
    assert system.dim == 2 + 16


def test_assemble_rejects_shared_sites():
    params = LadderParams(n_cells=8)
    with pytest.raises(AssemblyError):
        assemble_system(params, [emitter(points=((1, "A"),)), emitter(points=((1, "A"),))])


def test_assemble_rejects_out_of_range_point():
    with pytest.raises(ParameterError):
        small_system(n=4, em=emitter(points=((7, "A"),)))


# -------------------------------------------------------------- propagation


def test_decoupled_emitter_stays_excited():
    system = small_system(em=emitter(g=0.0, points=((10, "A"),)))
    snaps = propagate(system, initial_excitation(system), 20.0, 5.0)
    for s in snaps:
        assert abs(s.c_e[0]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_propagate_requires_normalized_state():
    system = small_system()
    bad = initial_excitation(system)
    bad.c_e = 0.5 * bad.c_e
    with pytest.raises(IntegrationError):
        propagate(system, bad, 1.0, 0.5)


def test_propagate_snapshot_times():
    system = small_system(n=10)
    snaps = propagate(system, initial_excitation(system), 1.2, 0.5)
    assert [s.time for s in snaps] == pytest.approx([0.0, 0.5, 1.0, 1.2])


def test_oracle_equivalence_lossless():
    system = small_system(n=40)
    state = initial_excitation(system)
    end = propagate(system, state, 50.0, 10.0)[-1]
    exact = dense_oracle_propagate(system, state, 50.0)
    assert np.max(np.abs(end.to_vector() - exact.to_vector())) < 1e-8
    assert abs(end.norm_sq - 1.0) < 1e-8


def test_oracle_equivalence_lossy():
    system = small_system(n=40, kappa=0.02, em=emitter(delta_q=REF_DELTA_Q, g=0.4, points=((20, "A"),)))
    state = initial_excitation(system)
    end = propagate(system, state, 30.0, 30.0)[-1]
    exact = dense_oracle_propagate(system, state, 30.0)
    assert np.max(np.abs(end.to_vector() - exact.to_vector())) < 1e-8
    assert end.norm_sq < 1.0


def test_norm_monotone_with_loss():
    system = small_system(n=30, kappa=0.05, em=emitter(delta_q=-2.0, g=0.4, points=((15, "A"),)))
    snaps = propagate(system, initial_excitation(system), 40.0, 2.0)
    norms = [s.norm_sq for s in snaps]
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


def test_energy_conserved_lossless():
    system = small_system(n=30, em=emitter(delta_q=-2.0, g=0.4, points=((15, "A"),)))
    matrix = system.matrix
    snaps = propagate(system, initial_excitation(system), 40.0, 4.0)
    energies = [np.real(np.vdot(s.to_vector(), matrix @ s.to_vector())) for s in snaps]
    assert np.max(np.abs(np.array(energies) - energies[0])) < 1e-8


def test_oracle_size_guard():
    system = small_system(n=700)
    with pytest.raises(OracleSizeError):
        dense_oracle_propagate(system, initial_excitation(system), 1.0)


def test_light_cone():
    params = LadderParams(n_cells=600, boundary="open")
    em = emitter(delta_q=REF_DELTA_Q, g=0.4, points=((300, "A"),))
    system = assemble_system(params, [em])
    final = propagate(system, initial_excitation(system), 60.0, 60.0)[-1]
    snap = field_snapshot(final)
    beyond = np.abs(snap.x - 300) > MAX_GROUP_SPEED * 60.0 + 50
    leaked = snap.leg_a[beyond].sum() + snap.leg_b[beyond].sum()
    total = snap.leg_a.sum() + snap.leg_b.sum()
    assert leaked < 1e-6 * total


# -------------------------------------------------------------- observables


def test_field_snapshot_initially_empty():
    system = small_system(n=10)
    snap = field_snapshot(initial_excitation(system))
    assert snap.leg_a.sum() == 0.0 and snap.leg_b.sum() == 0.0


def test_directional_intensities_single_site():
    state = initial_excitation(small_system(n=10))
    state.field[3] = 1.0  # leg A, x=3 > origin 0
    report = directional_intensities(state, origin=0)
    assert report.c_numeric == 1.0
    assert report.phi_a_plus == 1.0


def test_directional_origin_cell_counts_plus():
    state = initial_excitation(small_system(n=10))
    state.field[5] = 1.0
    report = directional_intensities(state, origin=5)
    assert report.phi_a_plus == 1.0 and report.phi_a_minus == 0.0


def test_directional_intensities_split():
    state = initial_excitation(small_system(n=10))
    state.field[2] = np.sqrt(0.25)   # A, left of origin 5
    state.field[7] = np.sqrt(0.25)   # A, right
    state.field[10 + 8] = np.sqrt(0.5)  # B, right
    report = directional_intensities(state, origin=5)
    assert report.phi_a_minus == pytest.approx(0.25)
    assert report.phi_a_plus == pytest.approx(0.25)
    assert report.phi_b_plus == pytest.approx(0.5)
    assert report.c_numeric == pytest.approx(0.25)


def test_directional_intensities_zero_field():
    with pytest.raises(ChiralityUndefinedError):
        directional_intensities(initial_excitation(small_system(n=10)), 0)


def test_fit_exponential_decay_exact():
    t = np.linspace(0, 50, 200)
    assert fit_exponential_decay(t, np.exp(-0.3 * t), 5, 45) == pytest.approx(0.3, rel=1e-10)
    with pytest.raises(ParameterError):
        fit_exponential_decay(t, np.exp(-0.3 * t), 60, 70)


# ------------------------------------------------- markovian emission check


@pytest.fixture(scope="module")
def emission_run():
    params = LadderParams(n_cells=400, boundary="open")
    em = emitter(delta_q=REF_DELTA_Q, g=0.4, points=((200, "A"),))
    system = assemble_system(params, [em])
    return propagate(system, initial_excitation(system), 50.0, 1.0)


def test_markovian_decay_rate(emission_run):
    times, pops, _ = trajectory_arrays(emission_run)
    rate = fit_exponential_decay(times, pops[:, 0], 5.0, 45.0)
    assert rate == pytest.approx(2.0 * REF_GAMMA_TOT_G04, rel=0.1)


def test_emission_is_chiral(emission_run):
    report = directional_intensities(emission_run[-1], origin=200)
    assert report.c_numeric > 0.9
    assert report.phi_b_plus == pytest.approx(report.phi_b_minus, rel=0.15)


def test_mirrored_flux_reverses_chirality():
    params = LadderParams(n_cells=400, boundary="open", phi=-np.pi / 3)
    em = emitter(delta_q=REF_DELTA_Q, g=0.4, points=((200, "A"),))
    system = assemble_system(params, [em])
    final = propagate(system, initial_excitation(system), 50.0, 10.0)[-1]
    assert directional_intensities(final, origin=200).c_numeric < 0.05


# ---------------------------------------------------------------- reflection


def test_reflection_requires_open_boundary():
    params = LadderParams(n_cells=40, boundary="periodic")
    with pytest.raises(ParameterError):
        reflection_experiment(params, emitter(), t_final=10.0)


def test_reflection_transfers_to_leg_b():
    params = LadderParams(n_cells=240, boundary="open")
    em = emitter(delta_q=REF_DELTA_Q, g=0.4, points=((120, "A"),))
    # wall at ~120 cells, v_g ~ 3.43: reflection at t ~ 35
    result = reflection_experiment(params, em, t_final=60.0, kappa=0.01, stride=5.0)
    assert result.wavefront_reached_wall
    assert result.warning is None
    i100 = int(np.argmin(np.abs(result.times - 25.0)))
    assert result.leg_a_intensity[i100] > result.leg_b_intensity[i100]  # before the wall
    assert result.leg_b_intensity[-1] > result.leg_a_intensity[-1]  # after reflection


def test_reflection_loss_reduces_amplitude():
    # pre-reflection window: wall 80 cells away, v_g ~ 3.43, so t = 20 is safe
    params = LadderParams(n_cells=160, boundary="open")
    em = emitter(delta_q=REF_DELTA_Q, g=0.4, points=((80, "A"),))
    lossy = reflection_experiment(params, em, t_final=20.0, kappa=0.01, stride=10.0)
    lossless = reflection_experiment(params, em, t_final=20.0, kappa=0.0, stride=10.0)
    assert lossy.snapshots[-1].norm_sq < lossless.snapshots[-1].norm_sq
    # chirality unaffected by uniform local loss
    c_lossy = directional_intensities(lossy.snapshots[-1], 80).c_numeric
    c_lossless = directional_intensities(lossless.snapshots[-1], 80).c_numeric
    assert abs(c_lossy - c_lossless) < 0.02


def test_reflection_warns_when_wavefront_short():
    params = LadderParams(n_cells=400, boundary="open")
    em = emitter(delta_q=REF_DELTA_Q, g=0.4, points=((200, "A"),))
    result = reflection_experiment(params, em, t_final=20.0, kappa=0.0, stride=10.0)
    assert not result.wavefront_reached_wall
    assert result.warning is not None
