"""Dynamics tests.

The independent oracle for the structured generator is a naive Lindblad
right-hand side assembled from explicitly embedded operators; trajectories
are checked against dense matrix exponentials and single-site closed forms.
"""

import math

import numpy as np
import pytest

from fmosim.channels import damping_basis_solution
from fmosim.dynamics import (
    LindbladGenerator,
    NoiseParameters,
    Trajectory,
    evolve_trotter_open,
    initial_density,
    integrate_exact,
    lindblad_rhs,
    site_populations,
)
from fmosim.hamiltonians import FmoParameters, build_fmo_h
from fmosim.qcore import matexp_hermitian, pauli_embed, trace_distance

SM = np.array([[0, 1], [0, 0]], dtype=complex)
NP_ = np.array([[0, 0], [0, 1]], dtype=complex)


def chain_fmo(n, seed=0, coupling=0.3):
    rng = np.random.default_rng(seed)
    nu = np.zeros((n, n))
    for j in range(n - 1):
        nu[j, j + 1] = nu[j + 1, j] = rng.uniform(-coupling, coupling)
    return FmoParameters(epsilon=rng.uniform(0.5, 1.5, n), nu=nu)


def random_density(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def naive_rhs(rho, fmo, noise):
    n = fmo.n_sites
    h = build_fmo_h(fmo)
    out = -1j * (h @ rho - rho @ h)
    for j in range(1, n + 1):
        sm = pauli_embed(SM, j, n)
        nj = pauli_embed(NP_, j, n)
        big, small = noise.dissipation[j - 1], noise.dephasing[j - 1]
        out = out + 4 * big * (2 * sm @ rho @ sm.conj().T - nj @ rho - rho @ nj)
        out = out + small * (2 * nj @ rho @ nj - nj @ rho - rho @ nj)
    return out


# --- parameters and observables -------------------------------------------------


def test_noise_parameter_validation():
    with pytest.raises(ValueError):
        NoiseParameters(np.array([-0.1, 0.0]), np.zeros(2))
    with pytest.raises(ValueError):
        NoiseParameters(np.zeros(3), np.zeros(2))
    with pytest.raises(ValueError):
        NoiseParameters(np.array([np.inf]), np.array([0.0]))
    p = NoiseParameters.uniform(7, 0.05, 0.1)
    assert p.n_sites == 7
    with pytest.raises(ValueError):
        p.dissipation[0] = 1.0


def test_site_populations_basis_cases():
    assert np.allclose(site_populations(initial_density("site1", 7)), np.eye(7)[0])
    assert np.allclose(site_populations(np.eye(128) / 128), 0.5)
    psi = np.zeros(128)
    psi[int("1000000", 2)] = psi[int("0100000", 2)] = 1 / math.sqrt(2)
    pops = site_populations(np.outer(psi, psi))
    assert np.allclose(pops, [0.5, 0.5, 0, 0, 0, 0, 0], atol=1e-15)


def test_initial_density_labels():
    assert np.allclose(initial_density("ground", 3), np.diag([1, 0, 0, 0, 0, 0, 0, 0]))
    assert np.allclose(initial_density("site3", 3), np.diag(np.eye(8)[1]))
    assert np.allclose(initial_density("010", 3), np.diag(np.eye(8)[2]))
    with pytest.raises(ValueError):
        initial_density("site9", 3)
    with pytest.raises(ValueError):
        initial_density("012", 3)


# --- generator -------------------------------------------------------------------


def test_rhs_matches_naive_operator_form():
    n = 3
    fmo = chain_fmo(n, seed=1)
    rng = np.random.default_rng(2)
    noise = NoiseParameters(rng.uniform(0, 0.4, n), rng.uniform(0, 0.4, n))
    for s in range(10):
        rho = random_density(n, seed=s)
        got = lindblad_rhs(rho, fmo, noise)
        assert np.abs(got - naive_rhs(rho, fmo, noise)).max() < 1e-13


def test_rhs_traceless_and_hermiticity_preserving():
    fmo = chain_fmo(3, seed=3)
    noise = NoiseParameters.uniform(3, 0.2, 0.3)
    for s in range(50):
        d = lindblad_rhs(random_density(3, seed=s), fmo, noise)
        assert abs(np.trace(d)) < 1e-12
        assert np.abs(d - d.conj().T).max() < 1e-12


def test_rhs_vanishes_on_eigenprojector_without_noise():
    fmo = chain_fmo(3, seed=4)
    _, vecs = np.linalg.eigh(build_fmo_h(fmo))
    proj = np.outer(vecs[:, 2], vecs[:, 2].conj())
    d = lindblad_rhs(proj, fmo, NoiseParameters.uniform(3, 0, 0))
    assert np.abs(d).max() < 1e-12


def test_rhs_single_site_dephasing_rate():
    # H = 0, one site, rho = |+><+|: x component decays at exactly gamma
    fmo = FmoParameters(epsilon=np.zeros(1), nu=np.zeros((1, 1)))
    noise = NoiseParameters(np.zeros(1), np.array([0.7]))
    plus = 0.5 * np.ones((2, 2), dtype=complex)
    d = lindblad_rhs(plus, fmo, noise)
    assert d[0, 1] == pytest.approx(-0.7 * 0.5, abs=1e-14)
    assert abs(d[0, 0]) < 1e-14


def test_rhs_dimension_mismatch():
    with pytest.raises(ValueError):
        lindblad_rhs(np.eye(4) / 4, chain_fmo(3), NoiseParameters.uniform(3, 0, 0))
    with pytest.raises(ValueError):
        LindbladGenerator(chain_fmo(3), NoiseParameters.uniform(4, 0, 0))


# --- exact integrator -------------------------------------------------------------


def test_exact_matches_unitary_evolution_without_noise():
    fmo = chain_fmo(3, seed=5)
    rho0 = random_density(3, seed=6)
    traj = integrate_exact(rho0, fmo, NoiseParameters.uniform(3, 0, 0), 0.7, 1e-3, 100)
    u = matexp_hermitian(build_fmo_h(fmo), -1j * 0.7)
    assert np.abs(traj.final_state() - u @ rho0 @ u.conj().T).max() < 1e-8
    assert traj.method == "exact"


def test_exact_pure_dissipation_matches_damping_basis():
    fmo = FmoParameters(epsilon=np.zeros(3), nu=np.zeros((3, 3)))
    noise = NoiseParameters(np.array([0.8, 0, 0]), np.zeros(3))
    traj = integrate_exact(initial_density("site1", 3), fmo, noise, 0.5, 1e-3, 500)
    site1 = damping_basis_solution(0.8, np.diag([0, 1]).astype(complex), 0.5)
    rest = np.diag([1.0, 0, 0, 0]).astype(complex)
    assert np.abs(traj.final_state() - np.kron(site1, rest)).max() < 1e-10


def test_exact_time_zero_and_bad_dt():
    rho0 = random_density(2, seed=7)
    fmo = chain_fmo(2, seed=7)
    traj = integrate_exact(rho0, fmo, NoiseParameters.uniform(2, 0.1, 0), 0.0, 0.1)
    assert traj.times == (0.0,)
    assert np.allclose(traj.states[0], rho0)
    with pytest.raises(ValueError):
        integrate_exact(rho0, fmo, NoiseParameters.uniform(2, 0.1, 0), 1.0, 0.0)


def test_exact_fourth_order_convergence():
    fmo = chain_fmo(3, seed=8)
    noise = NoiseParameters.uniform(3, 0.15, 0.2)
    rho0 = random_density(3, seed=9)
    ref = integrate_exact(rho0, fmo, noise, 0.4, 0.4 / 256).final_state()
    errs = [
        np.abs(integrate_exact(rho0, fmo, noise, 0.4, 0.4 / k).final_state() - ref).max()
        for k in (4, 8, 16)
    ]
    for a, b in zip(errs, errs[1:]):
        assert 16 * 0.7 < a / b < 16 * 1.4


def test_exact_trace_drift_and_recording():
    fmo = chain_fmo(3, seed=10)
    noise = NoiseParameters.uniform(3, 0.1, 0.1)
    traj = integrate_exact(random_density(3, seed=11), fmo, noise, 1.0, 1e-3, 250)
    assert len(traj.times) == 5
    for s in traj.states:
        assert abs(np.trace(s).real - 1) < 1e-8


def test_exact_total_population_monotone_under_dissipation():
    fmo = chain_fmo(3, seed=12)
    noise = NoiseParameters.uniform(3, 0.2, 0.1)
    traj = integrate_exact(initial_density("site2", 3), fmo, noise, 1.0, 2e-3, 50)
    totals = traj.populations().sum(axis=1)
    assert np.all(np.diff(totals) <= 1e-8)


# --- digital evolution --------------------------------------------------------------


def test_trotter_constant_populations_without_anything():
    fmo = FmoParameters(epsilon=np.ones(3), nu=np.zeros((3, 3)))
    noise = NoiseParameters.uniform(3, 0, 0)
    traj = evolve_trotter_open(initial_density("site2", 3), fmo, noise, 1.0, 0.1)
    pops = traj.populations()
    assert np.abs(pops - pops[0]).max() < 1e-12


def test_trotter_first_order_convergence_to_exact():
    fmo = chain_fmo(3, seed=13)
    noise = NoiseParameters.uniform(3, 0.15, 0.2)
    rho0 = random_density(3, seed=14)
    ref = integrate_exact(rho0, fmo, noise, 0.5, 1e-3).final_state()
    errs = [
        trace_distance(
            evolve_trotter_open(rho0, fmo, noise, 0.5, dt).final_state(), ref
        )
        for dt in (0.05, 0.025, 0.0125)
    ]
    for a, b in zip(errs, errs[1:]):
        assert 2 * 0.85 < a / b < 2 * 1.15


def test_trotter_excitation_number_conserved_without_noise():
    fmo = chain_fmo(4, seed=15)
    noise = NoiseParameters.uniform(4, 0, 0)
    for method in ("dense", "exact"):
        if method == "dense":
            traj = evolve_trotter_open(
                initial_density("site1", 4), fmo, noise, 0.8, 0.05
            )
        else:
            traj = integrate_exact(
                initial_density("site1", 4), fmo, noise, 0.8, 2e-3, 40
            )
        totals = traj.populations().sum(axis=1)
        assert np.abs(totals - 1.0).max() < 1e-8


def test_trotter_states_stay_physical():
    fmo = chain_fmo(3, seed=16)
    noise = NoiseParameters.uniform(3, 0.1, 0.2)
    traj = evolve_trotter_open(random_density(3, seed=17), fmo, noise, 1.0, 0.05)
    for s in traj.states:
        assert np.abs(s - s.conj().T).max() < 1e-10
        assert np.linalg.eigvalsh(s).min() > -1e-7


def test_dense_and_compiled_lowerings_agree():
    fmo = chain_fmo(7, seed=18, coupling=0.2)
    noise = NoiseParameters.uniform(7, 0.05, 0.05)
    rho0 = initial_density("site1", 7)
    a = evolve_trotter_open(rho0, fmo, noise, 0.2, 0.05, lowering="dense-blocks")
    b = evolve_trotter_open(rho0, fmo, noise, 0.2, 0.05, lowering="compiled-pulses")
    assert a.times == b.times
    worst = max(np.abs(x - y).max() for x, y in zip(a.states, b.states))
    assert worst < 1e-7


def test_compiled_lowering_rejects_long_range():
    nu = np.zeros((4, 4))
    nu[0, 3] = nu[3, 0] = 0.1
    fmo = FmoParameters(epsilon=np.ones(4), nu=nu)
    with pytest.raises(ValueError):
        evolve_trotter_open(
            initial_density("site1", 4),
            fmo,
            NoiseParameters.uniform(4, 0, 0),
            0.1,
            0.05,
            lowering="compiled-pulses",
        )
    with pytest.raises(ValueError):
        evolve_trotter_open(
            initial_density("site1", 4),
            chain_fmo(4),
            NoiseParameters.uniform(4, 0, 0),
            0.1,
            0.05,
            lowering="unitaries",
        )


# --- trajectory container -----------------------------------------------------------


def test_trajectory_validation():
    rho = np.eye(2) / 2
    with pytest.raises(ValueError):
        Trajectory((0.0, 0.0), (rho, rho), "exact")
    with pytest.raises(ValueError):
        Trajectory((0.0,), (np.eye(2),), "exact")  # trace 2
    t = Trajectory((0.0, 1.0), (rho, rho), "exact")
    with pytest.raises(ValueError):
        t.states[0][0, 0] = 5.0


def test_trajectory_csv_layout():
    fmo = chain_fmo(3, seed=19)
    noise = NoiseParameters.uniform(3, 0.1, 0.0)
    traj = integrate_exact(initial_density("site1", 3), fmo, noise, 0.2, 0.01, 10)
    text = traj.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "t,p1,p2,p3,loss,trace,purity"
    assert len(lines) == 1 + len(traj.times)
    first = [float(x) for x in lines[1].split(",")]
    assert first[0] == 0.0 and first[1] == 1.0
    assert first[4] == pytest.approx(1 - (first[1] + first[2] + first[3]), abs=1e-9)
    assert first[5] == pytest.approx(1.0, abs=1e-9)
    last = [float(x) for x in lines[-1].split(",")]
    assert last[4] > 0  # dissipation has drained population


def test_trajectory_csv_extra_columns():
    rho = np.eye(2, dtype=complex) / 2
    traj = Trajectory((0.0, 0.5), (rho, rho), "exact")
    text = traj.to_csv(extra_columns={"trace_distance": np.array([0.0, 0.125])})
    lines = text.strip().split("\n")
    assert lines[0].endswith(",trace_distance")
    assert lines[2].endswith(",0.125")
    with pytest.raises(ValueError):
        traj.to_csv(extra_columns={"bad": np.array([1.0])})


def test_trajectory_state_json():
    import json

    rho = np.array([[0.5, 0.5j], [-0.5j, 0.5]], dtype=complex)
    traj = Trajectory((0.0,), (rho,), "exact")
    doc = json.loads(traj.to_state_json())
    assert doc["method"] == "exact"
    assert doc["states"][0][0][1] == [0.0, 0.5]
