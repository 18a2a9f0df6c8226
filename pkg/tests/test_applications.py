import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_state_J
from oracles import cop_scan, ising_ed_ground_energy, kg_ed_ground_energy, kg_normal_mode_energy
from gaussopt.applications import (
    QuadraticHamiltonian,
    block_entropy,
    complexity,
    complexity_function,
    cop,
    cop_problem,
    energy,
    energy_objective,
    eop_problem,
    find_ground_state,
    gaussian_eop,
    ground_state,
    hashing_bound,
    ising_chain,
    klein_gordon_chain,
    klein_gordon_energy,
)
from gaussopt.exact_fermion import FockRep, gaussian_density
from gaussopt.optimizer import OptimizerConfig, gradient
from gaussopt.phase_space import SubsystemPartition, direct_sum, purity_defect, vacuum_J
from gaussopt.purification import build_problem, purification_partition

A2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
EOP_CONFIG = OptimizerConfig(starts=8, prune_keep_fraction=0.5)

# n = a^dag a = 1/2 + i q p in Majorana form
NUMBER = QuadraticHamiltonian("fermion", 0.5 * A2, 0.5)


# ---------------------------------------------------------------------------
# energies and ground states


def test_oscillator_vacuum_energy():
    H = QuadraticHamiltonian("boson", 0.5 * np.eye(2))
    assert energy(H, ground_state(H)) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("N,m", [(2, 1.0), (8, 0.3), (32, 0.1)])
def test_klein_gordon_energy(N, m):
    H, gs = klein_gordon_chain(N, m)
    ref = kg_normal_mode_energy(N, m)
    assert energy(H, gs) == pytest.approx(ref, rel=1e-12)
    assert klein_gordon_energy(N, m) == pytest.approx(kg_ed_ground_energy(N, m), rel=1e-12)
    assert energy(H, ground_state(H)) == pytest.approx(ref, rel=1e-12)


def test_fermion_number_operator():
    vac, occ = A2, -A2
    assert energy(NUMBER, vac) == pytest.approx(0.0, abs=1e-15)
    assert energy(NUMBER, occ) == pytest.approx(1.0, abs=1e-15)
    # same numbers from the Fock-space density matrices
    rep = FockRep(1)
    n_op = rep.creators[0] @ rep.annihilators[0]
    for J, n in ((vac, 0.0), (occ, 1.0)):
        rho = gaussian_density(J, rep).rho
        assert np.trace(rho @ n_op).real == pytest.approx(n, abs=1e-14)


@pytest.mark.parametrize("N", [2, 3, 4, 6])
def test_ising_ground_state_matches_ed(N):
    H, gs = ising_chain(N)
    assert energy(H, gs) == pytest.approx(ising_ed_ground_energy(N), abs=1e-10)


def test_ising_off_critical_matches_ed():
    H, gs = ising_chain(4, 1.0, 0.4)
    assert energy(H, gs) == pytest.approx(ising_ed_ground_energy(4, 1.0, 0.4), abs=1e-10)


def test_vacuum_energy_gradient_vanishes():
    H = QuadraticHamiltonian("boson", 0.5 * np.eye(4))
    obj, frame = energy_objective(H)
    _, norm, _ = gradient(obj, np.eye(4), frame)
    assert norm < 1e-10


def test_variational_ground_state():
    H, gs = klein_gordon_chain(4, 0.5)
    res = find_ground_state(H, OptimizerConfig(starts=4))
    assert res.energy == pytest.approx(energy(H, gs), rel=1e-8)
    assert purity_defect(res.state.J) < 1e-8


def test_unstable_boson_hamiltonian():
    with pytest.raises(ValueError):
        ground_state(QuadraticHamiltonian("boson", np.diag([1.0, -1.0])))


# ---------------------------------------------------------------------------
# entropies


@pytest.mark.parametrize("r", [0.05, 0.3, 0.7])
def test_fermion_entropy_formula(r):
    c = math.cos(2 * r)
    p = (1 + c) / 2
    assert block_entropy(c * A2, "fermion").value == pytest.approx(-p * math.log(p) - (1 - p) * math.log(1 - p), rel=1e-12)


@pytest.mark.parametrize("r", [0.05, 0.3, 1.5])
def test_boson_entropy_formula(r):
    c = math.cosh(2 * r)
    ref = (c + 1) / 2 * math.log((c + 1) / 2) - (c - 1) / 2 * math.log((c - 1) / 2)
    assert block_entropy(c * A2, "boson").value == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("kind", ["boson", "fermion"])
def test_pure_block_has_zero_entropy(kind):
    assert block_entropy(random_state_J(kind, 3, 2), kind).value == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("kind", ["boson", "fermion"])
@given(seed=st.integers(0, 10_000))
def test_pure_state_entropies_are_symmetric(kind, seed):
    J = random_state_J(kind, 3, seed)
    part = SubsystemPartition.from_sizes([("A", 1), ("B", 2)])
    idx_a, idx_b = part.indices("A"), part.indices("B")
    s_a = block_entropy(J[np.ix_(idx_a, idx_a)], kind).value
    s_b = block_entropy(J[np.ix_(idx_b, idx_b)], kind).value
    assert s_a == pytest.approx(s_b, abs=1e-7)


# ---------------------------------------------------------------------------
# entanglement of purification


def test_klein_gordon_eop_spot_value(kg100):
    res = gaussian_eop(eop_problem(kg100, 100, 1, 1, 10, 1, 1, "boson"), EOP_CONFIG)
    assert res.value == pytest.approx(0.01861871, abs=1e-6)
    assert res.value >= res.hashing - 1e-12


def test_ising_eop_spot_value(ising100):
    res = gaussian_eop(eop_problem(ising100, 100, 1, 1, 50, 1, 1, "fermion"), EOP_CONFIG)
    assert res.value == pytest.approx(0.00040596, abs=1e-6)
    assert res.value >= res.hashing - 1e-12


@pytest.mark.parametrize("kind", ["boson", "fermion"])
def test_pure_input_eop_is_entanglement_entropy(kind):
    J = random_state_J(kind, 2, 6)
    prob = build_problem(J, purification_partition(1, 1, 1, 1), kind)
    res = gaussian_eop(prob, OptimizerConfig(starts=3))
    s_a = block_entropy(J[np.ix_([0, 2], [0, 2])], kind).value
    assert res.value == pytest.approx(s_a, abs=1e-8)


def test_hashing_bound_product_and_pure():
    part = SubsystemPartition.from_sizes([("A", 1), ("B", 1)])
    ja, jb = math.cos(0.4) * A2, math.cos(0.9) * A2
    prod = direct_sum(ja, jb)
    assert hashing_bound(prod, part, "fermion") == pytest.approx(-block_entropy(jb, "fermion").value, abs=1e-12)
    J = random_state_J("fermion", 2, 4)
    s_a = block_entropy(J[np.ix_([0, 2], [0, 2])], "fermion").value
    assert hashing_bound(J, part, "fermion") == pytest.approx(s_a, abs=1e-8)


# ---------------------------------------------------------------------------
# complexity


@pytest.mark.parametrize("kind", ["boson", "fermion"])
def test_complexity_of_state_with_itself(kind):
    J = random_state_J(kind, 2, 1)
    assert complexity(J, J, kind) == pytest.approx(0.0, abs=1e-7)


@pytest.mark.parametrize("r", [0.1, 0.6, 1.3])
def test_single_mode_squeeze_complexity(r):
    S = np.diag([math.exp(r), math.exp(-r)])
    J = S @ A2 @ np.linalg.inv(S)
    assert complexity(J, A2, "boson") == pytest.approx(r, rel=1e-12)


def test_fermion_rotation_complexity():
    # R = exp(K) with K anticommuting with J0, so Delta = exp(2K)
    theta = 0.4
    c, s = math.cos(theta), math.sin(theta)
    R = np.eye(4)
    R[np.ix_([0, 1], [0, 1])] = [[c, -s], [s, c]]
    R[np.ix_([2, 3], [2, 3])] = [[c, s], [-s, c]]
    J0 = vacuum_J(2)
    assert complexity_function(R @ J0 @ R.T, J0, "fermion") == pytest.approx(2 * theta**2, rel=1e-12)


@pytest.mark.parametrize("kind,J_A", [("boson", math.cosh(0.8) * A2), ("fermion", math.cos(0.8) * A2)])
def test_cop_matches_derivative_free_scan(kind, J_A):
    res = cop(J_A, 1, kind, OptimizerConfig(starts=4))
    prob = cop_problem(J_A, 1, kind)
    ref = cop_scan(prob.J_init, prob.ancilla_indices, kind, starts=4)
    assert res.value == pytest.approx(ref, abs=1e-6)
    assert purity_defect(res.J) < 1e-9
