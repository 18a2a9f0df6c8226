import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_state_J
from gaussopt.applications import klein_gordon_chain, interval_pair
from gaussopt.errors import DimensionMismatch, InsufficientAncilla
from gaussopt.lie import full_algebra_basis, group_defect, sample_group, stabilizer_split
from gaussopt.phase_space import S2, purity_defect, restrict, restricted_spectrum, vacuum_J
from gaussopt.purification import (
    MixedStandardForm,
    build_problem,
    mixed_standard_form,
    purification_partition,
    standard_mixed_J,
    standard_purification,
)
from gaussopt.phase_space import Kind

A2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _recon(form):
    return form.T @ form.J_standard @ np.linalg.inv(form.T)


# ---------------------------------------------------------------------------
# mixed standard form


def test_boson_single_mode_standard_form():
    form = mixed_standard_form(math.cosh(0.6) * A2, "boson")
    assert form.r == pytest.approx([0.3], abs=1e-12)
    assert np.allclose(np.abs(form.T), np.eye(2), atol=1e-12)


def test_already_standard_two_modes():
    c = [math.cosh(1.0), math.cosh(0.4)]
    form = mixed_standard_form(standard_mixed_J(c), "boson")
    assert form.r == pytest.approx([0.5, 0.2], abs=1e-12)
    assert np.allclose(np.abs(form.T), np.eye(4), atol=1e-10)


def test_fermion_single_mode_standard_form():
    form = mixed_standard_form(math.cos(0.5) * A2, "fermion")
    assert form.r == pytest.approx([0.25], abs=1e-12)


def test_klein_gordon_two_site_reconstruction():
    _, gs = klein_gordon_chain(20, 0.1)
    J_AB = interval_pair(gs.J, 20, 1, 1, 3)
    form = mixed_standard_form(J_AB, "boson")
    assert np.max(np.abs(_recon(form) - J_AB)) < 1e-8
    assert group_defect(form.T, "boson") < 1e-8


@pytest.mark.parametrize("kind", ["boson", "fermion"])
@given(seed=st.integers(0, 10_000), N=st.integers(1, 3))
def test_standard_form_reconstructs(kind, seed, N):
    J = random_state_J(kind, N, seed, mixed=True)
    form = mixed_standard_form(J, kind)
    assert np.max(np.abs(_recon(form) - J)) < 1e-8
    assert np.all(np.diff(form.r) <= 1e-12)
    assert np.allclose(np.sort(form.c), np.sort(restricted_spectrum(J, kind)), atol=1e-8)


# ---------------------------------------------------------------------------
# standard purification


def test_zero_squeezing_gives_product_of_vacua():
    form = MixedStandardForm(np.zeros(2), np.eye(4), Kind.BOSON)
    assert np.array_equal(standard_purification(form, 1, 1), vacuum_J(4))


def test_boson_single_mode_purification_blocks():
    r = 0.35
    Jp = standard_purification(MixedStandardForm(np.array([r]), np.eye(2), Kind.BOSON), 1, 0)
    P = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    per_mode = P.T @ Jp @ P
    assert np.allclose(per_mode[:2, :2], math.cosh(2 * r) * A2)
    assert np.allclose(per_mode[:2, 2:], math.sinh(2 * r) * S2)
    assert purity_defect(Jp) < 1e-12


def test_fermion_single_mode_purification_is_pure():
    Jp = standard_purification(MixedStandardForm(np.array([0.3]), np.eye(2), Kind.FERMION), 0, 1)
    assert purity_defect(Jp) < 1e-12
    assert np.allclose(Jp, -Jp.T)


@pytest.mark.parametrize("kind", ["boson", "fermion"])
def test_standard_purification_restricts_exactly(kind):
    J = random_state_J(kind, 2, 11, mixed=True)
    form = mixed_standard_form(J, kind)
    Jp = standard_purification(form, 1, 2)
    part = purification_partition(1, 1, 1, 2)
    assert np.array_equal(restrict(Jp, part, ["A", "B"]), form.J_standard)


def test_insufficient_ancilla():
    form = MixedStandardForm(np.array([0.2, 0.1]), np.eye(4), Kind.BOSON)
    with pytest.raises(InsufficientAncilla):
        standard_purification(form, 1, 0)


# ---------------------------------------------------------------------------
# purification problems


@pytest.mark.parametrize("kind", ["boson", "fermion"])
def test_problem_invariants(kind):
    J = random_state_J(kind, 2, 5, mixed=True)
    prob = build_problem(J, purification_partition(1, 1, 1, 1), kind)
    assert np.max(np.abs(restrict(prob.J_init, prob.partition, ["A", "B"]) - J)) < 1e-9
    assert purity_defect(prob.J_init) < 1e-10
    frame = prob.ancilla_frame
    assert np.max(np.abs(frame.metric - np.eye(frame.dim))) < 1e-10
    sys_idx = prob.partition.indices(["A", "B"])
    for K in frame.generators:
        assert not np.any(K[sys_idx, :]) and not np.any(K[:, sys_idx])


@pytest.mark.parametrize("kind", ["boson", "fermion"])
def test_restriction_invariant_under_ancilla_group(kind):
    J = random_state_J(kind, 2, 8, mixed=True)
    prob = build_problem(J, purification_partition(1, 1, 1, 1), kind)
    worst = 0.0
    for seed in range(100):
        M = prob.embed_ancilla(sample_group(kind, 2, seed, 0.5))
        worst = max(worst, np.max(np.abs(restrict(prob.J_of(M), prob.partition, ["A", "B"]) - J)))
    assert worst < 1e-9


def test_fermion_all_mixed_ancilla_has_no_stabilizer():
    J = random_state_J("fermion", 2, 3, mixed=True)
    assert np.all(restricted_spectrum(J, "fermion") < 1 - 1e-3)
    prob = build_problem(J, purification_partition(1, 1, 1, 1), "fermion")
    # every ancilla generator moves J_init when all r_i > 0
    assert prob.ancilla_frame.dim == len(full_algebra_basis("fermion", 2))


def test_pure_system_leaves_ancilla_stabilizer():
    J = random_state_J("fermion", 2, 3)
    prob = build_problem(J, purification_partition(1, 1, 1, 1), "fermion")
    _, hperp = stabilizer_split(full_algebra_basis("fermion", 2), vacuum_J(2))
    assert prob.ancilla_frame.dim == len(hperp)


def test_extra_ancilla_modes_are_pure_factors():
    J = random_state_J("boson", 1, 4, mixed=True)
    prob = build_problem(J, purification_partition(1, 0, 1, 1), "boson")
    c_anc = restricted_spectrum(restrict(prob.J_init, prob.partition, ["A'", "B'"]), "boson")
    c_sys = restricted_spectrum(J, "boson")
    assert np.allclose(np.sort(c_anc), np.sort(np.concatenate([c_sys, [1.0]])), atol=1e-9)


def test_problem_shape_checks():
    J = random_state_J("boson", 2, 1, mixed=True)
    with pytest.raises(DimensionMismatch):
        build_problem(J, purification_partition(1, 2, 1, 1), "boson")
