import numpy as np
import pytest
import scipy.linalg as sla

from conftest import random_state_J
from oracles import central_difference
from gaussopt.applications import QuadraticHamiltonian, energy_differential, energy_objective, klein_gordon_chain
from gaussopt.errors import StepUnderflow
from gaussopt.lie import group_defect, make_rng, sample_group, tangent_frame
from gaussopt.optimizer import (
    Objective,
    OptimizerConfig,
    StopReason,
    gradient,
    hamiltonian_flow_step,
    multi_start,
    run,
    step,
)
from gaussopt.phase_space import gamma_from_J, standard_background, vacuum_J, vacuum_gamma


H_F = np.array([[0, 1.0, 0.3, 0], [-1.0, 0, 0, 0.2], [-0.3, 0, 0, 0.7], [0, -0.2, -0.7, 0]])


def oscillator():
    # H = (q^2 + p^2) / 2, ground energy 1/2
    return QuadraticHamiltonian("boson", 0.5 * np.eye(2))


def squeeze(r):
    return np.diag([np.exp(r), np.exp(-r)])


def quadratic_objective(kind, N, target_seed):
    """f(M) = |M G0 M^T - G*|_F^2 for a fixed target covariance."""
    bg = standard_background(kind, "qp", N)
    g0 = vacuum_gamma(kind, N)
    target = gamma_from_J(random_state_J(kind, N, target_seed), bg)
    frame = tangent_frame(kind, vacuum_J(N))

    def value(M, ctx):
        return float(np.sum((M @ g0 @ M.T - target) ** 2))

    def differential(M, ctx):
        D = M @ g0 @ M.T - target
        dG = [M @ (X @ g0 + g0 @ X.T) @ M.T for X in frame.generators]
        return np.array([2 * np.sum(D * g) for g in dG])

    return Objective(value, differential), frame


# ---------------------------------------------------------------------------
# gradients


def test_gradient_vanishes_at_critical_point():
    obj, frame = energy_objective(oscillator())
    K, norm, _ = gradient(obj, np.eye(2), frame)
    assert norm < 1e-14 and not np.any(np.abs(K) > 1e-14)


@pytest.mark.parametrize("kind", ["boson", "fermion"])
def test_quadratic_objective_gradient(kind):
    obj, frame = quadratic_objective(kind, 2, 3)
    M = sample_group(kind, 2, 4, 0.4)
    df = obj.df(M)
    fd = np.array([central_difference(obj.f, M, X) for X in frame.generators])
    assert np.max(np.abs(df - fd)) < 1e-5 * max(1.0, np.max(np.abs(fd)))


def test_descent_direction_on_klein_gordon():
    H, _ = klein_gordon_chain(4, 0.5)
    obj, frame = energy_objective(H)
    M = sample_group("boson", 4, 2, 0.3)
    K, norm, df = gradient(obj, M, frame)
    slope = central_difference(obj.f, M, K / norm)
    assert slope < 0
    assert slope == pytest.approx(-np.dot(df, df) / norm, rel=1e-6)


def test_frame_reuse_matches_recomputed_frame():
    H, _ = klein_gordon_chain(3, 0.7)
    obj, frame = energy_objective(H)
    J0 = frame.reference_J
    M = sample_group("boson", 3, 9, 0.5)
    Mi = np.linalg.inv(M)
    J = M @ J0 @ Mi
    K1, _, _ = gradient(obj, M, frame)
    dJ1 = M @ (K1 @ J0 - J0 @ K1) @ Mi
    # fresh orthonormal frame at J, perturbing as e^{x Xi'} M
    frame2 = tangent_frame("boson", J)
    gamma = gamma_from_J(J, standard_background("boson", "qp", 3))
    df2 = energy_differential(H, gamma, np.eye(6), frame2.generators)
    K2 = -frame2.combine(df2)
    dJ2 = K2 @ J - J @ K2
    assert np.max(np.abs(dJ1 - dJ2)) < 1e-9


# ---------------------------------------------------------------------------
# line search


def test_first_trial_accepted_far_from_minimum():
    obj, frame = energy_objective(oscillator())
    M = squeeze(1.0)
    K, _, _ = gradient(obj, M, frame)
    cfg = OptimizerConfig()
    M1, F1, s = step(M, K, obj.f(M), obj, cfg)
    assert s == cfg.initial_step
    assert F1 < obj.f(M)


def test_step_shrinks_near_minimum():
    obj, frame = energy_objective(oscillator())
    M = squeeze(0.01)
    K, _, _ = gradient(obj, M, frame)
    F0 = obj.f(M)
    _, F1, s = step(M, K, F0, obj, OptimizerConfig())
    assert s < 0.5 and F1 < F0


def test_uphill_direction_underflows():
    obj, frame = energy_objective(oscillator())
    M = squeeze(0.3)
    K, _, _ = gradient(obj, M, frame)
    with pytest.raises(StepUnderflow):
        step(M, -K, obj.f(M), obj, OptimizerConfig(halvings_per_iter=10))


# ---------------------------------------------------------------------------
# runs


def test_start_at_minimum_stops_immediately():
    obj, frame = energy_objective(oscillator())
    res = run(obj, frame, np.eye(2))
    assert res.stop_reason == StopReason.GRAD_TOL
    assert res.iterations == 0
    assert res.final_value == pytest.approx(0.5, abs=1e-15)


def test_klein_gordon_two_site_monotone_trace():
    H, gs = klein_gordon_chain(2, 1.0)
    obj, frame = energy_objective(H)
    res = run(obj, frame, sample_group("boson", 2, 5, 0.5))
    accepted = [F for F, _, s in res.iterates]
    assert all(b < a for a, b in zip(accepted, accepted[1:]))
    assert group_defect(res.final_M, "boson") < 1e-8
    assert res.final_value == pytest.approx(0.5 * np.trace(H.h @ gs.gamma), abs=1e-9)


def test_single_start_equals_run():
    obj, frame = energy_objective(klein_gordon_chain(3, 0.5)[0])

    def sampler(rng):
        return sample_group("boson", 3, rng, 0.3)

    cfg = OptimizerConfig(starts=1)
    ms = multi_start(obj, frame, cfg, sampler)
    single = run(obj, frame, sampler(make_rng(0)), cfg, seed=0)
    assert ms.best.final_value == single.final_value
    assert np.array_equal(ms.best.final_M, single.final_M)


def test_multi_start_is_deterministic():
    obj, frame = energy_objective(QuadraticHamiltonian("fermion", H_F))
    cfg = OptimizerConfig(starts=6, seeds=(11,))
    a = multi_start(obj, frame, cfg)
    b = multi_start(obj, frame, cfg)
    assert [r.final_value for r in a.runs] == [r.final_value for r in b.runs]
    assert [r.seed for r in a.runs] == [11, 12, 13, 14, 15, 16]


def test_more_starts_never_worse():
    obj, frame = energy_objective(QuadraticHamiltonian("fermion", H_F))
    one = multi_start(obj, frame, OptimizerConfig(starts=1, max_iters=5))
    many = multi_start(obj, frame, OptimizerConfig(starts=32, max_iters=5, prune_keep_fraction=1.0))
    assert many.best.final_value <= one.best.final_value


def test_pruning_keeps_some_trajectories():
    obj, frame = energy_objective(klein_gordon_chain(3, 0.5)[0])
    res = multi_start(obj, frame, OptimizerConfig(starts=20, prune_period=2, prune_keep_fraction=0.1))
    pruned = [r for r in res.runs if r.stop_reason == StopReason.PRUNED]
    assert 0 < len(pruned) < 20
    assert res.best.stop_reason != StopReason.PRUNED


@pytest.mark.parametrize(
    "kwargs",
    [
        {"initial_step": 0.0},
        {"starts": 0},
        {"prune_keep_fraction": 0.0},
        {"prune_keep_fraction": 1.5},
        {"grad_tol": -1.0},
        {"retraction": "euler"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        OptimizerConfig(**kwargs)


def test_exact_exponential_retraction_agrees():
    obj, frame = energy_objective(klein_gordon_chain(2, 1.0)[0])
    M0 = sample_group("boson", 2, 1, 0.3)
    a = run(obj, frame, M0, OptimizerConfig())
    b = run(obj, frame, M0, OptimizerConfig(retraction="exp"))
    assert a.final_value == pytest.approx(b.final_value, abs=1e-9)


# ---------------------------------------------------------------------------
# Hamiltonian flow


def test_flow_with_flat_objective_is_static():
    frame = tangent_frame("boson", vacuum_J(1))
    obj = Objective(lambda M, c: 0.0, lambda M, c: np.zeros(frame.dim))
    M = squeeze(0.2)
    assert np.allclose(hamiltonian_flow_step(obj, M, frame, 0.1), M, atol=1e-15)


def test_flow_conserves_energy():
    H = QuadraticHamiltonian("boson", np.diag([0.8, 0.3]))
    obj, frame = energy_objective(H)
    M = squeeze(0.4) @ sla.expm(0.3 * np.array([[0.0, 1.0], [-1.0, 0.0]]))
    E0 = obj.f(M)
    for _ in range(1000):
        M = hamiltonian_flow_step(obj, M, frame, 1e-3)
    assert abs(obj.f(M) - E0) / E0 < 1e-5
    assert group_defect(M, "boson") < 1e-8


def test_flow_direction_is_level():
    H, _ = klein_gordon_chain(2, 0.8)
    obj, frame = energy_objective(H)
    M = sample_group("boson", 2, 3, 0.4)
    X = -np.linalg.solve(frame.symplectic, obj.df(M))
    assert abs(np.dot(obj.df(M), X)) < 1e-10 * np.dot(obj.df(M), obj.df(M))
