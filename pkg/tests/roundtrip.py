"""Round trips through every representation of one random state."""

import numpy as np

from conftest import random_state_J
from gaussopt.lie import sample_group
from gaussopt.phase_space import GaussianState, change_basis, gamma_from_J, standard_background, vacuum_gamma
from gaussopt import representations as rep


def _err(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def round_trip_errors(kind, N, seed):
    """Max deviations of each representation pair for one pure and one mixed state."""
    out = {}
    bg = standard_background(kind, "qp", N)
    J = random_state_J(kind, N, seed, mixed=False)
    gamma = gamma_from_J(J, bg)
    Jm = random_state_J(kind, N, seed + 7919, mixed=True)
    gamma_m = gamma_from_J(Jm, bg)

    st_ = GaussianState.from_J(kind, J)
    out["J"] = _err(GaussianState.from_covariance(kind, st_.gamma).J, J)
    out["aab"] = _err(change_basis(change_basis(GaussianState.from_J(kind, Jm), "aab"), "qp").gamma, gamma_m)

    sq = rep.covariance_to_squeezing(gamma, None, kind)
    out["squeezing"] = _err(rep.squeezing_to_covariance(sq), gamma)
    out["squeezing_blocks"] = _err(rep.squeezing_from_blocks(rep.squeezing_to_covariance(sq), kind).gamma, sq.gamma)

    b = rep.state_to_bogoliubov(gamma, None, kind)
    M = rep.bogoliubov_to_group(b)
    out["bogoliubov"] = _err(M @ vacuum_gamma(kind, N) @ M.T, gamma)
    Mr = sample_group(kind, N, seed + 1, 0.5)
    b2 = rep.group_to_bogoliubov(Mr, kind)
    out["group"] = _err(rep.bogoliubov_to_group(b2), Mr)

    th = rep.covariance_to_thermal(Jm, kind)
    out["thermal"] = _err(rep.thermal_to_J(th), Jm)

    rel = rep.relative_structure(gamma, None, kind)
    out["generator"] = _err(rep.generator_to_covariance(rel.log_generator, vacuum_gamma(kind, N)), gamma)

    if kind == "boson":
        wf = rep.covariance_to_wavefunction(gamma)
        out["wavefunction_pure"] = _err(rep.wavefunction_to_covariance(wf), gamma)
        wfm = rep.covariance_to_wavefunction(gamma_m, mixed=True)
        out["wavefunction_mixed"] = _err(rep.wavefunction_to_covariance(wfm), gamma_m)
    return out
