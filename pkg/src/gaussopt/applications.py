"""Objectives and models: energies, entanglement entropy, EoP, complexity, CoP.

Every objective is a function of M through J = M J0 M^-1 (or
Gamma = M Gamma0 M^T).  Differentials are taken along M e^{x Xi} and, for
functions of J, share one contraction: if dF = Tr(W dJ) then

    dF_mu = Tr([J0, M^-1 W M] Xi_mu).
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DifferentComponent, DimensionMismatch, NotRestricted, SingularSpectrum
from .lie import TangentFrame, sample_group, tangent_frame
from .optimizer import Objective, OptimizationRun, OptimizerConfig, multi_start
from .phase_space import (
    GaussianState,
    Kind,
    SubsystemPartition,
    as_kind,
    gamma_from_J,
    mode_indices,
    omega_qp,
    standard_background,
    vacuum_J,
)
from .purification import PurificationProblem, build_problem, purification_partition

_BOSON_CLAMP = 1.0 + 1e-14
_FERMION_CLAMP = 1.0 - 1e-14


# ---------------------------------------------------------------------------
# quadratic Hamiltonians


@dataclass(frozen=True, eq=False)
class QuadraticHamiltonian:
    """H = c + h_ab xi^a xi^b (bosons, h symmetric) or
    H = c + i h_ab xi^a xi^b (fermions, h antisymmetric), qp basis."""

    kind: Kind
    h: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", as_kind(self.kind))
        h = np.asarray(self.h, dtype=float)
        scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
        if self.kind is Kind.BOSON:
            if np.max(np.abs(h - h.T)) > 1e-12 * scale:
                raise ValueError("bosonic h must be symmetric")
        elif np.max(np.abs(h + h.T)) > 1e-12 * scale:
            raise ValueError("fermionic h must be antisymmetric")
        object.__setattr__(self, "h", h)

    @property
    def N(self) -> int:
        return self.h.shape[0] // 2

    def is_stable(self) -> bool:
        """Bosons: h positive definite, so Omega h has imaginary spectrum and a
        ground state exists.  Fermions: always."""
        if self.kind is Kind.FERMION:
            return True
        return bool(np.linalg.eigvalsh(self.h)[0] > 0)

    def frequencies(self) -> np.ndarray:
        """Normal-mode frequencies omega_i (H = sum omega_i (n_i +- 1/2) + c)."""
        if self.kind is Kind.BOSON:
            w, v = np.linalg.eigh(self.h)
            r = (v * np.sqrt(np.maximum(w, 0))) @ v.T
            e = np.linalg.eigvalsh(1j * (r @ omega_qp(self.N) @ r))
        else:
            e = np.linalg.eigvalsh(1j * self.h)
        return 2.0 * np.sort(np.abs(e))[::2]


def energy(H: QuadraticHamiltonian, state) -> float:
    """<H> = c + Tr(h Gamma) / 2 by Wick's theorem with C2 = (G + i Omega) / 2."""
    gamma = state.gamma if isinstance(state, GaussianState) else np.asarray(state)
    if gamma.shape != H.h.shape:
        raise DimensionMismatch(f"state has shape {gamma.shape}, Hamiltonian {H.h.shape}")
    return float(H.offset + 0.5 * np.trace(H.h @ gamma))


def ground_state(H: QuadraticHamiltonian) -> GaussianState:
    """Exact ground state of a quadratic Hamiltonian.

    Fermions: Omega = h |h|^-1.  Bosons: J = Omega h (-(Omega h)^2)^(-1/2),
    evaluated through the symmetric square root of h.
    """
    n = H.N
    if H.kind is Kind.FERMION:
        w, v = np.linalg.eigh(1j * H.h)
        Om = (-1j * (v * np.sign(w)) @ v.conj().T).real
        if np.any(np.abs(w) < 1e-12):
            warnings.warn("Hamiltonian has zero modes; ground state is degenerate", stacklevel=2)
        return GaussianState.from_covariance(Kind.FERMION, 0.5 * (Om - Om.T))
    if not H.is_stable():
        raise ValueError("bosonic Hamiltonian is not positive definite; no ground state")
    w, v = np.linalg.eigh(H.h)
    r = (v * np.sqrt(w)) @ v.T
    ri = (v / np.sqrt(w)) @ v.T
    e, u = np.linalg.eigh(1j * (r @ omega_qp(n) @ r))
    J = (ri @ (-1j * (u * np.sign(e)) @ u.conj().T) @ r).real
    return GaussianState.from_J(Kind.BOSON, J)


def energy_differential(H: QuadraticHamiltonian, gamma0, M, generators) -> np.ndarray:
    """dE_mu = Tr((Gamma0 H' + Gamma0^T H'^T) Xi_mu) / 2 with H' = M^T h M,
    for Gamma(x) = M e^{x Xi} Gamma0 e^{x Xi^T} M^T."""
    Hp = M.T @ H.h @ M
    C = 0.5 * (gamma0 @ Hp + gamma0.T @ Hp.T)
    gens = np.asarray(generators)
    return gens.reshape(len(gens), -1) @ C.T.reshape(-1)


def energy_objective(H: QuadraticHamiltonian, frame: Optional[TangentFrame] = None):
    """Objective over the full group acting on the standard vacuum."""
    n = H.N
    J0 = vacuum_J(n)
    frame = frame or tangent_frame(H.kind, J0)
    gamma0 = gamma_from_J(J0, standard_background(H.kind, "qp", n))

    def value(M, ctx):
        return H.offset + 0.5 * np.trace(H.h @ (M @ gamma0 @ M.T))

    def differential(M, ctx):
        return energy_differential(H, gamma0, M, frame.generators)

    return Objective(value, differential), frame


# ---------------------------------------------------------------------------
# model chains


def klein_gordon_chain(N: int, m_over_delta: float):
    """Periodic harmonic chain (lattice spacing 1) and its ground state.

    H = 1/2 sum [pi_i^2 + m^2 phi_i^2 + (phi_i - phi_{i+1})^2]; the ground
    covariance is circulant with G_phiphi = F^-1(1/w_k), G_pipi = F^-1(w_k)
    and w_k = sqrt(m^2 + 4 sin^2(pi k / N)).
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    if m_over_delta <= 0:
        raise ValueError("mass must be positive")
    m = float(m_over_delta)
    k = np.arange(N)
    w = np.sqrt(m**2 + 4 * np.sin(np.pi * k / N) ** 2)
    cos = np.cos(2 * np.pi * np.outer(k, k) / N)
    g_phi = cos @ (1.0 / w) / N
    g_pi = cos @ w / N
    dist = (k[:, None] - k[None, :]) % N
    z = np.zeros((N, N))
    G = np.block([[g_phi[dist], z], [z, g_pi[dist]]])
    V = (m**2 + 2.0) * np.eye(N)
    shift = np.roll(np.eye(N), 1, axis=1)
    V = V - shift - shift.T
    h = 0.5 * np.block([[V, z], [z, np.eye(N)]])
    return QuadraticHamiltonian(Kind.BOSON, h), GaussianState.from_covariance(Kind.BOSON, 0.5 * (G + G.T))


def klein_gordon_energy(N: int, m_over_delta: float) -> float:
    k = np.arange(N)
    return 0.5 * float(np.sum(np.sqrt(m_over_delta**2 + 4 * np.sin(np.pi * k / N) ** 2)))


def ising_hamiltonian(N: int, J: float = 1.0, h: float = 1.0) -> QuadraticHamiltonian:
    """H = -sum (2J S^x_i S^x_{i+1} + h S^z_i) in Majorana form.

    With q = (c + c^dag)/sqrt2, p = i(c^dag - c)/sqrt2 one has
    sigma^z = -2i q p and sigma^x_i sigma^x_{i+1} = -2i p_i q_{i+1}.  The
    wrap-around bond carries the sign of the even-parity (antiperiodic)
    sector.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    q = np.zeros((2 * N, 2 * N))

    def add(a, b, v):
        q[a, b] += v
        q[b, a] -= v

    for i in range(N):
        add(i, N + i, 0.5 * h)
        j = (i + 1) % N
        sign = -1.0 if j == 0 else 1.0
        add(N + i, j, 0.5 * sign * J)
    return QuadraticHamiltonian(Kind.FERMION, q)


def ising_chain(N: int, J: float = 1.0, h: float = 1.0):
    H = ising_hamiltonian(N, J, h)
    return H, ground_state(H)


def interval_pair(J, n_sites: int, n_A: int, n_B: int, d: int) -> np.ndarray:
    """Restriction of a chain state to A = sites [0, n_A) and
    B = sites [n_A + d, n_A + d + n_B)."""
    if n_A + d + n_B > n_sites:
        raise ValueError("intervals do not fit on the chain")
    sites = list(range(n_A)) + list(range(n_A + d, n_A + d + n_B))
    idx = mode_indices(sites, n_sites)
    return np.asarray(J)[np.ix_(idx, idx)]


# ---------------------------------------------------------------------------
# entanglement entropy


@dataclass(frozen=True)
class EntropyResult:
    value: float
    spectrum: np.ndarray  # lambda_i >= 0, one per mode
    D_eigenvalues: np.ndarray


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def _spectral_frame(Jb, kind):
    """(e, V, Vinv) with i J_b = V diag(e) Vinv and e real."""
    n = Jb.shape[0] // 2
    if kind is Kind.BOSON:
        G = -Jb @ omega_qp(n)
        G = 0.5 * (G + G.T)
        w, v = np.linalg.eigh(G)
        if w[0] <= 0:
            raise NotRestricted("block covariance is not positive definite")
        r = (v * np.sqrt(w)) @ v.T
        ri = (v / np.sqrt(w)) @ v.T
        om = np.linalg.inv(omega_qp(n))
        e, u = np.linalg.eigh(-1j * (r @ om @ r))
        return e, r @ u, u.conj().T @ ri
    Om = 0.5 * (Jb - Jb.T)
    e, u = np.linalg.eigh(1j * Om)
    return e, u, u.conj().T


def _clamp(e, kind, warn=True):
    a = np.abs(e)
    if kind is Kind.BOSON:
        if warn and np.any(a < 1.0 - 1e-8):
            raise NotRestricted(f"bosonic eigenvalue {a.min():.3e} below 1")
        a2 = np.maximum(a, _BOSON_CLAMP)
    else:
        if warn and np.any(a > 1.0 + 1e-8):
            raise NotRestricted(f"fermionic eigenvalue {a.max():.3e} above 1")
        a2 = np.minimum(a, _FERMION_CLAMP)
    return np.where(e >= 0, a2, -a2), not np.allclose(a, a2, rtol=0, atol=0)


def _entropy_from_lambda(lam, kind):
    lam = np.asarray(lam, dtype=float)
    if kind is Kind.BOSON:
        lam = np.maximum(lam, 1.0)
        return float(np.sum(_xlogx((lam + 1) / 2) - _xlogx((lam - 1) / 2)))
    lam = np.clip(lam, 0.0, 1.0)
    return float(-np.sum(_xlogx((1 + lam) / 2) + _xlogx((1 - lam) / 2)))


def block_entropy(Jb, kind) -> EntropyResult:
    """Entropy of the state whose restricted complex structure is J_b."""
    kind = as_kind(kind)
    Jb = np.asarray(Jb, dtype=float)
    if Jb.size == 0:
        return EntropyResult(0.0, np.zeros(0), np.zeros(0))
    e, _, _ = _spectral_frame(Jb, kind)
    _clamp(e, kind)  # validates
    lam = np.sort(np.abs(e))[::-1][::2]
    d = np.sort(0.5 * (1 + e))
    return EntropyResult(_entropy_from_lambda(lam, kind), lam, d)


def entanglement_entropy(J, partition: SubsystemPartition, block, kind) -> EntropyResult:
    idx = partition.indices(block)
    return block_entropy(np.asarray(J)[np.ix_(idx, idx)], kind)


def entropy_weight(Jb, kind) -> np.ndarray:
    """W with dS = Tr(W dJ_b): W = Re[(i/2) g'(D)], D = (1 + iJ_b)/2,
    g'(d) = log|d| (bosons) or -log d (fermions)."""
    e, V, Vi = _spectral_frame(Jb, kind)
    e, clamped = _clamp(e, kind, warn=False)
    if clamped:
        warnings.warn(SingularSpectrum("entropy spectrum clamped at a pure mode"), stacklevel=3)
    d = 0.5 * (1 + e)
    gp = np.log(np.abs(d)) if kind is Kind.BOSON else -np.log(d)
    return (0.5j * (V * gp) @ Vi).real


def _commutator_contraction(J0, M, W, generators):
    Y = np.linalg.solve(M, W @ M)
    C = J0 @ Y - Y @ J0
    gens = np.asarray(generators)
    return (gens.reshape(len(gens), -1) @ C.T.reshape(-1)).real


def entropy_differential(J0, M, block_indices, generators, kind) -> np.ndarray:
    """dS_mu of the block entropy for J = M e^{x Xi} J0 e^{-x Xi} M^-1."""
    kind = as_kind(kind)
    J = M @ J0 @ np.linalg.inv(M)
    idx = np.asarray(block_indices)
    Wb = entropy_weight(J[np.ix_(idx, idx)], kind)
    W = np.zeros_like(J)
    W[np.ix_(idx, idx)] = Wb
    return _commutator_contraction(J0, M, W, generators)


def entropy_gradient(J0, partition, block, frame: TangentFrame, M, kind) -> np.ndarray:
    return entropy_differential(J0, M, partition.indices(block), frame.generators, kind)


def entropy_objective(problem: PurificationProblem, block=("A", "A'")) -> Objective:
    J0 = problem.J_init
    idx = problem.partition.indices(list(block))
    kind = problem.kind
    gens = problem.ancilla_frame.generators

    def value(M, ctx):
        J = M @ J0 @ np.linalg.inv(M)
        return block_entropy(J[np.ix_(idx, idx)], kind).value

    def differential(M, ctx):
        return entropy_differential(J0, M, idx, gens, kind)

    return Objective(value, differential)


def hashing_bound(J, partition: SubsystemPartition, kind) -> float:
    """S(rho_A) - S(rho_AB); a lower bound on the EoP."""
    return (
        entanglement_entropy(J, partition, "A", kind).value
        - entanglement_entropy(J, partition, ["A", "B"], kind).value
    )


# ---------------------------------------------------------------------------
# entanglement of purification


def ancilla_sampler(problem: PurificationProblem, spread: float = 0.5):
    """Random starting points 1_AB (+) M_anc.

    Fermions use Haar-random SO(2 N_anc); bosons exp of a random algebra
    element with normal entries of width ``spread``.
    """
    n_anc = len(problem.ancilla_indices) // 2

    def sample(rng):
        return problem.embed_ancilla(sample_group(problem.kind, n_anc, rng, spread))

    return sample


@dataclass
class EoPResult:
    value: float
    J: np.ndarray
    run: OptimizationRun
    hashing: float
    runs: list


def gaussian_eop(problem: PurificationProblem, config: OptimizerConfig = OptimizerConfig(), spread: float = 0.5) -> EoPResult:
    """Minimum of S_AA' over Gaussian purifications reachable on the ancilla."""
    obj = entropy_objective(problem)
    if problem.ancilla_frame.dim == 0:
        M = np.eye(2 * problem.n_modes)
        run = OptimizationRun(M, obj.f(M), "GradTol")
        runs = [run]
    else:
        res = multi_start(obj, problem.ancilla_frame, config, ancilla_sampler(problem, spread))
        run, runs = res.best, res.runs
    J = problem.J_of(run.final_M)
    n_sys = problem.partition.size("A") + problem.partition.size("B")
    sys_part = SubsystemPartition.from_sizes(
        [("A", problem.partition.size("A")), ("B", problem.partition.size("B"))]
    )
    hb = hashing_bound(problem.J_AB, sys_part, problem.kind) if n_sys else 0.0
    if hb > run.final_value + 1e-7:
        raise RuntimeError(f"hashing bound {hb:.3e} exceeds the EoP estimate {run.final_value:.3e}")
    return EoPResult(run.final_value, J, run, hb, runs)


def eop_problem(J, n_sites: int, n_A: int, n_B: int, d: int, n_Ap: int, n_Bp: int, kind) -> PurificationProblem:
    J_AB = interval_pair(J, n_sites, n_A, n_B, d)
    return build_problem(J_AB, purification_partition(n_A, n_B, n_Ap, n_Bp), kind)


# ---------------------------------------------------------------------------
# complexity and complexity of purification


def _log_delta(J_T, J_R, kind):
    delta = -np.asarray(J_T) @ np.asarray(J_R)
    w, V = np.linalg.eig(delta)
    if as_kind(kind) is Kind.FERMION and np.any(np.abs(w + 1.0) < 1e-8):
        raise DifferentComponent("Delta has eigenvalue -1; the states are not connected")
    lw = np.log(w.astype(complex))
    Vi = np.linalg.inv(V)
    return delta, lw, V, Vi


def complexity_function(J_T, J_R, kind) -> float:
    """f = |Tr log^2 Delta| / 8 with Delta = -J_T J_R (principal log)."""
    _, lw, _, _ = _log_delta(J_T, J_R, kind)
    return float(abs(np.sum(lw**2).real) / 8.0)


def complexity(J_T, J_R, kind="boson") -> float:
    """Geodesic complexity C = sqrt(|Tr log^2 Delta| / 8)."""
    return math.sqrt(complexity_function(J_T, J_R, kind))


def complexity_weight(J_T, J_R, kind):
    """W with df = Tr(W dJ_T) for f = |Tr log^2 Delta| / 8."""
    delta, lw, V, Vi = _log_delta(J_T, J_R, kind)
    t = np.sum(lw**2).real
    sign = 1.0 if t >= 0 else -1.0
    # d Tr log^2 Delta = 2 Tr(Delta^-1 log Delta dDelta), dDelta = -dJ J_R
    dinv_log = np.linalg.solve(delta, (V * lw) @ Vi)
    W = -2.0 * (np.asarray(J_R) @ dinv_log)
    return (sign / 8.0) * W.real


def complexity_differential(J0, M, J_R, generators, kind, indices=None) -> np.ndarray:
    J = M @ J0 @ np.linalg.inv(M)
    if indices is None:
        W = complexity_weight(J, J_R, kind)
    else:
        idx = np.asarray(indices)
        W = np.zeros_like(J)
        W[np.ix_(idx, idx)] = complexity_weight(J[np.ix_(idx, idx)], J_R, kind)
    return _commutator_contraction(J0, M, W, generators)


@dataclass
class CoPResult:
    value: float
    J: np.ndarray
    run: OptimizationRun
    runs: list


def cop_problem(J_A, n_ancilla: int, kind) -> PurificationProblem:
    n_A = np.asarray(J_A).shape[0] // 2
    return build_problem(J_A, purification_partition(n_A, 0, n_ancilla, 0), kind)


def cop_objective(problem: PurificationProblem, J_R=None) -> Objective:
    n = problem.n_modes
    J_R = vacuum_J(n) if J_R is None else np.asarray(J_R)
    J0 = problem.J_init
    gens = problem.ancilla_frame.generators
    kind = problem.kind

    def value(M, ctx):
        return complexity_function(M @ J0 @ np.linalg.inv(M), J_R, kind)

    def differential(M, ctx):
        return complexity_differential(J0, M, J_R, gens, kind)

    return Objective(value, differential)


def cop(J_A, n_ancilla: int, kind, config: OptimizerConfig = OptimizerConfig(), J_R=None, spread: float = 0.5) -> CoPResult:
    """Complexity of purification of J_A relative to a product reference.

    The reference defaults to the standard vacuum on A and A'.  The
    optimization runs on f = |Tr log^2 Delta| / 8 and the square root is
    taken at the end.
    """
    problem = cop_problem(J_A, n_ancilla, kind)
    obj = cop_objective(problem, J_R)
    if problem.ancilla_frame.dim == 0:
        M = np.eye(2 * problem.n_modes)
        run = OptimizationRun(M, obj.f(M), "GradTol")
        runs = [run]
    else:
        res = multi_start(obj, problem.ancilla_frame, config, ancilla_sampler(problem))
        run, runs = res.best, res.runs
    return CoPResult(math.sqrt(max(run.final_value, 0.0)), problem.J_of(run.final_M), run, runs)


# ---------------------------------------------------------------------------
# variational ground states


@dataclass
class GroundStateResult:
    energy: float
    state: GaussianState
    run: OptimizationRun
    runs: list


def find_ground_state(H: QuadraticHamiltonian, config: OptimizerConfig = OptimizerConfig(starts=8), spread: float = 0.3) -> GroundStateResult:
    """Minimize <H> over all pure Gaussian states by multi-start descent."""
    obj, frame = energy_objective(H)
    J0 = frame.reference_J

    def sampler(rng):
        return sample_group(H.kind, H.N, rng, spread)

    res = multi_start(obj, frame, config, sampler)
    M = res.best.final_M
    state = GaussianState.from_J(H.kind, M @ J0 @ np.linalg.inv(M))
    return GroundStateResult(res.best.final_value, state, res.best, res.runs)
