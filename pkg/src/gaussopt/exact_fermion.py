"""Dense Fock-space oracle for a handful of fermionic modes.

Modes are Jordan-Wigner ordered; basis state |n_0 n_1 ... n_{n-1}> has
mode 0 as the most significant bit and equals
(a_0^dag)^{n_0} ... (a_{n-1}^dag)^{n_{n-1}} |0>.  Majoranas follow the qp
convention q = (a + a^dag)/sqrt2, p = i(a^dag - a)/sqrt2, so that
<xi^a xi^b> = (delta^ab + i Omega^ab) / 2.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InsufficientAncilla, TooManyModes
from .lie import TangentFrame, make_rng
from .linalg import expm
from .optimizer import Objective, OptimizerConfig, multi_start
from .phase_space import Kind
from .purification import mixed_standard_form
from .representations import ThermalData

MAX_MODES = 6


@dataclass(frozen=True, eq=False)
class FockRep:
    """Jordan-Wigner operators on 2^n-dimensional Fock space."""

    n_modes: int

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("need at least one mode")
        if self.n_modes > MAX_MODES:
            raise TooManyModes(f"{self.n_modes} modes exceed the dense limit of {MAX_MODES}")

    @property
    def dim(self) -> int:
        return 2**self.n_modes

    @cached_property
    def annihilators(self) -> np.ndarray:
        n = self.n_modes
        z = np.diag([1.0, -1.0])
        lower = np.array([[0.0, 1.0], [0.0, 0.0]])
        ops = []
        for j in range(n):
            op = np.ones((1, 1))
            for k in range(n):
                op = np.kron(op, z if k < j else lower if k == j else np.eye(2))
            ops.append(op)
        return np.array(ops, dtype=complex)

    @property
    def creators(self) -> np.ndarray:
        return np.conj(np.transpose(self.annihilators, (0, 2, 1)))

    @cached_property
    def majoranas(self) -> np.ndarray:
        """xi^a in qp order, shape (2n, 2^n, 2^n)."""
        a, ad = self.annihilators, self.creators
        q = (a + ad) / math.sqrt(2)
        p = 1j * (ad - a) / math.sqrt(2)
        return np.concatenate([q, p])

    @cached_property
    def parity(self) -> np.ndarray:
        bits = _occupations(self.n_modes)
        return np.diag((-1.0) ** bits.sum(axis=1))

    def car_defect(self) -> float:
        a, ad = self.annihilators, self.creators
        eye = np.eye(self.dim)
        worst = 0.0
        for i in range(self.n_modes):
            for j in range(self.n_modes):
                worst = max(worst, np.max(np.abs(a[i] @ ad[j] + ad[j] @ a[i] - (i == j) * eye)))
                worst = max(worst, np.max(np.abs(a[i] @ a[j] + a[j] @ a[i])))
        return float(worst)


def _occupations(n):
    idx = np.arange(2**n)
    return (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


@dataclass(frozen=True, eq=False)
class DenseState:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValueError(f"trace {np.trace(rho).real:.3e} differs from 1")
        if np.linalg.eigvalsh(rho)[0] < -1e-12:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "rho", rho)

    @property
    def n_modes(self) -> int:
        return int(round(math.log2(self.rho.shape[0])))


def _hermitize(rho):
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def gaussian_density(source, rep: FockRep = None) -> DenseState:
    """Density operator of a fermionic Gaussian state.

    ``source`` is either ThermalData, giving rho = exp(-i q_ab xi^a xi^b - c0),
    or a complex structure J.  A pure J gives the projector onto the common
    kernel of the annihilators (1 + iJ) xi; a mixed J is assembled from its
    normal form as a product over rotated modes, which stays finite at
    pure modes where the thermal form diverges.
    """
    if isinstance(source, ThermalData):
        if source.kind is not Kind.FERMION:
            raise ValueError("the Fock oracle only handles fermions")
        n = source.q.shape[0] // 2
        rep = rep or FockRep(n)
        xi = rep.majoranas
        quad = np.einsum("ab,aij,bjk->ik", source.q, xi, xi)
        rho = expm(-1j * quad) * math.exp(-source.c0)
        return DenseState(_hermitize(rho))
    J = np.asarray(source, dtype=float)
    n = J.shape[0] // 2
    rep = rep or FockRep(n)
    if n != rep.n_modes:
        raise ValueError("J and FockRep disagree on the number of modes")
    if np.max(np.abs(J @ J + np.eye(2 * n))) < 1e-10:
        psi = pure_state_vector(J, rep)
        return DenseState(np.outer(psi, psi.conj()))
    std = mixed_standard_form(J, Kind.FERMION)
    xi_rot = np.einsum("ba,bij->aij", std.T, rep.majoranas)
    c = std.c
    eye = np.eye(rep.dim)
    rho = eye.astype(complex)
    for i in range(n):
        num = 0.5 * eye + 1j * xi_rot[i] @ xi_rot[n + i]
        rho = rho @ (0.5 * (1 + c[i]) * (eye - num) + 0.5 * (1 - c[i]) * num)
    return DenseState(_hermitize(rho))


def pure_state_vector(J, rep: FockRep = None) -> np.ndarray:
    """Unit vector annihilated by every (1 + iJ)^a_b xi^b."""
    J = np.asarray(J, dtype=float)
    n = J.shape[0] // 2
    rep = rep or FockRep(n)
    ann = np.einsum("ab,bij->aij", np.eye(2 * n) + 1j * J, rep.majoranas)
    stack = ann.reshape(-1, rep.dim)
    _, s, vh = np.linalg.svd(stack)
    if s[-1] > 1e-8 or (len(s) > 1 and s[-2] < 1e-6):
        raise ValueError("J does not define a unique pure state")
    psi = vh[-1].conj()
    k = np.argmax(np.abs(psi))
    return psi * (abs(psi[k]) / psi[k])


def two_point(state: DenseState, rep: FockRep = None) -> np.ndarray:
    """Omega^ab = -i <[xi^a, xi^b]> from a density matrix."""
    rep = rep or FockRep(state.n_modes)
    xi = rep.majoranas
    C = np.einsum("aij,bjk,ki->ab", xi, xi, state.rho)
    return (-1j * (C - C.T)).real


def reorder_signs(n: int, order) -> tuple:
    """Signed permutation taking JW order (0..n-1) to ``order``.

    Returns (perm, sign) with new_vec[perm[k]] = sign[k] * old_vec[k]; the
    sign counts occupied pairs whose relative order is inverted.
    """
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the modes")
    bits = _occupations(n)
    pos = np.empty(n, dtype=int)
    pos[order] = np.arange(n)
    new_bits = bits[:, order]
    perm = new_bits @ (1 << (n - 1 - np.arange(n)))
    inv = np.zeros(len(bits), dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            if pos[i] > pos[j]:
                inv += bits[:, i] & bits[:, j]
    return perm, (-1.0) ** inv


def _signed_permutation(n, order):
    perm, sign = reorder_signs(n, order)
    P = np.zeros((2**n, 2**n))
    P[perm, np.arange(2**n)] = sign
    return P


def fermionic_partial_trace(state: DenseState, rep: FockRep = None, keep=()) -> DenseState:
    """Reduced state on the modes in ``keep`` (in their JW order).

    Kept modes are moved to the front with fermionic swap signs; the
    trailing tensor factor is then traced out.
    """
    n = state.n_modes
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must be nonempty")
    if keep == list(range(n)):
        return state
    rest = [m for m in range(n) if m not in keep]
    P = _signed_permutation(n, keep + rest)
    rho = P @ state.rho @ P.T
    dk, dr = 2 ** len(keep), 2 ** len(rest)
    red = np.trace(rho.reshape(dk, dr, dk, dr), axis1=1, axis2=3)
    return DenseState(_hermitize(red))


def _entropy_of(p):
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def exact_entropy(state: DenseState) -> float:
    return _entropy_of(np.linalg.eigvalsh(state.rho))


def _wick(C2, idx):
    if not idx:
        return 1.0 + 0j
    if len(idx) % 2:
        return 0j
    a, rest = idx[0], idx[1:]
    total = 0j
    for k, b in enumerate(rest):
        total += (-1) ** k * C2[a, b] * _wick(C2, rest[:k] + rest[k + 1 :])
    return total


def wick_oracle(J, rep: FockRep = None, indices=()):
    """(exact, wick) values of <xi^{a1} ... xi^{a2n}> for a Gaussian state."""
    J = np.asarray(J, dtype=float)
    n = J.shape[0] // 2
    rep = rep or FockRep(n)
    indices = [int(i) for i in indices]
    if len(indices) > 8:
        raise ValueError("at most eight operators")
    state = gaussian_density(J, rep)
    op = np.eye(rep.dim, dtype=complex)
    for a in indices:
        op = op @ rep.majoranas[a]
    exact = np.trace(state.rho @ op)
    C2 = 0.5 * (np.eye(2 * n) + 1j * J)
    return complex(exact), complex(_wick(C2, indices))


# ---------------------------------------------------------------------------
# non-Gaussian entanglement of purification


def unitary_algebra_basis(dim: int, parity_blocks=None) -> np.ndarray:
    """Frobenius-orthonormal anti-Hermitian basis without the identity.

    ``parity_blocks`` (a boolean mask of even basis states) restricts to
    block-diagonal generators that commute with the parity.
    """
    gens = []
    for j in range(dim):
        for k in range(j + 1, dim):
            if parity_blocks is not None and parity_blocks[j] != parity_blocks[k]:
                continue
            x = np.zeros((dim, dim), dtype=complex)
            x[j, k], x[k, j] = 1, -1
            gens.append(x / math.sqrt(2))
            y = np.zeros((dim, dim), dtype=complex)
            y[j, k] = y[k, j] = 1j
            gens.append(y / math.sqrt(2))
    # traceless diagonal part (the identity only changes a global phase)
    for j in range(1, dim):
        d = np.zeros(dim)
        d[:j] = 1.0
        d[j] = -j
        gens.append(np.diag(1j * d / np.linalg.norm(d)))
    return np.array(gens)


def unitary_frame(dim: int, parity_preserving: bool = False) -> TangentFrame:
    mask = None
    if parity_preserving:
        n = int(round(math.log2(dim)))
        mask = _occupations(n).sum(axis=1) % 2 == 0
    gens = unitary_algebra_basis(dim, mask)
    m = len(gens)
    eye = np.eye(m)
    return TangentFrame(None, gens, eye, eye, np.zeros((m, m)), Kind.FERMION)


@dataclass(frozen=True, eq=False)
class _EoPSetup:
    psi0: np.ndarray  # JW order (A, B, A', B')
    n_sys: int
    n_anc: int
    keep: tuple  # modes forming A A'
    perm: np.ndarray
    sign: np.ndarray

    @property
    def d_anc(self):
        return 2**self.n_anc

    @property
    def d_keep(self):
        return 2 ** len(self.keep)


def _setup(psi0, n_A, n_B, n_Ap, n_Bp) -> _EoPSetup:
    n = n_A + n_B + n_Ap + n_Bp
    if n > MAX_MODES:
        raise TooManyModes(f"{n} modes exceed the dense limit of {MAX_MODES}")
    A = list(range(n_A))
    Ap = list(range(n_A + n_B, n_A + n_B + n_Ap))
    keep = tuple(A + Ap)
    rest = [m for m in range(n) if m not in keep]
    perm, sign = reorder_signs(n, list(keep) + rest)
    return _EoPSetup(np.asarray(psi0, dtype=complex), n_A + n_B, n_Ap + n_Bp, keep, perm, sign)


def _state_matrix(setup: _EoPSetup, psi):
    out = np.empty_like(psi)
    out[setup.perm] = setup.sign * psi
    return out.reshape(setup.d_keep, -1)


def _apply_ancilla(setup: _EoPSetup, U, psi=None):
    psi = setup.psi0 if psi is None else psi
    return (psi.reshape(-1, setup.d_anc) @ U.T).reshape(-1)


def _eop_objective(setup: _EoPSetup, generators, clamp: float = 1e-300) -> Objective:
    def value(U, ctx):
        X = _state_matrix(setup, _apply_ancilla(setup, U))
        return _entropy_of(np.linalg.eigvalsh(X @ X.conj().T))

    def differential(U, ctx):
        X = _state_matrix(setup, _apply_ancilla(setup, U))
        p, V = np.linalg.eigh(X @ X.conj().T)
        L = (V * np.log(np.maximum(p, clamp))) @ V.conj().T
        G = (L @ X).reshape(-1)
        # pull G back to the original JW order (the signed permutation is orthogonal)
        Gb = (setup.sign * G[setup.perm]).reshape(-1, setup.d_anc)
        Psi0 = setup.psi0.reshape(-1, setup.d_anc)
        Z = U.T @ Gb.conj().T @ Psi0
        return -2.0 * np.einsum("ij,mij->m", Z, generators).real

    return Objective(value, differential)


def purify_density(state: DenseState, n_ancilla: int) -> np.ndarray:
    """Parity-respecting purification |psi> = sum_k sqrt(p_k) |v_k>|u_k>.

    Eigenvectors of rho are taken inside each parity sector and paired
    with ancilla basis states of the same parity, so the global state is
    parity even.
    """
    n = state.n_modes
    d_anc = 2**n_ancilla
    sys_par = _occupations(n).sum(axis=1) % 2
    anc_par = _occupations(n_ancilla).sum(axis=1) % 2 if n_ancilla else np.zeros(1, dtype=int)
    psi = np.zeros(2**n * d_anc, dtype=complex)
    for parity in (0, 1):
        sel = np.flatnonzero(sys_par == parity)
        block = state.rho[np.ix_(sel, sel)]
        off = np.max(np.abs(state.rho[np.ix_(sel, np.flatnonzero(sys_par != parity))])) if len(sel) < 2**n else 0.0
        if off > 1e-10:
            raise ValueError("density matrix mixes parity sectors")
        p, v = np.linalg.eigh(block)
        slots = np.flatnonzero(anc_par == parity)
        keep = np.flatnonzero(p > 1e-14)
        if len(keep) > len(slots):
            raise InsufficientAncilla(f"rank {len(keep)} in parity sector {parity} needs more ancilla states")
        for slot, k in zip(slots, keep):
            vec = np.zeros(2**n, dtype=complex)
            vec[sel] = v[:, k]
            e = np.zeros(d_anc)
            e[slot] = 1.0
            psi += math.sqrt(p[k]) * np.kron(vec, e)
    return psi / np.linalg.norm(psi)


def _haar_unitary(dim, rng, mask=None):
    if mask is None:
        z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))
    U = np.zeros((dim, dim), dtype=complex)
    for val in (True, False):
        sel = np.flatnonzero(mask == val)
        U[np.ix_(sel, sel)] = _haar_unitary(len(sel), rng)
    return U


@dataclass
class ExactEoPResult:
    value: float
    U: np.ndarray
    run: object
    runs: list


def exact_eop(
    rho_AB: DenseState,
    n_A: int,
    n_B: int,
    n_ancilla_A: int,
    n_ancilla_B: int,
    config: OptimizerConfig = OptimizerConfig(starts=16),
    parity_preserving: bool = True,
) -> ExactEoPResult:
    """Minimum of S_AA' over purifications reached by ancilla unitaries.

    The purification lives on JW-ordered modes (A, B, A', B'); U acts on the
    ancilla tensor factor.  By default it runs over the parity-preserving
    unitaries, which keep the purification parity even so that the
    fermionic reduced state is well defined.  ``parity_preserving=False``
    uses the full unitary group of the factor; parity-odd directions then
    produce superpositions of parity sectors and the resulting S_AA' is not
    a physical entanglement entropy (it can undercut the Gaussian value).
    """
    if rho_AB.n_modes != n_A + n_B:
        raise ValueError("rho_AB does not have n_A + n_B modes")
    n_anc = n_ancilla_A + n_ancilla_B
    setup = _setup(purify_density(rho_AB, n_anc), n_A, n_B, n_ancilla_A, n_ancilla_B)
    frame = unitary_frame(setup.d_anc, parity_preserving)
    obj = _eop_objective(setup, frame.generators)
    mask = None
    if parity_preserving:
        mask = _occupations(n_anc).sum(axis=1) % 2 == 0

    def sampler(rng):
        return _haar_unitary(setup.d_anc, rng, mask)

    res = multi_start(obj, frame, config, sampler)
    return ExactEoPResult(res.best.final_value, res.best.final_M, res.best, res.runs)


def nongaussian_gradient(J_pure, n_A: int, n_B: int, n_Ap: int, n_Bp: int, parity_preserving: bool = False) -> np.ndarray:
    """Unitary-manifold gradient of S_AA' at a pure Gaussian purification."""
    n = n_A + n_B + n_Ap + n_Bp
    rep = FockRep(n)
    setup = _setup(pure_state_vector(J_pure, rep), n_A, n_B, n_Ap, n_Bp)
    frame = unitary_frame(setup.d_anc, parity_preserving)
    obj = _eop_objective(setup, frame.generators)
    return obj.df(np.eye(setup.d_anc, dtype=complex))


def random_fermionic_J(n: int, seed=0, purity: str = "mixed") -> np.ndarray:
    """Random Gaussian complex structure O (+)c_i A2 O^T (c_i = 1 if pure)."""
    from .purification import standard_mixed_J
    from .lie import sample_group

    rng = make_rng(seed)
    c = np.ones(n) if purity == "pure" else rng.uniform(-1, 1, size=n)
    O = sample_group(Kind.FERMION, n, rng)
    return O @ standard_mixed_J(c) @ O.T
