"""Mixed-state standard forms and Gaussian purifications.

A mixed state J_AB is brought to the normal form (+) c_i A2 by a group
element T.  Each mixed mode is then paired with one ancilla mode so that
the pair is pure; extra ancilla modes sit in their vacuum.  The set of all
purifications with the same J_AB is reached by acting on the ancilla only,
which is what the EoP/CoP optimizations vary.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegeneratePairing, DimensionMismatch, InsufficientAncilla
from .lie import TangentFrame, embed_generators, full_algebra_basis, orthonormal_frame
from .linalg import sym_funm
from .phase_space import (
    A2,
    S2,
    Kind,
    SubsystemPartition,
    as_kind,
    mode_indices,
    omega_qp,
    permode_to_qp,
    restricted_spectrum,
)


@dataclass(frozen=True, eq=False)
class MixedStandardForm:
    """J = T J_m T^-1 with J_m = (+)_i c_i A2 in qp ordering.

    ``r`` holds the squeezing parameters, sorted descending:
    c_i = cosh(2 r_i) for bosons and c_i = cos(2 r_i) for fermions.
    """

    r: np.ndarray
    T: np.ndarray
    kind: Kind

    @property
    def c(self) -> np.ndarray:
        if self.kind is Kind.BOSON:
            return np.cosh(2 * self.r)
        return np.cos(2 * self.r)

    @property
    def J_standard(self) -> np.ndarray:
        return standard_mixed_J(self.c)


def standard_mixed_J(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    n = len(c)
    P = permode_to_qp(n)
    return P @ np.kron(np.diag(c), A2) @ P.T


def _r_from_c(c, kind):
    if kind is Kind.BOSON:
        return 0.5 * np.arccosh(np.maximum(c, 1.0))
    return 0.5 * np.arccos(np.clip(c, -1.0, 1.0))


def mixed_standard_form(J_AB, kind, check_tol: float = 1e-8) -> MixedStandardForm:
    """Normal form of a restricted complex structure.

    Bosons: K = G^{-1/2} Omega G^{-1/2} is antisymmetric; its real Schur
    form gives an orthogonal O with O^T K O = (+) b_i A2, and then
    T = G^{1/2} O diag(b)^{1/2} is symplectic with c_i = 1 / b_i.
    Fermions: Omega itself is antisymmetric and T = O, c_i = b_i.
    """
    kind = as_kind(kind)
    J = np.asarray(J_AB, dtype=float)
    n = J.shape[0] // 2
    restricted_spectrum(J, kind)  # validates the spectrum
    P = permode_to_qp(n)
    if kind is Kind.BOSON:
        G = -J @ omega_qp(n)
        G = 0.5 * (G + G.T)
        gh = sym_funm(G, np.sqrt)
        ghi = np.linalg.inv(gh)
        K = ghi @ omega_qp(n) @ ghi
    else:
        K = J
    K = 0.5 * (K - K.T)
    S, Z = sla.schur(P.T @ K @ P, output="real")
    b = np.empty(n)
    for i in range(n):
        if abs(S[2 * i + 1, 2 * i]) < 1e-14 and abs(S[2 * i, 2 * i + 1]) < 1e-14:
            # zero block (fermionic maximally mixed mode): any orthonormal pair
            b[i] = 0.0
            continue
        if S[2 * i, 2 * i + 1] < 0:
            Z[:, [2 * i, 2 * i + 1]] = Z[:, [2 * i + 1, 2 * i]]
        blk = Z[:, 2 * i : 2 * i + 2].T @ (P.T @ K @ P) @ Z[:, 2 * i : 2 * i + 2]
        b[i] = 0.5 * (blk[0, 1] - blk[1, 0])
    if np.any(b < -1e-12):
        raise DegeneratePairing("Schur blocks could not be oriented")
    c = 1.0 / b if kind is Kind.BOSON else b
    if kind is Kind.BOSON:
        c = np.maximum(c, 1.0)
    else:
        c = np.clip(c, 0.0, 1.0)
    r = _r_from_c(c, kind)
    # mixed modes first (descending r), stable for ties
    order = np.argsort(-r, kind="stable")
    cols = np.concatenate([[2 * i, 2 * i + 1] for i in order]).astype(int)
    Z = Z[:, cols]
    c, r, b = c[order], r[order], b[order]
    O = P @ Z @ P.T
    if kind is Kind.BOSON:
        T = gh @ O @ np.diag(np.sqrt(np.concatenate([b, b])))
    else:
        T = O
    form = MixedStandardForm(r, T, kind)
    recon = T @ form.J_standard @ np.linalg.inv(T)
    if np.max(np.abs(recon - J)) > check_tol * max(1.0, np.max(np.abs(J))):
        raise DegeneratePairing(
            f"standard form reconstruction defect {np.max(np.abs(recon - J)):.3e}"
        )
    return form


def standard_purification(standard: MixedStandardForm, n_ancilla_A: int, n_ancilla_B: int) -> np.ndarray:
    """Pure J on (system, A', B') built from the normal form.

    Mixed mode i is paired with ancilla mode i (A' modes first, then B').
    In the per-mode layout the pair block is
    [[c A2, s S2], [s S2, c A2]] (bosons, s = sinh 2r) or
    [[c A2, s S2], [-s S2, c A2]] (fermions, s = sin 2r).
    """
    kind = standard.kind
    r = standard.r
    n = len(r)
    n_anc = int(n_ancilla_A) + int(n_ancilla_B)
    mixed = int(np.sum(r > 1e-12))
    if mixed > n_anc:
        raise InsufficientAncilla(f"{mixed} mixed modes need at least {mixed} ancilla modes, got {n_anc}")
    tot = n + n_anc
    Jm = np.kron(np.eye(tot), A2)
    c = standard.c
    for i in range(n):
        Jm[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = c[i] * A2
        if r[i] <= 1e-12:
            continue
        j = n + i
        if kind is Kind.BOSON:
            s, sign = np.sinh(2 * r[i]), 1.0
        else:
            s, sign = np.sin(2 * r[i]), -1.0
        Jm[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = c[i] * A2
        Jm[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = s * S2
        Jm[2 * j : 2 * j + 2, 2 * i : 2 * i + 2] = sign * s * S2
    P = permode_to_qp(tot)
    return P @ Jm @ P.T


@dataclass(frozen=True, eq=False)
class PurificationProblem:
    """Everything an EoP/CoP optimization needs.

    Modes are ordered (A, B, A', B').  Group elements act as
    M = 1_AB (+) M_anc; ``ancilla_frame`` holds orthonormal generators that
    vanish on the AB rows and columns.
    """

    J_AB: np.ndarray
    partition: SubsystemPartition
    standard: MixedStandardForm
    J_init: np.ndarray
    ancilla_frame: TangentFrame
    kind: Kind

    @property
    def n_modes(self) -> int:
        return self.partition.n_modes

    @property
    def ancilla_indices(self) -> np.ndarray:
        return self.partition.indices(["A'", "B'"])

    def embed_ancilla(self, M_anc) -> np.ndarray:
        """1_AB (+) M_anc as a full group element."""
        M = np.eye(2 * self.n_modes, dtype=np.result_type(M_anc, float))
        idx = self.ancilla_indices
        M[np.ix_(idx, idx)] = M_anc
        return M

    def J_of(self, M) -> np.ndarray:
        return M @ self.J_init @ np.linalg.inv(M)


def purification_partition(n_A: int, n_B: int, n_Ap: int, n_Bp: int) -> SubsystemPartition:
    return SubsystemPartition.from_sizes([("A", n_A), ("B", n_B), ("A'", n_Ap), ("B'", n_Bp)])


def build_problem(J_AB, partition: SubsystemPartition, kind) -> PurificationProblem:
    """Purify J_AB minimally-or-more and set up the ancilla manifold."""
    kind = as_kind(kind)
    J_AB = np.asarray(J_AB, dtype=float)
    labels = set(partition.labels)
    if not {"A", "B", "A'", "B'"} <= labels or len(labels) != 4:
        raise DimensionMismatch("partition must have exactly the blocks A, B, A', B'")
    n_sys = partition.size("A") + partition.size("B")
    if J_AB.shape != (2 * n_sys, 2 * n_sys):
        raise DimensionMismatch(f"J_AB has shape {J_AB.shape}, partition expects {n_sys} system modes")
    order = partition.modes(["A", "B", "A'", "B'"])
    if order != list(range(partition.n_modes)):
        raise DimensionMismatch("blocks must be laid out in the order A, B, A', B'")
    std = mixed_standard_form(J_AB, kind)
    n_Ap, n_Bp = partition.size("A'"), partition.size("B'")
    Jp = standard_purification(std, n_Ap, n_Bp)
    tot = partition.n_modes
    E = np.eye(2 * tot)
    sys_idx = mode_indices(range(n_sys), tot)
    E[np.ix_(sys_idx, sys_idx)] = std.T
    J_init = E @ Jp @ np.linalg.inv(E)
    anc_idx = partition.indices(["A'", "B'"])
    gens = full_algebra_basis(kind, n_Ap + n_Bp).generators
    gens = embed_generators(gens, anc_idx, 2 * tot)
    frame = orthonormal_frame(gens, J_init, kind)
    return PurificationProblem(J_AB, partition, std, J_init, frame, kind)
