"""Phase-space conventions, covariance matrices and complex structures.

Phase-space vectors are ordered as ``(q_1..q_N, p_1..p_N)`` in the real
("qp") basis and ``(a_1..a_N, a_1^dag..a_N^dag)`` in the complex ("aab")
basis, with ``a = (q + i p) / sqrt(2)``.  The background structure is the
state-independent form fixed by the (anti)commutation relations: the
symplectic form Omega for bosons and the metric G for fermions.  The
state-dependent covariance Gamma is the other one of the pair.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    BadBlock,
    DimensionMismatch,
    NotRestrictedComplexStructure,
    SingularForm,
)


class Kind(str, Enum):
    BOSON = "boson"
    FERMION = "fermion"


class Basis(str, Enum):
    QP = "qp"
    AAB = "aab"


def as_kind(kind) -> Kind:
    if isinstance(kind, Kind):
        return kind
    try:
        return Kind(str(kind).lower())
    except ValueError:
        raise ValueError(f"unknown particle kind {kind!r}") from None


def as_basis(basis) -> Basis:
    if isinstance(basis, Basis):
        return basis
    try:
        return Basis(str(basis).lower())
    except ValueError:
        raise ValueError(f"unknown basis {basis!r}") from None


# 2x2 building blocks, written in the per-mode (q, p) layout
A2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
S2 = np.array([[0.0, 1.0], [1.0, 0.0]])


def omega_qp(n: int) -> np.ndarray:
    """Standard symplectic form [[0, 1], [-1, 0]] in qp ordering."""
    z = np.zeros((n, n))
    e = np.eye(n)
    return np.block([[z, e], [-e, z]])


def qp_to_aab(n: int) -> np.ndarray:
    """Unitary U with xi_aab = U xi_qp."""
    e = np.eye(n)
    return np.block([[e, 1j * e], [e, -1j * e]]) / np.sqrt(2.0)


def permode_to_qp(n: int) -> np.ndarray:
    """Permutation P mapping per-mode layout (q1,p1,q2,p2,..) to qp layout.

    A matrix X written per mode becomes ``P @ X @ P.T`` in qp ordering.
    """
    p = np.zeros((2 * n, 2 * n))
    for i in range(n):
        p[i, 2 * i] = 1.0
        p[n + i, 2 * i + 1] = 1.0
    return p


def mode_indices(modes: Iterable[int], n: int) -> np.ndarray:
    """Phase-space indices of the given modes (q rows first, then p rows)."""
    modes = list(modes)
    return np.array(modes + [n + m for m in modes], dtype=int)


def _frozen(a):
    a = np.array(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class BackgroundStructure:
    """State-independent form: Omega (bosons) or G (fermions)."""

    kind: Kind
    basis: Basis
    form: np.ndarray
    N: int

    def __post_init__(self):
        object.__setattr__(self, "kind", as_kind(self.kind))
        object.__setattr__(self, "basis", as_basis(self.basis))
        object.__setattr__(self, "form", _frozen(self.form))
        if self.form.shape != (2 * self.N, 2 * self.N):
            raise DimensionMismatch(
                f"background form has shape {self.form.shape}, expected {2 * self.N}x{2 * self.N}"
            )

    @property
    def inverse(self) -> np.ndarray:
        """omega = Omega^-1 for bosons, g = G^-1 for fermions."""
        try:
            return np.linalg.inv(self.form)
        except np.linalg.LinAlgError:
            raise SingularForm("background form is not invertible") from None


def standard_background(kind, basis="qp", N: int = 1) -> BackgroundStructure:
    kind, basis = as_kind(kind), as_basis(basis)
    if N < 1:
        raise ValueError("N must be at least 1")
    if kind is Kind.BOSON:
        form = omega_qp(N)
    else:
        form = np.eye(2 * N)
    if basis is Basis.AAB:
        u = qp_to_aab(N)
        form = u @ form @ u.T
    return BackgroundStructure(kind, basis, form, N)


def vacuum_gamma(kind, N: int) -> np.ndarray:
    """Covariance of the standard vacuum in qp: G0 = 1 or Omega0 = [[0,1],[-1,0]]."""
    if as_kind(kind) is Kind.BOSON:
        return np.eye(2 * N)
    return omega_qp(N)


def vacuum_J(N: int) -> np.ndarray:
    """Complex structure of the standard vacuum (same for both kinds in qp)."""
    return omega_qp(N)


def pseudo_inverse(form, cutoff=1e-12):
    """Inverse of a symmetric/antisymmetric form on its support.

    Eigen-directions with modulus below ``cutoff`` are dropped.  Used for a
    singular fermionic Omega (maximally mixed modes).
    """
    form = np.asarray(form)
    h = 1j * form if np.allclose(form, -form.T) else form
    w, v = np.linalg.eigh(h)
    keep = np.abs(w) > cutoff
    winv = np.zeros_like(w)
    winv[keep] = 1.0 / w[keep]
    out = (v * winv) @ v.conj().T
    if h is not form:
        out = 1j * out
    return out.real if np.isrealobj(form) else out


def complex_structure(gamma, background: BackgroundStructure) -> np.ndarray:
    """J = -G omega (bosons) or J = Omega g (fermions)."""
    gamma = np.asarray(gamma)
    if gamma.shape != background.form.shape:
        raise DimensionMismatch(
            f"covariance shape {gamma.shape} does not match background {background.form.shape}"
        )
    inv = background.inverse
    if background.kind is Kind.BOSON:
        return -gamma @ inv
    return gamma @ inv


def gamma_from_J(J, background: BackgroundStructure) -> np.ndarray:
    """Inverse of :func:`complex_structure`: G = -J Omega, Omega = J G."""
    J = np.asarray(J)
    if background.kind is Kind.BOSON:
        return -J @ background.form
    return J @ background.form


def purity_defect(J) -> float:
    J = np.asarray(J)
    return float(np.max(np.abs(J @ J + np.eye(J.shape[0]))))


def restricted_spectrum(J, kind, tol: float = 1e-9, clamp_tol: float = 1e-8) -> np.ndarray:
    """Mixedness parameters c_i (eigenvalues of J are ±i c_i), descending.

    Bosons need c >= 1 and fermions 0 <= c <= 1; values outside the range by
    at most ``clamp_tol`` are clamped, anything further raises.
    """
    kind = as_kind(kind)
    J = np.asarray(J)
    n2 = J.shape[0]
    if n2 % 2:
        raise NotRestrictedComplexStructure("J must have even dimension")
    if n2 == 0:
        return np.zeros(0)
    lam = np.linalg.eigvals(J)
    scale = max(1.0, float(np.max(np.abs(lam))))
    if np.max(np.abs(lam.real)) > tol * scale:
        raise NotRestrictedComplexStructure(
            f"eigenvalues of J have real parts up to {np.max(np.abs(lam.real)):.3e}"
        )
    c = np.sort(np.abs(lam.imag))[::-1]
    # each c appears twice (±i c); pair neighbours after sorting
    pairs = c.reshape(-1, 2)
    if np.max(np.abs(pairs[:, 0] - pairs[:, 1])) > 1e-6 * scale:
        raise NotRestrictedComplexStructure("eigenvalues of J do not come in ±i c pairs")
    c = pairs.mean(axis=1)
    if kind is Kind.BOSON:
        if np.any(c < 1.0 - clamp_tol):
            raise NotRestrictedComplexStructure(f"bosonic c below 1: min {c.min():.12g}")
        c = np.maximum(c, 1.0)
    else:
        if np.any(c > 1.0 + clamp_tol):
            raise NotRestrictedComplexStructure(f"fermionic c above 1: max {c.max():.12g}")
        c = np.minimum(c, 1.0)
    return c


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Zero-mean Gaussian state: background plus covariance Gamma.

    Gamma is G for bosons and Omega for fermions.  The complex structure J
    is computed once at construction.
    """

    background: BackgroundStructure
    gamma: np.ndarray
    J: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g = _frozen(self.gamma)
        object.__setattr__(self, "gamma", g)
        bg = self.background
        if g.shape != bg.form.shape:
            raise DimensionMismatch(f"covariance shape {g.shape} does not match N={bg.N}")
        scale = max(1.0, float(np.max(np.abs(g))))
        if bg.kind is Kind.BOSON:
            if np.max(np.abs(g - g.T)) > 1e-10 * scale:
                raise ValueError("bosonic covariance must be symmetric")
            gq = g if bg.basis is Basis.QP else _to_qp_tensor(g, bg.N)
            if np.min(np.linalg.eigvalsh(0.5 * (gq + gq.conj().T)).real) <= 0:
                raise ValueError("bosonic covariance must be positive definite")
        else:
            if np.max(np.abs(g + g.T)) > 1e-10 * scale:
                raise ValueError("fermionic covariance must be antisymmetric")
        object.__setattr__(self, "J", _frozen(complex_structure(g, bg)))

    @property
    def kind(self) -> Kind:
        return self.background.kind

    @property
    def basis(self) -> Basis:
        return self.background.basis

    @property
    def N(self) -> int:
        return self.background.N

    def purity_defect(self) -> float:
        return purity_defect(self.J)

    def is_pure(self, tol: float = 1e-10) -> bool:
        return self.purity_defect() <= tol

    def spectrum(self) -> np.ndarray:
        return restricted_spectrum(self.J, self.kind)

    @classmethod
    def vacuum(cls, kind, N: int) -> "GaussianState":
        return cls(standard_background(kind, "qp", N), vacuum_gamma(kind, N))

    @classmethod
    def from_covariance(cls, kind, gamma) -> "GaussianState":
        gamma = np.asarray(gamma, dtype=float)
        return cls(standard_background(kind, "qp", gamma.shape[0] // 2), gamma)

    @classmethod
    def from_J(cls, kind, J) -> "GaussianState":
        J = np.asarray(J, dtype=float)
        bg = standard_background(kind, "qp", J.shape[0] // 2)
        gamma = gamma_from_J(J, bg)
        if bg.kind is Kind.BOSON:
            gamma = 0.5 * (gamma + gamma.T)
        else:
            gamma = 0.5 * (gamma - gamma.T)
        return cls(bg, gamma)


def _to_qp_tensor(t, n):
    u = qp_to_aab(n)
    ui = np.linalg.inv(u)
    return ui @ t @ ui.T


def change_basis(state: GaussianState, to) -> GaussianState:
    """Re-express a state in the qp or aab basis."""
    to = as_basis(to)
    if to is state.basis:
        return state
    n = state.N
    u = qp_to_aab(n)
    if to is Basis.AAB:
        t = u
    else:
        t = np.linalg.inv(u)
    gamma = t @ state.gamma @ t.T
    form = t @ state.background.form @ t.T
    if to is Basis.QP:
        gamma, form = gamma.real, form.real
    bg = BackgroundStructure(state.kind, to, form, n)
    return GaussianState(bg, gamma)


def change_basis_J(J, to, n: int) -> np.ndarray:
    """Transform a linear map J^a_b between the qp and aab bases."""
    u = qp_to_aab(n)
    if as_basis(to) is Basis.AAB:
        return u @ J @ np.linalg.inv(u)
    return (np.linalg.inv(u) @ J @ u).real


BlockSpec = Union[str, Sequence[str]]


@dataclass(frozen=True)
class SubsystemPartition:
    """Ordered, labeled, disjoint mode blocks covering all modes.

    The mode order is the Jordan-Wigner order for fermions, so it matters.
    """

    blocks: tuple
    n_modes: int

    def __post_init__(self):
        blocks = tuple((str(lbl), tuple(int(m) for m in modes)) for lbl, modes in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen = []
        labels = [lbl for lbl, _ in blocks]
        if len(set(labels)) != len(labels):
            raise BadBlock("duplicate block labels")
        for _, modes in blocks:
            seen.extend(modes)
        if len(set(seen)) != len(seen):
            raise BadBlock("blocks overlap")
        if sorted(seen) != list(range(self.n_modes)):
            raise BadBlock("blocks must cover every mode exactly once")

    @classmethod
    def from_sizes(cls, sizes) -> "SubsystemPartition":
        """Contiguous blocks from an ordered mapping or list of (label, size)."""
        items = list(sizes.items()) if hasattr(sizes, "items") else list(sizes)
        blocks, start = [], 0
        for lbl, size in items:
            blocks.append((lbl, tuple(range(start, start + int(size)))))
            start += int(size)
        return cls(tuple(blocks), start)

    @property
    def labels(self):
        return tuple(lbl for lbl, _ in self.blocks)

    def size(self, label: str) -> int:
        return len(self.modes(label))

    def modes(self, spec: BlockSpec) -> list:
        labels = [spec] if isinstance(spec, str) else list(spec)
        lookup = dict(self.blocks)
        out = []
        for lbl in labels:
            if lbl not in lookup:
                raise BadBlock(f"unknown block {lbl!r}; have {self.labels}")
            out.extend(lookup[lbl])
        return out

    def indices(self, spec: BlockSpec) -> np.ndarray:
        return mode_indices(self.modes(spec), self.n_modes)


def restrict(J, partition: SubsystemPartition, block: BlockSpec) -> np.ndarray:
    """Sub-block of a phase-space matrix on the given block(s)."""
    J = np.asarray(J)
    if J.shape != (2 * partition.n_modes, 2 * partition.n_modes):
        raise DimensionMismatch(
            f"matrix shape {J.shape} does not match a {partition.n_modes}-mode partition"
        )
    idx = partition.indices(block)
    return J[np.ix_(idx, idx)]


def restrict_modes(X, modes) -> np.ndarray:
    X = np.asarray(X)
    n = X.shape[0] // 2
    modes = list(modes)
    if any(m < 0 or m >= n for m in modes):
        raise BadBlock(f"mode index out of range for {n} modes")
    idx = mode_indices(modes, n)
    return X[np.ix_(idx, idx)]


def direct_sum(*mats) -> np.ndarray:
    """Direct sum of phase-space matrices, keeping qp ordering of the result."""
    ns = [m.shape[0] // 2 for m in mats]
    n = sum(ns)
    dtype = np.result_type(*mats)
    out = np.zeros((2 * n, 2 * n), dtype=dtype)
    start = 0
    for m, k in zip(mats, ns):
        idx = mode_indices(range(start, start + k), n)
        out[np.ix_(idx, idx)] = m
        start += k
    return out
