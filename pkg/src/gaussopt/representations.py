"""Conversions between the standard parametrizations of Gaussian states.

All matrices are real and written in the qp basis with the standard
background unless stated otherwise.  Complex numbers only appear in the
squeezing matrix gamma, the Bogoliubov blocks alpha/beta, and aab views.

The covariance ``Gamma`` is G for bosons and Omega for fermions.  The
reference state ``gamma0`` defaults to the standard vacuum.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import (
    AmbiguousSqrt,
    DifferentComponent,
    DimensionMismatch,
    NonNormalizable,
    NotInGroup,
    NotPositive,
    PureModeDivergence,
    SingularDistribution,
    SingularPositionBlock,
)
from .lie import group_defect
from .linalg import expm, sym_funm
from .phase_space import (
    Kind,
    as_basis,
    as_kind,
    gamma_from_J,
    omega_qp,
    purity_defect,
    qp_to_aab,
    restricted_spectrum,
    standard_background,
    vacuum_gamma,
)


def _ref(gamma0, kind, n):
    return vacuum_gamma(kind, n) if gamma0 is None else np.asarray(gamma0, dtype=float)


def _split(x):
    n = x.shape[0] // 2
    return x[:n, :n], x[:n, n:], x[n:, :n], x[n:, n:]


# ---------------------------------------------------------------------------
# relative complex structure


@dataclass(frozen=True, eq=False)
class RelativeStructure:
    """Delta = Gamma Gamma0^-1 together with T = sqrt(Delta), K = log T."""

    delta: np.ndarray
    sqrt: Optional[np.ndarray]
    log_generator: Optional[np.ndarray]
    same_component: bool
    eigenvalues: np.ndarray


def _psd_sqrt(a):
    return sym_funm(0.5 * (a + a.T), lambda w: np.sqrt(np.maximum(w, 0.0)))


def _boson_relative(gamma, gamma0):
    # Delta = G G0^-1 = G0^(1/2) P G0^(-1/2) with P symmetric positive
    r0 = _psd_sqrt(gamma0)
    r0i = np.linalg.inv(r0)
    p = r0i @ gamma @ r0i
    p = 0.5 * (p + p.T)
    w, v = np.linalg.eigh(p)
    if w[0] <= 0:
        raise ValueError("bosonic covariance must be positive definite")
    T = r0 @ ((v * np.sqrt(w)) @ v.T) @ r0i
    K = r0 @ ((v * (0.5 * np.log(w))) @ v.T) @ r0i
    delta = gamma @ np.linalg.inv(gamma0)
    return RelativeStructure(delta, T, K, True, np.sort(w)[::-1])


def _rotation_log(delta, J0, tol):
    """Principal log of an orthogonal Delta with a J0-compatible choice on
    the -1 eigenspace.  Returns (log, minus_one_multiplicity, ambiguous)."""
    S, Z = sla.schur(delta, output="real")
    n2 = delta.shape[0]
    logS = np.zeros_like(S)
    minus_cols = []
    i = 0
    while i < n2:
        if i + 1 < n2 and abs(S[i + 1, i]) > tol:
            blk = S[i : i + 2, i : i + 2]
            a = 0.5 * (blk[0, 0] + blk[1, 1])
            b = 0.5 * (blk[0, 1] - blk[1, 0])
            theta = np.arctan2(b, a)
            if abs(abs(theta) - np.pi) < 1e-7:
                minus_cols.extend([i, i + 1])
            else:
                logS[i, i + 1] = theta
                logS[i + 1, i] = -theta
            i += 2
        else:
            if S[i, i] < 0:
                minus_cols.append(i)
            i += 1
    log = Z @ logS @ Z.T
    m = len(minus_cols)
    if m == 0:
        return log, 0, False
    E = Z[:, minus_cols]
    if m % 4:
        return log, m, False
    # pick a complex structure L on the -1 eigenspace that anticommutes with
    # J0, so that exp(pi L / 2) is a real orthogonal square root of Delta
    J0E = E.T @ J0 @ E
    rng = np.random.default_rng(12345)
    x = rng.normal(size=(m, m))
    x = 0.5 * (x - x.T)
    x = 0.5 * (x + J0E @ x @ J0E)
    x2 = -(x @ x)
    L = x @ sym_funm(0.5 * (x2 + x2.T), lambda w: 1.0 / np.sqrt(w))
    log = log + np.pi * (E @ L @ E.T)
    return log, m, True


def relative_structure(gamma, gamma0=None, kind="boson") -> RelativeStructure:
    """Relative complex structure Delta = Gamma Gamma0^-1 and its square root.

    Bosons: the spectrum of Delta is positive; pure states give pairs
    (e^{2r}, e^{-2r}).  Fermions (pure): Delta is orthogonal with
    eigenvalues e^{±2ir} plus a -1 eigenspace whose dimension decides the
    component: 2 mod 4 means the two states are not connected by the
    identity component, so no real sqrt exists and ``DifferentComponent`` is
    warned.  A nonzero multiple of 4 admits many square roots; one is chosen
    and ``AmbiguousSqrt`` is warned.
    """
    kind = as_kind(kind)
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0] // 2
    gamma0 = _ref(gamma0, kind, n)
    if gamma.shape != gamma0.shape:
        raise DimensionMismatch("gamma and gamma0 must have the same shape")
    if kind is Kind.BOSON:
        return _boson_relative(gamma, gamma0)

    delta = gamma @ np.linalg.inv(gamma0)
    eig = np.linalg.eigvals(delta)
    eig = eig[np.lexsort((eig.imag, eig.real))]
    orth = np.max(np.abs(delta @ delta.T - np.eye(2 * n))) < 1e-9
    if orth:
        J0 = gamma0  # G = 1 so J0 = Omega0
        log, m, ambiguous = _rotation_log(delta, J0, 1e-12)
        same = (m // 2) % 2 == 0
        if not same:
            warnings.warn(
                DifferentComponent(f"Delta has a -1 eigenspace of dimension {m}; states lie in different components"),
                stacklevel=2,
            )
            return RelativeStructure(delta, None, None, False, eig)
        if ambiguous:
            warnings.warn(
                AmbiguousSqrt(f"-1 eigenspace of dimension {m}; choosing one real square root"),
                stacklevel=2,
            )
        K = 0.5 * log
        return RelativeStructure(delta, expm(K), K, True, eig)

    # mixed fermionic states: Delta is no longer orthogonal
    near = np.abs(eig + 1.0) < 1e-8
    m = int(np.sum(near))
    same = (m // 2) % 2 == 0
    if m:
        warnings.warn(
            DifferentComponent("Delta has eigenvalue -1; no principal square root"),
            stacklevel=2,
        )
        return RelativeStructure(delta, None, None, same, eig)
    w, v = np.linalg.eig(delta)
    vi = np.linalg.inv(v)
    log = ((v * np.log(w.astype(complex))) @ vi).real
    K = 0.5 * log
    return RelativeStructure(delta, expm(K), K, True, eig)


def generator_to_covariance(K, gamma0) -> np.ndarray:
    """Gamma = e^K Gamma0 e^{K^T}."""
    M = expm(np.asarray(K, dtype=float))
    out = M @ np.asarray(gamma0) @ M.T
    if np.allclose(gamma0, np.asarray(gamma0).T):
        return 0.5 * (out + out.T)
    return 0.5 * (out - out.T)


# ---------------------------------------------------------------------------
# squeezing matrix gamma


@dataclass(frozen=True, eq=False)
class SqueezingMatrix:
    """Complex N x N squeezing matrix (symmetric for bosons, antisymmetric
    for fermions) relative to the standard vacuum."""

    gamma: np.ndarray
    kind: Kind

    def __post_init__(self):
        object.__setattr__(self, "kind", as_kind(self.kind))
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=complex))


def _check_standard_reference(gamma0, kind, n):
    if gamma0 is None:
        return
    if np.max(np.abs(np.asarray(gamma0) - vacuum_gamma(kind, n))) > 1e-12:
        raise ValueError("squeezing matrices are defined relative to the standard vacuum")


def covariance_to_squeezing(gamma, gamma0=None, kind="boson") -> SqueezingMatrix:
    """gamma = L1 + i L2 from L = tanh(log(Delta)/2) = (Delta - 1)(Delta + 1)^-1."""
    kind = as_kind(kind)
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0] // 2
    _check_standard_reference(gamma0, kind, n)
    g0 = vacuum_gamma(kind, n)
    delta = gamma @ np.linalg.inv(g0)
    if kind is Kind.FERMION:
        eig = np.linalg.eigvals(delta)
        m = int(np.sum(np.abs(eig + 1.0) < 1e-8))
        if m:
            if (m // 2) % 2:
                raise DifferentComponent("state is not in the component of the reference vacuum")
            raise NonNormalizable("state is orthogonal to the reference vacuum; gamma diverges")
    eye = np.eye(2 * n)
    L = np.linalg.solve((delta + eye).T, (delta - eye).T).T
    L1, L2, _, _ = _split(L)
    g = L1 + 1j * L2
    g = 0.5 * (g + g.T) if kind is Kind.BOSON else 0.5 * (g - g.T)
    return SqueezingMatrix(g, kind)


def squeezing_blocks(sq: SqueezingMatrix):
    """Covariance blocks (G1..G4) or (Omega1..Omega4) from gamma."""
    g = sq.gamma
    n = g.shape[0]
    one = np.eye(n)
    gdg = g.conj().T @ g
    if sq.kind is Kind.BOSON:
        if n and np.linalg.norm(g, 2) >= 1.0:
            raise NonNormalizable(f"|gamma|_2 = {np.linalg.norm(g, 2):.6g} >= 1")
        inv = np.linalg.inv(one - gdg)
        b1 = (one + 2 * g + gdg) @ inv
        b3 = (-one + 2 * g - gdg) @ inv
        b4 = (one - 2 * g + gdg) @ inv
        return b1.real, b1.imag, b3.imag, b4.real
    inv = np.linalg.inv(one + gdg)
    o1 = (2 * (-one - g) @ inv).imag
    o2 = ((one + 2 * g - gdg) @ inv).real
    o3 = ((-one + 2 * g + gdg) @ inv).real
    o4 = (2 * (-one + g) @ inv).imag
    return o1, o2, o3, o4


def squeezing_to_covariance(sq: SqueezingMatrix) -> np.ndarray:
    b1, b2, b3, b4 = squeezing_blocks(sq)
    out = np.block([[b1, b2], [b3, b4]])
    if sq.kind is Kind.BOSON:
        return 0.5 * (out + out.T)
    return 0.5 * (out - out.T)


def squeezing_from_blocks(gamma, kind) -> SqueezingMatrix:
    """Closed-form inverse of :func:`squeezing_blocks` (independent of Delta)."""
    kind = as_kind(kind)
    b1, b2, b3, b4 = _split(np.asarray(gamma, dtype=float))
    n = b1.shape[0]
    one = np.eye(n)
    if kind is Kind.BOSON:
        num = b1 - b4 + 1j * (b2 + b3)
        den = 2 * one + b1 + b4 + 1j * (b2 - b3)
    else:
        num = b2 + b3 - 1j * (b1 - b4)
        den = 2 * one + b2 - b3 - 1j * (b1 + b4)
    g = np.linalg.solve(den.T, num.T).T
    g = 0.5 * (g + g.T) if kind is Kind.BOSON else 0.5 * (g - g.T)
    return SqueezingMatrix(g, kind)


# ---------------------------------------------------------------------------
# Bogoliubov transformations


@dataclass(frozen=True, eq=False)
class BogoliubovData:
    """b_i = alpha_ij a_j + beta_ij a_j^dag."""

    alpha: np.ndarray
    beta: np.ndarray
    kind: Kind

    def __post_init__(self):
        object.__setattr__(self, "kind", as_kind(self.kind))
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=complex))
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=complex))


def bogoliubov_to_group(data: BogoliubovData, basis="qp") -> np.ndarray:
    a, b = data.alpha, data.beta
    M = np.block(
        [
            [a.real + b.real, b.imag - a.imag],
            [a.imag + b.imag, a.real - b.real],
        ]
    )
    defect = group_defect(M, data.kind)
    if defect > 1e-8:
        raise NotInGroup(f"alpha, beta do not define a group element (defect {defect:.3e})")
    if as_basis(basis).value == "aab":
        return np.block([[a, b], [b.conj(), a.conj()]])
    return M


def group_to_bogoliubov(M, kind) -> BogoliubovData:
    """Read alpha and beta off a real group element."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    u = qp_to_aab(n)
    Ma = u @ M @ np.linalg.inv(u)
    return BogoliubovData(Ma[:n, :n], Ma[:n, n:], kind)


def unitary_to_group(u) -> np.ndarray:
    """Real stabilizer element corresponding to u in U(N)."""
    u = np.asarray(u, dtype=complex)
    return np.block([[u.real, -u.imag], [u.imag, u.real]])


def state_to_bogoliubov(gamma, gamma0=None, kind="boson", u=None) -> BogoliubovData:
    """Bogoliubov data of M = T u with T = sqrt(Delta) and u in U(N)."""
    kind = as_kind(kind)
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0] // 2
    rel = relative_structure(gamma, gamma0, kind)
    if not rel.same_component:
        raise DifferentComponent("no group element in the identity component connects the states")
    M = rel.sqrt
    if u is not None:
        M = M @ unitary_to_group(u)
    return group_to_bogoliubov(M, kind)


# ---------------------------------------------------------------------------
# thermal (modular) data


@dataclass(frozen=True, eq=False)
class ThermalData:
    """rho = exp(-H) with H = c0 + q xi xi (bosons) or c0 + i q xi xi (fermions)."""

    q: np.ndarray
    c0: float
    kind: Kind

    def __post_init__(self):
        object.__setattr__(self, "kind", as_kind(self.kind))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))


def _hermitian_funm(h, f):
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * f(w)) @ v.conj().T, w


def covariance_to_thermal(J, kind, pure_tol: float = 1e-10) -> ThermalData:
    """Modular Hamiltonian coefficients of a mixed state with complex structure J."""
    kind = as_kind(kind)
    J = np.asarray(J, dtype=float)
    n = J.shape[0] // 2
    bg = standard_background(kind, "qp", n)
    c = restricted_spectrum(J, kind)
    pure = np.where(np.abs(c - 1.0) < pure_tol)[0]
    if len(pure):
        raise PureModeDivergence(
            f"modes {tuple(int(i) for i in pure)} are pure; modular data diverges",
            modes=pure.tolist(),
        )
    if kind is Kind.BOSON:
        G = gamma_from_J(J, bg)
        r = _psd_sqrt(G)
        ri = np.linalg.inv(r)
        # iJ = G^(1/2) H G^(-1/2) with H = -i G^(1/2) omega G^(1/2) Hermitian
        omega = bg.inverse
        h = -1j * (r @ omega @ r)
        fh, _ = _hermitian_funm(h, lambda x: np.arctanh(1.0 / x))
        f = r @ fh @ ri
        q = (-1j * omega @ f).real
        q = 0.5 * (q + q.T)
        c0 = 0.5 * float(np.sum(np.log((c**2 - 1.0) / 4.0)))
    else:
        fh, _ = _hermitian_funm(1j * J, np.arctanh)
        q = (-1j * fh).real
        q = 0.5 * (q - q.T)
        c0 = -0.5 * float(np.sum(np.log((1.0 - c**2) / 4.0)))
    return ThermalData(q, c0, kind)


def thermal_to_J(data: ThermalData) -> np.ndarray:
    n = data.q.shape[0] // 2
    if data.kind is Kind.BOSON:
        om = omega_qp(n)
        q = 0.5 * (data.q + data.q.T)
        w, v = np.linalg.eigh(q)
        if w[0] <= 0:
            raise NotPositive("bosonic modular form must be positive definite")
        r = (v * np.sqrt(w)) @ v.T
        ri = (v / np.sqrt(w)) @ v.T
        # i Omega q = q^(-1/2) (i q^(1/2) Omega q^(1/2)) q^(1/2)
        fh, _ = _hermitian_funm(1j * (r @ om @ r), lambda x: 1.0 / np.tanh(x))
        return (-1j * (ri @ fh @ r)).real
    fh, _ = _hermitian_funm(1j * data.q, np.tanh)
    return (-1j * fh).real


def thermal_to_covariance(data: ThermalData) -> np.ndarray:
    J = thermal_to_J(data)
    n = J.shape[0] // 2
    out = gamma_from_J(J, standard_background(data.kind, "qp", n))
    if data.kind is Kind.BOSON:
        return 0.5 * (out + out.T)
    return 0.5 * (out - out.T)


def modular_entropy(data: ThermalData, gamma) -> float:
    """S = <H> for rho = exp(-H): c0 + Tr(q G)/2 (bosons), c0 + Tr(q Omega)/2 (fermions)."""
    return float(data.c0 + 0.5 * np.trace(data.q @ np.asarray(gamma)))


# ---------------------------------------------------------------------------
# characteristic functions and quasiprobabilities


def characteristic_exponent(gamma, gamma0=None, s: float = 0.0, kind="boson") -> np.ndarray:
    """Matrix X with chi_s(w) = exp(-w^T X w)."""
    kind = as_kind(kind)
    gamma = np.asarray(gamma, dtype=float)
    gamma0 = _ref(gamma0, kind, gamma.shape[0] // 2)
    if not -1.0 <= s <= 1.0:
        raise ValueError("ordering parameter s must lie in [-1, 1]")
    if kind is Kind.BOSON:
        return 0.25 * (gamma + s * gamma0)
    return 0.25j * (gamma - s * gamma0)


def quasiprob_exponent(gamma, gamma0=None, s: float = 0.0, kind="boson"):
    """(X, norm) with W_s(xi) = norm * exp(-xi^T X xi).

    Bosons: X = (G + s G0)^-1 and norm = det(pi (G + s G0))^(-1/2).
    Fermions: X = -i (Omega - s Omega0)^-1 and norm =
    det((Omega - s Omega0)/2)^(-1/2); only the data is returned, the
    Grassmann-valued function itself is never evaluated.
    """
    kind = as_kind(kind)
    gamma = np.asarray(gamma, dtype=float)
    gamma0 = _ref(gamma0, kind, gamma.shape[0] // 2)
    if not -1.0 <= s <= 1.0:
        raise ValueError("ordering parameter s must lie in [-1, 1]")
    if kind is Kind.BOSON:
        a = gamma + s * gamma0
        sign, logdet = np.linalg.slogdet(np.pi * a)
        if sign <= 0 or np.linalg.cond(a) > 1e12:
            raise SingularDistribution(f"G + s G0 is singular for s = {s}")
        return np.linalg.inv(a), float(np.exp(-0.5 * logdet))
    a = gamma - s * gamma0
    if np.linalg.cond(a) > 1e12:
        raise SingularDistribution(f"Omega - s Omega0 is singular for s = {s}")
    _, logdet = np.linalg.slogdet(0.5 * a)
    return -1j * np.linalg.inv(a), float(np.exp(-0.5 * logdet))


# ---------------------------------------------------------------------------
# position-space wave functions (bosons)


@dataclass(frozen=True, eq=False)
class WaveFunctionData:
    """psi(q) ~ exp(-q (A + iB) q / 2), or the mixed kernel with C and D.

    For a mixed state rho(q, q') ~ exp(-x^T [[A+iB, C+iD], [C-iD, A-iB]] x / 2)
    with x = (q, q').
    """

    A: np.ndarray
    B: np.ndarray
    C: Optional[np.ndarray] = None
    D: Optional[np.ndarray] = None

    @property
    def mixed(self) -> bool:
        return self.C is not None

    @property
    def normalization(self) -> float:
        if self.mixed:
            return float(np.sqrt(np.linalg.det((self.A + self.C) / np.pi)))
        return float(np.linalg.det(self.A / np.pi) ** 0.25)


def _check_pd(a, what):
    a = 0.5 * (a + a.T)
    if np.linalg.eigvalsh(a)[0] <= 0:
        raise NotPositive(f"{what} must be positive definite")


def covariance_to_wavefunction(G, mixed: bool = False) -> WaveFunctionData:
    """Wave-function matrices of a bosonic state in the standard q/p split.

    The standard blocks are Omega^{q p} = 1, Omega^{p q} = -1,
    omega_{q p} = -1 and omega_{p q} = 1.
    """
    G = np.asarray(G, dtype=float)
    gqq, gqp, gpq, gpp = _split(G)
    if np.linalg.cond(gqq) > 1e12:
        raise SingularPositionBlock("position block of G is not invertible")
    aq = np.linalg.inv(gqq)
    aq = 0.5 * (aq + aq.T)
    if not mixed:
        J = -G @ np.linalg.inv(omega_qp(G.shape[0] // 2))
        if purity_defect(J) > 1e-8 * max(1.0, np.max(np.abs(G)) ** 2):
            raise ValueError("state is mixed; use mixed=True")
        B = -aq @ gqp
        return WaveFunctionData(aq, 0.5 * (B + B.T))
    sigma = gpp - gpq @ aq @ gqp
    sigma = 0.5 * (sigma + sigma.T)
    A = 0.5 * (aq + sigma)
    C = 0.5 * (aq - sigma)
    B = -0.5 * (aq @ gqp + gpq @ aq)
    # sign fixed by partial integration of a pure two-system wave function
    D = 0.5 * (aq @ gqp - gpq @ aq)
    return WaveFunctionData(A, 0.5 * (B + B.T), 0.5 * (C + C.T), 0.5 * (D - D.T))


def wavefunction_to_covariance(data: WaveFunctionData) -> np.ndarray:
    A = np.asarray(data.A, dtype=float)
    B = np.asarray(data.B, dtype=float)
    if data.mixed:
        C = np.asarray(data.C, dtype=float)
        D = np.asarray(data.D, dtype=float)
    else:
        C = np.zeros_like(A)
        D = np.zeros_like(A)
    _check_pd(A + C, "A + C" if data.mixed else "A")
    if data.mixed:
        _check_pd(A, "A")
    s = np.linalg.inv(A + C)
    s = 0.5 * (s + s.T)
    gqq = s
    gpp = A - C + (B + D) @ s @ (B - D)
    gqp = -s @ (B - D)
    gpq = -(B + D) @ s
    out = np.block([[gqq, gqp], [gpq, gpp]])
    return 0.5 * (out + out.T)
