"""Lie groups Sp(2N, R) / O(2N, R), their algebras and tangent frames.

Everything is expressed in the real qp basis with the standard background
(Omega = [[0, 1], [-1, 0]] for bosons, G = 1 for fermions).  A tangent
frame is a list of algebra generators Xi_mu together with the pulled-back
metric g_{mu nu} and symplectic form omega_{mu nu} at a reference
complex structure J0.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBasis, NearSingular, RankDeficient
from .linalg import expm, null_space
from .phase_space import Kind, as_kind, omega_qp


@dataclass(frozen=True, eq=False)
class AlgebraBasis:
    kind: Kind
    generators: np.ndarray  # shape (m, 2N, 2N)
    N: int

    def __len__(self):
        return len(self.generators)


def _generator_stack(gens):
    gens = np.asarray(gens)
    if gens.ndim == 2:
        gens = gens[None]
    return gens


def full_algebra_basis(kind, N: int) -> AlgebraBasis:
    """Canonical spanning basis of sp(2N, R) or so(2N, R).

    Bosons: K = Omega S with S running over symmetric elementary matrices,
    N(2N+1) generators.  Fermions: antisymmetric elementary matrices,
    N(2N-1) generators.
    """
    kind = as_kind(kind)
    n2 = 2 * N
    gens = []
    if kind is Kind.BOSON:
        om = omega_qp(N)
        for i in range(n2):
            for j in range(i, n2):
                s = np.zeros((n2, n2))
                s[i, j] = s[j, i] = 1.0
                gens.append(om @ s)
    else:
        for i in range(n2):
            for j in range(i + 1, n2):
                a = np.zeros((n2, n2))
                a[i, j], a[j, i] = 1.0, -1.0
                gens.append(a)
    return AlgebraBasis(kind, np.array(gens), N)


def embed_generators(gens, indices, total_dim: int) -> np.ndarray:
    """Place generators acting on a subset of phase-space indices into a
    larger zero matrix (0 on all other rows and columns)."""
    gens = _generator_stack(gens)
    out = np.zeros((len(gens), total_dim, total_dim), dtype=gens.dtype)
    ix = np.ix_(indices, indices)
    for k, g in enumerate(gens):
        out[k][ix] = g
    return out


def algebra_defect(K, kind) -> float:
    K = np.asarray(K)
    n = K.shape[0] // 2
    if as_kind(kind) is Kind.BOSON:
        om = omega_qp(n)
        return float(np.max(np.abs(K @ om + om @ K.T)))
    return float(np.max(np.abs(K + K.T)))


def group_defect(M, kind) -> float:
    M = np.asarray(M)
    n = M.shape[0] // 2
    if as_kind(kind) is Kind.BOSON:
        om = omega_qp(n)
        return float(np.max(np.abs(M @ om @ M.T - om)))
    return float(np.max(np.abs(M @ M.T - np.eye(M.shape[0]))))


def _trace_form(X, Y):
    """T_ab = Tr(X_a Y_b) for stacks of matrices, as one matrix product."""
    m, n = len(X), len(Y)
    if m == 0 or n == 0:
        return np.zeros((m, n))
    return X.reshape(m, -1) @ np.transpose(Y, (0, 2, 1)).reshape(n, -1).T


def _independent_span(gens, rtol=1e-10):
    """Frobenius-orthonormal basis of the span of a stack of matrices.

    Uses the eigendecomposition of the small Gram matrix instead of an SVD
    of the flattened stack; eigenvalues below ``rtol`` times the largest
    (singular values below sqrt(rtol)) count as dependent.
    """
    gens = _generator_stack(gens)
    if len(gens) == 0:
        return gens
    flat = gens.reshape(len(gens), -1)
    gram = (flat.conj() @ flat.T).real if np.iscomplexobj(flat) else flat @ flat.T
    w, v = np.linalg.eigh(gram)
    keep = w > rtol * max(w[-1], 1e-300)
    coeffs = v[:, keep] / np.sqrt(w[keep])
    return np.tensordot(coeffs, gens, axes=(0, 0))


def stabilizer_split(basis, J0, rtol: float = 1e-10):
    """Split a span of generators into h' = {[K, J0] = 0} and a complement.

    For a pure J0 and a span closed under K -> J0 K J0 (e.g. the full
    algebra) the complement is the anticommutant, obtained by the
    projections K_pm = (K -/+ J0 K J0) / 2.  Otherwise (restricted spans
    such as ancilla-only generators) h' is the kernel of ad_J0 inside the
    span and h'_perp its Frobenius-orthogonal complement within the span.
    Both outputs are Frobenius-orthonormal stacks.
    """
    gens = basis.generators if isinstance(basis, AlgebraBasis) else _generator_stack(basis)
    J0 = np.asarray(J0)
    dim = J0.shape[0]
    pure = np.max(np.abs(J0 @ J0 + np.eye(dim))) < 1e-10
    span = _independent_span(gens, rtol)
    m = len(span)
    if m == 0:
        return span, span
    if pure:
        plus = 0.5 * (span - J0 @ span @ J0)
        minus = 0.5 * (span + J0 @ span @ J0)
        h = _independent_span(plus, rtol)
        hp = _independent_span(minus, rtol)
        # the projections stay inside the span only if it is closed under them
        flat_span = span.reshape(m, -1)
        resid = minus.reshape(m, -1) - (minus.reshape(m, -1) @ flat_span.T) @ flat_span
        if np.max(np.abs(resid)) < 1e-9 * max(1.0, np.max(np.abs(minus))):
            if len(h) + len(hp) != m:
                raise DegenerateBasis(
                    f"split dimensions {len(h)} + {len(hp)} do not add up to {m}"
                )
            return h, hp
    # kernel of K -> [K, J0] restricted to the span
    comm = span @ J0 - J0 @ span
    ker = null_space(comm.reshape(m, -1).T, rtol)
    h = np.tensordot(ker, span, axes=(0, 0)) if ker.shape[1] else span[:0]
    perp_coeffs = null_space(ker.T, rtol) if ker.shape[1] else np.eye(m)
    hp = np.tensordot(perp_coeffs, span, axes=(0, 0))
    if len(h) + len(hp) != m:
        raise DegenerateBasis("rank extraction failed")
    return h, hp


def manifold_metric(generators, J0, kind="boson") -> np.ndarray:
    """g_{mu nu} = +-Tr(Xi_mu Xi_nu + Xi_mu J0 Xi_nu J0) / 4.

    The sign is + for bosons and - for fermions: with antisymmetric
    generators the trace form is negative definite, and the tangent-space
    inner product Tr(dGamma g dGamma^T g) / 8 picks up the minus sign.
    """
    X = _generator_stack(generators)
    XJ = X @ J0
    sign = -1.0 if as_kind(kind) is Kind.FERMION else 1.0
    g = 0.25 * sign * (_trace_form(X, X) + _trace_form(XJ, XJ))
    g = g.real if np.iscomplexobj(g) else g
    return 0.5 * (g + g.T)


def manifold_symplectic(generators, J0) -> np.ndarray:
    """omega_{mu nu} = Tr(Xi_mu J0 Xi_nu) / 2."""
    X = _generator_stack(generators)
    XJ = X @ J0
    w = 0.5 * _trace_form(XJ, X)
    w = w.real if np.iscomplexobj(w) else w
    return 0.5 * (w - w.T)


@dataclass(frozen=True, eq=False)
class TangentFrame:
    reference_J: np.ndarray
    generators: np.ndarray
    metric: np.ndarray
    metric_inverse: np.ndarray
    symplectic: np.ndarray
    kind: Kind = Kind.BOSON

    def __len__(self):
        return len(self.generators)

    @property
    def dim(self) -> int:
        return len(self.generators)

    def combine(self, coeffs) -> np.ndarray:
        """K = coeffs^mu Xi_mu."""
        return np.tensordot(np.asarray(coeffs), self.generators, axes=1)


def make_frame(generators, J0, kind="boson") -> TangentFrame:
    gens = _generator_stack(generators)
    kind = as_kind(kind)
    g = manifold_metric(gens, J0, kind)
    try:
        ginv = np.linalg.inv(g) if len(gens) else g
    except np.linalg.LinAlgError:
        ginv = np.full_like(g, np.nan)
    return TangentFrame(np.asarray(J0), gens, g, ginv, manifold_symplectic(gens, J0), kind)


def orthonormalize(frame: TangentFrame, tol: float = 1e-12) -> TangentFrame:
    """Whiten the frame so that g_{mu nu} = identity.

    Uses the symmetric eigendecomposition of the metric.  Any eigenvalue
    below ``tol`` means the generators are not independent modulo the
    stabilizer and raises :class:`RankDeficient`.
    """
    if frame.dim == 0:
        return frame
    w, v = np.linalg.eigh(frame.metric)
    if w[0] < tol:
        raise RankDeficient(f"metric has eigenvalue {w[0]:.3e} below {tol:g}")
    coeffs = v / np.sqrt(w)
    gens = np.tensordot(coeffs, frame.generators, axes=(0, 0))
    return make_frame(gens, frame.reference_J, frame.kind)


def orthonormal_frame(generators, J0, kind="boson", rtol: float = 1e-10) -> TangentFrame:
    """Orthonormal frame of the directions in a span that move J0.

    The metric is positive semidefinite on any span and vanishes exactly on
    the stabilizer; dropping its null eigenvectors and whitening the rest
    performs the split and the orthonormalization in one step.
    """
    gens = _independent_span(generators)
    if len(gens) == 0:
        return make_frame(gens, J0, kind)
    g = manifold_metric(gens, J0, kind)
    w, v = np.linalg.eigh(g)
    keep = w > rtol * max(1.0, w[-1])
    coeffs = v[:, keep] / np.sqrt(w[keep])
    out = np.tensordot(coeffs, gens, axes=(0, 0))
    return make_frame(out, J0, kind)


def tangent_frame(kind, J0) -> TangentFrame:
    """Orthonormal frame of h'_perp for the full group acting on J0."""
    J0 = np.asarray(J0)
    basis = full_algebra_basis(kind, J0.shape[0] // 2)
    _, hp = stabilizer_split(basis, J0)
    return orthonormalize(make_frame(hp, J0, kind))


def cayley_retract(K, epsilon: float) -> np.ndarray:
    """M = (1 + eps K / 2)(1 - eps K / 2)^-1, exactly in the group."""
    K = np.asarray(K)
    eye = np.eye(K.shape[0])
    if epsilon == 0:
        return eye.astype(K.dtype)
    half = 0.5 * epsilon * K
    den = eye - half
    if np.linalg.cond(den) > 1e12:
        raise NearSingular("1 - eps K / 2 is close to singular; reduce the step")
    return np.linalg.solve(den.T, (eye + half).T).T


def exact_exponential(K, epsilon: float = 1.0) -> np.ndarray:
    return expm(epsilon * np.asarray(K))


def make_rng(seed):
    """Counter-based generator (Philox) with an explicit seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def random_algebra_element(kind, N: int, rng, spread: float = 1.0) -> np.ndarray:
    kind = as_kind(kind)
    n2 = 2 * N
    a = rng.normal(scale=spread, size=(n2, n2)) if spread > 0 else np.zeros((n2, n2))
    if kind is Kind.BOSON:
        return omega_qp(N) @ (0.5 * (a + a.T))
    return 0.5 * (a - a.T)


def sample_group(kind, N: int, seed=0, spread: float = 1.0) -> np.ndarray:
    """Random group element.

    Fermions: Haar-random SO(2N) from the QR decomposition of a Gaussian
    matrix.  Bosons: exp(K) with K = Omega S, S symmetric with normal
    entries of standard deviation ``spread``.
    """
    kind = as_kind(kind)
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    n2 = 2 * N
    if kind is Kind.FERMION:
        z = rng.normal(size=(n2, n2))
        q, r = np.linalg.qr(z)
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        return q
    return expm(random_algebra_element(kind, N, rng, spread))
