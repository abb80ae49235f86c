"""The general linear action on scalar products.

A group element g acts by inverse pullback, (g S)(v, w) = S(g^-1 v, g^-1 w),
which in coordinates is the congruence (g^-1)^T S g^-1.  This module
provides the action, its packed-coordinate Jacobian, orthonormal frames,
transitivity witnesses, paths inside the positive-determinant component,
and numeric unimodularity checks via the adjoint representation.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateForm, NotInvariantSubspace, SignatureMismatch, SingularGroupElement
from .forms import SymmetricForm, signature_of
from .packing import congruence_jacobian

_DET_FLOOR = 1e-12


class GroupElement:
    """Invertible matrix (g^i_j) acting on forms by inverse pullback."""

    __slots__ = ("n", "entries")

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("group element entries must be finite")
        if abs(np.linalg.det(a)) <= _DET_FLOOR:
            raise SingularGroupElement(f"|det| = {abs(np.linalg.det(a)):.3e} <= {_DET_FLOOR:.1e}")
        a.flags.writeable = False
        self.n = int(a.shape[0])
        self.entries = a

    def __repr__(self) -> str:
        return f"GroupElement(n={self.n}, det={np.linalg.det(self.entries):.6g})"

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls(np.eye(n))

    def inverse(self) -> "GroupElement":
        return GroupElement(np.linalg.inv(self.entries))

    def compose(self, other: "GroupElement") -> "GroupElement":
        """Matrix product self @ other, i.e. apply ``other`` first."""
        return GroupElement(self.entries @ other.entries)


class OrthonormalFrame:
    """Basis columns B orthonormal for a form: B^T gamma B = eta = diag(+-1)."""

    __slots__ = ("B", "eta")

    def __init__(self, B: np.ndarray, eta: np.ndarray):
        self.B = B
        self.eta = eta


def act(g: GroupElement, S: SymmetricForm) -> SymmetricForm:
    """The natural action: coordinates of gamma(g^-1 ., g^-1 .)."""
    if g.n != S.n:
        raise ValueError(f"dimension mismatch: g is {g.n}x{g.n}, form is {S.n}x{S.n}")
    ginv = np.linalg.inv(g.entries)
    return SymmetricForm(ginv.T @ S.entries @ ginv)


def action_jacobian(g: GroupElement) -> np.ndarray:
    """Constant matrix L with pack(act(g, S)) = L @ pack(S) for every S.

    det L = (det g)^-(n+1).
    """
    return congruence_jacobian(np.linalg.inv(g.entries))


def orthonormal_basis(S: SymmetricForm, degeneracy_rtol: float = 1e-10) -> OrthonormalFrame:
    """Frame B with B^T S B = diag(+1 x p, -1 x p'), +1 columns first."""
    eigs = np.linalg.eigvalsh(S.entries)
    scale = float(np.max(np.abs(S.entries)))
    if scale == 0.0 or float(np.min(np.abs(eigs))) < degeneracy_rtol * scale:
        raise DegenerateForm("cannot orthonormalize a degenerate form")
    d, U = np.linalg.eigh(S.entries)
    B = U / np.sqrt(np.abs(d))
    order = np.argsort(d <= 0.0, kind="stable")  # positive eigenvalues first
    B = B[:, order]
    eta = np.diag(np.where(d[order] > 0.0, 1.0, -1.0))
    return OrthonormalFrame(B, eta)


def transitive_witness(
    S: SymmetricForm,
    S_target: SymmetricForm,
    positive_det: bool = False,
) -> GroupElement:
    """A group element g with act(g, S) = S_target.

    Built from orthonormal frames of both forms: g^-1 = B B'^-1.  The
    witness is not unique; this is simply the frame-based one.  With
    positive_det the sign of one frame column is flipped if needed so
    that det g > 0.
    """
    if signature_of(S, method="eigen") != signature_of(S_target, method="eigen"):
        raise SignatureMismatch(
            f"{signature_of(S, method='eigen')} != {signature_of(S_target, method='eigen')}"
        )
    B = orthonormal_basis(S).B
    B_t = orthonormal_basis(S_target).B.copy()
    if positive_det and np.linalg.det(B_t) * np.linalg.det(B) < 0.0:
        B_t[:, 0] = -B_t[:, 0]
    return GroupElement(B_t @ np.linalg.inv(B))


def _skew_log_rotation(R: np.ndarray) -> np.ndarray:
    """Real skew-symmetric K with expm(K) = R for special-orthogonal R.

    The principal matrix logarithm fails when R has eigenvalue -1, so the
    log is assembled from the real Schur form, pairing -1 eigenvalues
    into rotations by pi (det R = +1 guarantees they come in pairs).
    """
    n = R.shape[0]
    T, Z = sla.schur(R, output="real")
    K = np.zeros((n, n))
    minus_ones = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 1e-12:
            theta = np.arctan2(T[i + 1, i], T[i, i])
            K[i, i + 1] = -theta
            K[i + 1, i] = theta
            i += 2
        else:
            if T[i, i] < 0.0:
                minus_ones.append(i)
            i += 1
    for a, b in zip(minus_ones[0::2], minus_ones[1::2]):
        K[a, b] = -np.pi
        K[b, a] = np.pi
    return Z @ K @ Z.T


def gl_plus_path(g: np.ndarray):
    """Smooth path u -> xi(u) in GL+ with xi(0) = identity and xi(1) = g.

    Requires det g > 0.  Polar-decompose g = R P; the rotation factor is
    interpolated through its skew logarithm and the symmetric positive
    factor through fractional powers: xi(u) = expm(u K) P^u.  A real log
    of a general GL+ matrix need not exist, but this factored path always
    does.
    """
    g = np.asarray(g, dtype=float)
    if np.linalg.det(g) <= 0.0:
        raise ValueError("path construction requires det g > 0")
    R, P = sla.polar(g)
    K = _skew_log_rotation(R)
    d, U = np.linalg.eigh(P)
    log_d = np.log(d)

    def path(u: float) -> np.ndarray:
        rot = sla.expm(u * K)
        pos = (U * np.exp(u * log_d)) @ U.T
        return rot @ pos

    return path


def lazy_smoothstep(t: float, eps: float = 0.1) -> float:
    """Non-decreasing reparameterization, constant on [0, eps] and [1-eps, 1].

    Quintic smoothstep of the clamped, rescaled argument; used to make
    group-valued curves "lazy" (flat near both endpoints).
    """
    if not 0.0 <= eps < 0.5:
        raise ValueError("eps must lie in [0, 1/2)")
    s = (t - eps) / (1.0 - 2.0 * eps)
    s = min(1.0, max(0.0, s))
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)


def connecting_path(
    S: SymmetricForm,
    S_target: SymmetricForm,
    steps: int,
) -> list[SymmetricForm]:
    """Samples of a continuous path in the space of forms from S to S_target.

    The path is xi(u) acting on S, where xi runs through GL+ from the
    identity to the positive-determinant transitivity witness.  Every
    sample has the common signature of the endpoints.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    witness = transitive_witness(S, S_target, positive_det=True)
    path = gl_plus_path(witness.entries)
    return [act(GroupElement(path(u)), S) for u in np.linspace(0.0, 1.0, steps)]


def adjoint_determinant(
    g: GroupElement,
    algebra_basis: list[np.ndarray],
    rtol: float = 1e-8,
) -> float:
    """det of X -> g X g^-1 expressed in the given Lie-algebra basis.

    The group is unimodular exactly when |det Ad| = 1 for all its
    elements.  Raises NotInvariantSubspace if conjugation leaves the span
    of the basis (checked to ``rtol`` relative).
    """
    basis = [np.asarray(X, dtype=float) for X in algebra_basis]
    k = len(basis)
    if k == 0:
        raise ValueError("algebra basis must be nonempty")
    Bmat = np.column_stack([X.ravel() for X in basis])
    if np.linalg.matrix_rank(Bmat) < k:
        raise ValueError("algebra basis is linearly dependent")
    ginv = np.linalg.inv(g.entries)
    M = np.empty((k, k))
    for a, X in enumerate(basis):
        Y = g.entries @ X @ ginv
        coeffs, *_ = np.linalg.lstsq(Bmat, Y.ravel(), rcond=None)
        residual = float(np.max(np.abs(Bmat @ coeffs - Y.ravel())))
        if residual > rtol * max(1.0, float(np.max(np.abs(Y)))):
            raise NotInvariantSubspace(
                f"g X g^-1 leaves span(basis): residual {residual:.3e}"
            )
        M[:, a] = coeffs
    return float(np.linalg.det(M))


def isotropy_algebra_basis(eta) -> list[np.ndarray]:
    """Basis of the Lie algebra o(p, p') of the isotropy group of eta.

    eta must be a diagonal +-1 matrix; the solutions of A^T eta + eta A = 0
    are spanned by eta (E_ij - E_ji) for i < j, giving n(n-1)/2 elements.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.ndim == 1:
        eta = np.diag(eta)
    if not np.array_equal(eta, np.diag(np.diag(eta))) or not np.all(np.abs(np.diag(eta)) == 1.0):
        raise ValueError("eta must be a diagonal matrix with entries +-1")
    n = eta.shape[0]
    basis = []
    for i in range(n):
        for j in range(i + 1, n):
            W = np.zeros((n, n))
            W[i, j] = 1.0
            W[j, i] = -1.0
            basis.append(eta @ W)
    return basis
