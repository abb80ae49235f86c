"""The natural cotangent metric Q, the one-form alpha, and the family Q^a.

In packed coordinates the metric has components
Q_IJ = trace(gamma^-1 E_I gamma^-1 E_J) with E_I the symmetrized tangent
basis; at an orthonormal base point this is diagonal with entries
(gamma^ii)^2 and 2 gamma^ii gamma^jj, and its signature is
((p(p+1) + p'(p'+1))/2, p p').  All of Q, alpha and Q^a are invariant
under the group action, which the residual helpers check numerically.
"""
from __future__ import annotations

import numpy as np

from .forms import Signature, SymmetricForm, inverse_form, signature_of
from .group import GroupElement, act, action_jacobian
from .packing import packed_dim, packed_pairs, symmetric_basis


class CotangentMetric:
    """Components Q_IJ (N x N, N = n(n+1)/2) at a fixed base form."""

    __slots__ = ("n", "N", "components")

    def __init__(self, n: int, components: np.ndarray):
        components = np.asarray(components, dtype=float)
        self.n = n
        self.N = packed_dim(n)
        if components.shape != (self.N, self.N):
            raise ValueError(f"expected {self.N}x{self.N} components")
        self.components = components

    def __repr__(self) -> str:
        return f"CotangentMetric(n={self.n}, N={self.N})"


class OneForm:
    """Components alpha_I of the invariant one-form at a fixed base form."""

    __slots__ = ("n", "components")

    def __init__(self, n: int, components: np.ndarray):
        self.n = n
        self.components = np.asarray(components, dtype=float)


def _metric_from_inverse(inv: np.ndarray) -> np.ndarray:
    n = inv.shape[-1]
    E = symmetric_basis(n)
    A = np.einsum("...ij,ajk->...aik", inv, E)
    Q = np.einsum("...aij,...bji->...ab", A, A)
    return 0.5 * (Q + np.swapaxes(Q, -1, -2))


def metric_components(S: SymmetricForm) -> CotangentMetric:
    """Q_IJ = trace(gamma^-1 E_I gamma^-1 E_J) at the base point S."""
    inv = inverse_form(S).entries
    return CotangentMetric(S.n, _metric_from_inverse(inv))


def metric_signature(S: SymmetricForm) -> Signature:
    """Signature of Q_IJ; equals ((p(p+1)+p'(p'+1))/2, p p') for S of signature (p, p')."""
    Q = metric_components(S)
    return signature_of(SymmetricForm(Q.components), method="eigen")


def one_form_components(S: SymmetricForm) -> OneForm:
    """alpha_I: gamma^ii on diagonal coordinates, 2 gamma^ij off-diagonal."""
    inv = inverse_form(S).entries
    comps = np.array(
        [inv[i, j] if i == j else 2.0 * inv[i, j] for (i, j) in packed_pairs(S.n)]
    )
    return OneForm(S.n, comps)


def deformed_metric(S: SymmetricForm, a: float) -> CotangentMetric:
    """Q^a = Q + a alpha (x) alpha; degenerate exactly at a0 = -1/n."""
    Q = metric_components(S)
    alpha = one_form_components(S).components
    return CotangentMetric(S.n, Q.components + a * np.outer(alpha, alpha))


def qinv_alpha_alpha(S: SymmetricForm) -> float:
    """The invariant scalar alpha^T Q^-1 alpha; equals dim V at every base point."""
    Q = metric_components(S).components
    alpha = one_form_components(S).components
    return float(alpha @ np.linalg.solve(Q, alpha))


def pullback_invariance_residual(g: GroupElement, S: SymmetricForm) -> float:
    """max-norm residual of L^T Q(act(g, S)) L against Q(S).

    Vanishes (to rounding) because the natural metric is invariant under
    the group action; the contract is residual < 1e-8 * ||Q(S)||_inf.
    """
    L = action_jacobian(g)
    Q_moved = metric_components(act(g, S)).components
    Q_here = metric_components(S).components
    return float(np.max(np.abs(L.T @ Q_moved @ L - Q_here)))
