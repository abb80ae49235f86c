"""Symmetric bilinear forms: coordinate matrices, signatures, inverses.

A scalar product is represented by its full n x n coordinate matrix in a
fixed basis.  Signatures can be computed either from the signs of the
leading principal minors or from an eigendecomposition; the minor route
fails whenever a leading minor vanishes, so ``auto`` falls back to the
eigenvalue count in that case.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DegenerateForm, MinorBreakdown

# Constructor rejects asymmetry beyond this, relative to the largest entry.
SYMMETRY_RTOL = 1e-12
# Forms with an eigenvalue below this (relative to the largest entry) are
# treated as degenerate, i.e. not scalar products.
DEGENERACY_RTOL = 1e-10
# Inverse must reproduce the identity to this residual.
INVERSE_RTOL = 1e-9


class Signature(NamedTuple):
    """Counts of +1 and -1 directions of a nondegenerate symmetric form."""

    p: int
    p_prime: int

    @property
    def n(self) -> int:
        return self.p + self.p_prime


class SymmetricForm:
    """Coordinate matrix (gamma_ij) of a symmetric bilinear form.

    The constructor symmetrizes its input and rejects matrices that are
    asymmetric beyond ``SYMMETRY_RTOL`` relative to the largest entry.
    Instances are immutable and safe to share between threads.
    """

    __slots__ = ("n", "entries")

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("form entries must be finite")
        scale = float(np.max(np.abs(a)))
        asym = float(np.max(np.abs(a - a.T)))
        if asym > SYMMETRY_RTOL * max(scale, 1.0):
            raise ValueError(f"matrix is not symmetric: max|A - A^T| = {asym:.3e}")
        sym = 0.5 * (a + a.T)
        sym.flags.writeable = False
        self.n = int(a.shape[0])
        self.entries = sym

    def __repr__(self) -> str:
        return f"SymmetricForm(n={self.n})"

    def to_dict(self) -> dict:
        return {"n": self.n, "entries": self.entries.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "SymmetricForm":
        entries = np.asarray(data["entries"], dtype=float)
        if "n" in data and int(data["n"]) != entries.shape[0]:
            raise ValueError("declared dimension does not match the entries")
        return cls(entries)


class InverseForm:
    """Matrix (gamma^ij) inverse to a scalar product's coordinate matrix."""

    __slots__ = ("n", "entries")

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        a = 0.5 * (a + a.T)
        a.flags.writeable = False
        self.n = int(a.shape[0])
        self.entries = a

    def __repr__(self) -> str:
        return f"InverseForm(n={self.n})"


def _check_nondegenerate(entries: np.ndarray, rtol: float) -> np.ndarray:
    """Return the eigenvalues, raising DegenerateForm on a near-zero one."""
    eigs = np.linalg.eigvalsh(entries)
    scale = float(np.max(np.abs(entries)))
    if scale == 0.0 or float(np.min(np.abs(eigs))) < rtol * scale:
        raise DegenerateForm(
            f"form is degenerate: min |eigenvalue| = {np.min(np.abs(eigs)):.3e}, "
            f"scale = {scale:.3e}"
        )
    return eigs


def _signature_from_eigs(eigs: np.ndarray) -> Signature:
    p = int(np.sum(eigs > 0.0))
    return Signature(p, eigs.size - p)


def _leading_minors(entries: np.ndarray) -> np.ndarray:
    n = entries.shape[0]
    return np.array([np.linalg.det(entries[:k, :k]) for k in range(1, n + 1)])


def signature_of(
    S: SymmetricForm,
    method: str = "auto",
    degeneracy_rtol: float = DEGENERACY_RTOL,
    minor_rtol: float = 1e-10,
) -> Signature:
    """Signature (p, p') of a nondegenerate symmetric form.

    ``minors`` evaluates p' = n/2 - (1/2) sum_k sgn(m_k / m_{k-1}) with
    m_0 = 1 and m_k the leading principal k x k minors.  ``eigen`` counts
    the signs of the eigenvalues.  ``auto`` prefers minors and falls back
    to eigenvalues when some |m_k| < minor_rtol * scale**k.

    Raises DegenerateForm when the form is not a scalar product, and
    MinorBreakdown (method="minors" only) when a leading minor vanishes.
    """
    if method not in ("minors", "eigen", "auto"):
        raise ValueError(f"unknown method {method!r}")
    entries = S.entries
    eigs = _check_nondegenerate(entries, degeneracy_rtol)
    if method == "eigen":
        return _signature_from_eigs(eigs)

    scale = float(np.max(np.abs(entries)))
    minors = _leading_minors(entries)
    thresholds = minor_rtol * scale ** np.arange(1, S.n + 1)
    if np.any(np.abs(minors) < thresholds):
        if method == "minors":
            raise MinorBreakdown(
                "a leading principal minor vanishes; use method='eigen'"
            )
        return _signature_from_eigs(eigs)

    ratios = minors / np.concatenate(([1.0], minors[:-1]))
    p_prime = 0.5 * S.n - 0.5 * float(np.sum(np.sign(ratios)))
    p_prime_int = int(round(p_prime))
    return Signature(S.n - p_prime_int, p_prime_int)


def inverse_form(S: SymmetricForm, degeneracy_rtol: float = DEGENERACY_RTOL) -> InverseForm:
    """Inverse coordinate matrix (gamma^ij), gamma^ik gamma_kj = delta^i_j."""
    _check_nondegenerate(S.entries, degeneracy_rtol)
    inv = np.linalg.inv(S.entries)
    residual = float(np.max(np.abs(inv @ S.entries - np.eye(S.n))))
    if residual > INVERSE_RTOL:
        raise DegenerateForm(
            f"inverse residual {residual:.3e} exceeds {INVERSE_RTOL:.1e}; "
            "form is too ill-conditioned"
        )
    return InverseForm(inv)


def random_form(
    sig: Signature,
    rng_seed=None,
    scale: float = 1.0,
    max_condition: float = 1e6,
) -> SymmetricForm:
    """Random scalar product of the requested signature.

    Returns B diag(+1,...,-1,...) B^T for a random B with entries in
    (-scale, scale), redrawn until cond(B) < max_condition.  Passing a
    numpy Generator as ``rng_seed`` reuses its stream.
    """
    sig = Signature(*sig)
    if sig.p < 0 or sig.p_prime < 0 or sig.n < 1:
        raise ValueError(f"invalid signature {sig}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    eta = np.diag(np.concatenate((np.ones(sig.p), -np.ones(sig.p_prime))))
    while True:
        B = rng.uniform(-scale, scale, size=(sig.n, sig.n))
        if abs(np.linalg.det(B)) > 1e-12 and np.linalg.cond(B) < max_condition:
            return SymmetricForm(B @ eta @ B.T)
