"""The invariant measure density sqrt|det Q_IJ| and Monte-Carlo experiments.

The density is evaluated from the natural metric; closed forms printed
for n <= 2 serve as cross-checks.  Monte-Carlo integration runs over
explicit boxes in packed coordinates with a signature rejection filter,
using a counter-based generator (Philox) with fixed chunking so that a
seed determines the stream regardless of worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptyDomain, UnsupportedDimension
from .forms import DEGENERACY_RTOL, Signature, SymmetricForm, inverse_form
from .geometry import _metric_from_inverse, metric_components
from .group import GroupElement, act, action_jacobian
from .packing import congruence_jacobian, packed_dim, unpack

_CHUNK = 65536


@dataclass(frozen=True)
class DensityValue:
    """Invariant-measure density at a base form."""

    value: float
    at: SymmetricForm

    def __post_init__(self):
        if not (self.value > 0.0 and math.isfinite(self.value)):
            raise ValueError(f"density must be positive and finite, got {self.value}")

    def __float__(self) -> float:
        return self.value


class BoxDomain:
    """Axis-aligned box in packed coordinates with a signature filter."""

    __slots__ = ("n", "N", "signature", "lower", "upper")

    def __init__(self, signature: Signature, lower, upper):
        self.signature = Signature(*signature)
        self.n = self.signature.n
        self.N = packed_dim(self.n)
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        if lo.shape != (self.N,) or hi.shape != (self.N,):
            raise ValueError(f"bounds must have length N = {self.N}")
        if not np.all(lo < hi):
            raise ValueError("every lower bound must be below its upper bound")
        self.lower = lo
        self.upper = hi

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def to_dict(self) -> dict:
        return {
            "signature": list(self.signature),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoxDomain":
        return cls(tuple(data["signature"]), data["lower"], data["upper"])


@dataclass(frozen=True)
class MCEstimate:
    """Monte-Carlo estimate with its standard error and acceptance counts."""

    value: float
    std_error: float
    n_samples: int
    n_accepted: int

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / self.n_samples


def density(S: SymmetricForm) -> DensityValue:
    """sqrt|det Q_IJ| at S, the natural invariant-measure density."""
    Q = metric_components(S).components
    return DensityValue(float(np.sqrt(abs(np.linalg.det(Q)))), S)


def density_closed_form(S: SymmetricForm) -> DensityValue:
    """The printed closed forms for n <= 2, evaluated verbatim.

    n = 1:  1 / |gamma_11|
    n = 2:  sqrt(2 |(g11 g22)^3 + 3 g11 g22 g12^4 - 3 (g11 g22)^2 g12^2 - g12^6|)
    with g_ij the entries of the inverse form.
    """
    if S.n == 1:
        val = 1.0 / abs(S.entries[0, 0])
        return DensityValue(val, S)
    if S.n == 2:
        inv = inverse_form(S).entries
        g11, g22, g12 = inv[0, 0], inv[1, 1], inv[0, 1]
        body = (
            g11**3 * g22**3
            + 3.0 * g11 * g22 * g12**4
            - 3.0 * g11**2 * g22**2 * g12**2
            - g12**6
        )
        return DensityValue(float(np.sqrt(2.0 * abs(body))), S)
    raise UnsupportedDimension(f"closed form only printed for n <= 2, got n = {S.n}")


def pushforward_invariance_residual(g: GroupElement, S: SymmetricForm) -> float:
    """|density(act(g, S)) |det L| - density(S)| with L = action_jacobian(g).

    Vanishes (to rounding) because the natural measure is invariant; the
    contract is residual < 1e-8 relative to density(S).
    """
    L = action_jacobian(g)
    moved = density(act(g, S)).value * abs(np.linalg.det(L))
    return abs(moved - density(S).value)


def _signature_mask(mats: np.ndarray, sig: Signature, rtol: float) -> np.ndarray:
    eigs = np.linalg.eigvalsh(mats)
    scale = np.max(np.abs(mats), axis=(-1, -2))
    nondeg = np.min(np.abs(eigs), axis=-1) >= rtol * np.maximum(scale, 1e-300)
    pos = np.sum(eigs > 0.0, axis=-1)
    return nondeg & (pos == sig.p)


def _density_batch(mats: np.ndarray) -> np.ndarray:
    Q = _metric_from_inverse(np.linalg.inv(mats))
    return np.sqrt(np.abs(np.linalg.det(Q)))


def _chunk_sums(f, box, seed, start, count, vectorized, rtol):
    bitgen = np.random.Philox(seed)
    rng = np.random.Generator(bitgen.jumped(start // _CHUNK))
    coords = rng.uniform(box.lower, box.upper, size=(count, box.N))
    mats = unpack(coords, box.n)
    accept = _signature_mask(mats, box.signature, rtol)
    vals = np.zeros(count)
    if np.any(accept):
        dens = _density_batch(mats[accept])
        if vectorized:
            fvals = np.asarray(f(coords[accept]), dtype=float)
            if fvals.shape != (int(np.sum(accept)),):
                raise ValueError("vectorized integrand must return one value per row")
        else:
            fvals = np.array([float(f(SymmetricForm(m))) for m in mats[accept]])
        vals[accept] = fvals * dens
    return float(np.sum(vals)), float(np.sum(vals * vals)), int(np.sum(accept))


def mc_integrate(
    f,
    box: BoxDomain,
    rng_seed: int,
    n_samples: int,
    vectorized: bool = False,
    threads: int | None = None,
    degeneracy_rtol: float = DEGENERACY_RTOL,
) -> MCEstimate:
    """Monte-Carlo integral of f against the invariant measure over a box.

    Uniform proposals inside the box are rejected unless they carry the
    box signature; accepted samples contribute f * density.  ``f`` takes
    a SymmetricForm, or, with vectorized=True, an (m, N) array of packed
    coordinates returning (m,) values.  Same seed, same estimate: samples
    are drawn per fixed-size chunk from jumped Philox substreams and
    reduced in chunk order, so the result is independent of ``threads``.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    starts = list(range(0, n_samples, _CHUNK))
    jobs = [(s, min(_CHUNK, n_samples - s)) for s in starts]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(
                    lambda job: _chunk_sums(
                        f, box, rng_seed, job[0], job[1], vectorized, degeneracy_rtol
                    ),
                    jobs,
                )
            )
    else:
        results = [
            _chunk_sums(f, box, rng_seed, s, c, vectorized, degeneracy_rtol)
            for s, c in jobs
        ]
    s1 = sum(r[0] for r in results)
    s2 = sum(r[1] for r in results)
    n_accepted = sum(r[2] for r in results)
    if n_accepted == 0:
        raise EmptyDomain("no sample passed the signature filter")
    vol = box.volume
    mean = s1 / n_samples
    var = max(0.0, (s2 - n_samples * mean * mean) / (n_samples - 1))
    return MCEstimate(
        value=vol * mean,
        std_error=vol * math.sqrt(var / n_samples),
        n_samples=n_samples,
        n_accepted=n_accepted,
    )


def radial_bump(center, radius: float):
    """Smooth compactly supported bump in packed coordinates (vectorized).

    Value exp(1 - 1/(1 - u^2)) for u = |x - center| / radius < 1, else 0.
    """
    center = np.asarray(center, dtype=float)
    if radius <= 0.0:
        raise ValueError("radius must be positive")

    def f(coords: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        u2 = np.sum(((coords - center) / radius) ** 2, axis=-1)
        out = np.zeros(u2.shape)
        inside = u2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u2[inside]))
        return out

    return f


def _linear_image_box(L: np.ndarray, box: BoxDomain) -> BoxDomain:
    """Bounding box of the image of a box under the linear map L."""
    lo_terms = np.minimum(L * box.lower, L * box.upper)
    hi_terms = np.maximum(L * box.lower, L * box.upper)
    return BoxDomain(box.signature, lo_terms.sum(axis=1), hi_terms.sum(axis=1))


@dataclass(frozen=True)
class InvarianceReport:
    """Both sides of the invariance identity and their discrepancy in sigmas."""

    lhs: MCEstimate
    rhs: MCEstimate
    difference: float
    combined_std_error: float
    difference_sigmas: float
    passed: bool


def invariance_experiment(
    f,
    g: GroupElement,
    box: BoxDomain,
    rng_seed: int,
    n_samples: int,
    vectorized: bool = False,
    threads: int | None = None,
) -> InvarianceReport:
    """Compare int f dmu with int (f o g) dmu; they agree for invariant measures.

    f must be compactly supported inside ``box``.  The composed integrand
    is supported on the image of the box under g^-1, so it is integrated
    over the bounding box of that image.  Passes when the difference is
    below 3 combined standard errors.
    """
    lhs = mc_integrate(f, box, rng_seed, n_samples, vectorized=vectorized, threads=threads)
    L_g = action_jacobian(g)
    moved_box = _linear_image_box(congruence_jacobian(g.entries), box)
    if vectorized:
        f_moved = lambda coords: f(coords @ L_g.T)
    else:
        f_moved = lambda S: f(act(g, S))
    rhs = mc_integrate(
        f_moved, moved_box, rng_seed, n_samples, vectorized=vectorized, threads=threads
    )
    diff = rhs.value - lhs.value
    combined = math.hypot(lhs.std_error, rhs.std_error)
    sigmas = diff / combined if combined > 0.0 else (0.0 if diff == 0.0 else math.inf)
    return InvarianceReport(
        lhs=lhs,
        rhs=rhs,
        difference=diff,
        combined_std_error=combined,
        difference_sigmas=sigmas,
        passed=abs(sigmas) < 3.0,
    )
