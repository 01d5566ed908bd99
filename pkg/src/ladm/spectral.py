"""Eigendecompositions, cluster envelopes and synthetic clustered spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EnvelopeError, SpectrumSpecError
from .geometry import OrthonormalBasis, _adj

DEFAULT_EIG_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-12


@dataclass(frozen=True)
class EigenModel:
    """A self-adjoint matrix together with a full eigendecomposition.

    ``A = X diag(lam) X*`` with ``lam`` non-increasing and ``X`` unitary.
    """

    A: np.ndarray
    X: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        object.__setattr__(self, "lam", lam)
        if np.any(np.diff(lam) > 1e-12 * max(1.0, abs(lam[0]))):
            raise ValueError("eigenvalues must be non-increasing")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def rank(self, rank_tol: float = DEFAULT_RANK_TOL) -> int:
        scale = np.abs(self.lam).max(initial=0.0)
        if scale == 0.0:
            return 0
        return int(np.sum(np.abs(self.lam) > rank_tol * scale))

    def gap(self, ell: int) -> float:
        """Eigen-gap ``lam_ell - lam_{ell+1}``; ``ell = 0`` means the
        infinite sentinel gap above the top eigenvalue."""
        if ell == 0:
            return math.inf
        return float(self.lam[ell - 1] - self.lam[ell])


def eigendecompose(A, eig_tol: float = DEFAULT_EIG_TOL) -> EigenModel:
    """Full eigendecomposition of a self-adjoint matrix, eigenvalues descending.

    The input is symmetrised before the solve; asymmetry beyond
    ``1e-10 * ||A||_F`` is rejected.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("input must be a square matrix")
    nrm = np.linalg.norm(A, "fro")
    asym = np.linalg.norm(A - _adj(A), "fro")
    if nrm > 0 and asym > 1e-10 * nrm:
        raise ValueError(f"matrix is not self-adjoint (defect {asym / nrm:.3e})")
    S = (A + _adj(A)) / 2
    w, V = np.linalg.eigh(S)
    model = EigenModel(A=S, X=V[:, ::-1], lam=w[::-1])
    resid = np.linalg.norm(S @ model.X - model.X * model.lam, "fro")
    if nrm > 0 and resid > eig_tol * nrm:
        raise ValueError(f"eigendecomposition residual too large: {resid / nrm:.3e}")
    return model


def dominant_basis(model: EigenModel, ell: int) -> OrthonormalBasis:
    """Span of the eigenvectors of the ``ell`` largest eigenvalues (``ell = 0``
    gives the empty basis)."""
    if not 0 <= ell <= model.n:
        raise ValueError(f"ell={ell} out of range [0, {model.n}]")
    return OrthonormalBasis(model.X[:, :ell])


def truncated_eigen(model: EigenModel, h: int) -> np.ndarray:
    """Rank-``h`` compression ``P_{X_h} A P_{X_h}``."""
    Xh = model.X[:, :h]
    return Xh @ ((_adj(Xh) @ model.A) @ Xh) @ _adj(Xh) if h else np.zeros_like(model.A)


def truncation_error(model: EigenModel, h: int, spectral: bool = True) -> float:
    """Norm of ``A - P_{X_h} A P_{X_h}`` computed from the spectrum."""
    tail = model.lam[h:]
    if tail.size == 0:
        return 0.0
    return float(np.abs(tail).max()) if spectral else float(np.sqrt(np.sum(tail**2)))


@dataclass(frozen=True)
class ClusterEnvelope:
    """Enveloping indices ``0 <= j < h < k`` around an eigenvalue cluster.

    ``delta`` is the cluster spread ``lam_{j+1} - lam_k``; ``gamma`` the
    smaller of the two boundary gaps (the gap above index ``j`` is the
    infinite sentinel when ``j = 0`` and never enters ``gamma`` then).
    """

    j: int
    h: int
    k: int
    delta: float
    gamma: float

    @staticmethod
    def from_model(
        model: EigenModel,
        j: int,
        h: int,
        k: int,
        gap_tol: float | None = None,
        rank_tol: float = DEFAULT_RANK_TOL,
    ) -> "ClusterEnvelope":
        lam = model.lam
        if not (0 <= j < h < k):
            raise EnvelopeError(f"need 0 <= j < h < k, got j={j}, h={h}, k={k}")
        if k > model.rank(rank_tol):
            raise EnvelopeError(f"k={k} exceeds numerical rank {model.rank(rank_tol)}")
        if gap_tol is None:
            gap_tol = 1e-10 * abs(lam[0]) if lam[0] != 0 else 1e-10
        gap_j = model.gap(j)
        gap_k = model.gap(k)
        if gap_j <= gap_tol:
            raise EnvelopeError(f"gap at j={j} is {gap_j:.3e} <= tol {gap_tol:.3e}")
        if gap_k <= gap_tol:
            raise EnvelopeError(f"gap at k={k} is {gap_k:.3e} <= tol {gap_tol:.3e}")
        delta = float(lam[j] - lam[k - 1])  # lam_{j+1} - lam_k, 1-based
        gamma = gap_k if math.isinf(gap_j) else min(gap_j, gap_k)
        if delta < -1e-12:
            raise EnvelopeError("negative cluster spread")
        return ClusterEnvelope(j=j, h=h, k=k, delta=max(delta, 0.0), gamma=float(gamma))


@dataclass(frozen=True)
class DecaySpec:
    """Eigenvalue decay outside the cluster.

    ``exponential``: params ``(a, b)`` give ``a * exp(-b * i)``.
    ``linear``: params ``(top, bottom)`` interpolate from index 1 to n.
    """

    kind: str
    params: tuple

    def values(self, idx: np.ndarray, n: int) -> np.ndarray:
        if self.kind == "exponential":
            a, b = self.params
            return a * np.exp(-b * idx)
        if self.kind == "linear":
            top, bottom = self.params
            return top + (bottom - top) * (idx - 1) / (n - 1)
        raise SpectrumSpecError(f"unknown decay kind {self.kind!r}")


@dataclass(frozen=True)
class SpectrumSpec:
    """Recipe for a synthetic matrix with a clustered spectrum."""

    n: int
    j: int
    h: int
    k: int
    decay: DecaySpec
    delta: float
    cluster_center: float | None = None
    seed: int = 0

    def resolved_center(self) -> float:
        if self.cluster_center is not None:
            return self.cluster_center
        edges = self.decay.values(np.array([self.j + 1, self.k], dtype=float), self.n)
        return float(edges.mean())


def synthesize_spectrum(spec: SpectrumSpec) -> np.ndarray:
    """Eigenvalue vector for ``spec``: decay outside the cluster, a uniform
    spread of width ``delta`` inside it."""
    n, j, k = spec.n, spec.j, spec.k
    if not (0 <= j < spec.h < k <= n):
        raise SpectrumSpecError(f"need 0 <= j < h < k <= n, got {spec}")
    idx = np.arange(1, n + 1, dtype=float)
    lam = spec.decay.values(idx, n)
    center = spec.resolved_center()
    width = spec.delta
    cluster = np.linspace(center + width / 2, center - width / 2, k - j)
    lam[j:k] = cluster
    top = lam[j - 1] if j >= 1 else math.inf
    bottom = lam[k] if k < n else -math.inf
    if not (top > cluster[0] and cluster[-1] > bottom):
        raise SpectrumSpecError(
            "decay curve enters the cluster band: "
            f"lam_j={top:.6g}, cluster=[{cluster[-1]:.6g}, {cluster[0]:.6g}], lam_k+1={bottom:.6g}"
        )
    if np.any(np.diff(lam) > 0):
        raise SpectrumSpecError("resulting spectrum is not non-increasing")
    return lam


def haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix: QR of a Gaussian with the
    R-diagonal sign correction."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def synth_model(spec: SpectrumSpec) -> tuple[EigenModel, ClusterEnvelope]:
    """Synthetic model with the requested clustered spectrum.

    ``A = X diag(lam) X*`` for a Haar-random ``X``; the returned envelope
    carries the realised spread and boundary gaps.
    """
    lam = synthesize_spectrum(spec)
    rng = np.random.default_rng(spec.seed)
    X = haar_orthogonal(spec.n, rng)
    A = (X * lam) @ X.T
    A = (A + A.T) / 2
    model = EigenModel(A=A, X=X, lam=lam)
    env = ClusterEnvelope.from_model(model, spec.j, spec.h, spec.k)
    return model, env


def gaussian_subspace(n: int, r: int, seed: int = 0) -> OrthonormalBasis:
    """Orthonormalised ``n x r`` standard Gaussian sample (full rank a.s.)."""
    if r > n:
        raise ValueError(f"r={r} exceeds ambient dimension n={n}")
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return OrthonormalBasis(Q)
