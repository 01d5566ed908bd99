"""Principal angles, subspace arithmetic and tangent primitives.

Conventions used throughout:

* a subspace is represented by a matrix with orthonormal columns
  (:class:`OrthonormalBasis`); the zero subspace is an ``n x 0`` basis;
* the angle profile between two subspaces has ``min(dim S, dim T)``
  entries, ascending, in ``[0, pi/2]``;
* projectors are never materialised as ``n x n`` matrices:
  ``(I - T T*) S`` is always computed as ``S - T (T* S)``.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from enum import Enum

import numpy as np

from .errors import AmbientMismatchError, RankDeficiencyError

DEFAULT_RANK_TOL = 1e-12
_HALF_SQRT2 = np.sqrt(2.0) / 2.0


class NormKind(Enum):
    SPECTRAL = "spectral"
    FROBENIUS = "frobenius"


def _adj(M):
    """Conjugate transpose (plain transpose for real input)."""
    return M.conj().T if np.iscomplexobj(M) else M.T


def _as_matrix(M):
    M = np.asarray(M)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    return M


@dataclass(frozen=True)
class OrthonormalBasis:
    """An ``n x d`` matrix with orthonormal columns spanning a subspace.

    ``d = 0`` is allowed and represents the zero subspace.  The
    orthonormality tolerance defaults to ``1e-12 sqrt(d)`` and can be
    loosened per construction for long pipelines; inputs that are merely
    close to orthonormal should go through :func:`orthonormalize` instead.
    """

    data: np.ndarray
    orth_tol: InitVar[float | None] = None

    def __post_init__(self, orth_tol):
        M = _as_matrix(self.data)
        object.__setattr__(self, "data", M)
        n, d = M.shape
        if d > n:
            raise ValueError(f"basis has more columns ({d}) than rows ({n})")
        if d > 0:
            gram = _adj(M) @ M
            err = np.linalg.norm(gram - np.eye(d), "fro")
            if orth_tol is None:
                # loosened floor so products of exactly orthonormal factors pass
                orth_tol = max(1e-12 * np.sqrt(d), 64 * np.finfo(float).eps * d)
            if err > orth_tol:
                raise ValueError(f"columns are not orthonormal (defect {err:.3e})")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.dim == 0

    @staticmethod
    def empty(n: int) -> "OrthonormalBasis":
        return OrthonormalBasis(np.zeros((n, 0)))


@dataclass(frozen=True)
class AngleProfile:
    """Sorted principal angles between two subspaces.

    For an empty subspace on either side the profile is the single
    angle 0, so that all derived distances vanish.
    """

    angles: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.angles, dtype=float))
        object.__setattr__(self, "angles", a)

    @property
    def max_angle(self) -> float:
        return float(self.angles[-1])

    def sin_norm(self, norm: NormKind) -> float:
        s = np.sin(self.angles)
        if norm is NormKind.SPECTRAL:
            return float(s.max(initial=0.0))
        return float(np.sqrt(np.sum(s**2)))

    def tan_norm(self, norm: NormKind) -> float:
        t = np.tan(self.angles)
        if norm is NormKind.SPECTRAL:
            return float(t.max(initial=0.0))
        return float(np.sqrt(np.sum(t**2)))


def _check_ambient(S: OrthonormalBasis, T: OrthonormalBasis):
    if S.n != T.n:
        raise AmbientMismatchError(f"ambient dimensions differ: {S.n} vs {T.n}")


def orthonormalize(M, rank_tol: float = DEFAULT_RANK_TOL) -> OrthonormalBasis:
    """Orthonormal basis of the column range of ``M``.

    The output dimension is the numerical rank of ``M``: singular values
    above ``rank_tol * sigma_1`` are retained.  A zero (or empty) input
    yields the empty basis.
    """
    M = _as_matrix(M)
    if M.shape[1] == 0 or not np.any(M):
        return OrthonormalBasis.empty(M.shape[0])
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > rank_tol * s[0]))
    return OrthonormalBasis(U[:, :r])


def pseudo_inverse(M, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD truncation at ``rank_tol * sigma_1``."""
    M = _as_matrix(M)
    if M.size == 0 or not np.any(M):
        return np.zeros((M.shape[1], M.shape[0]), dtype=M.dtype)
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > rank_tol * s[0]))
    return _adj(Vh[:r]) @ ((1.0 / s[:r])[:, None] * _adj(U[:, :r]))


def principal_angles(S: OrthonormalBasis, T: OrthonormalBasis) -> AngleProfile:
    """Principal angles between the ranges of ``S`` and ``T``.

    ``min(dim S, dim T)`` ascending angles.  Small angles are extracted
    from the sines (singular values of ``P - Q (Q* P)``), large ones from
    the cosines (singular values of ``P* Q``); the two sets are merged at
    ``sin(theta) = sqrt(2)/2``.  Cosines alone cannot resolve angles near
    machine scale, sines alone lose the top end, so both are needed.
    """
    _check_ambient(S, T)
    if S.is_empty or T.is_empty:
        return AngleProfile(np.zeros(1))
    # normalise so the first factor is the smaller-dimensional one
    P, Q = (S.data, T.data) if S.dim <= T.dim else (T.data, S.data)
    s = P.shape[1]
    cosines = np.linalg.svd(_adj(P) @ Q, compute_uv=False)  # descending
    resid = P - Q @ (_adj(Q) @ P)
    sines = np.linalg.svd(resid, compute_uv=False)[::-1]  # ascending
    cosines = np.clip(cosines, 0.0, 1.0)
    sines = np.clip(sines, 0.0, 1.0)
    angles = np.where(sines <= _HALF_SQRT2, np.arcsin(sines), np.arccos(cosines))
    angles = np.clip(np.sort(angles), 0.0, np.pi / 2)
    assert angles.shape == (s,)
    return AngleProfile(angles)


def sin_theta_norm(S: OrthonormalBasis, T: OrthonormalBasis, norm: NormKind) -> float:
    """Norm of the sines of the principal angles between ``S`` and ``T``.

    Spectral: ``sin(theta_max)``.  Frobenius: ``sqrt(sum sin^2 theta_i)``.
    Both agree with the corresponding norm of ``(I - P_T) P_S``.
    """
    return principal_angles(S, T).sin_norm(norm)


def sin_theta_max(S: OrthonormalBasis, T: OrthonormalBasis) -> float:
    """Angular distance ``sin(theta_max(S, T))``, the metric used everywhere."""
    return sin_theta_norm(S, T, NormKind.SPECTRAL)


def tangent_matrix(X: OrthonormalBasis, X_perp: OrthonormalBasis, H: OrthonormalBasis) -> np.ndarray:
    """The matrix ``T = X_perp* H (X* H)^+``.

    Its positive singular values are the tangents of the nonzero,
    non-right principal angles between ``range(X)`` and ``range(H)``.
    ``[X X_perp]`` must be a unitary completion.
    """
    _check_ambient(X, H)
    _check_ambient(X, X_perp)
    cross = _adj(X.data) @ H.data
    return _adj(X_perp.data) @ H.data @ pseudo_inverse(cross)


def tan_theta_norm_bound(
    X: OrthonormalBasis,
    X_perp: OrthonormalBasis,
    H_raw,
    norm: NormKind,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> float:
    """Upper bound ``|| X_perp* H' (X* H')^+ ||`` for ``|| tan Theta(X, range(H')) ||``.

    ``H_raw`` need not have orthonormal columns.  Requires
    ``range(X) ∩ range(H_raw)^perp = {0}``, detected as full row rank of
    ``X* H_raw``; a deficient cross product raises
    :class:`RankDeficiencyError`.
    """
    H_raw = _as_matrix(H_raw)
    if H_raw.shape[0] != X.n:
        raise AmbientMismatchError(f"ambient dimensions differ: {X.n} vs {H_raw.shape[0]}")
    cross = _adj(X.data) @ H_raw
    sv = np.linalg.svd(cross, compute_uv=False)
    if sv.size < X.dim or sv[X.dim - 1] <= rank_tol * max(sv[0], 1e-300):
        raise RankDeficiencyError(
            "X* H is rank deficient: range(X) meets range(H)^perp, tangent bound undefined"
        )
    M = _adj(X_perp.data) @ H_raw @ pseudo_inverse(cross, rank_tol)
    if norm is NormKind.SPECTRAL:
        return float(np.linalg.norm(M, 2)) if M.size else 0.0
    return float(np.linalg.norm(M, "fro"))


def project_subspace(T: OrthonormalBasis, K: OrthonormalBasis) -> OrthonormalBasis:
    """Orthonormal basis of the projection ``P_K(T)``; dimension <= dim T."""
    _check_ambient(T, K)
    if T.is_empty or K.is_empty:
        return OrthonormalBasis.empty(T.n)
    return orthonormalize(K.data @ (_adj(K.data) @ T.data))


def complete_basis(B: OrthonormalBasis, seed: int = 0) -> OrthonormalBasis:
    """Unitary completion: an orthonormal basis of ``range(B)^perp``.

    Built from a full QR of ``B`` padded with seeded Gaussian columns and
    re-orthonormalised against ``B``; deterministic given ``seed``.
    """
    n, d = B.n, B.dim
    if d == n:
        return OrthonormalBasis.empty(n)
    rng = np.random.default_rng(seed)
    pad = rng.standard_normal((n, n - d))
    if np.iscomplexobj(B.data):
        pad = pad + 1j * rng.standard_normal((n, n - d))
    Q, _ = np.linalg.qr(np.hstack([B.data, pad])) if d else np.linalg.qr(pad)
    C = Q[:, d:]
    if d:
        C = C - B.data @ (_adj(B.data) @ C)  # second pass kills QR drift
        C, _ = np.linalg.qr(C)
    return OrthonormalBasis(C)


def direct_sum(*bases: OrthonormalBasis) -> OrthonormalBasis:
    """Concatenate mutually orthogonal bases into one, re-orthonormalised."""
    parts = [B.data for B in bases if not B.is_empty]
    if not parts:
        return OrthonormalBasis.empty(bases[0].n)
    return orthonormalize(np.hstack(parts))


def matrix_norm(M, norm: NormKind) -> float:
    """Dense spectral or Frobenius norm of a matrix."""
    M = _as_matrix(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2 if norm is NormKind.SPECTRAL else "fro"))
