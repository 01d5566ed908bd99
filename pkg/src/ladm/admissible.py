"""The admissible subspace class: membership, the constructive nearest
member, distance bounds, and the approximation-quality estimates that make
these subspaces useful in the clustered-eigenvalue setting.

For enveloping indices ``j < h < k`` with eigen-gaps at ``j`` and ``k``,
the class consists of the ``h``-dimensional subspaces squeezed between the
dominant eigenspaces: ``X_j ⊆ S ⊆ X_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MembershipError, RankDeficiencyError
from .geometry import (
    NormKind,
    OrthonormalBasis,
    _adj,
    matrix_norm,
    orthonormalize,
    principal_angles,
    sin_theta_max,
    sin_theta_norm,
)
from .spectral import ClusterEnvelope, EigenModel, dominant_basis, truncation_error

DEFAULT_MEMBER_TOL = 1e-8


@dataclass(frozen=True)
class AdmissibleClass:
    """Bundle of a model with its envelope and the two bracketing eigenspaces."""

    model: EigenModel
    env: ClusterEnvelope
    Xj: OrthonormalBasis
    Xk: OrthonormalBasis

    @staticmethod
    def create(model: EigenModel, env: ClusterEnvelope) -> "AdmissibleClass":
        return AdmissibleClass(
            model=model,
            env=env,
            Xj=dominant_basis(model, env.j),
            Xk=dominant_basis(model, env.k),
        )

    @property
    def h(self) -> int:
        return self.env.h


@dataclass(frozen=True)
class DistanceReport:
    lower: float
    upper: float
    measured: float
    witness: OrthonormalBasis
    norm: NormKind


def is_member(S: OrthonormalBasis, cls: AdmissibleClass, tol: float = DEFAULT_MEMBER_TOL) -> bool:
    """True iff ``X_j ⊆ S ⊆ X_k`` holds to ``tol`` in ``sin(theta_max)``."""
    if S.dim != cls.h:
        raise MembershipError(f"candidate has dimension {S.dim}, class requires {cls.h}")
    inc_j = sin_theta_max(cls.Xj, S) if not cls.Xj.is_empty else 0.0
    inc_k = sin_theta_max(S, cls.Xk)
    return inc_j <= tol and inc_k <= tol


def nearest_admissible(T: OrthonormalBasis, cls: AdmissibleClass) -> OrthonormalBasis:
    """Constructive member of the class close to ``T``.

    Steps: reduce ``T`` to ``P_T(X_k)`` when it is larger than ``X_k``;
    project into ``X_k``; inside the projection keep ``h - j`` directions
    orthogonal to ``X_j`` (smallest right singular vectors of ``X_j* Q``)
    and prepend ``X_j``.  The result satisfies
    ``sin Theta(S, T) <= sin Theta(X_j, T) + sin Theta(X_k, T)`` in every
    unitarily invariant norm.

    Requires ``dim T >= h`` and no right angles between ``X_k`` and ``T``.
    """
    model, env = cls.model, cls.env
    j, h, k = env.j, env.h, env.k
    if T.dim < h:
        raise ValueError(f"dim T = {T.dim} < h = {h}")
    cross = _adj(cls.Xk.data) @ T.data
    sv = np.linalg.svd(cross, compute_uv=False)
    need = min(T.dim, k)
    if sv.size < need or sv[need - 1] <= 1e-12:
        raise RankDeficiencyError(
            "right principal angles between X_k and T: rank(X_k* T) "
            f"= {int(np.sum(sv > 1e-12))} < {need}"
        )
    if T.dim > k:
        T = orthonormalize(T.data @ (_adj(T.data) @ cls.Xk.data))
        if T.dim < k:
            raise RankDeficiencyError("reduction T <- P_T(X_k) lost rank")
    Q = orthonormalize(cls.Xk.data @ (_adj(cls.Xk.data) @ T.data))
    if Q.dim < T.dim:
        raise RankDeficiencyError("projection into X_k lost rank")
    if j == 0:
        S = Q.data[:, :h]
    else:
        _, _, Vh = np.linalg.svd(_adj(cls.Xj.data) @ Q.data)
        Z = _adj(Vh)[:, Q.dim - (h - j):]
        S = np.hstack([cls.Xj.data, Q.data @ Z])
    return orthonormalize(S)


def distance_bounds(T: OrthonormalBasis, cls: AdmissibleClass, norm: NormKind) -> DistanceReport:
    """Bracketing of the distance from ``T`` to the class.

    ``upper`` is the sum of the distances to the two bracketing
    eigenspaces, realised by the constructed witness; ``lower`` is the
    larger of the two (valid only when ``dim T = h``, else 0).
    """
    dj = sin_theta_norm(cls.Xj, T, norm) if not cls.Xj.is_empty else 0.0
    dk = sin_theta_norm(cls.Xk, T, norm)
    witness = nearest_admissible(T, cls)
    measured = sin_theta_norm(witness, T, norm)
    lower = max(dj, dk) if T.dim == cls.h else 0.0
    return DistanceReport(lower=lower, upper=dj + dk, measured=measured, witness=witness, norm=norm)


@dataclass(frozen=True)
class RitzInterval:
    lower: float
    upper: float
    value: float


def ritz_value_bounds(S: OrthonormalBasis, cls: AdmissibleClass) -> list[RitzInterval]:
    """Enclosures for the Ritz values of a member.

    For ``i <= j`` the Ritz value equals ``lam_i``; for ``j < i <= h`` it
    lies in ``[lam_{i+k-h}, lam_i]``, an interval of width at most the
    cluster spread.
    """
    if not is_member(S, cls):
        raise MembershipError("ritz_value_bounds requires a class member")
    model, env = cls.model, cls.env
    j, h, k = env.j, env.h, env.k
    lam = model.lam
    ritz = np.linalg.eigvalsh(_adj(S.data) @ model.A @ S.data)[::-1]
    eq_tol = env.delta * 1e-6 + 1e-10
    slack = 1e-10
    out = []
    for i in range(1, h + 1):
        value = float(ritz[i - 1])
        if i <= j:
            lo = hi = float(lam[i - 1])
            if abs(value - lo) > eq_tol:
                raise AssertionError(f"ritz[{i}] = {value} != lam[{i}] = {lo}")
        else:
            lo, hi = float(lam[i + k - h - 1]), float(lam[i - 1])
            if not (lo - slack <= value <= hi + slack):
                raise AssertionError(f"ritz[{i}] = {value} outside [{lo}, {hi}]")
            if not (-slack <= hi - value <= env.delta + slack):
                raise AssertionError(f"lam[{i}] - ritz[{i}] = {hi - value} exceeds spread {env.delta}")
        out.append(RitzInterval(lower=lo, upper=hi, value=value))
    return out


@dataclass(frozen=True)
class LowRankReport:
    error: float
    lower: float
    upper: float


def lowrank_error_report(S: OrthonormalBasis, cls: AdmissibleClass, norm: NormKind) -> LowRankReport:
    """Sandwich for the compression error of a member.

    ``||A - A_h|| <= ||A - P_S A P_S|| <= ||A - A_h|| + ||diag(delta x (k-j))||``,
    valid under ``lam_k >= 0``.
    """
    if not is_member(S, cls):
        raise MembershipError("lowrank_error_report requires a class member")
    model, env = cls.model, cls.env
    if model.lam[env.k - 1] < 0:
        raise DomainError(f"lam_k = {model.lam[env.k - 1]} < 0: sandwich not applicable")
    A = model.A
    comp = S.data @ ((_adj(S.data) @ A) @ S.data) @ _adj(S.data)
    error = matrix_norm(A - comp, norm)
    spectral = norm is NormKind.SPECTRAL
    lower = truncation_error(model, env.h, spectral=spectral)
    pad = env.delta if spectral else env.delta * math.sqrt(env.k - env.j)
    upper = lower + pad
    if not (lower - 1e-9 <= error <= upper + 1e-9):
        raise AssertionError(f"sandwich violated: {lower} <= {error} <= {upper}")
    return LowRankReport(error=error, lower=lower, upper=upper)


def invariance_defects(S: OrthonormalBasis, cls: AdmissibleClass) -> tuple[float, float]:
    """Commutator and residual norms of a member: both are at most the spread."""
    if not is_member(S, cls):
        raise MembershipError("invariance_defects requires a class member")
    A = cls.model.A
    AS = A @ S.data
    P_SA = S.data @ (_adj(S.data) @ A)
    commutator = float(np.linalg.norm(P_SA - _adj(P_SA), 2))
    residual = float(np.linalg.norm(AS - S.data @ (_adj(S.data) @ AS), 2))
    slack = 1e-9
    if commutator > cls.env.delta + slack or residual > cls.env.delta + slack:
        raise AssertionError(
            f"invariance defect exceeds spread: commutator={commutator}, "
            f"residual={residual}, delta={cls.env.delta}"
        )
    return commutator, residual


@dataclass(frozen=True)
class CompressionComparison:
    eig_deviation: float
    eig_deviation_bound: float
    error: float
    error_bound: float


def _padded_top_eigs(M: np.ndarray, B: OrthonormalBasis, h: int, n: int) -> np.ndarray:
    """Top ``h`` eigenvalues of ``P_B M P_B`` as an ``n x n`` matrix."""
    w = np.linalg.eigvalsh(_adj(B.data) @ M @ B.data)[::-1]
    full = np.concatenate([w, np.zeros(n - w.size)])
    return np.sort(full)[::-1][:h]


def perturbed_compression_bounds(
    S: OrthonormalBasis, T: OrthonormalBasis, cls: AdmissibleClass
) -> CompressionComparison:
    """Quality of ``P_T A P_T`` when ``T`` is close to the member ``S``.

    Eigenvalue deviation is bounded by
    ``tan(theta_max) (2 delta + sin(theta_max) ||A||_2)`` and the
    compression error by ``||A - A_h||_2 + delta + 2 sin(theta_max) ||A||_2``.
    """
    if not is_member(S, cls):
        raise MembershipError("perturbed_compression_bounds requires a class member")
    if T.dim != cls.h:
        raise ValueError(f"dim T = {T.dim} != h = {cls.h}")
    model, env = cls.model, cls.env
    if model.lam[env.k - 1] < 0:
        raise DomainError(f"lam_k = {model.lam[env.k - 1]} < 0")
    theta_max = principal_angles(S, T).max_angle
    if theta_max >= np.pi / 2 - 1e-12:
        raise DomainError("theta_max(S, T) = pi/2: tangent term undefined")
    sin_t, tan_t = math.sin(theta_max), math.tan(theta_max)
    a_norm = float(np.abs(model.lam).max())
    n, h = model.n, cls.h
    eig_s = _padded_top_eigs(model.A, S, h, n)
    eig_t = _padded_top_eigs(model.A, T, h, n)
    eig_dev = float(np.abs(eig_s - eig_t).max())
    eig_bound = tan_t * (2 * env.delta + sin_t * a_norm)
    comp_t = T.data @ ((_adj(T.data) @ model.A) @ T.data) @ _adj(T.data)
    error = float(np.linalg.norm(model.A - comp_t, 2))
    error_bound = truncation_error(model, h, spectral=True) + env.delta + 2 * sin_t * a_norm
    slack = 1e-9
    if eig_dev > eig_bound + slack:
        raise AssertionError(f"eigenvalue deviation {eig_dev} exceeds bound {eig_bound}")
    if error > error_bound + slack:
        raise AssertionError(f"compression error {error} exceeds bound {error_bound}")
    return CompressionComparison(
        eig_deviation=eig_dev,
        eig_deviation_bound=eig_bound,
        error=error,
        error_bound=error_bound,
    )


def random_member(cls: AdmissibleClass, seed: int = 0) -> OrthonormalBasis:
    """Haar-random member: ``X_j`` plus ``h - j`` random directions drawn
    inside ``X_k`` orthogonal to ``X_j``."""
    rng = np.random.default_rng(seed)
    env = cls.env
    gap_dim = env.k - env.j
    C = rng.standard_normal((gap_dim, env.h - env.j))
    Xgap = cls.model.X[:, env.j:env.k]
    D, _ = np.linalg.qr(Xgap @ C)
    if env.j == 0:
        return OrthonormalBasis(D)
    return OrthonormalBasis(np.hstack([cls.Xj.data, D]))
