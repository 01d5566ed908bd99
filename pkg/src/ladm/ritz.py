"""Rayleigh-Ritz extraction, the residual block partition, gap quantities,
and the residual/gap distance bounds to the admissible class."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import (
    NormKind,
    OrthonormalBasis,
    _adj,
    complete_basis,
    matrix_norm,
    sin_theta_norm,
)
from .spectral import ClusterEnvelope, EigenModel, dominant_basis


@dataclass(frozen=True)
class RitzPartition:
    """Blocks of ``A`` in the Ritz-adapted unitary frame.

    ``X1`` spans the top-``h`` Ritz space of the trial subspace, ``X2`` the
    rest of it, ``X3`` a unitary completion.  ``R11 | R12`` partition the
    full residual ``R = X3* A [X1 X2]`` after the first ``j`` columns;
    ``R1 = X3* A X1`` are the first ``h`` of those columns.
    """

    j: int
    h: int
    r: int
    X1: OrthonormalBasis
    X2: OrthonormalBasis
    X3: OrthonormalBasis
    L11: np.ndarray
    L12: np.ndarray
    L2: np.ndarray
    R11: np.ndarray
    R12: np.ndarray
    R2: np.ndarray
    A3: np.ndarray

    @property
    def ritz_values(self) -> np.ndarray:
        return np.concatenate([self.L11, self.L12, self.L2])

    @property
    def R1(self) -> np.ndarray:
        return np.hstack([self.R11, self.R12[:, : self.h - self.j]])

    @property
    def R(self) -> np.ndarray:
        return np.hstack([self.R11, self.R12])


def rayleigh_ritz(model: EigenModel, Q: OrthonormalBasis, h: int, env: ClusterEnvelope,
                  seed: int = 0) -> RitzPartition:
    """Rayleigh-Ritz on the trial space ``Q`` with target rank ``h``.

    Eigendecomposes the compression ``Q* A Q`` (descending), forms
    ``X1 = Q Omega_1`` and ``X2 = Q Omega_2``, completes with a seeded
    ``X3`` and assembles the residual blocks.  Partition invariants
    (orthonormal frame, congruence reassembly, ordering) are verified.
    """
    r = Q.dim
    if not (1 <= h <= r <= model.n):
        raise ValueError(f"need 1 <= h <= r <= n, got h={h}, r={r}, n={model.n}")
    j = env.j
    A = model.A
    G = _adj(Q.data) @ (A @ Q.data)
    G = (G + _adj(G)) / 2
    w, Omega = np.linalg.eigh(G)
    w, Omega = w[::-1], Omega[:, ::-1]
    X12 = Q.data @ Omega
    X1 = OrthonormalBasis(X12[:, :h])
    X2 = OrthonormalBasis(X12[:, h:])
    X3 = complete_basis(OrthonormalBasis(X12), seed=seed)
    AX12 = A @ X12
    R_all = _adj(X3.data) @ AX12
    A3 = _adj(X3.data) @ (A @ X3.data)
    A3 = (A3 + _adj(A3)) / 2
    part = RitzPartition(
        j=j, h=h, r=r,
        X1=X1, X2=X2, X3=X3,
        L11=w[:j].copy(), L12=w[j:h].copy(), L2=w[h:].copy(),
        R11=R_all[:, :j].copy(), R12=R_all[:, j:].copy(),
        R2=R_all[:, h:].copy(), A3=A3,
    )
    _check_partition(part, model, X12, w)
    return part


def _check_partition(part: RitzPartition, model: EigenModel, X12, w):
    frame = np.hstack([X12, part.X3.data])
    gram = _adj(frame) @ frame
    if np.linalg.norm(gram - np.eye(model.n), "fro") > 1e-10 * model.n:
        raise AssertionError("Ritz frame lost orthonormality")
    if np.any(np.diff(w) > 1e-12 * max(1.0, abs(w[0]) if w.size else 1.0)):
        raise AssertionError("Ritz values are not descending")
    # congruence reassembly against the block layout
    tilde = _adj(frame) @ (model.A @ frame)
    r = part.r
    rebuilt = np.zeros_like(tilde)
    rebuilt[:r, :r] = np.diag(w)
    rebuilt[r:, :r] = part.R
    rebuilt[:r, r:] = _adj(part.R)
    rebuilt[r:, r:] = part.A3
    err = np.linalg.norm(tilde - rebuilt, "fro")
    scale = max(np.linalg.norm(model.A, "fro"), 1e-300)
    if err > 1e-9 * scale:
        raise AssertionError(f"partition reassembly defect {err / scale:.3e}")


def _min_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    if a.size == 0 or b.size == 0:
        return math.inf
    return float(np.abs(a[:, None] - b[None, :]).min())


@dataclass(frozen=True)
class GapReport:
    tilde_gap: float
    hat_gap_1: float
    hat_gap_2: float
    gap_j: float
    gap_k: float
    estimated: bool = False

    def flagged_zero(self) -> list[str]:
        return [name for name in ("tilde_gap", "hat_gap_1", "hat_gap_2", "gap_j", "gap_k")
                if getattr(self, name) == 0.0]


def compute_gaps(part: RitzPartition, model: EigenModel, env: ClusterEnvelope,
                 lam_a3: np.ndarray | None = None, estimated: bool = False) -> GapReport:
    """Separations between Ritz blocks, the exact spectrum, and ``lam(A3)``.

    With ``estimated=True`` the unknown exact spectrum is replaced by Ritz
    values and ``lam(A3)`` (a practitioner's surrogate; clearly labelled in
    the report).  Zero gaps are allowed and flagged; bounds built on them
    come out infinite.
    """
    j, h, k = env.j, env.h, env.k
    lam = model.lam
    ritz = part.ritz_values
    if lam_a3 is None:
        lam_a3 = np.linalg.eigvalsh(part.A3)[::-1]
    if estimated:
        tail_j = np.concatenate([ritz[j:], lam_a3])
        tail_k = np.concatenate([ritz[k:], lam_a3]) if k < part.r else lam_a3
    else:
        tail_j = lam[j:]
        tail_k = lam[k:]
    lead = ritz if estimated else lam
    return GapReport(
        tilde_gap=_min_abs_diff(ritz[:j], tail_j) if j >= 1 else math.inf,
        hat_gap_1=_min_abs_diff(ritz[:h], tail_k),
        hat_gap_2=_min_abs_diff(ritz[h:], tail_k),
        gap_j=_min_abs_diff(lead[:j], lam_a3) if j >= 1 else math.inf,
        gap_k=_min_abs_diff(lead[:k], lam_a3),
        estimated=estimated,
    )


def _ratio(num: float, gap: float) -> float:
    # a vanished gap voids the Sylvester separation argument entirely,
    # so the bound is infinite even over a zero residual block
    return num / gap if gap > 0 else math.inf


@dataclass(frozen=True)
class RRBoundReport:
    bound_x1: float
    bound_q: float
    branch: str
    class_dim_q: int
    generic_ok: bool


def admissible_distance_bounds(part: RitzPartition, model: EigenModel, env: ClusterEnvelope,
                               norm: NormKind, gaps: GapReport | None = None) -> RRBoundReport:
    """Residual/gap bounds for the distances from the Ritz spaces to the class.

    ``bound_x1`` bounds the distance from the top-``h`` Ritz space to the
    ``h``-class: ``||R11|| / tilde_gap + ||R1|| / hat_gap_1``.  ``bound_q``
    bounds the distance from the whole trial space: for ``k <= r`` (and the
    generic projection condition) it is ``||R|| (1/gap_j + 1/gap_k)`` to the
    ``h``-class; for ``r < k`` it is
    ``||R|| / gap_j + ||R1|| / hat_gap_1 + ||R2|| / hat_gap_2`` to the
    ``r``-class, the last term omitted when ``r = h``.
    """
    if gaps is None:
        gaps = compute_gaps(part, model, env)
    k, r, h = env.k, part.r, part.h
    bound_x1 = _ratio(matrix_norm(part.R11, norm), gaps.tilde_gap) + _ratio(
        matrix_norm(part.R1, norm), gaps.hat_gap_1
    )
    r_norm = matrix_norm(part.R, norm)
    if k <= r:
        Xk = dominant_basis(model, k)
        frame = np.hstack([part.X1.data, part.X2.data])
        sv = np.linalg.svd(_adj(frame) @ Xk.data, compute_uv=False)
        generic_ok = bool(np.sum(sv > 1e-12) >= h)
        bound_q = (
            _ratio(r_norm, gaps.gap_j) + _ratio(r_norm, gaps.gap_k) if generic_ok else math.inf
        )
        return RRBoundReport(bound_x1=bound_x1, bound_q=bound_q, branch="k_le_r",
                             class_dim_q=h, generic_ok=generic_ok)
    bound_q = _ratio(r_norm, gaps.gap_j) + _ratio(matrix_norm(part.R1, norm), gaps.hat_gap_1)
    if r > h:
        bound_q += _ratio(matrix_norm(part.R2, norm), gaps.hat_gap_2)
    return RRBoundReport(bound_x1=bound_x1, bound_q=bound_q, branch="r_lt_k",
                         class_dim_q=r, generic_ok=True)


@dataclass(frozen=True)
class AngleBound:
    name: str
    lhs: float
    rhs: float
    applicable: bool


def residual_angle_bounds(part: RitzPartition, model: EigenModel, env: ClusterEnvelope,
                          norm: NormKind, gaps: GapReport | None = None) -> list[AngleBound]:
    """The five residual/gap bounds on sines of angles between the exact
    dominant eigenspaces and the Ritz spaces; the measured left-hand sides
    are computed directly."""
    if gaps is None:
        gaps = compute_gaps(part, model, env)
    j, k, r, h = env.j, env.k, part.r, part.h
    Xj = dominant_basis(model, j)
    Xk = dominant_basis(model, k)
    Qspace = OrthonormalBasis(np.hstack([part.X1.data, part.X2.data]))
    d_j_q = sin_theta_norm(Xj, Qspace, norm) if j else 0.0
    d_j_x1 = sin_theta_norm(Xj, part.X1, norm) if j else 0.0
    d_k_x1 = sin_theta_norm(Xk, part.X1, norm)
    d_k_q = sin_theta_norm(Xk, Qspace, norm)
    r_norm = matrix_norm(part.R, norm)
    r1_norm = matrix_norm(part.R1, norm)
    out = [
        AngleBound("sin(Xj, Q) <= |R|/gap_j", d_j_q, _ratio(r_norm, gaps.gap_j), j >= 1),
        AngleBound("sin(Xj, X1) <= |R11|/tilde_gap",
                   d_j_x1, _ratio(matrix_norm(part.R11, norm), gaps.tilde_gap), j >= 1),
        AngleBound("sin(Xk, X1) <= |R1|/hat_gap_1", d_k_x1, _ratio(r1_norm, gaps.hat_gap_1), True),
        AngleBound("sin(Xk, Q) <= |R|/gap_k", d_k_q, _ratio(r_norm, gaps.gap_k), k <= r),
        AngleBound(
            "sin(Xk, Q) <= |R1|/hat_gap_1 + |R2|/hat_gap_2",
            d_k_q,
            _ratio(r1_norm, gaps.hat_gap_1)
            + (_ratio(matrix_norm(part.R2, norm), gaps.hat_gap_2) if r > h else 0.0),
            r < k,
        ),
    ]
    return out


def nakatsukasa_bound(part: RitzPartition, model: EigenModel, env: ClusterEnvelope,
                      lam_a3: np.ndarray | None = None) -> float:
    """Residual bound for ``sin(theta_max)`` between the exact top-``h``
    eigenspace and the top-``h`` Ritz space, used as the comparison curve.

    ``(||R||_2 / Gap) sqrt(1 + ||R2||_2^2 / gap^2)`` with
    ``Gap = min|lam_{1..h} - lam(A3)|`` and
    ``gap = min|lam_{1..h} - ritz_{h+1..r}|``; a zero gap gives infinity.
    """
    h = part.h
    lam_head = model.lam[:h]
    if lam_a3 is None:
        lam_a3 = np.linalg.eigvalsh(part.A3)[::-1]
    big_gap = _min_abs_diff(lam_head, lam_a3)
    small_gap = _min_abs_diff(lam_head, part.L2)
    r_norm = matrix_norm(part.R, NormKind.SPECTRAL)
    r2_norm = matrix_norm(part.R2, NormKind.SPECTRAL)
    if big_gap == 0.0:
        return math.inf
    if math.isinf(small_gap) or r2_norm == 0.0:
        factor = 1.0
    elif small_gap == 0.0:
        return math.inf
    else:
        factor = math.sqrt(1.0 + (r2_norm / small_gap) ** 2)
    return r_norm / big_gap * factor


@dataclass(frozen=True)
class CompressionReport:
    """Everything the experiment harness needs from one trial space,
    computed without the explicit unitary completion.

    Residual block norms use that ``X3 X3* = I - P_Q``, so every norm of
    ``X3* M`` equals the norm of ``(I - P_Q) M``; the spectrum of ``A3``
    comes from the complement compression with the trial directions
    deflated to a far-away constant.
    """

    ritz_values: np.ndarray
    X1: OrthonormalBasis
    Xr: OrthonormalBasis
    norm_R: float
    norm_R1: float
    norm_R11: float
    norm_R2: float
    lam_a3: np.ndarray
    gaps: GapReport
    bound_x1: float
    bound_q: float
    branch: str
    class_dim_q: int
    nakatsukasa: float


def _proj_out(Q: np.ndarray, M: np.ndarray) -> np.ndarray:
    return M - Q @ (_adj(Q) @ M)


def complement_spectrum(model: EigenModel, Q: OrthonormalBasis) -> np.ndarray:
    """Eigenvalues of ``A`` compressed to ``range(Q)^perp``, descending.

    Computed from ``(I - P) A (I - P) + c P`` whose spectrum is exactly the
    wanted one plus ``r`` copies of ``c``; choosing ``c`` above the top of
    the spectrum lets the copies be sliced off deterministically.
    """
    lam = model.lam
    c = float(lam[0] + 1.0 + (lam[0] - lam[-1]))
    Qd = Q.data
    AQ = model.A @ Qd
    G = _adj(Qd) @ AQ
    B = model.A - Qd @ _adj(AQ) - AQ @ _adj(Qd) + Qd @ (G + c * np.eye(Q.dim)) @ _adj(Qd)
    B = (B + _adj(B)) / 2
    w = np.linalg.eigvalsh(B)
    return w[: model.n - Q.dim][::-1].copy()


def compression_report(model: EigenModel, Q: OrthonormalBasis, h: int, env: ClusterEnvelope,
                       norm: NormKind = NormKind.SPECTRAL) -> CompressionReport:
    """Lean equivalent of ``rayleigh_ritz`` + ``compute_gaps`` +
    ``admissible_distance_bounds`` + ``nakatsukasa_bound`` for large ``n``."""
    r = Q.dim
    j, k = env.j, env.k
    if not (1 <= h <= r <= model.n):
        raise ValueError(f"need 1 <= h <= r <= n, got h={h}, r={r}")
    A = model.A
    G = _adj(Q.data) @ (A @ Q.data)
    G = (G + _adj(G)) / 2
    w, Omega = np.linalg.eigh(G)
    w, Omega = w[::-1], Omega[:, ::-1]
    Xr = OrthonormalBasis(Q.data @ Omega)
    X1 = OrthonormalBasis(Xr.data[:, :h])
    AX = A @ Xr.data
    resid = _proj_out(Q.data, AX)
    norm_R = matrix_norm(resid, norm)
    norm_R1 = matrix_norm(resid[:, :h], norm)
    norm_R11 = matrix_norm(resid[:, :j], norm)
    norm_R2 = matrix_norm(resid[:, h:], norm)
    lam_a3 = complement_spectrum(model, Q)
    lam = model.lam
    gaps = GapReport(
        tilde_gap=_min_abs_diff(w[:j], lam[j:]) if j >= 1 else math.inf,
        hat_gap_1=_min_abs_diff(w[:h], lam[k:]),
        hat_gap_2=_min_abs_diff(w[h:], lam[k:]),
        gap_j=_min_abs_diff(lam[:j], lam_a3) if j >= 1 else math.inf,
        gap_k=_min_abs_diff(lam[:k], lam_a3),
    )
    bound_x1 = _ratio(norm_R11, gaps.tilde_gap) + _ratio(norm_R1, gaps.hat_gap_1)
    if k <= r:
        sv = np.linalg.svd(_adj(Xr.data) @ model.X[:, :k], compute_uv=False)
        generic_ok = bool(np.sum(sv > 1e-12) >= h)
        bound_q = (
            _ratio(norm_R, gaps.gap_j) + _ratio(norm_R, gaps.gap_k) if generic_ok else math.inf
        )
        branch, class_dim_q = "k_le_r", h
    else:
        bound_q = _ratio(norm_R, gaps.gap_j) + _ratio(norm_R1, gaps.hat_gap_1)
        if r > h:
            bound_q += _ratio(norm_R2, gaps.hat_gap_2)
        branch, class_dim_q = "r_lt_k", r
    # spectral norms for the comparison bound regardless of the requested norm
    r_spec = matrix_norm(resid, NormKind.SPECTRAL)
    r2_spec = matrix_norm(resid[:, h:], NormKind.SPECTRAL)
    big_gap = _min_abs_diff(lam[:h], lam_a3)
    small_gap = _min_abs_diff(lam[:h], w[h:])
    if big_gap == 0.0 or (small_gap == 0.0 and r2_spec > 0.0):
        nakats = math.inf
    else:
        factor = 1.0 if (math.isinf(small_gap) or r2_spec == 0.0) else math.sqrt(
            1.0 + (r2_spec / small_gap) ** 2
        )
        nakats = r_spec / big_gap * factor if big_gap > 0 else math.inf
    return CompressionReport(
        ritz_values=w, X1=X1, Xr=Xr,
        norm_R=norm_R, norm_R1=norm_R1, norm_R11=norm_R11, norm_R2=norm_R2,
        lam_a3=lam_a3, gaps=gaps,
        bound_x1=bound_x1, bound_q=bound_q, branch=branch, class_dim_q=class_dim_q,
        nakatsukasa=nakats,
    )
