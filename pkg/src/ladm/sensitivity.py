"""Condition-number bounds for dominant-eigenspace and admissible-class
computation, Hausdorff-distance estimates, and the sharpness family."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .admissible import AdmissibleClass, nearest_admissible, random_member
from .errors import DomainError
from .geometry import NormKind, OrthonormalBasis, matrix_norm, sin_theta_norm
from .spectral import ClusterEnvelope, EigenModel, dominant_basis, eigendecompose


@dataclass(frozen=True)
class ConditionReport:
    """Upper bounds on the two condition numbers.

    ``dominant_upper`` is the classical ``1 / (lam_h - lam_{h+1})``;
    ``admissible_upper`` replaces it by the boundary gaps
    ``1 / (lam_j - lam_{j+1}) + 1 / (lam_k - lam_{k+1})`` (first term
    dropped for ``j = 0``), which stays small however tight the cluster is.
    """

    dominant_upper: float
    admissible_upper: float


def condition_bounds(model: EigenModel, env: ClusterEnvelope) -> ConditionReport:
    gap_h = model.gap(env.h)
    dominant = 1.0 / gap_h if gap_h > 0 else math.inf
    gap_j = model.gap(env.j)
    gap_k = model.gap(env.k)
    admissible = 1.0 / gap_k
    if env.j > 0:
        admissible += 1.0 / gap_j
    return ConditionReport(dominant_upper=dominant, admissible_upper=admissible)


def _require_domain(model: EigenModel, env: ClusterEnvelope):
    if env.j > 0 and model.gap(env.j) <= 0:
        raise DomainError(f"gap at j={env.j} vanishes")
    if model.gap(env.k) <= 0:
        raise DomainError(f"gap at k={env.k} vanishes")


def hausdorff_upper(model_a: EigenModel, model_b: EigenModel, env: ClusterEnvelope,
                    norm: NormKind) -> float:
    """Upper bound for the Hausdorff distance between the two admissible
    classes: the distances between the bracketing eigenspaces add up."""
    _require_domain(model_a, env)
    _require_domain(model_b, env)
    total = sin_theta_norm(dominant_basis(model_a, env.k), dominant_basis(model_b, env.k), norm)
    if env.j > 0:
        total += sin_theta_norm(dominant_basis(model_a, env.j), dominant_basis(model_b, env.j), norm)
    return total


def hausdorff_sampled(model_a: EigenModel, model_b: EigenModel, env: ClusterEnvelope,
                      norm: NormKind, samples: int = 20, seed: int = 0) -> float:
    """Sampled two-sided witness estimate of the Hausdorff distance.

    Members are drawn Haar-randomly in each class and matched through the
    constructive witness on the other side; the result underestimates the
    true Hausdorff distance (a statistical check, not a bound).
    """
    cls_a = AdmissibleClass.create(model_a, env)
    cls_b = AdmissibleClass.create(model_b, env)
    worst = 0.0
    for direction, (src, dst) in enumerate([(cls_a, cls_b), (cls_b, cls_a)]):
        for i in range(samples):
            member = random_member(src, seed=seed + 1000 * direction + i)
            witness = nearest_admissible(member, dst)
            worst = max(worst, sin_theta_norm(witness, member, norm))
    return worst


def davis_kahan_distance(model_a: EigenModel, model_b: EigenModel, ell: int,
                         norm: NormKind) -> tuple[float, float]:
    """Measured eigenspace distance and its perturbation bound.

    Bound: ``||A - B|| / (lam_ell(A) - lam_{ell+1}(A) - ||A - B||_2)``,
    valid while the perturbation stays below half the gap.
    """
    gap = model_a.gap(ell)
    diff = model_a.A - model_b.A
    diff_spec = matrix_norm(diff, NormKind.SPECTRAL)
    if not diff_spec < gap / 2:
        raise DomainError(f"perturbation {diff_spec:.3e} not below half the gap {gap / 2:.3e}")
    measured = sin_theta_norm(dominant_basis(model_a, ell), dominant_basis(model_b, ell), norm)
    bound = matrix_norm(diff, norm) / (gap - diff_spec)
    if measured > bound + 1e-9:
        raise AssertionError(f"measured {measured} exceeds perturbation bound {bound}")
    return measured, bound


@dataclass(frozen=True)
class SharpExample:
    """Pair of projector combinations whose class Hausdorff distance and
    norm difference have closed forms."""

    A: np.ndarray
    B: np.ndarray
    model_a: EigenModel
    model_b: EigenModel
    env: ClusterEnvelope
    exact_dh: float
    exact_normdiff: float


def sharp_example(n: int, j: int, h: int, k: int, alpha: float, beta: float,
                  theta_x: float, theta_y: float) -> SharpExample:
    """The sharpness family: ``A = alpha P_X + beta P_Y`` against the same
    combination built on rotated copies ``X'``, ``Y'`` with ``Y ⊥ X'`` and
    ``X ⊥ Y'``.

    Exact values: ``||A - B||_2 = max(alpha sin theta_x, beta sin theta_y)``
    and ``d_H = max(sin theta_x, sin theta_y)``; both are verified
    numerically before returning.
    """
    if not (2 <= j < h < k and 2 * k <= n):
        raise ValueError(f"need 2 <= j < h < k and 2k <= n, got j={j}, h={h}, k={k}, n={n}")
    if not alpha > beta > 0:
        raise ValueError("need alpha > beta > 0")
    if not (0 < theta_x < math.pi / 2 and 0 < theta_y < math.pi / 2):
        raise ValueError("rotation angles must lie strictly inside (0, pi/2)")
    E = np.eye(n)
    X = E[:, :j]
    Y = E[:, j:k]
    # rotate each basis vector into its own spare coordinate
    Xp = math.cos(theta_x) * X + math.sin(theta_x) * E[:, k:k + j]
    Yp = math.cos(theta_y) * Y + math.sin(theta_y) * E[:, k + j:2 * k]
    A = alpha * (X @ X.T) + beta * (Y @ Y.T)
    B = alpha * (Xp @ Xp.T) + beta * (Yp @ Yp.T)
    exact_dh = max(math.sin(theta_x), math.sin(theta_y))
    exact_normdiff = max(alpha * math.sin(theta_x), beta * math.sin(theta_y))
    numeric = float(np.linalg.norm(A - B, 2))
    if abs(numeric - exact_normdiff) > 1e-10:
        raise AssertionError(f"norm difference {numeric} != closed form {exact_normdiff}")
    model_a = eigendecompose(A)
    model_b = eigendecompose(B)
    env = ClusterEnvelope.from_model(model_a, j, h, k)
    upper = hausdorff_upper(model_a, model_b, env, NormKind.SPECTRAL)
    if upper < exact_dh - 1e-9:
        raise AssertionError(f"hausdorff upper bound {upper} below exact value {exact_dh}")
    return SharpExample(A=A, B=B, model_a=model_a, model_b=model_b, env=env,
                        exact_dh=exact_dh, exact_normdiff=exact_normdiff)
