"""Subspace iteration, block Krylov spaces, polynomial filters and the
filtered proximity bound to the admissible class."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .admissible import AdmissibleClass
from .errors import DomainError, RankCollapseError, RankDeficiencyError
from .geometry import (
    NormKind,
    OrthonormalBasis,
    _adj,
    orthonormalize,
    tangent_matrix,
)


@dataclass(frozen=True)
class PolynomialFilter:
    """Scalar polynomial evaluated entrywise on eigenvalues.

    ``monomial(q)`` is ``x^q``; ``chebyshev(ell, shift, scale)`` is
    ``T_ell((x - shift) / scale)`` evaluated through the trig closed form
    on ``[-1, 1]`` and the hyperbolic one outside (the three-term
    recurrence is unstable there for large degree); ``explicit(c)`` is an
    ordinary polynomial with ascending coefficients.
    """

    kind: str
    params: tuple

    @staticmethod
    def monomial(q: int) -> "PolynomialFilter":
        if q < 1:
            raise ValueError("monomial filter needs q >= 1")
        return PolynomialFilter("monomial", (int(q),))

    @staticmethod
    def chebyshev(ell: int, shift: float, scale: float) -> "PolynomialFilter":
        if ell < 0:
            raise ValueError("chebyshev degree must be >= 0")
        if scale <= 0:
            raise ValueError(f"chebyshev scale must be positive, got {scale}")
        return PolynomialFilter("chebyshev", (int(ell), float(shift), float(scale)))

    @staticmethod
    def explicit(coefficients) -> "PolynomialFilter":
        c = tuple(float(v) for v in coefficients)
        if not c:
            raise ValueError("explicit filter needs at least one coefficient")
        return PolynomialFilter("explicit", c)

    @property
    def degree(self) -> int:
        if self.kind == "monomial":
            return self.params[0]
        if self.kind == "chebyshev":
            return self.params[0]
        return len(self.params) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "monomial":
            return x ** self.params[0]
        if self.kind == "chebyshev":
            ell, shift, scale = self.params
            arg = (x - shift) / scale
            out = np.empty_like(arg)
            inside = np.abs(arg) <= 1.0 + 1e-8  # guard band around the switch
            a_in = np.clip(arg[inside], -1.0, 1.0)
            out[inside] = np.cos(ell * np.arccos(a_in))
            a_out = arg[~inside]
            out[~inside] = np.sign(a_out) ** ell * np.cosh(ell * np.arccosh(np.abs(a_out)))
            return out if out.shape else float(out)
        coeffs = np.asarray(self.params)
        return np.polynomial.polynomial.polyval(x, coeffs)

    def apply_to_subspace(self, model, W: OrthonormalBasis) -> OrthonormalBasis:
        """Orthonormal basis of ``phi(A)(range(W))`` through the eigenbasis.

        Values are rescaled by ``max |phi(lam_i)|`` before the product, so
        only relative underflow can drop directions (reported by the rank
        of the result).
        """
        vals = np.atleast_1d(self(model.lam))
        scale = np.abs(vals).max()
        if scale == 0:
            return OrthonormalBasis.empty(model.n)
        coords = _adj(model.X) @ W.data
        return orthonormalize(model.X @ ((vals / scale)[:, None] * coords))


@dataclass(frozen=True)
class OversamplingSplit:
    """How many directions to sacrifice against the head (``p1``) and the
    tail (``p2``) of the spectrum; ``p1 + p2 <= r - h`` is checked where
    the trial dimension ``r`` is known."""

    p1: int
    p2: int

    def __post_init__(self):
        if self.p1 < 0 or self.p2 < 0:
            raise ValueError("oversampling counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.p1 + self.p2


def sim_iterate(model, W0: OrthonormalBasis, q: int, min_dim: int | None = None,
                progress=None) -> OrthonormalBasis:
    """``q`` steps of subspace iteration: multiply by ``A``, re-orthonormalise.

    Re-orthonormalisation happens every step; otherwise powers of ``A``
    leave the float range long before interesting iteration counts.
    Dimension may drop only when ``A`` annihilates directions; a drop below
    ``min_dim`` raises :class:`RankCollapseError`.  ``progress`` (if given)
    is called with the completed step count after each step.
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    W = W0
    for step in range(q):
        W = orthonormalize(model.A @ W.data)
        if W.dim < W0.dim:
            warnings.warn(f"subspace iteration lost rank: {W.dim} < {W0.dim}", stacklevel=2)
        if min_dim is not None and W.dim < min_dim:
            raise RankCollapseError(f"iterate collapsed to dimension {W.dim} < {min_dim}")
        if progress is not None:
            progress(step + 1)
    return W


def krylov_step(A, block: np.ndarray, basis: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """One block extension of a Krylov basis: multiply, orthogonalise twice
    against the accumulated basis, rank-truncate.

    Truncation is relative to the block norm before projection, so that a
    block already contained in the basis is dropped entirely; the result
    never grows past the ambient dimension.
    """
    raw = A @ block
    scale = np.linalg.norm(raw, 2)
    if scale == 0.0:
        return raw[:, :0]
    for _ in range(2):
        raw = raw - basis @ (_adj(basis) @ raw)
    room = raw.shape[0] - basis.shape[1]
    if room <= 0:
        return raw[:, :0]
    U, s, _ = np.linalg.svd(raw, full_matrices=False)
    keep = min(int(np.sum(s > rank_tol * scale)), room)
    return U[:, :keep]


def krylov_subspace(model, W0: OrthonormalBasis, q: int, rank_tol: float = 1e-10,
                    progress=None) -> OrthonormalBasis:
    """Orthonormal basis of the block Krylov space ``W + A W + ... + A^q W``.

    Blocked classical Gram-Schmidt with a second pass against the
    accumulated basis; new blocks are rank-truncated at ``rank_tol`` times
    their pre-projection norm.  The dimension is the numerical rank and may
    be smaller than ``(q + 1) r``.
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    basis = W0.data
    block = W0.data
    for step in range(q):
        block = krylov_step(model.A, block, basis, rank_tol)
        if block.shape[1] == 0:
            break
        basis = np.hstack([basis, block])
        if progress is not None:
            progress(step + 1)
    return OrthonormalBasis(basis)


def construct_Hp(W: OrthonormalBasis, split: OversamplingSplit, cls: AdmissibleClass) -> OrthonormalBasis:
    """The reduced trial space used by the filtered proximity bound.

    Rows of the constraint matrix are the eigenvector coordinates
    ``j+1 .. j+p1`` and ``k+1 .. k+p2`` (starting at ``j+1``: knocking out
    ``x_j`` itself would cut into the head block the bound must keep).
    The result spans ``W ∩ span{x_{j+1..j+p1}, x_{k+1..k+p2}}^perp`` and has
    dimension ``r - p1 - p2``.
    """
    model, env = cls.model, cls.env
    j, h, k = env.j, env.h, env.k
    r = W.dim
    if not (h <= r < k):
        raise ValueError(f"need h <= dim W < k, got h={h}, dim W={r}, k={k}")
    if split.total > r - h:
        raise ValueError(f"p1 + p2 = {split.total} exceeds r - h = {r - h}")
    if k + split.p2 > model.n:
        raise ValueError(f"k + p2 = {k + split.p2} exceeds n = {model.n}")
    sv_k = np.linalg.svd(_adj(model.X[:, :k]) @ W.data, compute_uv=False)
    if sv_k.size < r or sv_k[r - 1] <= 1e-12:
        raise RankDeficiencyError("genericity failure: rank(X_k* W) < dim W")
    if split.total == 0:
        return W
    rows = np.hstack([model.X[:, j:j + split.p1], model.X[:, k:k + split.p2]])
    F = _adj(rows) @ W.data
    sv = np.linalg.svd(F, compute_uv=False)
    if sv.size < split.total or sv[split.total - 1] <= 1e-12:
        raise RankDeficiencyError("genericity failure: constraint matrix F is rank deficient")
    _, _, Vh = np.linalg.svd(F)
    Z = _adj(Vh)[:, split.total:]
    return orthonormalize(W.data @ Z)


def _coeff(filt: PolynomialFilter, lam: np.ndarray, lo: int, hi: int | None, invert: bool) -> float:
    """``max_i |phi(lam_i)|`` over ``lo < i <= hi`` (1-based), or the inverse
    of the minimum when ``invert``."""
    vals = np.abs(np.atleast_1d(filt(lam[lo:hi])))
    if vals.size == 0:
        return 0.0
    if invert:
        m = vals.min()
        return math.inf if m == 0 else 1.0 / m
    return float(vals.max())


@dataclass(frozen=True)
class FilterBound:
    term_j: float
    term_k: float
    total: float
    hp: OrthonormalBasis


def filtered_distance_bound(
    W: OrthonormalBasis,
    split: OversamplingSplit,
    filt: PolynomialFilter,
    cls: AdmissibleClass,
    norm: NormKind,
) -> FilterBound:
    """Upper bound for the distance from ``phi(A)(W)`` to the admissible class.

    ``||phi(L_j)^-1|| ||phi(L_{j+p1,perp})|| ||tan Theta(X_j, H_p)|| +
    ||phi(L_k)^-1|| ||phi(L_{k+p2,perp})|| ||tan Theta(X_k, H_p)||``,
    with the first term omitted for ``j = 0`` and the second for
    ``k = rank(A)`` with ``phi(0) = 0``.
    """
    model, env = cls.model, cls.env
    j, k = env.j, env.k
    lam = model.lam
    inv_k = _coeff(filt, lam, 0, k, invert=True)
    if math.isinf(inv_k):
        raise DomainError("phi vanishes on the leading spectrum: phi(Lambda_k) singular")
    hp = construct_Hp(W, split, cls)
    if j > 0:
        Xj = OrthonormalBasis(model.X[:, :j])
        Xj_perp = OrthonormalBasis(model.X[:, j:])
        tan_j = _tan_norm(tangent_matrix(Xj, Xj_perp, hp), norm)
        term_j = _coeff(filt, lam, 0, j, invert=True) * _coeff(filt, lam, j + split.p1, None, invert=False) * tan_j
    else:
        term_j = 0.0
    omit_k = k == model.rank() and abs(float(np.atleast_1d(filt(np.zeros(1)))[0])) == 0.0
    if not omit_k:
        Xk = OrthonormalBasis(model.X[:, :k])
        Xk_perp = OrthonormalBasis(model.X[:, k:])
        tan_k = _tan_norm(tangent_matrix(Xk, Xk_perp, hp), norm)
        term_k = inv_k * _coeff(filt, lam, k + split.p2, None, invert=False) * tan_k
    else:
        term_k = 0.0
    return FilterBound(term_j=term_j, term_k=term_k, total=term_j + term_k, hp=hp)


def _tan_norm(T: np.ndarray, norm: NormKind) -> float:
    if T.size == 0:
        return 0.0
    if norm is NormKind.SPECTRAL:
        return float(np.linalg.norm(T, 2))
    return float(np.linalg.norm(T, "fro"))


def chebyshev_filter(cls: AdmissibleClass, p2: int, degree: int) -> PolynomialFilter:
    """Chebyshev filter anchored at the spectrum tail.

    ``shift = lam_n`` and ``scale = lam_{k+p2+1} - lam_n``, so the filter
    equals 1 at ``lam_{k+p2+1}`` and grows monotonically above it; it is
    invertible on the leading ``k`` eigenvalues by construction.
    """
    lam = cls.model.lam
    k, n = cls.env.k, cls.model.n
    if k + p2 + 1 > n:
        raise ValueError(f"k + p2 + 1 = {k + p2 + 1} exceeds n = {n}")
    shift = float(lam[-1])
    scale = float(lam[k + p2] - lam[-1])
    if scale <= 0:
        raise DomainError(f"chebyshev scale {scale} <= 0: spectrum tail is flat")
    return PolynomialFilter.chebyshev(degree, shift, scale)
