"""Experiment harness: reproduces the five clustered-spectrum figures at
desk or paper scale and emits one CSV per plot plus a summary.

Figure families:

* figures 1-3: subspace iteration on an exponential-decay spectrum with
  varying spread/gap; per iteration the trial space, its Ritz extraction,
  all distance bounds and the step-length diagnostics are recorded;
* figures 4-5: block Krylov accumulation (exponential and linear decay),
  Chebyshev filter bounds, and the same Ritz-space diagnostics.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .admissible import AdmissibleClass, nearest_admissible
from .errors import DomainError, LadmError, RankDeficiencyError
from .filters import (
    OversamplingSplit,
    chebyshev_filter,
    construct_Hp,
    filtered_distance_bound,
    krylov_step,
)
from .geometry import (
    NormKind,
    OrthonormalBasis,
    _adj,
    orthonormalize,
    sin_theta_max,
    tangent_matrix,
)
from .ritz import compression_report
from .spectral import (
    ClusterEnvelope,
    DecaySpec,
    EigenModel,
    SpectrumSpec,
    dominant_basis,
    gaussian_subspace,
    synth_model,
)

log = logging.getLogger("ladm.experiments")

SLACK = 1e-9
THRESHOLDS = (1e-2, 1e-4, 1e-8)


@dataclass(frozen=True)
class ExperimentConfig:
    spec: SpectrumSpec
    method: str  # "sim" or "krylov"
    r: int
    q_max: int
    splits: tuple[OversamplingSplit, ...]
    seed: int
    scale: str  # "desk" or "paper"
    figure: int
    out_dir: Path | None = None

    def __post_init__(self):
        if self.method not in ("sim", "krylov"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.spec.h <= self.r < self.spec.k):
            raise ValueError(f"need h <= r < k, got h={self.spec.h}, r={self.r}, k={self.spec.k}")
        for s in self.splits:
            if s.total > self.r - self.spec.h:
                raise ValueError(f"split {s} exceeds r - h = {self.r - self.spec.h}")


_FIGURES = {
    1: dict(method="sim", decay=("exponential", (10.0, 0.01)), delta=1e-3, gamma=None),
    2: dict(method="sim", decay=("exponential", (10.0, 0.01)), delta=1e-4, gamma=None),
    3: dict(method="sim", decay=("exponential", (10.0, 0.01)), delta=1e-3, gamma=0.4),
    4: dict(method="krylov", decay=("exponential", (10.0, 0.01)), delta=1e-3, gamma=None),
    5: dict(method="krylov", decay=("linear", (10.0, 1.0)), delta=1e-3, gamma=None),
}

_J, _H, _K, _R = 5, 10, 30, 20
_DEFAULT_SPLITS = (OversamplingSplit(0, 10), OversamplingSplit(5, 5), OversamplingSplit(10, 0))


def preset_config(figure: int, scale: str = "desk", seed: int = 0,
                  q_max: int | None = None, out_dir=None) -> ExperimentConfig:
    """Configuration for one of the five figure presets."""
    if figure not in _FIGURES:
        raise ValueError(f"figure must be 1..5, got {figure}")
    if scale not in ("desk", "paper"):
        raise ValueError(f"scale must be 'desk' or 'paper', got {scale!r}")
    fig = _FIGURES[figure]
    n = 400 if scale == "desk" else 3000
    decay = DecaySpec(kind=fig["decay"][0], params=fig["decay"][1])
    center = None
    if fig["gamma"] is not None:
        # pin the lower boundary gap to the requested value
        lam_k1 = float(decay.values(np.array([_K + 1.0]), n)[0])
        center = lam_k1 + fig["gamma"] + fig["delta"] / 2
    spec = SpectrumSpec(n=n, j=_J, h=_H, k=_K, decay=decay, delta=fig["delta"],
                        cluster_center=center, seed=seed)
    if q_max is None:
        if fig["method"] == "sim":
            q_max = 300 if scale == "desk" else 170
        else:
            q_max = 25 if scale == "desk" else 40
    return ExperimentConfig(spec=spec, method=fig["method"], r=_R, q_max=q_max,
                            splits=_DEFAULT_SPLITS, seed=seed, scale=scale,
                            figure=figure, out_dir=Path(out_dir) if out_dir else None)


# ----------------------------------------------------------------------
# curve container


@dataclass
class CurveSet:
    figure: int
    meta: dict
    plots: dict[str, tuple[list[str], list[list[float]]]] = field(default_factory=dict)

    def add_plot(self, name: str, columns: list[str], rows: list[list[float]]):
        self.plots[name] = (columns, rows)

    def column(self, plot: str, name: str) -> np.ndarray:
        columns, rows = self.plots[plot]
        idx = columns.index(name)
        return np.array([row[idx] for row in rows])

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, (columns, rows) in sorted(self.plots.items()):
            path = out_dir / f"fig{self.figure}_{name}.csv"
            lines = [",".join(columns)]
            lines += [",".join(_fmt(v) for v in row) for row in rows]
            path.write_text("\n".join(lines) + "\n")
            paths.append(path)
        meta_path = out_dir / f"fig{self.figure}_meta.txt"
        meta_path.write_text(
            "".join(f"{key} = {value}\n" for key, value in sorted(self.meta.items()))
        )
        paths.append(meta_path)
        return paths

    def violations(self) -> int:
        total = 0
        for name, (columns, rows) in self.plots.items():
            arr = {c: np.array([row[i] for row in rows]) for i, c in enumerate(columns)}
            for bound_col, measured_col in validity_pairs(columns):
                total += _count_violations(arr[bound_col], arr[measured_col])
        return total


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _count_violations(bound: np.ndarray, measured: np.ndarray) -> int:
    ok = np.isfinite(bound) & np.isfinite(measured)
    return int(np.sum(bound[ok] + SLACK < measured[ok]))


_PAIR_RULES = [
    ("sum_bound_wq", "witness_h_wq"),
    ("sum_bound_kq", "witness_h_kq"),
    ("bound_amd3_wq", "witness_r_wq"),
    ("bound_amd1_vq", "witness_h_vq"),
    ("bound_nakatsukasa_vq", "d_xh_vq"),
    ("step_len", "paso1_lhs"),
    ("step_len", "paso2_lhs"),
]


def validity_pairs(columns: list[str]) -> list[tuple[str, str]]:
    """(bound column, measured column) pairs implied by a CSV header.

    Filter bounds control the distance to the class; their certified
    measured partner is the witness built through the reduced space
    (``witness_filter_*``), not the plain trial-space witness, whose decay
    rate the bound may legitimately outrun.
    """
    pairs = [(b, m) for b, m in _PAIR_RULES if b in columns and m in columns]
    for col in columns:
        if col.startswith("bound_filter_"):
            partner = "witness_filter_" + col[len("bound_filter_"):]
            if partner in columns:
                pairs.append((col, partner))
    return pairs


# ----------------------------------------------------------------------
# per-figure pipelines


def _clamp(x: float) -> float:
    if math.isnan(x):
        return x
    return min(float(x), 1.0)


def _dist(S: OrthonormalBasis, T: OrthonormalBasis) -> float:
    return _clamp(sin_theta_max(S, T))


def _witness_distance(T: OrthonormalBasis, cls: AdmissibleClass) -> float:
    try:
        return _clamp(sin_theta_max(nearest_admissible(T, cls), T))
    except (RankDeficiencyError, LadmError) as exc:
        log.warning("witness construction failed: %s", exc)
        return math.nan


@dataclass(frozen=True)
class StepRow:
    q: int
    step_len: float
    paso1_lhs: float
    paso2_lhs: float
    paso3_lower: float


def step_analysis(v_sequence: list[OrthonormalBasis], cls: AdmissibleClass,
                  check: bool = True) -> list[StepRow]:
    """Step-length diagnostics along a sequence of extraction spaces.

    Per step: the length ``d(V_{q-1}, V_q)``, the decrease of the distance
    to the top-``h`` eigenspace (bounded by the step length), the decrease
    of the witness distance (same bound, with the constructed witness as a
    surrogate for the exact class distance), and the lower bound
    ``max(d(X_j, V_{q-1}), d(X_k, V_{q-1})) - d(S_q, V_q)`` for the
    decrease of the true class distance.
    """
    model, env = cls.model, cls.env
    Xh = dominant_basis(model, env.h)
    Xj = dominant_basis(model, env.j)
    Xk = dominant_basis(model, env.k)
    d_xh = [_dist(Xh, V) for V in v_sequence]
    d_xj = [_dist(Xj, V) if env.j else 0.0 for V in v_sequence]
    d_xk = [_dist(Xk, V) for V in v_sequence]
    wit = [_witness_distance(V, cls) for V in v_sequence]
    rows = []
    for q in range(1, len(v_sequence)):
        step = _dist(v_sequence[q - 1], v_sequence[q])
        paso1 = d_xh[q - 1] - d_xh[q]
        paso2 = wit[q - 1] - wit[q]
        paso3 = max(d_xj[q - 1], d_xk[q - 1]) - wit[q]
        if check:
            if paso1 > step + SLACK:
                raise AssertionError(f"step {q}: eigen-distance decrease {paso1} > step {step}")
            if not math.isnan(paso2) and paso2 > step + SLACK:
                raise AssertionError(f"step {q}: witness decrease {paso2} > step {step}")
        rows.append(StepRow(q=q, step_len=step, paso1_lhs=paso1, paso2_lhs=paso2,
                            paso3_lower=paso3))
    return rows


@dataclass
class _SplitTrack:
    """One oversampling split: its reduced space, the precomputed bound
    curve, and the iteration state of the certified measured curve."""

    split: OversamplingSplit
    suffix: str
    hp: OrthonormalBasis | None
    bounds: np.ndarray

    @property
    def bound_col(self) -> str:
        return f"bound_filter_{self.suffix}"

    @property
    def witness_col(self) -> str:
        return f"witness_filter_{self.suffix}"


def _split_tracks_sim(model, W0, splits, cls, q_max):
    """Bound curves for powers of the matrix.

    For a monomial of degree ``q`` on a PSD spectrum the two scalar filter
    coefficients collapse to eigenvalue quotients raised to ``q``, so the
    whole curve family costs two tangent norms per split.
    """
    lam = model.lam
    env = cls.env
    tracks = []
    for split in splits:
        suffix = f"p{split.p1}_{split.p2}"
        try:
            hp = construct_Hp(W0, split, cls)
            tan_j = 0.0
            if env.j:
                Tj = tangent_matrix(OrthonormalBasis(model.X[:, :env.j]),
                                    OrthonormalBasis(model.X[:, env.j:]), hp)
                tan_j = float(np.linalg.norm(Tj, 2))
            Tk = tangent_matrix(OrthonormalBasis(model.X[:, :env.k]),
                                OrthonormalBasis(model.X[:, env.k:]), hp)
            tan_k = float(np.linalg.norm(Tk, 2))
            ratio_j = lam[env.j + split.p1] / lam[env.j - 1] if env.j else 0.0
            ratio_k = lam[env.k + split.p2] / lam[env.k - 1]
            qs = np.arange(q_max + 1)
            curve = np.minimum(tan_j * ratio_j**qs + tan_k * ratio_k**qs, 1.0)
            tracks.append(_SplitTrack(split, suffix, hp, curve))
        except (RankDeficiencyError, DomainError) as exc:
            log.warning("filter bound %s unavailable: %s", suffix, exc)
            tracks.append(_SplitTrack(split, suffix, None, np.full(q_max + 1, math.nan)))
    return sorted(tracks, key=lambda t: t.suffix)


def _split_tracks_krylov(model, W0, splits, cls, q_max):
    """Per-degree Chebyshev bound curves for the Krylov figures."""
    tracks = []
    for split in splits:
        suffix = f"p{split.p1}_{split.p2}"
        vals = np.full(q_max + 1, math.nan)
        hp = None
        try:
            hp = construct_Hp(W0, split, cls)
            for q in range(q_max + 1):
                filt = chebyshev_filter(cls, split.p2, q)
                vals[q] = min(
                    filtered_distance_bound(W0, split, filt, cls, NormKind.SPECTRAL).total,
                    1.0,
                )
        except (RankDeficiencyError, DomainError) as exc:
            log.warning("filter bound %s unavailable: %s", suffix, exc)
        tracks.append(_SplitTrack(split, suffix, hp, vals))
    return sorted(tracks, key=lambda t: t.suffix)


def _certified_filter_distance(filtered_hp, target, cls):
    """Distance from the witness of the filtered reduced space to the
    iterate; this is the quantity the filter bound provably dominates."""
    if filtered_hp is None or filtered_hp.dim < cls.h:
        return math.nan
    try:
        star = nearest_admissible(filtered_hp, cls)
        return _clamp(sin_theta_max(star, target))
    except (RankDeficiencyError, LadmError) as exc:
        log.warning("certified filter witness failed: %s", exc)
        return math.nan


def run_figure(cfg: ExperimentConfig) -> CurveSet:
    """Execute one figure pipeline; returns the curves and writes CSVs when
    the configuration names an output directory."""
    model, env = synth_model(cfg.spec)
    cls_h = AdmissibleClass.create(model, env)
    env_r = ClusterEnvelope.from_model(model, env.j, cfg.r, env.k)
    cls_r = AdmissibleClass.create(model, env_r)
    Xh = dominant_basis(model, env.h)
    Xj = dominant_basis(model, env.j)
    Xk = dominant_basis(model, env.k)
    W0 = gaussian_subspace(model.n, cfg.r, cfg.seed)

    meta = dict(
        figure=cfg.figure, method=cfg.method, scale=cfg.scale, n=model.n,
        j=env.j, h=env.h, k=env.k, r=cfg.r, q_max=cfg.q_max, seed=cfg.seed,
        delta=_fmt(env.delta), gamma=_fmt(env.gamma),
        decay_kind=cfg.spec.decay.kind,
    )
    curves = CurveSet(figure=cfg.figure, meta=meta)

    if cfg.method == "sim":
        tracks = _split_tracks_sim(model, W0, cfg.splits, cls_h, cfg.q_max)
        _run_sim(cfg, model, env, cls_h, cls_r, Xh, Xj, Xk, W0, tracks, curves)
    else:
        tracks = _split_tracks_krylov(model, W0, cfg.splits, cls_h, cfg.q_max)
        _run_krylov(cfg, model, env, cls_h, cls_r, Xh, Xj, Xk, W0, tracks, curves)

    if cfg.out_dir is not None:
        curves.write(cfg.out_dir)
        summary_table(curves, cfg.out_dir)
    return curves


def _ritz_row(model, Q, env, cls_h, cls_r, Xh, Xj, Xk):
    """Shared per-iteration Ritz diagnostics for the trial space ``Q``."""
    rep = compression_report(model, Q, env.h, env)
    V = rep.X1
    row = dict(
        bound_amd3_wq=_clamp(rep.bound_q),
        witness_r_wq=_witness_distance(Q, cls_r),
        d_xh_vq=_dist(Xh, V),
        d_xj_vq=_dist(Xj, V) if env.j else 0.0,
        d_xk_vq=_dist(Xk, V),
        witness_h_vq=_witness_distance(V, cls_h),
        bound_amd1_vq=_clamp(rep.bound_x1),
        bound_nakatsukasa_vq=_clamp(rep.nakatsukasa),
    )
    return row, V


_PLOT2_COLS = ["q", "d_xh_vq", "d_xj_vq", "d_xk_vq", "witness_h_vq",
               "bound_amd1_vq", "bound_nakatsukasa_vq"]
_PLOT3_COLS = ["q", "step_len", "paso1_lhs", "paso2_lhs", "paso3_lower"]


def _finish_plots(curves, plot1_cols, plot1_rows, plot2_rows, v_bases, cls_h):
    curves.add_plot("plot1", plot1_cols, plot1_rows)
    curves.add_plot("plot2", _PLOT2_COLS, plot2_rows)
    steps = step_analysis(v_bases, cls_h)
    curves.add_plot("plot3", _PLOT3_COLS,
                    [[row.q, row.step_len, row.paso1_lhs, row.paso2_lhs, row.paso3_lower]
                     for row in steps])


def _run_sim(cfg, model, env, cls_h, cls_r, Xh, Xj, Xk, W0, tracks, curves):
    plot1_cols = (["q", "d_xh_wq", "d_xj_wq", "d_xk_wq", "witness_h_wq", "sum_bound_wq"]
                  + [t.bound_col for t in tracks] + [t.witness_col for t in tracks]
                  + ["bound_amd3_wq", "witness_r_wq"])
    plot1_rows, plot2_rows, v_bases = [], [], []
    W = W0
    hp_iters = [t.hp for t in tracks]
    for q in range(cfg.q_max + 1):
        if q > 0:
            W = orthonormalize(model.A @ W.data)
            hp_iters = [orthonormalize(model.A @ hp.data) if hp is not None else None
                        for hp in hp_iters]
        d_xj = _dist(Xj, W) if env.j else 0.0
        d_xk = _dist(Xk, W)
        ritz_row, V = _ritz_row(model, W, env, cls_h, cls_r, Xh, Xj, Xk)
        v_bases.append(V)
        plot1_rows.append(
            [q, _dist(Xh, W), d_xj, d_xk, _witness_distance(W, cls_h),
             _clamp(d_xj + d_xk)]
            + [t.bounds[q] for t in tracks]
            + [_certified_filter_distance(hp_q, W, cls_h) for hp_q in hp_iters]
            + [ritz_row["bound_amd3_wq"], ritz_row["witness_r_wq"]]
        )
        plot2_rows.append([q] + [ritz_row[c] for c in _PLOT2_COLS[1:]])
    _finish_plots(curves, plot1_cols, plot1_rows, plot2_rows, v_bases, cls_h)


def _run_krylov(cfg, model, env, cls_h, cls_r, Xh, Xj, Xk, W0, tracks, curves):
    plot1_cols = (["q", "dim_kq", "d_xh_kq", "d_xj_kq", "d_xk_kq", "witness_h_kq",
                   "sum_bound_kq"]
                  + [t.bound_col for t in tracks] + [t.witness_col for t in tracks]
                  + ["bound_amd3_wq", "witness_r_wq"])
    plot1_rows, plot2_rows, v_bases = [], [], []
    basis = W0.data
    block = W0.data
    for q in range(cfg.q_max + 1):
        if q > 0 and block.shape[1] > 0:
            block = krylov_step(model.A, block, basis)
            if block.shape[1]:
                basis = np.hstack([basis, block])
        K = OrthonormalBasis(basis)
        d_xj = _dist(Xj, K) if env.j else 0.0
        d_xk = _dist(Xk, K)
        filter_witnesses = []
        for t in tracks:
            if t.hp is None:
                filter_witnesses.append(math.nan)
                continue
            filt = chebyshev_filter(cls_h, t.split.p2, q)
            filtered = filt.apply_to_subspace(model, t.hp)
            filter_witnesses.append(_certified_filter_distance(filtered, K, cls_h))
        # Ritz spaces of the Krylov compression: top-r trial space, top-h extraction
        G = _adj(K.data) @ (model.A @ K.data)
        G = (G + _adj(G)) / 2
        w, Omega = np.linalg.eigh(G)
        Wq = OrthonormalBasis(K.data @ Omega[:, ::-1][:, :cfg.r])
        ritz_row, V = _ritz_row(model, Wq, env, cls_h, cls_r, Xh, Xj, Xk)
        v_bases.append(V)
        plot1_rows.append(
            [q, K.dim, _dist(Xh, K), d_xj, d_xk, _witness_distance(K, cls_h),
             _clamp(d_xj + d_xk)]
            + [t.bounds[q] for t in tracks]
            + filter_witnesses
            + [ritz_row["bound_amd3_wq"], ritz_row["witness_r_wq"]]
        )
        plot2_rows.append([q] + [ritz_row[c] for c in _PLOT2_COLS[1:]])
    _finish_plots(curves, plot1_cols, plot1_rows, plot2_rows, v_bases, cls_h)


# ----------------------------------------------------------------------
# summary


def _crossing(qs: np.ndarray, values: np.ndarray, threshold: float) -> str:
    ok = np.isfinite(values) & (values < threshold)
    return _fmt(qs[ok][0]) if np.any(ok) else "—"


def summary_table(curves: CurveSet, out_dir=None) -> str:
    """Final values, threshold crossings and the bound-violation count."""
    lines = ["plot,column,final," + ",".join(f"q_below_{t:g}" for t in THRESHOLDS)]
    for plot, (columns, rows) in sorted(curves.plots.items()):
        qs = curves.column(plot, "q")
        for col in columns:
            if col == "q":
                continue
            vals = curves.column(plot, col)
            cells = [plot, col, _fmt(vals[-1]) if len(vals) else "—"]
            cells += [_crossing(qs, vals, t) for t in THRESHOLDS]
            lines.append(",".join(cells))
    lines.append(f"violations,total,{curves.violations()},,,")
    text = "\n".join(lines) + "\n"
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / f"fig{curves.figure}_summary.csv").write_text(text)
    return text


# ----------------------------------------------------------------------
# offline verification of emitted CSVs


def read_csv(path) -> dict[str, np.ndarray]:
    lines = Path(path).read_text().strip().splitlines()
    columns = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    if data.size == 0:
        data = np.zeros((0, len(columns)))
    return {c: data[:, i] for i, c in enumerate(columns)}


def verify_outputs(out_dir) -> tuple[int, int]:
    """Re-check bound validity over every plot CSV in a directory.

    Returns (number of checked pairs, number of violations).
    """
    out_dir = Path(out_dir)
    checked = violations = 0
    for path in sorted(out_dir.glob("fig*_plot*.csv")):
        table = read_csv(path)
        for bound_col, measured_col in validity_pairs(list(table)):
            checked += 1
            violations += _count_violations(table[bound_col], table[measured_col])
    return checked, violations
