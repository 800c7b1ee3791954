"""Response-surface surrogates: polynomial least squares and moving least squares.

All models operate on inputs normalized to the unit cube (see Scaler). Three
polynomial bases are supported plus a locally weighted quadratic; the fitted
objects are immutable and safe to share across threads.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from .errors import (
    ConstantResponse,
    DimensionMismatch,
    NoSupport,
    RankDeficient,
    Underdetermined,
)

log = logging.getLogger(__name__)

LINEAR = "linear"
QUAD_NO_MIXED = "quad"
FULL_QUAD = "full"
MLS = "mls"

POLY_KINDS = (LINEAR, QUAD_NO_MIXED, FULL_QUAD)
ALL_KINDS = POLY_KINDS + (MLS,)

DEFAULT_RIDGE = 1e-10
_BATCH_CHUNK = 4096


# --- normalization ----------------------------------------------------------

@dataclass(frozen=True)
class Scaler:
    """Per-dimension min/max mapping raw inputs onto [0, 1].

    Constant (degenerate) dimensions map to 0 rather than failing, so a
    factor that never varies in the dataset cannot poison the fit.
    """

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        if np.any(self.maxs < self.mins):
            raise ValueError("max < min in scaler")

    @property
    def degenerate(self) -> np.ndarray:
        return self.maxs == self.mins

    @property
    def dimension(self) -> int:
        return len(self.mins)

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        span = np.where(self.degenerate, 1.0, self.maxs - self.mins)
        out = (x - self.mins) / span
        if out.ndim == 1:
            out[self.degenerate] = 0.0
        else:
            out[:, self.degenerate] = 0.0
        return out

    def to_dict(self) -> dict:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Scaler":
        return cls(np.asarray(data["mins"], float), np.asarray(data["maxs"], float))


def fit_scaler(samples) -> Scaler:
    x = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if x.shape[0] < 1:
        raise ValueError("need at least one sample")
    return Scaler(mins=x.min(axis=0), maxs=x.max(axis=0))


# --- polynomial bases -------------------------------------------------------

def n_coefficients(kind: str, k: int) -> int:
    if kind == LINEAR:
        return 1 + k
    if kind in (QUAD_NO_MIXED, MLS):
        return 1 + 2 * k
    if kind == FULL_QUAD:
        return 1 + 2 * k + k * (k - 1) // 2
    raise ValueError(f"unknown basis kind {kind!r}")


def basis_labels(kind: str, k: int) -> list:
    labels = ["1"] + [f"x{i + 1}" for i in range(k)]
    if kind != LINEAR:
        labels += [f"x{i + 1}^2" for i in range(k)]
    if kind == FULL_QUAD:
        labels += [f"x{i + 1}*x{j + 1}" for i in range(k) for j in range(i + 1, k)]
    return labels


def build_basis_matrix(x, kind: str) -> np.ndarray:
    """Rows of basis terms [1, x_i..., x_i^2..., x_i*x_j...] truncated per kind."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n, k = x.shape
    cols = [np.ones(n)]
    cols.extend(x[:, i] for i in range(k))
    if kind != LINEAR:
        cols.extend(x[:, i] ** 2 for i in range(k))
    if kind == FULL_QUAD:
        cols.extend(x[:, i] * x[:, j] for i in range(k) for j in range(i + 1, k))
    elif kind not in (LINEAR, QUAD_NO_MIXED, MLS):
        raise ValueError(f"unknown basis kind {kind!r}")
    return np.column_stack(cols)


def build_basis(x, kind: str) -> np.ndarray:
    """Basis vector for a single point."""
    return build_basis_matrix(np.asarray(x, float)[None, :], kind)[0]


# --- goodness of fit --------------------------------------------------------

def r_squared(y, yhat) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot."""
    y = np.asarray(y, float)
    yhat = np.asarray(yhat, float)
    if y.shape != yhat.shape:
        raise DimensionMismatch("y and yhat differ in length")
    if len(y) < 2:
        raise ValueError("need at least two samples")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-14 * len(y) * (abs(float(y.mean())) + 1.0) ** 2:
        raise ConstantResponse("response has zero variance")
    ss_res = float(np.sum((y - yhat) ** 2))
    return 1.0 - ss_res / ss_tot


def adjusted_r_squared(r2: float, n: int, k_r: int) -> float:
    """Sample-size corrected coefficient of determination."""
    if n <= k_r:
        raise ValueError("adjusted R^2 needs more samples than coefficients")
    return 1.0 - (n - 1) / (n - k_r) * (1.0 - r2)


@dataclass(frozen=True)
class FitMetrics:
    r2: float | None
    r2_adj: float | None
    n_samples: int
    n_coefficients: int

    def to_dict(self) -> dict:
        return {
            "r2": self.r2,
            "r2_adj": self.r2_adj,
            "n_samples": self.n_samples,
            "n_coefficients": self.n_coefficients,
        }


# --- polynomial least squares -----------------------------------------------

@dataclass(frozen=True)
class PolyModel:
    kind: str
    beta: np.ndarray
    k: int

    @property
    def k_r(self) -> int:
        return len(self.beta)


def _dependent_columns(p: np.ndarray, tol: float = 1e-10):
    """Split columns into exactly-zero ones and ones dependent on predecessors.

    Zero columns come from degenerate (constant) input dimensions after
    normalization; they carry no information and simply get a zero
    coefficient. Dependent nonzero columns are genuine collinearity, where
    attribution between columns would be arbitrary.
    """
    basis = []
    zero = []
    dependent = []
    for j in range(p.shape[1]):
        v = p[:, j].copy()
        norm0 = float(np.linalg.norm(v))
        if norm0 == 0.0:
            zero.append(j)
            continue
        scale = max(norm0, 1.0)
        for q in basis:
            v -= (q @ v) * q
        for q in basis:  # second orthogonalization pass for stability
            v -= (q @ v) * q
        norm = float(np.linalg.norm(v))
        if norm <= tol * scale:
            dependent.append(j)
        else:
            basis.append(v / norm)
    return zero, dependent


def fit_ols(x, y, kind: str):
    """Least-squares polynomial fit; returns (PolyModel, FitMetrics).

    Solved through an orthogonal decomposition rather than by inverting the
    normal matrix, so residuals are orthogonal to the design columns to
    machine precision.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n, k = x.shape
    if y.shape != (n,):
        raise DimensionMismatch("y length does not match number of rows in x")
    k_r = n_coefficients(kind, k)
    if n < k_r:
        raise Underdetermined(f"{n} samples cannot determine {k_r} coefficients")
    p = build_basis_matrix(x, kind)
    zero, bad = _dependent_columns(p)
    if bad:
        labels = basis_labels(kind, k)
        names = [labels[j] for j in bad]
        raise RankDeficient(
            f"design matrix is rank deficient; dependent columns: {', '.join(names)}",
            columns=names,
        )
    # minimum-norm solve assigns exactly zero to the zero columns of
    # degenerate (constant) dimensions
    beta, *_ = np.linalg.lstsq(p, y, rcond=None)
    model = PolyModel(kind=kind, beta=beta, k=k)
    try:
        r2 = r_squared(y, p @ beta)
        r2_adj = adjusted_r_squared(r2, n, k_r) if n > k_r else None
    except ConstantResponse:
        r2 = None
        r2_adj = None
    return model, FitMetrics(r2=r2, r2_adj=r2_adj, n_samples=n, n_coefficients=k_r)


def predict_poly(model: PolyModel, x):
    """Evaluate the polynomial at one point (returns float) or many (array)."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != model.k:
        raise DimensionMismatch(
            f"point has dimension {arr.shape[1]}, model expects {model.k}"
        )
    out = build_basis_matrix(arr, model.kind) @ model.beta
    return float(out[0]) if single else out


# --- moving least squares ---------------------------------------------------

def mls_weight(s):
    """Cubic blending weight: 1 - 3 s^2 + 2 s^3 inside s <= 1, zero beyond.

    Continuous with zero slope at both s = 0 and s = 1.
    """
    s = np.asarray(s, dtype=np.float64)
    w = np.where(s <= 1.0, 1.0 - 3.0 * s**2 + 2.0 * s**3, 0.0)
    if w.ndim == 0:
        return float(w)
    return w


@dataclass(frozen=True)
class MlsModel:
    """Locally weighted quadratic regression over stored support points."""

    points: np.ndarray   # (n, k), normalized to [0, 1]
    values: np.ndarray   # (n,)
    radius: float
    ridge: float = DEFAULT_RIDGE
    min_support: int = 0  # 0 means: number of basis coefficients

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be > 0")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.min_support == 0:
            object.__setattr__(self, "min_support", n_coefficients(MLS, self.k))

    @property
    def k(self) -> int:
        return self.points.shape[1]

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @cached_property
    def _basis(self) -> np.ndarray:
        return build_basis_matrix(self.points, MLS)

    @cached_property
    def _points_t(self) -> np.ndarray:
        return np.ascontiguousarray(self.points.T)

    @cached_property
    def _triu(self):
        k_r = n_coefficients(MLS, self.k)
        return np.triu_indices(k_r)

    @cached_property
    def _basis_pairs(self) -> np.ndarray:
        iu, ju = self._triu
        return np.ascontiguousarray(self._basis[:, iu] * self._basis[:, ju])

    @cached_property
    def _basis_values(self) -> np.ndarray:
        return np.ascontiguousarray(self._basis * self.values[:, None])


def fit_mls(x, y, radius: float | None = None, ridge: float = DEFAULT_RIDGE,
            min_support: int | None = None) -> MlsModel:
    """Store normalized supports for locally weighted quadratic prediction.

    The default influence radius is half the diagonal of the unit cube;
    prediction doubles it as needed until `min_support` points carry weight.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (x.shape[0],):
        raise DimensionMismatch("y length does not match number of rows in x")
    if np.any(x < -1e-9) or np.any(x > 1 + 1e-9):
        raise ValueError("support points must be normalized to [0, 1]")
    k = x.shape[1]
    if radius is None:
        radius = math.sqrt(k) / 2.0
    model = MlsModel(
        points=x,
        values=y,
        radius=float(radius),
        ridge=float(ridge),
        min_support=int(min_support) if min_support else 0,
    )
    if model.n_points < model.min_support:
        raise NoSupport(
            f"{model.n_points} support points cannot satisfy min_support={model.min_support}"
        )
    return model


@njit(cache=True, fastmath=True)
def _mls_accumulate(queries, points_t, basis_pairs, basis_values, inv_r2,
                    out_m, out_b, out_count):  # pragma: no cover - jitted
    m, k = queries.shape
    n = points_t.shape[1]
    n_pairs = basis_pairs.shape[1]
    k_r = basis_values.shape[1]
    d2 = np.empty(n)
    idx = np.empty(n, np.int64)
    wts = np.empty(n)
    for i in range(m):
        for j in range(n):
            d2[j] = 0.0
        for l in range(k):
            q = queries[i, l]
            row = points_t[l]
            for j in range(n):
                t = q - row[j]
                d2[j] += t * t
        count = 0
        for j in range(n):
            s2 = d2[j] * inv_r2
            if s2 < 1.0:
                s = math.sqrt(s2)
                idx[count] = j
                wts[count] = 1.0 - 3.0 * s2 + 2.0 * s2 * s
                count += 1
        for a in range(count):
            j = idx[a]
            w = wts[a]
            mrow = out_m[i]
            prow = basis_pairs[j]
            for r in range(n_pairs):
                mrow[r] += w * prow[r]
            brow = out_b[i]
            vrow = basis_values[j]
            for r in range(k_r):
                brow[r] += w * vrow[r]
        out_count[i] = count


# A Cholesky pivot at or below this fraction of the largest diagonal entry
# marks the weighted normal matrix as near-singular (e.g. a basis direction
# the local neighborhood cannot identify); the ridge then pins it.
_PIVOT_REL_TOL = 1e-12


@njit(cache=True)
def _solve_spd_rows(mats, rhs, pivot_tol, ridge, out_beta,
                    out_bumped):  # pragma: no cover - jitted
    n_rows, k_r, _ = mats.shape
    chol = np.empty((k_r, k_r))
    y = np.empty(k_r)
    for i in range(n_rows):
        scale = 0.0
        for j in range(k_r):
            if mats[i, j, j] > scale:
                scale = mats[i, j, j]
        if scale <= 0.0:
            scale = 1.0
        added = 0.0
        for attempt in range(40):
            ok = True
            for a in range(k_r):
                s = mats[i, a, a] + added
                for t in range(a):
                    s -= chol[a, t] * chol[a, t]
                if s <= pivot_tol * scale:
                    ok = False
                    break
                chol[a, a] = math.sqrt(s)
                for b in range(a + 1, k_r):
                    s2 = mats[i, b, a]
                    for t in range(a):
                        s2 -= chol[b, t] * chol[a, t]
                    chol[b, a] = s2 / chol[a, a]
            if ok:
                break
            out_bumped[i] = 1
            if added == 0.0:
                added = ridge * scale
            elif attempt < 30:
                added *= 10.0
            else:
                added = scale
        for a in range(k_r):
            s = rhs[i, a]
            for t in range(a):
                s -= chol[a, t] * y[t]
            y[a] = s / chol[a, a]
        for a in range(k_r - 1, -1, -1):
            s = y[a]
            for t in range(a + 1, k_r):
                s -= chol[t, a] * out_beta[i, t]
            out_beta[i, a] = s / chol[a, a]


def predict_mls_batch(model: MlsModel, x) -> np.ndarray:
    """Locally weighted quadratic prediction over many query points.

    A compiled kernel accumulates each query's weighted normal equations;
    queries whose neighborhoods hold fewer than min_support points are
    retried with a doubled radius until satisfied. Near-singular local
    systems (a basis direction the neighborhood cannot identify) receive
    the model's ridge on the diagonal.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.k:
        raise DimensionMismatch(
            f"points have dimension {x.shape[1]}, model expects {model.k}"
        )
    n_q = x.shape[0]
    k_r = n_coefficients(MLS, model.k)
    iu, ju = model._triu
    out = np.empty(n_q)
    bumped_total = 0
    for start in range(0, n_q, _BATCH_CHUNK):
        stop = min(start + _BATCH_CHUNK, n_q)
        chunk = np.ascontiguousarray(x[start:stop])
        rows = np.arange(stop - start)
        radius = model.radius
        for _ in range(64):
            if rows.size == 0:
                break
            sub = np.ascontiguousarray(chunk[rows])
            packed = np.zeros((rows.size, len(iu)))
            rhs = np.zeros((rows.size, k_r))
            counts = np.zeros(rows.size, dtype=np.int64)
            _mls_accumulate(sub, model._points_t, model._basis_pairs,
                            model._basis_values, 1.0 / (radius * radius),
                            packed, rhs, counts)
            good = counts >= model.min_support
            if good.any():
                g = np.flatnonzero(good)
                full = np.zeros((g.size, k_r, k_r))
                full[:, iu, ju] = packed[g]
                full[:, ju, iu] = packed[g]
                beta = np.empty((g.size, k_r))
                bumped = np.zeros(g.size, dtype=np.int64)
                _solve_spd_rows(full, rhs[g], _PIVOT_REL_TOL, model.ridge,
                                beta, bumped)
                bumped_total += int(bumped.sum())
                q_basis = build_basis_matrix(sub[g], MLS)
                out[start + rows[g]] = np.einsum("ij,ij->i", q_basis, beta)
            rows = rows[~good]
            radius *= 2.0
        if rows.size:
            raise NoSupport(
                f"{model.n_points} support points cannot satisfy "
                f"min_support={model.min_support}"
            )
    if bumped_total:
        log.debug("MLS prediction regularized %d near-singular local systems",
                  bumped_total)
    return out


def predict_mls(model: MlsModel, x) -> float:
    """Locally weighted quadratic prediction at a single point."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.k,):
        raise DimensionMismatch(f"point has shape {x.shape}, model expects ({model.k},)")
    return float(predict_mls_batch(model, x[None, :])[0])


# --- fitted surrogate over raw factors ---------------------------------------

@dataclass(frozen=True)
class SurrogateModel:
    """A fitted regressor plus the input scaler that feeds it."""

    kind: str
    scaler: Scaler
    poly: PolyModel | None
    mls: MlsModel | None
    metrics: FitMetrics

    def to_dict(self) -> dict:
        data = {
            "kind": self.kind,
            "scaler": self.scaler.to_dict(),
            "metrics": self.metrics.to_dict(),
        }
        if self.poly is not None:
            data["beta"] = self.poly.beta.tolist()
            data["k"] = self.poly.k
        if self.mls is not None:
            data["support_points"] = self.mls.points.tolist()
            data["support_values"] = self.mls.values.tolist()
            data["radius"] = self.mls.radius
            data["ridge"] = self.mls.ridge
            data["min_support"] = self.mls.min_support
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SurrogateModel":
        scaler = Scaler.from_dict(data["scaler"])
        metrics = FitMetrics(**data["metrics"])
        kind = data["kind"]
        if kind == MLS:
            mls = MlsModel(
                points=np.asarray(data["support_points"], float),
                values=np.asarray(data["support_values"], float),
                radius=float(data["radius"]),
                ridge=float(data["ridge"]),
                min_support=int(data["min_support"]),
            )
            return cls(kind=kind, scaler=scaler, poly=None, mls=mls, metrics=metrics)
        poly = PolyModel(kind=kind, beta=np.asarray(data["beta"], float),
                         k=int(data["k"]))
        return cls(kind=kind, scaler=scaler, poly=poly, mls=None, metrics=metrics)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SurrogateModel":
        return cls.from_dict(json.loads(text))


def fit_surrogate(x_raw, y, kind: str, mls_radius: float | None = None,
                  ridge: float = DEFAULT_RIDGE) -> SurrogateModel:
    """Normalize raw factors, then fit the requested regressor on them."""
    if kind not in ALL_KINDS:
        raise ValueError(f"unknown surrogate kind {kind!r}")
    x_raw = np.atleast_2d(np.asarray(x_raw, dtype=np.float64))
    scaler = fit_scaler(x_raw)
    x_norm = scaler.apply(x_raw)
    if kind == MLS:
        mls = fit_mls(x_norm, y, radius=mls_radius, ridge=ridge)
        yhat = predict_mls_batch(mls, x_norm)
        try:
            r2 = r_squared(y, yhat)
            k_r = n_coefficients(MLS, mls.k)
            r2_adj = adjusted_r_squared(r2, len(y), k_r) if len(y) > k_r else None
        except ConstantResponse:
            r2 = None
            r2_adj = None
        metrics = FitMetrics(r2=r2, r2_adj=r2_adj, n_samples=len(y),
                             n_coefficients=n_coefficients(MLS, mls.k))
        return SurrogateModel(kind=kind, scaler=scaler, poly=None, mls=mls,
                              metrics=metrics)
    poly, metrics = fit_ols(x_norm, y, kind)
    return SurrogateModel(kind=kind, scaler=scaler, poly=poly, mls=None,
                          metrics=metrics)


def predict_surrogate(model: SurrogateModel, x_raw) -> np.ndarray:
    """Evaluate a fitted surrogate on raw (unnormalized) factor rows."""
    x_norm = model.scaler.apply(np.atleast_2d(np.asarray(x_raw, float)))
    if model.kind == MLS:
        return predict_mls_batch(model.mls, x_norm)
    return predict_poly(model.poly, x_norm)
