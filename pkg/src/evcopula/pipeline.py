"""Data preparation: block maxima, marginal fits, and the min-over-weights statistic.

The estimation pipeline turns raw multivariate observations into samples of

    Z_w = min_k ( -log F_k(M_k) ) / w_k          (minimum over w_k > 0)

where M is a vector of per-block component-wise maxima and F_k its k-th
marginal distribution.  When the maxima follow a multivariate extreme-value
law, Z_w is exponential with rate A(w), the Pickands dependence function;
every estimator downstream consumes these Z samples.

Marginals come in two flavours: per-column GEV fits (L-moments by default,
maximum likelihood as an option) or plain empirical ranks.  The reflection
transform ``G_k(x) = F_k^{-1}(1 - F_k(x))`` re-expresses each column so that
joint survival of the original data becomes a copula value of the reflected
data; it preserves marginal distributions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize
from scipy.special import gamma as gamma_fn
from scipy.stats import rankdata

from .core import DomainError, GevParams, ParameterError, gev_cdf, gev_ppf


class PipelineError(ValueError):
    """Raised when a pipeline stage receives unusable data."""


@dataclass(frozen=True)
class RawDataset:
    """Numeric observation matrix with column names.

    ``n_dropped`` counts input rows discarded for missing values during
    ingestion; constructed-in-memory datasets leave it at zero.
    """

    rows: np.ndarray
    columns: tuple[str, ...]
    n_dropped: int = 0

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise PipelineError(f"rows must be 2-d, got shape {rows.shape}")
        if len(self.columns) != rows.shape[1]:
            raise PipelineError("one column name per column required")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "columns", tuple(self.columns))


@dataclass(frozen=True)
class GevMarginals:
    """Per-column fitted GEV laws."""

    params: tuple[GevParams, ...]


@dataclass(frozen=True)
class RankMarginals:
    """Marginals represented by empirical ranks; no fitted state."""


@dataclass(frozen=True)
class BlockMaxima:
    """Component-wise block maxima plus how their marginals are modelled.

    ``reflected`` tracks whether the values have passed through the
    reflection transform an odd number of times; it is the provenance bit
    that survival evaluation checks on trained models.
    """

    maxima: np.ndarray
    block_size: int
    marginals: GevMarginals | RankMarginals | None = None
    reflected: bool = False

    def __post_init__(self):
        m = np.asarray(self.maxima, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 2:
            raise PipelineError(f"maxima must be (B, d) with d >= 2, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise PipelineError("maxima must be finite")
        if self.block_size < 1:
            raise PipelineError(f"block size must be >= 1, got {self.block_size}")
        if isinstance(self.marginals, GevMarginals) and len(
            self.marginals.params
        ) != m.shape[1]:
            raise PipelineError("need one GEV fit per column")
        object.__setattr__(self, "maxima", m)

    @property
    def n_blocks(self) -> int:
        return self.maxima.shape[0]

    @property
    def d(self) -> int:
        return self.maxima.shape[1]


@dataclass(frozen=True)
class Uniformized:
    """Maxima mapped through their marginal distribution functions.

    Entries lie strictly inside (0, 1); the probability-integral transform is
    clipped to ``[1/(B+1), B/(B+1)]`` so logs stay finite downstream.
    """

    u: np.ndarray
    reflected: bool = False

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 2:
            raise PipelineError(f"u must be 2-d, got shape {u.shape}")
        if np.any(u <= 0) or np.any(u >= 1):
            raise PipelineError("uniformized values must lie strictly in (0, 1)")
        object.__setattr__(self, "u", u)

    @property
    def n_blocks(self) -> int:
        return self.u.shape[0]

    @property
    def d(self) -> int:
        return self.u.shape[1]


def block_maxima(data: RawDataset, block_size: int) -> BlockMaxima:
    """Component-wise maxima over consecutive blocks of ``block_size`` rows.

    A trailing partial block is discarded.  Fails if fewer than one complete
    block exists.
    """
    if block_size < 1:
        raise PipelineError(f"block size must be >= 1, got {block_size}")
    n = data.rows.shape[0]
    n_blocks = n // block_size
    if n_blocks < 1:
        raise PipelineError(
            f"need at least {block_size} rows for one block, got {n}"
        )
    trimmed = data.rows[: n_blocks * block_size]
    maxima = trimmed.reshape(n_blocks, block_size, -1).max(axis=1)
    return BlockMaxima(maxima=maxima, block_size=block_size)


# ---------------------------------------------------------------------------
# GEV marginal fitting
# ---------------------------------------------------------------------------

MIN_FIT_SAMPLES = 20


def _sample_lmoments(x: np.ndarray) -> tuple[float, float, float]:
    """First three L-moments via unbiased probability-weighted moments."""
    x = np.sort(x)
    n = x.size
    i = np.arange(1, n + 1)
    b0 = x.mean()
    b1 = np.sum((i - 1) * x) / (n * (n - 1))
    b2 = np.sum((i - 1) * (i - 2) * x) / (n * (n - 1) * (n - 2))
    l1 = b0
    l2 = 2.0 * b1 - b0
    l3 = 6.0 * b2 - 6.0 * b1 + b0
    return l1, l2, l3


def fit_gev_lmoments(samples) -> GevParams:
    """Fit a GEV by L-moments using the classic rational approximation.

    With ``t3 = l3/l2`` and ``c = 2/(3 + t3) - log 2 / log 3`` the shape is
    ``-k`` where ``k = 7.8590 c + 2.9554 c^2``; scale and location follow in
    closed form.  Requires at least ``MIN_FIT_SAMPLES`` observations with
    nonzero spread.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1:
        raise PipelineError("samples must be a vector")
    if x.size < MIN_FIT_SAMPLES:
        raise PipelineError(
            f"GEV fit needs >= {MIN_FIT_SAMPLES} samples, got {x.size}"
        )
    if not np.all(np.isfinite(x)):
        raise PipelineError("samples must be finite")
    l1, l2, l3 = _sample_lmoments(x)
    if l2 <= 0:
        raise PipelineError("samples have no spread; cannot fit a GEV")
    t3 = l3 / l2
    c = 2.0 / (3.0 + t3) - math.log(2.0) / math.log(3.0)
    k = 7.8590 * c + 2.9554 * c * c
    if abs(k) < 1e-8:
        # Gumbel limit of the expressions below.
        scale = l2 / math.log(2.0)
        loc = l1 - scale * float(np.euler_gamma)
        return GevParams(location=loc, scale=scale, shape=0.0)
    g1 = gamma_fn(1.0 + k)
    scale = l2 * k / ((1.0 - 2.0 ** (-k)) * g1)
    loc = l1 - scale * (1.0 - g1) / k
    return GevParams(location=float(loc), scale=float(scale), shape=float(-k))


def _gev_negloglik(theta: np.ndarray, x: np.ndarray) -> float:
    loc, log_scale, shape = theta
    scale = math.exp(log_scale)
    z = (x - loc) / scale
    if abs(shape) < 1e-12:
        return float(x.size * log_scale + np.sum(z + np.exp(-z)))
    t = 1.0 + shape * z
    if np.any(t <= 0):
        return float("inf")
    return float(
        x.size * log_scale
        + (1.0 + 1.0 / shape) * np.sum(np.log(t))
        + np.sum(t ** (-1.0 / shape))
    )


def fit_gev_mle(samples) -> GevParams:
    """Maximum-likelihood GEV fit, Nelder-Mead started from the L-moments fit."""
    x = np.asarray(samples, dtype=float)
    init = fit_gev_lmoments(x)
    theta0 = np.array([init.location, math.log(init.scale), init.shape])
    res = minimize(
        _gev_negloglik,
        theta0,
        args=(x,),
        method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-8, "maxiter": 2000},
    )
    if not np.all(np.isfinite(res.x)):
        raise PipelineError("GEV likelihood optimisation diverged")
    loc, log_scale, shape = res.x
    return GevParams(location=float(loc), scale=float(math.exp(log_scale)), shape=float(shape))


def fit_gev_marginals(bm: BlockMaxima, method: str = "lmoments") -> BlockMaxima:
    """Attach per-column GEV fits to a block-maxima dataset."""
    if method == "lmoments":
        fit = fit_gev_lmoments
    elif method == "mle":
        fit = fit_gev_mle
    else:
        raise ParameterError(f"unknown GEV fit method {method!r}")
    params = tuple(fit(bm.maxima[:, k]) for k in range(bm.d))
    return replace(bm, marginals=GevMarginals(params=params))


def use_rank_marginals(bm: BlockMaxima) -> BlockMaxima:
    """Attach empirical-rank marginals to a block-maxima dataset."""
    return replace(bm, marginals=RankMarginals())


# ---------------------------------------------------------------------------
# Uniformization, reflection, and the Z statistic
# ---------------------------------------------------------------------------


def uniformize(bm: BlockMaxima) -> Uniformized:
    """Map each column to (0, 1) through its marginal model.

    GEV marginals apply the fitted cdf and clip into
    ``[1/(B+1), B/(B+1)]``; rank marginals use ``rank/(B+1)`` with average
    ranks on ties, which lands in that interval automatically.
    """
    if bm.marginals is None:
        raise PipelineError("attach marginals before uniformizing")
    b = bm.n_blocks
    lo, hi = 1.0 / (b + 1.0), b / (b + 1.0)
    u = np.empty_like(bm.maxima)
    if isinstance(bm.marginals, GevMarginals):
        for k, p in enumerate(bm.marginals.params):
            u[:, k] = np.clip(gev_cdf(bm.maxima[:, k], p), lo, hi)
    else:
        for k in range(bm.d):
            u[:, k] = rankdata(bm.maxima[:, k], method="average") / (b + 1.0)
    return Uniformized(u=u, reflected=bm.reflected)


def reflect_transform(bm: BlockMaxima) -> BlockMaxima:
    """Apply ``G_k(x) = F_k^{-1}(1 - F_k(x))`` column-wise.

    The transform preserves each marginal law while turning joint survival
    of the original vector into a joint cdf of the transformed one.  With
    GEV marginals it uses the fitted cdf/quantile pair (probabilities
    clipped as in :func:`uniformize`); with rank marginals it reverses the
    order of each column's values.  Applying it twice restores the original
    rank structure.
    """
    if bm.marginals is None:
        raise PipelineError("attach marginals before reflecting")
    out = np.empty_like(bm.maxima)
    if isinstance(bm.marginals, GevMarginals):
        b = bm.n_blocks
        lo, hi = 1.0 / (b + 1.0), b / (b + 1.0)
        for k, p in enumerate(bm.marginals.params):
            f = np.clip(gev_cdf(bm.maxima[:, k], p), lo, hi)
            out[:, k] = gev_ppf(1.0 - f, p)
    else:
        for k in range(bm.d):
            col = bm.maxima[:, k]
            order = np.argsort(col, kind="stable")
            out[order, k] = col[order[::-1]]
    return replace(bm, maxima=out, reflected=not bm.reflected)


def z_statistic(u_row, w) -> float:
    """``min_k (-log u_k) / w_k`` over coordinates with ``w_k > 0``.

    ``u_row`` holds marginal probabilities strictly inside (0, 1); ``w`` is a
    simplex point.  Coordinates with zero weight are excluded, which makes
    the statistic the one of the corresponding marginal copula.
    """
    u = np.asarray(u_row, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.shape != w.shape:
        raise ParameterError("u_row and w must have matching shapes")
    if np.any(u <= 0) or np.any(u >= 1):
        raise DomainError("u_row entries must lie strictly in (0, 1)")
    active = w > 0
    if not np.any(active):
        raise ParameterError("w must have at least one positive coordinate")
    return float(np.min(-np.log(u[active]) / w[active]))


def z_statistics(u: np.ndarray, w) -> np.ndarray:
    """Vectorized :func:`z_statistic` over the rows of ``u``."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    active = w > 0
    if not np.any(active):
        raise ParameterError("w must have at least one positive coordinate")
    return np.min(-np.log(u[:, active]) / w[active], axis=1)


def z_statistics_grid(neglog_u: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Z statistics for every (row, simplex point) pair.

    ``neglog_u`` is the (B, d) matrix of ``-log u``; ``points`` an (m, d)
    batch of simplex points.  Returns a (B, m) matrix.  Weights equal to
    zero are excluded from the minimum by substituting +inf.
    """
    with np.errstate(divide="ignore"):
        inv = np.where(points > 0, 1.0 / points, np.inf)
    b, d = neglog_u.shape
    m = points.shape[0]
    # Accumulate the minimum one coordinate at a time: only (B, chunk)
    # scratch, and inf on zero-weight coordinates never wins the minimum.
    out = np.full((b, m), np.inf)
    chunk = max(1, int(40_000_000 // max(b, 1)))
    for s in range(0, m, chunk):
        e = min(m, s + chunk)
        scratch = np.empty((b, e - s))
        for k in range(d):
            np.multiply(neglog_u[:, k, None], inv[None, s:e, k], out=scratch)
            np.minimum(out[:, s:e], scratch, out=out[:, s:e])
    return out


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def ingest_csv(path, columns: list[str] | None = None) -> RawDataset:
    """Read a delimited text file into a :class:`RawDataset`.

    The first row is a header.  ``columns`` selects and orders columns by
    name (all columns when omitted).  Rows with empty cells in the selected
    columns are dropped and counted; cells that fail to parse as numbers
    abort with the offending line number.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PipelineError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if columns is None:
            wanted = list(header)
        else:
            missing = [c for c in columns if c not in header]
            if missing:
                raise PipelineError(f"{path}: columns not found: {missing}")
            wanted = list(columns)
        idx = [header.index(c) for c in wanted]
        rows: list[list[float]] = []
        n_dropped = 0
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(cell.strip() == "" for cell in rec):
                continue
            cells = []
            dropped = False
            for j in idx:
                raw = rec[j].strip() if j < len(rec) else ""
                if raw == "" or raw.lower() in ("nan", "na"):
                    dropped = True
                    break
                try:
                    cells.append(float(raw))
                except ValueError:
                    raise PipelineError(
                        f"{path}:{lineno}: cannot parse {rec[j]!r} in column {wanted[len(cells)]!r}"
                    ) from None
            if dropped:
                n_dropped += 1
                continue
            rows.append(cells)
    if not rows:
        raise PipelineError(f"{path}: no usable data rows")
    return RawDataset(
        rows=np.asarray(rows, dtype=float),
        columns=tuple(wanted),
        n_dropped=n_dropped,
    )
