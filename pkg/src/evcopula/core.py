"""Domain types, analytic Pickands families, and extreme-value copula evaluation.

An extreme-value copula in dimension d is determined by its Pickands
dependence function A, a convex function on the unit simplex satisfying
``max_k w_k <= A(w) <= 1`` with ``A(e_k) = 1`` at every vertex.  The copula is
recovered through

    C(u_1, ..., u_d) = exp( (sum_k log u_k) * A(log u / sum_j log u_j) ).

``A == 1`` gives the independence copula, ``A(w) = max_k w_k`` complete
dependence.  Everything else in this package (nonparametric estimators, the
convex-network model, survival evaluation, samplers) speaks in terms of the
:class:`PickandsModel` interface defined here.
"""

from __future__ import annotations

import dataclasses
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

# Simplex points must sum to one within this tolerance.
SIMPLEX_TOL = 1e-9


class ParameterError(ValueError):
    """A constructor or operation received an out-of-range parameter."""


class DomainError(ValueError):
    """An evaluation input lies outside the mathematical domain."""


def as_simplex(w) -> np.ndarray:
    """Validate and return ``w`` as a point on the unit simplex.

    Accepts any 1-d array-like with d >= 2 nonnegative entries summing to one
    within ``SIMPLEX_TOL``.  Returns a float64 copy.
    """
    w = np.array(w, dtype=float)
    if w.ndim != 1:
        raise ParameterError(f"simplex point must be 1-d, got shape {w.shape}")
    if w.size < 2:
        raise ParameterError(f"simplex dimension must be >= 2, got {w.size}")
    if not np.all(np.isfinite(w)):
        raise ParameterError("simplex point has non-finite entries")
    if np.any(w < 0):
        raise ParameterError(f"simplex point has negative entries: {w}")
    total = float(w.sum())
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise ParameterError(f"simplex point sums to {total!r}, not 1")
    return w


def as_simplex_batch(points, d: int | None = None) -> np.ndarray:
    """Validate an (n, d) array of simplex points; returns a float64 copy."""
    pts = np.atleast_2d(np.array(points, dtype=float))
    if pts.ndim != 2:
        raise ParameterError(f"expected a 2-d batch, got shape {pts.shape}")
    if d is not None and pts.shape[1] != d:
        raise ParameterError(f"expected dimension {d}, got {pts.shape[1]}")
    if pts.shape[1] < 2:
        raise ParameterError("simplex dimension must be >= 2")
    if not np.all(np.isfinite(pts)):
        raise ParameterError("batch has non-finite entries")
    if np.any(pts < 0):
        raise ParameterError("batch has negative entries")
    if np.any(np.abs(pts.sum(axis=1) - 1.0) > SIMPLEX_TOL):
        raise ParameterError("batch rows must sum to 1")
    return pts


def sample_simplex_uniform(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` points uniformly from the unit simplex in dimension ``d``.

    Uniform means the flat Dirichlet(1, ..., 1) law.  Returns an (n, d) array.
    """
    if d < 2:
        raise ParameterError(f"simplex dimension must be >= 2, got {d}")
    if n < 1:
        raise ParameterError(f"sample count must be >= 1, got {n}")
    return rng.dirichlet(np.ones(d), size=n)


# ---------------------------------------------------------------------------
# GEV marginals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GevParams:
    """Location/scale/shape triple of a generalized extreme value law.

    The shape follows the convention ``H(x) = exp(-(1 + shape*z)^(-1/shape))``
    with ``z = (x - location)/scale``; ``shape == 0`` means the Gumbel limit
    ``exp(-exp(-z))``.
    """

    location: float
    scale: float
    shape: float

    def __post_init__(self):
        for name in ("location", "scale", "shape"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ParameterError(f"GEV {name} must be finite, got {v!r}")
        if self.scale <= 0:
            raise ParameterError(f"GEV scale must be positive, got {self.scale!r}")


def gev_cdf(x, params: GevParams):
    """GEV distribution function; scalar in, scalar out (arrays broadcast).

    Points outside the support return exactly 0.0 (below a lower endpoint)
    or 1.0 (above an upper endpoint).  NaN input is rejected.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("gev_cdf input contains NaN")
    z = (arr - params.location) / params.scale
    if params.shape == 0.0:
        out = np.exp(-np.exp(-z))
    else:
        t = 1.0 + params.shape * z
        inside = t > 0
        out = np.empty_like(z)
        # Below the lower endpoint (shape > 0) the cdf is 0, above the upper
        # endpoint (shape < 0) it is 1.
        out[~inside] = 0.0 if params.shape > 0 else 1.0
        out[inside] = np.exp(-t[inside] ** (-1.0 / params.shape))
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def gev_ppf(p, params: GevParams):
    """Inverse of :func:`gev_cdf` on (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError("gev_ppf defined on the open interval (0, 1)")
    if params.shape == 0.0:
        out = params.location - params.scale * np.log(-np.log(arr))
    else:
        out = params.location + params.scale * (
            (-np.log(arr)) ** (-params.shape) - 1.0
        ) / params.shape
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# Pickands dependence models
# ---------------------------------------------------------------------------


class PickandsModel(ABC):
    """Evaluator for a Pickands dependence function on the unit simplex.

    Subclasses implement :meth:`raw_values` on an (n, d) batch.  The public
    evaluation path clamps raw values into the admissible band
    ``[max_k w_k, 1]``; raw values stay available for diagnostics.

    ``trained_on_reflected`` records whether the model was built from
    reflection-transformed data, which is what joint-survival evaluation
    requires.  Analytic families default to False; use :meth:`mark_reflected`
    to assert the provenance explicitly.
    """

    d: int
    trained_on_reflected: bool = False

    @abstractmethod
    def raw_values(self, points: np.ndarray) -> np.ndarray:
        """Unclamped A at each row of a validated (n, d) batch."""

    def values(self, points) -> np.ndarray:
        """Clamped A at each row of an (n, d) batch."""
        pts = as_simplex_batch(points, self.d)
        raw = np.asarray(self.raw_values(pts), dtype=float)
        return np.clip(raw, pts.max(axis=1), 1.0)

    def at(self, w) -> float:
        """Clamped A at a single simplex point."""
        w = as_simplex(w)
        if w.size != self.d:
            raise ParameterError(f"model has dimension {self.d}, point has {w.size}")
        return float(self.values(w[None, :])[0])

    def raw_at(self, w) -> float:
        """Unclamped A at a single simplex point (diagnostic)."""
        w = as_simplex(w)
        if w.size != self.d:
            raise ParameterError(f"model has dimension {self.d}, point has {w.size}")
        return float(self.raw_values(w[None, :])[0])

    def __call__(self, w) -> float:
        return self.at(w)

    def mark_reflected(self):
        """Copy of this model asserting it describes reflected data."""
        if not dataclasses.is_dataclass(self):
            raise TypeError(f"cannot mark {type(self).__name__} as reflected")
        return dataclasses.replace(self, trained_on_reflected=True)


@dataclass(frozen=True, eq=False)
class SymmetricLogistic(PickandsModel):
    """Symmetric logistic family ``A(w) = (sum_k w_k^(1/alpha))^alpha``.

    ``alpha`` in (0, 1]; ``alpha == 1`` is independence and ``alpha -> 0``
    approaches complete dependence.
    """

    alpha: float
    d: int = 2
    trained_on_reflected: bool = False

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if self.d < 2:
            raise ParameterError(f"dimension must be >= 2, got {self.d}")

    def raw_values(self, points: np.ndarray) -> np.ndarray:
        if self.alpha == 1.0:
            return points.sum(axis=1)
        return (points ** (1.0 / self.alpha)).sum(axis=1) ** self.alpha


@dataclass(frozen=True, eq=False)
class AsymmetricLogistic(PickandsModel):
    """Asymmetric logistic family over a collection of coordinate subsets.

    ``A(w) = sum_b ( sum_{i in b} (lam[i, b] * w_i)^(1/alpha_b) )^alpha_b``
    where each coordinate's weights over the subsets containing it sum to one.
    Singleton subsets contribute the linear term ``lam[i, b] * w_i`` and carry
    ``alpha_b == 1`` by convention.
    """

    d: int
    subsets: tuple[tuple[int, ...], ...]
    alphas: tuple[float, ...]
    lam: np.ndarray
    trained_on_reflected: bool = False

    def __post_init__(self):
        if self.d < 2:
            raise ParameterError(f"dimension must be >= 2, got {self.d}")
        if len(self.subsets) != len(self.alphas):
            raise ParameterError("need one alpha per subset")
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (self.d, len(self.subsets)):
            raise ParameterError(
                f"lam must have shape ({self.d}, {len(self.subsets)}), got {lam.shape}"
            )
        seen = set()
        for j, b in enumerate(self.subsets):
            if len(b) == 0:
                raise ParameterError("subsets must be nonempty")
            if tuple(sorted(b)) in seen:
                raise ParameterError(f"duplicate subset {b}")
            seen.add(tuple(sorted(b)))
            if any(i < 0 or i >= self.d for i in b):
                raise ParameterError(f"subset {b} has out-of-range coordinates")
            a = self.alphas[j]
            if not (0.0 < a <= 1.0):
                raise ParameterError(f"alpha for subset {b} must lie in (0, 1], got {a!r}")
            if len(b) == 1 and a != 1.0:
                raise ParameterError(f"singleton subset {b} must use alpha 1.0")
            outside = np.ones(self.d, dtype=bool)
            outside[list(b)] = False
            if np.any(lam[outside, j] != 0.0):
                raise ParameterError(f"lam must vanish off subset {b}")
        if np.any(lam < 0) or np.any(lam > 1):
            raise ParameterError("lam entries must lie in [0, 1]")
        rowsums = lam.sum(axis=1)
        if np.any(np.abs(rowsums - 1.0) > SIMPLEX_TOL):
            raise ParameterError(
                f"per-coordinate weights must sum to 1, got row sums {rowsums}"
            )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(
            self, "subsets", tuple(tuple(int(i) for i in b) for b in self.subsets)
        )
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    def raw_values(self, points: np.ndarray) -> np.ndarray:
        total = np.zeros(points.shape[0])
        for j, b in enumerate(self.subsets):
            idx = list(b)
            scaled = self.lam[idx, j] * points[:, idx]
            a = self.alphas[j]
            if len(idx) == 1 or a == 1.0:
                total += scaled.sum(axis=1)
            else:
                total += (scaled ** (1.0 / a)).sum(axis=1) ** a
        return total


def random_asymmetric_logistic(
    d: int, alpha: float, rng: np.random.Generator
) -> AsymmetricLogistic:
    """Random member of the asymmetric logistic family used in benchmarks.

    Charges all singletons plus the full coordinate set with dependence
    ``alpha``; each coordinate splits its unit mass between its singleton and
    the full set by a flat Dirichlet draw.
    """
    if d < 2:
        raise ParameterError(f"dimension must be >= 2, got {d}")
    subsets = tuple((i,) for i in range(d)) + (tuple(range(d)),)
    alphas = (1.0,) * d + (float(alpha),)
    lam = np.zeros((d, d + 1))
    for i in range(d):
        split = rng.dirichlet(np.ones(2))
        lam[i, i] = split[0]
        lam[i, d] = split[1]
    return AsymmetricLogistic(d=d, subsets=subsets, alphas=alphas, lam=lam)


@dataclass(frozen=True, eq=False)
class CompleteDependence(PickandsModel):
    """Comonotone limit ``A(w) = max_k w_k``."""

    d: int = 2
    trained_on_reflected: bool = False

    def raw_values(self, points: np.ndarray) -> np.ndarray:
        return points.max(axis=1)


@dataclass(frozen=True, eq=False)
class ConstantPickands(PickandsModel):
    """Constant function, not necessarily a valid Pickands function.

    Exists for diagnostics and baselines: ``value == 1`` is independence,
    anything below ``max_k w_k`` exercises the clamping path.
    """

    value: float
    d: int = 2
    trained_on_reflected: bool = False

    def raw_values(self, points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[0], float(self.value))


def independence_model(d: int = 2) -> SymmetricLogistic:
    """The independence copula's Pickands function, ``A == 1``."""
    return SymmetricLogistic(alpha=1.0, d=d)


# ---------------------------------------------------------------------------
# Copula evaluation and diagnostics
# ---------------------------------------------------------------------------


def copula_from_pickands(u, model: PickandsModel) -> float:
    """Extreme-value copula ``C(u)`` determined by ``model``.

    ``u`` holds marginal probabilities in (0, 1].  Coordinates equal to one
    drop out of the dependence structure: they contribute zero weight to the
    simplex point, which evaluates A of the corresponding marginal copula.
    All coordinates equal to one returns 1.0 exactly.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size != model.d:
        raise ParameterError(f"u must be a vector of length {model.d}")
    if np.any(~np.isfinite(u)):
        raise DomainError("u has non-finite entries")
    if np.any(u <= 0) or np.any(u > 1):
        raise DomainError(f"marginal probabilities must lie in (0, 1], got {u}")
    logs = np.log(u)
    total = float(logs.sum())
    if total == 0.0:
        return 1.0
    w = logs / total
    a = float(model.values(w[None, :])[0])
    return float(np.exp(total * a))


@dataclass(frozen=True)
class BoundsReport:
    """Outcome of :func:`check_pickands_bounds` on a batch of points."""

    n_points: int
    raw: np.ndarray
    n_lower_violations: int
    n_upper_violations: int
    n_convexity_violations: int
    max_lower_gap: float
    max_upper_gap: float
    max_convexity_gap: float

    @property
    def n_violations(self) -> int:
        return (
            self.n_lower_violations
            + self.n_upper_violations
            + self.n_convexity_violations
        )


def check_pickands_bounds(
    model: PickandsModel,
    points,
    bound_tol: float = 1e-9,
    convexity_tol: float = 1e-6,
) -> BoundsReport:
    """Check the defining constraints of a Pickands function on raw values.

    Bounds ``max_k w_k <= A(w) <= 1`` are tested pointwise before clamping.
    Midpoint convexity ``A((w + w')/2) <= (A(w) + A(w'))/2 + convexity_tol``
    is tested over consecutive pairs of the supplied points.
    """
    pts = as_simplex_batch(points, model.d)
    raw = np.asarray(model.raw_values(pts), dtype=float)
    lower = pts.max(axis=1)
    lower_gap = lower - raw
    upper_gap = raw - 1.0
    n_lower = int(np.sum(lower_gap > bound_tol))
    n_upper = int(np.sum(upper_gap > bound_tol))

    n_convex = 0
    max_gap = -np.inf
    if pts.shape[0] >= 2:
        a, b = pts[:-1], pts[1:]
        mids = 0.5 * (a + b)
        mids /= mids.sum(axis=1, keepdims=True)  # kill float drift off the simplex
        raw_mid = np.asarray(model.raw_values(mids), dtype=float)
        gap = raw_mid - 0.5 * (raw[:-1] + raw[1:])
        n_convex = int(np.sum(gap > convexity_tol))
        max_gap = float(gap.max())
    return BoundsReport(
        n_points=pts.shape[0],
        raw=raw,
        n_lower_violations=n_lower,
        n_upper_violations=n_upper,
        n_convexity_violations=n_convex,
        max_lower_gap=float(lower_gap.max()),
        max_upper_gap=float(upper_gap.max()),
        max_convexity_gap=max_gap,
    )
