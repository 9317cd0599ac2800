"""Samplers for extreme-value laws: exact logistic families and a learned generator.

Exact route.  Symmetric logistic vectors with unit Frechet margins come from
the positive-stable construction ``X_k = (S / E_k)^alpha`` where ``S`` is
positive alpha-stable and ``E_k`` are unit exponentials; asymmetric logistic
vectors are max-mixtures of per-subset symmetric draws scaled by the subset
weights.

Learned route.  A max-stable vector admits the spectral representation
``M = max_i xi_i * Y_i`` with ``xi_i`` the points of a unit Poisson process
and ``Y_i`` i.i.d. nonnegative with unit means, where

    A(w) = E[ max_k w_k Y_k ].

A rectifier MLP ``G(z)`` maps Gaussian latents to spectral points ``Y`` by
minimising the squared mismatch between the Monte-Carlo estimate of that
expectation and a target Pickands function, plus a penalty tying ``E[Y]`` to
the all-ones vector.  Sampling then replaces the Poisson points by a fixed
number of i.i.d. unit-Frechet multipliers, a heuristic whose law approaches
the target as the event count grows; an optional normalisation divides by
the event count to restore approximately unit-Frechet margins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import (
    AsymmetricLogistic,
    ParameterError,
    PickandsModel,
    sample_simplex_uniform,
)
from .icnn import TrainingDivergedError

# Latent dimensions matching the output dimensions exercised in benchmarks;
# anything else falls back to d/4 clipped into [2, 256].
_LATENT_TABLE = {2: 2, 16: 16, 225: 64, 256: 64, 784: 64, 1024: 256}

_FORWARD_CHUNK_ROWS = 32768


def default_latent_dim(d: int) -> int:
    if d in _LATENT_TABLE:
        return _LATENT_TABLE[d]
    return int(min(256, max(2, d // 4)))


# ---------------------------------------------------------------------------
# Exact samplers
# ---------------------------------------------------------------------------


def sample_positive_stable(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Positive alpha-stable variables with Laplace transform ``exp(-t^alpha)``.

    Uses the sine construction: with ``U ~ Uniform(0, pi)`` and
    ``W ~ Exp(1)``,

        S = (sin((1-alpha) U) / W)^((1-alpha)/alpha) * sin(alpha U) / sin(U)^(1/alpha).
    """
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1) for stable draws, got {alpha!r}")
    if n < 1:
        raise ParameterError("need n >= 1")
    u = rng.uniform(0.0, np.pi, size=n)
    w = rng.exponential(size=n)
    return (np.sin((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha) * np.sin(
        alpha * u
    ) / np.sin(u) ** (1.0 / alpha)


def sample_symmetric_logistic(
    d: int, alpha: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Exact symmetric-logistic sample with unit Frechet margins, shape (n, d).

    ``alpha == 1`` degenerates to independent unit Frechet coordinates; the
    stable variable is then identically one and is skipped.
    """
    if d < 1:
        raise ParameterError("need d >= 1")
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha!r}")
    if n < 1:
        raise ParameterError("need n >= 1")
    e = rng.exponential(size=(n, d))
    if alpha == 1.0:
        return 1.0 / e
    s = sample_positive_stable(alpha, n, rng)
    return (s[:, None] / e) ** alpha


def sample_asymmetric_logistic(
    model: AsymmetricLogistic, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Exact asymmetric-logistic sample with unit Frechet margins.

    Draws one symmetric-logistic vector per charged subset and takes the
    weighted componentwise maximum; the per-coordinate weight constraint
    keeps the margins exactly unit Frechet.
    """
    if n < 1:
        raise ParameterError("need n >= 1")
    out = np.zeros((n, model.d))
    for j, b in enumerate(model.subsets):
        idx = list(b)
        x = sample_symmetric_logistic(len(idx), model.alphas[j], n, rng)
        # fancy indexing yields a copy, so the max must be written back
        out[:, idx] = np.maximum(out[:, idx], x * model.lam[idx, j])
    return out


# ---------------------------------------------------------------------------
# Spectral generator
# ---------------------------------------------------------------------------


@dataclass
class GeneratorParams:
    """Rectifier MLP mapping latent Gaussians to nonnegative spectral points.

    Every layer applies a rectifier, the output one included, so generated
    points are always componentwise nonnegative.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        if len(self.weights) != len(self.biases):
            raise ParameterError("need one bias vector per layer")
        if len(self.weights) < 1:
            raise ParameterError("need at least one layer")

    @property
    def latent_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def d(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "GeneratorParams":
        return GeneratorParams(
            weights=[m.copy() for m in self.weights],
            biases=[v.copy() for v in self.biases],
        )

    def arrays(self) -> list[np.ndarray]:
        return list(self.weights) + list(self.biases)


def init_generator(
    d: int,
    latent_dim: int | None = None,
    widths: tuple[int, ...] = (256, 256),
    rng: np.random.Generator | None = None,
) -> GeneratorParams:
    """He-scaled random initial generator with slightly positive biases."""
    if d < 1:
        raise ParameterError("need d >= 1")
    rng = np.random.default_rng() if rng is None else rng
    k = default_latent_dim(d) if latent_dim is None else latent_dim
    if k < 1:
        raise ParameterError("latent dimension must be >= 1")
    dims = [k, *widths, d]
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_out, fan_in)))
        biases.append(np.full(fan_out, 0.1))
    return GeneratorParams(weights=weights, biases=biases)


def generator_forward(gen: GeneratorParams, latents: np.ndarray) -> np.ndarray:
    """Spectral points for a batch of latent vectors, shape (n, d)."""
    y, _ = _gen_forward(gen, np.atleast_2d(np.asarray(latents, dtype=float)))
    return y


def _gen_forward(gen: GeneratorParams, z: np.ndarray):
    pres = []
    act = z
    acts = [z]
    for w, b in zip(gen.weights, gen.biases):
        pre = act @ w.T + b
        pres.append(pre)
        act = np.maximum(pre, 0.0)
        acts.append(act)
    return act, (pres, acts)


def _gen_backward(gen: GeneratorParams, cache, dy: np.ndarray) -> GeneratorParams:
    """Gradients of ``sum_ij dy_ij * y_ij`` with respect to the parameters."""
    pres, acts = cache
    n_layers = len(gen.weights)
    gw = [None] * n_layers
    gb = [None] * n_layers
    delta = dy * (pres[-1] > 0)
    for layer in range(n_layers - 1, -1, -1):
        if layer < n_layers - 1:
            delta *= pres[layer] > 0
        gw[layer] = delta.T @ acts[layer]
        gb[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ gen.weights[layer]
    return GeneratorParams(weights=gw, biases=gb)


def generator_loss(
    target: PickandsModel,
    gen: GeneratorParams,
    points: np.ndarray,
    latents: np.ndarray,
) -> float:
    """Moment-matching objective at fixed simplex points and latents.

    ``sum_j (A(w_j) - mean_i max_k w_jk y_ik)^2 + || mean_i y_i - 1 ||^2``
    with ``y = G(latents)``.  The first sum runs over the supplied simplex
    points, the unit-mean penalty enters once.
    """
    loss, _ = _gen_loss_and_grads(target, gen, points, latents, want_grads=False)
    return loss


def _gen_loss_and_grads(
    target: PickandsModel,
    gen: GeneratorParams,
    points: np.ndarray,
    latents: np.ndarray,
    want_grads: bool = True,
):
    # Arithmetic follows the latent dtype so the training loop can run in
    # single precision; the target is evaluated at the *rounded* points, so
    # the rounding cancels between the two sides of the residual.
    latents = np.asarray(latents)
    points = np.asarray(points, dtype=latents.dtype)
    a_target = np.asarray(target.values(points), dtype=latents.dtype)
    y, cache = _gen_forward(gen, latents)
    n = y.shape[0]
    # scaled[j, i, k] = w_jk * y_ik; max over k with ties to the lowest index.
    scaled = points[:, None, :] * y[None, :, :]
    arg = scaled.argmax(axis=2)
    emp = np.take_along_axis(scaled, arg[:, :, None], axis=2)[:, :, 0].mean(axis=1)
    resid = a_target - emp
    mean_gap = y.mean(axis=0) - 1.0
    loss = float(np.sum(resid**2) + np.sum(mean_gap**2))
    if not want_grads:
        return loss, None
    dy = np.empty_like(y)
    # d/dy of the moment term: -2 resid_j / n routed to the argmax coordinate;
    # the scatter is expressed as one matvec per coordinate.
    coeff = -2.0 * resid / n
    for k in range(y.shape[1]):
        dy[:, k] = (coeff * points[:, k]) @ (arg == k)
    dy += 2.0 * mean_gap / n
    grads = _gen_backward(gen, cache, dy)
    return loss, grads


@dataclass(frozen=True)
class GenTrainConfig:
    """Hyperparameters for :func:`train_generator`."""

    epochs: int = 3000
    learning_rate: float = 3e-3
    beta1: float = 0.5
    beta2: float = 0.99
    lr_decay: float = 0.9994
    n_simplex: int = 128
    # Wide generation batches matter: the squared error of the batch mean
    # is biased low by the mean's variance, and at small n_gen that bias
    # visibly distorts the learned spectral law.
    n_gen: int = 2048
    latent_dim: int | None = None
    widths: tuple[int, ...] = (256, 256)
    tolerance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ParameterError("learning rate must be positive")
        if not (0.0 < self.lr_decay <= 1.0):
            raise ParameterError("lr decay must lie in (0, 1]")
        if self.n_simplex < 1 or self.n_gen < 1:
            raise ParameterError("batch sizes must be >= 1")
        if self.tolerance < 0:
            raise ParameterError("tolerance must be nonnegative")


@dataclass(frozen=True)
class GenTrainingLog:
    """Per-epoch losses (truncated at early stop) and the final learning rate."""

    epoch_loss: np.ndarray
    final_lr: float
    stopped_early: bool


def train_generator(
    target: PickandsModel, cfg: GenTrainConfig = GenTrainConfig()
) -> tuple[GeneratorParams, GenTrainingLog]:
    """Fit the spectral generator to a target Pickands function.

    Fresh simplex points and latents are drawn every epoch; optimisation is
    Adam with the configured moment constants and multiplicative learning
    rate decay.  Stops early once the loss falls to ``cfg.tolerance``.
    """
    d = target.d
    rng = np.random.default_rng(cfg.seed)
    gen = init_generator(d, cfg.latent_dim, cfg.widths, rng)
    arrays = gen.arrays()
    m = [np.zeros_like(a) for a in arrays]
    v = [np.zeros_like(a) for a in arrays]
    lr = cfg.learning_rate
    losses = []
    stopped = False
    for epoch in range(cfg.epochs):
        points = sample_simplex_uniform(d, cfg.n_simplex, rng)
        # The epoch runs in single precision (the 2x-faster BLAS path); its
        # rounding is zero-mean and orders below the minibatch noise. Master
        # weights and Adam state stay double so the updates accumulate
        # exactly.
        latents = rng.standard_normal((cfg.n_gen, gen.latent_dim), dtype=np.float32)
        work = GeneratorParams(
            weights=[w.astype(np.float32) for w in gen.weights],
            biases=[b.astype(np.float32) for b in gen.biases],
        )
        loss, grads = _gen_loss_and_grads(target, work, points, latents)
        if not np.isfinite(loss):
            raise TrainingDivergedError(
                f"generator loss became non-finite at epoch {epoch}"
            )
        losses.append(loss)
        if loss <= cfg.tolerance:
            stopped = True
            break
        t = epoch + 1
        for arr, grad, mm, vv in zip(arrays, grads.arrays(), m, v):
            mm *= cfg.beta1
            mm += (1.0 - cfg.beta1) * grad
            vv *= cfg.beta2
            vv += (1.0 - cfg.beta2) * grad * grad
            m_hat = mm / (1.0 - cfg.beta1**t)
            v_hat = vv / (1.0 - cfg.beta2**t)
            arr -= lr * m_hat / (np.sqrt(v_hat) + 1e-8)
        lr *= cfg.lr_decay
    return gen, GenTrainingLog(
        epoch_loss=np.asarray(losses), final_lr=lr, stopped_early=stopped
    )


# ---------------------------------------------------------------------------
# Heuristic max-stable sampling
# ---------------------------------------------------------------------------


def sample_mev_heuristic(
    gen: GeneratorParams,
    n_events: int,
    rng: np.random.Generator,
    normalize: bool = True,
) -> np.ndarray:
    """One approximate max-stable vector ``max_i xi_i * Y_i`` over ``n_events``.

    ``xi_i`` are i.i.d. unit Frechet.  With ``normalize`` the result is
    divided by ``n_events``, bringing the margins back to approximately unit
    Frechet; rank-based dependence summaries are unaffected either way.
    """
    return sample_mev(gen, 1, n_events, rng, normalize=normalize)[0]


def sample_mev(
    gen: GeneratorParams,
    n_samples: int,
    n_events: int,
    rng: np.random.Generator,
    normalize: bool = True,
) -> np.ndarray:
    """Batch of approximate max-stable vectors, shape (n_samples, d).

    The spectral forwards run in single precision (the event count times the
    sample count dwarfs every other forward in the package); the returned
    maxima are float64.
    """
    if n_samples < 1 or n_events < 1:
        raise ParameterError("need n_samples >= 1 and n_events >= 1")
    d = gen.d
    work = GeneratorParams(
        weights=[w.astype(np.float32) for w in gen.weights],
        biases=[b.astype(np.float32) for b in gen.biases],
    )
    out = np.empty((n_samples, d))
    per_chunk = max(1, _FORWARD_CHUNK_ROWS // n_events)
    for start in range(0, n_samples, per_chunk):
        stop = min(n_samples, start + per_chunk)
        c = stop - start
        latents = rng.standard_normal((c * n_events, gen.latent_dim), dtype=np.float32)
        y, _ = _gen_forward(work, latents)
        y = y.reshape(c, n_events, d)
        xi = (1.0 / rng.exponential(size=(c, n_events))).astype(np.float32)
        out[start:stop] = (xi[:, :, None] * y).max(axis=1)
    if normalize:
        out /= n_events
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_FORMAT = "evcopula.spectral-generator"
_VERSION = 1


def save_generator(gen: GeneratorParams, path, cfg: GenTrainConfig | None = None) -> None:
    """Write the generator as a versioned JSON document (bit-exact floats)."""
    doc = {
        "format": _FORMAT,
        "version": _VERSION,
        "dimension": gen.d,
        "latent_dim": gen.latent_dim,
        "widths": [w.shape[0] for w in gen.weights[:-1]],
        "weights": [m.tolist() for m in gen.weights],
        "biases": [v.tolist() for v in gen.biases],
        "train_config": None
        if cfg is None
        else {
            "epochs": cfg.epochs,
            "learning_rate": cfg.learning_rate,
            "beta1": cfg.beta1,
            "beta2": cfg.beta2,
            "lr_decay": cfg.lr_decay,
            "n_simplex": cfg.n_simplex,
            "n_gen": cfg.n_gen,
            "latent_dim": cfg.latent_dim,
            "widths": list(cfg.widths),
            "tolerance": cfg.tolerance,
            "seed": cfg.seed,
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_generator(path) -> GeneratorParams:
    """Load a generator written by :func:`save_generator`."""
    with open(path) as fh:
        doc = json.load(fh)
    from .icnn import ModelFormatError

    if not isinstance(doc, dict) or doc.get("format") != _FORMAT:
        raise ModelFormatError(f"{path}: not a {_FORMAT} document")
    if doc.get("version") != _VERSION:
        raise ModelFormatError(f"{path}: unsupported version {doc.get('version')!r}")
    return GeneratorParams(
        weights=[np.asarray(m, dtype=float) for m in doc["weights"]],
        biases=[np.asarray(v, dtype=float) for v in doc["biases"]],
    )
