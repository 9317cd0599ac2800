"""Input-convex network model of the Pickands dependence function.

The network is convex in its input by construction: recurrent weights are
kept elementwise nonnegative (projected after every optimizer step) and all
activations are convex and nondecreasing.  With hidden width ``h`` and depth
``L`` (number of hidden layers),

    z_1     = leaky(W_w[0] @ w + b[0])                      leaky slope 0.01
    z_{l+1} = relu(W_z[l-1] @ z_l + W_w[l] @ w + b[l])      l = 1 .. L-1
    f(w)    = W_z[L-1] @ z_L + W_w[L] @ w + b[L]            scalar

The Pickands head pins the simplex vertices to one exactly:

    A(w) = relu( f(w) - sum_k w_k f(e_k) + 1 )

so ``A(e_k) == 1`` for any parameter values.  Training minimises the
exponential maximum-likelihood loss ``A(w) Z_w - log A(w)`` over fresh
uniform simplex points and the data's Z statistics, plus a hinge penalty
that discourages excursions outside ``[max_k w_k, 1]``.  Gradients are
computed by a reverse pass written for this fixed architecture (the vertex
evaluations ``f(e_k)`` are differentiated through, not treated as
constants), and checked against central finite differences in the tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .core import ParameterError, PickandsModel, as_simplex_batch, sample_simplex_uniform
from .pipeline import Uniformized, z_statistics_grid

LOG_FLOOR = 1e-8


class TrainingDivergedError(RuntimeError):
    """Loss or parameters became non-finite during optimisation."""


class ModelFormatError(ValueError):
    """A serialized model document is malformed or of an unknown version."""


# ---------------------------------------------------------------------------
# Parameters and forward pass
# ---------------------------------------------------------------------------


@dataclass
class IcnnParams:
    """Weights of the convex network; see the module docstring for shapes."""

    w_weights: list[np.ndarray]
    z_weights: list[np.ndarray]
    biases: list[np.ndarray]
    negative_slope: float = 0.01

    def __post_init__(self):
        if len(self.w_weights) != len(self.biases):
            raise ParameterError("need one bias vector per affine layer")
        if len(self.z_weights) != len(self.w_weights) - 1:
            raise ParameterError("need one recurrent matrix per non-input layer")
        if not (0.0 <= self.negative_slope < 1.0):
            raise ParameterError("negative slope must lie in [0, 1)")

    @property
    def d(self) -> int:
        return self.w_weights[0].shape[1]

    @property
    def width(self) -> int:
        return self.w_weights[0].shape[0]

    @property
    def depth(self) -> int:
        return len(self.z_weights)

    def copy(self) -> "IcnnParams":
        return IcnnParams(
            w_weights=[m.copy() for m in self.w_weights],
            z_weights=[m.copy() for m in self.z_weights],
            biases=[v.copy() for v in self.biases],
            negative_slope=self.negative_slope,
        )

    def arrays(self) -> list[np.ndarray]:
        """All parameter arrays in a fixed order (shared with gradients)."""
        return list(self.w_weights) + list(self.z_weights) + list(self.biases)


def init_params(
    d: int,
    width: int = 16,
    depth: int = 4,
    negative_slope: float = 0.01,
    rng: np.random.Generator | None = None,
) -> IcnnParams:
    """Random initial parameters with nonnegative recurrent weights.

    Scales are chosen so initial outputs stay order-one and rectifier units
    start active; small positive biases avoid dead units at step zero.
    """
    if d < 2:
        raise ParameterError(f"dimension must be >= 2, got {d}")
    if width < 1 or depth < 1:
        raise ParameterError("width and depth must be positive")
    rng = np.random.default_rng() if rng is None else rng
    w_weights = []
    z_weights = []
    biases = []
    for layer in range(depth + 1):
        out_dim = 1 if layer == depth else width
        w_weights.append(rng.normal(0.0, 1.0 / np.sqrt(d), size=(out_dim, d)))
        biases.append(np.full(out_dim, 0.1))
        if layer >= 1:
            z_weights.append(rng.uniform(0.0, 1.0 / width, size=(out_dim, width)))
    return IcnnParams(
        w_weights=w_weights,
        z_weights=z_weights,
        biases=biases,
        negative_slope=negative_slope,
    )


def icnn_forward(params: IcnnParams, points: np.ndarray) -> np.ndarray:
    """Convex network output ``f`` at each row of ``points`` (no validation)."""
    y, _ = _forward(params, np.atleast_2d(np.asarray(points, dtype=float)))
    return y


def _forward(params: IcnnParams, x: np.ndarray):
    """Batched forward pass returning outputs and the cache for backprop."""
    slope = params.negative_slope
    pre = x @ params.w_weights[0].T + params.biases[0]
    acts = [np.where(pre > 0, pre, slope * pre)]
    pres = [pre]
    for layer in range(1, params.depth + 1):
        pre = (
            acts[-1] @ params.z_weights[layer - 1].T
            + x @ params.w_weights[layer].T
            + params.biases[layer]
        )
        if layer < params.depth:
            pres.append(pre)
            acts.append(np.maximum(pre, 0.0))
    return pre[:, 0], (x, pres, acts)


def _backward(params: IcnnParams, cache, dy: np.ndarray) -> "IcnnParams":
    """Gradients of ``sum_i dy_i * f(x_i)`` with respect to every parameter."""
    x, pres, acts = cache
    gw = [np.zeros_like(m) for m in params.w_weights]
    gz = [np.zeros_like(m) for m in params.z_weights]
    gb = [np.zeros_like(v) for v in params.biases]

    # Output layer is affine: delta is dy itself.
    delta = dy[:, None]
    gz[-1] += delta.T @ acts[-1]
    gw[-1] += delta.T @ x
    gb[-1] += delta.sum(axis=0)
    dz = delta @ params.z_weights[-1]

    for layer in range(params.depth - 1, -1, -1):
        pre = pres[layer]
        if layer == 0:
            dact = np.where(pre > 0, 1.0, params.negative_slope)
        else:
            dact = (pre > 0).astype(float)
        delta = dz * dact
        gw[layer] += delta.T @ x
        gb[layer] += delta.sum(axis=0)
        if layer > 0:
            gz[layer - 1] += delta.T @ acts[layer - 1]
            dz = delta @ params.z_weights[layer - 1]
    return IcnnParams(
        w_weights=gw, z_weights=gz, biases=gb, negative_slope=params.negative_slope
    )


# ---------------------------------------------------------------------------
# Pickands head and losses
# ---------------------------------------------------------------------------


def pickands_from_icnn(params: IcnnParams, points) -> np.ndarray:
    """Vertex-corrected, rectified Pickands values (pre-clamp) on a batch."""
    pts = as_simplex_batch(points, params.d)
    stacked = np.vstack([pts, np.eye(params.d)])
    f, _ = _forward(params, stacked)
    f_pts, f_verts = f[: pts.shape[0]], f[pts.shape[0] :]
    return np.maximum(f_pts - pts @ f_verts + 1.0, 0.0)


def mle_loss(a_value: float, z: float) -> float:
    """Exponential maximum-likelihood loss ``a z - log a``.

    Nonpositive ``a`` is floored at ``LOG_FLOOR`` inside the logarithm only;
    the linear term keeps the raw value.
    """
    return float(a_value * z - np.log(max(a_value, LOG_FLOOR)))


def backprop(params: IcnnParams, w, z: float) -> IcnnParams:
    """Gradient of ``mle_loss(A(w), z)`` with respect to every parameter.

    Differentiates through the vertex evaluations in the corner correction.
    Returns an :class:`IcnnParams` whose arrays hold the gradients.
    """
    pts = as_simplex_batch(np.asarray(w, dtype=float)[None, :], params.d)
    grads, _, _ = _loss_and_grads(
        params, pts, np.array([float(z)]), penalty_weight=0.0
    )
    return grads


def _loss_and_grads(
    params: IcnnParams,
    points: np.ndarray,
    z_means: np.ndarray,
    penalty_weight: float,
):
    """Mean loss over simplex points, its parameter gradients, and mean A.

    ``z_means[j]`` is the batch-mean Z statistic at ``points[j]``; the mean
    over rows commutes with the loss's linear term, so it is taken before
    calling here.  The hinge penalty acts on the pre-clamp A values.
    """
    n = points.shape[0]
    d = params.d
    stacked = np.vstack([points, np.eye(d)])
    f, cache = _forward(params, stacked)
    f_pts, f_verts = f[:n], f[n:]
    g = f_pts - points @ f_verts + 1.0
    a = np.maximum(g, 0.0)

    w_max = points.max(axis=1)
    over = np.maximum(a - 1.0, 0.0)
    under = np.maximum(w_max - a, 0.0)
    loss_terms = (
        a * z_means
        - np.log(np.maximum(a, LOG_FLOOR))
        + penalty_weight * (over**2 + under**2)
    )
    loss = float(loss_terms.mean())

    da = z_means - (a > LOG_FLOOR) / np.maximum(a, LOG_FLOOR)
    da = da + penalty_weight * (2.0 * over - 2.0 * under)
    da /= n
    dg = da * (g > 0)
    # Upstream gradient on f: direct term on the points, and the corner
    # correction pushes -sum_j dg_j * w_jk onto each vertex evaluation.
    dy = np.concatenate([dg, -points.T @ dg])
    grads = _backward(params, cache, dy)
    return grads, loss, float(a.mean())


# ---------------------------------------------------------------------------
# Optimiser and training loop
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    """First/second moment accumulators for :func:`adam_step`."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: IcnnParams) -> "AdamState":
        arrays = params.arrays()
        return cls(
            m=[np.zeros_like(a) for a in arrays],
            v=[np.zeros_like(a) for a in arrays],
        )


def adam_step(
    params: IcnnParams,
    grads: IcnnParams,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One bias-corrected Adam update in place, then the convexity projection.

    Recurrent weights are clipped at zero after the step, which is what keeps
    the network convex throughout training.
    """
    state.t += 1
    t = state.t
    for arr, grad, m, v in zip(params.arrays(), grads.arrays(), state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        arr -= lr * m_hat / (np.sqrt(v_hat) + eps)
    for mzt in params.z_weights:
        np.maximum(mzt, 0.0, out=mzt)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for :func:`train_pickands_icnn`.

    ``batch_size=None`` uses the full dataset every step, the right choice
    for synthetic benchmarks; per-epoch step count is ``ceil(B / batch)``
    otherwise.  Fresh simplex points are drawn every step and shared across
    the minibatch, pairing every row with every point.
    """

    epochs: int = 1000
    batch_size: int | None = None
    learning_rate: float = 1e-3
    lr_decay: float = 0.9998
    simplex_samples_per_step: int = 1000
    penalty_weight: float = 1.0
    width: int = 16
    depth: int = 4
    negative_slope: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterError("epochs must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ParameterError("batch size must be >= 1")
        if self.learning_rate <= 0:
            raise ParameterError("learning rate must be positive")
        if not (0.0 < self.lr_decay <= 1.0):
            raise ParameterError("lr decay must lie in (0, 1]")
        if self.simplex_samples_per_step < 1:
            raise ParameterError("need at least one simplex sample per step")
        if self.penalty_weight < 0:
            raise ParameterError("penalty weight must be nonnegative")


@dataclass(frozen=True)
class TrainingLog:
    """Per-epoch mean losses and the final learning rate."""

    epoch_loss: np.ndarray
    final_lr: float


@dataclass(frozen=True, eq=False)
class IcnnPickands(PickandsModel):
    """Trained convex-network Pickands model."""

    params: IcnnParams
    d: int = field(init=False, default=0)
    trained_on_reflected: bool = False
    train_config: TrainConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "d", self.params.d)

    def raw_values(self, points: np.ndarray) -> np.ndarray:
        return pickands_from_icnn(self.params, points)


def train_pickands_icnn(
    data: Uniformized, cfg: TrainConfig = TrainConfig()
) -> tuple[IcnnPickands, TrainingLog]:
    """Fit the convex-network Pickands model to uniformized block maxima.

    Deterministic for a given config: initialisation, minibatches, and
    simplex draws all come from one generator seeded with ``cfg.seed``.
    Raises :class:`TrainingDivergedError` if the loss goes non-finite.
    """
    u = data.u
    b, d = u.shape
    rng = np.random.default_rng(cfg.seed)
    params = init_params(d, cfg.width, cfg.depth, cfg.negative_slope, rng)
    state = AdamState.for_params(params)
    neglog_u = -np.log(u)

    batch = b if cfg.batch_size is None else min(cfg.batch_size, b)
    steps_per_epoch = max(1, -(-b // batch))
    lr = cfg.learning_rate
    epoch_loss = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        acc = 0.0
        for _ in range(steps_per_epoch):
            rows = (
                np.arange(b)
                if batch == b
                else rng.choice(b, size=batch, replace=False)
            )
            pts = sample_simplex_uniform(d, cfg.simplex_samples_per_step, rng)
            z_mean = z_statistics_grid(neglog_u[rows], pts).mean(axis=0)
            grads, loss, _ = _loss_and_grads(params, pts, z_mean, cfg.penalty_weight)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}; try a smaller learning rate"
                )
            adam_step(params, grads, state, lr)
            acc += loss
        epoch_loss[epoch] = acc / steps_per_epoch
        lr *= cfg.lr_decay
    model = IcnnPickands(
        params=params, trained_on_reflected=data.reflected, train_config=cfg
    )
    return model, TrainingLog(epoch_loss=epoch_loss, final_lr=lr)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_FORMAT = "evcopula.icnn-pickands"
_VERSION = 1


def save_model(model: IcnnPickands, path) -> None:
    """Write the model as a versioned JSON document.

    Floats are emitted with shortest round-trip repr, so loading restores
    every weight bit-exactly.
    """
    p = model.params
    doc = {
        "format": _FORMAT,
        "version": _VERSION,
        "dimension": p.d,
        "width": p.width,
        "depth": p.depth,
        "negative_slope": p.negative_slope,
        "trained_on_reflected": bool(model.trained_on_reflected),
        "w_weights": [m.tolist() for m in p.w_weights],
        "z_weights": [m.tolist() for m in p.z_weights],
        "biases": [v.tolist() for v in p.biases],
        "train_config": None
        if model.train_config is None
        else {
            "epochs": model.train_config.epochs,
            "batch_size": model.train_config.batch_size,
            "learning_rate": model.train_config.learning_rate,
            "lr_decay": model.train_config.lr_decay,
            "simplex_samples_per_step": model.train_config.simplex_samples_per_step,
            "penalty_weight": model.train_config.penalty_weight,
            "width": model.train_config.width,
            "depth": model.train_config.depth,
            "negative_slope": model.train_config.negative_slope,
            "seed": model.train_config.seed,
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> IcnnPickands:
    """Load a model written by :func:`save_model`."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT:
        raise ModelFormatError(f"{path}: not a {_FORMAT} document")
    if doc.get("version") != _VERSION:
        raise ModelFormatError(
            f"{path}: unsupported version {doc.get('version')!r}"
        )
    params = IcnnParams(
        w_weights=[np.asarray(m, dtype=float) for m in doc["w_weights"]],
        z_weights=[np.asarray(m, dtype=float) for m in doc["z_weights"]],
        biases=[np.asarray(v, dtype=float) for v in doc["biases"]],
        negative_slope=float(doc["negative_slope"]),
    )
    tc = doc.get("train_config")
    cfg = None if tc is None else TrainConfig(**tc)
    return IcnnPickands(
        params=params,
        trained_on_reflected=bool(doc["trained_on_reflected"]),
        train_config=cfg,
    )
