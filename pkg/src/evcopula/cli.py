"""Command-line front-end for fitting, estimation, sampling, and benchmarks.

Five subcommands: ``fit`` trains the convex-network Pickands model and
writes it as JSON, ``estimate`` tabulates dependence-function estimates on a
simplex grid, ``survival`` evaluates joint tail probabilities against
empirical exceedance rates, ``sample`` draws max-stable vectors exactly or
through the learned-generator heuristic, and ``benchmark`` sweeps synthetic
configurations and averages over seeds.

Every option can also be supplied through ``--config file`` holding
``key = value`` lines; explicit flags win over the file, which wins over
built-in defaults.  Each output CSV starts with one ``#`` comment line
carrying a hash of the fully resolved configuration, and reruns with the
same flags and seed produce byte-identical CSVs.

Exit codes: 0 success, 2 bad input or arguments, 3 training divergence,
4 provenance violation (survival from a model not trained on reflected
data).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import figures
from .core import (
    AsymmetricLogistic,
    CompleteDependence,
    ConstantPickands,
    DomainError,
    ParameterError,
    PickandsModel,
    SymmetricLogistic,
    independence_model,
    random_asymmetric_logistic,
    sample_simplex_uniform,
)
from .estimators import METHODS, empirical_pickands
from .icnn import (
    ModelFormatError,
    TrainConfig,
    TrainingDivergedError,
    load_model,
    save_model,
    train_pickands_icnn,
)
from .pipeline import (
    BlockMaxima,
    MIN_FIT_SAMPLES,
    PipelineError,
    block_maxima,
    fit_gev_marginals,
    ingest_csv,
    reflect_transform,
    uniformize,
    use_rank_marginals,
)
from .sampling import (
    GenTrainConfig,
    load_generator,
    sample_asymmetric_logistic,
    sample_mev,
    sample_symmetric_logistic,
    save_generator,
    train_generator,
)
from .survival import (
    ProvenanceError,
    ThresholdVector,
    exact_survival_bivariate,
    survival_probability,
    threshold_grid,
)

_FAMILIES = ("sl", "asl", "independence", "complete")
_BENCHMARKS = ("survival-mse", "pickands-mse", "sampler-cfg")

# Fixed offsets appended to the master seed so each consumer gets an
# independent, reproducible stream.
_STREAM_FAMILY = 11
_STREAM_DATA = 13
_STREAM_POINTS = 17
_STREAM_THRESHOLDS = 19
_STREAM_SAMPLES = 23


# ---------------------------------------------------------------------------
# Option registry and config-file resolution
# ---------------------------------------------------------------------------


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "on", "yes"):
        return True
    if t in ("0", "false", "off", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def _maybe_int(text: str):
    t = text.strip().lower()
    if t in ("none", ""):
        return None
    return int(text)


def _float_list(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise argparse.ArgumentTypeError("expected a comma-separated float list")
    return tuple(float(p) for p in parts)


def _int_list(text: str) -> tuple[int, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise argparse.ArgumentTypeError("expected a comma-separated int list")
    return tuple(int(p) for p in parts)


def _str_list(text: str) -> tuple[str, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return tuple(parts)


@dataclass(frozen=True)
class Opt:
    """One CLI option: flag name, value converter, default, help text."""

    name: str
    conv: object
    default: object
    help: str
    choices: tuple | None = None
    flag: bool = False  # bare switch; config file supplies on/off

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_COMMON = [
    Opt("seed", int, 0, "master seed; every RNG stream derives from it"),
    Opt("out", str, ".", "output directory (created if missing)"),
    Opt("plot", _parse_bool, True, "render PNG figures next to the CSVs"),
]

_DATA_SOURCE = [
    Opt("input", str, None, "CSV of raw observations, one column per coordinate"),
    Opt("columns", _str_list, None, "subset of input columns to use"),
    Opt("block-size", int, 1, "rows per block for component-wise maxima"),
    Opt("synthetic", str, None, "synthetic family instead of --input", _FAMILIES),
    Opt("alpha", float, 0.5, "logistic dependence parameter in (0, 1]"),
    Opt("d", int, 2, "dimension for synthetic data"),
    Opt("blocks", int, 1000, "number of synthetic block maxima"),
    Opt(
        "margins",
        str,
        "ranks",
        "marginal uniformization",
        ("ranks", "lmoments", "mle"),
    ),
]

_ICNN_TRAIN = [
    Opt("epochs", int, 1000, "training epochs"),
    Opt("batch-size", _maybe_int, None, "minibatch rows (none = full batch)"),
    Opt("learning-rate", float, 1e-3, "Adam learning rate"),
    Opt("lr-decay", float, 0.9998, "per-epoch learning-rate decay"),
    Opt("width", int, 16, "hidden width of the convex network"),
    Opt("depth", int, 4, "hidden layers of the convex network"),
    Opt("penalty-weight", float, 1.0, "weight of the admissible-band hinge penalty"),
    Opt("simplex-samples", int, 1000, "fresh simplex points per step"),
]

_OPTS: dict[str, list[Opt]] = {
    "fit": _DATA_SOURCE
    + _ICNN_TRAIN
    + [
        Opt(
            "reflect",
            _parse_bool,
            False,
            "train on reflection-transformed maxima (required for survival use)",
            flag=True,
        ),
    ],
    "estimate": _DATA_SOURCE
    + _ICNN_TRAIN
    + [
        Opt(
            "estimators",
            _str_list,
            ("pickands", "cfg", "cfg-corrected", "bdv", "bdv-mm"),
            "comma-separated estimators; any of "
            + ",".join(METHODS + ("icnn",)),
        ),
        Opt("grid", int, None, "evenly spaced grid size (d == 2 only)"),
        Opt("points", int, None, "random simplex points (any d)"),
    ],
    "survival": _DATA_SOURCE
    + [
        Opt("model", str, None, "trained model JSON (from fit --reflect)"),
        Opt(
            "baseline",
            str,
            "none",
            "add an analytic baseline column",
            ("none", "independence"),
        ),
        Opt("thresholds", int, 50, "number of random joint thresholds"),
        Opt("floor", float, 0.75, "lower bound on marginal threshold probability"),
        Opt(
            "probs",
            _float_list,
            None,
            "explicit marginal probabilities, one threshold per value",
        ),
    ],
    "sample": [
        Opt("exact", str, None, "draw exactly from this family", _FAMILIES),
        Opt(
            "learned",
            _parse_bool,
            False,
            "train a spectral generator and run the max-event heuristic",
            flag=True,
        ),
        Opt("target", str, None, "generator target: family name or model JSON"),
        Opt("generator", str, None, "reuse a saved generator JSON"),
        Opt("alpha", float, 0.5, "logistic dependence parameter in (0, 1]"),
        Opt("d", int, 2, "dimension"),
        Opt("n", int, 10_000, "number of sampled vectors"),
        Opt("events", int, 500, "Frechet events per heuristic sample"),
        Opt("normalize", _parse_bool, True, "divide heuristic maxima by --events"),
        Opt("epochs", int, 3000, "generator training epochs"),
        Opt("learning-rate", float, 3e-3, "generator Adam learning rate"),
        Opt("n-gen", int, 2048, "generator outputs per training step"),
        Opt("n-simplex", int, 128, "simplex points per training step"),
        Opt("tolerance", float, 0.0, "stop generator training at this loss"),
    ],
    "benchmark": [
        Opt("alphas", _float_list, None, "dependence sweep (survival/sampler)"),
        Opt("dims", _int_list, None, "dimension sweep (pickands-mse)"),
        Opt("blocks", int, None, "block maxima per cell"),
        Opt("seeds", int, 5, "independent repetitions per cell"),
        Opt("points", int, 1000, "simplex points for MSE evaluation"),
        Opt("epochs", _maybe_int, None, "training epochs override"),
        Opt("n", int, 10_000, "samples per cell (sampler-cfg)"),
        Opt("events", int, 500, "Frechet events per heuristic sample"),
        Opt("thresholds", int, 50, "thresholds per cell (survival-mse)"),
        Opt("floor", float, 0.75, "threshold probability floor (survival-mse)"),
    ],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evcopula",
        description="Extreme-value copulas: convex-network Pickands models, "
        "classical estimators, survival probabilities, and max-stable "
        "sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "fit": "train a convex-network Pickands model and save it as JSON",
        "estimate": "tabulate dependence-function estimates on a simplex grid",
        "survival": "joint tail probabilities from a reflected-data model",
        "sample": "draw max-stable vectors, exactly or via the heuristic",
        "benchmark": "sweep synthetic configurations, average over seeds",
    }
    for command, opts in _OPTS.items():
        p = sub.add_parser(command, help=descriptions[command])
        p.add_argument("--config", default=None, help="key = value defaults file")
        if command == "benchmark":
            p.add_argument("name", choices=_BENCHMARKS, help="benchmark to run")
        for opt in _COMMON + opts:
            if opt.flag:
                p.add_argument(
                    f"--{opt.name}",
                    action="store_const",
                    const=True,
                    default=None,
                    help=opt.help,
                )
            else:
                p.add_argument(
                    f"--{opt.name}",
                    type=opt.conv,
                    default=None,
                    choices=opt.choices,
                    help=opt.help,
                    metavar="on|off" if opt.conv is _parse_bool else None,
                )
    return parser


def _read_config(path: str, known: dict[str, Opt]) -> dict:
    """Parse a key = value file into converted option values."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PipelineError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PipelineError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in known:
            raise PipelineError(f"{path}:{lineno}: unknown option {key!r}")
        opt = known[key]
        try:
            values[key] = opt.conv(value.strip())
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise PipelineError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge flags, config-file values, and registry defaults."""
    opts = _COMMON + _OPTS[args.command]
    known = {o.dest: o for o in opts}
    file_values = _read_config(args.config, known) if args.config else {}
    ns = argparse.Namespace(command=args.command)
    for opt in opts:
        value = getattr(args, opt.dest)
        if value is None:
            value = file_values.get(opt.dest, opt.default)
        setattr(ns, opt.dest, value)
    if args.command == "benchmark":
        ns.name = args.name
    return ns


def _config_meta(ns: argparse.Namespace) -> str:
    # out and plot are plumbing: they do not affect CSV content, so they are
    # excluded to keep reruns byte-identical wherever they are written.
    resolved = {
        k: v for k, v in sorted(vars(ns).items()) if k not in ("out", "plot")
    }
    digest = hashlib.sha256(
        json.dumps(resolved, sort_keys=True, default=str).encode()
    ).hexdigest()[:12]
    return f"# evcopula {ns.command} config-sha256={digest} seed={ns.seed}"


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return value


def _write_csv(path: Path, meta: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(meta + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _outdir(ns) -> Path:
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Shared data plumbing
# ---------------------------------------------------------------------------


def _family_model(name: str, alpha: float, d: int, seed: int) -> PickandsModel:
    if name == "sl":
        return SymmetricLogistic(alpha=alpha, d=d)
    if name == "asl":
        return random_asymmetric_logistic(
            d, alpha, np.random.default_rng([seed, _STREAM_FAMILY])
        )
    if name == "independence":
        return independence_model(d)
    if name == "complete":
        return CompleteDependence(d=d)
    raise ParameterError(f"unknown family {name!r}; choose from {_FAMILIES}")


def _sample_family(model: PickandsModel, n: int, rng: np.random.Generator):
    if isinstance(model, SymmetricLogistic):
        return sample_symmetric_logistic(model.d, model.alpha, n, rng)
    if isinstance(model, AsymmetricLogistic):
        return sample_asymmetric_logistic(model, n, rng)
    if isinstance(model, CompleteDependence):
        common = 1.0 / rng.exponential(size=n)
        return np.tile(common[:, None], (1, model.d))
    raise ParameterError(f"no exact sampler for {type(model).__name__}")


def _load_blocks(ns) -> tuple[BlockMaxima, PickandsModel | None]:
    """Block maxima from --input or a synthetic family, plus the true model."""
    if ns.input is not None and ns.synthetic is not None:
        raise ParameterError("give either --input or --synthetic, not both")
    if ns.input is not None:
        data = ingest_csv(ns.input, list(ns.columns) if ns.columns else None)
        bm = block_maxima(data, ns.block_size)
        family = None
    elif ns.synthetic is not None:
        family = _family_model(ns.synthetic, ns.alpha, ns.d, ns.seed)
        draws = _sample_family(
            family, ns.blocks, np.random.default_rng([ns.seed, _STREAM_DATA])
        )
        bm = BlockMaxima(maxima=draws, block_size=1)
    else:
        raise ParameterError("need a data source: --input file or --synthetic family")
    if bm.n_blocks < MIN_FIT_SAMPLES:
        print(
            f"warning: only {bm.n_blocks} blocks; estimates will be noisy",
            file=sys.stderr,
        )
    return bm, family


def _with_margins(bm: BlockMaxima, margins: str) -> BlockMaxima:
    if margins == "ranks":
        return use_rank_marginals(bm)
    return fit_gev_marginals(bm, method=margins)


def _train_icnn_from(ns, data, seed=None):
    cfg = TrainConfig(
        epochs=ns.epochs,
        batch_size=ns.batch_size,
        learning_rate=ns.learning_rate,
        lr_decay=ns.lr_decay,
        simplex_samples_per_step=ns.simplex_samples,
        penalty_weight=ns.penalty_weight,
        width=ns.width,
        depth=ns.depth,
        seed=ns.seed if seed is None else seed,
    )
    return train_pickands_icnn(data, cfg)


def _curve_grid(n: int) -> np.ndarray:
    w1 = np.linspace(0.0, 1.0, n)
    return np.column_stack([w1, 1.0 - w1])


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_fit(ns) -> int:
    out = _outdir(ns)
    meta = _config_meta(ns)
    bm, family = _load_blocks(ns)
    bm = _with_margins(bm, ns.margins)
    if ns.reflect:
        bm = reflect_transform(bm)
    data = uniformize(bm)
    model, log = _train_icnn_from(ns, data)

    model_path = out / "model.json"
    save_model(model, model_path)
    _write_csv(
        out / "training_log.csv",
        meta,
        ["epoch", "loss"],
        ((i + 1, loss) for i, loss in enumerate(log.epoch_loss)),
    )
    if ns.plot:
        figures.save_loss_curve(log.epoch_loss, out / "training_loss.png")
        if model.d == 2:
            pts = _curve_grid(201)
            curves = {"fitted": model.values(pts)}
            if family is not None and not ns.reflect:
                curves["analytic"] = family.values(pts)
            figures.save_pickands_curves(
                pts[:, 0], curves, out / "fitted_pickands.png"
            )
    print(
        f"fit: {data.n_blocks} blocks, d={data.d}, reflected={data.reflected}, "
        f"final loss {log.epoch_loss[-1]:.6f} -> {model_path}"
    )
    return 0


def cmd_estimate(ns) -> int:
    out = _outdir(ns)
    meta = _config_meta(ns)
    valid = METHODS + ("icnn",)
    methods = list(ns.estimators)
    for m in methods:
        if m not in valid:
            raise ParameterError(f"unknown estimator {m!r}; choose from {valid}")
    bm, family = _load_blocks(ns)
    data = uniformize(_with_margins(bm, ns.margins))
    d = data.d

    if d == 2 and ns.points is None:
        points = _curve_grid(101 if ns.grid is None else ns.grid)
    else:
        count = 200 if ns.points is None else ns.points
        points = sample_simplex_uniform(
            d, count, np.random.default_rng([ns.seed, _STREAM_POINTS])
        ) if count else np.empty((0, d))

    columns: dict[str, np.ndarray] = {}
    for m in methods:
        if m == "icnn":
            model, _ = _train_icnn_from(ns, data)
            columns[m] = model.values(points) if points.size else np.empty(0)
        else:
            est = empirical_pickands(data, method=m)
            columns[m] = est.values(points) if points.size else np.empty(0)
    if family is not None:
        columns["analytic"] = (
            family.values(points) if points.size else np.empty(0)
        )

    header = [f"w_{k + 1}" for k in range(d)] + list(columns)
    rows = (
        list(points[i]) + [columns[c][i] for c in columns]
        for i in range(points.shape[0])
    )
    csv_path = out / "estimates.csv"
    _write_csv(csv_path, meta, header, rows)
    if ns.plot and points.shape[0]:
        if d == 2:
            order = np.argsort(points[:, 0])
            figures.save_pickands_curves(
                points[order, 0],
                {c: columns[c][order] for c in columns},
                out / "estimates.png",
            )
        else:
            figures.save_pickands_scatter(
                points.max(axis=1), columns, out / "estimates.png"
            )
    print(f"estimate: {points.shape[0]} points x {len(columns)} columns -> {csv_path}")
    return 0


def _explicit_thresholds(bm: BlockMaxima, probs, floor: float) -> list[ThresholdVector]:
    hi = bm.n_blocks / (bm.n_blocks + 1.0)
    grid = []
    for p in probs:
        if p < floor:
            raise ParameterError(
                f"threshold probability {p} is below the floor {floor}"
            )
        if p >= hi:
            raise ParameterError(
                f"threshold probability {p} exceeds the resolvable {hi:.6f} "
                f"for B={bm.n_blocks} blocks"
            )
        pvec = np.full(bm.d, float(p))
        values = np.array(
            [np.quantile(bm.maxima[:, k], p) for k in range(bm.d)]
        )
        grid.append(ThresholdVector(values=values, probs=pvec))
    return grid


def cmd_survival(ns) -> int:
    out = _outdir(ns)
    meta = _config_meta(ns)
    bm, family = _load_blocks(ns)

    estimates: dict[str, PickandsModel] = {}
    if ns.model is not None:
        estimates["model"] = load_model(ns.model)
    if ns.baseline == "independence":
        estimates["baseline"] = ConstantPickands(value=1.0, d=bm.d).mark_reflected()
    if not estimates:
        raise ParameterError("need --model and/or --baseline independence")

    if ns.probs is not None:
        grid = _explicit_thresholds(bm, ns.probs, ns.floor)
    else:
        grid = threshold_grid(
            bm, ns.thresholds, ns.floor,
            np.random.default_rng([ns.seed, _STREAM_THRESHOLDS]),
        )

    empirical = np.array(
        [float(np.mean(np.all(bm.maxima >= t.values, axis=1))) for t in grid]
    )
    columns: dict[str, np.ndarray] = {"empirical": empirical}
    for label, model in estimates.items():
        columns[label] = np.array(
            [survival_probability(model, t.probs) for t in grid]
        )
    if family is not None and bm.d == 2:
        columns["exact"] = np.array(
            [exact_survival_bivariate(family, t.probs[0], t.probs[1]) for t in grid]
        )

    d = bm.d
    header = (
        [f"prob_{k + 1}" for k in range(d)]
        + [f"value_{k + 1}" for k in range(d)]
        + list(columns)
    )
    rows = (
        list(grid[i].probs) + list(grid[i].values) + [columns[c][i] for c in columns]
        for i in range(len(grid))
    )
    csv_path = out / "survival.csv"
    _write_csv(csv_path, meta, header, rows)

    summary = []
    for label in estimates:
        mse = float(np.mean((columns[label] - empirical) ** 2))
        summary.append(f"{label}={mse:.3e}")
    print(
        f"survival: {len(grid)} thresholds -> {csv_path}; "
        "empirical accuracy (mean squared gap): " + ", ".join(summary)
    )
    if ns.plot:
        figures.save_survival_calibration(
            empirical,
            {c: columns[c] for c in columns if c != "empirical"},
            out / "survival.png",
        )
    return 0


def cmd_sample(ns) -> int:
    out = _outdir(ns)
    meta = _config_meta(ns)
    if (ns.exact is not None) == bool(ns.learned or ns.generator):
        raise ParameterError("choose exactly one of --exact or --learned/--generator")
    rng = np.random.default_rng([ns.seed, _STREAM_SAMPLES])

    if ns.exact is not None:
        family = _family_model(ns.exact, ns.alpha, ns.d, ns.seed)
        samples = _sample_family(family, ns.n, rng)
    else:
        if ns.generator is not None:
            gen = load_generator(ns.generator)
        else:
            if ns.target is None:
                raise ParameterError(
                    "--learned needs --target (family name or model JSON)"
                )
            if ns.target in _FAMILIES:
                target = _family_model(ns.target, ns.alpha, ns.d, ns.seed)
            else:
                target = load_model(ns.target)
            cfg = GenTrainConfig(
                epochs=ns.epochs,
                learning_rate=ns.learning_rate,
                n_simplex=ns.n_simplex,
                n_gen=ns.n_gen,
                tolerance=ns.tolerance,
                seed=ns.seed,
            )
            gen, log = train_generator(target, cfg)
            save_generator(gen, out / "generator.json", cfg)
            print(
                f"generator: final loss {log.epoch_loss[-1]:.6f} after "
                f"{log.epoch_loss.size} epochs -> {out / 'generator.json'}"
            )
        samples = sample_mev(gen, ns.n, ns.events, rng, normalize=ns.normalize)

    header = [f"x_{k + 1}" for k in range(samples.shape[1])]
    csv_path = out / "samples.csv"
    _write_csv(csv_path, meta, header, samples)
    if ns.plot:
        figures.save_sample_scatter(samples, out / "samples.png")
    print(f"sample: {samples.shape[0]} x {samples.shape[1]} -> {csv_path}")
    return 0


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------


def _cell_rank_cfg_mse(samples, target, points) -> float:
    data = uniformize(use_rank_marginals(BlockMaxima(maxima=samples, block_size=1)))
    est = empirical_pickands(data, method="cfg-corrected")
    return float(np.mean((est.values(points) - target.values(points)) ** 2))


def _bench_survival(ns, cell_seed_base):
    alphas = ns.alphas or (0.1, 0.3, 0.5, 0.7, 0.9)
    blocks = ns.blocks or 100
    epochs = ns.epochs or 1000
    labels = ("pickands", "cfg-corrected", "bdv-mm", "icnn")
    results = {lab: np.empty((len(alphas), ns.seeds)) for lab in labels}
    for ai, alpha in enumerate(alphas):
        family = SymmetricLogistic(alpha=alpha, d=2)
        for s in range(ns.seeds):
            cell = ai * ns.seeds + s
            rng = np.random.default_rng([ns.seed, cell])
            bm = BlockMaxima(
                maxima=sample_symmetric_logistic(2, alpha, blocks, rng),
                block_size=1,
            )
            bm_r = reflect_transform(use_rank_marginals(bm))
            data = uniformize(bm_r)
            grid = threshold_grid(bm, ns.thresholds, ns.floor, rng)
            exact = np.array(
                [
                    exact_survival_bivariate(family, t.probs[0], t.probs[1])
                    for t in grid
                ]
            )
            for lab in labels:
                if lab == "icnn":
                    cfg = TrainConfig(epochs=epochs, seed=cell_seed_base + cell)
                    model, _ = train_pickands_icnn(data, cfg)
                else:
                    model = empirical_pickands(data, method=lab)
                est = np.array(
                    [survival_probability(model, t.probs) for t in grid]
                )
                results[lab][ai, s] = np.mean((est - exact) ** 2)
    return np.asarray(alphas, dtype=float), "alpha", results


def _bench_pickands(ns, cell_seed_base):
    dims = ns.dims or (16, 64)
    blocks = ns.blocks or 1000
    epochs = ns.epochs or 1000
    alpha = (ns.alphas or (0.5,))[0]
    labels = ("pickands", "cfg-corrected", "icnn")
    results = {lab: np.empty((len(dims), ns.seeds)) for lab in labels}
    for di, d in enumerate(dims):
        family = SymmetricLogistic(alpha=alpha, d=d)
        for s in range(ns.seeds):
            cell = di * ns.seeds + s
            rng = np.random.default_rng([ns.seed, cell])
            data = uniformize(
                use_rank_marginals(
                    BlockMaxima(
                        maxima=sample_symmetric_logistic(d, alpha, blocks, rng),
                        block_size=1,
                    )
                )
            )
            points = sample_simplex_uniform(d, ns.points, rng)
            truth = family.values(points)
            for lab in labels:
                if lab == "icnn":
                    cfg = TrainConfig(epochs=epochs, seed=cell_seed_base + cell)
                    model, _ = train_pickands_icnn(data, cfg)
                else:
                    model = empirical_pickands(data, method=lab)
                results[lab][di, s] = np.mean((model.values(points) - truth) ** 2)
    return np.asarray(dims, dtype=float), "dimension", results


def _bench_sampler(ns, cell_seed_base):
    alphas = ns.alphas or (0.3, 0.5, 0.7)
    epochs = ns.epochs or 4000
    labels = ("learned", "exact")
    results = {lab: np.empty((len(alphas), ns.seeds)) for lab in labels}
    for ai, alpha in enumerate(alphas):
        family = SymmetricLogistic(alpha=alpha, d=2)
        for s in range(ns.seeds):
            cell = ai * ns.seeds + s
            rng = np.random.default_rng([ns.seed, cell])
            cfg = GenTrainConfig(epochs=epochs, seed=cell_seed_base + cell)
            gen, _ = train_generator(family, cfg)
            points = sample_simplex_uniform(2, ns.points, rng)
            heur = sample_mev(gen, ns.n, ns.events, rng)
            exact = sample_symmetric_logistic(2, alpha, ns.n, rng)
            results["learned"][ai, s] = _cell_rank_cfg_mse(heur, family, points)
            results["exact"][ai, s] = _cell_rank_cfg_mse(exact, family, points)
    return np.asarray(alphas, dtype=float), "alpha", results


def cmd_benchmark(ns) -> int:
    out = _outdir(ns)
    meta = _config_meta(ns)
    if ns.seeds < 1:
        raise ParameterError("need seeds >= 1")
    runner = {
        "survival-mse": _bench_survival,
        "pickands-mse": _bench_pickands,
        "sampler-cfg": _bench_sampler,
    }[ns.name]
    x, xlabel, results = runner(ns, cell_seed_base=ns.seed * 1_000_003)

    series = {}
    for label, table in results.items():
        mean = table.mean(axis=1)
        std = table.std(axis=1, ddof=1) if ns.seeds > 1 else np.zeros_like(mean)
        series[label] = (mean, std)
        path = out / f"{ns.name}_{label}.csv"
        _write_csv(
            path,
            meta,
            [xlabel, "mean", "stddev"],
            zip(x, mean, std),
        )
        print(f"benchmark: {label} -> {path}")
    if ns.plot:
        figures.save_benchmark_curves(
            x, series, out / f"{ns.name}.png", xlabel, title=ns.name
        )
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "fit": cmd_fit,
    "estimate": cmd_estimate,
    "survival": cmd_survival,
    "sample": cmd_sample,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ns = resolve(args)
        return _COMMANDS[args.command](ns)
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ProvenanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (
        ParameterError,
        DomainError,
        PipelineError,
        ModelFormatError,
        OSError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
