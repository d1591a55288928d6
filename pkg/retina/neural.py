"""Wavelet neural network and multilayer perceptron classifiers.

Both models are three-layer binary classifiers trained by mini-batch gradient
descent on cross-entropy plus an L2 penalty on the input and output weights.
A wavelon j emits psi((w_j . x - b_j) / a_j) for the chosen mother wavelet.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd
from scipy.special import expit
from sklearn.metrics import confusion_matrix
from sklearn.model_selection import train_test_split
from sklearn.preprocessing import StandardScaler

from retina.constants import (
    EPOCH_CHECKPOINTS,
    MODEL_FORMAT_VERSION,
    MOTHER_WAVELETS,
    PRESET_GRID,
    SPLIT_FRACTIONS,
    SWEEP_EPOCHS,
    SWEEP_HIDDEN_UNITS,
)
from retina.errors import InputError, NumericError

logger = logging.getLogger(__name__)

MIN_DILATION = 1e-3
GGW_SHAPE = 1.5
FD_STEP = 1e-5
COMPLEX_STEP = 1e-20
GRADCHECK_FLOOR = 1e-4


def _gauss(x):
    return np.exp(-x * x / 2.0)


def _sinc_half_derivative(x):
    # d/dx sinc(x / 2) with numpy's normalized sinc
    t = x / 2.0
    safe = np.where(np.abs(t) < 1e-4, 1.0, t)
    exact = (np.cos(np.pi * safe) - np.sinc(safe)) / safe
    series = -(np.pi ** 2) * t / 3.0
    return 0.5 * np.where(np.abs(t) < 1e-4, series, exact)


def _meyer(t):
    # Closed form of the Meyer wavelet centred at t = 1/2
    u = t - 0.5
    den1 = u - (16.0 / 9.0) * u ** 3
    den2 = u - (64.0 / 9.0) * u ** 3
    # Removable singularities: step off the zeros of the denominators
    near = (np.abs(den1) < 1e-9) | (np.abs(den2) < 1e-9)
    u = np.where(near, u + 1e-7, u)
    den1 = u - (16.0 / 9.0) * u ** 3
    den2 = u - (64.0 / 9.0) * u ** 3
    psi1 = (
        (4.0 / (3.0 * np.pi)) * u * np.cos((2.0 * np.pi / 3.0) * u)
        - (1.0 / np.pi) * np.sin((4.0 * np.pi / 3.0) * u)
    ) / den1
    psi2 = (
        (8.0 / (3.0 * np.pi)) * u * np.cos((8.0 * np.pi / 3.0) * u)
        + (1.0 / np.pi) * np.sin((4.0 * np.pi / 3.0) * u)
    ) / den2
    return psi1 + psi2


def mother_wavelet(kind, x):
    x = np.asarray(x, dtype=np.float64)
    if kind == "MexicanHat":
        return (1.0 - x * x) * _gauss(x)
    if kind == "Morlet":
        return np.cos(5.0 * x) * _gauss(x)
    if kind == "Gaussian":
        return -x * _gauss(x)
    if kind == "Shannon":
        return np.sinc(x / 2.0) * np.cos(1.5 * np.pi * x)
    if kind == "Haar":
        return np.where((x >= 0) & (x < 0.5), 1.0, np.where((x >= 0.5) & (x < 1.0), -1.0, 0.0))
    if kind == "Meyer":
        return np.real(_meyer(x))
    if kind == "GGW":
        return -x * np.exp(-np.abs(x) ** GGW_SHAPE / 2.0)
    raise InputError(f"unknown mother wavelet {kind!r}, expected one of {MOTHER_WAVELETS}")


def mother_wavelet_derivative(kind, x):
    x = np.asarray(x, dtype=np.float64)
    if kind == "MexicanHat":
        return (x ** 3 - 3.0 * x) * _gauss(x)
    if kind == "Morlet":
        return (-5.0 * np.sin(5.0 * x) - x * np.cos(5.0 * x)) * _gauss(x)
    if kind == "Gaussian":
        return (x * x - 1.0) * _gauss(x)
    if kind == "Shannon":
        return (
            _sinc_half_derivative(x) * np.cos(1.5 * np.pi * x)
            - np.sinc(x / 2.0) * 1.5 * np.pi * np.sin(1.5 * np.pi * x)
        )
    if kind == "Haar":
        return np.zeros_like(x)
    if kind == "Meyer":
        return np.imag(_meyer(x + 1j * COMPLEX_STEP)) / COMPLEX_STEP
    if kind == "GGW":
        return np.exp(-np.abs(x) ** GGW_SHAPE / 2.0) * (0.5 * GGW_SHAPE * np.abs(x) ** GGW_SHAPE - 1.0)
    raise InputError(f"unknown mother wavelet {kind!r}, expected one of {MOTHER_WAVELETS}")


def _as_inputs(x, input_dim):
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != input_dim:
        raise InputError(f"dimension mismatch: model expects {input_dim} features, got {x.shape[1]}")
    return x


def _cross_entropy(logits, y):
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


class _Classifier:
    """Shared loss, parameter access and L2 bookkeeping"""
    kind = ""
    param_names = ()
    regularized = ("W", "v")

    def params(self):
        return {name: getattr(self, name) for name in self.param_names}

    def set_params(self, values):
        for name, value in values.items():
            setattr(self, name, np.array(value, dtype=np.float64))

    def predict_proba(self, x):
        return expit(self.logits(x))

    def weight_norm(self):
        return float(np.sqrt(sum(np.sum(getattr(self, n) ** 2) for n in self.regularized)))

    def loss(self, x, y, l2=0.0):
        x = _as_inputs(x, self.input_dim)
        y = np.asarray(y, dtype=np.float64)
        penalty = 0.5 * l2 * self.weight_norm() ** 2
        return _cross_entropy(self.logits(x), y) + penalty

    def clamp(self):
        pass


class WnnModel(_Classifier):
    """Three-layer network of wavelons with a logistic output"""
    kind = "wnn"
    param_names = ("W", "a", "b", "v", "c")

    def __init__(self, input_dim, hidden, activation="MexicanHat", seed=0):
        if activation not in MOTHER_WAVELETS:
            raise InputError(f"unknown mother wavelet {activation!r}, expected one of {MOTHER_WAVELETS}")
        if input_dim < 1 or hidden < 1:
            raise InputError("input_dim and hidden must be >= 1")
        rng = np.random.default_rng(seed)
        self.input_dim = int(input_dim)
        self.hidden = int(hidden)
        self.activation = activation
        self.W = rng.normal(0.0, 1.0 / np.sqrt(input_dim), size=(hidden, input_dim))
        self.a = np.ones(hidden)
        self.b = rng.normal(0.0, 0.5, size=hidden)
        self.v = rng.normal(0.0, 1.0 / np.sqrt(hidden), size=hidden)
        self.c = np.zeros(1)

    def _hidden(self, x):
        z = (x @ self.W.T - self.b) / self.a
        return z, mother_wavelet(self.activation, z)

    def logits(self, x):
        x = _as_inputs(x, self.input_dim)
        return self._hidden(x)[1] @ self.v + self.c[0]

    def gradients(self, x, y, l2=0.0):
        x = _as_inputs(x, self.input_dim)
        y = np.asarray(y, dtype=np.float64)
        z, h = self._hidden(x)
        ds = (expit(h @ self.v + self.c[0]) - y) / len(y)
        dz = np.outer(ds, self.v) * mother_wavelet_derivative(self.activation, z)
        return {
            "W": (dz / self.a).T @ x + l2 * self.W,
            "a": -np.sum(dz * z, axis=0) / self.a,
            "b": -np.sum(dz, axis=0) / self.a,
            "v": h.T @ ds + l2 * self.v,
            "c": np.array([ds.sum()]),
        }

    def clamp(self):
        self.a = np.maximum(self.a, MIN_DILATION)


class MlpModel(_Classifier):
    """Three-layer perceptron with logistic hidden units"""
    kind = "mlp"
    param_names = ("W", "b", "v", "c")

    def __init__(self, input_dim, hidden, seed=0):
        if input_dim < 1 or hidden < 1:
            raise InputError("input_dim and hidden must be >= 1")
        rng = np.random.default_rng(seed)
        self.input_dim = int(input_dim)
        self.hidden = int(hidden)
        self.activation = "Sigmoid"
        self.W = rng.normal(0.0, 1.0 / np.sqrt(input_dim), size=(hidden, input_dim))
        self.b = np.zeros(hidden)
        self.v = rng.normal(0.0, 1.0 / np.sqrt(hidden), size=hidden)
        self.c = np.zeros(1)

    def _hidden(self, x):
        return expit(x @ self.W.T + self.b)

    def logits(self, x):
        x = _as_inputs(x, self.input_dim)
        return self._hidden(x) @ self.v + self.c[0]

    def gradients(self, x, y, l2=0.0):
        x = _as_inputs(x, self.input_dim)
        y = np.asarray(y, dtype=np.float64)
        h = self._hidden(x)
        ds = (expit(h @ self.v + self.c[0]) - y) / len(y)
        du = np.outer(ds, self.v) * h * (1.0 - h)
        return {
            "W": du.T @ x + l2 * self.W,
            "b": du.sum(axis=0),
            "v": h.T @ ds + l2 * self.v,
            "c": np.array([ds.sum()]),
        }


def wnn_forward(m, x):
    """Output probability for one feature vector (or a batch)"""
    p = m.predict_proba(x)
    return float(p[0]) if np.ndim(x) == 1 else p


def build_model(kind, input_dim, hidden, activation="MexicanHat", seed=0):
    if kind == "wnn":
        return WnnModel(input_dim, hidden, activation, seed)
    if kind == "mlp":
        return MlpModel(input_dim, hidden, seed)
    raise InputError(f"unknown model kind {kind!r}")


def gradient_check(model, x, y, l2=0.0):
    """Largest relative gap between analytic and central-difference gradients"""
    analytic = model.gradients(x, y, l2)
    worst = 0.0
    for name, values in model.params().items():
        flat = values.reshape(-1)
        grad = analytic[name].reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + FD_STEP
            up = model.loss(x, y, l2)
            flat[i] = saved - FD_STEP
            down = model.loss(x, y, l2)
            flat[i] = saved
            numeric = (up - down) / (2.0 * FD_STEP)
            scale = max(abs(grad[i]), abs(numeric), GRADCHECK_FLOOR)
            worst = max(worst, abs(grad[i] - numeric) / scale)
    return worst


@dataclass(frozen=True)
class TrainConfig:
    """Epochs, batch size, step size, L2 weight, hidden units, split and seed"""
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 0.01
    l2: float = 1e-4
    hidden_units: int = 10
    activation: str = "MexicanHat"
    split: tuple = SPLIT_FRACTIONS
    seed: int = 0

    def __post_init__(self):
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise InputError(f"train.epochs must be >= 1, got {self.epochs}")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise InputError(f"batch size must be >= 1, got {self.batch_size}")
        if self.learning_rate < 0:
            raise InputError(f"train.learning_rate must be >= 0, got {self.learning_rate}")
        if self.l2 < 0:
            raise InputError(f"train.l2 must be >= 0, got {self.l2}")
        if int(self.hidden_units) != self.hidden_units or self.hidden_units < 1:
            raise InputError(f"hidden units must be >= 1, got {self.hidden_units}")
        if self.activation not in MOTHER_WAVELETS:
            raise InputError(f"train.activation must be one of {MOTHER_WAVELETS}, got {self.activation!r}")
        if len(self.split) != 3 or min(self.split) <= 0 or not np.isclose(sum(self.split), 1.0):
            raise InputError(f"split fractions must be three positive values summing to 1, got {self.split}")


@dataclass
class Metrics:
    """Threshold-0.5 classification metrics; percentages and confusion rates"""
    accuracy: float
    sensitivity: float
    specificity: float
    error: float
    loss: float
    tp: float
    fp: float
    tn: float
    fn: float
    count: int

    def as_row(self):
        return asdict(self)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    v_error: float
    t_error: float
    v_loss: float
    t_loss: float
    weight_norm: float


@dataclass
class SplitData:
    """Standardized train/validation/test partitions"""
    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    scaler: StandardScaler = field(default=None, repr=False)
    test_index: np.ndarray = field(default=None, repr=False)

    @property
    def input_dim(self):
        return self.x_train.shape[1]


def split_dataset(x, y, fractions=SPLIT_FRACTIONS, seed=0):
    """Stratified seeded train/validation/test split with z-scoring fitted on train"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(x) != len(y):
        raise InputError(f"{len(x)} feature rows but {len(y)} labels")
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) != 2 or counts.min() < 2:
        raise InputError("each class needs at least 2 samples")
    train_frac, val_frac, test_frac = fractions

    try:
        rest_idx, test_idx = train_test_split(
            np.arange(len(y)), test_size=test_frac, stratify=y, random_state=seed
        )
        x_rest, y_rest = x[rest_idx], y[rest_idx]
        x_test, y_test = x[test_idx], y[test_idx]
        x_train, x_val, y_train, y_val = train_test_split(
            x_rest, y_rest, test_size=val_frac / (train_frac + val_frac), stratify=y_rest,
            random_state=seed,
        )
    except ValueError as e:
        raise InputError(f"cannot split {len(y)} samples into stratified partitions: {e}") from e
    scaler = StandardScaler().fit(x_train)
    return SplitData(
        x_train=scaler.transform(x_train), y_train=y_train,
        x_val=scaler.transform(x_val), y_val=y_val,
        x_test=scaler.transform(x_test), y_test=y_test,
        scaler=scaler, test_index=test_idx,
    )


def evaluate(model, x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise InputError("cannot evaluate on empty data")
    logits = model.logits(x)
    pred = (expit(logits) >= 0.5).astype(np.int64)
    tn, fp, fn, tp = confusion_matrix(y, pred, labels=[0, 1]).ravel()
    n = len(y)
    accuracy = 100.0 * (tp + tn) / n
    return Metrics(
        accuracy=accuracy,
        sensitivity=100.0 * tp / (tp + fn) if tp + fn else 0.0,
        specificity=100.0 * tn / (tn + fp) if tn + fp else 0.0,
        error=100.0 - accuracy,
        loss=_cross_entropy(logits, y),
        tp=tp / n, fp=fp / n, tn=tn / n, fn=fn / n,
        count=n,
    )


def train(model, data, cfg=None):
    """Mini-batch gradient descent; returns the model and one record per epoch"""
    cfg = cfg or TrainConfig()
    for name, part in (("train", data.y_train), ("validation", data.y_val), ("test", data.y_test)):
        if len(part) == 0:
            raise InputError(f"{name} partition is empty")

    rng = np.random.default_rng(cfg.seed)
    n = len(data.y_train)
    history = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            grads = model.gradients(data.x_train[idx], data.y_train[idx], cfg.l2)
            params = model.params()
            model.set_params({k: params[k] - cfg.learning_rate * grads[k] for k in params})
            model.clamp()

        if not all(np.all(np.isfinite(p)) for p in model.params().values()):
            raise NumericError(f"non-finite weights after epoch {epoch}")
        val = evaluate(model, data.x_val, data.y_val)
        test = evaluate(model, data.x_test, data.y_test)
        history.append(EpochRecord(
            epoch=epoch,
            train_loss=model.loss(data.x_train, data.y_train, cfg.l2),
            v_error=val.error, t_error=test.error,
            v_loss=val.loss, t_loss=test.loss,
            weight_norm=model.weight_norm(),
        ))
        logger.debug("%s epoch %d: V_error %.2f%% T_error %.2f%%",
                     model.kind, epoch, val.error, test.error)
    return model, history


def save_model(model, path):
    """Write a versioned .npz holding kind, dimensions and parameters"""
    np.savez(
        path,
        format_version=np.array(MODEL_FORMAT_VERSION),
        kind=np.array(model.kind),
        activation=np.array(model.activation),
        input_dim=np.array(model.input_dim),
        hidden=np.array(model.hidden),
        **model.params(),
    )


def load_model(path):
    with np.load(path, allow_pickle=False) as stored:
        version = int(stored["format_version"])
        if version != MODEL_FORMAT_VERSION:
            raise InputError(f"unsupported model format version {version}")
        kind = str(stored["kind"])
        activation = str(stored["activation"])
        model = build_model(
            kind, int(stored["input_dim"]), int(stored["hidden"]),
            activation if kind == "wnn" else "MexicanHat",
        )
        model.set_params({name: stored[name] for name in model.param_names})
    return model


def _fit(kind, data, cfg):
    model = build_model(kind, data.input_dim, cfg.hidden_units, cfg.activation, cfg.seed)
    return train(model, data, cfg)


def activation_sweep(data, cfg=None, workers=1):
    """Testing error of a WNN per mother wavelet at a fixed small topology"""
    base = cfg or TrainConfig()
    sweep = TrainConfig(**{**asdict(base), "hidden_units": SWEEP_HIDDEN_UNITS, "epochs": SWEEP_EPOCHS})

    def run(kind):
        model, history = _fit("wnn", data, TrainConfig(**{**asdict(sweep), "activation": kind}))
        last = history[-1]
        return {"activation": kind, "v_error": last.v_error, "t_error": last.t_error,
                "t_loss": last.t_loss}

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(run, MOTHER_WAVELETS))
    return pd.DataFrame(rows)


def error_grid(data, cfg=None, grid=PRESET_GRID, checkpoints=EPOCH_CHECKPOINTS, workers=1):
    """Validation/testing error of WNN and MLP per (hidden units, batch size) cell"""
    base = cfg or TrainConfig()
    epochs = max(checkpoints)
    cells = [(kind, hu, bs) for hu, bs in grid for kind in ("wnn", "mlp")]

    def run(cell):
        kind, hu, bs = cell
        cell_cfg = TrainConfig(**{**asdict(base), "hidden_units": hu, "batch_size": bs, "epochs": epochs})
        model, history = _fit(kind, data, cell_cfg)
        rows = [
            {"model": kind.upper(), "HU": hu, "BS": bs, "epoch": rec.epoch,
             "v_error": rec.v_error, "t_error": rec.t_error, "t_loss": rec.t_loss}
            for rec in history if rec.epoch in checkpoints
        ]
        return rows, model, history

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, cells))
    table = pd.DataFrame([row for rows, _, _ in results for row in rows])
    models = {cell: (model, history) for cell, (_, model, history) in zip(cells, results)}
    return table, models
