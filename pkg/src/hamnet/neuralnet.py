"""Small dense value network with ELU activations and Adam, written from scratch.

The default topology is 3 -> 32 -> 32 -> 2. Parameters live in one flat
vector so that many agents' networks can be stacked into a single array.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K

logger = logging.getLogger(__name__)

DEFAULT_SIZES = (3, 32, 32, 2)
FORMAT_HEADER = "hamnet-weights v1"

OUTPUT_ACTIVATIONS = {
    "scaled-elu": K.ACT_SCALED_ELU,
    "elu": K.ACT_ELU,
    "linear": K.ACT_LINEAR,
}

SELU_LAMBDA = K.SELU_LAMBDA
SELU_ALPHA = K.SELU_ALPHA


class WeightFileError(ValueError):
    pass


def elu(x, a: float = 1.0):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x, a * np.expm1(np.minimum(x, 0.0)))


def scaled_elu(x, lam: float = SELU_LAMBDA, a: float = SELU_ALPHA):
    return lam * elu(x, a)


def n_params(sizes) -> int:
    return int(K.n_params(np.asarray(sizes, dtype=np.int64)))


def layer_slices(sizes):
    """(weight slice, weight shape, bias slice) per layer of the flat vector."""
    out, p = [], 0
    for fi, fo in zip(sizes[:-1], sizes[1:]):
        out.append((slice(p, p + fi * fo), (fi, fo), slice(p + fi * fo, p + fi * fo + fo)))
        p += fi * fo + fo
    return out


@dataclass
class NetParams:
    theta: np.ndarray
    sizes: tuple = DEFAULT_SIZES
    output_activation: str = "scaled-elu"

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        self.theta = np.ascontiguousarray(self.theta, dtype=float)
        if self.theta.shape != (n_params(self.sizes),):
            raise ValueError(f"theta has shape {self.theta.shape}, expected ({n_params(self.sizes)},)")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")

    @property
    def out_mode(self) -> int:
        return OUTPUT_ACTIVATIONS[self.output_activation]

    @property
    def sizes_array(self) -> np.ndarray:
        return np.asarray(self.sizes, dtype=np.int64)

    @property
    def weights(self) -> list:
        return [self.theta[ws].reshape(shape) for ws, shape, _ in layer_slices(self.sizes)]

    @property
    def biases(self) -> list:
        return [self.theta[bs] for _, _, bs in layer_slices(self.sizes)]

    def copy(self) -> "NetParams":
        return NetParams(self.theta.copy(), self.sizes, self.output_activation)

    @classmethod
    def zeros(cls, sizes=DEFAULT_SIZES, output_activation="scaled-elu") -> "NetParams":
        return cls(np.zeros(n_params(sizes)), sizes, output_activation)

    @classmethod
    def from_layers(cls, weights, biases, output_activation="scaled-elu") -> "NetParams":
        sizes = [np.shape(weights[0])[0]] + [np.shape(w)[1] for w in weights]
        parts = []
        for w, b in zip(weights, biases):
            parts.append(np.asarray(w, dtype=float).ravel())
            parts.append(np.asarray(b, dtype=float).ravel())
        return cls(np.concatenate(parts), tuple(sizes), output_activation)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: NetParams, **kw) -> "AdamState":
        return cls(np.zeros_like(params.theta), np.zeros_like(params.theta), **kw)

    @property
    def step(self) -> int:
        return int(self.t[0])


def init_params(rng: np.random.Generator, sizes=DEFAULT_SIZES,
                output_activation: str = "scaled-elu") -> NetParams:
    """Glorot-uniform weights, zero biases."""
    params = NetParams.zeros(sizes, output_activation)
    for ws, (fi, fo), _ in layer_slices(params.sizes):
        bound = np.sqrt(6.0 / (fi + fo))
        params.theta[ws] = rng.uniform(-bound, bound, size=fi * fo)
    return params


def _check_features(features) -> np.ndarray:
    x = np.asarray(features, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite network input")
    return x


def forward(params: NetParams, features) -> np.ndarray:
    """Action values; index 0 is Increase, index 1 is Decrease."""
    x = _check_features(features)
    if x.shape[0] != params.sizes[0]:
        raise ValueError(f"expected {params.sizes[0]} features, got {x.shape[0]}")
    return K.forward(params.theta, params.sizes_array, x, params.out_mode)


def loss_gradient(params: NetParams, features, action_index: int, target: float):
    """Loss ``(q[a] - target)**2`` and its gradient w.r.t. the flat parameters."""
    x = _check_features(features)
    g = np.empty_like(params.theta)
    loss = K.gradient(params.theta, params.sizes_array, x, int(action_index), float(target),
                      params.out_mode, g)
    return loss, g


def train_step(params: NetParams, adam: AdamState, features, action_index: int,
               target: float, lr: float):
    """One Adam update toward ``target`` on the chosen output; mutates in place.

    A non-finite gradient is logged and the step is skipped.
    """
    if not 0 <= action_index < params.sizes[-1]:
        raise ValueError("action_index out of range")
    if not np.isfinite(target):
        raise ValueError("non-finite target")
    x = _check_features(features)
    loss = K.adam_train(params.theta, adam.m, adam.v, adam.t, params.sizes_array, x,
                        int(action_index), float(target), float(lr), params.out_mode,
                        adam.beta1, adam.beta2, adam.eps)
    if np.isnan(loss):
        logger.warning("non-finite gradient; update skipped")
    return params, adam


# --------------------------------------------------------------------------
# persistence


def save_params(params: NetParams, path) -> None:
    lines = [FORMAT_HEADER,
             " ".join(str(s) for s in params.sizes) + f" {params.output_activation}"]
    for w, b in zip(params.weights, params.biases):
        for row in w:
            lines.append(" ".join(repr(float(v)) for v in row))
        lines.append(" ".join(repr(float(v)) for v in b))
    Path(path).write_text("\n".join(lines) + "\n")


def load_params(path, expected_sizes=DEFAULT_SIZES) -> NetParams:
    """Read a weight file; raises ``WeightFileError`` on any malformation."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != FORMAT_HEADER:
        raise WeightFileError(f"{path}: unsupported header or version")
    if len(lines) < 2:
        raise WeightFileError(f"{path}: missing shape line")
    head = lines[1].split()
    try:
        sizes = tuple(int(s) for s in head[:-1])
        act = head[-1]
    except (ValueError, IndexError):
        raise WeightFileError(f"{path}: bad shape line") from None
    if expected_sizes is not None and sizes != tuple(expected_sizes):
        raise WeightFileError(f"{path}: shape mismatch {sizes} != {tuple(expected_sizes)}")
    if act not in OUTPUT_ACTIVATIONS:
        raise WeightFileError(f"{path}: unknown activation {act!r}")
    body = lines[2:]
    parts, pos = [], 0
    try:
        for fi, fo in zip(sizes[:-1], sizes[1:]):
            for _ in range(fi + 1):
                vals = [float(v) for v in body[pos].split()]
                if len(vals) != fo:
                    raise WeightFileError(f"{path}: line {pos + 3} has {len(vals)} values, expected {fo}")
                parts.append(vals)
                pos += 1
    except IndexError:
        raise WeightFileError(f"{path}: truncated file") from None
    except ValueError as exc:
        if isinstance(exc, WeightFileError):
            raise
        raise WeightFileError(f"{path}: unparsable value") from None
    if any(line.strip() for line in body[pos:]):
        raise WeightFileError(f"{path}: trailing data")
    theta = np.array([v for row in parts for v in row], dtype=float)
    return NetParams(theta, sizes, act)


# --------------------------------------------------------------------------


class NetBank:
    """One flat parameter vector (and Adam state) per slot, stacked row-wise."""

    def __init__(self, template: NetParams, count: int, adam: AdamState | None = None):
        self.sizes = template.sizes
        self.output_activation = template.output_activation
        self.theta = np.tile(template.theta, (count, 1))
        self.m = np.zeros_like(self.theta)
        self.v = np.zeros_like(self.theta)
        self.steps = np.zeros(count, dtype=np.int64)
        a = adam or AdamState.for_params(template)
        self.beta1, self.beta2, self.eps = a.beta1, a.beta2, a.eps
        self.template = template.copy()

    def __len__(self) -> int:
        return self.theta.shape[0]

    @property
    def sizes_array(self) -> np.ndarray:
        return np.asarray(self.sizes, dtype=np.int64)

    @property
    def out_mode(self) -> int:
        return OUTPUT_ACTIVATIONS[self.output_activation]

    def params(self, k: int) -> NetParams:
        return NetParams(self.theta[k].copy(), self.sizes, self.output_activation)

    def append_copies(self, count: int) -> None:
        """Add ``count`` fresh copies of the template network."""
        if count <= 0:
            return
        self.theta = np.vstack([self.theta, np.tile(self.template.theta, (count, 1))])
        self.m = np.vstack([self.m, np.zeros((count, self.theta.shape[1]))])
        self.v = np.vstack([self.v, np.zeros((count, self.theta.shape[1]))])
        self.steps = np.concatenate([self.steps, np.zeros(count, dtype=np.int64)])
