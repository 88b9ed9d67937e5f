"""Minimal neural kernel: feed-forward scorer, BiLSTM tagger, Adam, checks.

Everything is float64 numpy with hand-written backward passes, so the
finite-difference gradient checker is a genuinely independent oracle.
Training is deterministic given (seed, dataset order, config).

Model files are a versioned binary format:

    magic "DDPM" | u32 version=1 | u32 arch | u32 dims...
    | u32 label_count | {u32 byte_len, utf-8 bytes} per label
    | u64 value_count | parameters as little-endian f64

arch 1 (feed-forward): dims = input, hidden, output;
    parameters W1 (input x hidden, row-major), b1, W2 (hidden x output), b2.
arch 2 (BiLSTM tagger): dims = input, hidden, labels;
    parameters fw.W (input x 4h), fw.U (h x 4h), fw.b, bw.W, bw.U, bw.b,
    W_out (2h x labels), b_out.  Gate order inside the 4h axis: input,
    forget, candidate, output.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"DDPM"
FORMAT_VERSION = 1
ARCH_FEEDFORWARD = 1
ARCH_BILSTM = 2

DEFAULT_HIDDEN = 128
DEFAULT_RECURRENT = 256


class ModelError(ValueError):
    """Raised for malformed model files or shape mismatches."""


@dataclass
class TrainConfig:
    learning_rate: float = 0.005
    epochs: int = 100
    seed: int = 42
    batch_size: int = 16
    clip_norm: float = 5.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    dropout: float = 0.0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ModelError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise ModelError("epochs must be >= 1")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax; output rows sum to 1 and are positive."""
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def cross_entropy(distribution: np.ndarray, gold: int) -> float:
    """Negative log probability of the gold index."""
    distribution = np.asarray(distribution, dtype=np.float64)
    if not 0 <= gold < distribution.shape[-1]:
        raise ModelError(f"gold index {gold} out of range for {distribution.shape[-1]} classes")
    p = float(distribution[gold])
    if p <= 0.0:
        return float("inf")
    return -float(np.log(p))


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int,
            shape: tuple[int, ...]) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class FeedForward:
    """One ReLU hidden layer and a softmax output layer."""

    arch = ARCH_FEEDFORWARD

    def __init__(self, input_dim: int, hidden_dim: int = DEFAULT_HIDDEN,
                 output_dim: int = 4, seed: int = 42,
                 labels: tuple[str, ...] | None = None):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.output_dim = output_dim
        self.labels = labels
        rng = np.random.default_rng(seed)
        self.params = {
            "W1": _glorot(rng, input_dim, hidden_dim, (input_dim, hidden_dim)),
            "b1": np.zeros(hidden_dim),
            "W2": _glorot(rng, hidden_dim, output_dim, (hidden_dim, output_dim)),
            "b2": np.zeros(output_dim),
        }

    @property
    def param_order(self) -> list[str]:
        return ["W1", "b1", "W2", "b2"]

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.input_dim, self.hidden_dim, self.output_dim)

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.input_dim:
            raise ModelError(f"input has dim {x.shape[-1]}, expected {self.input_dim}")
        hidden = np.maximum(0.0, x @ self.params["W1"] + self.params["b1"])
        return softmax(hidden @ self.params["W2"] + self.params["b2"])

    def batch_loss_and_grads(self, examples, dropout: float = 0.0, rng=None):
        """Mean cross-entropy and gradients over a batch of (x, gold) pairs."""
        xs = np.stack([x for x, _ in examples])
        ys = np.array([y for _, y in examples], dtype=np.intp)
        z1 = xs @ self.params["W1"] + self.params["b1"]
        a1 = np.maximum(0.0, z1)
        dropout_mask = _dropout_mask(a1.shape, dropout, rng)
        if dropout_mask is not None:
            a1 = a1 * dropout_mask
        probs = softmax(a1 @ self.params["W2"] + self.params["b2"])
        batch = len(examples)
        losses = -np.log(np.clip(probs[np.arange(batch), ys], 1e-300, None))
        dz2 = probs.copy()
        dz2[np.arange(batch), ys] -= 1.0
        dz2 /= batch
        da1 = dz2 @ self.params["W2"].T
        if dropout_mask is not None:
            da1 = da1 * dropout_mask
        dz1 = da1 * (z1 > 0.0)
        grads = {
            "W1": xs.T @ dz1,
            "b1": dz1.sum(axis=0),
            "W2": a1.T @ dz2,
            "b2": dz2.sum(axis=0),
        }
        return float(losses.mean()), grads


class _LstmCell:
    def __init__(self, rng: np.random.Generator, input_dim: int, hidden_dim: int):
        self.hidden_dim = hidden_dim
        self.W = _glorot(rng, input_dim, hidden_dim, (input_dim, 4 * hidden_dim))
        self.U = _glorot(rng, hidden_dim, hidden_dim, (hidden_dim, 4 * hidden_dim))
        self.b = np.zeros(4 * hidden_dim)

    def run(self, xs: np.ndarray):
        """Full forward pass; returns hidden states and the per-step cache."""
        h = np.zeros(self.hidden_dim)
        c = np.zeros(self.hidden_dim)
        states, cache = [], []
        r = self.hidden_dim
        for x in xs:
            z = x @ self.W + h @ self.U + self.b
            i = _sigmoid(z[:r])
            f = _sigmoid(z[r:2 * r])
            g = np.tanh(z[2 * r:3 * r])
            o = _sigmoid(z[3 * r:])
            c_new = f * c + i * g
            tanh_c = np.tanh(c_new)
            h_new = o * tanh_c
            cache.append((x, h, c, i, f, g, o, tanh_c))
            h, c = h_new, c_new
            states.append(h)
        return np.stack(states), cache

    def backward(self, d_states: np.ndarray, cache):
        """Backpropagation through time for gradients w.r.t. W, U, b."""
        r = self.hidden_dim
        dW = np.zeros_like(self.W)
        dU = np.zeros_like(self.U)
        db = np.zeros_like(self.b)
        dh_next = np.zeros(r)
        dc_next = np.zeros(r)
        for t in range(len(cache) - 1, -1, -1):
            x, h_prev, c_prev, i, f, g, o, tanh_c = cache[t]
            dh = d_states[t] + dh_next
            do = dh * tanh_c
            dc = dc_next + dh * o * (1.0 - tanh_c ** 2)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dc_next = dc * f
            dz = np.concatenate([
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g ** 2),
                do * o * (1.0 - o),
            ])
            dW += np.outer(x, dz)
            dU += np.outer(h_prev, dz)
            db += dz
            dh_next = dz @ self.U.T
        return dW, dU, db


def _dropout_mask(shape, dropout: float, rng) -> np.ndarray | None:
    """Inverted dropout mask; None when the rate is zero (inference/default)."""
    if dropout <= 0.0:
        return None
    if rng is None:
        raise ModelError("dropout needs a random generator")
    return (rng.random(shape) >= dropout) / (1.0 - dropout)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class BiLstmTagger:
    """Bidirectional LSTM with a per-position softmax output layer."""

    arch = ARCH_BILSTM

    def __init__(self, input_dim: int, hidden_dim: int = DEFAULT_RECURRENT,
                 num_labels: int = 2, seed: int = 42,
                 labels: tuple[str, ...] | None = None):
        if labels is not None and len(labels) != num_labels:
            raise ModelError("labels length must match num_labels")
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.num_labels = num_labels
        self.labels = labels
        rng = np.random.default_rng(seed)
        self.fw = _LstmCell(rng, input_dim, hidden_dim)
        self.bw = _LstmCell(rng, input_dim, hidden_dim)
        self.W_out = _glorot(rng, 2 * hidden_dim, num_labels, (2 * hidden_dim, num_labels))
        self.b_out = np.zeros(num_labels)

    @property
    def params(self) -> dict[str, np.ndarray]:
        return {
            "fw.W": self.fw.W, "fw.U": self.fw.U, "fw.b": self.fw.b,
            "bw.W": self.bw.W, "bw.U": self.bw.U, "bw.b": self.bw.b,
            "W_out": self.W_out, "b_out": self.b_out,
        }

    @params.setter
    def params(self, values: dict[str, np.ndarray]) -> None:
        self.fw.W, self.fw.U, self.fw.b = values["fw.W"], values["fw.U"], values["fw.b"]
        self.bw.W, self.bw.U, self.bw.b = values["bw.W"], values["bw.U"], values["bw.b"]
        self.W_out, self.b_out = values["W_out"], values["b_out"]

    @property
    def param_order(self) -> list[str]:
        return ["fw.W", "fw.U", "fw.b", "bw.W", "bw.U", "bw.b", "W_out", "b_out"]

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.input_dim, self.hidden_dim, self.num_labels)

    def forward(self, xs: np.ndarray) -> np.ndarray:
        """Label distributions for every position of a (T, input_dim) sequence."""
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[0] == 0:
            raise ModelError("tagger input must be a non-empty (T, dim) sequence")
        if xs.shape[1] != self.input_dim:
            raise ModelError(f"input has dim {xs.shape[1]}, expected {self.input_dim}")
        h_fw, _ = self.fw.run(xs)
        h_bw_rev, _ = self.bw.run(xs[::-1])
        h_bw = h_bw_rev[::-1]
        concat = np.concatenate([h_fw, h_bw], axis=1)
        return softmax(concat @ self.W_out + self.b_out)

    def _sequence_loss_and_grads(self, xs: np.ndarray, ys: np.ndarray,
                                 dropout: float = 0.0, rng=None):
        h_fw, cache_fw = self.fw.run(xs)
        h_bw_rev, cache_bw = self.bw.run(xs[::-1])
        h_bw = h_bw_rev[::-1]
        concat = np.concatenate([h_fw, h_bw], axis=1)
        dropout_mask = _dropout_mask(concat.shape, dropout, rng)
        if dropout_mask is not None:
            concat = concat * dropout_mask
        probs = softmax(concat @ self.W_out + self.b_out)
        t_len = xs.shape[0]
        losses = -np.log(np.clip(probs[np.arange(t_len), ys], 1e-300, None))
        dlogits = probs.copy()
        dlogits[np.arange(t_len), ys] -= 1.0
        dlogits /= t_len
        d_concat = dlogits @ self.W_out.T
        if dropout_mask is not None:
            d_concat = d_concat * dropout_mask
        r = self.hidden_dim
        dW_fw, dU_fw, db_fw = self.fw.backward(d_concat[:, :r], cache_fw)
        dW_bw, dU_bw, db_bw = self.bw.backward(d_concat[::-1, r:], cache_bw)
        grads = {
            "fw.W": dW_fw, "fw.U": dU_fw, "fw.b": db_fw,
            "bw.W": dW_bw, "bw.U": dU_bw, "bw.b": db_bw,
            "W_out": concat.T @ dlogits,
            "b_out": dlogits.sum(axis=0),
        }
        return float(losses.mean()), grads

    def batch_loss_and_grads(self, examples, dropout: float = 0.0, rng=None):
        """Mean of per-sequence losses over (sequence, labels) examples."""
        total = 0.0
        grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        for xs, ys in examples:
            loss, g = self._sequence_loss_and_grads(
                np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.intp),
                dropout, rng)
            total += loss
            for k in grads:
                grads[k] += g[k]
        count = len(examples)
        for k in grads:
            grads[k] /= count
        return total / count, grads


def ff_forward(model: FeedForward, x: np.ndarray) -> np.ndarray:
    return model.forward(x)


def tagger_forward(model: BiLstmTagger, xs: np.ndarray) -> np.ndarray:
    return model.forward(xs)


class Adam:
    """Adaptive-moment gradient descent with global-norm clipping."""

    def __init__(self, params: dict[str, np.ndarray], config: TrainConfig):
        self.config = config
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        cfg = self.config
        norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
        scale = cfg.clip_norm / norm if cfg.clip_norm and norm > cfg.clip_norm else 1.0
        self.t += 1
        correct1 = 1.0 - cfg.beta1 ** self.t
        correct2 = 1.0 - cfg.beta2 ** self.t
        for k, g in grads.items():
            g = g * scale
            self.m[k] = cfg.beta1 * self.m[k] + (1.0 - cfg.beta1) * g
            self.v[k] = cfg.beta2 * self.v[k] + (1.0 - cfg.beta2) * (g * g)
            m_hat = self.m[k] / correct1
            v_hat = self.v[k] / correct2
            params[k] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)


def train(model, dataset: list, config: TrainConfig) -> list[float]:
    """Offline minibatch training; returns the mean loss per epoch."""
    if not dataset:
        raise ModelError("training dataset is empty")
    rng = np.random.default_rng(config.seed)
    params = model.params
    optimizer = Adam(params, config)
    epoch_losses = []
    for _ in range(config.epochs):
        order = rng.permutation(len(dataset))
        total, batches = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            batch = [dataset[i] for i in order[start:start + config.batch_size]]
            loss, grads = model.batch_loss_and_grads(batch, config.dropout, rng)
            optimizer.step(params, grads)
            total += loss
            batches += 1
        epoch_losses.append(total / batches)
    return epoch_losses


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_param: str
    tolerance: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.max_rel_error < self.tolerance


def grad_check(model, loss_fn, tolerance: float = 1e-4,
               step: float = 1e-4) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    loss_fn(model) must return (loss, grads).  Every parameter entry is
    perturbed by +-step; the relative error is |a - n| / max(|a|, |n|),
    falling back to the absolute difference for near-zero pairs.

    Differences straddling a ReLU kink are meaningless; check at inputs
    whose hidden pre-activations are bounded away from zero.
    """
    _, analytic = loss_fn(model)
    params = model.params
    worst, worst_param = 0.0, ""
    for name, values in params.items():
        flat = values.reshape(-1)
        for idx in range(flat.size):
            original = flat[idx]
            flat[idx] = original + step
            plus, _ = loss_fn(model)
            flat[idx] = original - step
            minus, _ = loss_fn(model)
            flat[idx] = original
            numeric = (plus - minus) / (2.0 * step)
            a = float(analytic[name].reshape(-1)[idx])
            denom = max(abs(a), abs(numeric))
            err = abs(a - numeric) / denom if denom > 1e-6 else abs(a - numeric)
            if err > worst:
                worst, worst_param = err, f"{name}[{idx}]"
    return GradCheckReport(worst, worst_param, tolerance)


# --- model files --------------------------------------------------------------


def save_model(model, path) -> None:
    labels = model.labels or ()
    values = [model.params[name] for name in model.param_order]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, model.arch))
        for dim in model.dims:
            fh.write(struct.pack("<I", dim))
        fh.write(struct.pack("<I", len(labels)))
        for label in labels:
            data = label.encode("utf-8")
            fh.write(struct.pack("<I", len(data)))
            fh.write(data)
        total = sum(v.size for v in values)
        fh.write(struct.pack("<Q", total))
        for v in values:
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_model(path):
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ModelError(f"{path}: not a model file (bad magic)")
        version, arch = struct.unpack("<II", fh.read(8))
        if version != FORMAT_VERSION:
            raise ModelError(f"{path}: unsupported format version {version}")
        dims = struct.unpack("<III", fh.read(12))
        (label_count,) = struct.unpack("<I", fh.read(4))
        labels = []
        for _ in range(label_count):
            (length,) = struct.unpack("<I", fh.read(4))
            labels.append(fh.read(length).decode("utf-8"))
        (total,) = struct.unpack("<Q", fh.read(8))
        raw = np.frombuffer(fh.read(total * 8), dtype="<f8").astype(np.float64)

    label_tuple = tuple(labels) or None
    if arch == ARCH_FEEDFORWARD:
        model = FeedForward(dims[0], dims[1], dims[2], labels=label_tuple)
    elif arch == ARCH_BILSTM:
        model = BiLstmTagger(dims[0], dims[1], dims[2], labels=label_tuple)
    else:
        raise ModelError(f"{path}: unknown architecture tag {arch}")

    params = model.params
    offset = 0
    for name in model.param_order:
        size = params[name].size
        if offset + size > raw.size:
            raise ModelError(f"{path}: truncated parameter block")
        params[name] = raw[offset:offset + size].reshape(params[name].shape)
        offset += size
    if offset != raw.size:
        raise ModelError(f"{path}: trailing parameter data")
    model.params = params
    return model
