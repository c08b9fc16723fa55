"""Feed-forward teacher policy, its KL training signal and an Adam optimizer."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .simplex import kl_divergence, validate_distribution

PARAM_NAMES = ("w1", "b1", "w2", "b2")


class NonFiniteGradientError(FloatingPointError):
    pass


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    e = np.exp(z - z.max())
    p = e / e.sum()
    # keep every entry strictly positive so KL against it stays finite
    return np.maximum(p, np.finfo(float).tiny)


@dataclass
class TeacherNet:
    """``input_dim -> hidden_dim (tanh) -> num_groups (softmax)``."""

    w1: np.ndarray  # (hidden, input)
    b1: np.ndarray
    w2: np.ndarray  # (groups, hidden)
    b2: np.ndarray

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, num_groups: int, seed: int = 0) -> "TeacherNet":
        rng = np.random.default_rng(seed)
        lim1 = 1.0 / np.sqrt(input_dim)
        lim2 = 1.0 / np.sqrt(hidden_dim)
        return cls(
            w1=rng.uniform(-lim1, lim1, (hidden_dim, input_dim)),
            b1=rng.uniform(-lim1, lim1, hidden_dim),
            w2=rng.uniform(-lim2, lim2, (num_groups, hidden_dim)),
            b2=rng.uniform(-lim2, lim2, num_groups),
        )

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int, num_groups: int) -> "TeacherNet":
        return cls(
            np.zeros((hidden_dim, input_dim)), np.zeros(hidden_dim),
            np.zeros((num_groups, hidden_dim)), np.zeros(num_groups),
        )

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def num_groups(self) -> int:
        return self.w2.shape[0]

    @property
    def num_params(self) -> int:
        return sum(getattr(self, n).size for n in PARAM_NAMES)

    def params(self) -> dict[str, np.ndarray]:
        return {n: getattr(self, n) for n in PARAM_NAMES}

    def flat(self) -> np.ndarray:
        return np.concatenate([getattr(self, n).ravel() for n in PARAM_NAMES])

    def copy(self) -> "TeacherNet":
        return TeacherNet(**{n: getattr(self, n).copy() for n in PARAM_NAMES})


def _hidden(net: TeacherNet, state) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(state, dtype=float).ravel()
    if x.size != net.input_dim:
        raise ValueError(f"state has {x.size} entries, teacher expects {net.input_dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("state vector has non-finite entries")
    for n in PARAM_NAMES:
        if not np.all(np.isfinite(getattr(net, n))):
            raise ValueError(f"teacher parameter {n} has non-finite entries")
    return x, np.tanh(net.w1 @ x + net.b1)


def forward(net: TeacherNet, state) -> np.ndarray:
    _, h = _hidden(net, state)
    return softmax(net.w2 @ h + net.b2)


def loss_and_gradients(net: TeacherNet, state, target) -> tuple[float, dict[str, np.ndarray]]:
    """``KL(target || forward(net, state))`` and its exact parameter gradients."""
    target = validate_distribution(target, net.num_groups)
    x, h = _hidden(net, state)
    p = softmax(net.w2 @ h + net.b2)
    loss = kl_divergence(target, p)
    dz = p - target  # d/dz of -sum(t log softmax(z)) when sum(t) == 1
    da = (net.w2.T @ dz) * (1.0 - h * h)
    grads = {
        "w1": np.outer(da, x),
        "b1": da,
        "w2": np.outer(dz, h),
        "b2": dz,
    }
    return loss, grads


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")

    @classmethod
    def for_net(cls, net: TeacherNet, lr: float = 1e-3, **kw) -> "AdamState":
        zeros = {n: np.zeros_like(getattr(net, n)) for n in PARAM_NAMES}
        return cls(lr=lr, m=zeros, v={n: z.copy() for n, z in zeros.items()}, **kw)


def apply_update(net: TeacherNet, opt: AdamState, grads: dict) -> tuple[TeacherNet, AdamState]:
    """One Adam step. Returns new objects; the inputs are left untouched."""
    for n in PARAM_NAMES:
        g = np.asarray(grads[n])
        if g.shape != getattr(net, n).shape:
            raise ValueError(f"gradient {n} has shape {g.shape}, expected {getattr(net, n).shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f"non-finite gradient for {n}; step aborted")
    t = opt.step + 1
    new_params, m, v = {}, {}, {}
    for n in PARAM_NAMES:
        g = np.asarray(grads[n], dtype=float)
        m[n] = opt.beta1 * opt.m[n] + (1 - opt.beta1) * g
        v[n] = opt.beta2 * opt.v[n] + (1 - opt.beta2) * g * g
        m_hat = m[n] / (1 - opt.beta1**t)
        v_hat = v[n] / (1 - opt.beta2**t)
        new_params[n] = getattr(net, n) - opt.lr * m_hat / (np.sqrt(v_hat) + opt.eps)
    return TeacherNet(**new_params), replace(opt, step=t, m=m, v=v)


class StudentStateTracker:
    """Summary of the student's training state fed to the teacher.

    Layout: per-group recent loss (EMA over that group's batches), per-group
    visit frequency, global EMA of the synthetic loss. Length ``2*g + 1``.
    """

    def __init__(self, num_groups: int, decay: float = 0.9):
        self.num_groups = num_groups
        self.decay = decay
        self.group_loss = np.zeros(num_groups)
        self.counts = np.zeros(num_groups)
        self.global_loss = 0.0
        self._seen = np.zeros(num_groups, dtype=bool)
        self._any = False

    @property
    def input_dim(self) -> int:
        return 2 * self.num_groups + 1

    def observe(self, group: int, loss: float) -> None:
        d = self.decay
        if self._seen[group]:
            self.group_loss[group] = d * self.group_loss[group] + (1 - d) * loss
        else:
            self.group_loss[group] = loss
            self._seen[group] = True
        self.global_loss = d * self.global_loss + (1 - d) * loss if self._any else loss
        self._any = True
        self.counts[group] += 1

    def vector(self) -> np.ndarray:
        total = self.counts.sum()
        freq = self.counts / total if total > 0 else np.zeros(self.num_groups)
        return np.concatenate([self.group_loss, freq, [self.global_loss]])


_MAGIC = "advteacher-checkpoint"


def save_checkpoint(path, net: TeacherNet, *, seed: int, step: int) -> None:
    """Write a one-line JSON header followed by the float64 parameters."""
    header = {
        "format": _MAGIC,
        "version": 1,
        "dtype": "<f8",
        "order": list(PARAM_NAMES),
        "shapes": {n: list(getattr(net, n).shape) for n in PARAM_NAMES},
        "seed": int(seed),
        "step": int(step),
    }
    blob = json.dumps(header, sort_keys=True).encode() + b"\n"
    blob += net.flat().astype("<f8").tobytes()
    Path(path).write_bytes(blob)


def load_checkpoint(path) -> tuple[TeacherNet, dict]:
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    header = json.loads(raw[:nl])
    if header.get("format") != _MAGIC:
        raise ValueError(f"{path}: not a teacher checkpoint")
    flat = np.frombuffer(raw[nl + 1:], dtype=header["dtype"]).astype(float)
    params, off = {}, 0
    for n in header["order"]:
        shape = tuple(header["shapes"][n])
        size = int(np.prod(shape))
        params[n] = flat[off:off + size].reshape(shape).copy()
        off += size
    if off != flat.size:
        raise ValueError(f"{path}: payload size does not match header shapes")
    return TeacherNet(**params), header
