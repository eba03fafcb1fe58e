"""Recurrent and dense building blocks with exact reverse-mode gradients.

Everything is double precision.  Batched tensors are laid out
``(batch, time, features)``; the single-sample entry points used by the rest
of the package wrap the batched kernels.

LSTM cell, given input x_t, previous hidden h and previous cell state c
(``[h, x]`` is concatenation, ``*`` elementwise product)::

    f = sigmoid(W_f [h, x] + b_f)        forget gate
    i = sigmoid(W_i [h, x] + b_i)        input gate
    g = tanh   (W_C [h, x] + b_c)        candidate state
    c_t = f * c + i * g
    o = sigmoid(W_o [h, x] + b_o)        output gate
    h_t = o * tanh(c_t)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit as sigmoid

from ..errors import ShapeError

Activation = str  # "relu" | "identity"


@dataclass(frozen=True)
class LstmCellParams:
    """Gate weights of shape (hidden, hidden + input) and biases of length hidden."""

    W_f: np.ndarray
    W_i: np.ndarray
    W_C: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray

    def __post_init__(self):
        ws = (self.W_f, self.W_i, self.W_C, self.W_o)
        bs = (self.b_f, self.b_i, self.b_c, self.b_o)
        shape = ws[0].shape
        hidden = bs[0].shape[0]
        if any(w.shape != shape for w in ws) or any(b.shape != (hidden,) for b in bs):
            raise ShapeError("LSTM gate weights/biases have inconsistent shapes")
        if shape[0] != hidden or shape[1] <= hidden:
            raise ShapeError(
                f"LSTM weight shape {shape} inconsistent with hidden size {hidden}"
            )

    @property
    def hidden_size(self) -> int:
        return self.b_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_f.shape[1] - self.hidden_size


@dataclass(frozen=True)
class DenseParams:
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise ShapeError(f"dense W {self.W.shape} and b {self.b.shape} mismatch")


def lstm_cell(
    x_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray, params: LstmCellParams
) -> tuple[np.ndarray, np.ndarray]:
    """One LSTM step on a single sample; returns (h_t, c_t)."""
    x_t = np.asarray(x_t, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    c_prev = np.asarray(c_prev, dtype=float)
    hid = params.hidden_size
    if x_t.shape != (params.input_size,) or h_prev.shape != (hid,) or c_prev.shape != (hid,):
        raise ShapeError(
            f"lstm_cell got x {x_t.shape}, h {h_prev.shape}, c {c_prev.shape} for "
            f"hidden={hid}, input={params.input_size}"
        )
    z = np.concatenate([h_prev, x_t])
    f = sigmoid(params.W_f @ z + params.b_f)
    i = sigmoid(params.W_i @ z + params.b_i)
    g = np.tanh(params.W_C @ z + params.b_c)
    c_t = f * c_prev + i * g
    o = sigmoid(params.W_o @ z + params.b_o)
    return o * np.tanh(c_t), c_t


def lstm_forward(x: np.ndarray, params: LstmCellParams) -> tuple[np.ndarray, dict]:
    """Run the cell over a batched sequence x of shape (B, L, input).

    Returns the full hidden sequence (B, L, hidden) and the cache the backward
    pass needs.
    """
    B, L, inp = x.shape
    if inp != params.input_size:
        raise ShapeError(f"sequence feature size {inp} != param input size {params.input_size}")
    H = params.hidden_size
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    hs = np.empty((B, L, H))
    cache = {
        "z": np.empty((B, L, H + inp)),
        "f": np.empty((B, L, H)),
        "i": np.empty((B, L, H)),
        "g": np.empty((B, L, H)),
        "o": np.empty((B, L, H)),
        "c_prev": np.empty((B, L, H)),
        "tc": np.empty((B, L, H)),
    }
    for t in range(L):
        z = np.concatenate([h, x[:, t, :]], axis=1)
        f = sigmoid(z @ params.W_f.T + params.b_f)
        i = sigmoid(z @ params.W_i.T + params.b_i)
        g = np.tanh(z @ params.W_C.T + params.b_c)
        c_new = f * c + i * g
        o = sigmoid(z @ params.W_o.T + params.b_o)
        tc = np.tanh(c_new)
        h = o * tc
        cache["z"][:, t] = z
        cache["f"][:, t] = f
        cache["i"][:, t] = i
        cache["g"][:, t] = g
        cache["o"][:, t] = o
        cache["c_prev"][:, t] = c
        cache["tc"][:, t] = tc
        c = c_new
        hs[:, t, :] = h
    return hs, cache


def lstm_backward(
    d_hs: np.ndarray, cache: dict, params: LstmCellParams
) -> tuple[np.ndarray, LstmCellParams]:
    """Backpropagation through time for one LSTM layer.

    ``d_hs`` holds the loss gradient with respect to every emitted hidden
    state.  Returns the gradient with respect to the input sequence and the
    parameter gradients packed in the same structure as the parameters.
    """
    B, L, H = d_hs.shape
    inp = params.input_size
    dW_f = np.zeros_like(params.W_f)
    dW_i = np.zeros_like(params.W_i)
    dW_C = np.zeros_like(params.W_C)
    dW_o = np.zeros_like(params.W_o)
    db_f = np.zeros_like(params.b_f)
    db_i = np.zeros_like(params.b_i)
    db_c = np.zeros_like(params.b_c)
    db_o = np.zeros_like(params.b_o)
    dx = np.empty((B, L, inp))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(L - 1, -1, -1):
        z = cache["z"][:, t]
        f = cache["f"][:, t]
        i = cache["i"][:, t]
        g = cache["g"][:, t]
        o = cache["o"][:, t]
        tc = cache["tc"][:, t]
        c_prev = cache["c_prev"][:, t]
        dh = d_hs[:, t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        df = dc * c_prev
        di = dc * g
        dg = dc * i
        da_f = df * f * (1.0 - f)
        da_i = di * i * (1.0 - i)
        da_c = dg * (1.0 - g * g)
        da_o = do * o * (1.0 - o)
        dW_f += da_f.T @ z
        dW_i += da_i.T @ z
        dW_C += da_c.T @ z
        dW_o += da_o.T @ z
        db_f += da_f.sum(axis=0)
        db_i += da_i.sum(axis=0)
        db_c += da_c.sum(axis=0)
        db_o += da_o.sum(axis=0)
        dz = da_f @ params.W_f + da_i @ params.W_i + da_c @ params.W_C + da_o @ params.W_o
        dh_next = dz[:, :H]
        dx[:, t] = dz[:, H:]
        dc_next = dc * f
    grads = LstmCellParams(dW_f, dW_i, dW_C, dW_o, db_f, db_i, db_c, db_o)
    return dx, grads


def bilstm_forward(
    x: np.ndarray, fwd: LstmCellParams, bwd: LstmCellParams
) -> tuple[np.ndarray, tuple[dict, dict]]:
    """Bidirectional layer: forward pass over x plus a second pass over the
    reversed sequence, re-reversed so both halves align per time step.

    Output width is twice the hidden size.
    """
    if fwd.hidden_size != bwd.hidden_size:
        raise ShapeError(
            f"forward hidden {fwd.hidden_size} != backward hidden {bwd.hidden_size}"
        )
    hs_f, cache_f = lstm_forward(x, fwd)
    hs_b_rev, cache_b = lstm_forward(x[:, ::-1, :], bwd)
    hs_b = hs_b_rev[:, ::-1, :]
    return np.concatenate([hs_f, hs_b], axis=2), (cache_f, cache_b)


def bilstm_backward(
    d_out: np.ndarray, caches: tuple[dict, dict], fwd: LstmCellParams, bwd: LstmCellParams
) -> tuple[np.ndarray, LstmCellParams, LstmCellParams]:
    H = fwd.hidden_size
    cache_f, cache_b = caches
    dx_f, grads_f = lstm_backward(np.ascontiguousarray(d_out[:, :, :H]), cache_f, fwd)
    d_b_rev = np.ascontiguousarray(d_out[:, ::-1, H:])
    dx_b_rev, grads_b = lstm_backward(d_b_rev, cache_b, bwd)
    dx = dx_f + dx_b_rev[:, ::-1, :]
    return dx, grads_f, grads_b


def lstm_layer_forward(sequence: np.ndarray, params: LstmCellParams) -> np.ndarray:
    """Hidden states for a single (L, input) sequence, chaining the cell from zero state."""
    sequence = np.asarray(sequence, dtype=float)
    if sequence.ndim != 2:
        raise ShapeError(f"expected (L, input) sequence, got shape {sequence.shape}")
    hs, _ = lstm_forward(sequence[None, :, :], params)
    return hs[0]


def bilstm_layer_forward(
    sequence: np.ndarray, fwd_params: LstmCellParams, bwd_params: LstmCellParams
) -> np.ndarray:
    """Per-step concatenation of forward and re-reversed backward hidden states."""
    sequence = np.asarray(sequence, dtype=float)
    if sequence.ndim != 2:
        raise ShapeError(f"expected (L, input) sequence, got shape {sequence.shape}")
    out, _ = bilstm_forward(sequence[None, :, :], fwd_params, bwd_params)
    return out[0]


def _activate(a: np.ndarray, activation: Activation) -> np.ndarray:
    if activation == "relu":
        return np.maximum(a, 0.0)
    if activation == "identity":
        return a
    raise ShapeError(f"unknown activation {activation!r}")


def dense_forward(
    x: np.ndarray, W: np.ndarray, b: np.ndarray, activation: Activation = "identity"
) -> np.ndarray:
    """activation(W x + b) on a single vector."""
    x = np.asarray(x, dtype=float)
    if W.ndim != 2 or x.shape != (W.shape[1],) or b.shape != (W.shape[0],):
        raise ShapeError(f"dense shapes: W {W.shape}, b {b.shape}, x {x.shape}")
    return _activate(W @ x + b, activation)


def dense_forward_batch(
    x: np.ndarray, params: DenseParams, activation: Activation
) -> tuple[np.ndarray, dict]:
    if x.ndim != 2 or x.shape[1] != params.W.shape[1]:
        raise ShapeError(f"dense input {x.shape} vs W {params.W.shape}")
    a = x @ params.W.T + params.b
    return _activate(a, activation), {"x": x, "a": a}


def dense_backward_batch(
    d_y: np.ndarray, cache: dict, params: DenseParams, activation: Activation
) -> tuple[np.ndarray, DenseParams]:
    if activation == "relu":
        da = d_y * (cache["a"] > 0.0)
    else:
        da = d_y
    dW = da.T @ cache["x"]
    db = da.sum(axis=0)
    dx = da @ params.W
    return dx, DenseParams(dW, db)


def mse_loss(pred, target) -> float:
    """Mean of squared differences."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape or pred.size == 0:
        raise ShapeError(f"mse_loss shapes: pred {pred.shape}, target {target.shape}")
    return float(np.mean((pred - target) ** 2))
