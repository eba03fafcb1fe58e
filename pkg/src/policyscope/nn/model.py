"""The two-pathway forecaster.

Case pathway: two stacked bidirectional LSTM layers over the (L, 1) case
window, then a relu dense projection of the final step's hidden vector.
Policy pathway: two stacked LSTM layers over the (L, 5) policy window, same
dense projection.  The projections are concatenated and fed to a relu dense
layer and a final identity layer producing the single next-day output.

The policy pathway is optional: the case-only ablation removes it entirely
and the head shrinks accordingly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from ..errors import NumericError, ShapeError
from .ops import (
    DenseParams,
    LstmCellParams,
    bilstm_backward,
    bilstm_forward,
    dense_backward_batch,
    dense_forward_batch,
    lstm_backward,
    lstm_forward,
    mse_loss,
)

CASE_INPUT_SIZE = 1
POLICY_INPUT_SIZE = 5


@dataclass(frozen=True)
class ModelHyperparams:
    window: int = 14
    recurrent_hidden: int = 32
    pathway_dense: int = 16
    head_hidden: int = 16
    include_policy: bool = True

    @property
    def head_input(self) -> int:
        return self.pathway_dense * (2 if self.include_policy else 1)


@dataclass(frozen=True)
class TwoPathwayModel:
    hyper: ModelHyperparams
    case_l1_fwd: LstmCellParams
    case_l1_bwd: LstmCellParams
    case_l2_fwd: LstmCellParams
    case_l2_bwd: LstmCellParams
    case_dense: DenseParams
    head_hidden: DenseParams
    head_out: DenseParams
    policy_l1: LstmCellParams | None = None
    policy_l2: LstmCellParams | None = None
    policy_dense: DenseParams | None = None

    def named_parameters(self) -> list[tuple[str, np.ndarray]]:
        """Flat (name, array) view of every parameter, in a fixed order."""
        out: list[tuple[str, np.ndarray]] = []
        for f in fields(self):
            if f.name == "hyper":
                continue
            block = getattr(self, f.name)
            if block is None:
                continue
            for sub in fields(block):
                out.append((f"{f.name}.{sub.name}", getattr(block, sub.name)))
        return out

    def replace_parameters(self, flat: dict[str, np.ndarray]) -> "TwoPathwayModel":
        updates = {}
        for f in fields(self):
            if f.name == "hyper":
                continue
            block = getattr(self, f.name)
            if block is None:
                continue
            updates[f.name] = replace(
                block, **{sub.name: flat[f"{f.name}.{sub.name}"] for sub in fields(block)}
            )
        return replace(self, **updates)


def _init_lstm(rng: np.random.Generator, hidden: int, inp: int) -> LstmCellParams:
    fan_in = hidden + inp
    bound = 1.0 / math.sqrt(fan_in)
    w = lambda: rng.uniform(-bound, bound, size=(hidden, fan_in))
    z = lambda: np.zeros(hidden)
    return LstmCellParams(w(), w(), w(), w(), z(), z(), z(), z())


def _init_dense(rng: np.random.Generator, out: int, inp: int) -> DenseParams:
    bound = 1.0 / math.sqrt(inp)
    return DenseParams(rng.uniform(-bound, bound, size=(out, inp)), np.zeros(out))


def init_model(hyper: ModelHyperparams, seed: int) -> TwoPathwayModel:
    """Seeded scaled-uniform initialization; biases start at zero."""
    rng = np.random.default_rng(seed)
    H, D = hyper.recurrent_hidden, hyper.pathway_dense
    kwargs = dict(
        hyper=hyper,
        case_l1_fwd=_init_lstm(rng, H, CASE_INPUT_SIZE),
        case_l1_bwd=_init_lstm(rng, H, CASE_INPUT_SIZE),
        case_l2_fwd=_init_lstm(rng, H, 2 * H),
        case_l2_bwd=_init_lstm(rng, H, 2 * H),
        case_dense=_init_dense(rng, D, 2 * H),
        head_hidden=_init_dense(rng, hyper.head_hidden, hyper.head_input),
        head_out=_init_dense(rng, 1, hyper.head_hidden),
    )
    if hyper.include_policy:
        kwargs["policy_l1"] = _init_lstm(rng, H, POLICY_INPUT_SIZE)
        kwargs["policy_l2"] = _init_lstm(rng, H, H)
        kwargs["policy_dense"] = _init_dense(rng, D, H)
    return TwoPathwayModel(**kwargs)


def forward_batch(
    model: TwoPathwayModel, case_x: np.ndarray, policy_x: np.ndarray | None
) -> tuple[np.ndarray, dict]:
    """Predictions (B,) for case windows (B, L, 1) and policy windows (B, L, 5)."""
    hyper = model.hyper
    B, L, _ = case_x.shape
    if L != hyper.window or case_x.shape[2] != CASE_INPUT_SIZE:
        raise ShapeError(f"case windows {case_x.shape}, expected (B, {hyper.window}, 1)")
    cache: dict = {}
    y1, cache["c1"] = bilstm_forward(case_x, model.case_l1_fwd, model.case_l1_bwd)
    y2, cache["c2"] = bilstm_forward(y1, model.case_l2_fwd, model.case_l2_bwd)
    u, cache["cd"] = dense_forward_batch(y2[:, -1, :], model.case_dense, "relu")
    if hyper.include_policy:
        if policy_x is None or policy_x.shape != (B, L, POLICY_INPUT_SIZE):
            raise ShapeError(
                f"policy windows {None if policy_x is None else policy_x.shape}, "
                f"expected ({B}, {L}, {POLICY_INPUT_SIZE})"
            )
        p1, cache["p1"] = lstm_forward(policy_x, model.policy_l1)
        p2, cache["p2"] = lstm_forward(p1, model.policy_l2)
        v, cache["pd"] = dense_forward_batch(p2[:, -1, :], model.policy_dense, "relu")
        z = np.concatenate([u, v], axis=1)
    else:
        z = u
    g, cache["h1"] = dense_forward_batch(z, model.head_hidden, "relu")
    out, cache["h2"] = dense_forward_batch(g, model.head_out, "identity")
    y = out[:, 0]
    if not np.all(np.isfinite(y)):
        raise NumericError("non-finite model output")
    cache["L"] = L
    return y, cache


def model_forward(
    case_window: np.ndarray, policy_window: np.ndarray | None, model: TwoPathwayModel
) -> float:
    """Single-sample prediction from a normalized case window and scaled policy window."""
    case_x = np.asarray(case_window, dtype=float).reshape(1, -1, 1)
    policy_x = None
    if model.hyper.include_policy:
        policy_x = np.asarray(policy_window, dtype=float)[None, :, :]
    y, _ = forward_batch(model, case_x, policy_x)
    return float(y[0])


def _grads_of(block, prefix: str, out: dict[str, np.ndarray]) -> None:
    for f in fields(block):
        out[f"{prefix}.{f.name}"] = getattr(block, f.name)


def backward_batch(model: TwoPathwayModel, cache: dict, d_y: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss with respect to every parameter.

    ``d_y`` is the loss gradient with respect to the (B,) predictions; the
    recurrent layers are unrolled back across all time steps.
    """
    hyper = model.hyper
    B = d_y.shape[0]
    L = cache["L"]
    H = hyper.recurrent_hidden
    grads: dict[str, np.ndarray] = {}

    d_out = d_y[:, None]
    d_g, g_h2 = dense_backward_batch(d_out, cache["h2"], model.head_out, "identity")
    _grads_of(g_h2, "head_out", grads)
    d_z, g_h1 = dense_backward_batch(d_g, cache["h1"], model.head_hidden, "relu")
    _grads_of(g_h1, "head_hidden", grads)

    D = hyper.pathway_dense
    d_u = d_z[:, :D]
    d_last_case, g_cd = dense_backward_batch(d_u, cache["cd"], model.case_dense, "relu")
    _grads_of(g_cd, "case_dense", grads)
    d_y2 = np.zeros((B, L, 2 * H))
    d_y2[:, -1, :] = d_last_case
    d_y1, g_c2f, g_c2b = bilstm_backward(d_y2, cache["c2"], model.case_l2_fwd, model.case_l2_bwd)
    _grads_of(g_c2f, "case_l2_fwd", grads)
    _grads_of(g_c2b, "case_l2_bwd", grads)
    _, g_c1f, g_c1b = bilstm_backward(d_y1, cache["c1"], model.case_l1_fwd, model.case_l1_bwd)
    _grads_of(g_c1f, "case_l1_fwd", grads)
    _grads_of(g_c1b, "case_l1_bwd", grads)

    if hyper.include_policy:
        d_v = d_z[:, D:]
        d_last_pol, g_pd = dense_backward_batch(d_v, cache["pd"], model.policy_dense, "relu")
        _grads_of(g_pd, "policy_dense", grads)
        d_p2 = np.zeros((B, L, H))
        d_p2[:, -1, :] = d_last_pol
        d_p1, g_p2 = lstm_backward(d_p2, cache["p2"], model.policy_l2)
        _grads_of(g_p2, "policy_l2", grads)
        _, g_p1 = lstm_backward(d_p1, cache["p1"], model.policy_l1)
        _grads_of(g_p1, "policy_l1", grads)

    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {name}")
    return grads


def loss_and_gradients(
    model: TwoPathwayModel,
    case_x: np.ndarray,
    policy_x: np.ndarray | None,
    targets: np.ndarray,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean-squared-error loss over the batch and its parameter gradients."""
    y, cache = forward_batch(model, case_x, policy_x)
    loss = mse_loss(y, targets)
    d_y = 2.0 * (y - targets) / y.shape[0]
    return loss, backward_batch(model, cache, d_y)


def model_to_dict(model: TwoPathwayModel) -> dict:
    return {
        "hyperparams": {
            "window": model.hyper.window,
            "recurrent_hidden": model.hyper.recurrent_hidden,
            "pathway_dense": model.hyper.pathway_dense,
            "head_hidden": model.hyper.head_hidden,
            "include_policy": model.hyper.include_policy,
        },
        "parameters": {
            name: {"shape": list(arr.shape), "values": [float(v) for v in arr.ravel()]}
            for name, arr in model.named_parameters()
        },
    }


def model_from_dict(doc: dict) -> TwoPathwayModel:
    hyper = ModelHyperparams(**doc["hyperparams"])
    skeleton = init_model(hyper, seed=0)
    flat = {}
    for name, entry in doc["parameters"].items():
        flat[name] = np.asarray(entry["values"], dtype=float).reshape(entry["shape"])
    return skeleton.replace_parameters(flat)
