"""Mini-batch training loop: seeded shuffling, early stopping on a held-out split."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .model import TwoPathwayModel, forward_batch, loss_and_gradients
from .optim import AdamConfig, AdamState, optimizer_step
from .ops import mse_loss


@dataclass(frozen=True)
class TrainingConfig:
    lr: float = 1e-3
    batch_size: int = 32
    epochs: int = 120
    patience: int = 20
    val_fraction: float = 0.1


def train_loop(
    model: TwoPathwayModel,
    case_x: np.ndarray,
    policy_x: np.ndarray | None,
    targets: np.ndarray,
    config: TrainingConfig,
    seed: int,
) -> tuple[TwoPathwayModel, dict]:
    """Run mini-batch Adam and return the best model plus loss metadata.

    A seeded 10% split is held out for early stopping when there are enough
    samples; otherwise the full epoch budget runs.  The best validation
    snapshot is restored at the end.
    """
    n = targets.shape[0]
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_val = int(config.val_fraction * n) if n >= 10 else 0
    val_idx, train_idx = perm[:n_val], perm[n_val:]

    adam = AdamConfig(lr=config.lr)
    state = AdamState()
    params = dict(model.named_parameters())

    def eval_loss(idx: np.ndarray) -> float:
        pred, _ = forward_batch(
            model, case_x[idx], policy_x[idx] if policy_x is not None else None
        )
        return mse_loss(pred, targets[idx])

    best_val = math.inf
    best_params = {k: v.copy() for k, v in params.items()}
    best_epoch = 0
    stale = 0
    train_loss = math.nan
    for epoch in range(config.epochs):
        order = rng.permutation(len(train_idx))
        epoch_losses = []
        for start in range(0, len(order), config.batch_size):
            batch = train_idx[order[start : start + config.batch_size]]
            loss, grads = loss_and_gradients(
                model,
                case_x[batch],
                policy_x[batch] if policy_x is not None else None,
                targets[batch],
            )
            epoch_losses.append(loss)
            params, state = optimizer_step(params, grads, state, adam)
            model = model.replace_parameters(params)
        train_loss = float(np.mean(epoch_losses))
        if not math.isfinite(train_loss):
            raise TrainingError(f"training diverged at epoch {epoch}")
        if n_val > 0:
            val_loss = eval_loss(val_idx)
            if val_loss < best_val:
                best_val = val_loss
                best_params = {k: v.copy() for k, v in params.items()}
                best_epoch = epoch
                stale = 0
            else:
                stale += 1
                if stale > config.patience:
                    break
    if n_val > 0:
        model = model.replace_parameters(best_params)
        final_val = best_val
    else:
        best_epoch = config.epochs - 1
        final_val = None
    meta = {
        "final_train_loss": train_loss,
        "final_val_loss": final_val,
        "best_epoch": best_epoch,
        "train_samples": int(len(train_idx)),
        "val_samples": int(n_val),
    }
    return model, meta
