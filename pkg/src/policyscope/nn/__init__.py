from .model import (
    CASE_INPUT_SIZE,
    POLICY_INPUT_SIZE,
    ModelHyperparams,
    TwoPathwayModel,
    backward_batch,
    forward_batch,
    init_model,
    loss_and_gradients,
    model_forward,
    model_from_dict,
    model_to_dict,
)
from .ops import (
    DenseParams,
    LstmCellParams,
    bilstm_forward,
    bilstm_layer_forward,
    dense_forward,
    lstm_cell,
    lstm_forward,
    lstm_layer_forward,
    mse_loss,
)
from .optim import AdamConfig, AdamState, optimizer_step
from .training import TrainingConfig, train_loop

__all__ = [
    "CASE_INPUT_SIZE",
    "POLICY_INPUT_SIZE",
    "AdamConfig",
    "AdamState",
    "DenseParams",
    "LstmCellParams",
    "ModelHyperparams",
    "TrainingConfig",
    "TwoPathwayModel",
    "backward_batch",
    "bilstm_forward",
    "bilstm_layer_forward",
    "dense_forward",
    "forward_batch",
    "init_model",
    "loss_and_gradients",
    "lstm_cell",
    "lstm_forward",
    "lstm_layer_forward",
    "model_forward",
    "model_from_dict",
    "model_to_dict",
    "mse_loss",
    "optimizer_step",
    "train_loop",
]
