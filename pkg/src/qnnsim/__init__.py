"""Statevector simulation and training of variational quantum classifiers."""

from .circuits import (
    CircuitTemplate,
    LayerSpec,
    analog_layer,
    build_classifier,
    ent_layer,
    param_rotation_layer,
    run,
)
from .encoding import (
    AmplitudeEncoding,
    BlockEncoding,
    encode_amplitude,
    encode_block,
    fix_global_phase,
)
from .data_io import (
    LabeledDataset,
    emit_results,
    load_idx_images,
    load_spt_dataset,
    preprocess_images,
    save_spt_dataset,
)
from .objective import Hypothesis, hypothesis, loss, loss_gradient, shift_gradient
from .spin_models import (
    HamiltonianSpec,
    aubry_andre,
    build_matrix,
    cluster_ising,
    evolution_unitary,
    ground_state,
    make_spt_dataset,
)
from .statevector import (
    GateSpec,
    Observable,
    StateVector,
    apply_gate,
    expectation,
    from_amplitudes,
    zero_state,
)
from .trainer import (
    AdamState,
    RunRecord,
    TrainConfig,
    adam_step,
    evaluate,
    init_adam,
    init_params,
    train,
)

__all__ = [
    "AdamState",
    "AmplitudeEncoding",
    "BlockEncoding",
    "CircuitTemplate",
    "GateSpec",
    "HamiltonianSpec",
    "Hypothesis",
    "LabeledDataset",
    "LayerSpec",
    "Observable",
    "RunRecord",
    "StateVector",
    "TrainConfig",
    "adam_step",
    "analog_layer",
    "apply_gate",
    "aubry_andre",
    "build_classifier",
    "build_matrix",
    "cluster_ising",
    "emit_results",
    "encode_amplitude",
    "encode_block",
    "ent_layer",
    "evaluate",
    "evolution_unitary",
    "expectation",
    "fix_global_phase",
    "from_amplitudes",
    "ground_state",
    "hypothesis",
    "init_adam",
    "init_params",
    "load_idx_images",
    "load_spt_dataset",
    "loss",
    "loss_gradient",
    "make_spt_dataset",
    "param_rotation_layer",
    "preprocess_images",
    "run",
    "save_spt_dataset",
    "shift_gradient",
    "train",
    "zero_state",
]

__version__ = "0.1.0"
