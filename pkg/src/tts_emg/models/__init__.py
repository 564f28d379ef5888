from .architectures import (
    SPEC_BUILDERS,
    ArchitectureSpec,
    TemporalFireSpec,
    adapt_temporal_conv,
    baseline_db1_spec,
    baseline_db2_spec,
    build_baseline_db1,
    build_baseline_db2,
    build_baseline_spec,
    build_network,
    build_tts_db1,
    build_tts_db2,
    build_tts_spec,
    closed_form_parameter_count,
    count_parameters,
    temporal_fire_forward,
    tts_db1_spec,
    tts_db2_spec,
)
from .checkpoint import checkpoint_bytes, load_checkpoint, save_checkpoint
from .training import DEFAULT_EPOCHS, TrainConfig, TrainReport, predict, predict_batch, train
