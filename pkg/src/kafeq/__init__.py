"""Kernel adaptive filtering equalization for simulated PAM4 direct-detection links."""

from .pam import (
    FecVerdict,
    KP4_FEC_LIMIT,
    HD_FEC_LIMIT,
    SD_FEC_LIMIT,
    PAM4_LEVELS,
    generate_bits,
    bits_to_pam4,
    pam4_to_bits,
    slice_pam4,
    slice_level,
    bit_error_rate,
    fec_verdict,
)
from .channel import (
    ChannelConfig,
    ChannelPreset,
    LINEAR_MILD,
    NONLINEAR_REFERENCE,
    PRESETS,
    get_preset,
    apply_fir,
    apply_nonlinearity,
    add_awgn,
    simulate_channel,
)
from .kernel import GaussianKernel, kernel_eval, kernel_eval_batch
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    LmsSettings,
    DfeSettings,
    CoreSettings,
    from_preset,
    run_single,
    run_tap_sweep,
    run_mse_comparison,
    run_multicore,
    measure_complexity,
    moving_average,
    to_db,
)
from .runconfig import ConfigError, default_config, parse_config_text, serialize_config
from .equalizers import (
    TapVectorizer,
    make_tap_vectors,
    KlmsParams,
    KlmsState,
    klms_predict,
    klms_train_step,
    klms_train,
    klms_equalize,
    LmsState,
    lms_train_step,
    lms_train,
    lms_equalize,
    DfeState,
    dfe_train_step,
    dfe_train,
    dfe_equalize,
)

__version__ = "0.1.0"
