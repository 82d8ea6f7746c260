import math

import pytest

from kafeq.channel import ChannelConfig
from kafeq.equalizers import KlmsParams
from kafeq.experiments import DfeSettings, ExperimentConfig, LmsSettings

IDENTITY_CHANNEL = ChannelConfig(
    h_pre=(1.0,), a2=0.0, a3=0.0, h_post=(1.0,), snr_db=math.inf, seed=0
)


def tiny_config(channel=IDENTITY_CHANNEL, preset_name=None, n_symbols=3000,
                master_seed=1, klms_taps=5, train_len=500, **kw) -> ExperimentConfig:
    """Small, fast configuration for functional tests."""
    return ExperimentConfig(
        channel=channel,
        preset_name=preset_name,
        n_symbols=n_symbols,
        master_seed=master_seed,
        klms=KlmsParams(mu=0.25, alpha=0.01, n_taps=klms_taps, train_len=train_len),
        lms=LmsSettings(taps=7, mu=1e-3, train_len=train_len),
        dfe=DfeSettings(fft=7, fbt=3, mu=1e-3, train_len=train_len),
        **kw,
    )


@pytest.fixture
def identity_config():
    return tiny_config()
