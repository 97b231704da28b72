import hypothesis
import numpy as np
import pytest

from lfodetect import Channel, SampleWindow

hypothesis.settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.load_profile("default")


@pytest.fixture
def make_window():
    def _make(samples, dt=0.04, station="test", channel=Channel.Frequency_Hz, t0_ms=0):
        return SampleWindow(station, channel, t0_ms, dt, np.asarray(samples, dtype=float))

    return _make
