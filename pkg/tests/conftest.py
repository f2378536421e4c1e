import numpy as np
import pytest

from codemotion import ActionMatrix


def random_action(rng, joints=None, frames=None, scale=30.0, frame_rate=30.0, **meta):
    """A random action with guaranteed motion in every joint."""
    joints = joints if joints is not None else int(rng.integers(2, 7))
    frames = frames if frames is not None else int(rng.integers(4, 31))
    t = np.arange(frames) / frame_rate
    samples = rng.normal(0.0, scale / 10.0, size=(frames, joints))
    freqs = rng.uniform(0.3, 2.0, size=joints)
    phases = rng.uniform(0.0, 2 * np.pi, size=joints)
    amps = rng.uniform(0.3, 1.0, size=joints) * scale
    samples += amps * np.sin(2 * np.pi * freqs * t[:, None] + phases)
    return ActionMatrix(samples, frame_rate=frame_rate, **meta)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
