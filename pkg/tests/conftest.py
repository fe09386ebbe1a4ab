import numpy as np
import pytest

import eegboost as eb
from eegboost.data import save_csv


@pytest.fixture
def small_synth():
    """Well-separated 3-class, 2-subject dataset for quick checks."""
    return eb.synth_generate(eb.SynthSpec(
        num_classes=3, num_subjects=2, dims=8, samples_per_cell=20,
        class_separation=6.0, subject_jitter=0.5, noise_sigma=1.0, seed=7,
    ))


def build_artifact_csv(path, seed=3):
    """Benchmark CSV with per-channel scale/offset diversity and sparse spikes.

    Mimics raw multi-channel recordings: channels differ in gain and DC
    offset by orders of magnitude, and rare large-amplitude artifacts
    stretch the observed ranges. Class structure sits in channels 0..4.
    """
    ds = eb.synth_generate(eb.SynthSpec(
        num_classes=5, num_subjects=3, dims=16, samples_per_cell=67,
        class_separation=4.0, subject_jitter=0.4, noise_sigma=1.0, seed=seed,
    ))
    rng = np.random.default_rng(seed + 1000)
    x = ds.features.copy()
    d = x.shape[1]
    scales = 10.0 ** rng.uniform(-1.5, 1.5, size=d)
    ratios = 10.0 ** rng.uniform(1.0, 3.0, size=d)
    spikes = rng.random(x.shape) < 0.004
    x = x + spikes * rng.uniform(20.0, 40.0, size=x.shape) * rng.choice([-1.0, 1.0], size=x.shape)
    x = ratios * scales + scales * x
    save_csv(ds.with_features(x), path)
    return path
