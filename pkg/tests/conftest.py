import os

import numpy as np
import pytest

from oracles import random_spd

# every MLP fit in the suite runs the gradient check first
os.environ.setdefault("MPEC_CHECK_GRADIENTS", "1")


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def spd_pair(rng):
    return random_spd(rng, 4), random_spd(rng, 4)


def fast_pipeline(**overrides):
    from mpec.ensemble import PipelineConfig
    from mpec.learners import ForestParams, LearnerParams, MlpParams

    learners = LearnerParams(mlp=MlpParams(hidden=16, epochs=20), forest=ForestParams(trees=10))
    kwargs = dict(k=2, learners=learners)
    kwargs.update(overrides)
    return PipelineConfig(**kwargs)


@pytest.fixture(scope="session")
def small_corpus():
    from mpec.data import SynthConfig, split, synth_dataset

    trials = synth_dataset(SynthConfig(3, 24, 5, 120, 2.0, 0.5, 11))
    return split(trials, 0.75, 0)


@pytest.fixture(scope="session")
def small_model(small_corpus):
    from mpec.ensemble import mpec_fit

    return mpec_fit(small_corpus[0], fast_pipeline(), seed=3)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
