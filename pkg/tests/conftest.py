import numpy as np
import pytest

from evoprune.datasets import SplitSpec, generate_blobs, stratified_split
from evoprune.network import TrainConfig, init_network, train


@pytest.fixture(scope="session")
def small_setup():
    """A small trained network plus its data splits, shared across tests.

    ~1.1k prunable weights; big enough for meaningful pruning fronts,
    small enough that a whole evolutionary run takes well under a second.
    """
    data = generate_blobs(3, 8, 80, 1.0, seed=42)
    train_set, val_set, opt_set, test_set = stratified_split(
        data, SplitSpec(0.6, 0.2, 15, seed=7)
    )
    net = init_network([8, 16, 32, 16, 3], seed=5)
    trained = train(net, train_set, TrainConfig(epochs=25, seed=9))
    return {
        "base": trained,
        "train": train_set,
        "val": val_set,
        "opt": opt_set,
        "test": test_set,
    }


class ScriptedRng:
    """Deterministic stand-in for a Generator: .random() replays a script
    (cycling), supporting the operator symmetry/no-op contract tests."""

    def __init__(self, values):
        self.values = list(values)
        self.pos = 0

    def random(self, size=None):
        if size is None:
            v = self.values[self.pos % len(self.values)]
            self.pos += 1
            return v
        return np.array([self.random() for _ in range(size)])


@pytest.fixture
def constant_half_rng():
    return ScriptedRng([0.5])


# deterministic hypothesis exploration so the whole suite is reproducible
from hypothesis import settings as _hyp_settings

_hyp_settings.register_profile("deterministic", derandomize=True)
_hyp_settings.load_profile("deterministic")
