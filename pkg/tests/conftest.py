import numpy as np
import pytest
from hypothesis import settings

from sixpoint import SceneConfig, Scenario, SolverKind
from sixpoint.synthetic import kind_pc_type, make_instance, minimal_sample

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def noise_free_sample(kind, seed):
    """(instance, six correspondences) drawn the way the stability protocol does."""
    kind = SolverKind(kind)
    scenario = Scenario.GENERALIZED if kind is SolverKind.GENERIC64 else Scenario.TWO_CAMERA_RIG
    inst = make_instance(SceneConfig(scenario=scenario, pc_type=kind_pc_type(kind), seed=seed))
    return inst, minimal_sample(inst, kind, np.random.default_rng(seed))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
