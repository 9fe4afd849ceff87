import numpy as np
import pytest

from app.physics.dynamics import DissipationSpec
from app.physics.hilbert import SpaceSpec
from app.physics.models import AncillaSpec, ModelKind, ModelSpec

GAMMA = 0.01
SHIFT_DICKE_VACUUM = 0.00838095
SHIFT_HOPFIELD_VACUUM = 0.00302945


def dicke(lam: float = 0.0, N: int = 3, kind: ModelKind = ModelKind.DICKE, **kw) -> ModelSpec:
    return ModelSpec(kind=kind, lam=lam, N=N, **kw)


@pytest.fixture
def dicke_ancilla() -> AncillaSpec:
    return AncillaSpec(omega_M=2.75, g_M=0.1)


@pytest.fixture
def hopfield_ancilla() -> AncillaSpec:
    return AncillaSpec(omega_M=6.75, g_M=0.1)


@pytest.fixture
def small_space() -> SpaceSpec:
    return SpaceSpec(n_max=6, N=2)


@pytest.fixture
def dissipation() -> DissipationSpec:
    return DissipationSpec(gamma_c=GAMMA, gamma_0=GAMMA, gamma_M=GAMMA)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)
