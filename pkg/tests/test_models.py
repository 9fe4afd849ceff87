import numpy as np
import pytest
from pydantic import ValidationError

from app.errors import SpaceMismatchError
from app.physics.hilbert import SpaceSpec, excitation_number, parity_operator
from app.physics.models import (
    AncillaSpec,
    ModelKind,
    ModelSpec,
    build_full_hamiltonian,
    build_system_hamiltonian,
    check_symmetry,
)
from app.physics.spectra import diagonalize, ground_expectations
from tests.conftest import dicke

KINDS = list(ModelKind)


def test_hopfield_default_renormalization():
    m = ModelSpec(kind="Hopfield", lam=0.6, N=3, omega_0=1.2)
    assert m.D == pytest.approx(0.36 / 1.2)
    assert dicke(0.6).D == 0.0


def test_lambda_alias_and_ranges():
    assert ModelSpec.model_validate({"kind": "Dicke", "lambda": 0.3, "N": 2}).lam == 0.3
    with pytest.raises(ValidationError):
        ModelSpec(kind="Dicke", lam=-0.1, N=1)
    with pytest.raises(ValidationError):
        ModelSpec(kind="Dicke", omega_c=0.0, N=1)
    with pytest.raises(ValidationError):
        AncillaSpec(omega_M=2.0, g_M=-0.1)


def test_d_override_only_for_hopfield():
    with pytest.raises(ValidationError):
        ModelSpec(kind="Dicke", N=1, D_override=0.1)
    assert ModelSpec(kind="Hopfield", N=1, lam=0.5, D_override=0.0).D == 0.0


@pytest.mark.parametrize("lam", [0.3, 1.2])
def test_hopfield_without_diamagnetic_term_is_dicke(lam):
    space = SpaceSpec(n_max=6, N=3)
    hopfield = build_full_hamiltonian(dicke(lam, kind=ModelKind.HOPFIELD, D_override=0.0), AncillaSpec(omega_M=6.75), space)
    plain = build_full_hamiltonian(dicke(lam), AncillaSpec(omega_M=6.75), space)
    np.testing.assert_array_equal(hopfield.entries, plain.entries)


@pytest.mark.parametrize("kind", KINDS)
def test_hamiltonians_real_symmetric(kind):
    space = SpaceSpec(n_max=5, N=2)
    H = build_full_hamiltonian(dicke(0.8, N=2, kind=kind), AncillaSpec(omega_M=2.75), space)
    assert H.dim == space.dim
    assert np.isrealobj(H.entries)
    assert H.is_hermitian()


def test_uncoupled_system_is_diagonal():
    space = SpaceSpec(n_max=4, N=3)
    H = build_system_hamiltonian(dicke(0.0), space).entries
    np.testing.assert_array_equal(H, np.diag(np.diag(H)))


@pytest.mark.parametrize("kind", KINDS)
def test_parity_is_conserved(kind):
    space = SpaceSpec(n_max=6, N=3)
    H = build_full_hamiltonian(dicke(0.7, kind=kind), AncillaSpec(omega_M=2.75), space)
    assert check_symmetry(H, parity_operator(space)) < 1e-12


def test_excitation_number_conserved_only_without_counter_rotating_terms():
    space = SpaceSpec(n_max=6, N=3, include_ancilla=False)
    n_exc = excitation_number(space)
    assert check_symmetry(build_system_hamiltonian(dicke(0.7, kind=ModelKind.TAVIS_CUMMINGS), space), n_exc) < 1e-12
    assert check_symmetry(build_system_hamiltonian(dicke(0.7), space), n_exc) > 0.1


def test_check_symmetry_dimension_mismatch():
    a = build_system_hamiltonian(dicke(0.1, N=1), SpaceSpec(n_max=2, N=1))
    b = parity_operator(SpaceSpec(n_max=3, N=1))
    with pytest.raises(SpaceMismatchError):
        check_symmetry(a, b)


def test_full_hamiltonian_needs_ancilla():
    with pytest.raises(SpaceMismatchError):
        build_full_hamiltonian(dicke(0.1, N=1), AncillaSpec(omega_M=2.0), SpaceSpec(n_max=2, N=1, include_ancilla=False))


def test_space_and_model_atom_numbers_must_agree():
    with pytest.raises(SpaceMismatchError):
        build_system_hamiltonian(dicke(0.1, N=2), SpaceSpec(n_max=2, N=3))


@pytest.mark.parametrize("lam", [0.1, 0.2, 0.5])
def test_jaynes_cummings_ladder(lam):
    space = SpaceSpec(n_max=8, N=1, include_ancilla=False)
    H = build_system_hamiltonian(dicke(lam, N=1, kind=ModelKind.TAVIS_CUMMINGS), space)
    eigs = np.linalg.eigvalsh(H.entries)
    assert np.min(np.abs(eigs + 0.5)) < 1e-10
    for n in range(1, 6):
        for sign in (1, -1):
            expected = n - 0.5 + sign * lam * np.sqrt(n)
            assert np.min(np.abs(eigs - expected)) < 1e-10


@pytest.mark.parametrize("D", [0.1, 0.25])
def test_bogoliubov_vacuum_quadrature(D):
    model = ModelSpec(kind="Hopfield", lam=0.0, N=1, D_override=D)
    space = SpaceSpec(n_max=40, N=1, include_ancilla=False)
    eig = diagonalize(build_system_hamiltonian(model, space), parity_operator(space))
    quad = ground_expectations(model, eig).quad
    assert quad == pytest.approx(np.sqrt(1.0 / (1.0 + 4 * D)), abs=1e-6)
