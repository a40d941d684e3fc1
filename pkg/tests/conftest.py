import numpy as np
import pytest

from topoinv import build_hamiltonian, diagonalize, fermi_projection, make_named_model

HARPER_B = 2 * np.pi / 3


@pytest.fixture(scope="session")
def harper24_eigen():
    model = make_named_model("harper", sizes=24, b12=HARPER_B)
    return model, diagonalize(build_hamiltonian(model))


@pytest.fixture(scope="session")
def harper24_projection(harper24_eigen):
    model, eig = harper24_eigen
    nb = 24 * 24 // 3
    mu = 0.5 * (eig.eigenvalues[nb - 1] + eig.eigenvalues[nb])
    return model, fermi_projection(eig, mu)


@pytest.fixture(scope="session")
def qwz_open20():
    model = make_named_model("qwz", sizes=20, boundary="open", mass=1.0)
    sample = build_hamiltonian(model)
    return model, sample, fermi_projection(diagonalize(sample), 0.0)
