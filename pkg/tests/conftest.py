import numpy as np
import pytest

from qtomo_cli.fock import ModeSpace, PureState, make_coherent


QTOMO_ENV = (
    "QTOMO_OUT",
    "QTOMO_SCENARIO",
    "QTOMO_NMAX",
    "QTOMO_X_RANGE",
    "QTOMO_NX",
    "QTOMO_NTHETA",
    "QTOMO_ANGLE_GRID",
    "QTOMO_PRIME_GRID",
    "QTOMO_SEED",
)


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    """No QTOMO_* variables and no .env in the working directory."""
    for name in QTOMO_ENV:
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def write_scenario(tmp_path):
    def _write(text, name="scenario.env"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def coherent_state():
    """alpha = sqrt(10) e^{i pi/4} on N_max = 60."""
    return make_coherent(np.sqrt(10.0) * np.exp(1j * np.pi / 4), ModeSpace.single(60))


def _squeezed_vacuum(r, cutoff=40):
    amps = np.zeros(cutoff + 1, dtype=complex)
    t = np.tanh(r)
    for m in range(cutoff // 2 + 1):
        n = 2 * m
        log_c = 0.5 * np.sum(np.log(np.arange(1, n + 1))) - np.sum(np.log(np.arange(1, m + 1))) - m * np.log(2.0)
        amps[n] = (-t) ** m * np.exp(log_c)
    return PureState.normalized(ModeSpace.single(cutoff), amps)


def _random_pure(dims, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=int(np.prod(dims))) + 1j * rng.normal(size=int(np.prod(dims)))
    return PureState.normalized(ModeSpace.modes(*[d - 1 for d in dims]), v)


@pytest.fixture
def squeezed_vacuum():
    """Factory for S(r)|0> with real r > 0, squeezing the theta = 0 quadrature."""
    return _squeezed_vacuum


@pytest.fixture
def random_pure():
    """Factory for a seeded random pure state on bosonic modes of the given dims."""
    return _random_pure
