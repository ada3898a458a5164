import math
from pathlib import Path

import numpy as np
import pytest

from sqzband.core import PumpConfig, SystemParams, derive_all
from sqzband.errors import SqzbandError

REPO_ROOT = Path(__file__).resolve().parent.parent
PAPER_CONFIG = REPO_ROOT / "configs" / "paper.ini"

TWO_PI = 2 * math.pi


@pytest.fixture(scope="session")
def paper_config_path():
    return PAPER_CONFIG


@pytest.fixture(scope="session")
def paper_run_config():
    from sqzband.config import load_config

    return load_config(PAPER_CONFIG)


def sample_system(rng) -> tuple[SystemParams, PumpConfig]:
    """One random physical configuration (may be unstable)."""
    kappa_hz = 10 ** rng.uniform(5.3, 6.7)
    omega_m_hz = 10 ** rng.uniform(5.0, 6.0)
    params = SystemParams.from_hz(
        kappa_hz=kappa_hz,
        kappa_in_hz=kappa_hz * rng.uniform(0.3, 1.0),
        g0_hz=rng.uniform(5.0, 60.0),
        omega_m_hz=omega_m_hz,
        gamma_m_hz=10 ** rng.uniform(-1.5, 0.5),
        delta_hz=rng.uniform(-0.4, 0.4) * kappa_hz,
        n_th=10 ** rng.uniform(2.0, 5.5),
    )
    scale = 10 ** rng.uniform(4.5, 6.2)
    pump = PumpConfig(
        alpha_in_minus=scale * rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0, TWO_PI)),
        alpha_in_plus=scale * rng.uniform(0.05, 0.8) * np.exp(1j * rng.uniform(0, TWO_PI)),
    )
    return params, pump


def load_table(path):
    """CSV table -> structured array, tolerant of leading '#' comments."""
    lines = Path(path).read_text().splitlines()
    skip = sum(1 for line in lines if line.startswith("#"))
    return np.genfromtxt(path, delimiter=",", names=True, skip_header=skip)


def sample_stable_rates(rng, max_tries: int = 200):
    """(params, pump, rates) from rejection sampling of the stable domain."""
    for _ in range(max_tries):
        params, pump = sample_system(rng)
        try:
            rates = derive_all(params, pump)
        except SqzbandError:
            continue
        if rates.gamma_eff > 10 * params.gamma_m and abs(rates.s) < 0.9:
            return params, pump, rates
    raise RuntimeError("could not sample a stable configuration")
