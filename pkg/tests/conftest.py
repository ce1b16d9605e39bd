import numpy as np
import pytest

from powerctl import NetworkModel


def two_link_symmetric(p_max=1.0):
    """The canonical 2-link instance: h_ii = 1, h_ki = 0.5, n = 0.1."""
    return NetworkModel(gain=[[1.0, 0.5], [0.5, 1.0]], noise=0.1, p_max=p_max)


def random_model(rng, n, coupling=0.3, p_max_range=(0.5, 1.5)):
    """Random interference-limited model with dominant direct gains."""
    g = rng.uniform(0.02, coupling, size=(n, n))
    np.fill_diagonal(g, rng.uniform(0.8, 1.6, size=n))
    return NetworkModel(
        gain=g,
        noise=rng.uniform(0.05, 0.3, size=n),
        p_max=rng.uniform(*p_max_range, size=n),
    )


def random_feasible_target(rng, model, rho_range=(0.3, 0.85)):
    """Uniform-profile SINR target scaled to a chosen spectral radius."""
    from powerctl import build_normalized, spectral_radius

    base = rng.uniform(0.5, 2.0, size=model.num_links)
    rho = spectral_radius(build_normalized(model, base).A)
    target_rho = rng.uniform(*rho_range)
    return base * (target_rho / rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
