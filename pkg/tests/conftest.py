import numpy as np
import pytest

from ladm import (
    AdmissibleClass,
    ClusterEnvelope,
    DecaySpec,
    OrthonormalBasis,
    SpectrumSpec,
    synth_model,
)


def random_subspace(rng, n, d) -> OrthonormalBasis:
    Q, _ = np.linalg.qr(rng.standard_normal((n, d)))
    return OrthonormalBasis(Q[:, :d])


def make_model(n=60, j=3, h=6, k=12, delta=1e-2, seed=0, decay=None, center=None):
    """Synthetic clustered model used across the tests."""
    if decay is None:
        decay = DecaySpec("exponential", (10.0, 0.01))
    spec = SpectrumSpec(n=n, j=j, h=h, k=k, decay=decay, delta=delta,
                        cluster_center=center, seed=seed)
    return synth_model(spec)


def make_class(n=60, j=3, h=6, k=12, delta=1e-2, seed=0, decay=None):
    model, env = make_model(n=n, j=j, h=h, k=k, delta=delta, seed=seed, decay=decay)
    return AdmissibleClass.create(model, env)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
