import numpy as np
import pytest

from delaysnn import DelaySet, DelayWeightTensor, NetworkModel, NeuronParams


def random_model(
    seed: int,
    max_width: int = 16,
    max_levels: int = 8,
    max_timesteps: int = 32,
    unit_stride: bool = True,
    mask_density: float = 0.7,
) -> NetworkModel:
    """Small random delay network with enough weight scale to actually spike."""
    rng = np.random.default_rng(seed)
    n_layers = int(rng.integers(2, 4))
    widths = tuple(int(rng.integers(2, max_width + 1)) for _ in range(n_layers + 1))
    if unit_stride:
        levels = tuple(range(int(rng.integers(1, max_levels + 1))))
    else:
        pool = np.arange(max_levels)
        k = int(rng.integers(1, max_levels + 1))
        levels = tuple(sorted(rng.choice(pool, size=k, replace=False).tolist()))
    conns = []
    dsets = []
    for c, (pre, post) in enumerate(zip(widths[:-1], widths[1:])):
        ds = DelaySet((0,)) if c == 0 else DelaySet(levels)
        scale = 2.5 / np.sqrt(len(ds) * pre)
        w = rng.normal(0.0, scale, size=(len(ds), pre, post))
        mask = rng.random(w.shape) < mask_density
        conns.append(DelayWeightTensor(w, mask))
        dsets.append(ds)
    return NetworkModel(
        widths=widths,
        connections=tuple(conns),
        delay_sets=tuple(dsets),
        neuron_params=tuple(
            NeuronParams(tau=float(rng.uniform(1.0, 8.0)), u_th=1.0)
            for _ in range(n_layers)
        ),
        num_timesteps=int(rng.integers(4, max_timesteps + 1)),
        seed=seed,
    )


def random_raster(model: NetworkModel, seed: int, density: float = 0.3) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (
        rng.random((model.num_timesteps, model.widths[0])) < density
    ).astype(np.uint8)


@pytest.fixture
def small_model():
    return random_model(seed=7)
