"""Fixtures partagées : bancs de filtres, petits réseaux, jeu synthétique réduit"""
import numpy as np
import pytest

from app.core.config import get_settings
from app.datasets.annotations import boxes_from_annotations, save_annotations, save_boxes
from app.datasets.synthetic import generate_dataset
from app.scatternet.filters import build_filter_bank
from app.schemas.dataset import SyntheticConfig
from app.schemas.network import NetConfig, PriorConfig, TrainConfig
from app.schemas.scatter import ScatterConfig


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def bank():
    return build_filter_bank()


@pytest.fixture
def tiny_net_config():
    return NetConfig(conv_widths=(2, 2, 3, 3), fc1_width=6)


@pytest.fixture
def single_resolution():
    return ScatterConfig(resolution_factors=(1.0,))


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory):
    """Six scènes de 2 à 4 personnes, écrites sur disque avec leurs boîtes"""
    root = tmp_path_factory.mktemp("synthetic")
    config = SyntheticConfig(persons_per_image=(2, 4), seed=3)
    records = generate_dataset(config, 6, root)
    save_annotations(records, root / "annotations.jsonl")
    save_boxes(boxes_from_annotations(records), root / "boxes.jsonl")
    return root


def _make_settings(synthetic_dir, workdir, **overrides):
    defaults = dict(
        dataset_path=synthetic_dir / "annotations.jsonl",
        boxes_path=synthetic_dir / "boxes.jsonl",
        models_dir=workdir / "models",
        outputs_dir=workdir / "outputs",
        scatter=ScatterConfig(resolution_factors=(1.0,)),
        net=NetConfig(conv_widths=(2, 2, 3, 3), fc1_width=8),
        train=TrainConfig(epochs=2, drop_epoch=1, base_lr=1e-2, lr_after_drop=1e-3),
        priors=PriorConfig(max_items=6, patches_per_layer=300),
    )
    defaults.update(overrides)
    return get_settings(**defaults)


@pytest.fixture
def settings_factory(synthetic_dir, tmp_path):
    """Settings pointant sur le jeu réduit, surchargeables par test"""
    def factory(**overrides):
        return _make_settings(synthetic_dir, tmp_path, **overrides)
    return factory


@pytest.fixture
def pipeline_settings(settings_factory):
    return settings_factory()
