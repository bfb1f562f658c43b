from pathlib import Path
from typing import Any, Literal, Optional, Union

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.schemas.activity import SvmHyperparams
from app.schemas.dataset import SyntheticConfig
from app.schemas.network import NetConfig, PriorConfig, TrainConfig
from app.schemas.scatter import ScatterConfig


class Settings(BaseSettings):
    # Environment
    environment: Literal["development", "production", "staging"] = "development"
    debug: bool = False

    # Graine globale du pipeline
    seed: int = 0

    # Chemins
    dataset_path: Path = Path("data/annotations.jsonl")
    boxes_path: Path = Path("data/boxes.jsonl")
    models_dir: Path = Path("models")
    outputs_dir: Path = Path("outputs")

    # Taille des régions détectées après redimensionnement (largeur, hauteur)
    region_width: int = 120
    region_height: int = 80

    # Sous-configurations (clés imbriquées avec '__', ex: TRAIN__EPOCHS=30)
    scatter: ScatterConfig = ScatterConfig()
    net: NetConfig = NetConfig()
    train: TrainConfig = TrainConfig()
    svm: SvmHyperparams = SvmHyperparams()
    priors: PriorConfig = PriorConfig()
    synthetic: SyntheticConfig = SyntheticConfig()

    # Service d'inférence local
    host: str = "127.0.0.1"
    port: int = 8000

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding='utf-8',
        extra='ignore',
        case_sensitive=False,
        env_nested_delimiter='__'
    )

    @field_validator('region_width', 'region_height')
    @classmethod
    def validate_region_size(cls, v: int) -> int:
        """La région doit rester exploitable par la DTCWT"""
        if v < 16:
            raise ValueError("la région doit faire au moins 16 pixels de côté")
        return v

    @property
    def is_production(self) -> bool:
        return self.environment == "production"

    @property
    def priors_dir(self) -> Path:
        return self.models_dir / "priors"

    @property
    def pose_checkpoint(self) -> Path:
        return self.models_dir / "pose_net"

    @property
    def svm_model_path(self) -> Path:
        return self.models_dir / "svm"

    @property
    def scatter_calibration_path(self) -> Path:
        return self.models_dir / "scatter_calibration.json"


def get_settings(config_path: Optional[Union[str, Path]] = None, **overrides: Any) -> Settings:
    """Construire les settings : overrides > environnement > fichier de config > .env > défauts"""
    env_files = [".env"]
    if config_path is not None:
        env_files.append(str(config_path))
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return Settings(_env_file=tuple(env_files), **overrides)
