"""Erreurs du pipeline DSS

Chaque erreur porte le code de sortie utilisé par la CLI.
"""
from typing import Optional


class DssError(Exception):
    """Erreur de base du pipeline"""
    exit_code: int = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DimensionError(DssError):
    """Dimensions d'image ou de carte incompatibles"""
    exit_code = 2


class ParameterError(DssError):
    """Paramètre numérique hors domaine"""
    exit_code = 2


class ConfigurationError(DssError):
    """Configuration incohérente (formes, largeurs, canaux)"""
    exit_code = 2


class DecodingError(DssError):
    """Vecteur de sortie impossible à décoder en points clés"""
    exit_code = 2


class SchemaError(DssError):
    """Ligne d'annotation invalide"""
    exit_code = 2

    def __init__(self, message: str, line: int, field: Optional[str] = None):
        location = f"ligne {line}" + (f", champ '{field}'" if field else "")
        super().__init__(f"{location}: {message}")
        self.line = line
        self.field = field


class DatasetNotFoundError(DssError):
    """Jeu de données ou modèle introuvable"""
    exit_code = 2


class TrainingError(DssError):
    """Entraînement impossible (données à une seule classe, etc.)"""
    exit_code = 2


class StratificationError(DssError):
    """Classe trop petite pour une validation croisée stratifiée"""
    exit_code = 2

    def __init__(self, message: str, label: str):
        super().__init__(message)
        self.label = label


class DivergenceError(DssError):
    """Perte non finie pendant l'optimisation ; porte la courbe partielle"""
    exit_code = 3

    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = history
