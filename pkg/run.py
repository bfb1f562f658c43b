"""
Script de démarrage du service d'inférence DSS
Lance le serveur uvicorn avec la configuration appropriée
POUR USAGE LOCAL UNIQUEMENT - pas de déploiement cloud
"""
import sys

import uvicorn

from app.core.config import get_settings
from app.core.logging import setup_logging
from app.main import create_app

if __name__ == "__main__":
    settings = get_settings(sys.argv[1] if len(sys.argv) > 1 else None)
    setup_logging(settings.debug)
    if settings.host not in ("127.0.0.1", "localhost"):
        print(f"⚠️ ATTENTION: le service écoute sur {settings.host}, il est prévu pour un usage local")

    uvicorn.run(create_app(settings), host=settings.host, port=settings.port)
