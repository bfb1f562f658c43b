"""Service d'inférence FastAPI (local uniquement)"""
import logging
from contextlib import asynccontextmanager
from datetime import datetime
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from app.api.v1.router import api_router
from app.core.config import Settings, get_settings
from app.core.errors import DatasetNotFoundError, DecodingError, DimensionError, DssError, ParameterError
from app.core.logging import setup_logging
from app.pipeline.inference import DssPipeline

logger = logging.getLogger(__name__)

# Erreurs qui décrivent une entrée invalide plutôt qu'un état du service
UNPROCESSABLE_ERRORS = (DimensionError, ParameterError, DecodingError)


def create_app(settings: Optional[Settings] = None, pipeline: Optional[DssPipeline] = None) -> FastAPI:
    settings = settings or get_settings()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        """Gestionnaire du cycle de vie de l'application"""
        logger.info(f"🚀 Démarrage du service DSS en mode {settings.environment}")
        if app.state.pipeline is None:
            try:
                app.state.pipeline = DssPipeline.load(settings)
            except DatasetNotFoundError as e:
                logger.warning(f"⚠️ Modèles indisponibles: {e.message}")
                logger.warning("⚠️ Le service démarre quand même, /api/infer renverra 503")
        yield
        logger.info("🛑 Arrêt du service DSS")

    app = FastAPI(
        title="DSS Inference API",
        description="Estimation de pose et détection d'activités violentes sur images de drone",
        version="1.0.0",
        docs_url="/docs" if not settings.is_production else None,
        redoc_url="/redoc" if not settings.is_production else None,
        lifespan=lifespan
    )
    app.state.settings = settings
    app.state.pipeline = pipeline

    # Middleware pour logger les requêtes
    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        """Logger toutes les requêtes HTTP"""
        start_time = datetime.now()
        logger.info(f"➡️  {request.method} {request.url.path}")

        response = await call_next(request)

        process_time = (datetime.now() - start_time).total_seconds()
        logger.info(
            f"⬅️  {request.method} {request.url.path} "
            f"- Status: {response.status_code} - Time: {process_time:.3f}s"
        )
        return response

    @app.exception_handler(RequestValidationError)
    async def validation_exception_handler(request: Request, exc: RequestValidationError):
        """Gérer les erreurs de validation"""
        logger.warning(f"❌ Erreur de validation sur {request.url.path}: {exc.errors()}")
        return JSONResponse(
            status_code=422,
            content={
                "detail": exc.errors(),
                "message": "Erreur de validation des données"
            }
        )

    @app.exception_handler(DssError)
    async def dss_exception_handler(request: Request, exc: DssError):
        """Erreurs du pipeline : 422 pour une entrée invalide, 400 sinon"""
        status_code = 422 if isinstance(exc, UNPROCESSABLE_ERRORS) else 400
        logger.warning(f"❌ {type(exc).__name__} sur {request.url.path}: {exc.message}")
        return JSONResponse(
            status_code=status_code,
            content={"error": type(exc).__name__, "message": exc.message}
        )

    @app.exception_handler(Exception)
    async def generic_exception_handler(request: Request, exc: Exception):
        """Gérer les erreurs non capturées"""
        logger.error(f"❌ Erreur non gérée sur {request.url.path}: {str(exc)}", exc_info=True)
        return JSONResponse(
            status_code=500,
            content={
                "message": "Une erreur interne est survenue",
                "detail": str(exc) if settings.debug else "Erreur interne du serveur"
            }
        )

    @app.get("/health")
    async def health_check():
        """État du service et des modèles"""
        return {
            "status": "healthy",
            "environment": settings.environment,
            "models": "loaded" if app.state.pipeline is not None else "missing",
            "timestamp": datetime.now().isoformat()
        }

    app.include_router(api_router, prefix="/api")
    return app


if __name__ == "__main__":
    import uvicorn

    _settings = get_settings()
    setup_logging(_settings.debug)
    uvicorn.run(create_app(_settings), host=_settings.host, port=_settings.port)
