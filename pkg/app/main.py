"""FastAPI application serving qmask scenario reports."""

import logging
import time
from collections import defaultdict, deque
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.middleware.base import BaseHTTPMiddleware

from . import __version__
from .cache import clear_report_cache, get_cache_status, get_cached, report_key, set_cached
from .config import settings
from .errors import QMaskError
from .experiments import fixtures_check, run_scenario, scenario_from_settings, stats_report
from .models import ScenarioName


class RateLimitMiddleware(BaseHTTPMiddleware):
    """Sliding one-minute window per client over /api/ routes; sampled scenarios are CPU-bound."""

    window_seconds = 60

    def __init__(self, app, requests_per_minute: int = 100):
        super().__init__(app)
        self.requests_per_minute = requests_per_minute
        self._hits: dict[str, deque[float]] = defaultdict(deque)
        self._last_sweep = 0.0

    @staticmethod
    def client_id(request: Request) -> str:
        forwarded = request.headers.get("x-forwarded-for", "")
        first = forwarded.split(",")[0].strip()
        if first:
            return first
        return request.client.host if request.client else "unknown"

    def forget_idle(self, now: float) -> None:
        """Drop clients with no hit inside the window, at most once per window."""
        if now - self._last_sweep < self.window_seconds:
            return
        self._last_sweep = now
        idle = [c for c, hits in self._hits.items() if not hits or hits[-1] <= now - self.window_seconds]
        for client in idle:
            del self._hits[client]
        if idle:
            logger.debug(f"[API] forgot {len(idle)} idle client(s)")

    def admit(self, client: str, now: float) -> bool:
        self.forget_idle(now)
        hits = self._hits[client]
        while hits and hits[0] <= now - self.window_seconds:
            hits.popleft()
        if len(hits) >= self.requests_per_minute:
            return False
        hits.append(now)
        return True

    async def dispatch(self, request: Request, call_next):
        if not request.url.path.startswith("/api/"):
            return await call_next(request)

        client = self.client_id(request)
        if not self.admit(client, time.monotonic()):
            logger.warning(f"[API] {client} over {self.requests_per_minute} req/min")
            return JSONResponse(
                status_code=429,
                content={"detail": "Limite de requisições excedido.", "retry_after": self.window_seconds},
                headers={"Retry-After": str(self.window_seconds)},
            )
        return await call_next(request)


# Configure logging
logging.basicConfig(
    level=logging.DEBUG if settings.debug else logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan manager for startup/shutdown events."""
    logger.info("🚀 Iniciando qmask API...")
    logger.info(f"   Shots: {settings.shots}  Trials: {settings.trials}  Seed: {settings.seed}")
    logger.info(f"   Cache TTL: {settings.cache_ttl_report}s  Redis: {settings.redis_url or 'desativado'}")
    yield
    logger.info("👋 Encerrando qmask API...")


app = FastAPI(
    title="qmask API",
    description=(
        "Verificação de mascaramento de informação quântica: cenários exatos e "
        "amostrados, comparação com valores publicados e estatísticas de ensaios.\n\n"
        "**Endpoints principais:**\n"
        "- `/api/v1/scenarios/{name}` - Relatório de um cenário\n"
        "- `/api/v1/fixtures/check` - Recalcula as métricas publicadas\n"
        "- `/api/v1/stats/{name}` - Estatísticas de ensaios repetidos\n"
        "- `/health` - Status do serviço"
    ),
    version=__version__,
    lifespan=lifespan,
)

app.add_middleware(RateLimitMiddleware, requests_per_minute=settings.rate_limit_requests)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000", "http://127.0.0.1:3000"],
    allow_credentials=True,
    allow_methods=["GET", "DELETE", "OPTIONS"],
    allow_headers=["Content-Type", "Accept", "Origin"],
    expose_headers=["X-Cache"],
)


def _scenario_name(name: str) -> ScenarioName:
    try:
        return ScenarioName(name)
    except ValueError:
        raise HTTPException(
            status_code=404,
            detail=f"Cenário desconhecido: {name}. Opções: {', '.join(s.value for s in ScenarioName)}",
        ) from None


@app.get(
    "/api/v1/scenarios/{name}",
    summary="Relatório de cenário",
    description=(
        "Executa um cenário (`classical`, `orthogonal`, `arbitrary`, `ghz`) e "
        "retorna o veredito de mascaramento com todas as verificações.\n\n"
        "O resultado é cacheado por conjunto de parâmetros (header `X-Cache`)."
    ),
    tags=["Cenários"],
)
async def get_scenario(
    name: str,
    exact: bool = Query(False, description="Apenas simulação exata (sem tomografia)"),
    shots: int | None = Query(None, description="Shots por configuração de medida"),
    seed: int | None = Query(None, description="Semente do gerador"),
    theta_grid: int | None = Query(None, description="Número de valores de θ (GHZ)"),
):
    """Run a scenario, serving repeated parameter sets from the cache."""
    scenario_name = _scenario_name(name)
    logger.info(f"🚀 [API] GET /api/v1/scenarios/{name} - exact={exact} shots={shots} seed={seed}")

    try:
        scenario = scenario_from_settings(
            scenario_name, exact=exact, shots=shots, seed=seed, theta_grid=theta_grid
        )
    except QMaskError as e:
        raise HTTPException(status_code=422, detail=str(e)) from e

    cache_key = report_key("scenario", scenario_name.value, scenario.parameters())
    cached = await get_cached(cache_key)
    if cached:
        logger.info("✅ [API] Cache HIT")
        return JSONResponse(content=cached, headers={"X-Cache": "HIT"})

    try:
        report = await run_in_threadpool(run_scenario, scenario)
    except QMaskError as e:
        logger.error(f"❌ [API] Scenario {name} failed: {e}")
        raise HTTPException(status_code=422, detail=str(e)) from e

    result = report.model_dump(mode="json")
    await set_cached(cache_key, result)
    logger.info(f"💾 [API] {name}: masked={report.masked} matches={report.verdict_matches}")
    return JSONResponse(content=result, headers={"X-Cache": "MISS"})


@app.get(
    "/api/v1/fixtures/check",
    summary="Métricas publicadas",
    description=(
        "Recalcula distâncias e fidelidades a partir das matrizes impressas e "
        "marca cada valor como PASS, FLAGGED ou SKIPPED."
    ),
    tags=["Fixtures"],
)
async def get_fixtures_check():
    """Fixture check report."""
    try:
        report = await run_in_threadpool(fixtures_check)
    except QMaskError as e:
        raise HTTPException(status_code=422, detail=str(e)) from e
    return report.model_dump(mode="json")


@app.get(
    "/api/v1/stats/{name}",
    summary="Estatísticas de ensaios",
    description=(
        "Média, desvio padrão, máximo e mínimo da probabilidade de cada resultado "
        "em ensaios repetidos, ao lado dos valores de hardware publicados."
    ),
    tags=["Cenários"],
)
async def get_stats(
    name: str,
    shots: int | None = Query(None, description="Shots por ensaio"),
    trials: int | None = Query(None, description="Número de ensaios (mínimo 2)"),
    seed: int | None = Query(None, description="Semente do gerador"),
):
    """Trial statistics for a scenario's circuit."""
    scenario_name = _scenario_name(name)
    try:
        scenario = scenario_from_settings(scenario_name, shots=shots, trials=trials, seed=seed)
        report = await run_in_threadpool(stats_report, scenario)
    except QMaskError as e:
        raise HTTPException(status_code=422, detail=str(e)) from e
    return report.model_dump(mode="json")


@app.delete(
    "/api/v1/cache",
    summary="Limpar cache",
    description="Remove todos os relatórios cacheados (Redis e memória).",
    tags=["Sistema"],
)
async def delete_cache():
    """Clear cached reports."""
    removed = await clear_report_cache()
    logger.info(f"🧹 [API] Cache cleared: {removed} keys")
    return {"removed": removed}


@app.get(
    "/health",
    summary="Health check",
    description=(
        "Verifica o status do serviço.\n\n"
        "Retorna:\n"
        "- **status**: Estado geral do serviço\n"
        "- **version**: Versão da API\n"
        "- **cache**: Status da conexão com Redis"
    ),
    tags=["Sistema"],
)
async def health_check():
    """Health check endpoint for monitoring."""
    cache_status = await get_cache_status()
    return {
        "status": "healthy",
        "version": __version__,
        "cache": cache_status["redis"],
    }
