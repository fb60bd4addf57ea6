"""
Servicio de grid search y entrenamiento multi-semilla
Los trabajos (celda × semilla) se ejecutan de forma independiente en un
pool acotado de procesos; los resultados se fusionan en orden determinista.
"""

from concurrent.futures import ProcessPoolExecutor
import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from config.run_config import RunConfig
from config.settings import settings
from models.agent_models import AGENT_CONFIGS, AgentKind
from models.harness_models import GridCellResult, LearningCurve, RunArtifacts
from services.metrics_service import aggregate_curves, curve_frame
from services.training_service import train_run
from utils.io_utils import write_csv, write_json

logger = logging.getLogger(__name__)


def _run_job(job: dict) -> dict:
    """Trabajo aislado: reconstruye la configuración y entrena una semilla"""
    run_cfg = RunConfig.model_validate_json(job["config"])
    artifacts = train_run(
        job["kind"], run_cfg, job["seed"], job["episodes"],
        out_dir=job["out_dir"], evaluate=job["evaluate"],
    )
    return artifacts.model_dump(mode="json")


def run_jobs(jobs: Sequence[dict], workers: Optional[int] = None) -> list[RunArtifacts]:
    """
    Ejecuta los trabajos con `workers` procesos (1 → en el proceso actual).
    
    Returns:
        list[RunArtifacts]: En el mismo orden que jobs
    """
    workers = settings.HANDOVER_WORKERS if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        results = [_run_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_job, jobs))
    return [RunArtifacts.model_validate(r) for r in results]


def _job(kind: AgentKind, run_cfg: RunConfig, seed: int, episodes: int, out_dir: Optional[Path], evaluate: bool) -> dict:
    return {
        "kind": kind.value,
        "config": run_cfg.model_dump_json(),
        "seed": int(seed),
        "episodes": int(episodes),
        "out_dir": str(out_dir) if out_dir is not None else None,
        "evaluate": evaluate,
    }

# =============================================================================
# MULTI-SEMILLA
# =============================================================================

def train_seeds(
    kind: AgentKind | str,
    run_cfg: RunConfig,
    seeds: Optional[Sequence[int]] = None,
    episodes: Optional[int] = None,
    out_dir: Optional[str | Path] = None,
    workers: Optional[int] = None,
) -> tuple[list[RunArtifacts], Optional[LearningCurve]]:
    """
    Entrena una ejecución por semilla y agrega las curvas de las exitosas.
    
    Returns:
        tuple: (artefactos por semilla, curva agregada o None si hay < 2 éxitos)
    """
    kind = AgentKind(kind)
    seeds = list(run_cfg.seeds if seeds is None else seeds)
    episodes = run_cfg.episodes if episodes is None else episodes
    out_dir = Path(out_dir) if out_dir is not None else None
    jobs = [
        _job(kind, run_cfg, seed, episodes, out_dir / f"seed_{seed}" if out_dir else None, True)
        for seed in seeds
    ]
    runs = run_jobs(jobs, workers)
    ok = [r for r in runs if not r.failed]
    curve = aggregate_curves([r.returns for r in ok], [r.seed for r in ok]) if len(ok) >= 2 else None
    if out_dir is not None and curve is not None:
        write_csv(curve_frame(curve), out_dir / "curve.csv")
    return runs, curve

# =============================================================================
# GRID SEARCH
# =============================================================================

def rank_cells(cells: Sequence[GridCellResult]) -> list[GridCellResult]:
    """
    Orden descendente por puntuación; las celdas sin ejecuciones válidas van
    al final. Empates resueltos por cell_id.
    """
    ordered = sorted(
        cells,
        key=lambda c: (c.score is None, -(c.score if c.score is not None else 0.0), c.cell_id),
    )
    return [c.model_copy(update={"rank": i + 1}) for i, c in enumerate(ordered)]


def grid_search(
    kind: AgentKind | str,
    run_cfg: RunConfig,
    seeds: Optional[Sequence[int]] = None,
    episodes: Optional[int] = None,
    out_dir: Optional[str | Path] = None,
    workers: Optional[int] = None,
) -> list[GridCellResult]:
    """
    Entrena cada celda de la rejilla del agente con cada semilla y ordena las
    celdas por la media del retorno en la ventana final.
    
    Las celdas fallidas se registran y el ranking continúa con las exitosas.
    El checkpoint de cada celda es el final de su mejor semilla.
    """
    kind = AgentKind(kind)
    seeds = list(run_cfg.seeds if seeds is None else seeds)
    episodes = run_cfg.episodes if episodes is None else episodes
    out_dir = Path(out_dir) if out_dir is not None else None
    window = run_cfg.evaluation.final_window
    cells = AGENT_CONFIGS[kind].grid_cells()
    logger.info(f"Grid search {kind.value}: {len(cells)} celdas × {len(seeds)} semillas")

    jobs = []
    for cell_id, params in enumerate(cells):
        cell_cfg = run_cfg.with_agent_params(kind, params)
        for seed in seeds:
            job_dir = out_dir / f"cell_{cell_id:03d}" / f"seed_{seed}" if out_dir else None
            jobs.append(_job(kind, cell_cfg, seed, episodes, job_dir, False))
    runs = run_jobs(jobs, workers)

    results = []
    for cell_id, params in enumerate(cells):
        cell_runs = runs[cell_id * len(seeds):(cell_id + 1) * len(seeds)]
        ok = [r for r in cell_runs if not r.failed]
        scores = [r.final_window_score(window) for r in ok]
        best = ok[int(np.argmax(scores))] if ok else None
        result = GridCellResult(
            cell_id=cell_id,
            params=params,
            score=float(np.mean(scores)) if scores else None,
            seeds_ok=len(ok),
            seeds_failed=len(cell_runs) - len(ok),
            checkpoint=best.final_checkpoint if best else None,
        )
        marker = "✅" if ok else "❌"
        logger.info(f"{marker} celda {cell_id} {params}: puntuación {result.score}")
        results.append(result)

    ranking = rank_cells(results)
    if out_dir is not None:
        write_csv(ranking_rows(ranking), out_dir / "grid_ranking.csv")
        write_json(best_models(ranking), out_dir / "best_models.json")
    return ranking


def ranking_rows(ranking: Sequence[GridCellResult]) -> list[dict]:
    """Filas de grid_ranking.csv: rank, cell_id, un parámetro por columna, score, semillas, checkpoint"""
    return [
        {
            "rank": c.rank, "cell_id": c.cell_id, **c.params, "score": c.score,
            "seeds_ok": c.seeds_ok, "seeds_failed": c.seeds_failed, "checkpoint": c.checkpoint,
        }
        for c in ranking
    ]


def best_models(ranking: Sequence[GridCellResult]) -> dict:
    """Checkpoints del 1.er y 2.º mejor modelo (None si no existen)"""
    valid = [c for c in ranking if c.score is not None]
    return {
        "1st": valid[0].checkpoint if len(valid) > 0 else None,
        "2nd": valid[1].checkpoint if len(valid) > 1 else None,
    }
