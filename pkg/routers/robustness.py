import argparse
import logging
from pathlib import Path

from models.agent_models import AgentKind
from routers.common import EXIT_OK, add_common_flags, handle_errors, resolve
from services.robustness_service import robustness_eval
from utils.errors import ConfigurationError
from utils.io_utils import read_json

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("robustness", help="Evalúa los modelos 1.º y 2.º de la grid search en el escenario de prueba")
    add_common_flags(parser)
    parser.add_argument(
        "--grid", action="append", default=[], metavar="AGENTE=DIR",
        help="Directorio de grid search de un agente (con best_models.json); repetible",
    )
    parser.add_argument("--test-scenario", type=int, choices=(1, 2), default=2, help="Escenario de prueba")
    parser.add_argument("--episodes", type=int, default=None, help="Episodios voraces por escenario")
    parser.set_defaults(handler=handle)


def parse_grid_dirs(entries: list[str]) -> dict[str, dict]:
    """{agente: {"1st": ruta, "2nd": ruta}}; sin best_models.json ambos quedan ausentes"""
    checkpoints = {}
    for entry in entries:
        if "=" not in entry:
            raise ConfigurationError(f"--grid espera AGENTE=DIR (recibido '{entry}')")
        name, directory = entry.split("=", 1)
        kind = AgentKind(name) if name in {k.value for k in AgentKind} else None
        if kind is None:
            raise ConfigurationError(f"Agente desconocido en --grid: '{name}'")
        summary = Path(directory) / "best_models.json"
        checkpoints[kind.value] = read_json(summary) if summary.is_file() else {"1st": None, "2nd": None}
    return checkpoints


@handle_errors
def handle(args: argparse.Namespace) -> int:
    config, out_dir, _ = resolve(args, eval_episodes=args.episodes)
    if not args.grid:
        raise ConfigurationError("Se requiere al menos un --grid AGENTE=DIR")
    robustness_eval(parse_grid_dirs(args.grid), config, config.scenario, args.test_scenario, out_dir=out_dir)
    return EXIT_OK
