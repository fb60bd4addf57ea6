import argparse
import logging
import sys
from typing import Optional, Sequence

from config.settings import settings

# Configurar logging
logging.basicConfig(level=getattr(logging, settings.LOG_LEVEL), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
logger = logging.getLogger(__name__)

# Importar todos los routers (un subcomando por módulo)
from routers import train, evaluate, grid_search, robustness, decision_map, channel_probe

ROUTERS = (train, evaluate, grid_search, robustness, decision_map, channel_probe)

# =============================================================================
# CONSTRUCCIÓN DEL PARSER
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    """Parser con un subcomando por router"""
    parser = argparse.ArgumentParser(
        prog="handover",
        description=f"{settings.APP_NAME} {settings.APP_VERSION}: {settings.APP_DESCRIPTION}",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.APP_VERSION}")
    subparsers = parser.add_subparsers(dest="command", metavar="{train,evaluate,grid-search,robustness,decision-map,channel-probe}")
    for router in ROUTERS:
        router.register(subparsers)
    return parser

# =============================================================================
# PUNTO DE ENTRADA
# =============================================================================

def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Ejecuta un subcomando.
    
    Returns:
        int: 0 si tuvo éxito; distinto de cero con mensaje ante cualquier error
    """
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "handler", None) is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.handler(args)
    except Exception as e:
        logger.exception(f"❌ Error inesperado en '{args.command}': {e}")
        return 1


if __name__ == "__main__":
    sys.exit(cli_dispatch())
