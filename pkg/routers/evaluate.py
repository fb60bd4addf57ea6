import argparse
import logging

from routers.common import EXIT_OK, add_common_flags, add_policy_flags, build_policy, handle_errors, resolve
from services.training_service import evaluate_policy
from utils.io_utils import write_csv, write_json

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("evaluate", help="Evaluación voraz de un checkpoint o de una política de referencia")
    add_common_flags(parser)
    add_policy_flags(parser)
    parser.add_argument("--scenario", type=int, choices=(1, 2), default=None, help="Escenario (por defecto el de la configuración)")
    parser.add_argument("--episodes", type=int, default=None, help="Episodios de evaluación (por defecto evaluation.episodes)")
    parser.set_defaults(handler=handle)


@handle_errors
def handle(args: argparse.Namespace) -> int:
    config, out_dir, _ = resolve(args, scenario=args.scenario, eval_seed=args.seed, eval_episodes=args.episodes)
    policy = build_policy(args, config)
    traces, metrics = evaluate_policy(policy, config)
    write_json(metrics, out_dir / "metrics.json")
    write_csv(traces[0].to_frame(), out_dir / "trace.csv")
    logger.info(f"✅ Fiabilidad {metrics.reliability:.2f} %, uso VLC {metrics.vlc_utilization:.2f} %, {metrics.switch_count} cambios")
    return EXIT_OK
