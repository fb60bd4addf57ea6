import argparse
import logging
from pathlib import Path

from models.env_models import Trace
from routers.common import EXIT_OK, add_common_flags, add_policy_flags, build_policy, handle_errors, resolve
from services.decision_map_service import decision_map, map_frame, overlap_frame
from services.training_service import evaluate_policy
from utils.io_utils import DECISION_MAP_COLUMNS, OVERLAP_COLUMNS, read_csv, write_csv, write_json

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("decision-map", help="Acción voraz por celda (distancia, rumbo) e informe de solape")
    add_common_flags(parser)
    add_policy_flags(parser)
    parser.add_argument("--trace", type=Path, default=None, help="trace.csv para el informe de solape (por defecto un episodio de evaluación)")
    parser.set_defaults(handler=handle)


@handle_errors
def handle(args: argparse.Namespace) -> int:
    config, out_dir, _ = resolve(args)
    policy = build_policy(args, config)
    if args.trace is not None:
        trace = Trace.from_frame(read_csv(args.trace))
    else:
        traces, _ = evaluate_policy(policy, config, episodes=1)
        trace = traces[0]
    dmap = decision_map(policy, config.decision_map, config.environment.max_range, trace)
    write_csv(map_frame(dmap), out_dir / "decision_map.csv", DECISION_MAP_COLUMNS)
    write_csv(overlap_frame(dmap), out_dir / "decision_overlap.csv", OVERLAP_COLUMNS)
    write_json(dmap, out_dir / "decision_map.json")
    return EXIT_OK
