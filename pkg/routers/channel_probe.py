import argparse
import logging
import numpy as np

from routers.common import EXIT_OK, add_common_flags, handle_errors, resolve
from services.channel_service import probe_grid
from services.mobility_service import build_serpentine, count_hairpins
from utils.io_utils import PROBE_COLUMNS, TRACK_COLUMNS, write_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("channel-probe", help="Tabula las probabilidades de enlace y vuelca el circuito")
    add_common_flags(parser)
    parser.add_argument("--max-distance", type=float, default=120.0, help="Distancia máxima del barrido (m)")
    parser.add_argument("--distance-step", type=float, default=1.0, help="Paso de distancia (m)")
    parser.add_argument("--angle-step", type=float, default=5.0, help="Paso angular (grados)")
    parser.set_defaults(handler=handle)


@handle_errors
def handle(args: argparse.Namespace) -> int:
    """Escribe channel_probe.csv y track.csv del escenario configurado"""
    config, out_dir, _ = resolve(args)
    distances = np.arange(0.0, args.max_distance + 1e-9, args.distance_step)
    angles = np.radians(np.arange(-180.0, 180.0, args.angle_step))
    write_csv(probe_grid(config.channels, distances, angles), out_dir / "channel_probe.csv", PROBE_COLUMNS)

    track = build_serpentine(config.scenario, config.track)
    write_csv(({"x": x, "y": y, "arc_length": s} for x, y, s in track.to_rows()), out_dir / "track.csv", TRACK_COLUMNS)
    logger.info(
        f"✅ Circuito del escenario {config.scenario}: {track.length:.1f} m, "
        f"{count_hairpins(track)} horquillas"
    )
    return EXIT_OK
