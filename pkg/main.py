"""
main.py - Solver acoplado Stokes-Darcy con mortero MAC-MFE

Uso:
    python main.py run --case case1 --mortar p0 --refinements 2 --solver monolithic
    python main.py run --case case2 --solver dd
    python main.py run --config escenario.env --refinements 3

Casos:
- case1: convergencia con solución analítica (tablas CSV en ambas normas)
- case2: canal con obstáculo poroso anisótropo (campos VTK y resumen)
- custom: geometría del caso 1 con mallas y mortero a elección
"""

import argparse
import logging
import os
import pathlib
import sys

from dotenv import load_dotenv

# Asegurar que el proyecto está en sys.path
PROJECT_ROOT = pathlib.Path(__file__).parent.resolve()
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

load_dotenv()

from commands.run_command import CASES, MORTARS, NORMS, SOLVERS, load_config, run  # noqa: E402
from utils.errors import StokesDarcyError  # noqa: E402

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("LOG_FILE", "stokes_darcy.log")

logger = logging.getLogger(__name__)


def setup_logging(output_dir: str):
    """Log a fichero dentro del directorio de salida y a stdout."""
    pathlib.Path(output_dir).mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(pathlib.Path(output_dir) / LOG_FILE, encoding="utf-8"),
            logging.StreamHandler(sys.stdout)
        ],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Flujo acoplado Stokes-Darcy (MAC-MFE con mortero)")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="ejecuta un escenario")
    run_p.add_argument("--case", choices=CASES)
    run_p.add_argument("--refinements", type=int)
    run_p.add_argument("--mortar", choices=MORTARS)
    run_p.add_argument("--mortar-elements", dest="mortar_elements", type=int)
    run_p.add_argument("--solver", choices=SOLVERS)
    run_p.add_argument("--norms", choices=NORMS)
    run_p.add_argument("--cg-tol", dest="cg_tol", type=float)
    run_p.add_argument("--output-dir", dest="output_dir")
    run_p.add_argument("--stokes-cells", dest="stokes_cells", type=int)
    run_p.add_argument("--darcy-cells", dest="darcy_cells", type=int)
    run_p.add_argument("--permeability-file", dest="permeability_file")
    run_p.add_argument("--infsup", action="store_true", default=None,
                       help="calcula la constante inf-sup del mortero en cada nivel")
    run_p.add_argument("--no-vtk", dest="write_vtk", action="store_false", default=None)
    run_p.add_argument("--config", help="fichero key=value con la configuración")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        config = load_config(args.config, overrides)
    except StokesDarcyError as e:
        print(f"Error de configuración: {e}", file=sys.stderr)
        return 1

    setup_logging(config.output_dir)
    logger.info(f"Iniciando {config.case} (mortero {config.mortar}, solver {config.solver})")
    try:
        return run(config)
    except StokesDarcyError as e:
        logger.error(f"Ejecución abortada: {e}")
        return 1


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nEjecución interrumpida por el usuario")
        sys.exit(1)
