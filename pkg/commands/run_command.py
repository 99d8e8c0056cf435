"""
commands/run_command.py - Comando `run`: ejecuta un escenario y escribe resultados.

Precedencia de la configuración: flags de línea de comandos > fichero
--config (key=value, leído con python-dotenv) > variables de entorno >
valores por defecto.

Salidas en output_dir:
- convergence_<mortero>_<variante>.csv y *_full.csv (solo casos con solución exacta)
- <escenario>_level<k>_{stokes,darcy,mortar}.vtk
- summary.txt
"""

import gc
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from dotenv import dotenv_values

from analytics.convergence import ConvergenceReport
from analytics.norms import compute_errors
from data.scenarios import MAX_REFINEMENTS, ScenarioConfig, case1_scenario, case2_scenario, custom_scenario
from model.mortar_interface import check_infsup
from output.summary import LevelSummary, RunSummary
from output.tables import format_table, write_convergence_csv
from output.vtk_writer import write_fields
from solver.coupled_solver import conservation_residuals, solve
from solver.linear_algebra import CG_MAX_ITER, CG_TOL
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_DIR = os.getenv("OUTPUT_DIR", "results")

CASES = ("case1", "case2", "custom")
MORTARS = ("p0", "p1")
SOLVERS = ("monolithic", "dd")
NORMS = ("standard", "midpoint", "both")


@dataclass
class RunConfig:
    case: str = "case1"
    refinements: int = 2
    mortar: str = "p0"
    mortar_elements: Optional[int] = None
    solver: str = "monolithic"
    norms: str = "both"
    cg_tol: float = CG_TOL
    cg_max_iter: int = CG_MAX_ITER
    output_dir: str = OUTPUT_DIR
    stokes_cells: int = 16
    darcy_cells: int = 15
    permeability_file: Optional[str] = None
    write_vtk: bool = True
    infsup: bool = False

    def validate(self, lines: Optional[Dict[str, int]] = None) -> "RunConfig":
        """
        Raises:
            ConfigError: con el campo y, si viene de un fichero, la línea
        """
        lines = lines or {}

        def fail(name: str, message: str):
            raise ConfigError(message, field=name, line=lines.get(name))

        if self.case not in CASES:
            fail("case", f"caso desconocido '{self.case}' (opciones: {', '.join(CASES)})")
        if self.mortar not in MORTARS:
            fail("mortar", f"mortero desconocido '{self.mortar}'")
        if self.solver not in SOLVERS:
            fail("solver", f"solver desconocido '{self.solver}'")
        if self.norms not in NORMS:
            fail("norms", f"variante de norma desconocida '{self.norms}'")
        if not 0 <= self.refinements <= MAX_REFINEMENTS:
            fail("refinements", f"refinements debe estar en [0, {MAX_REFINEMENTS}]")
        if not 0.0 < self.cg_tol < 1.0:
            fail("cg_tol", f"cg_tol debe estar en (0, 1) (recibido {self.cg_tol})")
        if self.cg_max_iter < 1:
            fail("cg_max_iter", "cg_max_iter debe ser positivo")
        if self.mortar_elements is not None and self.mortar_elements < 1:
            fail("mortar_elements", "mortar_elements debe ser positivo")
        if self.stokes_cells < 1 or self.darcy_cells < 1:
            fail("stokes_cells" if self.stokes_cells < 1 else "darcy_cells", "número de celdas inválido")
        if self.permeability_file and not Path(self.permeability_file).is_file():
            fail("permeability_file", f"no existe {self.permeability_file}")
        return self

    @property
    def variants(self) -> List[str]:
        return ["standard", "midpoint"] if self.norms == "both" else [self.norms]


_FIELD_TYPES = {
    "refinements": int,
    "mortar_elements": int,
    "cg_tol": float,
    "cg_max_iter": int,
    "stokes_cells": int,
    "darcy_cells": int,
    "write_vtk": bool,
    "infsup": bool,
}
_OPTIONAL = {"mortar_elements", "permeability_file"}
_BOOL_TRUE = {"1", "true", "yes", "si", "sí", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, raw, line: Optional[int]):
    """Convierte el texto de un campo al tipo declarado en RunConfig."""
    if name not in {f.name for f in fields(RunConfig)}:
        raise ConfigError(f"clave desconocida '{name}'", field=name, line=line)
    if raw is None or (isinstance(raw, str) and raw.strip() == ""):
        if name in _OPTIONAL:
            return None
        raise ConfigError("valor vacío", field=name, line=line)
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    kind = _FIELD_TYPES.get(name, str)
    try:
        if kind is bool:
            if text.lower() in _BOOL_TRUE:
                return True
            if text.lower() in _BOOL_FALSE:
                return False
            raise ValueError(text)
        return kind(text)
    except ValueError:
        raise ConfigError(f"valor inválido '{text}'", field=name, line=line) from None


def _key_lines(path: Path) -> Dict[str, int]:
    """Línea de cada clave en el fichero, para los diagnósticos."""
    lines = {}
    for number, text in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = text.strip()
        if stripped and not stripped.startswith("#") and "=" in stripped:
            key = stripped.split("=", 1)[0].replace("export ", "").strip()
            lines.setdefault(key, number)
    return lines


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, object]] = None) -> RunConfig:
    """
    Construye y valida un RunConfig.

    Args:
        path: fichero key=value opcional
        overrides: valores de línea de comandos (los None se ignoran)

    Raises:
        ConfigError: clave desconocida, valor mal formado o fuera de rango
    """
    values = asdict(RunConfig())
    lines: Dict[str, int] = {}
    if path:
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigError(f"no existe el fichero de configuración {path}", field="config")
        lines = _key_lines(file_path)
        for key, raw in dotenv_values(file_path).items():
            values[key] = _coerce(key, raw, lines.get(key))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _coerce(key, value, None)
            lines.pop(key, None)
    return RunConfig(**values).validate(lines)


def build_scenario(config: RunConfig) -> ScenarioConfig:
    if config.case == "case1":
        scenario = case1_scenario(config.mortar, config.mortar_elements, config.refinements, config.solver)
    elif config.case == "case2":
        scenario = case2_scenario(config.refinements, config.solver, config.mortar,
                                  config.mortar_elements, permeability_file=config.permeability_file)
    else:
        scenario = custom_scenario(config.stokes_cells, config.darcy_cells, config.mortar,
                                   config.mortar_elements, config.refinements, config.solver)
    return scenario.validate()


def _levels(config: RunConfig) -> Iterable[int]:
    return range(config.refinements + 1)


def run(config: RunConfig) -> int:
    """
    Ejecuta todos los niveles de refinamiento del escenario.

    Returns:
        0 si todo terminó, 2 si algún CG de interfaz no convergió

    Raises:
        StokesDarcyError: errores de geometría, condiciones, mortero o solver
    """
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    scenario = build_scenario(config)
    logger.info(f"Escenario {scenario.name}: {config.refinements + 1} niveles, solver {config.solver}")

    reports = {v: ConvergenceReport(v, config.mortar) for v in config.variants} if scenario.exact else {}
    summary = RunSummary(scenario.name, asdict(config))
    status = 0

    for level in _levels(config):
        problem = scenario.problem(level)
        logger.info(f"Nivel {level}: {problem.describe()}")
        solution = solve(problem, config.solver, config.cg_tol, config.cg_max_iter)
        if not solution.converged:
            status = 2
        residuals = conservation_residuals(problem, solution)
        logger.info("Residuos de conservación: " + ", ".join(f"{k}={v:.2e}" for k, v in residuals.items()))

        for variant, report in reports.items():
            errors = compute_errors(problem, solution, scenario.exact, variant)
            report.add(level, errors, problem.stokes.dofs.grid.h, problem.darcy.space.grid.h,
                       problem.coupling.n_mortar)

        infsup = check_infsup(problem.coupling, problem.stokes, problem.darcy) if config.infsup else None
        if config.write_vtk:
            write_fields(problem, solution, output_dir, f"{scenario.name}_level{level}")

        summary.levels.append(LevelSummary(
            level=level,
            method=solution.method,
            unknowns=problem.describe(),
            iterations=solution.iterations,
            final_residual=solution.residual_history[-1] if solution.residual_history else None,
            converged=solution.converged,
            elapsed=solution.elapsed,
            conservation=residuals,
            infsup=infsup,
        ))
        del problem, solution
        gc.collect()

    for report in reports.values():
        write_convergence_csv(report, output_dir)
        table = format_table(report)
        summary.tables.append(f"Norma {report.variant}, mortero {report.mortar}:\n{table}")
        logger.info(f"Convergencia ({report.variant}):\n{table}")

    summary.write(output_dir)
    return status
