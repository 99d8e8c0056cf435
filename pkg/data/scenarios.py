"""
data/scenarios.py - Configuraciones de los experimentos.

- case1_scenario: convergencia con solución analítica en (0,1)x(0,1),
  Stokes arriba y Darcy abajo, interfaz y = 0.5.
- case2_scenario: canal 0.75x0.25 con un obstáculo poroso anisótropo de
  0.25x0.2 apoyado en el fondo.
- custom_scenario: geometría del caso 1 con tamaños de malla y mortero libres.

Cada ScenarioConfig describe el nivel 0; problem(level) refina por bisección
las dos mallas y el mortero y ensambla el problema acoplado.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from data.manufactured import ExactSolution, case1_exact
from data.permeability import load_permeability_csv
from geometry.grid import TensorGrid, piecewise_coordinates, uniform_grid
from geometry.interface import MortarSpec, build_interface
from model.boundary import BoundaryKind, BoundaryRegion, classify_edges, sides
from model.darcy_rt0 import (DarcyBoundaryCondition, PermeabilityField, bjs_coefficient,
                             rotated_permeability)
from model.stokes_mac import AlphaBJS, MacBoundaryCondition
from solver.coupled_solver import CoupledProblem, assemble_problem
from utils.errors import BoundaryConditionError, ParameterError

logger = logging.getLogger(__name__)

MAX_REFINEMENTS = int(os.getenv("MAX_REFINEMENTS", "7"))

# Obstáculo poroso
OBSTACLE_ANISOTROPY = 100.0
OBSTACLE_K = 1e-5
OBSTACLE_ANGLE = np.pi / 4
INLET_TRACTION = 1.1
OUTLET_TRACTION = 1.0


@dataclass(eq=False)
class ScenarioConfig:
    name: str
    stokes_grid: TensorGrid
    darcy_grid: TensorGrid
    mu: float
    alpha_bjs: AlphaBJS
    permeability: PermeabilityField
    stokes_regions: Tuple[BoundaryRegion, ...]
    darcy_regions: Tuple[BoundaryRegion, ...]
    mortar: MortarSpec
    f_S: Optional[Callable] = None
    g_S: Optional[Callable] = None
    f_D: Optional[Callable] = None
    exact: Optional[ExactSolution] = None
    refinements: int = 0
    solver: str = "monolithic"
    metadata: dict = field(default_factory=dict)

    def grids(self, level: int) -> Tuple[TensorGrid, TensorGrid]:
        return self.stokes_grid.refined(level), self.darcy_grid.refined(level)

    def mortar_at(self, level: int) -> MortarSpec:
        return self.mortar.refined(level)

    def validate(self) -> "ScenarioConfig":
        """
        Comprueba parámetros y cobertura de condiciones de contorno en el nivel 0.

        Raises:
            ParameterError, BoundaryConditionError, GeometryError
        """
        if not np.isfinite(self.mu) or self.mu <= 0.0:
            raise ParameterError(f"viscosidad inválida: {self.mu}")
        if not 0 <= self.refinements <= MAX_REFINEMENTS:
            raise ParameterError(f"refinamientos fuera de [0, {MAX_REFINEMENTS}]: {self.refinements}")
        if self.solver not in ("monolithic", "dd"):
            raise ParameterError(f"solver desconocido: {self.solver}")
        if self.permeability.grid.shape != self.darcy_grid.shape:
            raise ParameterError("la permeabilidad no está definida sobre la malla de Darcy")
        interface = build_interface(self.stokes_grid, self.darcy_grid, self.mortar)
        classify_edges(self.stokes_grid, self.stokes_regions, interface, side="stokes")
        classify_edges(self.darcy_grid, self.darcy_regions, interface, side="darcy")
        if not self.darcy_regions and not self.stokes_regions:
            raise BoundaryConditionError("el escenario no tiene condiciones exteriores")
        return self

    def problem(self, level: int = 0) -> CoupledProblem:
        stokes_grid, darcy_grid = self.grids(level)
        logger.info(f"[{self.name}] nivel {level}: Stokes {stokes_grid.describe()}")
        logger.info(f"[{self.name}] nivel {level}: Darcy {darcy_grid.describe()}")
        return assemble_problem(
            stokes_grid, darcy_grid, self.mortar_at(level),
            mu=self.mu,
            alpha_bjs=self.alpha_bjs,
            permeability=self.permeability.on(darcy_grid),
            stokes_bc=MacBoundaryCondition(self.stokes_regions),
            darcy_bc=DarcyBoundaryCondition(self.darcy_regions),
            f_S=self.f_S, g_S=self.g_S, f_D=self.f_D,
        )


def _case1_layout(exact: ExactSolution, stokes_cells: int, darcy_cells: int, mortar: MortarSpec,
                  name: str, refinements: int, solver: str) -> ScenarioConfig:
    stokes_grid = uniform_grid(0.0, 1.0, stokes_cells, 0.5, 1.0, stokes_cells)
    darcy_grid = uniform_grid(0.0, 1.0, darcy_cells, 0.0, 0.5, darcy_cells)
    stokes_regions = (
        BoundaryRegion(BoundaryKind.ESSENTIAL, sides("left", "right", "top"),
                       velocity=exact.u_S, name="stokes_dirichlet"),
    )
    darcy_regions = (
        BoundaryRegion(BoundaryKind.NATURAL, sides("left", "right", "bottom"),
                       pressure=exact.p_D, name="darcy_pressure"),
    )
    return ScenarioConfig(
        name=name,
        stokes_grid=stokes_grid,
        darcy_grid=darcy_grid,
        mu=exact.mu,
        alpha_bjs=exact.alpha_bjs,
        permeability=PermeabilityField.constant(darcy_grid, exact.K),
        stokes_regions=stokes_regions,
        darcy_regions=darcy_regions,
        mortar=mortar,
        f_S=exact.f_S,
        g_S=exact.g_S,
        f_D=exact.f_D,
        exact=exact,
        refinements=refinements,
        solver=solver,
        metadata={"stokes_cells": stokes_cells, "darcy_cells": darcy_cells},
    )


def case1_scenario(mortar: str = "p0", elements: Optional[int] = None, refinements: int = 5,
                   solver: str = "monolithic", stokes_cells: int = 16,
                   darcy_cells: int = 15) -> ScenarioConfig:
    """
    Caso de convergencia: Stokes 16x16, Darcy 15x15; mortero P0 con 15
    elementos o P1 continuo con 14.
    """
    degree = {"p0": 0, "p1": 1}.get(mortar)
    if degree is None:
        raise ParameterError(f"mortero desconocido: {mortar}")
    if elements is None:
        elements = darcy_cells if degree == 0 else darcy_cells - 1
    exact = case1_exact()
    return _case1_layout(exact, stokes_cells, darcy_cells, MortarSpec(degree, elements),
                         name=f"case1_{mortar}", refinements=refinements, solver=solver)


def custom_scenario(stokes_cells: int, darcy_cells: int, mortar: str = "p0",
                    elements: Optional[int] = None, refinements: int = 0,
                    solver: str = "monolithic") -> ScenarioConfig:
    if stokes_cells < 1 or darcy_cells < 1:
        raise ParameterError(f"tamaños de malla inválidos: {stokes_cells}, {darcy_cells}")
    config = case1_scenario(mortar, elements, refinements, solver, stokes_cells, darcy_cells)
    config.name = f"custom_{mortar}"
    return config


def obstacle_permeability() -> np.ndarray:
    """K = R(φ) diag(k/β, k) R(φ)ᵀ con β = 100, k = 1e-5, φ = π/4."""
    return rotated_permeability(OBSTACLE_K, OBSTACLE_ANISOTROPY, OBSTACLE_ANGLE)


def _channel_grids(stokes_x: Sequence[int], stokes_y: Sequence[int], darcy_cells: Tuple[int, int],
                   grading: float) -> Tuple[TensorGrid, TensorGrid]:
    # Más fino sobre el obstáculo, donde el canal se estrecha
    x = piecewise_coordinates([0.0, 0.25, 0.5, 0.75], stokes_x)
    y = piecewise_coordinates([0.0, 0.2, 0.25], stokes_y, ratios=[grading, 1.0], towards=["end", "end"])
    xc, yc = 0.5 * (x[:-1] + x[1:]), 0.5 * (y[:-1] + y[1:])
    inside = (xc[:, None] > 0.25) & (xc[:, None] < 0.5) & (yc[None, :] < 0.2)
    stokes_grid = TensorGrid(x, y, ~inside)
    darcy_grid = uniform_grid(0.25, 0.5, darcy_cells[0], 0.0, 0.2, darcy_cells[1])
    return stokes_grid, darcy_grid


def case2_scenario(refinements: int = 0, solver: str = "monolithic", mortar: str = "p0",
                   elements=None, mu: float = 1.0, alpha: float = 1.0,
                   permeability_file: Optional[str] = None) -> ScenarioConfig:
    """
    Canal con obstáculo poroso: tracción σn = −1.1 n a la izquierda y
    −1.0 n a la derecha, no deslizamiento arriba y abajo, fondo del
    obstáculo impermeable.
    """
    degree = {"p0": 0, "p1": 1}.get(mortar)
    if degree is None:
        raise ParameterError(f"mortero desconocido: {mortar}")
    stokes_grid, darcy_grid = _channel_grids((10, 16, 10), (12, 6), (10, 8), grading=1.15)

    if permeability_file:
        permeability = load_permeability_csv(permeability_file, darcy_grid)
        K_ref = permeability.tensors[darcy_grid.active].mean(axis=0)
    else:
        K_ref = obstacle_permeability()
        permeability = PermeabilityField.constant(darcy_grid, K_ref)

    def alpha_bjs(x, y, tangent):
        return bjs_coefficient(mu, alpha, K_ref, tangent)

    stokes_regions = (
        BoundaryRegion(BoundaryKind.NATURAL, sides("left"),
                       traction=lambda x, y, n: (-INLET_TRACTION * n[0], -INLET_TRACTION * n[1]),
                       name="inlet"),
        BoundaryRegion(BoundaryKind.NATURAL, sides("right"),
                       traction=lambda x, y, n: (-OUTLET_TRACTION * n[0], -OUTLET_TRACTION * n[1]),
                       name="outlet"),
        BoundaryRegion(BoundaryKind.ESSENTIAL, sides("top", "bottom"), name="walls"),
    )
    darcy_regions = (
        BoundaryRegion(BoundaryKind.ESSENTIAL, sides("bottom"), name="obstacle_floor"),
    )
    return ScenarioConfig(
        name="case2",
        stokes_grid=stokes_grid,
        darcy_grid=darcy_grid,
        mu=mu,
        alpha_bjs=alpha_bjs,
        permeability=permeability,
        stokes_regions=stokes_regions,
        darcy_regions=darcy_regions,
        mortar=MortarSpec(degree, elements),
        refinements=refinements,
        solver=solver,
        metadata={"K": K_ref.tolist(), "alpha": alpha},
    )
