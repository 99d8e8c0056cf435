"""
solver/coupled_solver.py - Resolución del problema acoplado Stokes-Darcy con mortero.

Dos caminos:
  - monolítico: un único sistema de punto de silla en (u_S, p_S, u_D, p_D, λ);
  - descomposición de dominio: CG sobre λ con el operador de interfaz
        s_h(λ) = -(C_S u*_S(λ) + C_D u*_D(λ)),
    donde u* resuelve cada subdominio con datos exteriores nulos y tensión
    normal / presión λ en Γ, y el lado derecho sale de las soluciones "bar"
    (datos verdaderos, λ = 0). La solución final es u*(λ_h) + ū.

Las dos soluciones star de cada aplicación son independientes y se lanzan en
un ThreadPoolExecutor; las factorizaciones LU se preparan una sola vez.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from geometry.grid import TensorGrid
from geometry.interface import InterfaceSegmentation, MortarSpec, build_interface
from geometry.staggered import build_staggered
from model.boundary import EDGE_NATURAL
from model.darcy_rt0 import (
    DarcyBoundaryCondition, DarcySystem, PermeabilityField, apply_darcy_bcs,
    assemble_darcy, assemble_darcy_source,
)
from model.mortar_interface import MortarCoupling, assemble_coupling, check_mortar_solvability
from model.stokes_mac import (
    AlphaBJS, MacBoundaryCondition, StokesOperator, assemble_momentum, assemble_rhs,
)
from solver.linear_algebra import (
    CG_MAX_ITER, CG_TOL, SADDLE_TOL, BlockSystem, CGResult, SaddlePointSolver,
    cg_solve, diagonal_preconditioner,
)
from utils.errors import ParameterError, SingularSystemError

logger = logging.getLogger(__name__)

MONOLITHIC_BLOCKS = ("u_S", "p_S", "u_D", "p_D", "lambda")


@dataclass(eq=False)
class CoupledProblem:
    """Bloques ensamblados de un nivel de malla y sus lados derechos."""

    segmentation: InterfaceSegmentation
    stokes: StokesOperator
    darcy: DarcySystem
    coupling: MortarCoupling
    C_S: sp.csr_matrix
    C_D: sp.csr_matrix
    stokes_load: np.ndarray
    stokes_source: np.ndarray
    darcy_source: np.ndarray

    @property
    def stokes_momentum_rhs(self) -> np.ndarray:
        return self.stokes_load + self.stokes.momentum_bc

    @property
    def stokes_mass_rhs(self) -> np.ndarray:
        return -self.stokes_source + self.stokes.mass_bc

    @property
    def darcy_velocity_rhs(self) -> np.ndarray:
        return self.darcy.velocity_bc

    @property
    def darcy_mass_rhs(self) -> np.ndarray:
        return -self.darcy_source + self.darcy.mass_bc

    @property
    def needs_gauge(self) -> bool:
        """Sin frontera natural exterior la presión global sólo está definida salvo constante."""
        return not self.stokes.has_natural and not self.darcy.tags.has(EDGE_NATURAL)

    def describe(self) -> Dict[str, int]:
        return {
            "stokes_velocity": self.stokes.n_velocity,
            "stokes_pressure": self.stokes.n_pressure,
            "darcy_velocity": self.darcy.n_velocity,
            "darcy_pressure": self.darcy.n_pressure,
            "mortar": self.coupling.n_mortar,
        }


@dataclass(eq=False)
class CoupledSolution:
    u_S: np.ndarray
    p_S: np.ndarray
    u_D: np.ndarray
    p_D: np.ndarray
    lam: np.ndarray
    method: str
    iterations: int = 0
    residual_history: List[float] = field(default_factory=list)
    converged: bool = True
    elapsed: float = 0.0


def assemble_problem(stokes_grid: TensorGrid, darcy_grid: TensorGrid, mortar_spec: MortarSpec,
                     mu: float, alpha_bjs: AlphaBJS, permeability: PermeabilityField,
                     stokes_bc: MacBoundaryCondition, darcy_bc: DarcyBoundaryCondition,
                     f_S: Optional[Callable] = None, g_S: Optional[Callable] = None,
                     f_D: Optional[Callable] = None) -> CoupledProblem:
    """
    Construye geometría, operadores de subdominio y acoplamiento de mortero.

    Raises:
        GeometryError, BoundaryConditionError, PermeabilityError, MortarError
    """
    segmentation = build_interface(stokes_grid, darcy_grid, mortar_spec)
    geom = build_staggered(stokes_grid)
    stokes = assemble_momentum(geom, mu, alpha_bjs, stokes_bc, segmentation)
    darcy = apply_darcy_bcs(assemble_darcy(darcy_grid, permeability, mu, segmentation), darcy_bc)
    coupling = assemble_coupling(segmentation)
    check_mortar_solvability(coupling)

    stokes_load, stokes_source = assemble_rhs(stokes.dofs, f_S, g_S)
    darcy_source = assemble_darcy_source(darcy.space, f_D)
    return CoupledProblem(
        segmentation=segmentation,
        stokes=stokes,
        darcy=darcy,
        coupling=coupling,
        C_S=(coupling.B_Gamma_S @ stokes.trace_map).tocsr(),
        C_D=(coupling.B_Gamma_D @ darcy.trace_map).tocsr(),
        stokes_load=stokes_load,
        stokes_source=stokes_source,
        darcy_source=darcy_source,
    )


def monolithic_system(problem: CoupledProblem) -> BlockSystem:
    """Sistema simétrico de doble punto de silla en el orden MONOLITHIC_BLOCKS (+ gauge)."""
    S, D = problem.stokes, problem.darcy
    names = list(MONOLITHIC_BLOCKS)
    blocks = [
        [S.A, S.B.T, None, None, problem.C_S.T],
        [S.B, None, None, None, None],
        [None, None, D.A, D.B.T, problem.C_D.T],
        [None, None, D.B, None, None],
        [problem.C_S, None, problem.C_D, None, None],
    ]
    rhs = [
        problem.stokes_momentum_rhs,
        problem.stokes_mass_rhs,
        problem.darcy_velocity_rhs,
        problem.darcy_mass_rhs,
        np.zeros(problem.coupling.n_mortar),
    ]
    if problem.needs_gauge:
        s_areas = S.dofs.grid.cell_areas[S.dofs.grid.active]
        d_areas = D.space.grid.cell_areas[D.space.grid.active]
        g_S = sp.csr_matrix(s_areas.reshape(1, -1))
        g_D = sp.csr_matrix(d_areas.reshape(1, -1))
        for row in blocks:
            row.append(None)
        blocks[1][-1] = g_S.T
        blocks[3][-1] = g_D.T
        blocks.append([None, g_S, None, g_D, None, None])
        rhs.append(np.zeros(1))
        names.append("gauge")
        logger.info("Sin frontera natural exterior: se impone presión de media nula")
    return BlockSystem(names, blocks, rhs)


def solve_monolithic(problem: CoupledProblem, tol: float = SADDLE_TOL) -> CoupledSolution:
    """Resuelve (u_h, p_h, λ_h) con una sola factorización directa."""
    start = time.perf_counter()
    system = monolithic_system(problem)
    solver = SaddlePointSolver(system.matrix(), system.names, system.sizes, tol)
    parts = system.split(solver.solve(system.rhs_vector()))
    elapsed = time.perf_counter() - start
    logger.info(f"Solución monolítica en {elapsed:.2f}s ({sum(system.sizes)} incógnitas)")
    return CoupledSolution(
        u_S=parts["u_S"], p_S=parts["p_S"], u_D=parts["u_D"], p_D=parts["p_D"],
        lam=parts["lambda"], method="monolithic", elapsed=elapsed,
    )


class SubdomainSolver:
    """
    Subproblemas de Stokes y Darcy factorizados una vez para el CG de interfaz.

    Los datos de interfaz se inyectan con P_Sh (Stokes) y P_Dh (Darcy), que con
    mortero P0 igual a la traza de Darcy es la identidad.
    """

    def __init__(self, problem: CoupledProblem, parallel: bool = True, tol: float = SADDLE_TOL):
        self.problem = problem
        self.parallel = parallel
        S, D = problem.stokes, problem.darcy
        self._stokes = SaddlePointSolver(
            sp.bmat([[S.A, S.B.T], [S.B, None]], format="csr"),
            ["u_S", "p_S"], [S.n_velocity, S.n_pressure], tol)
        self._darcy = SaddlePointSolver(
            sp.bmat([[D.A, D.B.T], [D.B, None]], format="csr"),
            ["u_D", "p_D"], [D.n_velocity, D.n_pressure], tol)
        self._bar: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = None
        self.applications = 0

        coupling = problem.coupling
        sign_s = problem.segmentation.trace_signs("stokes")
        sign_d = problem.segmentation.trace_signs("darcy")
        # Carga de interfaz: T_ᵀ (signo · |e| · P_h λ) = C_ᵀ λ
        self._stokes_injection = (S.trace_map.T @ sp.diags(sign_s * coupling.stokes_lengths)).tocsr()
        self._darcy_injection = (D.trace_map.T @ sp.diags(sign_d * coupling.darcy_lengths)).tocsr()
        self._executor = ThreadPoolExecutor(max_workers=2) if parallel else None

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _solve_stokes(self, momentum: np.ndarray, mass: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        S = self.problem.stokes
        x = self._stokes.solve(np.concatenate([momentum, mass]))
        return x[:S.n_velocity], x[S.n_velocity:]

    def _solve_darcy(self, velocity: np.ndarray, mass: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        D = self.problem.darcy
        x = self._darcy.solve(np.concatenate([velocity, mass]))
        return x[:D.n_velocity], x[D.n_velocity:]

    def stokes_interface_load(self, lam: np.ndarray) -> np.ndarray:
        return self._stokes_injection @ (self.problem.coupling.P_Sh @ lam)

    def darcy_interface_load(self, lam: np.ndarray) -> np.ndarray:
        return self._darcy_injection @ (self.problem.coupling.P_Dh @ lam)

    def star_solve(self, lam: np.ndarray):
        """Soluciones con datos exteriores y fuentes nulos y λ en Γ."""
        S, D = self.problem.stokes, self.problem.darcy
        stokes_rhs = (-self.stokes_interface_load(lam), np.zeros(S.n_pressure))
        darcy_rhs = (-self.darcy_interface_load(lam), np.zeros(D.n_pressure))
        if self._executor is not None:
            fs = self._executor.submit(self._solve_stokes, *stokes_rhs)
            fd = self._executor.submit(self._solve_darcy, *darcy_rhs)
            (u_S, p_S), (u_D, p_D) = fs.result(), fd.result()
        else:
            u_S, p_S = self._solve_stokes(*stokes_rhs)
            u_D, p_D = self._solve_darcy(*darcy_rhs)
        return u_S, p_S, u_D, p_D

    def bar_solve(self):
        """Soluciones con los datos verdaderos y λ = 0 (se calculan una vez)."""
        if self._bar is None:
            P = self.problem
            u_S, p_S = self._solve_stokes(P.stokes_momentum_rhs, P.stokes_mass_rhs)
            u_D, p_D = self._solve_darcy(P.darcy_velocity_rhs, P.darcy_mass_rhs)
            self._bar = (u_S, p_S, u_D, p_D)
        return self._bar

    def interface_rhs(self) -> np.ndarray:
        u_S, _, u_D, _ = self.bar_solve()
        return self.problem.C_S @ u_S + self.problem.C_D @ u_D

    def apply(self, lam: np.ndarray) -> np.ndarray:
        self.applications += 1
        u_S, _, u_D, _ = self.star_solve(lam)
        return -(self.problem.C_S @ u_S + self.problem.C_D @ u_D)

    def operator_diagonal(self) -> np.ndarray:
        return np.diag(form_interface_matrix(self))


def apply_interface_operator(solver: SubdomainSolver, lam: np.ndarray) -> np.ndarray:
    """s_h(λ): vector de -b_Γ(u*(λ), ξ_i) sobre la base del mortero."""
    return solver.apply(np.asarray(lam, dtype=float))


def form_interface_matrix(solver: SubdomainSolver) -> np.ndarray:
    """Forma s_h columna a columna (sólo para tamaños pequeños)."""
    n = solver.problem.coupling.n_mortar
    columns = [solver.apply(np.eye(n)[:, k]) for k in range(n)]
    return np.column_stack(columns)


def solve_dd(solver: SubdomainSolver, cg_tol: float = CG_TOL, max_iter: int = CG_MAX_ITER,
             preconditioned: bool = False) -> CoupledSolution:
    """
    Resuelve el problema de interfaz con CG y reconstruye los campos.

    Si CG no converge se devuelve la solución parcial con converged=False.
    """
    start = time.perf_counter()
    rhs = solver.interface_rhs()
    preconditioner = diagonal_preconditioner(solver.operator_diagonal()) if preconditioned else None
    result: CGResult = cg_solve(solver.apply, rhs, tol=cg_tol, max_iter=max_iter,
                                preconditioner=preconditioner)
    if result.converged:
        logger.info(f"CG de interfaz: {result.iterations} iteraciones, residuo {result.residual_history[-1]:.2e}")
    else:
        logger.warning(f"CG de interfaz sin converger tras {result.iterations} iteraciones; "
                       f"se devuelve la solución parcial (residuo {result.residual_history[-1]:.2e})")

    u_S, p_S, u_D, p_D = solver.star_solve(result.x)
    bu_S, bp_S, bu_D, bp_D = solver.bar_solve()
    elapsed = time.perf_counter() - start
    return CoupledSolution(
        u_S=u_S + bu_S, p_S=p_S + bp_S, u_D=u_D + bu_D, p_D=p_D + bp_D, lam=result.x,
        method="dd", iterations=result.iterations, residual_history=result.residual_history,
        converged=result.converged, elapsed=elapsed,
    )


def solve(problem: CoupledProblem, method: str = "monolithic", cg_tol: float = CG_TOL,
          max_iter: int = CG_MAX_ITER) -> CoupledSolution:
    if method == "monolithic":
        return solve_monolithic(problem)
    if method == "dd":
        if problem.needs_gauge:
            raise SingularSystemError("la descomposición de dominio necesita frontera natural exterior",
                                      dof_class="p_S")
        with SubdomainSolver(problem) as solver:
            return solve_dd(solver, cg_tol, max_iter)
    raise ParameterError(f"método de solución desconocido: {method}")


def conservation_residuals(problem: CoupledProblem, solution: CoupledSolution) -> Dict[str, float]:
    """Residuos máximos de masa por celda, momento y continuidad de flujo."""
    S, D = problem.stokes, problem.darcy
    stokes_faces = S.dofs.face_values(solution.u_S)
    darcy_edges = D.edge_values(solution.u_D)
    momentum = (S.A @ solution.u_S + S.B.T @ solution.p_S + problem.C_S.T @ solution.lam
                - problem.stokes_momentum_rhs)
    return {
        "stokes_mass": float(np.max(np.abs(S.divergence @ stokes_faces - problem.stokes_source))),
        "darcy_mass": float(np.max(np.abs(D.operator.divergence @ darcy_edges - problem.darcy_source))),
        "stokes_momentum": float(np.max(np.abs(momentum))) if momentum.size else 0.0,
        "flux_continuity": float(np.max(np.abs(problem.C_S @ solution.u_S + problem.C_D @ solution.u_D))),
    }


def solve_stokes(stokes: StokesOperator, f_S: Optional[Callable] = None,
                 g_S: Optional[Callable] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Stokes aislado (Γ, si existe, libre de tensión); fija la media de p si no hay frontera natural."""
    momentum, source = assemble_rhs(stokes.dofs, f_S, g_S)
    anchored = stokes.has_natural or stokes.trace_map is not None
    names = ["u_S", "p_S"]
    blocks = [[stokes.A, stokes.B.T], [stokes.B, None]]
    rhs = [momentum + stokes.momentum_bc, -source + stokes.mass_bc]
    if not anchored:
        areas = stokes.dofs.grid.cell_areas[stokes.dofs.grid.active]
        gauge = sp.csr_matrix(areas.reshape(1, -1))
        blocks = [[stokes.A, stokes.B.T, None], [stokes.B, None, gauge.T], [None, gauge, None]]
        rhs.append(np.zeros(1))
        names.append("gauge")
    system = BlockSystem(names, blocks, rhs)
    solver = SaddlePointSolver(system.matrix(), names, system.sizes)
    parts = system.split(solver.solve(system.rhs_vector()))
    return parts["u_S"], parts["p_S"]
