"""
model/darcy_rt0.py - Elementos mixtos RT0 x P0 para Darcy en celdas rectangulares.

Cada arista lleva un DOF: el flujo normal constante en la orientación global
(+x en aristas verticales, +y en horizontales). En una celda hx x hy con
K⁻¹ = [[k11, k12], [k12, k22]] la matriz de masa local sobre (W, E, S, N) es

    μ k11 hx hy [[1/3, 1/6], [1/6, 1/3]]   en el bloque (W, E)
    μ k22 hx hy [[1/3, 1/6], [1/6, 1/3]]   en el bloque (S, N)
    μ k12 hx hy / 4                         en cada entrada cruzada

que es la integración exacta de los productos de la base (basta Gauss 2x2).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from geometry.grid import TensorGrid
from geometry.interface import InterfaceSegmentation
from geometry.staggered import padded_activity
from model.boundary import (
    EDGE_ESSENTIAL, EDGE_INTERFACE, EDGE_NATURAL, BoundaryRegion, EdgeTags,
    classify_edges, face_of_cell_side,
)
from solver.linear_algebra import BlockSystem, SaddlePointSolver, TripletBuilder
from utils.errors import BoundaryConditionError, ParameterError, PermeabilityError
from utils.quadrature import integrate_rectangles, interval_rule

logger = logging.getLogger(__name__)

TensorLike = Union[float, Sequence[Sequence[float]], np.ndarray]


def rotated_permeability(k: float, ratio: float, angle: float) -> np.ndarray:
    """K = R(angle) diag(k / ratio, k) R(angle)ᵀ."""
    c, s = np.cos(angle), np.sin(angle)
    rotation = np.array([[c, -s], [s, c]])
    return rotation @ np.diag([k / ratio, k]) @ rotation.T


def bjs_coefficient(mu: float, alpha: float, K: np.ndarray, tangent: Tuple[float, float]) -> float:
    """α_BJS = μ α / sqrt(τᵀ K τ)."""
    tau = np.asarray(tangent, dtype=float)
    k_tau = float(tau @ np.asarray(K, dtype=float) @ tau)
    if k_tau <= 0.0:
        raise PermeabilityError(f"permeabilidad tangencial no positiva: {k_tau}")
    return mu * alpha / np.sqrt(k_tau)


def _as_tensor(value: TensorLike) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr) * np.eye(2)
    return arr.reshape(2, 2)


@dataclass(frozen=True, eq=False)
class PermeabilityField:
    """Tensor K por celda, array (nx, ny, 2, 2); se valida simetría y positividad."""

    grid: TensorGrid
    tensors: np.ndarray

    def __post_init__(self):
        tensors = np.array(self.tensors, dtype=float)
        if tensors.shape != self.grid.shape + (2, 2):
            raise PermeabilityError(f"forma {tensors.shape}, se esperaba {self.grid.shape + (2, 2)}")
        active = self.grid.active
        asym = np.abs(tensors[..., 0, 1] - tensors[..., 1, 0])
        scale = np.abs(tensors).max(axis=(-1, -2))
        bad = active & ~(asym <= 1e-12 * np.maximum(scale, 1e-300))
        if bad.any():
            raise PermeabilityError("tensor no simétrico", cell=tuple(int(v) for v in np.argwhere(bad)[0]))
        eig = np.linalg.eigvalsh(tensors[active])
        if not np.all(np.isfinite(eig)) or np.any(eig[:, 0] <= 0.0):
            idx = int(np.flatnonzero(~np.isfinite(eig).all(axis=1) | (eig[:, 0] <= 0.0))[0])
            cell = tuple(int(v) for v in np.argwhere(active)[idx])
            raise PermeabilityError("tensor no definido positivo", cell=cell)
        tensors.setflags(write=False)
        object.__setattr__(self, "tensors", tensors)

    @classmethod
    def constant(cls, grid: TensorGrid, value: TensorLike) -> "PermeabilityField":
        tensor = _as_tensor(value)
        return cls(grid, np.broadcast_to(tensor, grid.shape + (2, 2)).copy())

    @classmethod
    def from_function(cls, grid: TensorGrid, fn: Callable[[float, float], TensorLike]) -> "PermeabilityField":
        """Muestrea K en los centros de celda."""
        tensors = np.empty(grid.shape + (2, 2))
        for i, xc in enumerate(grid.xc):
            for j, yc in enumerate(grid.yc):
                tensors[i, j] = _as_tensor(fn(xc, yc))
        return cls(grid, tensors)

    def on(self, grid: TensorGrid) -> "PermeabilityField":
        """Mismo campo sobre la malla refinada por bisección (hereda el valor de la celda madre)."""
        if grid.shape == self.grid.shape:
            return PermeabilityField(grid, self.tensors.copy())
        fx, fy = grid.nx // self.grid.nx, grid.ny // self.grid.ny
        if fx * self.grid.nx != grid.nx or fy * self.grid.ny != grid.ny:
            raise PermeabilityError(f"no se puede transferir K de {self.grid.shape} a {grid.shape}")
        tensors = np.repeat(np.repeat(self.tensors, fx, axis=0), fy, axis=1)
        return PermeabilityField(grid, tensors)

    def inverse(self) -> np.ndarray:
        out = np.zeros_like(self.tensors)
        active = self.grid.active
        out[active] = np.linalg.inv(self.tensors[active])
        return out


@dataclass(frozen=True, eq=False)
class Rt0Space:
    """
    Aristas RT0 numeradas: primero las verticales (x_index, forma (nx+1, ny)),
    luego las horizontales (y_index, forma (nx, ny+1)); -1 si no existen.
    """

    grid: TensorGrid
    x_index: np.ndarray
    y_index: np.ndarray
    edges: np.ndarray          # (n_edges, 3): eje (0 = x, 1 = y), i, j
    lengths: np.ndarray
    midpoints: np.ndarray
    cell_index: np.ndarray

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def n_cells(self) -> int:
        return int(self.grid.active.sum())

    @classmethod
    def build(cls, grid: TensorGrid) -> "Rt0Space":
        act = padded_activity(grid)
        nx, ny = grid.shape
        x_exists = act[0:nx + 1, 1:ny + 1] | act[1:nx + 2, 1:ny + 1]
        y_exists = act[1:nx + 1, 0:ny + 1] | act[1:nx + 1, 1:ny + 2]
        x_cells = np.argwhere(x_exists)
        y_cells = np.argwhere(y_exists)
        nxe = x_cells.shape[0]

        x_index = np.full((nx + 1, ny), -1, dtype=np.int64)
        y_index = np.full((nx, ny + 1), -1, dtype=np.int64)
        x_index[x_exists] = np.arange(nxe)
        y_index[y_exists] = nxe + np.arange(y_cells.shape[0])

        edges = np.vstack([
            np.column_stack([np.zeros(nxe, dtype=np.int64), x_cells]),
            np.column_stack([np.ones(y_cells.shape[0], dtype=np.int64), y_cells]),
        ])
        lengths = np.concatenate([grid.dy[x_cells[:, 1]], grid.dx[y_cells[:, 0]]])
        midpoints = np.vstack([
            np.column_stack([grid.x_coords[x_cells[:, 0]], grid.yc[x_cells[:, 1]]]),
            np.column_stack([grid.xc[y_cells[:, 0]], grid.y_coords[y_cells[:, 1]]]),
        ])
        cell_index = np.full(grid.shape, -1, dtype=np.int64)
        cell_index[grid.active] = np.arange(int(grid.active.sum()))
        return cls(grid, x_index, y_index, edges, lengths, midpoints, cell_index)

    def edge_id(self, axis: str, i: int, j: int) -> int:
        return int(self.x_index[i, j] if axis == "x" else self.y_index[i, j])

    def edge_grids(self, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Valores por arista dispuestos en (nx+1, ny) y (nx, ny+1), NaN donde no hay arista."""
        nx, ny = self.grid.shape
        vx = np.full((nx + 1, ny), np.nan)
        vy = np.full((nx, ny + 1), np.nan)
        ex = self.x_index >= 0
        ey = self.y_index >= 0
        vx[ex] = values[self.x_index[ex]]
        vy[ey] = values[self.y_index[ey]]
        return vx, vy


@dataclass(eq=False)
class DarcyOperator:
    """Bloques RT0 sobre todas las aristas (antes de imponer condiciones)."""

    space: Rt0Space
    A: sp.csr_matrix
    B: sp.csr_matrix
    divergence: sp.csr_matrix
    trace_map: Optional[sp.csr_matrix]
    interface: Optional[InterfaceSegmentation]
    mu: float
    permeability: PermeabilityField


@dataclass(eq=False)
class DarcyBoundaryCondition:
    regions: Tuple[BoundaryRegion, ...] = ()

    def __post_init__(self):
        self.regions = tuple(self.regions)


@dataclass(eq=False)
class DarcySystem:
    """Sistema de Darcy restringido a las aristas libres, con sus cargas de frontera."""

    operator: DarcyOperator
    tags: EdgeTags
    A: sp.csr_matrix
    B: sp.csr_matrix
    trace_map: Optional[sp.csr_matrix]
    velocity_bc: np.ndarray
    mass_bc: np.ndarray
    free_edges: np.ndarray
    edge_data: np.ndarray
    has_pressure_anchor: bool
    extras: Dict[str, object] = field(default_factory=dict)

    @property
    def space(self) -> Rt0Space:
        return self.operator.space

    @property
    def n_velocity(self) -> int:
        return self.free_edges.size

    @property
    def n_pressure(self) -> int:
        return self.space.n_cells

    def edge_values(self, u: np.ndarray, with_data: bool = True) -> np.ndarray:
        values = self.edge_data.copy() if with_data else np.zeros(self.space.n_edges)
        values[self.free_edges] = u
        return values

    def pressure_field(self, p: np.ndarray) -> np.ndarray:
        out = np.full(self.space.grid.shape, np.nan)
        out[self.space.grid.active] = p
        return out


def _local_mass(hx: np.ndarray, hy: np.ndarray, kinv: np.ndarray, mu: float) -> np.ndarray:
    """Matrices de masa locales (n, 4, 4) en el orden (W, E, S, N)."""
    area = (hx * hy)[:, None, None]
    block = np.array([[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]])[None, :, :]
    local = np.zeros((hx.size, 4, 4))
    local[:, 0:2, 0:2] = kinv[:, 0, 0, None, None] * area * block
    local[:, 2:4, 2:4] = kinv[:, 1, 1, None, None] * area * block
    local[:, 0:2, 2:4] = kinv[:, 0, 1, None, None] * area / 4.0
    local[:, 2:4, 0:2] = kinv[:, 1, 0, None, None] * area / 4.0
    return mu * local


def darcy_trace(space: Rt0Space, interface: Optional[InterfaceSegmentation]) -> Optional[sp.csr_matrix]:
    """Mapa de traza sobre todas las aristas: una fila por intervalo de traza de Darcy."""
    if interface is None:
        return None
    rows, cols = [], []
    for seg in interface.segments:
        for ci, cj in seg.darcy_cells:
            axis, i, j = face_of_cell_side(int(ci), int(cj), seg.darcy_normal)
            rows.append(len(rows))
            cols.append(space.edge_id(axis, i, j))
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(rows), space.n_edges))


def assemble_darcy(grid: TensorGrid, K: PermeabilityField, mu: float,
                   interface: Optional[InterfaceSegmentation] = None) -> DarcyOperator:
    """
    Ensambla A_D (masa con μK⁻¹), B_D = -div y el mapa de traza de Γ.

    Raises:
        ParameterError: viscosidad no positiva
        PermeabilityError: K no SPD (detectado al construir el PermeabilityField)
    """
    if not np.isfinite(mu) or mu <= 0.0:
        raise ParameterError(f"viscosidad inválida: {mu}")
    if K.grid.shape != grid.shape:
        raise PermeabilityError(f"campo K sobre {K.grid.shape}, malla {grid.shape}")

    space = Rt0Space.build(grid)
    kinv = K.inverse()
    cells = grid.active_cells()
    ci, cj = cells[:, 0], cells[:, 1]
    hx, hy = grid.dx[ci], grid.dy[cj]
    ids = np.column_stack([space.x_index[ci, cj], space.x_index[ci + 1, cj],
                           space.y_index[ci, cj], space.y_index[ci, cj + 1]])
    local = _local_mass(hx, hy, kinv[ci, cj], mu)

    mass = TripletBuilder((space.n_edges, space.n_edges))
    mass.extend(np.repeat(ids, 4, axis=1), np.tile(ids, (1, 4)), local.reshape(-1, 16))
    div = TripletBuilder((cells.shape[0], space.n_edges))
    rows = np.repeat(np.arange(cells.shape[0])[:, None], 4, axis=1)
    div.extend(rows, ids, np.column_stack([-hy, hy, -hx, hx]))

    A = mass.tocsr()
    divergence = div.tocsr()
    logger.info(f"Darcy RT0: {space.n_edges} aristas, {space.n_cells} celdas, nnz(A)={A.nnz}")
    return DarcyOperator(
        space=space,
        A=A,
        B=-divergence,
        divergence=divergence,
        trace_map=darcy_trace(space, interface),
        interface=interface,
        mu=mu,
        permeability=K,
    )


def assemble_darcy_source(space: Rt0Space, f_D: Optional[Callable], order: int = 2) -> np.ndarray:
    """∫_E f_D por celda activa."""
    if f_D is None:
        return np.zeros(space.n_cells)
    grid = space.grid
    cells = grid.active_cells()
    ci, cj = cells[:, 0], cells[:, 1]
    return integrate_rectangles(f_D, grid.x_coords[ci], grid.x_coords[ci + 1],
                                grid.y_coords[cj], grid.y_coords[cj + 1], order)


def apply_darcy_bcs(op: DarcyOperator, bc: DarcyBoundaryCondition, order: int = 2) -> DarcySystem:
    """
    Impone las condiciones exteriores de Darcy.

    Las aristas esenciales se eliminan con su flujo dato (0 por defecto); las
    naturales aportan -⟨p_dato, v·n⟩ a la carga de velocidad.

    Raises:
        BoundaryConditionError: si algún tramo exterior queda sin condición
    """
    space = op.space
    grid = space.grid
    tags = classify_edges(grid, bc.regions, op.interface, side="darcy")
    kinds = np.concatenate([tags.x_kind[space.x_index >= 0], tags.y_kind[space.y_index >= 0]])
    signs = np.concatenate([tags.x_sign[space.x_index >= 0], tags.y_sign[space.y_index >= 0]])
    regions = np.concatenate([tags.x_region[space.x_index >= 0], tags.y_region[space.y_index >= 0]])

    edge_data = np.zeros(space.n_edges)
    load = np.zeros(space.n_edges)
    for e in np.flatnonzero(kinds == EDGE_ESSENTIAL):
        region = regions[e]
        if region.flux is not None:
            x, y = space.midpoints[e]
            edge_data[e] = float(region.flux(x, y)) * signs[e]

    for e in np.flatnonzero(kinds == EDGE_NATURAL):
        region = regions[e]
        if region.pressure is None:
            continue
        axis, i, j = space.edges[e]
        if axis == 0:
            pts, wts = interval_rule(grid.y_coords[j], grid.y_coords[j + 1], order)
            values = [region.pressure(grid.x_coords[i], s) for s in pts[0]]
        else:
            pts, wts = interval_rule(grid.x_coords[i], grid.x_coords[i + 1], order)
            values = [region.pressure(s, grid.y_coords[j]) for s in pts[0]]
        load[e] -= signs[e] * float(np.dot(wts[0], values))

    free = np.flatnonzero(kinds != EDGE_ESSENTIAL)
    fixed = np.flatnonzero(kinds == EDGE_ESSENTIAL)
    A = op.A[free][:, free].tocsr()
    B = op.B[:, free].tocsr()
    velocity_bc = load[free] - op.A[free][:, fixed] @ edge_data[fixed]
    mass_bc = op.divergence[:, fixed] @ edge_data[fixed]
    trace = op.trace_map[:, free].tocsr() if op.trace_map is not None else None
    if trace is not None and trace.nnz != op.trace_map.nnz:
        raise BoundaryConditionError("una arista de interfaz quedó marcada como esencial")

    anchor = bool(np.any(kinds == EDGE_NATURAL) or np.any(kinds == EDGE_INTERFACE))
    logger.debug(
        f"Darcy BC: {fixed.size} aristas esenciales, {int(np.sum(kinds == EDGE_NATURAL))} naturales, "
        f"{int(np.sum(kinds == EDGE_INTERFACE))} de interfaz")
    return DarcySystem(
        operator=op,
        tags=tags,
        A=A,
        B=B,
        trace_map=trace,
        velocity_bc=velocity_bc,
        mass_bc=mass_bc,
        free_edges=free,
        edge_data=edge_data,
        has_pressure_anchor=anchor,
    )


def solve_darcy(system: DarcySystem, f_D: Optional[Callable] = None,
                compat_tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
    """
    Resuelve Darcy aislado, sin mortero (Γ, si existe, actúa como presión nula).

    Con todas las aristas esenciales la presión queda definida salvo una
    constante: se comprueba la compatibilidad ∫f_D = flujo neto de frontera
    y se añade la restricción de media nula.

    Returns:
        (flujos en todas las aristas, presión por celda activa)
    """
    space = system.space
    source = assemble_darcy_source(space, f_D)
    mass_rhs = -source + system.mass_bc
    names = ["u_D", "p_D"]
    blocks = [[system.A, system.B.T], [system.B, None]]
    rhs = [system.velocity_bc, mass_rhs]

    if not system.has_pressure_anchor:
        imbalance = float(np.sum(mass_rhs))
        scale = max(float(np.sum(np.abs(source))), 1.0)
        if abs(imbalance) > compat_tol * scale:
            raise BoundaryConditionError(
                f"problema de Darcy incompatible: ∫f_D - flujo de frontera = {-imbalance:.3e}")
        logger.info("Darcy con flujo nulo en toda la frontera: se fija la media de la presión")
        areas = space.grid.cell_areas[space.grid.active]
        gauge = sp.csr_matrix(areas.reshape(1, -1))
        blocks = [[system.A, system.B.T, None], [system.B, None, gauge.T], [None, gauge, None]]
        rhs.append(np.zeros(1))
        names.append("gauge")

    block_system = BlockSystem(names, blocks, rhs)
    solver = SaddlePointSolver(block_system.matrix(), names, block_system.sizes)
    parts = block_system.split(solver.solve(block_system.rhs_vector()))
    return system.edge_values(parts["u_D"]), parts["p_D"]
