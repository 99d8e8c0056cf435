"""
model/stokes_mac.py - Discretización MAC de Stokes sobre mallas tensoriales.

La matriz de momento se ensambla a partir de la energía discreta
    2μ Σ_E |E| [(∂u1/∂x)² + (∂u2/∂y)²] + μ Σ_V W(V) (∂u1/∂y + ∂u2/∂x)²
con ∂u1/∂x constante por celda y el término de corte evaluado en los
vértices, de modo que A_S es simétrica por construcción. En malla uniforme
las filas interiores coinciden con los esténciles clásicos MAC, p. ej. para u1:
    μ[6u - 2u_E - 2u_W - u_N - u_S] + μ[±u2] + h(p_E - p_W).

Frontera:
  - esencial: el DOF normal se elimina y el valor tangencial en el vértice
    se toma del dato (esencial gana en las esquinas);
  - natural: carga σn·e_k en las caras normales y corte dado en los vértices;
  - interfaz: el DOF normal queda libre (se acopla con el mortero) y en los
    vértices de Γ se introduce una incógnita tangencial t, con el término
    BJS α_BJS ∫ u·τ v·τ integrado por trapecios.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from geometry.interface import InterfaceSegmentation
from geometry.staggered import StaggeredGeometry
from model.boundary import (
    EDGE_ABSENT, EDGE_ESSENTIAL, EDGE_INTERFACE, EDGE_NATURAL,
    BoundaryRegion, EdgeTags, classify_edges, face_of_cell_side,
)
from solver.linear_algebra import TripletBuilder
from utils.errors import BoundaryConditionError, GeometryError, ParameterError
from utils.quadrature import integrate_rectangles, interval_rule

logger = logging.getLogger(__name__)

AlphaBJS = Union[float, Callable[[float, float, Tuple[float, float]], float]]

# Clases de valor tangencial en los vértices
TANGENTIAL_NONE = 0
TANGENTIAL_DATA = 1
TANGENTIAL_UNKNOWN = 2


@dataclass(frozen=True)
class MacBoundaryCondition:
    """Regiones de frontera exterior del subdominio de Stokes."""

    regions: Tuple[BoundaryRegion, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))


@dataclass(frozen=True, eq=False)
class MacField:
    """
    Campo MAC completo sobre la malla: u1 (nx+1, ny), u2 (nx, ny+1) con NaN
    donde no hay cara, y los valores tangenciales de frontera en los vértices
    (nx+1, ny+1), NaN donde no se usan.
    """

    grid: object
    u1: np.ndarray
    u2: np.ndarray
    tangential_u1: np.ndarray
    tangential_u2: np.ndarray


class MacDofMap:
    """
    Numeración de incógnitas de Stokes.

    El vector de velocidad ordena: caras u1 libres, caras u2 libres y luego
    las incógnitas tangenciales de interfaz. Las caras esenciales guardan su
    dato en u1_essential/u2_essential.
    """

    def __init__(self, geometry: StaggeredGeometry, bc: MacBoundaryCondition,
                 interface: Optional[InterfaceSegmentation] = None):
        self.geometry = geometry
        self.grid = geometry.primal
        self.interface = interface
        self.tags: EdgeTags = classify_edges(self.grid, bc.regions, interface, side="stokes")

        faces1, faces2 = geometry.u1_faces, geometry.u2_faces
        self.u1_tag = self.tags.x_kind[faces1[:, 0], faces1[:, 1]].astype(np.int8)
        self.u2_tag = self.tags.y_kind[faces2[:, 0], faces2[:, 1]].astype(np.int8)

        free1 = self.u1_tag != EDGE_ESSENTIAL
        free2 = self.u2_tag != EDGE_ESSENTIAL
        n1, n2 = int(free1.sum()), int(free2.sum())
        self.u1_unknown = np.full(geometry.n_u1, -1, dtype=np.int64)
        self.u2_unknown = np.full(geometry.n_u2, -1, dtype=np.int64)
        self.u1_unknown[free1] = np.arange(n1)
        self.u2_unknown[free2] = n1 + np.arange(n2)
        self.n_face_unknowns = n1 + n2

        self.u1_essential = np.zeros(geometry.n_u1)
        self.u2_essential = np.zeros(geometry.n_u2)
        self._fill_essential_normals()

        self._classify_vertices()
        self._build_tangential()
        self.n_velocity = self.n_face_unknowns + self.n_tangential

        active = self.grid.active
        self.p_index = np.full(active.shape, -1, dtype=np.int64)
        self.p_index[active] = np.arange(int(active.sum()))
        self.n_pressure = int(active.sum())

        logger.debug(
            f"DOFs Stokes: {n1} u1 + {n2} u2 libres, {self.n_tangential} tangenciales, "
            f"{self.n_pressure} presiones")

    # ------------------------------------------------------------------
    # Clasificación
    # ------------------------------------------------------------------
    def _fill_essential_normals(self):
        geom = self.geometry
        for k in np.flatnonzero(self.u1_tag == EDGE_ESSENTIAL):
            i, j = geom.u1_faces[k]
            region = self.tags.x_region[i, j]
            x, y = geom.u1_positions[k]
            self.u1_essential[k] = _velocity(region, x, y)[0]
        for k in np.flatnonzero(self.u2_tag == EDGE_ESSENTIAL):
            i, j = geom.u2_faces[k]
            region = self.tags.y_region[i, j]
            x, y = geom.u2_positions[k]
            self.u2_essential[k] = _velocity(region, x, y)[1]

    def _classify_vertices(self):
        nx, ny = self.grid.shape
        xk = np.pad(self.tags.x_kind, ((0, 0), (1, 1)), constant_values=EDGE_ABSENT)
        yk = np.pad(self.tags.y_kind, ((1, 1), (0, 0)), constant_values=EDGE_ABSENT)
        incident = (xk[:, 0:ny + 1], xk[:, 1:ny + 2], yk[0:nx + 1, :], yk[1:nx + 2, :])

        def touches(code):
            return np.logical_or.reduce([edges == code for edges in incident])

        self.vertex_essential = touches(EDGE_ESSENTIAL)
        self.vertex_interface = touches(EDGE_INTERFACE) & ~self.vertex_essential
        self.vertex_natural_only = touches(EDGE_NATURAL) & ~self.vertex_essential & ~self.vertex_interface
        self.vertex_used = self.geometry.vertex_weights > 0.0

    def incident_edges(self, i: int, j: int):
        """Aristas (eje, i, j) que concurren en el vértice (i, j)."""
        nx, ny = self.grid.shape
        edges = []
        if j - 1 >= 0:
            edges.append(("x", i, j - 1))
        if j < ny:
            edges.append(("x", i, j))
        if i - 1 >= 0:
            edges.append(("y", i - 1, j))
        if i < nx:
            edges.append(("y", i, j))
        return edges

    def edge_kind(self, axis: str, i: int, j: int) -> int:
        return int(self.tags.x_kind[i, j] if axis == "x" else self.tags.y_kind[i, j])

    def edge_region(self, axis: str, i: int, j: int) -> Optional[BoundaryRegion]:
        return self.tags.x_region[i, j] if axis == "x" else self.tags.y_region[i, j]

    def _missing_faces(self, component: int) -> np.ndarray:
        """Vértices donde falta la cara a un lado en la dirección de derivación."""
        nx, ny = self.grid.shape
        if component == 1:
            faces = np.pad(self.geometry.u1_index >= 0, ((0, 0), (1, 1)), constant_values=False)
            return ~faces[:, 0:ny + 1] | ~faces[:, 1:ny + 2]
        faces = np.pad(self.geometry.u2_index >= 0, ((1, 1), (0, 0)), constant_values=False)
        return ~faces[0:nx + 1, :] | ~faces[1:nx + 2, :]

    def _build_tangential(self):
        shape = self.geometry.vertex_weights.shape
        self.tangential_kind = {c: np.zeros(shape, dtype=np.int8) for c in (1, 2)}
        self.tangential_index = {c: np.full(shape, -1, dtype=np.int64) for c in (1, 2)}
        self.tangential_value = {c: np.zeros(shape) for c in (1, 2)}
        positions, components = [], []

        x, y = self.grid.x_coords, self.grid.y_coords
        next_index = self.n_face_unknowns
        for comp in (1, 2):
            need = self.vertex_used & ~self.vertex_natural_only & self._missing_faces(comp)
            for i, j in np.argwhere(need):
                i, j = int(i), int(j)
                if self.vertex_essential[i, j]:
                    region = next(self.edge_region(*e) for e in self.incident_edges(i, j)
                                  if self.edge_kind(*e) == EDGE_ESSENTIAL)
                    self.tangential_kind[comp][i, j] = TANGENTIAL_DATA
                    self.tangential_value[comp][i, j] = _velocity(region, x[i], y[j])[comp - 1]
                elif self.vertex_interface[i, j]:
                    self.tangential_kind[comp][i, j] = TANGENTIAL_UNKNOWN
                    self.tangential_index[comp][i, j] = next_index
                    positions.append((x[i], y[j]))
                    components.append(comp)
                    next_index += 1
                else:
                    raise GeometryError(f"vértice de frontera sin valor tangencial ({i}, {j})")

        self.n_tangential = next_index - self.n_face_unknowns
        self.tangential_positions = np.array(positions, dtype=float).reshape(-1, 2)
        self.tangential_components = np.array(components, dtype=np.int64)

    # ------------------------------------------------------------------
    # Utilidades de campo
    # ------------------------------------------------------------------
    def face_selection(self) -> sp.csr_matrix:
        """Matriz (n_caras × n_velocidad) que lleva incógnitas a valores de cara."""
        face_ids = np.concatenate([self.u1_unknown, self.u2_unknown])
        rows = np.flatnonzero(face_ids >= 0)
        return sp.csr_matrix((np.ones(rows.size), (rows, face_ids[rows])),
                             shape=(face_ids.size, self.n_velocity))

    def essential_faces(self) -> np.ndarray:
        return np.concatenate([self.u1_essential, self.u2_essential])

    def face_values(self, u: np.ndarray, with_data: bool = True) -> np.ndarray:
        """Valores en todas las caras (u1 y luego u2), con datos esenciales opcionales."""
        values = self.face_selection() @ u
        if with_data:
            values = values + self.essential_faces()
        return values

    def velocity_index_of_face(self, axis: str, i: int, j: int) -> int:
        if axis == "x":
            k = self.geometry.u1_index[i, j]
            return int(self.u1_unknown[k]) if k >= 0 else -1
        k = self.geometry.u2_index[i, j]
        return int(self.u2_unknown[k]) if k >= 0 else -1

    def mac_field(self, u: np.ndarray, with_data: bool = True) -> MacField:
        geom = self.geometry
        nx, ny = self.grid.shape
        values = self.face_values(u, with_data)
        u1 = np.full((nx + 1, ny), np.nan)
        u2 = np.full((nx, ny + 1), np.nan)
        u1[geom.u1_faces[:, 0], geom.u1_faces[:, 1]] = values[:geom.n_u1]
        u2[geom.u2_faces[:, 0], geom.u2_faces[:, 1]] = values[geom.n_u1:]

        tangential = {}
        for comp in (1, 2):
            arr = np.full((nx + 1, ny + 1), np.nan)
            kind = self.tangential_kind[comp]
            data = kind == TANGENTIAL_DATA
            arr[data] = self.tangential_value[comp][data] if with_data else 0.0
            free = kind == TANGENTIAL_UNKNOWN
            arr[free] = u[self.tangential_index[comp][free]]
            tangential[comp] = arr
        return MacField(self.grid, u1, u2, tangential[1], tangential[2])

    def pressure_field(self, p: np.ndarray) -> np.ndarray:
        out = np.full(self.grid.shape, np.nan)
        out[self.grid.active] = p
        return out


@dataclass(eq=False)
class StokesOperator:
    """Bloques de Stokes sobre las incógnitas libres y sus cargas de frontera."""

    dofs: MacDofMap
    A: sp.csr_matrix
    B: sp.csr_matrix
    divergence: sp.csr_matrix
    trace_map: Optional[sp.csr_matrix]
    momentum_bc: np.ndarray
    mass_bc: np.ndarray
    mu: float
    alpha_bjs: AlphaBJS = 0.0
    has_natural: bool = False
    extras: Dict[str, object] = field(default_factory=dict)

    @property
    def n_velocity(self) -> int:
        return self.dofs.n_velocity

    @property
    def n_pressure(self) -> int:
        return self.dofs.n_pressure


class _QuadraticForm:
    """Acumula términos c·(gᵀu + g0)² como bloques de una matriz simétrica."""

    def __init__(self, n: int):
        self.builder = TripletBuilder((n, n))
        self.lift = np.zeros(n)

    def add_batch(self, weight, indices, coefs, values):
        """
        Args:
            weight: (m,) pesos c
            indices: (m, q) índice de incógnita o -1 si el valor es un dato
            coefs: (m, q) coeficientes g
            values: (m, q) datos conocidos (ignorados donde hay incógnita)
        """
        weight = np.asarray(weight, dtype=float)
        indices = np.asarray(indices, dtype=np.int64)
        coefs = np.asarray(coefs, dtype=float)
        values = np.asarray(values, dtype=float)
        known = indices < 0
        const = np.sum(np.where(known, coefs * values, 0.0), axis=1)
        for a in range(indices.shape[1]):
            ia = indices[:, a]
            ok_a = ia >= 0
            np.add.at(self.lift, ia[ok_a], -(weight * coefs[:, a] * const)[ok_a])
            for b in range(indices.shape[1]):
                ib = indices[:, b]
                ok = ok_a & (ib >= 0)
                self.builder.extend(ia[ok], ib[ok], (weight * coefs[:, a] * coefs[:, b])[ok])

    def matrix(self) -> sp.csr_matrix:
        return self.builder.tocsr()


def _velocity(region: Optional[BoundaryRegion], x: float, y: float) -> Tuple[float, float]:
    if region is None or region.velocity is None:
        return (0.0, 0.0)
    u1, u2 = region.velocity(x, y)
    return float(u1), float(u2)


def _traction(region: Optional[BoundaryRegion], x: float, y: float, normal) -> Tuple[float, float]:
    if region is None or region.traction is None:
        return (0.0, 0.0)
    t1, t2 = region.traction(x, y, normal)
    return float(t1), float(t2)


def _alpha_at(alpha_bjs: AlphaBJS, x: float, y: float, tangent: Tuple[float, float]) -> float:
    value = float(alpha_bjs(x, y, tangent)) if callable(alpha_bjs) else float(alpha_bjs)
    if value < 0.0 or not np.isfinite(value):
        raise ParameterError(f"coeficiente BJS inválido {value} en ({x:.6g}, {y:.6g})")
    return value


def _face_slots(dofs: MacDofMap, component: int, face_ids: np.ndarray):
    """(índice de incógnita, dato) de las caras dadas; face_ids >= 0."""
    unknown = dofs.u1_unknown if component == 1 else dofs.u2_unknown
    data = dofs.u1_essential if component == 1 else dofs.u2_essential
    return unknown[face_ids], data[face_ids]


def assemble_divergence(geom: StaggeredGeometry, dofs: Optional[MacDofMap] = None) -> sp.csr_matrix:
    """
    Divergencia discreta por celda activa sobre todas las caras (u1 y luego u2):
    fila E = dy (u1_E - u1_W) + dx (u2_N - u2_S).
    """
    grid = geom.primal
    cells = grid.active_cells()
    ci, cj = cells[:, 0], cells[:, 1]
    rows = np.arange(cells.shape[0])
    n1 = geom.n_u1
    dx, dy = grid.dx[ci], grid.dy[cj]

    builder = TripletBuilder((cells.shape[0], geom.n_faces))
    builder.extend(rows, geom.u1_index[ci + 1, cj], dy)
    builder.extend(rows, geom.u1_index[ci, cj], -dy)
    builder.extend(rows, n1 + geom.u2_index[ci, cj + 1], dx)
    builder.extend(rows, n1 + geom.u2_index[ci, cj], -dx)
    return builder.tocsr()


def assemble_rhs(dofs: MacDofMap, f_S: Optional[Callable] = None,
                 g_S: Optional[Callable] = None, order: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cargas de volumen: ∫_{G_i} f_k por volumen de control y ∫_E g_S por celda.

    Returns:
        (carga de momento sobre las incógnitas de velocidad, carga de masa por celda)
    """
    geom = dofs.geometry
    momentum = np.zeros(dofs.n_velocity)
    if f_S is not None:
        for comp, unknown, vol in ((1, dofs.u1_unknown, geom.u1_volumes),
                                   (2, dofs.u2_unknown, geom.u2_volumes)):
            free = unknown >= 0
            if not free.any():
                continue
            v = vol[free]
            integrals = integrate_rectangles(lambda x, y: f_S(x, y)[comp - 1],
                                             v[:, 0], v[:, 1], v[:, 2], v[:, 3], order)
            momentum[unknown[free]] = integrals

    grid = dofs.grid
    mass = np.zeros(dofs.n_pressure)
    if g_S is not None:
        cells = grid.active_cells()
        ci, cj = cells[:, 0], cells[:, 1]
        mass = integrate_rectangles(g_S, grid.x_coords[ci], grid.x_coords[ci + 1],
                                    grid.y_coords[cj], grid.y_coords[cj + 1], order)
    return momentum, mass


def interface_trace(dofs: MacDofMap) -> Optional[sp.csr_matrix]:
    """
    Extrae el valor de cada DOF normal adyacente a Γ sobre su intervalo de traza
    (filas en el orden de la segmentación, entradas 1 en orientación global).
    """
    interface = dofs.interface
    if interface is None:
        return None
    rows, cols = [], []
    row = 0
    for seg in interface.segments:
        for ci, cj in seg.stokes_cells:
            axis, i, j = face_of_cell_side(int(ci), int(cj), seg.stokes_normal)
            idx = dofs.velocity_index_of_face(axis, i, j)
            if idx < 0:
                raise BoundaryConditionError(f"cara de interfaz sin incógnita en {axis}({i}, {j})")
            rows.append(row)
            cols.append(idx)
            row += 1
    return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(row, dofs.n_velocity))


def _cell_terms(form: _QuadraticForm, dofs: MacDofMap, mu: float):
    geom, grid = dofs.geometry, dofs.grid
    cells = grid.active_cells()
    ci, cj = cells[:, 0], cells[:, 1]
    dx, dy = grid.dx[ci], grid.dy[cj]
    weight = 2.0 * mu * dx * dy

    west, east = geom.u1_index[ci, cj], geom.u1_index[ci + 1, cj]
    (iw, vw), (ie, ve) = _face_slots(dofs, 1, west), _face_slots(dofs, 1, east)
    form.add_batch(weight, np.column_stack([iw, ie]),
                   np.column_stack([-1.0 / dx, 1.0 / dx]), np.column_stack([vw, ve]))

    south, north = geom.u2_index[ci, cj], geom.u2_index[ci, cj + 1]
    (is_, vs), (in_, vn) = _face_slots(dofs, 2, south), _face_slots(dofs, 2, north)
    form.add_batch(weight, np.column_stack([is_, in_]),
                   np.column_stack([-1.0 / dy, 1.0 / dy]), np.column_stack([vs, vn]))


def _vertex_samples(dofs: MacDofMap, component: int):
    """
    Muestras a ambos lados de cada vértice para ∂u1/∂y (component=1) o ∂u2/∂x.

    Returns:
        (idx_menos, val_menos, pos_menos, idx_mas, val_mas, pos_mas), arrays (nx+1, ny+1)
    """
    geom, grid = dofs.geometry, dofs.grid
    nx, ny = grid.shape
    t_kind = dofs.tangential_kind[component]
    t_idx = np.where(t_kind == TANGENTIAL_UNKNOWN, dofs.tangential_index[component], -1)
    t_val = dofs.tangential_value[component]

    if component == 1:
        faces = np.pad(geom.u1_index, ((0, 0), (1, 1)), constant_values=-1)
        minus_face, plus_face = faces[:, 0:ny + 1], faces[:, 1:ny + 2]
        centers = np.concatenate(([np.nan], grid.yc, [np.nan]))
        vertex_pos = np.broadcast_to(grid.y_coords[None, :], (nx + 1, ny + 1))
        minus_pos = np.broadcast_to(centers[None, 0:ny + 1], (nx + 1, ny + 1))
        plus_pos = np.broadcast_to(centers[None, 1:ny + 2], (nx + 1, ny + 1))
        unknown, data = dofs.u1_unknown, dofs.u1_essential
    else:
        faces = np.pad(geom.u2_index, ((1, 1), (0, 0)), constant_values=-1)
        minus_face, plus_face = faces[0:nx + 1, :], faces[1:nx + 2, :]
        centers = np.concatenate(([np.nan], grid.xc, [np.nan]))
        vertex_pos = np.broadcast_to(grid.x_coords[:, None], (nx + 1, ny + 1))
        minus_pos = np.broadcast_to(centers[0:nx + 1, None], (nx + 1, ny + 1))
        plus_pos = np.broadcast_to(centers[1:nx + 2, None], (nx + 1, ny + 1))
        unknown, data = dofs.u2_unknown, dofs.u2_essential

    out = []
    for face, pos in ((minus_face, minus_pos), (plus_face, plus_pos)):
        has = face >= 0
        safe = np.where(has, face, 0)
        idx = np.where(has, unknown[safe], t_idx)
        val = np.where(has, data[safe], t_val)
        where = np.where(has, pos, vertex_pos)
        out.extend([idx, val, where])
    return tuple(out)


def _vertex_terms(form: _QuadraticForm, dofs: MacDofMap, mu: float):
    """Término de corte μ W(V) s(V)² en los vértices que no llevan tracción dada."""
    mask = dofs.vertex_used & ~dofs.vertex_natural_only
    im1, vm1, pm1, ip1, vp1, pp1 = _vertex_samples(dofs, 1)
    im2, vm2, pm2, ip2, vp2, pp2 = _vertex_samples(dofs, 2)
    dist1 = (pp1 - pm1)[mask]
    dist2 = (pp2 - pm2)[mask]
    bad = np.flatnonzero((dist1 <= 0.0) | (dist2 <= 0.0))
    if bad.size:
        i, j = (int(v) for v in np.argwhere(mask)[bad[0]])
        raise GeometryError("volumen escalonado degenerado junto a un vértice", cell=(i, j))

    indices = np.column_stack([im1[mask], ip1[mask], im2[mask], ip2[mask]])
    values = np.column_stack([vm1[mask], vp1[mask], vm2[mask], vp2[mask]])
    coefs = np.column_stack([-1.0 / dist1, 1.0 / dist1, -1.0 / dist2, 1.0 / dist2])
    form.add_batch(mu * dofs.geometry.vertex_weights[mask], indices, coefs, values)


def _interface_edge_terms(form: _QuadraticForm, dofs: MacDofMap, alpha_bjs: AlphaBJS):
    """
    Término BJS α h/2 t² en cada extremo de las aristas de Γ. La velocidad
    tangencial de interfaz sólo entra aquí y en el corte de los vértices.
    """
    grid = dofs.grid
    x, y = grid.x_coords, grid.y_coords
    bjs_w, bjs_i, bjs_v = [], [], []

    for axis, kinds in (("y", dofs.tags.y_kind), ("x", dofs.tags.x_kind)):
        comp = 1 if axis == "y" else 2
        tangent = (1.0, 0.0) if comp == 1 else (0.0, 1.0)
        t_kind, t_idx = dofs.tangential_kind[comp], dofs.tangential_index[comp]
        for i, j in np.argwhere(kinds == EDGE_INTERFACE):
            i, j = int(i), int(j)
            if axis == "y":
                ends = ((i, j), (i + 1, j))
                h = grid.dx[i]
            else:
                ends = ((i, j), (i, j + 1))
                h = grid.dy[j]

            for (vi, vj) in ends:
                if t_kind[vi, vj] == TANGENTIAL_UNKNOWN:
                    idx = int(t_idx[vi, vj])
                    bjs_w.append(_alpha_at(alpha_bjs, x[vi], y[vj], tangent) * 0.5 * h)
                    bjs_i.append([idx])
                    bjs_v.append([0.0])

    if bjs_w:
        form.add_batch(bjs_w, bjs_i, np.ones((len(bjs_w), 1)), bjs_v)


def _traction_loads(dofs: MacDofMap, order: int = 2) -> np.ndarray:
    """Cargas naturales: ∫ T_k en caras normales y corte dado en los vértices."""
    geom, grid = dofs.geometry, dofs.grid
    load = np.zeros(dofs.n_velocity)

    for k in np.flatnonzero(dofs.u1_tag == EDGE_NATURAL):
        i, j = (int(v) for v in geom.u1_faces[k])
        region = dofs.tags.x_region[i, j]
        normal = (int(dofs.tags.x_sign[i, j]), 0)
        pts, wts = interval_rule(grid.y_coords[j], grid.y_coords[j + 1], order)
        load[dofs.u1_unknown[k]] += sum(w * _traction(region, grid.x_coords[i], s, normal)[0]
                                        for s, w in zip(pts[0], wts[0]))
    for k in np.flatnonzero(dofs.u2_tag == EDGE_NATURAL):
        i, j = (int(v) for v in geom.u2_faces[k])
        region = dofs.tags.y_region[i, j]
        normal = (0, int(dofs.tags.y_sign[i, j]))
        pts, wts = interval_rule(grid.x_coords[i], grid.x_coords[i + 1], order)
        load[dofs.u2_unknown[k]] += sum(w * _traction(region, s, grid.y_coords[j], normal)[1]
                                        for s, w in zip(pts[0], wts[0]))

    nx, ny = grid.shape
    for i, j in np.argwhere(dofs.vertex_used & dofs.vertex_natural_only):
        i, j = int(i), int(j)
        xv, yv = grid.x_coords[i], grid.y_coords[j]
        axis, ei, ej = next(e for e in dofs.incident_edges(i, j) if dofs.edge_kind(*e) == EDGE_NATURAL)
        region = dofs.edge_region(axis, ei, ej)
        if axis == "x":
            n1 = int(dofs.tags.x_sign[ei, ej])
            tau = _traction(region, xv, yv, (n1, 0))[1] * n1
        else:
            n2 = int(dofs.tags.y_sign[ei, ej])
            tau = _traction(region, xv, yv, (0, n2))[0] * n2

        # Caras laterales de los volúmenes de u1 (arriba/abajo) y de u2 (izquierda/derecha)
        neighbours = []
        if j - 1 >= 0:
            neighbours.append((1, geom.u1_index[i, j - 1], +1.0))
        if j < ny:
            neighbours.append((1, geom.u1_index[i, j], -1.0))
        if i - 1 >= 0:
            neighbours.append((2, geom.u2_index[i - 1, j], +1.0))
        if i < nx:
            neighbours.append((2, geom.u2_index[i, j], -1.0))
        for comp, face, sign in neighbours:
            if face < 0:
                continue
            unknown = dofs.u1_unknown if comp == 1 else dofs.u2_unknown
            if unknown[face] < 0:
                continue
            vol = geom.u1_volumes[face] if comp == 1 else geom.u2_volumes[face]
            length = vol[1] - vol[0] if comp == 1 else vol[3] - vol[2]
            load[unknown[face]] += sign * length * tau
    return load


def assemble_momentum(geom: StaggeredGeometry, mu: float, alpha_bjs: AlphaBJS,
                      bc: MacBoundaryCondition,
                      interface: Optional[InterfaceSegmentation] = None) -> StokesOperator:
    """
    Ensambla A_S, B_S y el mapa de traza de Stokes.

    Args:
        geom: malla escalonada
        mu: viscosidad (> 0)
        alpha_bjs: coeficiente BJS, constante o función (x, y, tangente)
        bc: condiciones de frontera exteriores
        interface: segmentación de Γ; sin ella no hay aristas de interfaz

    Returns:
        StokesOperator con las cargas de frontera ya separadas

    Raises:
        ParameterError: viscosidad o BJS no positivos/finitos
        BoundaryConditionError: frontera sin condición o con condiciones contradictorias
    """
    if not np.isfinite(mu) or mu <= 0.0:
        raise ParameterError(f"viscosidad inválida: {mu}")
    if not callable(alpha_bjs):
        _alpha_at(alpha_bjs, 0.0, 0.0, (1.0, 0.0))

    dofs = MacDofMap(geom, bc, interface)
    form = _QuadraticForm(dofs.n_velocity)
    _cell_terms(form, dofs, mu)
    _vertex_terms(form, dofs, mu)
    _interface_edge_terms(form, dofs, alpha_bjs)
    A = form.matrix()

    divergence = assemble_divergence(geom, dofs)
    B = -(divergence @ dofs.face_selection()).tocsr()
    mass_bc = divergence @ dofs.essential_faces()
    momentum_bc = form.lift + _traction_loads(dofs)

    has_natural = dofs.tags.has(EDGE_NATURAL)
    logger.info(
        f"Stokes MAC: {dofs.n_velocity} velocidades, {dofs.n_pressure} presiones, "
        f"nnz(A)={A.nnz}, frontera natural={'sí' if has_natural else 'no'}")
    return StokesOperator(
        dofs=dofs,
        A=A,
        B=B,
        divergence=divergence,
        trace_map=interface_trace(dofs),
        momentum_bc=momentum_bc,
        mass_bc=mass_bc,
        mu=mu,
        alpha_bjs=alpha_bjs,
        has_natural=has_natural,
    )
