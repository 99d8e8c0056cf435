"""
geometry/staggered.py - Mallas escalonadas (MAC) derivadas de una TensorGrid.

Cada cara vertical existente lleva un DOF de u1 en su punto medio y cada cara
horizontal un DOF de u2. Una cara existe si toca al menos una celda activa.
Los volúmenes de control G_i son completos en caras interiores y medios en
caras de frontera; entre todos embaldosan la región activa.
"""

import logging
from dataclasses import dataclass

import numpy as np

from geometry.grid import TensorGrid
from utils.errors import GeometryError

logger = logging.getLogger(__name__)


def padded_activity(grid: TensorGrid) -> np.ndarray:
    """Máscara rodeada por una capa de celdas inactivas, forma (nx+2, ny+2)."""
    return np.pad(grid.active, 1, mode="constant", constant_values=False)


def vertex_neighbours(grid: TensorGrid):
    """Actividad de las celdas SW, SE, NW, NE de cada vértice, arrays (nx+1, ny+1)."""
    act = padded_activity(grid)
    nx, ny = grid.shape
    sw = act[0:nx + 1, 0:ny + 1]
    se = act[1:nx + 2, 0:ny + 1]
    nw = act[0:nx + 1, 1:ny + 2]
    ne = act[1:nx + 2, 1:ny + 2]
    return sw, se, nw, ne


@dataclass(frozen=True, eq=False)
class StaggeredGeometry:
    """
    Numeración de caras y volúmenes de control de la malla MAC.

    u1_index[i, j] es el DOF de la cara vertical en (x_i, yc_j) o -1 si no existe;
    u2_index[i, j] el de la cara horizontal en (xc_i, y_j). Los volúmenes se
    guardan como rectángulos [x0, x1, y0, y1].
    """

    primal: TensorGrid
    u1_index: np.ndarray
    u2_index: np.ndarray
    u1_faces: np.ndarray
    u2_faces: np.ndarray
    u1_positions: np.ndarray
    u2_positions: np.ndarray
    u1_volumes: np.ndarray
    u2_volumes: np.ndarray
    u1_boundary: np.ndarray
    u2_boundary: np.ndarray
    vertex_weights: np.ndarray

    @property
    def n_u1(self) -> int:
        return self.u1_faces.shape[0]

    @property
    def n_u2(self) -> int:
        return self.u2_faces.shape[0]

    @property
    def n_faces(self) -> int:
        return self.n_u1 + self.n_u2

    def volume_areas(self, component: int) -> np.ndarray:
        vol = self.u1_volumes if component == 1 else self.u2_volumes
        return (vol[:, 1] - vol[:, 0]) * (vol[:, 3] - vol[:, 2])

    @property
    def staggered_u1(self) -> np.ndarray:
        """Vértices de la malla de u1: DOFs más los vértices de frontera horizontal."""
        return np.vstack([self.u1_positions, self._tangential_vertices(component=1)])

    @property
    def staggered_u2(self) -> np.ndarray:
        return np.vstack([self.u2_positions, self._tangential_vertices(component=2)])

    def _tangential_vertices(self, component: int) -> np.ndarray:
        grid = self.primal
        nx, ny = grid.shape
        used = self.vertex_weights > 0.0
        if component == 1:
            faces = np.pad(self.u1_index >= 0, ((0, 0), (1, 1)), constant_values=False)
            missing = ~faces[:, 0:ny + 1] | ~faces[:, 1:ny + 2]
        else:
            faces = np.pad(self.u2_index >= 0, ((1, 1), (0, 0)), constant_values=False)
            missing = ~faces[0:nx + 1, :] | ~faces[1:nx + 2, :]
        ii, jj = np.nonzero(used & missing)
        return np.column_stack([grid.x_coords[ii], grid.y_coords[jj]])


def build_staggered(primal: TensorGrid) -> StaggeredGeometry:
    """
    Construye las mallas escalonadas de una malla primal.

    Raises:
        GeometryError: si dos celdas activas sólo se tocan por un vértice,
            lo que deja volúmenes escalonados degenerados.
    """
    nx, ny = primal.shape
    sw, se, nw, ne = vertex_neighbours(primal)
    checker = (sw & ne & ~se & ~nw) | (se & nw & ~sw & ~ne)
    if checker.any():
        i, j = (int(v) for v in np.argwhere(checker)[0])
        cell = (i - 1, j - 1) if sw[i, j] else (i, j - 1)
        raise GeometryError(f"celdas activas unidas sólo por el vértice ({i}, {j})", cell=cell)

    act = padded_activity(primal)
    dx_pad = np.pad(primal.dx, 1)
    dy_pad = np.pad(primal.dy, 1)

    # Caras verticales (u1): celdas izquierda (i-1, j) y derecha (i, j)
    left = act[0:nx + 1, 1:ny + 1]
    right = act[1:nx + 2, 1:ny + 1]
    u1_exists = left | right
    u1_index = np.full((nx + 1, ny), -1, dtype=np.int64)
    u1_faces = np.argwhere(u1_exists)
    u1_index[u1_exists] = np.arange(u1_faces.shape[0])
    fi, fj = u1_faces[:, 0], u1_faces[:, 1]
    xf = primal.x_coords[fi]
    u1_volumes = np.column_stack([
        np.where(left[fi, fj], xf - 0.5 * dx_pad[fi], xf),
        np.where(right[fi, fj], xf + 0.5 * dx_pad[fi + 1], xf),
        primal.y_coords[fj],
        primal.y_coords[fj + 1],
    ])
    u1_positions = np.column_stack([xf, primal.yc[fj]])
    u1_boundary = left[fi, fj] ^ right[fi, fj]

    # Caras horizontales (u2): celdas inferior (i, j-1) y superior (i, j)
    below = act[1:nx + 1, 0:ny + 1]
    above = act[1:nx + 1, 1:ny + 2]
    u2_exists = below | above
    u2_index = np.full((nx, ny + 1), -1, dtype=np.int64)
    u2_faces = np.argwhere(u2_exists)
    u2_index[u2_exists] = np.arange(u2_faces.shape[0])
    gi, gj = u2_faces[:, 0], u2_faces[:, 1]
    yf = primal.y_coords[gj]
    u2_volumes = np.column_stack([
        primal.x_coords[gi],
        primal.x_coords[gi + 1],
        np.where(below[gi, gj], yf - 0.5 * dy_pad[gj], yf),
        np.where(above[gi, gj], yf + 0.5 * dy_pad[gj + 1], yf),
    ])
    u2_positions = np.column_stack([primal.xc[gi], yf])
    u2_boundary = below[gi, gj] ^ above[gi, gj]

    # Área dual de cada vértice: suma de los cuartos de celda activos que lo rodean
    quarter = np.pad(np.where(primal.active, 0.25 * primal.cell_areas, 0.0), 1)
    vertex_weights = (quarter[0:nx + 1, 0:ny + 1] + quarter[1:nx + 2, 0:ny + 1]
                      + quarter[0:nx + 1, 1:ny + 2] + quarter[1:nx + 2, 1:ny + 2])

    for arr in (u1_index, u2_index, u1_faces, u2_faces, u1_positions, u2_positions,
                u1_volumes, u2_volumes, u1_boundary, u2_boundary, vertex_weights):
        arr.setflags(write=False)

    logger.debug(f"Malla escalonada: {u1_faces.shape[0]} caras u1, {u2_faces.shape[0]} caras u2")
    return StaggeredGeometry(
        primal=primal,
        u1_index=u1_index,
        u2_index=u2_index,
        u1_faces=u1_faces,
        u2_faces=u2_faces,
        u1_positions=u1_positions,
        u2_positions=u2_positions,
        u1_volumes=u1_volumes,
        u2_volumes=u2_volumes,
        u1_boundary=u1_boundary,
        u2_boundary=u2_boundary,
        vertex_weights=vertex_weights,
    )
