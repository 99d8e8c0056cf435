"""
model/boundary.py - Clasificación de las aristas de frontera por tipo de condición.

Las condiciones exteriores se describen con BoundaryRegion: un predicado sobre
(x, y, normal exterior) más las funciones de datos. Las aristas de interfaz
se detectan a partir de la InterfaceSegmentation y nunca se asignan a mano.
Stokes y Darcy comparten esta clasificación porque ambos colocan sus DOFs de
velocidad normal en las aristas de una malla tensorial.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from geometry.grid import TensorGrid
from geometry.interface import InterfaceSegmentation
from geometry.staggered import padded_activity
from utils.errors import BoundaryConditionError

logger = logging.getLogger(__name__)

Normal = Tuple[int, int]

# Códigos de arista
EDGE_ABSENT = -1
EDGE_INTERIOR = 0
EDGE_ESSENTIAL = 1
EDGE_NATURAL = 2
EDGE_INTERFACE = 3
EDGE_UNASSIGNED = 4

SIDE_NORMALS = {
    "left": (-1, 0),
    "right": (1, 0),
    "bottom": (0, -1),
    "top": (0, 1),
}


class BoundaryKind(str, Enum):
    ESSENTIAL = "essential"
    NATURAL = "natural"
    INTERFACE = "interface"


_KIND_CODES = {
    BoundaryKind.ESSENTIAL: EDGE_ESSENTIAL,
    BoundaryKind.NATURAL: EDGE_NATURAL,
}


def sides(*names: str) -> Callable[[float, float, Normal], bool]:
    """Predicado que selecciona las aristas cuya normal exterior apunta a esos lados."""
    unknown = [n for n in names if n not in SIDE_NORMALS]
    if unknown:
        raise BoundaryConditionError(f"lados desconocidos: {unknown}")
    normals = {SIDE_NORMALS[n] for n in names}
    return lambda x, y, normal: tuple(normal) in normals


def everywhere(x: float, y: float, normal: Normal) -> bool:
    return True


@dataclass(frozen=True)
class BoundaryRegion:
    """
    Tramo de frontera exterior con su condición.

    Stokes esencial usa `velocity(x, y) -> (u1, u2)`; Stokes natural usa
    `traction(x, y, normal) -> (T1, T2)` con T = σ n. Darcy natural usa
    `pressure(x, y)` y Darcy esencial `flux(x, y)` (u·n, cero si se omite).
    """

    kind: BoundaryKind
    where: Callable[[float, float, Normal], bool]
    velocity: Optional[Callable] = None
    traction: Optional[Callable] = None
    pressure: Optional[Callable] = None
    flux: Optional[Callable] = None
    alpha_bjs: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        kind = BoundaryKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind == BoundaryKind.INTERFACE:
            raise BoundaryConditionError(
                "las aristas de interfaz se detectan desde la geometría; no se asignan como región")
        if self.alpha_bjs is not None:
            raise BoundaryConditionError(
                f"coeficiente BJS en el tramo no interfacial '{self.name or kind.value}'")
        if kind == BoundaryKind.ESSENTIAL and (self.traction is not None or self.pressure is not None):
            raise BoundaryConditionError(f"región esencial '{self.name}' con datos naturales")
        if kind == BoundaryKind.NATURAL and (self.velocity is not None or self.flux is not None):
            raise BoundaryConditionError(f"región natural '{self.name}' con datos esenciales")


@dataclass(frozen=True, eq=False)
class EdgeTags:
    """
    Tipo de cada arista (códigos EDGE_*) en la disposición de caras de la malla:
    x_kind (nx+1, ny) para aristas verticales, y_kind (nx, ny+1) para horizontales.
    x_sign/y_sign guardan el signo de la normal exterior en las aristas de frontera
    (0 en el interior); x_region/y_region la BoundaryRegion asignada.
    """

    grid: TensorGrid
    x_kind: np.ndarray
    y_kind: np.ndarray
    x_sign: np.ndarray
    y_sign: np.ndarray
    x_region: np.ndarray
    y_region: np.ndarray

    def count(self, code: int) -> int:
        return int(np.sum(self.x_kind == code) + np.sum(self.y_kind == code))

    def has(self, code: int) -> bool:
        return self.count(code) > 0


def interface_faces(interface: Optional[InterfaceSegmentation], side: str):
    """Índices de cara ('x'|'y', i, j) de las aristas de interfaz de un subdominio."""
    faces = set()
    if interface is None:
        return faces
    for seg in interface.segments:
        cells = seg.stokes_cells if side == "stokes" else seg.darcy_cells
        normal = seg.stokes_normal if side == "stokes" else seg.darcy_normal
        for ci, cj in cells:
            faces.add(face_of_cell_side(int(ci), int(cj), normal))
    return faces


def face_of_cell_side(ci: int, cj: int, normal: Normal) -> Tuple[str, int, int]:
    """Cara de la celda (ci, cj) en la dirección de `normal`."""
    if normal == (1, 0):
        return ("x", ci + 1, cj)
    if normal == (-1, 0):
        return ("x", ci, cj)
    if normal == (0, 1):
        return ("y", ci, cj + 1)
    if normal == (0, -1):
        return ("y", ci, cj)
    raise BoundaryConditionError(f"normal no alineada con los ejes: {normal}")


def _match_region(regions: Sequence[BoundaryRegion], x: float, y: float,
                  normal: Normal) -> Optional[BoundaryRegion]:
    matches = [r for r in regions if r.where(x, y, normal)]
    if not matches:
        return None
    kinds = {r.kind for r in matches}
    if len(kinds) > 1:
        raise BoundaryConditionError(
            f"condiciones esencial y natural sobre el mismo tramo en ({x:.6g}, {y:.6g}), normal {normal}")
    return matches[0]


def classify_edges(grid: TensorGrid, regions: Optional[Sequence[BoundaryRegion]],
                   interface: Optional[InterfaceSegmentation] = None,
                   side: str = "stokes") -> EdgeTags:
    """
    Asigna un tipo a cada arista de la malla.

    Args:
        grid: malla del subdominio
        regions: regiones exteriores; None deja las aristas exteriores como EDGE_UNASSIGNED
        interface: segmentación de Γ (opcional)
        side: "stokes" o "darcy"

    Raises:
        BoundaryConditionError: si una arista exterior no tiene condición
    """
    act = padded_activity(grid)
    nx, ny = grid.shape
    on_gamma = interface_faces(interface, side)

    left, right = act[0:nx + 1, 1:ny + 1], act[1:nx + 2, 1:ny + 1]
    below, above = act[1:nx + 1, 0:ny + 1], act[1:nx + 1, 1:ny + 2]

    x_kind = np.where(left | right, EDGE_INTERIOR, EDGE_ABSENT).astype(np.int8)
    y_kind = np.where(below | above, EDGE_INTERIOR, EDGE_ABSENT).astype(np.int8)
    x_sign = np.where(left & ~right, 1, np.where(right & ~left, -1, 0)).astype(np.int8)
    y_sign = np.where(below & ~above, 1, np.where(above & ~below, -1, 0)).astype(np.int8)
    x_region = np.full(x_kind.shape, None, dtype=object)
    y_region = np.full(y_kind.shape, None, dtype=object)

    for axis, kind, sign, region_arr in (("x", x_kind, x_sign, x_region), ("y", y_kind, y_sign, y_region)):
        for i, j in np.argwhere(sign != 0):
            i, j = int(i), int(j)
            if (axis, i, j) in on_gamma:
                kind[i, j] = EDGE_INTERFACE
                continue
            if axis == "x":
                x, y, normal = grid.x_coords[i], grid.yc[j], (int(sign[i, j]), 0)
            else:
                x, y, normal = grid.xc[i], grid.y_coords[j], (0, int(sign[i, j]))
            if regions is None:
                kind[i, j] = EDGE_UNASSIGNED
                continue
            region = _match_region(regions, float(x), float(y), normal)
            if region is None:
                raise BoundaryConditionError(
                    f"arista de frontera sin condición en ({x:.6g}, {y:.6g}), normal {normal} [{side}]")
            kind[i, j] = _KIND_CODES[region.kind]
            region_arr[i, j] = region

    for arr in (x_kind, y_kind, x_sign, y_sign):
        arr.setflags(write=False)
    return EdgeTags(grid, x_kind, y_kind, x_sign, y_sign, x_region, y_region)
