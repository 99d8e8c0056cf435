"""
geometry/grid.py - Mallas tensoriales rectilíneas con máscara de celdas activas.

Una TensorGrid guarda los nodos en x e y más una máscara booleana de celdas
activas, indexada como active[i, j] (i a lo largo de x, j a lo largo de y).
Así se representa el canal con obstáculo del Caso 2 sin mallas no
estructuradas. El refinamiento es por bisección de cada celda.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from utils.errors import GeometryError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TensorGrid:
    """Malla producto x_0 < ... < x_nx, y_0 < ... < y_ny con máscara de actividad."""

    x_coords: np.ndarray
    y_coords: np.ndarray
    active: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.array(self.x_coords, dtype=float)
        y = np.array(self.y_coords, dtype=float)
        for name, coords in (("x", x), ("y", y)):
            if coords.ndim != 1 or coords.size < 2:
                raise GeometryError(f"{name}_coords necesita al menos dos nodos")
            if not np.all(np.isfinite(coords)):
                raise GeometryError(f"{name}_coords contiene valores no finitos")
            if np.any(np.diff(coords) <= 0.0):
                raise GeometryError(f"{name}_coords no es estrictamente creciente")

        shape = (x.size - 1, y.size - 1)
        if self.active is None:
            active = np.ones(shape, dtype=bool)
        else:
            active = np.array(self.active, dtype=bool)
            if active.shape != shape:
                raise GeometryError(f"máscara con forma {active.shape}, se esperaba {shape}")
        if not active.any():
            raise GeometryError("la malla no tiene celdas activas")

        # Conectividad por aristas (estructura en cruz por defecto)
        _, components = ndimage.label(active)
        if components != 1:
            raise GeometryError(f"la región activa tiene {components} componentes conexas")

        for arr in (x, y, active):
            arr.setflags(write=False)
        object.__setattr__(self, "x_coords", x)
        object.__setattr__(self, "y_coords", y)
        object.__setattr__(self, "active", active)

    @property
    def nx(self) -> int:
        return self.x_coords.size - 1

    @property
    def ny(self) -> int:
        return self.y_coords.size - 1

    @property
    def shape(self) -> Tuple[int, int]:
        return self.nx, self.ny

    @property
    def dx(self) -> np.ndarray:
        return np.diff(self.x_coords)

    @property
    def dy(self) -> np.ndarray:
        return np.diff(self.y_coords)

    @property
    def xc(self) -> np.ndarray:
        return 0.5 * (self.x_coords[:-1] + self.x_coords[1:])

    @property
    def yc(self) -> np.ndarray:
        return 0.5 * (self.y_coords[:-1] + self.y_coords[1:])

    @property
    def cell_areas(self) -> np.ndarray:
        """Áreas (nx, ny); las celdas inactivas también tienen valor."""
        return np.outer(self.dx, self.dy)

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    @property
    def active_area(self) -> float:
        return float(self.cell_areas[self.active].sum())

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        return (float(self.x_coords[0]), float(self.x_coords[-1]),
                float(self.y_coords[0]), float(self.y_coords[-1]))

    @property
    def h(self) -> float:
        """Tamaño de malla máximo."""
        return float(max(self.dx.max(), self.dy.max()))

    def active_cells(self) -> np.ndarray:
        """Índices (i, j) de las celdas activas en orden C, forma (n_active, 2)."""
        return np.argwhere(self.active)

    def refine(self) -> "TensorGrid":
        """Bisección de todas las celdas; la máscara se hereda."""
        return TensorGrid(
            _bisect(self.x_coords),
            _bisect(self.y_coords),
            np.repeat(np.repeat(self.active, 2, axis=0), 2, axis=1),
        )

    def refined(self, levels: int) -> "TensorGrid":
        grid = self
        for _ in range(levels):
            grid = grid.refine()
        return grid

    def describe(self) -> str:
        return (f"{self.nx}x{self.ny} celdas ({self.n_active} activas), "
                f"h={self.h:.4g}, dominio=({', '.join(f'{v:.4g}' for v in self.bounds)})")


def _bisect(coords: np.ndarray) -> np.ndarray:
    out = np.empty(2 * coords.size - 1)
    out[0::2] = coords
    out[1::2] = 0.5 * (coords[:-1] + coords[1:])
    return out


def uniform_grid(x0: float, x1: float, nx: int, y0: float, y1: float, ny: int,
                 active: Optional[np.ndarray] = None) -> TensorGrid:
    if nx < 1 or ny < 1:
        raise GeometryError(f"número de celdas inválido: {nx}x{ny}")
    return TensorGrid(np.linspace(x0, x1, nx + 1), np.linspace(y0, y1, ny + 1), active)


def graded_coordinates(a: float, b: float, n: int, ratio: float = 1.0,
                       toward: str = "end") -> np.ndarray:
    """
    Nodos de una progresión geométrica en [a, b].

    Args:
        a, b: extremos del intervalo
        n: número de celdas
        ratio: cociente entre celdas consecutivas (>= 1)
        toward: "end" o "start", extremo donde se concentran las celdas pequeñas

    Returns:
        Array de n + 1 nodos con extremos exactos
    """
    if n < 1 or b <= a:
        raise GeometryError(f"intervalo graduado inválido: [{a}, {b}] con {n} celdas")
    if ratio < 1.0:
        raise GeometryError(f"ratio de graduación debe ser >= 1 (recibido {ratio})")
    if toward not in ("end", "start"):
        raise GeometryError(f"toward debe ser 'end' o 'start' (recibido {toward!r})")

    widths = ratio ** np.arange(n, dtype=float)
    if toward == "end":
        widths = widths[::-1]
    widths *= (b - a) / widths.sum()
    coords = a + np.concatenate(([0.0], np.cumsum(widths)))
    coords[-1] = b
    return coords


def piecewise_coordinates(breaks: Sequence[float], counts: Sequence[int],
                          ratios: Optional[Sequence[float]] = None,
                          towards: Optional[Sequence[str]] = None) -> np.ndarray:
    """Concatena tramos graduados de modo que cada punto de quiebre sea un nodo."""
    if len(breaks) != len(counts) + 1:
        raise GeometryError("breaks debe tener un elemento más que counts")
    ratios = ratios or [1.0] * len(counts)
    towards = towards or ["end"] * len(counts)
    pieces = [np.array([breaks[0]], dtype=float)]
    for k, n in enumerate(counts):
        coords = graded_coordinates(breaks[k], breaks[k + 1], n, ratios[k], towards[k])
        pieces.append(coords[1:])
    return np.concatenate(pieces)
