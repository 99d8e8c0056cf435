"""
geometry/interface.py - Descomposición de la interfaz Γ = ∂Ω_S ∩ ∂Ω_D.

Γ se reconstruye a partir de las aristas de frontera de ambas mallas: en cada
recta x = c (o y = c) se intersecan las aristas de Stokes con normal n y las
de Darcy con normal -n. Las corridas contiguas forman segmentos horizontales
(Γ¹) o verticales (Γ²). Cada segmento guarda la traza de Stokes, la traza de
Darcy y la partición del mortero, construida de forma independiente.
"""

import logging
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from geometry.grid import TensorGrid
from geometry.staggered import padded_activity
from utils.errors import GeometryError, MortarError

logger = logging.getLogger(__name__)

DEDUP_RTOL = float(os.getenv("DEDUP_RTOL", "1e-13"))

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


@dataclass(frozen=True)
class MortarSpec:
    """
    Grado del mortero (0 = P0 discontinuo, 1 = P1 continuo por segmento) y
    número de elementos: None (derivado de la traza de Darcy), un total que se
    reparte por longitud, o una lista por segmento.
    """

    degree: int = 0
    elements: Union[None, int, Tuple[int, ...]] = None

    def __post_init__(self):
        if self.degree not in (0, 1):
            raise MortarError(f"grado de mortero no soportado: {self.degree}")
        if isinstance(self.elements, (list, tuple)):
            object.__setattr__(self, "elements", tuple(int(n) for n in self.elements))
            if any(n < 1 for n in self.elements):
                raise MortarError("cada segmento necesita al menos un elemento de mortero")
        elif self.elements is not None and int(self.elements) < 1:
            raise MortarError(f"número de elementos de mortero inválido: {self.elements}")

    def refined(self, levels: int) -> "MortarSpec":
        """Mismo mortero con los elementos multiplicados por 2**levels."""
        factor = 2 ** levels
        if self.elements is None:
            return self
        if isinstance(self.elements, tuple):
            return MortarSpec(self.degree, tuple(n * factor for n in self.elements))
        return MortarSpec(self.degree, int(self.elements) * factor)

    @property
    def label(self) -> str:
        return f"p{self.degree}"


@dataclass(frozen=True, eq=False)
class InterfaceSegment:
    """
    Segmento recto de Γ parametrizado por s ∈ [start, end] (x si es horizontal,
    y si es vertical). Las trazas son particiones 1D; *_cells son las celdas
    adyacentes (índices de su propia malla) de cada intervalo de traza.
    """

    orientation: str
    level: float
    start: float
    end: float
    stokes_normal: Tuple[int, int]
    stokes_trace: np.ndarray
    stokes_cells: np.ndarray
    darcy_trace: np.ndarray
    darcy_cells: np.ndarray
    mortar_partition: np.ndarray

    @property
    def length(self) -> float:
        return self.end - self.start

    @property
    def darcy_normal(self) -> Tuple[int, int]:
        return (-self.stokes_normal[0], -self.stokes_normal[1])

    @property
    def tangent(self) -> Tuple[float, float]:
        return (1.0, 0.0) if self.orientation == HORIZONTAL else (0.0, 1.0)

    @property
    def stokes_sign(self) -> int:
        """n_S · g, con g = +e2 en segmentos horizontales y +e1 en verticales."""
        return self.stokes_normal[1] if self.orientation == HORIZONTAL else self.stokes_normal[0]

    @property
    def darcy_sign(self) -> int:
        return -self.stokes_sign

    def points(self, s) -> Tuple[np.ndarray, np.ndarray]:
        """Coordenadas (x, y) de los parámetros s."""
        s = np.asarray(s, dtype=float)
        fixed = np.full_like(s, self.level)
        return (s, fixed) if self.orientation == HORIZONTAL else (fixed, s)

    def merged_breakpoints(self, rtol: float = DEDUP_RTOL) -> np.ndarray:
        """Unión ordenada de las tres particiones, sin puntos duplicados."""
        raw = np.sort(np.concatenate([self.stokes_trace, self.darcy_trace, self.mortar_partition]))
        tol = rtol * self.length
        keep = np.concatenate(([True], np.diff(raw) > tol))
        merged = raw[keep]
        merged[0], merged[-1] = self.start, self.end
        if np.any(np.diff(merged) <= 0.0):
            raise MortarError(f"subintervalo de longitud nula en el segmento {self.describe()}")
        return merged

    def describe(self) -> str:
        axis = "y" if self.orientation == HORIZONTAL else "x"
        return f"{self.orientation} {axis}={self.level:.6g} s∈[{self.start:.6g}, {self.end:.6g}]"


@dataclass(frozen=True, eq=False)
class InterfaceSegmentation:
    segments: Tuple[InterfaceSegment, ...]
    mortar_spec: MortarSpec

    @property
    def total_length(self) -> float:
        return float(sum(seg.length for seg in self.segments))

    @property
    def n_stokes_trace(self) -> int:
        return sum(seg.stokes_cells.shape[0] for seg in self.segments)

    @property
    def n_darcy_trace(self) -> int:
        return sum(seg.darcy_cells.shape[0] for seg in self.segments)

    def stokes_offsets(self) -> np.ndarray:
        counts = [seg.stokes_cells.shape[0] for seg in self.segments]
        return np.concatenate(([0], np.cumsum(counts))).astype(np.int64)

    def darcy_offsets(self) -> np.ndarray:
        counts = [seg.darcy_cells.shape[0] for seg in self.segments]
        return np.concatenate(([0], np.cumsum(counts))).astype(np.int64)

    def trace_lengths(self, side: str) -> np.ndarray:
        parts = [np.diff(seg.stokes_trace if side == "stokes" else seg.darcy_trace)
                 for seg in self.segments]
        return np.concatenate(parts)

    def trace_signs(self, side: str) -> np.ndarray:
        """Signo n·g de cada intervalo de traza (orientación global de los DOFs)."""
        parts = []
        for seg in self.segments:
            if side == "stokes":
                parts.append(np.full(seg.stokes_cells.shape[0], seg.stokes_sign, dtype=float))
            else:
                parts.append(np.full(seg.darcy_cells.shape[0], seg.darcy_sign, dtype=float))
        return np.concatenate(parts)

    def with_mortar(self, mortar_spec: MortarSpec) -> "InterfaceSegmentation":
        counts = _mortar_counts(self.segments, mortar_spec)
        segments = tuple(
            _replace_partition(seg, _mortar_partition(seg, n, mortar_spec))
            for seg, n in zip(self.segments, counts)
        )
        return InterfaceSegmentation(segments, mortar_spec)


@dataclass
class _BoundaryEdge:
    start: float
    end: float
    cell: Tuple[int, int]


def boundary_edges(grid: TensorGrid) -> Dict[Tuple[str, float, Tuple[int, int]], List[_BoundaryEdge]]:
    """
    Aristas de frontera de la región activa agrupadas por recta y normal exterior.

    Returns:
        dict (orientación, coordenada fija, normal) -> lista de aristas
    """
    act = padded_activity(grid)
    nx, ny = grid.shape
    lines: Dict[Tuple[str, float, Tuple[int, int]], List[_BoundaryEdge]] = defaultdict(list)

    left = act[0:nx + 1, 1:ny + 1]
    right = act[1:nx + 2, 1:ny + 1]
    for i, j in np.argwhere(left ^ right):
        if left[i, j]:
            normal, cell = (1, 0), (int(i) - 1, int(j))
        else:
            normal, cell = (-1, 0), (int(i), int(j))
        key = (VERTICAL, float(grid.x_coords[i]), normal)
        lines[key].append(_BoundaryEdge(grid.y_coords[j], grid.y_coords[j + 1], cell))

    below = act[1:nx + 1, 0:ny + 1]
    above = act[1:nx + 1, 1:ny + 2]
    for i, j in np.argwhere(below ^ above):
        if below[i, j]:
            normal, cell = (0, 1), (int(i), int(j) - 1)
        else:
            normal, cell = (0, -1), (int(i), int(j))
        key = (HORIZONTAL, float(grid.y_coords[j]), normal)
        lines[key].append(_BoundaryEdge(grid.x_coords[i], grid.x_coords[i + 1], cell))

    for edges in lines.values():
        edges.sort(key=lambda e: e.start)
    return lines


def _overlap(edge: _BoundaryEdge, others: Sequence[_BoundaryEdge]) -> float:
    total = 0.0
    for other in others:
        total += max(0.0, min(edge.end, other.end) - max(edge.start, other.start))
    return total


def _covered(edges: Sequence[_BoundaryEdge], others: Sequence[_BoundaryEdge], tol: float,
             side: str) -> List[_BoundaryEdge]:
    """Aristas totalmente cubiertas por `others`; un solape parcial es un error."""
    covered = []
    for edge in edges:
        overlap = _overlap(edge, others)
        if overlap <= tol:
            continue
        if overlap < (edge.end - edge.start) - tol:
            raise GeometryError(
                f"la arista {side} [{edge.start:.6g}, {edge.end:.6g}] sólo toca parcialmente "
                f"la frontera del otro subdominio", cell=edge.cell)
        covered.append(edge)
    return covered


def _runs(edges: List[_BoundaryEdge], tol: float) -> List[List[_BoundaryEdge]]:
    runs: List[List[_BoundaryEdge]] = []
    for edge in edges:
        if runs and abs(edge.start - runs[-1][-1].end) <= tol:
            runs[-1].append(edge)
        else:
            runs.append([edge])
    return runs


def _mortar_counts(segments: Sequence[InterfaceSegment], spec: MortarSpec) -> List[int]:
    if spec.elements is None:
        n_darcy = [seg.darcy_cells.shape[0] for seg in segments]
        if spec.degree == 0:
            return n_darcy
        return [max(1, n - 1) for n in n_darcy]
    if isinstance(spec.elements, tuple):
        if len(spec.elements) != len(segments):
            raise MortarError(
                f"se dieron {len(spec.elements)} recuentos de mortero para {len(segments)} segmentos")
        return list(spec.elements)
    total_length = sum(seg.length for seg in segments)
    return [max(1, int(round(spec.elements * seg.length / total_length))) for seg in segments]


def _mortar_partition(segment: InterfaceSegment, count: int, spec: MortarSpec) -> np.ndarray:
    if spec.elements is None and spec.degree == 0:
        return segment.darcy_trace.copy()
    return np.linspace(segment.start, segment.end, count + 1)


def _replace_partition(segment: InterfaceSegment, partition: np.ndarray) -> InterfaceSegment:
    partition.setflags(write=False)
    return InterfaceSegment(
        orientation=segment.orientation,
        level=segment.level,
        start=segment.start,
        end=segment.end,
        stokes_normal=segment.stokes_normal,
        stokes_trace=segment.stokes_trace,
        stokes_cells=segment.stokes_cells,
        darcy_trace=segment.darcy_trace,
        darcy_cells=segment.darcy_cells,
        mortar_partition=partition,
    )


def _trace(run: Sequence[_BoundaryEdge]) -> Tuple[np.ndarray, np.ndarray]:
    breaks = np.array([run[0].start] + [e.end for e in run], dtype=float)
    cells = np.array([e.cell for e in run], dtype=np.int64).reshape(-1, 2)
    return breaks, cells


def build_interface(stokes: TensorGrid, darcy: TensorGrid,
                    mortar_spec: Optional[MortarSpec] = None) -> InterfaceSegmentation:
    """
    Extrae Γ y sus particiones a partir de las dos mallas.

    Args:
        stokes: malla del subdominio de Stokes
        darcy: malla del subdominio de Darcy
        mortar_spec: grado y número de elementos del mortero

    Returns:
        InterfaceSegmentation con los segmentos ordenados por su punto medio (x, luego y)

    Raises:
        GeometryError: si las fronteras sólo se tocan en un conjunto de medida nula
            o si una arista toca la otra frontera de forma parcial
    """
    mortar_spec = mortar_spec or MortarSpec()
    extent = max(stokes.x_coords[-1] - stokes.x_coords[0], stokes.y_coords[-1] - stokes.y_coords[0],
                 darcy.x_coords[-1] - darcy.x_coords[0], darcy.y_coords[-1] - darcy.y_coords[0])
    tol = 1e-12 * extent

    stokes_lines = boundary_edges(stokes)
    darcy_lines = boundary_edges(darcy)

    raw_segments: List[InterfaceSegment] = []
    for (orientation, coord, normal), s_edges in stokes_lines.items():
        opposite = (-normal[0], -normal[1])
        d_edges: List[_BoundaryEdge] = []
        for (d_orient, d_coord, d_normal), edges in darcy_lines.items():
            if d_orient == orientation and d_normal == opposite and abs(d_coord - coord) <= tol:
                d_edges.extend(edges)
        if not d_edges:
            continue
        d_edges.sort(key=lambda e: e.start)

        s_cov = _covered(s_edges, d_edges, tol, "de Stokes")
        d_cov = _covered(d_edges, s_edges, tol, "de Darcy")
        for s_run in _runs(s_cov, tol):
            start, end = s_run[0].start, s_run[-1].end
            d_run = [e for e in d_cov if e.start >= start - tol and e.end <= end + tol]
            if (not d_run or abs(d_run[0].start - start) > tol or abs(d_run[-1].end - end) > tol
                    or any(abs(a.end - b.start) > tol for a, b in zip(d_run[:-1], d_run[1:]))):
                raise GeometryError(
                    f"las trazas de Stokes y Darcy no cubren el mismo tramo en "
                    f"{orientation} {coord:.6g} [{start:.6g}, {end:.6g}]")
            s_breaks, s_cells = _trace(s_run)
            d_breaks, d_cells = _trace(d_run)
            # Las trazas comparten extremos exactos
            d_breaks[0], d_breaks[-1] = s_breaks[0], s_breaks[-1]
            for arr in (s_breaks, s_cells, d_breaks, d_cells):
                arr.setflags(write=False)
            raw_segments.append(InterfaceSegment(
                orientation=orientation,
                level=coord,
                start=float(s_breaks[0]),
                end=float(s_breaks[-1]),
                stokes_normal=normal,
                stokes_trace=s_breaks,
                stokes_cells=s_cells,
                darcy_trace=d_breaks,
                darcy_cells=d_cells,
                mortar_partition=s_breaks,
            ))

    if not raw_segments:
        raise GeometryError("interfaz vacía: las fronteras no comparten ningún tramo de medida positiva")

    def _midpoint(seg: InterfaceSegment) -> Tuple[float, float]:
        x, y = seg.points(np.array([0.5 * (seg.start + seg.end)]))
        return float(x[0]), float(y[0])

    raw_segments.sort(key=_midpoint)
    segmentation = InterfaceSegmentation(tuple(raw_segments), mortar_spec).with_mortar(mortar_spec)
    logger.info(
        f"Interfaz: {len(segmentation.segments)} segmento(s), longitud {segmentation.total_length:.6g}, "
        f"traza Stokes {segmentation.n_stokes_trace}, traza Darcy {segmentation.n_darcy_trace}")
    return segmentation
