"""
output/vtk_writer.py - Campos en formato VTK legado (ASCII) con la librería vtk.

- Stokes y Darcy: vtkRectilinearGrid con presión y velocidad promediada por
  celda (las celdas inactivas llevan 0 y active = 0).
- Mortero: vtkPolyData con una polilínea por segmento de Γ.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import vtk
from vtk.util import numpy_support as nps

from geometry.grid import TensorGrid

logger = logging.getLogger(__name__)


def _array(name: str, values: np.ndarray, array_type=vtk.VTK_DOUBLE):
    arr = nps.numpy_to_vtk(np.ascontiguousarray(values), deep=True, array_type=array_type)
    arr.SetName(name)
    return arr


def _write(writer, data, path: Path, title: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    writer.SetFileName(str(path))
    writer.SetInputData(data)
    writer.SetHeader(title)
    writer.SetFileTypeToASCII()
    if not writer.Write():
        raise OSError(f"no se pudo escribir {path}")
    logger.debug(f"VTK escrito: {path}")
    return path


def write_rectilinear(path, grid: TensorGrid, cell_scalars: Dict[str, np.ndarray],
                      cell_vectors: Optional[Dict[str, np.ndarray]] = None,
                      title: str = "stokes-darcy") -> Path:
    """
    Args:
        cell_scalars: arrays (nx, ny) por nombre
        cell_vectors: arrays (nx, ny, 2) por nombre
    """
    nx, ny = grid.shape
    active = grid.active

    def order(arr):
        # VTK recorre las celdas con x variando más rápido
        arr = np.asarray(arr, dtype=float)
        return arr.transpose(1, 0, *range(2, arr.ndim)).reshape(nx * ny, -1)

    rgrid = vtk.vtkRectilinearGrid()
    rgrid.SetDimensions(nx + 1, ny + 1, 1)
    rgrid.SetXCoordinates(_array("x", np.asarray(grid.x_coords, dtype=float)))
    rgrid.SetYCoordinates(_array("y", np.asarray(grid.y_coords, dtype=float)))
    rgrid.SetZCoordinates(_array("z", np.zeros(1)))

    cell_data = rgrid.GetCellData()
    cell_data.AddArray(_array("active", order(active.astype(np.int32)).ravel().astype(np.int32), vtk.VTK_INT))
    for name, values in cell_scalars.items():
        values = np.where(active, np.nan_to_num(np.asarray(values, dtype=float)), 0.0)
        cell_data.AddArray(_array(name, order(values).ravel()))
    for name, values in (cell_vectors or {}).items():
        values = np.where(active[..., None], np.nan_to_num(np.asarray(values, dtype=float)), 0.0)
        cell_data.AddArray(_array(name, np.concatenate([order(values), np.zeros((nx * ny, 1))], axis=1)))

    return _write(vtk.vtkRectilinearGridWriter(), rgrid, Path(path), title)


def write_polylines(path, polylines: List[np.ndarray], values: List[np.ndarray],
                    name: str = "lambda", title: str = "mortar") -> Path:
    """Cada polilínea es un array (m, 2) de puntos con sus m valores."""
    coords = np.vstack(polylines) if polylines else np.zeros((0, 2))
    points = vtk.vtkPoints()
    points.SetData(_array("points", np.column_stack([coords, np.zeros(coords.shape[0])])))

    lines = vtk.vtkCellArray()
    start = 0
    for poly in polylines:
        line = vtk.vtkPolyLine()
        ids = line.GetPointIds()
        ids.SetNumberOfIds(poly.shape[0])
        for k in range(poly.shape[0]):
            ids.SetId(k, start + k)
        lines.InsertNextCell(line)
        start += poly.shape[0]

    polydata = vtk.vtkPolyData()
    polydata.SetPoints(points)
    polydata.SetLines(lines)
    if polylines:
        polydata.GetPointData().AddArray(_array(name, np.concatenate(values).astype(float)))
    return _write(vtk.vtkPolyDataWriter(), polydata, Path(path), title)


def read_vtk_header(path) -> Dict[str, object]:
    """Estructura de un fichero VTK legado: tipo, dimensiones, conteos y nombres de arrays."""
    kind = vtk.vtkDataSetReader()
    kind.SetFileName(str(path))
    if kind.IsFileRectilinearGrid():
        reader = vtk.vtkRectilinearGridReader()
    elif kind.IsFilePolyData():
        reader = vtk.vtkPolyDataReader()
    else:
        raise ValueError(f"{path}: tipo de dataset VTK no soportado")
    reader.SetFileName(str(path))
    reader.ReadAllScalarsOn()
    reader.ReadAllVectorsOn()
    reader.Update()
    data = reader.GetOutput()

    info: Dict[str, object] = {"points": data.GetNumberOfPoints(), "arrays": []}
    if isinstance(data, vtk.vtkRectilinearGrid):
        info["dataset"] = "RECTILINEAR_GRID"
        info["dimensions"] = tuple(data.GetDimensions())
        info["cells"] = data.GetNumberOfCells()
        attributes = data.GetCellData()
    else:
        info["dataset"] = "POLYDATA"
        info["lines"] = data.GetNumberOfLines()
        attributes = data.GetPointData()
    info["arrays"] = [attributes.GetArrayName(k) for k in range(attributes.GetNumberOfArrays())]
    return info


def cell_velocity(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Promedio por celda de las velocidades normales de sus caras, forma (nx, ny, 2)."""
    return np.stack([0.5 * (u1[:-1, :] + u1[1:, :]), 0.5 * (u2[:, :-1] + u2[:, 1:])], axis=-1)


def write_fields(problem, solution, output_dir, prefix: str) -> List[Path]:
    """Escribe Stokes, Darcy y mortero de una solución acoplada."""
    output_dir = Path(output_dir)
    stokes, darcy = problem.stokes, problem.darcy
    field = stokes.dofs.mac_field(solution.u_S)
    s_path = write_rectilinear(
        output_dir / f"{prefix}_stokes.vtk", field.grid,
        {"pressure": stokes.dofs.pressure_field(solution.p_S)},
        {"velocity": cell_velocity(field.u1, field.u2)},
        title=f"{prefix} stokes",
    )
    vx, vy = darcy.space.edge_grids(darcy.edge_values(solution.u_D))
    d_path = write_rectilinear(
        output_dir / f"{prefix}_darcy.vtk", darcy.space.grid,
        {"pressure": darcy.pressure_field(solution.p_D)},
        {"velocity": cell_velocity(vx, vy)},
        title=f"{prefix} darcy",
    )

    mortar = problem.coupling.mortar
    polylines, values = [], []
    for k, seg in enumerate(mortar.segmentation.segments):
        p = seg.mortar_partition
        s = p if mortar.degree == 1 else 0.5 * (p[:-1] + p[1:])
        x, y = seg.points(s)
        polylines.append(np.column_stack([x, y]))
        values.append(mortar.evaluate(solution.lam, k, s))
    m_path = write_polylines(output_dir / f"{prefix}_mortar.vtk", polylines, values, title=f"{prefix} mortar")
    logger.info(f"Campos escritos: {s_path.name}, {d_path.name}, {m_path.name}")
    return [s_path, d_path, m_path]
