"""
data/permeability.py - Carga de campos de permeabilidad celda a celda desde CSV.

Formato: cabecera `i,j,K11,K12,K22`, una fila por celda activa de la malla de
Darcy en el nivel 0. Las celdas inactivas pueden omitirse.
"""

import csv
import logging
from pathlib import Path
from typing import Union

import numpy as np

from geometry.grid import TensorGrid
from model.darcy_rt0 import PermeabilityField
from utils.errors import ConfigError, PermeabilityError

logger = logging.getLogger(__name__)

COLUMNS = ("i", "j", "K11", "K12", "K22")


def load_permeability_csv(path: Union[str, Path], grid: TensorGrid) -> PermeabilityField:
    """
    Lee un raster de tensores K por celda.

    Raises:
        ConfigError: si falta una columna o una fila está mal formada
        PermeabilityError: si falta una celda activa o un tensor no es SPD
    """
    path = Path(path)
    tensors = np.full(grid.shape + (2, 2), np.nan)
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = [c for c in COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigError(f"columnas ausentes en {path.name}: {missing}", field="permeability", line=1)
        for row in reader:
            try:
                i, j = int(row["i"]), int(row["j"])
                k11, k12, k22 = float(row["K11"]), float(row["K12"]), float(row["K22"])
            except (TypeError, ValueError) as e:
                raise ConfigError(f"fila inválida: {e}", field="permeability", line=reader.line_num) from e
            if not (0 <= i < grid.nx and 0 <= j < grid.ny):
                raise ConfigError(f"celda ({i}, {j}) fuera de la malla {grid.shape}",
                                  field="permeability", line=reader.line_num)
            tensors[i, j] = [[k11, k12], [k12, k22]]

    undefined = grid.active & np.isnan(tensors[..., 0, 0])
    if undefined.any():
        cell = tuple(int(v) for v in np.argwhere(undefined)[0])
        raise PermeabilityError("celda activa sin permeabilidad", cell=cell)
    tensors[~grid.active] = np.eye(2)
    logger.info(f"Permeabilidad cargada desde {path} ({int(grid.active.sum())} celdas)")
    return PermeabilityField(grid, tensors)


def write_permeability_csv(path: Union[str, Path], field: PermeabilityField) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(COLUMNS)
        for i, j in field.grid.active_cells():
            K = field.tensors[i, j]
            writer.writerow([int(i), int(j), repr(float(K[0, 0])), repr(float(K[0, 1])), repr(float(K[1, 1]))])
    logger.info(f"Permeabilidad escrita en {path}")
    return path
