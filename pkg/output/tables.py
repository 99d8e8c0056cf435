"""
output/tables.py - Exportación de tablas de convergencia a CSV.

Cada informe produce dos ficheros:
- convergence_<mortero>_<variante>.csv con 3 cifras significativas
- convergence_<mortero>_<variante>_full.csv con precisión completa
Las columnas de orden quedan vacías en el nivel 0 o si un error es nulo.
"""

import csv
import logging
from pathlib import Path
from typing import List, Optional, Tuple

from analytics.convergence import QUANTITIES, ConvergenceReport

logger = logging.getLogger(__name__)

HEADER = ["level"] + [c for q in QUANTITIES for c in (q, q.replace("e_", "r_", 1))]


def _short(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.2e}"


def _full(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def table_name(report: ConvergenceReport) -> str:
    return f"convergence_{report.mortar}_{report.variant}"


def write_convergence_csv(report: ConvergenceReport, output_dir) -> Tuple[Path, Path]:
    """
    Returns:
        (ruta de la tabla redondeada, ruta de la tabla completa)
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    base = table_name(report)
    paths = (output_dir / f"{base}.csv", output_dir / f"{base}_full.csv")
    for path, fmt in zip(paths, (_short, _full)):
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(HEADER)
            for row in report.rows():
                writer.writerow([row["level"]] + [fmt(row[c]) for c in HEADER[1:]])
    logger.info(f"Tabla de convergencia escrita en {paths[0]}")
    return paths


def read_convergence_csv(path) -> List[dict]:
    """Lee una tabla escrita por write_convergence_csv (las celdas vacías pasan a None)."""
    with Path(path).open(newline="", encoding="utf-8") as f:
        rows = []
        for raw in csv.DictReader(f):
            row = {"level": int(raw["level"])}
            for column in HEADER[1:]:
                row[column] = float(raw[column]) if raw[column] else None
            rows.append(row)
    return rows


def format_table(report: ConvergenceReport) -> str:
    """Tabla de texto para el log y el resumen."""
    lines = ["  ".join(f"{c:>9}" for c in HEADER)]
    for row in report.rows():
        cells = [f"{row['level']:>9d}"] + [f"{_short(row[c]) or '-':>9}" for c in HEADER[1:]]
        lines.append("  ".join(cells))
    return "\n".join(lines)
