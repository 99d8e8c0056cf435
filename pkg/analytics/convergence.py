"""
analytics/convergence.py - Tablas de errores por nivel y órdenes de convergencia.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from analytics.norms import ErrorBundle

logger = logging.getLogger(__name__)

QUANTITIES = ("e_pD", "e_uD", "e_pS", "e_uS", "e_lambda")


def rate(previous: float, current: float, factor: float = 2.0) -> Optional[float]:
    """log(e_{k-1}/e_k)/log(factor); None si algún error es nulo."""
    if previous <= 0.0 or current <= 0.0:
        return None
    return math.log(previous / current) / math.log(factor)


@dataclass
class LevelResult:
    level: int
    errors: ErrorBundle
    h_stokes: float
    h_darcy: float
    n_mortar: int
    rates: Dict[str, Optional[float]] = field(default_factory=dict)


@dataclass
class ConvergenceReport:
    """Resultados de una secuencia de refinamientos uniformes para una variante de norma."""

    variant: str
    mortar: str
    levels: List[LevelResult] = field(default_factory=list)

    def add(self, level: int, errors: ErrorBundle, h_stokes: float, h_darcy: float,
            n_mortar: int) -> LevelResult:
        entry = LevelResult(level, errors, h_stokes, h_darcy, n_mortar)
        self.levels.append(entry)
        rates(self)
        return entry

    def column(self, quantity: str) -> List[float]:
        return [getattr(entry.errors, quantity) for entry in self.levels]

    def rate_column(self, quantity: str) -> List[Optional[float]]:
        return [entry.rates.get(quantity) for entry in self.levels]

    def rows(self) -> List[Dict[str, object]]:
        out = []
        for entry in self.levels:
            row: Dict[str, object] = {"level": entry.level}
            for q in QUANTITIES:
                row[q] = getattr(entry.errors, q)
                row[q.replace("e_", "r_", 1)] = entry.rates.get(q)
            out.append(row)
        return out


def rates(report: ConvergenceReport) -> ConvergenceReport:
    """Rellena los órdenes entre niveles consecutivos; el nivel 0 no tiene orden."""
    previous: Optional[LevelResult] = None
    for entry in report.levels:
        if previous is None:
            entry.rates = {q: None for q in QUANTITIES}
        else:
            entry.rates = {q: rate(getattr(previous.errors, q), getattr(entry.errors, q))
                           for q in QUANTITIES}
        previous = entry
    return report


def rates_from_errors(errors: Sequence[float]) -> List[Optional[float]]:
    return [None] + [rate(a, b) for a, b in zip(errors[:-1], errors[1:])]


def least_squares_slope(h: Sequence[float], errors: Sequence[float]) -> float:
    """Pendiente de log(error) frente a log(h) por mínimos cuadrados."""
    h = np.asarray(h, dtype=float)
    e = np.asarray(errors, dtype=float)
    if h.size < 2 or np.any(e <= 0.0):
        raise ValueError("se necesitan al menos dos niveles con error positivo")
    slope, _ = np.polyfit(np.log(h), np.log(e), 1)
    return float(slope)
