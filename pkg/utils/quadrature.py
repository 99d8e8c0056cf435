"""
utils/quadrature.py - Reglas de Gauss-Legendre vectorizadas.

Las reglas se construyen con numpy.polynomial.legendre.leggauss y se aplican
a lotes de intervalos o rectángulos a la vez (una fila por elemento).
"""

from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=8)
def _reference_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodos y pesos en [0, 1]."""
    if order < 1:
        raise ValueError(f"orden de cuadratura inválido: {order}")
    nodes, weights = leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def interval_rule(a, b, order: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """
    Regla de Gauss sobre uno o varios intervalos [a, b].

    Args:
        a, b: extremos (escalares o arrays de la misma forma)
        order: número de puntos por intervalo

    Returns:
        (puntos, pesos) con forma (n_intervalos, order)
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    nodes, weights = _reference_rule(order)
    length = (b - a)[:, None]
    points = a[:, None] + length * nodes[None, :]
    return points, length * weights[None, :]


def rectangle_rule(x0, x1, y0, y1, order: int = 2) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Regla tensorial de Gauss sobre lotes de rectángulos.

    Returns:
        (x, y, pesos) con forma (n_rectángulos, order**2)
    """
    px, wx = interval_rule(x0, x1, order)
    py, wy = interval_rule(y0, y1, order)
    n = px.shape[0]
    x = np.repeat(px, order, axis=1)
    y = np.tile(py, (1, order))
    w = (wx[:, :, None] * wy[:, None, :]).reshape(n, order * order)
    return x, y, w


def integrate_rectangles(fn, x0, x1, y0, y1, order: int = 2) -> np.ndarray:
    """Integral de fn(x, y) (vectorizada) sobre cada rectángulo."""
    x, y, w = rectangle_rule(x0, x1, y0, y1, order)
    values = np.asarray(fn(x, y), dtype=float)
    return np.sum(np.broadcast_to(values, x.shape) * w, axis=1)
