"""
solver/linear_algebra.py - Álgebra lineal dispersa del solver acoplado.

- TripletBuilder: ensamblaje por tripletas (COO) y conversión a CSR.
- BlockSystem: sistema por bloques con nombres, para diagnosticar residuos.
- SaddlePointSolver: factorización LU dispersa (scipy.sparse.linalg.splu)
  reutilizable, con verificación de residuo.
- cg_solve: gradiente conjugado (precondicionado opcionalmente) sobre un
  operador dado como función, con historial de residuos.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from utils.errors import NonFiniteError, NotSPDError, SingularSystemError

logger = logging.getLogger(__name__)

SADDLE_TOL = float(os.getenv("SADDLE_TOL", "1e-10"))
CG_TOL = float(os.getenv("CG_TOL", "1e-10"))
CG_MAX_ITER = int(os.getenv("CG_MAX_ITER", "500"))


class TripletBuilder:
    """Acumula entradas (fila, columna, valor); los duplicados se suman al cerrar."""

    def __init__(self, shape: Tuple[int, int]):
        self.shape = (int(shape[0]), int(shape[1]))
        self._rows: List[np.ndarray] = []
        self._cols: List[np.ndarray] = []
        self._vals: List[np.ndarray] = []

    def add(self, row: int, col: int, value: float):
        self.extend([row], [col], [value])

    def extend(self, rows, cols, values):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if rows.size == 0:
            return
        if rows.min() < 0 or cols.min() < 0 or rows.max() >= self.shape[0] or cols.max() >= self.shape[1]:
            raise IndexError(f"tripleta fuera de rango para una matriz {self.shape}")
        self._rows.append(rows)
        self._cols.append(cols)
        self._vals.append(values)

    def tocsr(self) -> sp.csr_matrix:
        if not self._rows:
            return sp.csr_matrix(self.shape)
        rows = np.concatenate(self._rows)
        cols = np.concatenate(self._cols)
        vals = np.concatenate(self._vals)
        if not np.all(np.isfinite(vals)):
            raise NonFiniteError("entradas no finitas durante el ensamblaje")
        matrix = sp.coo_matrix((vals, (rows, cols)), shape=self.shape).tocsr()
        matrix.sum_duplicates()
        return matrix


def is_symmetric(matrix, rtol: float = 1e-12) -> bool:
    """Simetría relativa a la mayor entrada en valor absoluto."""
    matrix = sp.csr_matrix(matrix)
    if matrix.shape[0] != matrix.shape[1]:
        return False
    scale = abs(matrix).max() if matrix.nnz else 0.0
    diff = matrix - matrix.T
    return (abs(diff).max() if diff.nnz else 0.0) <= rtol * max(scale, 1e-300)


@dataclass(eq=False)
class BlockSystem:
    """
    Sistema por bloques. blocks[r][c] es una matriz dispersa o None; names
    nombra cada bloque de incógnitas (u_S, p_S, ...).
    """

    names: Sequence[str]
    blocks: List[List[Optional[sp.spmatrix]]]
    rhs: List[np.ndarray]

    def matrix(self) -> sp.csr_matrix:
        return sp.bmat(self.blocks, format="csr")

    def rhs_vector(self) -> np.ndarray:
        return np.concatenate([np.asarray(r, dtype=float) for r in self.rhs])

    @property
    def sizes(self) -> List[int]:
        return [len(r) for r in self.rhs]

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.sizes))).astype(np.int64)

    def split(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        off = self.offsets
        return {name: x[off[k]:off[k + 1]] for k, name in enumerate(self.names)}


class SaddlePointSolver:
    """Factoriza una vez y resuelve varios lados derechos verificando el residuo."""

    def __init__(self, matrix: sp.spmatrix, names: Optional[Sequence[str]] = None,
                 sizes: Optional[Sequence[int]] = None, tol: float = SADDLE_TOL):
        self.matrix = sp.csr_matrix(matrix)
        self.names = list(names) if names is not None else None
        self.sizes = list(sizes) if sizes is not None else None
        self.tol = tol
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise SingularSystemError(f"matriz no cuadrada {self.matrix.shape}")
        try:
            self._lu = splu(self.matrix.tocsc())
        except RuntimeError as e:
            raise SingularSystemError(f"factorización LU fallida: {e}") from e

    def _worst_block(self, residual: np.ndarray) -> Optional[str]:
        if self.names is None or self.sizes is None:
            return None
        off = np.concatenate(([0], np.cumsum(self.sizes)))
        norms = [np.linalg.norm(residual[off[k]:off[k + 1]]) if off[k + 1] > off[k] else 0.0
                 for k in range(len(self.names))]
        return self.names[int(np.argmax(norms))]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        x = self._lu.solve(rhs)
        if not np.all(np.isfinite(x)):
            raise SingularSystemError("la solución directa contiene valores no finitos")
        scale = max(np.linalg.norm(rhs), 1e-300)
        residual = rhs - self.matrix @ x
        if np.linalg.norm(residual) > self.tol * scale:
            # Un paso de refinamiento iterativo antes de declarar el sistema singular
            x = x + self._lu.solve(residual)
            residual = rhs - self.matrix @ x
        relative = np.linalg.norm(residual) / scale
        if relative > self.tol:
            raise SingularSystemError(f"residuo relativo {relative:.3e} > {self.tol:.1e}",
                                      dof_class=self._worst_block(residual))
        return x


def saddle_solve(system: BlockSystem, tol: float = SADDLE_TOL) -> Dict[str, np.ndarray]:
    """Resuelve un BlockSystem de forma directa y devuelve la solución por bloques."""
    solver = SaddlePointSolver(system.matrix(), system.names, system.sizes, tol)
    return system.split(solver.solve(system.rhs_vector()))


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual_history: List[float] = field(default_factory=list)
    converged: bool = False


def diagonal_preconditioner(diagonal: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    diagonal = np.asarray(diagonal, dtype=float)
    if np.any(diagonal <= 0.0):
        raise NotSPDError("diagonal no positiva para el precondicionador")
    inverse = 1.0 / diagonal
    return lambda r: inverse * r


def cg_solve(apply: Callable[[np.ndarray], np.ndarray], b: np.ndarray,
             tol: float = CG_TOL, max_iter: int = CG_MAX_ITER,
             x0: Optional[np.ndarray] = None,
             preconditioner: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> CGResult:
    """
    Gradiente conjugado para un operador SPD dado como función.

    Criterio de parada: ||r_k|| / ||b|| <= tol. Si se agota max_iter se
    devuelve converged=False con el historial completo.

    Raises:
        NotSPDError: si p·Ap <= 0 (el operador no es SPD)
        NonFiniteError: si aparecen NaN/Inf, con el índice de iteración
    """
    b = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(b)):
        raise NonFiniteError("lado derecho no finito", iteration=0)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return CGResult(np.zeros_like(b), 0, [0.0], True)

    r = b - apply(x) if x0 is not None else b.copy()
    z = preconditioner(r) if preconditioner else r
    p = z.copy()
    rz = float(r @ z)
    history = [np.linalg.norm(r) / b_norm]
    if history[0] <= tol:
        return CGResult(x, 0, history, True)

    for k in range(1, max_iter + 1):
        Ap = apply(p)
        if not np.all(np.isfinite(Ap)):
            raise NonFiniteError("el operador devolvió valores no finitos", iteration=k)
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise NotSPDError(f"ruptura de CG: p·Ap = {pAp:.3e}", iteration=k)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        rel = np.linalg.norm(r) / b_norm
        if not np.isfinite(rel):
            raise NonFiniteError("residuo no finito", iteration=k)
        history.append(rel)
        logger.debug(f"CG iteración {k}: residuo relativo {rel:.3e}")
        if rel <= tol:
            return CGResult(x, k, history, True)
        z = preconditioner(r) if preconditioner else r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new

    logger.warning(f"CG no convergió en {max_iter} iteraciones (residuo {history[-1]:.3e})")
    return CGResult(x, max_iter, history, False)
