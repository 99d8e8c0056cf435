"""
utils/errors.py - Jerarquía de excepciones del solver acoplado Stokes-Darcy.

Todas las excepciones heredan de StokesDarcyError para que la CLI pueda
capturarlas en un único punto, registrar el mensaje y salir con estado 1.
Cada subclase lleva contexto opcional (celda, bloque de DOFs, iteración)
para que el mensaje de log sea accionable.
"""

from typing import Optional, Tuple


class StokesDarcyError(Exception):
    """Error base del paquete."""


class ParameterError(StokesDarcyError):
    """Parámetro físico fuera de rango (viscosidad, BJS, etc.)."""


class GeometryError(StokesDarcyError):
    """Malla inválida, interfaz vacía o celda escalonada degenerada."""

    def __init__(self, message: str, cell: Optional[Tuple[int, int]] = None):
        if cell is not None:
            message = f"{message} (celda {cell})"
        super().__init__(message)
        self.cell = cell


class BoundaryConditionError(StokesDarcyError):
    """Condición de frontera ausente, contradictoria o mal ubicada."""


class PermeabilityError(StokesDarcyError):
    """Tensor de permeabilidad no simétrico o no definido positivo."""

    def __init__(self, message: str, cell: Optional[Tuple[int, int]] = None):
        if cell is not None:
            message = f"{message} (celda {cell})"
        super().__init__(message)
        self.cell = cell


class MortarError(StokesDarcyError):
    """Espacio mortero incompatible con las trazas de los subdominios."""


class SolverError(StokesDarcyError):
    """Fallo de un solver lineal."""


class NotSPDError(SolverError):
    """El operador de interfaz dejó de ser simétrico definido positivo."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        if iteration is not None:
            message = f"{message} (iteración {iteration})"
        super().__init__(message)
        self.iteration = iteration


class NonFiniteError(SolverError):
    """Aparecieron NaN/Inf durante las iteraciones."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        if iteration is not None:
            message = f"{message} (iteración {iteration})"
        super().__init__(message)
        self.iteration = iteration


class SingularSystemError(SolverError):
    """La factorización directa falló o el residuo quedó por encima de la tolerancia."""

    def __init__(self, message: str, dof_class: Optional[str] = None):
        if dof_class is not None:
            message = f"{message} [bloque: {dof_class}]"
        super().__init__(message)
        self.dof_class = dof_class


class ConvergenceError(SolverError):
    """CG agotó el número máximo de iteraciones cuando se exige convergencia."""


class ConfigError(StokesDarcyError):
    """Configuración de ejecución inválida."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        context = []
        if field is not None:
            context.append(f"campo '{field}'")
        if line is not None:
            context.append(f"línea {line}")
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)
        self.field = field
        self.line = line
