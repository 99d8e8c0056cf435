"""
analytics/norms.py - Normas discretas de error para el caso con solución analítica.

Variante "standard": integrales exactas de la reconstrucción discreta contra
el campo exacto, con Gauss por celda/arista. Variante "midpoint": las mismas
integrales con la regla del punto medio (normas superconvergentes).

- Presiones: L² celda a celda (p_S,h reconstruida constante por celda).
- Velocidades: norma de aristas Σ_E |E| Σ_e |e|⁻¹ ∫_e (v·n)².
- Stokes: norma tipo H¹ = aristas + ∂u1/∂x, ∂u2/∂y constantes por celda +
  ∂u1/∂y, ∂u2/∂x bilineales desde los vértices.
- Mortero: L²(Γ).
"""

import logging
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from data.manufactured import ExactSolution
from geometry.grid import TensorGrid
from model.mortar_interface import MortarSpace
from model.stokes_mac import MacField
from utils.errors import ParameterError
from utils.quadrature import interval_rule, rectangle_rule

logger = logging.getLogger(__name__)

VARIANTS = ("standard", "midpoint")
CELL_ORDER = 2
MORTAR_ORDER = 3


@dataclass(frozen=True)
class ErrorBundle:
    e_pD: float
    e_uD: float
    e_pS: float
    e_uS: float
    e_lambda: float
    variant: str = "standard"

    def __post_init__(self):
        for name, value in self.values().items():
            if not np.isfinite(value) or value < 0.0:
                raise ParameterError(f"error {name} inválido: {value}")

    def values(self) -> Dict[str, float]:
        data = asdict(self)
        data.pop("variant")
        return data


def _check_variant(variant: str):
    if variant not in VARIANTS:
        raise ParameterError(f"variante de norma desconocida: {variant}")


def edge_norm(grid: TensorGrid, vx: np.ndarray, vy: np.ndarray, mean_square: bool = False) -> float:
    """
    Norma de aristas de un campo de velocidad normal.

    Args:
        grid: malla (solo cuentan las celdas activas)
        vx: valores en aristas verticales (nx+1, ny)
        vy: valores en aristas horizontales (nx, ny+1)
        mean_square: si True, vx/vy ya contienen |e|⁻¹ ∫_e (v·n)²
    """
    qx = np.asarray(vx, dtype=float) if mean_square else np.asarray(vx, dtype=float) ** 2
    qy = np.asarray(vy, dtype=float) if mean_square else np.asarray(vy, dtype=float) ** 2
    cells = grid.active_cells()
    ci, cj = cells[:, 0], cells[:, 1]
    per_cell = qx[ci, cj] + qx[ci + 1, cj] + qy[ci, cj] + qy[ci, cj + 1]
    return float(np.sqrt(np.sum(grid.cell_areas[ci, cj] * per_cell)))


def _edge_mean_square(grid: TensorGrid, values_x: np.ndarray, values_y: np.ndarray,
                      exact: Callable, variant: str) -> Tuple[np.ndarray, np.ndarray]:
    """|e|⁻¹ ∫_e (u·n − v_h)² por arista; exact(x, y) -> (u1, u2)."""
    x, y = grid.x_coords, grid.y_coords
    qx = np.zeros(values_x.shape)
    qy = np.zeros(values_y.shape)
    ix = np.argwhere(np.isfinite(values_x))
    iy = np.argwhere(np.isfinite(values_y))
    vx = values_x[ix[:, 0], ix[:, 1]]
    vy = values_y[iy[:, 0], iy[:, 1]]

    if variant == "midpoint":
        ex = exact(x[ix[:, 0]], grid.yc[ix[:, 1]])[0]
        ey = exact(grid.xc[iy[:, 0]], y[iy[:, 1]])[1]
        qx[ix[:, 0], ix[:, 1]] = (ex - vx) ** 2
        qy[iy[:, 0], iy[:, 1]] = (ey - vy) ** 2
        return qx, qy

    pts, wts = interval_rule(y[ix[:, 1]], y[ix[:, 1] + 1], CELL_ORDER)
    ex = exact(np.broadcast_to(x[ix[:, 0], None], pts.shape), pts)[0]
    qx[ix[:, 0], ix[:, 1]] = np.sum(wts * (ex - vx[:, None]) ** 2, axis=1) / grid.dy[ix[:, 1]]
    pts, wts = interval_rule(x[iy[:, 0]], x[iy[:, 0] + 1], CELL_ORDER)
    ey = exact(pts, np.broadcast_to(y[iy[:, 1], None], pts.shape))[1]
    qy[iy[:, 0], iy[:, 1]] = np.sum(wts * (ey - vy[:, None]) ** 2, axis=1) / grid.dx[iy[:, 0]]
    return qx, qy


def _cell_l2(grid: TensorGrid, discrete: Callable, exact: Callable, variant: str) -> float:
    """
    ||exact − discrete||_L² sobre las celdas activas.

    discrete(ci, cj, s, t) evalúa la reconstrucción en coordenadas locales
    (s, t) ∈ [0, 1]² de cada celda, con arrays de forma (n_celdas, q).
    """
    cells = grid.active_cells()
    ci, cj = cells[:, 0], cells[:, 1]
    x0, x1 = grid.x_coords[ci], grid.x_coords[ci + 1]
    y0, y1 = grid.y_coords[cj], grid.y_coords[cj + 1]
    if variant == "midpoint":
        xs, ys = 0.5 * (x0 + x1)[:, None], 0.5 * (y0 + y1)[:, None]
        w = grid.cell_areas[ci, cj][:, None]
    else:
        xs, ys, w = rectangle_rule(x0, x1, y0, y1, CELL_ORDER)
    s = (xs - x0[:, None]) / (x1 - x0)[:, None]
    t = (ys - y0[:, None]) / (y1 - y0)[:, None]
    diff = np.asarray(exact(xs, ys)) - discrete(ci, cj, s, t)
    return float(np.sqrt(np.sum(w * diff ** 2)))


def pressure_error(grid: TensorGrid, p_h: np.ndarray, exact: Callable, variant: str = "standard") -> float:
    """p_h por celda activa (orden C); se reconstruye constante en cada celda."""
    _check_variant(variant)
    field = np.full(grid.shape, np.nan)
    field[grid.active] = p_h
    return _cell_l2(grid, lambda ci, cj, s, t: field[ci, cj][:, None], exact, variant)


def vertex_derivatives(field: MacField) -> Tuple[np.ndarray, np.ndarray]:
    """
    ∂u1/∂y y ∂u2/∂x en los vértices (nx+1, ny+1), por diferencias entre las
    muestras a ambos lados: la cara vecina si existe y si no el valor
    tangencial en el propio vértice. Donde no hay muestra queda 0.
    """
    grid = field.grid
    nx, ny = grid.shape

    def one_sided(faces: np.ndarray, centers: np.ndarray, tangential: np.ndarray,
                  vertex_pos: np.ndarray, axis: int):
        if axis == 1:
            padded = np.pad(faces, ((0, 0), (1, 1)), constant_values=np.nan)
            minus, plus = padded[:, 0:ny + 1], padded[:, 1:ny + 2]
            c = np.concatenate(([np.nan], centers, [np.nan]))
            pm, pp = c[None, 0:ny + 1], c[None, 1:ny + 2]
            pv = vertex_pos[None, :]
        else:
            padded = np.pad(faces, ((1, 1), (0, 0)), constant_values=np.nan)
            minus, plus = padded[0:nx + 1, :], padded[1:nx + 2, :]
            c = np.concatenate(([np.nan], centers, [np.nan]))
            pm, pp = c[0:nx + 1, None], c[1:nx + 2, None]
            pv = vertex_pos[:, None]
        has_m, has_p = np.isfinite(minus), np.isfinite(plus)
        vm = np.where(has_m, minus, tangential)
        vp = np.where(has_p, plus, tangential)
        xm = np.where(has_m, pm, pv)
        xp = np.where(has_p, pp, pv)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = (vp - vm) / (xp - xm)
        return np.where(np.isfinite(d), d, 0.0)

    du1dy = one_sided(field.u1, grid.yc, field.tangential_u1, grid.y_coords, axis=1)
    du2dx = one_sided(field.u2, grid.xc, field.tangential_u2, grid.x_coords, axis=0)
    return du1dy, du2dx


def _bilinear(vertex_values: np.ndarray) -> Callable:
    def evaluate(ci, cj, s, t):
        v00 = vertex_values[ci, cj][:, None]
        v10 = vertex_values[ci + 1, cj][:, None]
        v01 = vertex_values[ci, cj + 1][:, None]
        v11 = vertex_values[ci + 1, cj + 1][:, None]
        return (1 - s) * (1 - t) * v00 + s * (1 - t) * v10 + (1 - s) * t * v01 + s * t * v11
    return evaluate


def stokes_h1_norm(field: MacField, exact: ExactSolution, variant: str = "standard") -> float:
    """Error ||u_S − u_S,h||_S con las reconstrucciones de derivadas del esquema MAC."""
    _check_variant(variant)
    grid = field.grid
    qx, qy = _edge_mean_square(grid, field.u1, field.u2, exact.u_S, variant)
    edge = edge_norm(grid, qx, qy, mean_square=True)

    dx, dy = grid.dx, grid.dy
    du1dx = (field.u1[1:, :] - field.u1[:-1, :]) / dx[:, None]
    du2dy = (field.u2[:, 1:] - field.u2[:, :-1]) / dy[None, :]
    du1dy, du2dx = vertex_derivatives(field)

    def component(k):
        return lambda x, y: exact.grad_u_S(x, y)[k]

    terms = [
        _cell_l2(grid, lambda ci, cj, s, t: du1dx[ci, cj][:, None], component(0), variant),
        _cell_l2(grid, lambda ci, cj, s, t: du2dy[ci, cj][:, None], component(3), variant),
        _cell_l2(grid, _bilinear(du1dy), component(1), variant),
        _cell_l2(grid, _bilinear(du2dx), component(2), variant),
    ]
    logger.debug(f"Norma S ({variant}): aristas={edge:.3e}, derivadas={[f'{t:.3e}' for t in terms]}")
    return float(np.sqrt(edge ** 2 + sum(t ** 2 for t in terms)))


def darcy_velocity_error(grid: TensorGrid, vx: np.ndarray, vy: np.ndarray,
                         exact: ExactSolution, variant: str = "standard") -> float:
    _check_variant(variant)
    qx, qy = _edge_mean_square(grid, vx, vy, exact.u_D, variant)
    return edge_norm(grid, qx, qy, mean_square=True)


def mortar_norm(mortar: MortarSpace, lam_h: np.ndarray, exact: Optional[Callable],
                variant: str = "standard") -> float:
    """
    ||λ − λ_h||_Γ sobre los elementos de mortero de cada segmento.
    Con exact=None devuelve ||λ_h||_Γ.
    """
    _check_variant(variant)
    total = 0.0
    for k, seg in enumerate(mortar.segmentation.segments):
        p = seg.mortar_partition
        if variant == "midpoint":
            s = (0.5 * (p[:-1] + p[1:]))[:, None]
            w = np.diff(p)[:, None]
        else:
            s, w = interval_rule(p[:-1], p[1:], MORTAR_ORDER)
        values = mortar.evaluate(lam_h, k, s.ravel()).reshape(s.shape)
        if exact is not None:
            values = exact(*seg.points(s)) - values
        total += float(np.sum(w * values ** 2))
    return float(np.sqrt(total))


def compute_errors(problem, solution, exact: ExactSolution, variant: str = "standard") -> ErrorBundle:
    """Errores del caso con solución analítica para un problema acoplado resuelto."""
    _check_variant(variant)
    stokes, darcy = problem.stokes, problem.darcy
    s_grid = stokes.dofs.grid
    d_grid = darcy.space.grid

    field = stokes.dofs.mac_field(solution.u_S)
    vx, vy = darcy.space.edge_grids(darcy.edge_values(solution.u_D))
    bundle = ErrorBundle(
        e_pD=pressure_error(d_grid, solution.p_D, exact.p_D, variant),
        e_uD=darcy_velocity_error(d_grid, vx, vy, exact, variant),
        e_pS=pressure_error(s_grid, solution.p_S, exact.p_S, variant),
        e_uS=stokes_h1_norm(field, exact, variant),
        e_lambda=mortar_norm(problem.coupling.mortar, solution.lam, exact.lam, variant),
        variant=variant,
    )
    logger.info(
        f"Errores ({variant}): e_pD={bundle.e_pD:.3e} e_uD={bundle.e_uD:.3e} "
        f"e_pS={bundle.e_pS:.3e} e_uS={bundle.e_uS:.3e} e_λ={bundle.e_lambda:.3e}")
    return bundle
