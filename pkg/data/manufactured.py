"""
data/manufactured.py - Solución analítica del caso de convergencia.

Campos cerrados de Stokes (0,1)x(0.5,1) y Darcy (0,1)x(0,0.5) acoplados en
y = 0.5, con sus derivadas y fuentes derivadas a mano. Todas las funciones
aceptan escalares o arrays de numpy.

El campo de Darcy se usa tal cual está escrito, lo que corresponde a la ley
μ K⁻¹ u + ∇p = 0 con μ = 1.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from utils.errors import ParameterError

logger = logging.getLogger(__name__)

INTERFACE_Y = 0.5


@dataclass(frozen=True)
class ExactSolution:
    mu: float = 1.0
    K: float = 1.0
    alpha: float = 0.5
    omega: float = 6.0

    def __post_init__(self):
        for name in ("mu", "K", "alpha"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise ParameterError(f"{name} debe ser positivo (recibido {value})")

    # Parámetros derivados

    @property
    def G(self) -> float:
        return np.sqrt(self.mu * self.K) / self.alpha

    @property
    def beta(self) -> float:
        return (1.0 - self.G) / (2.0 * (1.0 + self.G))

    @property
    def chi(self) -> float:
        return (-30.0 * self.beta - 17.0) / 48.0

    @property
    def alpha_bjs(self) -> float:
        """μ α / sqrt(K) sobre la interfaz horizontal."""
        return self.mu * self.alpha / np.sqrt(self.K)

    # Stokes

    def u_S(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        w, b, G = self.omega, self.beta, self.G
        u1 = (2.0 - x) * (1.5 - y) * (y - b) + G * w * np.cos(w * x)
        u2 = -y ** 3 / 3.0 + 0.5 * y ** 2 * (b + 1.5) - 1.5 * b * y - 0.5 + np.sin(w * x)
        return u1, u2

    def grad_u_S(self, x, y) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(∂u1/∂x, ∂u1/∂y, ∂u2/∂x, ∂u2/∂y)."""
        w, b, G = self.omega, self.beta, self.G
        du1dx = -(1.5 - y) * (y - b) - G * w ** 2 * np.sin(w * x)
        du1dy = (2.0 - x) * (1.5 + b - 2.0 * y)
        du2dx = w * np.cos(w * x) + 0.0 * y
        du2dy = (1.5 - y) * (y - b) + 0.0 * x
        return du1dx, du1dy, du2dx, du2dy

    def p_S(self, x, y):
        w = self.omega
        return (-(np.sin(w * x) + self.chi) / (2.0 * self.K)
                + 2.0 * self.mu * (0.5 - self.beta) + np.cos(np.pi * y))

    def g_S(self, x, y):
        """∇·u_S, distinta de cero: el término ω cos(ωx) de u1 no se compensa."""
        w = self.omega
        return -self.G * w ** 2 * np.sin(w * x) + 0.0 * y

    def f_S(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        """−∇·σ_S con σ_S = 2μ D(u_S) − p_S I."""
        w, b, G, mu = self.omega, self.beta, self.G, self.mu
        f1 = (mu * (2.0 * G * w ** 3 * np.cos(w * x) + 2.0 * (2.0 - x))
              - w * np.cos(w * x) / (2.0 * self.K) + 0.0 * y)
        f2 = mu * (w ** 2 * np.sin(w * x) - 1.5 - b + 2.0 * y) - np.pi * np.sin(np.pi * y)
        return f1, f2

    def stress(self, x, y) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(σ11, σ12, σ22)."""
        du1dx, du1dy, du2dx, du2dy = self.grad_u_S(x, y)
        p = self.p_S(x, y)
        return (2.0 * self.mu * du1dx - p,
                self.mu * (du1dy + du2dx),
                2.0 * self.mu * du2dy - p)

    def traction(self, x, y, normal) -> Tuple[np.ndarray, np.ndarray]:
        s11, s12, s22 = self.stress(x, y)
        n1, n2 = normal
        return s11 * n1 + s12 * n2, s12 * n1 + s22 * n2

    # Darcy

    def u_D(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        w = self.omega
        return w * np.cos(w * x) * y, self.chi * (y + 0.5) + np.sin(w * x)

    def p_D(self, x, y):
        w = self.omega
        return -self.chi / self.K * 0.5 * (y + 0.5) ** 2 - np.sin(w * x) * y / self.K

    def grad_p_D(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        w = self.omega
        return (-w * np.cos(w * x) * y / self.K,
                -self.chi * (y + 0.5) / self.K - np.sin(w * x) / self.K)

    def f_D(self, x, y):
        w = self.omega
        return self.chi - w ** 2 * np.sin(w * x) * y

    def lam(self, x, y):
        """Multiplicador exacto: la presión de Darcy sobre Γ."""
        return self.p_D(x, y)

    def interface_defects(self, x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Residuos de las condiciones de interfaz en y = 0.5 (n_S = (0, −1)):
        continuidad de flujo, balance normal de tensiones y BJS.
        """
        y = np.full_like(np.asarray(x, dtype=float), INTERFACE_Y)
        uS1, uS2 = self.u_S(x, y)
        _, uD2 = self.u_D(x, y)
        t1, t2 = self.traction(x, y, (0.0, -1.0))
        mass = -uS2 + uD2
        normal_stress = t2 - self.p_D(x, y)
        bjs = t1 + self.alpha_bjs * uS1
        return mass, normal_stress, bjs


def case1_exact(mu: float = 1.0, K: float = 1.0, alpha: float = 0.5, omega: float = 6.0) -> ExactSolution:
    exact = ExactSolution(mu=mu, K=K, alpha=alpha, omega=omega)
    logger.debug(f"Solución exacta: G={exact.G:.4f}, β={exact.beta:.4f}, χ={exact.chi:.4f}")
    return exact
