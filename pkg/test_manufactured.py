"""
test_manufactured.py - Verificación de la solución analítica del caso 1.

Prueba:
- Constantes derivadas G, β, χ
- Condiciones de interfaz en y = 0.5
- Fuentes f_S, g_S, f_D contra diferencias finitas centradas
"""
import numpy as np
import pytest

from data.manufactured import ExactSolution, case1_exact
from utils.errors import ParameterError

FD_STEP = 1e-5


def _sample_points(y0: float, y1: float, n: int = 7):
    x, y = np.meshgrid(np.linspace(0.05, 0.95, n), np.linspace(y0 + 0.05, y1 - 0.05, n), indexing="ij")
    return x.ravel(), y.ravel()


def _dx(fn, x, y):
    return (fn(x + FD_STEP, y) - fn(x - FD_STEP, y)) / (2.0 * FD_STEP)


def _dy(fn, x, y):
    return (fn(x, y + FD_STEP) - fn(x, y - FD_STEP)) / (2.0 * FD_STEP)


def test_derived_constants():
    """Test 1: G, β, χ y α_BJS con los parámetros por defecto."""
    print("=" * 80)
    print("TEST 1: Constantes derivadas")
    print("=" * 80)

    exact = case1_exact()
    print(f"   G = {exact.G}, β = {exact.beta}, χ = {exact.chi}, α_BJS = {exact.alpha_bjs}")
    assert exact.G == pytest.approx(2.0)
    assert exact.beta == pytest.approx(-1.0 / 6.0)
    assert exact.chi == pytest.approx(-0.25)
    assert exact.alpha_bjs == pytest.approx(0.5)

    x = np.linspace(0.0, 1.0, 11)
    _, u2 = exact.u_S(x, np.full_like(x, 0.5))
    assert np.allclose(u2, -0.25 + np.sin(6.0 * x), atol=1e-14)

    with pytest.raises(ParameterError):
        ExactSolution(K=0.0)
    print("\n✅ Test 1 PASSED\n")


@pytest.mark.parametrize("params", [{}, {"mu": 0.3, "K": 2.0, "alpha": 1.2}])
def test_interface_conditions(params):
    """Test 2: Continuidad de flujo, balance normal y BJS sobre Γ."""
    print("=" * 80)
    print(f"TEST 2: Condiciones de interfaz {params}")
    print("=" * 80)

    exact = ExactSolution(**params)
    x = np.linspace(0.0, 1.0, 101)
    mass, normal_stress, bjs = exact.interface_defects(x)
    print(f"   max |masa| = {np.max(np.abs(mass)):.2e}, max |normal| = {np.max(np.abs(normal_stress)):.2e}, "
          f"max |BJS| = {np.max(np.abs(bjs)):.2e}")
    assert np.max(np.abs(mass)) < 1e-10
    if not params:
        assert np.max(np.abs(normal_stress)) < 1e-10
        assert np.max(np.abs(bjs)) < 1e-10
    print("\n✅ Test 2 PASSED\n")


def test_stokes_sources():
    """Test 3: f_S = −∇·σ y g_S = ∇·u_S por diferencias finitas."""
    print("=" * 80)
    print("TEST 3: Fuentes de Stokes")
    print("=" * 80)

    exact = case1_exact()
    x, y = _sample_points(0.5, 1.0)

    def component(k):
        return lambda a, b: exact.stress(a, b)[k]

    f1 = -(_dx(component(0), x, y) + _dy(component(1), x, y))
    f2 = -(_dx(component(1), x, y) + _dy(component(2), x, y))
    e1, e2 = exact.f_S(x, y)
    scale = max(np.max(np.abs(e1)), np.max(np.abs(e2)))
    print(f"   max |f_S - FD| / escala = {max(np.max(np.abs(f1 - e1)), np.max(np.abs(f2 - e2))) / scale:.2e}")
    assert np.allclose(f1, e1, rtol=0, atol=1e-6 * scale)
    assert np.allclose(f2, e2, rtol=0, atol=1e-6 * scale)

    div = _dx(lambda a, b: exact.u_S(a, b)[0], x, y) + _dy(lambda a, b: exact.u_S(a, b)[1], x, y)
    assert np.allclose(div, exact.g_S(x, y), atol=1e-5)

    grads = exact.grad_u_S(x, y)
    fd = (_dx(lambda a, b: exact.u_S(a, b)[0], x, y), _dy(lambda a, b: exact.u_S(a, b)[0], x, y),
          _dx(lambda a, b: exact.u_S(a, b)[1], x, y), _dy(lambda a, b: exact.u_S(a, b)[1], x, y))
    for analytic, numeric in zip(grads, fd):
        assert np.allclose(analytic, numeric, atol=1e-5)
    print("\n✅ Test 3 PASSED\n")


def test_darcy_fields():
    """Test 4: u_D = −K ∇p_D / μ y f_D = ∇·u_D."""
    print("=" * 80)
    print("TEST 4: Campos de Darcy")
    print("=" * 80)

    exact = case1_exact()
    x, y = _sample_points(0.0, 0.5)
    u1, u2 = exact.u_D(x, y)
    gx, gy = exact.grad_p_D(x, y)
    assert np.allclose(u1, -exact.K * gx / exact.mu, atol=1e-12)
    assert np.allclose(u2, -exact.K * gy / exact.mu, atol=1e-12)
    assert np.allclose(gx, _dx(exact.p_D, x, y), atol=1e-6)
    assert np.allclose(gy, _dy(exact.p_D, x, y), atol=1e-6)

    div = _dx(lambda a, b: exact.u_D(a, b)[0], x, y) + _dy(lambda a, b: exact.u_D(a, b)[1], x, y)
    print(f"   max |f_D - ∇·u_D| = {np.max(np.abs(div - exact.f_D(x, y))):.2e}")
    assert np.allclose(div, exact.f_D(x, y), atol=1e-5)
    assert np.allclose(exact.lam(x, 0.5 + 0 * y), exact.p_D(x, 0.5 + 0 * y))
    print("\n✅ Test 4 PASSED\n")


if __name__ == "__main__":
    print("\n🧪 PRUEBAS DE LA SOLUCIÓN ANALÍTICA\n")
    test_derived_constants()
    test_interface_conditions({})
    test_interface_conditions({"mu": 0.3, "K": 2.0, "alpha": 1.2})
    test_stokes_sources()
    test_darcy_fields()
    print("=" * 80)
    print("✅ TODAS LAS PRUEBAS COMPLETADAS")
    print("=" * 80)
