"""
test_norms.py - Pruebas de normas discretas y órdenes de convergencia.
"""
import numpy as np
import pytest

from analytics.convergence import ConvergenceReport, least_squares_slope, rate, rates_from_errors
from analytics.norms import ErrorBundle, edge_norm, mortar_norm, pressure_error
from geometry.grid import uniform_grid
from geometry.interface import MortarSpec, build_interface
from model.mortar_interface import MortarSpace
from utils.errors import ParameterError


def test_edge_norm():
    """Test 1: Norma de aristas de un campo constante y homogeneidad."""
    print("=" * 80)
    print("TEST 1: Norma de aristas")
    print("=" * 80)

    unit = uniform_grid(0.0, 1.0, 1, 0.0, 1.0, 1)
    value = edge_norm(unit, np.ones((2, 1)), np.ones((1, 2)))
    print(f"   ||1||_e = {value}")
    assert value == pytest.approx(2.0)

    grid = uniform_grid(0.0, 2.0, 5, 0.0, 1.0, 3)
    rng = np.random.default_rng(7)
    vx, vy = rng.normal(size=(6, 3)), rng.normal(size=(5, 4))
    assert edge_norm(grid, -3.0 * vx, -3.0 * vy) == pytest.approx(3.0 * edge_norm(grid, vx, vy))
    # Interior: cada arista cuenta en sus dos celdas vecinas
    assert edge_norm(grid, np.ones((6, 3)), np.ones((5, 4))) == pytest.approx(np.sqrt(4.0 * 2.0))
    print("\n✅ Test 1 PASSED\n")


def test_pressure_and_mortar_norms():
    """Test 2: Error de presión por variante y norma del mortero."""
    print("=" * 80)
    print("TEST 2: Presión y mortero")
    print("=" * 80)

    grid = uniform_grid(0.0, 1.0, 1, 0.0, 1.0, 1)
    standard = pressure_error(grid, np.array([0.5]), lambda x, y: x, "standard")
    midpoint = pressure_error(grid, np.array([0.5]), lambda x, y: x, "midpoint")
    print(f"   estándar = {standard:.6f}, punto medio = {midpoint:.2e}")
    assert standard == pytest.approx(np.sqrt(1.0 / 12.0), rel=1e-12)
    assert midpoint == pytest.approx(0.0, abs=1e-15)

    with pytest.raises(ParameterError):
        pressure_error(grid, np.array([0.5]), lambda x, y: x, "trapezoid")

    stokes = uniform_grid(0.0, 1.0, 4, 0.5, 1.0, 4)
    darcy = uniform_grid(0.0, 1.0, 3, 0.0, 0.5, 3)
    mortar = MortarSpace.build(build_interface(stokes, darcy, MortarSpec(1)))
    ones = np.ones(mortar.n_dofs)
    assert mortar_norm(mortar, ones, None) == pytest.approx(1.0)
    assert mortar_norm(mortar, ones, lambda x, y: 1.0 + 0.0 * x) == pytest.approx(0.0, abs=1e-14)
    nodes = mortar.segmentation.segments[0].mortar_partition
    linear = mortar_norm(mortar, 2.0 * nodes, lambda x, y: 2.0 * x, "midpoint")
    assert linear == pytest.approx(0.0, abs=1e-14)
    print("\n✅ Test 2 PASSED\n")


def test_rates():
    """Test 3: Órdenes entre niveles y pendiente por mínimos cuadrados."""
    print("=" * 80)
    print("TEST 3: Órdenes de convergencia")
    print("=" * 80)

    computed = rates_from_errors([0.4, 0.2, 0.1])
    print(f"   {computed}")
    assert computed[0] is None
    assert computed[1] == pytest.approx(1.0)
    assert computed[2] == pytest.approx(1.0)

    assert rate(1.70e-2, 8.53e-3) == pytest.approx(0.998, abs=5e-3)
    assert rate(0.0, 1e-3) is None
    assert rate(1e-3, 0.0) is None

    h = 0.1 / 2.0 ** np.arange(4)
    assert least_squares_slope(h, 3.0 * h ** 2) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        least_squares_slope([0.1], [1e-2])
    print("\n✅ Test 3 PASSED\n")


def test_convergence_report():
    """Test 4: Informe por niveles con órdenes vacíos en el nivel 0."""
    print("=" * 80)
    print("TEST 4: ConvergenceReport")
    print("=" * 80)

    report = ConvergenceReport("standard", "p0")
    for level in range(3):
        e = 0.1 / 2.0 ** level
        report.add(level, ErrorBundle(e, 2 * e, 3 * e, 4 * e, e / 4.0), 0.1 / 2 ** level, 0.1 / 2 ** level, 8)
    rows = report.rows()
    assert [row["level"] for row in rows] == [0, 1, 2]
    assert rows[0]["r_pD"] is None
    assert rows[2]["r_lambda"] == pytest.approx(1.0)
    assert report.column("e_uS") == pytest.approx([0.4, 0.2, 0.1])

    with pytest.raises(ParameterError):
        ErrorBundle(-1.0, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ParameterError):
        ErrorBundle(np.nan, 0.0, 0.0, 0.0, 0.0)
    print("\n✅ Test 4 PASSED\n")


if __name__ == "__main__":
    print("\n🧪 PRUEBAS DE NORMAS\n")
    test_edge_norm()
    test_pressure_and_mortar_norms()
    test_rates()
    test_convergence_report()
    print("=" * 80)
    print("✅ TODAS LAS PRUEBAS COMPLETADAS")
    print("=" * 80)
