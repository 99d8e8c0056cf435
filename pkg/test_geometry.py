"""
test_geometry.py - Pruebas de mallas, mallas escalonadas e interfaz.

Prueba:
- Conteo de caras y volúmenes de control MAC
- Refinamiento y mallas graduadas
- Extracción de Γ en los casos 1 y 2
- Errores de geometría (interfaz vacía, celdas en tablero)
"""
import numpy as np
import pytest

from data.scenarios import case2_scenario
from geometry.grid import TensorGrid, graded_coordinates, piecewise_coordinates, uniform_grid
from geometry.interface import HORIZONTAL, VERTICAL, MortarSpec, build_interface
from geometry.staggered import build_staggered
from utils.errors import GeometryError


def test_staggered_counts():
    """Test 1: Caras MAC de mallas pequeñas."""
    print("=" * 80)
    print("TEST 1: Conteo de caras")
    print("=" * 80)

    geom = build_staggered(uniform_grid(0.0, 1.0, 2, 0.0, 1.0, 2))
    print(f"\n✅ 2x2: {geom.n_u1} caras u1, {geom.n_u2} caras u2")
    assert geom.n_u1 == 6
    assert geom.n_u2 == 6

    single = uniform_grid(0.0, 1.0, 1, 0.0, 1.0, 1)
    geom = build_staggered(single)
    assert geom.n_faces == 4
    assert single.n_active == 1
    print("\n✅ Test 1 PASSED\n")


def test_control_volumes_tile_domain():
    """Test 2: Los volúmenes de control embaldosan el dominio."""
    print("=" * 80)
    print("TEST 2: Volúmenes de control")
    print("=" * 80)

    grid = uniform_grid(0.0, 1.0, 16, 0.5, 1.0, 16)
    geom = build_staggered(grid)
    area1 = geom.volume_areas(1).sum()
    area2 = geom.volume_areas(2).sum()
    print(f"   Σ|G| u1 = {area1:.15f}, u2 = {area2:.15f}")
    assert area1 == pytest.approx(0.5, abs=1e-14)
    assert area2 == pytest.approx(0.5, abs=1e-14)

    # Cara interior: volumen completo; cara de frontera: medio volumen
    h = 1.0 / 16
    k_inner = geom.u1_index[8, 4]
    k_edge = geom.u1_index[0, 4]
    assert geom.volume_areas(1)[k_inner] == pytest.approx(h * h * 0.5)
    assert geom.volume_areas(1)[k_edge] == pytest.approx(h * h * 0.25)
    print("\n✅ Test 2 PASSED\n")


def test_refinement_preserves_area():
    """Test 3: Refinamiento por bisección y mallas graduadas."""
    print("=" * 80)
    print("TEST 3: Refinamiento")
    print("=" * 80)

    active = np.ones((4, 3), dtype=bool)
    active[1, 1] = False
    grid = TensorGrid(np.linspace(0.0, 1.0, 5), np.array([0.0, 0.1, 0.4, 1.0]), active)
    fine = grid.refined(2)
    print(f"   {grid.describe()} -> {fine.describe()}")
    assert "np.float64" not in grid.describe()
    assert "dominio=(0, 1, 0, 1)" in grid.describe()
    assert fine.shape == (16, 12)
    assert fine.active_area == pytest.approx(grid.active_area, rel=1e-14)
    assert fine.n_active == 16 * grid.n_active
    assert fine.h == pytest.approx(grid.h / 4)

    graded = graded_coordinates(0.0, 0.2, 12, ratio=1.15, toward="end")
    steps = np.diff(graded)
    assert graded[0] == 0.0 and graded[-1] == pytest.approx(0.2)
    assert np.all(steps[1:] < steps[:-1])
    assert steps[0] / steps[1] == pytest.approx(1.15, rel=1e-10)

    coords = piecewise_coordinates([0.0, 0.25, 0.5, 0.75], [10, 16, 10])
    assert coords.size == 37
    assert np.any(np.isclose(coords, 0.25)) and np.any(np.isclose(coords, 0.5))
    print("\n✅ Test 3 PASSED\n")


def test_case1_interface():
    """Test 4: Γ del caso 1 con mallas no coincidentes."""
    print("=" * 80)
    print("TEST 4: Interfaz del caso 1")
    print("=" * 80)

    stokes = uniform_grid(0.0, 1.0, 16, 0.5, 1.0, 16)
    darcy = uniform_grid(0.0, 1.0, 15, 0.0, 0.5, 15)
    seg_p0 = build_interface(stokes, darcy, MortarSpec(0))
    assert len(seg_p0.segments) == 1
    seg = seg_p0.segments[0]
    print(f"   {seg.describe()}")
    assert seg.orientation == HORIZONTAL
    assert seg.level == pytest.approx(0.5)
    assert seg.stokes_trace.size - 1 == 16
    assert seg.darcy_trace.size - 1 == 15
    assert seg.mortar_partition.size - 1 == 15
    assert seg.stokes_normal == (0, -1)
    assert seg_p0.total_length == pytest.approx(1.0)

    seg_p1 = build_interface(stokes, darcy, MortarSpec(1))
    assert seg_p1.segments[0].mortar_partition.size - 1 == 14
    print("\n✅ Test 4 PASSED\n")


def test_matching_grids_share_partition():
    """Test 5: Con mallas coincidentes las tres particiones son iguales."""
    print("=" * 80)
    print("TEST 5: Mallas coincidentes")
    print("=" * 80)

    stokes = uniform_grid(0.0, 1.0, 8, 0.5, 1.0, 8)
    darcy = uniform_grid(0.0, 1.0, 8, 0.0, 0.5, 8)
    seg = build_interface(stokes, darcy).segments[0]
    assert np.allclose(seg.stokes_trace, seg.darcy_trace, rtol=0, atol=1e-15)
    assert np.allclose(seg.mortar_partition, seg.darcy_trace, rtol=0, atol=1e-15)
    assert seg.merged_breakpoints().size == 9
    print("\n✅ Test 5 PASSED\n")


def test_case2_interface_segments():
    """Test 6: El obstáculo del caso 2 da tres segmentos."""
    print("=" * 80)
    print("TEST 6: Interfaz del canal con obstáculo")
    print("=" * 80)

    scenario = case2_scenario()
    stokes, darcy = scenario.grids(0)
    segmentation = build_interface(stokes, darcy, scenario.mortar)
    kinds = [seg.orientation for seg in segmentation.segments]
    print(f"   Segmentos: {kinds}")
    assert kinds == [VERTICAL, HORIZONTAL, VERTICAL]
    left, top, right = segmentation.segments
    assert left.level == pytest.approx(0.25)
    assert top.level == pytest.approx(0.2)
    assert right.level == pytest.approx(0.5)
    assert segmentation.total_length == pytest.approx(0.65)
    assert stokes.active_area == pytest.approx(0.75 * 0.25 - 0.25 * 0.2)
    print("\n✅ Test 6 PASSED\n")


def test_geometry_errors():
    """Test 7: Interfaz vacía y celdas unidas sólo por un vértice."""
    print("=" * 80)
    print("TEST 7: Errores de geometría")
    print("=" * 80)

    stokes = uniform_grid(0.0, 1.0, 4, 0.6, 1.0, 4)
    darcy = uniform_grid(0.0, 1.0, 4, 0.0, 0.5, 4)
    with pytest.raises(GeometryError):
        build_interface(stokes, darcy)

    # Sólo se tocan en un vértice
    corner = uniform_grid(1.0, 2.0, 2, 0.5, 1.0, 2)
    with pytest.raises(GeometryError):
        build_interface(corner, darcy)

    # Anillo conexo con un par de celdas que sólo comparten el vértice (2, 2)
    active = np.ones((4, 4), dtype=bool)
    active[2, 1] = False
    active[1, 2] = False
    checker = uniform_grid(0.0, 1.0, 4, 0.0, 1.0, 4, active=active)
    with pytest.raises(GeometryError) as info:
        build_staggered(checker)
    print(f"\n✅ Error esperado: {info.value}")
    print("\n✅ Test 7 PASSED\n")


if __name__ == "__main__":
    print("\n🧪 PRUEBAS DE GEOMETRÍA\n")
    test_staggered_counts()
    test_control_volumes_tile_domain()
    test_refinement_preserves_area()
    test_case1_interface()
    test_matching_grids_share_partition()
    test_case2_interface_segments()
    test_geometry_errors()
    print("=" * 80)
    print("✅ TODAS LAS PRUEBAS COMPLETADAS")
    print("=" * 80)
