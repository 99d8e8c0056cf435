"""
test_stokes_mac.py - Pruebas del ensamblaje MAC de Stokes.

Prueba:
- Stencil interior de A_S y columnas de B_S
- Simetría y coercitividad con frontera esencial
- Divergencia discreta y cargas de volumen
- Traza sobre Γ y Stokes aislado con presión lineal
"""
import numpy as np
import pytest

from geometry.grid import uniform_grid
from geometry.interface import build_interface
from geometry.staggered import build_staggered
from model.boundary import BoundaryKind, BoundaryRegion, everywhere, sides
from model.stokes_mac import (TANGENTIAL_UNKNOWN, MacBoundaryCondition, assemble_divergence, assemble_momentum,
                              assemble_rhs)
from solver.coupled_solver import solve_stokes
from solver.linear_algebra import is_symmetric
from utils.errors import BoundaryConditionError, ParameterError

WALLS = MacBoundaryCondition([BoundaryRegion(BoundaryKind.ESSENTIAL, everywhere, name="paredes")])


def _closed_box(n: int = 4, mu: float = 1.0):
    grid = uniform_grid(0.0, 1.0, n, 0.0, 1.0, n)
    return assemble_momentum(build_staggered(grid), mu, 0.0, WALLS)


def test_interior_stencil():
    """Test 1: Fila de una cara u1 interior en malla uniforme."""
    print("=" * 80)
    print("TEST 1: Stencil interior")
    print("=" * 80)

    op = _closed_box(4)
    dofs = op.dofs
    h = 0.25
    r = dofs.velocity_index_of_face("x", 2, 1)
    row = op.A.getrow(r).toarray().ravel()

    def col(axis, i, j):
        return dofs.velocity_index_of_face(axis, i, j)

    expected = {
        col("x", 2, 1): 6.0,
        col("x", 1, 1): -2.0,
        col("x", 3, 1): -2.0,
        col("x", 2, 0): -1.0,
        col("x", 2, 2): -1.0,
        col("y", 2, 1): 1.0,
        col("y", 1, 1): -1.0,
        col("y", 2, 2): -1.0,
        col("y", 1, 2): 1.0,
    }
    for c, value in expected.items():
        print(f"   A[{r}, {c}] = {row[c]:+.3f} (esperado {value:+.1f})")
        assert row[c] == pytest.approx(value, abs=1e-12)
    assert np.count_nonzero(np.abs(row) > 1e-14) == len(expected)

    column = op.B[:, r].toarray().ravel()
    assert column[dofs.p_index[2, 1]] == pytest.approx(h)
    assert column[dofs.p_index[1, 1]] == pytest.approx(-h)
    assert np.count_nonzero(column) == 2
    print("\n✅ Test 1 PASSED\n")


def test_symmetry_and_coercivity():
    """Test 2: A_S simétrica y definida positiva con paredes."""
    print("=" * 80)
    print("TEST 2: Simetría y coercitividad")
    print("=" * 80)

    op = _closed_box(6, mu=0.7)
    assert is_symmetric(op.A)
    eigenvalues = np.linalg.eigvalsh(op.A.toarray())
    print(f"   λ_min = {eigenvalues[0]:.4e}")
    assert eigenvalues[0] > 0.0
    print("\n✅ Test 2 PASSED\n")


def test_divergence_and_loads():
    """Test 3: Divergencia de una celda y carga de f constante."""
    print("=" * 80)
    print("TEST 3: Divergencia y cargas")
    print("=" * 80)

    geom = build_staggered(uniform_grid(0.0, 0.25, 1, 0.0, 0.25, 1))
    D = assemble_divergence(geom)
    faces = np.array([1.0, 2.0, 0.0, 0.0])  # u1_W, u1_E, u2_S, u2_N
    value = float((D @ faces)[0])
    print(f"   div = {value}")
    assert value == pytest.approx(0.25)

    op = _closed_box(4)
    momentum, mass = assemble_rhs(op.dofs, f_S=lambda x, y: (1.0, 0.0), g_S=lambda x, y: 2.0)
    r = op.dofs.velocity_index_of_face("x", 2, 1)
    assert momentum[r] == pytest.approx(0.25 ** 2)
    r2 = op.dofs.velocity_index_of_face("y", 1, 2)
    assert momentum[r2] == pytest.approx(0.0)
    assert np.allclose(mass, 2.0 * 0.25 ** 2)
    print("\n✅ Test 3 PASSED\n")


def test_essential_faces_removed():
    """Test 4: Con todas las aristas esenciales una celda no deja velocidades libres."""
    print("=" * 80)
    print("TEST 4: Caras esenciales")
    print("=" * 80)

    op = _closed_box(1)
    print(f"   velocidades libres = {op.n_velocity}, presiones = {op.n_pressure}")
    assert op.n_velocity == 0
    assert op.n_pressure == 1
    assert op.B.shape == (1, 0)
    assert not op.has_natural
    print("\n✅ Test 4 PASSED\n")


def test_interface_trace():
    """Test 5: Mapa de traza sobre Γ del caso 1."""
    print("=" * 80)
    print("TEST 5: Traza de Stokes")
    print("=" * 80)

    stokes = uniform_grid(0.0, 1.0, 16, 0.5, 1.0, 16)
    darcy = uniform_grid(0.0, 1.0, 15, 0.0, 0.5, 15)
    segmentation = build_interface(stokes, darcy)
    bc = MacBoundaryCondition([BoundaryRegion(BoundaryKind.ESSENTIAL, sides("left", "right", "top"))])
    op = assemble_momentum(build_staggered(stokes), 1.0, 0.5, bc, segmentation)

    trace = op.trace_map
    print(f"   traza {trace.shape}, tangenciales {op.dofs.n_tangential}")
    assert trace.shape == (16, op.n_velocity)
    assert np.allclose(trace.sum(axis=1), 1.0)
    assert op.dofs.n_tangential == 15
    assert is_symmetric(op.A)
    assert np.linalg.eigvalsh(op.A.toarray())[0] > 0.0
    print("\n✅ Test 5 PASSED\n")


def test_interface_tangential_rows():
    """Test 5b: La velocidad tangencial en Γ sólo entra por el corte de los vértices y BJS."""
    print("=" * 80)
    print("TEST 5b: Filas tangenciales de Γ")
    print("=" * 80)

    stokes = uniform_grid(0.0, 1.0, 16, 0.5, 1.0, 16)
    darcy = uniform_grid(0.0, 1.0, 15, 0.0, 0.5, 15)
    segmentation = build_interface(stokes, darcy)
    bc = MacBoundaryCondition([BoundaryRegion(BoundaryKind.ESSENTIAL, sides("left", "right", "top"))])
    geom = build_staggered(stokes)
    free_slip = assemble_momentum(geom, 1.0, 0.0, bc, segmentation)
    friction = assemble_momentum(geom, 1.0, 0.5, bc, segmentation)

    kinds = free_slip.dofs.tangential_kind[1][:, 0]
    t = free_slip.dofs.tangential_index[1][:, 0][kinds == TANGENTIAL_UNKNOWN]
    assert t.size == 15
    A0 = free_slip.A.toarray()
    # Sin acoplamiento entre incógnitas tangenciales vecinas
    assert np.all(A0[t[:-1], t[1:]] == 0.0)

    diff = friction.A.toarray() - A0
    print(f"   diagonal BJS = {np.diag(diff)[t][:3]}")
    assert np.allclose(np.diag(diff)[t], 0.5 / 16.0, rtol=1e-12)
    diff[t, t] = 0.0
    assert np.allclose(diff, 0.0, atol=1e-14)
    print("\n✅ Test 5b PASSED\n")


def test_hydrostatic_pressure():
    """Test 6: f = ∇x con paredes da u = 0 y p = x - 1/2."""
    print("=" * 80)
    print("TEST 6: Presión lineal")
    print("=" * 80)

    op = _closed_box(8)
    u, p = solve_stokes(op, f_S=lambda x, y: (1.0, 0.0))
    grid = op.dofs.grid
    expected = (grid.xc[:, None] + 0.0 * grid.yc[None, :])[grid.active] - 0.5
    print(f"   max|u| = {np.max(np.abs(u)):.2e}, max|p - p_ex| = {np.max(np.abs(p - expected)):.2e}")
    assert np.max(np.abs(u)) < 1e-10
    assert np.allclose(p, expected, atol=1e-10)
    print("\n✅ Test 6 PASSED\n")


def test_invalid_inputs():
    """Test 7: Viscosidad inválida y frontera sin condición."""
    print("=" * 80)
    print("TEST 7: Entradas inválidas")
    print("=" * 80)

    geom = build_staggered(uniform_grid(0.0, 1.0, 2, 0.0, 1.0, 2))
    with pytest.raises(ParameterError):
        assemble_momentum(geom, 0.0, 0.0, WALLS)
    partial = MacBoundaryCondition([BoundaryRegion(BoundaryKind.ESSENTIAL, sides("left"))])
    with pytest.raises(BoundaryConditionError):
        assemble_momentum(geom, 1.0, 0.0, partial)
    print("\n✅ Test 7 PASSED\n")


if __name__ == "__main__":
    print("\n🧪 PRUEBAS DE STOKES MAC\n")
    test_interior_stencil()
    test_symmetry_and_coercivity()
    test_divergence_and_loads()
    test_essential_faces_removed()
    test_interface_trace()
    test_interface_tangential_rows()
    test_hydrostatic_pressure()
    test_invalid_inputs()
    print("=" * 80)
    print("✅ TODAS LAS PRUEBAS COMPLETADAS")
    print("=" * 80)
