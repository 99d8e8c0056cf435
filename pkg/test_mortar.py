"""
test_mortar.py - Pruebas del espacio de mortero y las matrices de acoplamiento.
"""
import numpy as np
import pytest

from data.scenarios import custom_scenario
from geometry.grid import uniform_grid
from geometry.interface import MortarSpec, build_interface
from model import mortar_interface
from model.mortar_interface import (SOLVABILITY_THRESHOLD, MortarSpace, assemble_coupling, check_infsup,
                                    check_mortar_solvability, mortar_solvability)
from utils.errors import MortarError


def _case1_interface(mortar: MortarSpec, stokes_cells: int = 16, darcy_cells: int = 15):
    stokes = uniform_grid(0.0, 1.0, stokes_cells, 0.5, 1.0, stokes_cells)
    darcy = uniform_grid(0.0, 1.0, darcy_cells, 0.0, 0.5, darcy_cells)
    return build_interface(stokes, darcy, mortar)


def test_matching_p0_is_permutation():
    """Test 1: Mortero P0 sobre mallas coincidentes."""
    print("=" * 80)
    print("TEST 1: Proyección P0 con mallas coincidentes")
    print("=" * 80)

    coupling = assemble_coupling(_case1_interface(MortarSpec(0), 8, 8))
    P = coupling.P_Dh
    print(f"   P_Dh {P.shape}")
    assert P.shape == (8, 8)
    assert np.allclose(P, np.eye(8), atol=1e-14)
    assert np.allclose(coupling.P_Sh, np.eye(8), atol=1e-14)
    assert mortar_solvability(coupling) == pytest.approx(1.0, rel=1e-12)
    print("\n✅ Test 1 PASSED\n")


def test_mass_sums():
    """Test 2: Las masas mixtas integran la partición de la unidad."""
    print("=" * 80)
    print("TEST 2: Sumas de masas")
    print("=" * 80)

    for degree in (0, 1):
        coupling = assemble_coupling(_case1_interface(MortarSpec(degree)))
        totals = (coupling.M_LS.sum(), coupling.M_LD.sum(), coupling.mass_Lambda.sum())
        print(f"   P{degree}: Σ M_LS = {totals[0]:.15f}, Σ M_LD = {totals[1]:.15f}, Σ M_Λ = {totals[2]:.15f}")
        for total in totals:
            assert total == pytest.approx(1.0, abs=1e-13)
        # Γ del caso 1: n_S = -e_y, n_D = +e_y
        assert coupling.B_Gamma_S.sum() == pytest.approx(-1.0, abs=1e-13)
        assert coupling.B_Gamma_D.sum() == pytest.approx(1.0, abs=1e-13)
    print("\n✅ Test 2 PASSED\n")


def test_mortar_dimensions():
    """Test 3: Dimensiones por defecto y evaluación de P1."""
    print("=" * 80)
    print("TEST 3: Espacio de mortero")
    print("=" * 80)

    p0 = MortarSpace.build(_case1_interface(MortarSpec(0)))
    p1 = MortarSpace.build(_case1_interface(MortarSpec(1)))
    print(f"   P0: {p0.n_dofs} DOFs, P1: {p1.n_dofs} DOFs")
    assert p0.n_dofs == 15
    assert p1.n_dofs == 15

    nodes = p1.segmentation.segments[0].mortar_partition
    s = np.linspace(0.0, 1.0, 41)
    assert np.allclose(p1.evaluate(3.0 * nodes - 1.0, 0, s), 3.0 * s - 1.0, atol=1e-14)
    print("\n✅ Test 3 PASSED\n")


def test_solvability_violation():
    """Test 4: Un mortero más rico que la traza de Darcy se rechaza."""
    print("=" * 80)
    print("TEST 4: Condición de solubilidad")
    print("=" * 80)

    good = assemble_coupling(_case1_interface(MortarSpec(1)))
    sigma = check_mortar_solvability(good)
    print(f"   σ_min (P1 por defecto) = {sigma:.4f}")
    assert sigma > 1e-4

    rich = assemble_coupling(_case1_interface(MortarSpec(1, 30)))
    with pytest.raises(MortarError) as info:
        check_mortar_solvability(rich)
    print(f"\n✅ Error esperado: {info.value}")

    with pytest.raises(MortarError):
        MortarSpec(2)
    print("\n✅ Test 4 PASSED\n")


def test_solvability_threshold():
    """Test 4b: Un σ pequeño pero no nulo pasa; un núcleo exacto no."""
    print("=" * 80)
    print("TEST 4b: Umbral de solubilidad")
    print("=" * 80)

    assert SOLVABILITY_THRESHOLD == pytest.approx(1e-10)

    # 16 DOFs P1 frente a 15 intervalos de Darcy: núcleo exacto
    singular = assemble_coupling(_case1_interface(MortarSpec(1, 15)))
    sigma = mortar_solvability(singular)
    print(f"   σ_min (P1, 15 elementos) = {sigma:.3e}")
    assert sigma < 1e-10
    with pytest.raises(MortarError):
        check_mortar_solvability(singular)

    good = assemble_coupling(_case1_interface(MortarSpec(1)))
    with pytest.MonkeyPatch.context() as mp:
        mp.setattr(mortar_interface, "mortar_solvability", lambda coupling: 1e-8)
        assert check_mortar_solvability(good) == pytest.approx(1e-8)
        with pytest.raises(MortarError):
            check_mortar_solvability(good, threshold=1e-6)
    print("\n✅ Test 4b PASSED\n")


@pytest.mark.parametrize("degree", [0, 1])
def test_projections_keep_constants(degree):
    """Test 5: Las proyecciones L² conservan las constantes."""
    print("=" * 80)
    print(f"TEST 5: Proyecciones (P{degree})")
    print("=" * 80)

    coupling = assemble_coupling(_case1_interface(MortarSpec(degree), 12, 7))
    ones = np.ones(coupling.mortar.n_dofs)
    assert np.allclose(coupling.P_Sh @ ones, 1.0, atol=1e-12)
    assert np.allclose(coupling.P_Dh @ ones, 1.0, atol=1e-12)
    assert np.allclose(coupling.P_Lambda @ np.ones(coupling.M_LD.shape[1]), 1.0, atol=1e-12)
    assert np.allclose(coupling.P_Lambda_S @ np.ones(coupling.M_LS.shape[1]), 1.0, atol=1e-12)
    print("\n✅ Test 5 PASSED\n")


def test_infsup_bounded():
    """Test 6: La constante inf-sup no se degrada al refinar."""
    print("=" * 80)
    print("TEST 6: Inf-sup por nivel")
    print("=" * 80)

    scenario = custom_scenario(stokes_cells=8, darcy_cells=6, refinements=1).validate()
    betas = []
    for level in range(2):
        problem = scenario.problem(level)
        betas.append(check_infsup(problem.coupling, problem.stokes, problem.darcy))
        print(f"   nivel {level}: β = {betas[-1]:.4f}")
    assert all(np.isfinite(b) and b > 0.0 for b in betas)
    assert betas[1] > 0.25 * betas[0]
    print("\n✅ Test 6 PASSED\n")


if __name__ == "__main__":
    print("\n🧪 PRUEBAS DE MORTERO\n")
    test_matching_p0_is_permutation()
    test_mass_sums()
    test_mortar_dimensions()
    test_solvability_violation()
    test_solvability_threshold()
    test_projections_keep_constants(0)
    test_projections_keep_constants(1)
    test_infsup_bounded()
    print("=" * 80)
    print("✅ TODAS LAS PRUEBAS COMPLETADAS")
    print("=" * 80)
