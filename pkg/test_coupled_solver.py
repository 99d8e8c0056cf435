"""
test_coupled_solver.py - Pruebas del sistema acoplado Stokes-Darcy.

Prueba:
- Operador de interfaz s_h simétrico y definido positivo
- Descomposición de dominio contra el solver monolítico
- Residuos de conservación
- Caso 2 (obstáculo poroso) de extremo a extremo
"""
import numpy as np
import pytest

from data.scenarios import case2_scenario, custom_scenario
from solver.coupled_solver import (SubdomainSolver, apply_interface_operator, conservation_residuals,
                                   form_interface_matrix, solve, solve_dd)
from utils.errors import ParameterError


def _small_problem(mortar: str = "p0"):
    return custom_scenario(stokes_cells=8, darcy_cells=6, mortar=mortar).validate().problem(0)


def _scale(*arrays):
    return max(1.0, max(float(np.max(np.abs(a))) for a in arrays if a.size))


@pytest.mark.parametrize("mortar", ["p0", "p1"])
def test_interface_operator_spd(mortar):
    """Test 1: s_h formado columna a columna es SPD."""
    print("=" * 80)
    print(f"TEST 1: Operador de interfaz ({mortar})")
    print("=" * 80)

    problem = _small_problem(mortar)
    with SubdomainSolver(problem, parallel=False) as solver:
        S = form_interface_matrix(solver)
        lam = np.linspace(-1.0, 2.0, S.shape[0])
        assert np.allclose(apply_interface_operator(solver, lam), S @ lam, atol=1e-12 * _scale(S))
    asym = np.max(np.abs(S - S.T)) / np.max(np.abs(S))
    eigenvalues = np.linalg.eigvalsh(0.5 * (S + S.T))
    print(f"   tamaño {S.shape}, asimetría relativa {asym:.2e}, λ_min {eigenvalues[0]:.3e}")
    assert asym < 1e-10
    assert eigenvalues[0] > 0.0
    print("\n✅ Test 1 PASSED\n")


@pytest.mark.parametrize("mortar", ["p0", "p1"])
def test_dd_matches_monolithic(mortar):
    """Test 2: DD con tolerancia estricta reproduce la solución monolítica."""
    print("=" * 80)
    print(f"TEST 2: DD vs monolítico ({mortar})")
    print("=" * 80)

    problem = _small_problem(mortar)
    mono = solve(problem, "monolithic")
    with SubdomainSolver(problem, parallel=True) as solver:
        dd = solve_dd(solver, cg_tol=1e-12, max_iter=500)

    print(f"   CG: {dd.iterations} iteraciones, convergió={dd.converged}")
    assert dd.converged
    assert dd.iterations <= 2 * problem.coupling.n_mortar + 5
    for name in ("u_S", "p_S", "u_D", "p_D", "lam"):
        a, b = getattr(mono, name), getattr(dd, name)
        diff = np.max(np.abs(a - b)) / _scale(a)
        print(f"   {name}: diferencia relativa {diff:.2e}")
        assert diff <= 1e-8
    print("\n✅ Test 2 PASSED\n")


def test_conservation():
    """Test 3: Masa por celda, momento y continuidad de flujo en Γ."""
    print("=" * 80)
    print("TEST 3: Conservación")
    print("=" * 80)

    problem = _small_problem("p0")
    for method in ("monolithic", "dd"):
        solution = solve(problem, method, cg_tol=1e-12)
        residuals = conservation_residuals(problem, solution)
        print(f"   {method}: " + ", ".join(f"{k}={v:.2e}" for k, v in residuals.items()))
        assert residuals["stokes_mass"] <= 1e-9
        assert residuals["darcy_mass"] <= 1e-9
        limit = 1e-9 if method == "monolithic" else 1e-8
        assert residuals["flux_continuity"] <= limit
        assert residuals["stokes_momentum"] <= limit * _scale(problem.stokes_momentum_rhs)
    print("\n✅ Test 3 PASSED\n")


def test_case2_runs():
    """Test 4: Canal con obstáculo: solución finita y flujo de izquierda a derecha."""
    print("=" * 80)
    print("TEST 4: Caso 2")
    print("=" * 80)

    scenario = case2_scenario().validate()
    problem = scenario.problem(0)
    print(f"   {problem.describe()}")
    assert len(problem.segmentation.segments) == 3

    solution = solve(problem, "monolithic")
    for name in ("u_S", "p_S", "u_D", "p_D", "lam"):
        assert np.all(np.isfinite(getattr(solution, name)))
    residuals = conservation_residuals(problem, solution)
    assert residuals["flux_continuity"] <= 1e-9

    field = problem.stokes.dofs.mac_field(solution.u_S)
    inlet = field.u1[0, :]
    inlet = inlet[np.isfinite(inlet)]
    print(f"   caudal medio de entrada {inlet.mean():.3e}")
    # La tracción de entrada (1.1) supera a la de salida (1.0)
    assert inlet.mean() > 0.0

    dd = solve(problem, "dd", cg_tol=1e-12)
    assert dd.converged
    assert np.allclose(dd.lam, solution.lam, atol=1e-5 * _scale(solution.lam))
    print("\n✅ Test 4 PASSED\n")


def test_unknown_method():
    """Test 5: Método de solución desconocido."""
    print("=" * 80)
    print("TEST 5: Método desconocido")
    print("=" * 80)

    with pytest.raises(ParameterError):
        solve(_small_problem(), "gmres")
    print("\n✅ Test 5 PASSED\n")


if __name__ == "__main__":
    print("\n🧪 PRUEBAS DEL SOLVER ACOPLADO\n")
    for m in ("p0", "p1"):
        test_interface_operator_spd(m)
        test_dd_matches_monolithic(m)
    test_conservation()
    test_case2_runs()
    test_unknown_method()
    print("=" * 80)
    print("✅ TODAS LAS PRUEBAS COMPLETADAS")
    print("=" * 80)
