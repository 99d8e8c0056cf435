"""
Script para formar explícitamente el operador de interfaz s_h
Comprueba simetría y positividad en morteros pequeños
"""
import argparse
import sys
from pathlib import Path

import numpy as np
from dotenv import load_dotenv

# Agregar el directorio raíz al path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

load_dotenv()

from data.scenarios import custom_scenario  # noqa: E402
from solver.coupled_solver import SubdomainSolver, form_interface_matrix  # noqa: E402


def inspect_operator(stokes_cells: int, darcy_cells: int, mortar: str, elements=None):
    """Devuelve (matriz s_h, asimetría relativa, autovalores)"""
    problem = custom_scenario(stokes_cells, darcy_cells, mortar, elements).problem(0)
    with SubdomainSolver(problem, parallel=False) as solver:
        S = form_interface_matrix(solver)
    asym = np.abs(S - S.T).max() / np.abs(S).max()
    eigenvalues = np.linalg.eigvalsh(0.5 * (S + S.T))
    return S, asym, eigenvalues


def main():
    parser = argparse.ArgumentParser(description="Operador de interfaz explícito")
    parser.add_argument("--stokes-cells", type=int, default=8)
    parser.add_argument("--darcy-cells", type=int, default=6)
    parser.add_argument("--mortar", choices=("p0", "p1"), default="p0")
    parser.add_argument("--elements", type=int, default=None)
    args = parser.parse_args()

    S, asym, eigenvalues = inspect_operator(args.stokes_cells, args.darcy_cells, args.mortar, args.elements)
    print("=" * 60)
    print(f"🔧 OPERADOR DE INTERFAZ ({S.shape[0]}x{S.shape[1]})")
    print("=" * 60)
    print(f"   Asimetría relativa: {asym:.2e}")
    print(f"   λ_min = {eigenvalues[0]:.4e}, λ_max = {eigenvalues[-1]:.4e}")
    print(f"   Condición espectral: {eigenvalues[-1] / eigenvalues[0]:.2f}")
    if asym < 1e-10 and eigenvalues[0] > 0:
        print("✅ s_h es simétrico y definido positivo")
    else:
        print("❌ s_h no es SPD")


if __name__ == "__main__":
    main()
