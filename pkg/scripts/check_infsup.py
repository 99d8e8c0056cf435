"""
Script para estimar la constante inf-sup del mortero en varios niveles
Imprime β por nivel y la condición de solubilidad σ_min del mortero
"""
import argparse
import sys
from pathlib import Path
from dotenv import load_dotenv

# Agregar el directorio raíz al path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

load_dotenv()

from data.scenarios import case1_scenario, case2_scenario  # noqa: E402
from model.mortar_interface import check_infsup, mortar_solvability  # noqa: E402


def sweep(case: str, mortar: str, levels: int):
    """Recorre los niveles y devuelve [(nivel, n_mortero, σ_min, β)]"""
    scenario = case1_scenario(mortar) if case == "case1" else case2_scenario(mortar=mortar)
    rows = []
    for level in range(levels + 1):
        problem = scenario.problem(level)
        sigma = mortar_solvability(problem.coupling)
        beta = check_infsup(problem.coupling, problem.stokes, problem.darcy)
        rows.append((level, problem.coupling.n_mortar, sigma, beta))
    return rows


def main():
    parser = argparse.ArgumentParser(description="Barrido inf-sup del mortero")
    parser.add_argument("--case", choices=("case1", "case2"), default="case1")
    parser.add_argument("--mortar", choices=("p0", "p1"), default="p0")
    parser.add_argument("--levels", type=int, default=2)
    args = parser.parse_args()

    print("=" * 60)
    print(f"📐 INF-SUP DEL MORTERO ({args.case}, {args.mortar})")
    print("=" * 60)
    rows = sweep(args.case, args.mortar, args.levels)
    for level, n, sigma, beta in rows:
        print(f"   Nivel {level}: {n:4d} DOFs de mortero, σ_min = {sigma:.4f}, β = {beta:.4f}")

    betas = [r[3] for r in rows]
    if min(betas) > 0.5 * max(betas):
        print("✅ β estable bajo refinamiento")
    else:
        print("⚠️  β decrece con el refinamiento")


if __name__ == "__main__":
    main()
