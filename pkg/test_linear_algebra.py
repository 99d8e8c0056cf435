"""
test_linear_algebra.py - Pruebas de CG, LU por bloques y ensamblaje por tripletas.
"""
import numpy as np
import pytest
import scipy.sparse as sp

from solver.linear_algebra import (BlockSystem, TripletBuilder, cg_solve, diagonal_preconditioner,
                                   is_symmetric, saddle_solve)
from utils.errors import NonFiniteError, NotSPDError, SingularSystemError


def _laplacian(n: int) -> sp.csr_matrix:
    return sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")


def test_triplet_builder():
    """Test 1: Tripletas repetidas se suman."""
    print("=" * 80)
    print("TEST 1: TripletBuilder")
    print("=" * 80)

    builder = TripletBuilder((2, 2))
    builder.add(0, 0, 1.0)
    builder.extend([0, 1, 0], [0, 1, 1], [2.0, 5.0, -1.0])
    builder.add(1, 0, -1.0)
    matrix = builder.tocsr().toarray()
    print(f"   {matrix.tolist()}")
    assert np.allclose(matrix, [[3.0, -1.0], [-1.0, 5.0]])
    assert is_symmetric(builder.tocsr())

    with pytest.raises(IndexError):
        builder.add(2, 0, 1.0)
    bad = TripletBuilder((1, 1))
    bad.add(0, 0, np.nan)
    with pytest.raises(NonFiniteError):
        bad.tocsr()
    print("\n✅ Test 1 PASSED\n")


def test_cg_spd():
    """Test 2: CG sobre un laplaciano 1D, con y sin precondicionador."""
    print("=" * 80)
    print("TEST 2: CG sobre SPD")
    print("=" * 80)

    n = 50
    A = _laplacian(n)
    x_true = np.sin(np.linspace(0.0, 3.0, n))
    b = A @ x_true
    result = cg_solve(lambda v: A @ v, b, tol=1e-12, max_iter=200)
    print(f"   {result.iterations} iteraciones, residuo {result.residual_history[-1]:.2e}")
    assert result.converged
    assert result.iterations <= n
    assert np.allclose(result.x, x_true, atol=1e-9)
    assert result.residual_history[0] == pytest.approx(1.0)

    scaled = sp.diags(np.linspace(1.0, 100.0, n)) @ A @ sp.diags(np.linspace(1.0, 100.0, n))
    b = scaled @ x_true
    pre = cg_solve(lambda v: scaled @ v, b, tol=1e-10, max_iter=500,
                   preconditioner=diagonal_preconditioner(scaled.diagonal()))
    assert pre.converged
    assert np.allclose(pre.x, x_true, rtol=1e-6, atol=1e-8)

    zero = cg_solve(lambda v: A @ v, np.zeros(n))
    assert zero.converged and zero.iterations == 0
    print("\n✅ Test 2 PASSED\n")


def test_cg_failures():
    """Test 3: Operador indefinido y falta de convergencia."""
    print("=" * 80)
    print("TEST 3: Fallos de CG")
    print("=" * 80)

    indefinite = sp.diags([1.0, -1.0, 2.0], format="csr")
    with pytest.raises(NotSPDError) as info:
        cg_solve(lambda v: indefinite @ v, np.array([0.0, 1.0, 0.0]))
    print(f"\n✅ Error esperado: {info.value}")
    assert info.value.iteration == 1

    A = _laplacian(40)
    result = cg_solve(lambda v: A @ v, np.ones(40), tol=1e-14, max_iter=3)
    assert not result.converged
    assert result.iterations == 3
    assert len(result.residual_history) == 4

    with pytest.raises(NonFiniteError):
        cg_solve(lambda v: A @ v, np.full(40, np.inf))
    with pytest.raises(NotSPDError):
        diagonal_preconditioner(np.array([1.0, 0.0]))
    print("\n✅ Test 3 PASSED\n")


def test_saddle_solve():
    """Test 4: Punto de silla por bloques y sistema singular."""
    print("=" * 80)
    print("TEST 4: Punto de silla")
    print("=" * 80)

    A = sp.csr_matrix(np.diag([2.0, 3.0]))
    B = sp.csr_matrix(np.array([[1.0, 1.0]]))
    system = BlockSystem(["u", "p"], [[A, B.T], [B, None]], [np.array([1.0, 2.0]), np.array([0.5])])
    parts = saddle_solve(system)
    u, p = parts["u"], parts["p"]
    print(f"   u = {u}, p = {p}")
    assert np.allclose(A @ u + B.T @ p, [1.0, 2.0])
    assert np.allclose(B @ u, [0.5])
    assert system.sizes == [2, 1]

    # Presión sin fijar: B con una columna nula en el multiplicador
    B0 = sp.csr_matrix((1, 2))
    singular = BlockSystem(["u", "p"], [[A, B0.T], [B0, None]], [np.ones(2), np.ones(1)])
    with pytest.raises(SingularSystemError):
        saddle_solve(singular)
    print("\n✅ Test 4 PASSED\n")


if __name__ == "__main__":
    print("\n🧪 PRUEBAS DE ÁLGEBRA LINEAL\n")
    test_triplet_builder()
    test_cg_spd()
    test_cg_failures()
    test_saddle_solve()
    print("=" * 80)
    print("✅ TODAS LAS PRUEBAS COMPLETADAS")
    print("=" * 80)
