"""有限差分算子测试。"""

import unittest

import numpy as np

from bispectra.exceptions import DomainError, GridMismatchError
from bispectra.operators import (
    DIRAC_BANDWIDTH,
    DiracOperator,
    RadialGrid,
    assemble_dirac,
    assemble_schrodinger,
)
from bispectra.potentials import PotentialSamples, PotentialSpec, sample_on_grid
from bispectra.quadrature import ALPHA


def _free(grid):
    return PotentialSamples(grid, np.zeros(grid.n_points))


class TestRadialGrid(unittest.TestCase):
    """测试 RadialGrid。"""

    def test_points(self) -> None:
        grid = RadialGrid(3.0, 3)
        self.assertEqual(grid.delta_rho, 1.0)
        np.testing.assert_array_equal(grid.points, [1.0, 2.0, 3.0])
        with self.assertRaises(ValueError):
            grid.points[0] = 0.0

    def test_invalid(self) -> None:
        """ρ∞ ≤ 0 或 N < 3 应报错。"""
        for rho_inf, n_points in ((0.0, 10), (np.inf, 10), (10.0, 2), (10.0, 5.5)):
            with self.subTest(rho_inf=rho_inf, n_points=n_points):
                with self.assertRaises(DomainError):
                    RadialGrid(rho_inf, n_points)


class TestSchrodingerOperator(unittest.TestCase):
    """测试径向 Schrödinger 算子。"""

    def test_free_stencil(self) -> None:
        """V = 0、ℓ = 0、Δρ = 1 时为 tridiag(−1, 2, −1)。"""
        grid = RadialGrid(3.0, 3)
        op = assemble_schrodinger(grid, _free(grid), 0)
        np.testing.assert_array_equal(op.diagonal, [2.0, 2.0, 2.0])
        np.testing.assert_array_equal(op.offdiagonal, [-1.0, -1.0])

    def test_coulomb_diagonal(self) -> None:
        grid = RadialGrid(10.0, 50)
        samples = sample_on_grid(PotentialSpec.coulomb(), grid)
        op = assemble_schrodinger(grid, samples, 2)
        rho = grid.points
        expected = 2.0 / grid.delta_rho**2 - 2.0 / rho + 6.0 / rho**2
        np.testing.assert_allclose(op.diagonal, expected, rtol=1e-15)

    def test_symmetric_and_positive_when_free(self) -> None:
        """自由粒子算子对称且正定。"""
        grid = RadialGrid(10.0, 40)
        dense = assemble_schrodinger(grid, _free(grid), 0).to_dense()
        np.testing.assert_array_equal(dense, dense.T)
        self.assertGreater(np.linalg.eigvalsh(dense).min(), 0.0)

    def test_matvec(self) -> None:
        grid = RadialGrid(10.0, 40)
        op = assemble_schrodinger(grid, sample_on_grid(PotentialSpec.coulomb(), grid), 1)
        x = np.random.default_rng(0).standard_normal(grid.n_points)
        np.testing.assert_allclose(op.matvec(x), op.to_dense() @ x, rtol=1e-13, atol=1e-12)
        np.testing.assert_allclose(op.as_linear_operator() @ x, op.matvec(x))

    def test_deterministic_assembly(self) -> None:
        """同样输入组装出逐位相同的矩阵。"""
        grid = RadialGrid(10.0, 40)
        samples = sample_on_grid(PotentialSpec.coulomb(), grid)
        first = assemble_schrodinger(grid, samples, 1)
        second = assemble_schrodinger(grid, samples, 1)
        np.testing.assert_array_equal(first.diagonal, second.diagonal)
        np.testing.assert_array_equal(first.offdiagonal, second.offdiagonal)

    def test_errors(self) -> None:
        """网格不一致或 ℓ 非法应报错。"""
        grid = RadialGrid(10.0, 40)
        other = RadialGrid(10.0, 41)
        with self.assertRaises(GridMismatchError):
            assemble_schrodinger(grid, _free(other), 0)
        with self.assertRaises(DomainError):
            assemble_schrodinger(grid, _free(grid), -1)


class TestDiracOperator(unittest.TestCase):
    """测试交错排列的 Dirac 算子。"""

    def setUp(self) -> None:
        self.grid = RadialGrid(10.0, 30)
        samples = sample_on_grid(PotentialSpec.coulomb(), self.grid)
        self.op = assemble_dirac(self.grid, samples, 2)

    def test_exact_symmetry(self) -> None:
        """矩阵与其转置完全相同。"""
        dense = self.op.to_dense()
        self.assertEqual(np.abs(dense - dense.T).max(), 0.0)
        self.assertEqual(dense.shape, (60, 60))

    def test_bandwidth(self) -> None:
        dense = self.op.to_dense()
        rows, cols = np.nonzero(dense)
        self.assertLessEqual(np.abs(rows - cols).max(), DIRAC_BANDWIDTH)

    def test_rows(self) -> None:
        """u 行与 v 行的系数。"""
        dense = self.op.to_dense()
        h = 0.5 / self.grid.delta_rho
        rho = self.grid.points
        j = 4
        u, v = 2 * j, 2 * j + 1
        self.assertAlmostEqual(dense[u, u], -ALPHA / rho[j] + 1.0 / ALPHA, places=12)
        self.assertAlmostEqual(dense[v, v], -ALPHA / rho[j] - 1.0 / ALPHA, places=12)
        self.assertEqual(dense[u, v], 2.0 / rho[j])
        self.assertEqual(dense[u, v + 2], -h)
        self.assertEqual(dense[u, v - 2], h)
        self.assertEqual(dense[v, u + 2], h)
        self.assertEqual(dense[v, u - 2], -h)

    def test_edge_matrix(self) -> None:
        """edge=True 时扣除 I/α。"""
        shifted = self.op.to_dense() - np.eye(self.op.size) / ALPHA
        np.testing.assert_allclose(self.op.to_dense(edge=True), shifted, rtol=0, atol=1e-12)

    def test_lu_band_storage(self) -> None:
        """带状存储还原后与稠密矩阵一致。"""
        shift = -0.137
        ab = self.op.lu_band_storage(shift)
        kl = ku = DIRAC_BANDWIDTH
        self.assertEqual(ab.shape, (2 * kl + ku + 1, self.op.size))
        expected = self.op.to_dense(edge=True) - shift * np.eye(self.op.size)
        rebuilt = np.zeros_like(expected)
        for j in range(self.op.size):
            for i in range(max(0, j - ku), min(self.op.size, j + kl + 1)):
                rebuilt[i, j] = ab[kl + ku + i - j, j]
        np.testing.assert_array_equal(rebuilt, expected)
        np.testing.assert_array_equal(ab[:kl], 0.0)

    def test_matvec(self) -> None:
        x = np.random.default_rng(1).standard_normal(self.op.size)
        np.testing.assert_allclose(self.op.matvec(x), self.op.to_dense() @ x, rtol=1e-13)

    def test_free_mass_gap(self) -> None:
        """V = 0 时本征值位于 (−1/α, 1/α) 之外。"""
        op = assemble_dirac(self.grid, _free(self.grid), 1)
        values = np.linalg.eigvalsh(op.to_dense())
        self.assertTrue(np.all(np.abs(values) >= 1.0 / ALPHA * (1 - 1e-12)))

    def test_chiral_spectrum(self) -> None:
        """去掉 κ/ρ 项的自由算子谱关于 0 对称，且有解析形式。"""
        n = 25
        grid = RadialGrid(5.0, n)
        op = DiracOperator(grid, 0, np.zeros(n))
        values = np.linalg.eigvalsh(op.to_dense())
        np.testing.assert_allclose(values, -values[::-1], rtol=0, atol=1e-10)

        cos = np.cos(np.arange(1, n + 1) * np.pi / (n + 1)) / grid.delta_rho
        magnitude = np.sqrt(1.0 / ALPHA**2 + cos**2)
        expected = np.sort(np.concatenate([magnitude, -magnitude]))
        np.testing.assert_allclose(values, expected, rtol=1e-12)

    def test_errors(self) -> None:
        """κ < 1 或网格不一致应报错。"""
        with self.assertRaises(DomainError):
            assemble_dirac(self.grid, _free(self.grid), 0)
        with self.assertRaises(GridMismatchError):
            assemble_dirac(self.grid, _free(RadialGrid(10.0, 31)), 1)
        with self.assertRaises(DomainError):
            self.op.band(4)


if __name__ == "__main__":
    unittest.main()
