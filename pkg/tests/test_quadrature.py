"""数值积分原语测试。"""

import math
import unittest

import numpy as np
from scipy import integrate, special

from bispectra.exceptions import DomainError, QuadratureError
from bispectra.quadrature import (
    ALPHA,
    QuadratureConfig,
    beta_quarter,
    born_a_tilde,
    integrate_semi_infinite_quartic,
    integrate_tanh_sinh,
    integrate_tanh_sinh_many,
    semi_infinite_quartic_many,
)


def _quartic(x):
    return 1.0 / np.sqrt(1.0 + x**4)


class TestTanhSinh(unittest.TestCase):
    """测试 integrate_tanh_sinh。"""

    def test_constant(self) -> None:
        """常数被积函数。"""
        result = integrate_tanh_sinh(lambda x: np.ones_like(x), 0.0, 1.0)
        self.assertAlmostEqual(result.value, 1.0, places=14)

    def test_scalar_return_is_broadcast(self) -> None:
        """被积函数返回标量时按常数处理。"""
        result = integrate_tanh_sinh(lambda x: 3.0, -1.0, 1.0)
        self.assertAlmostEqual(result.value, 6.0, places=13)

    def test_inverse_sqrt_endpoint(self) -> None:
        """1/√x 在左端点奇异，积分为 2。"""
        result = integrate_tanh_sinh(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0)
        self.assertAlmostEqual(result.value, 2.0, delta=1e-12)
        self.assertGreaterEqual(result.levels_used, 3)

    def test_quartic_against_gauss_kronrod(self) -> None:
        """与 QUADPACK 的结果一致到 1e-12。"""
        expected, _ = integrate.quad(_quartic, 0.0, 1.0, epsabs=1e-14, epsrel=1e-14)
        result = integrate_tanh_sinh(_quartic, 0.0, 1.0)
        self.assertAlmostEqual(result.value, expected, delta=1e-12)
        self.assertAlmostEqual(result.value, 0.9270373, places=7)

    def test_smooth_battery(self) -> None:
        """一组光滑被积函数与解析值比较。"""
        cases = [
            (np.exp, 0.0, 1.0, math.e - 1.0),
            (np.cos, 0.0, math.pi / 2, 1.0),
            (lambda x: 1.0 / (1.0 + x * x), -1.0, 1.0, math.pi / 2),
            (lambda x: np.log(x), 0.0, 1.0, -1.0),
        ]
        for f, a, b, expected in cases:
            with self.subTest(a=a, b=b):
                self.assertAlmostEqual(integrate_tanh_sinh(f, a, b).value, expected, delta=1e-12)

    def test_nan_reports_abscissa(self) -> None:
        """被积函数返回 NaN 时应报告横坐标。"""

        def bad(x):
            return np.where(x > 0.5, np.nan, 1.0)

        with self.assertRaises(QuadratureError) as ctx:
            integrate_tanh_sinh(bad, 0.0, 1.0)
        self.assertIsNotNone(ctx.exception.abscissa)
        self.assertGreater(ctx.exception.abscissa, 0.5)

    def test_non_convergence_carries_estimate(self) -> None:
        """层数不足时应失败并携带最佳估计。"""
        cfg = QuadratureConfig(max_levels=1)
        with self.assertRaises(QuadratureError) as ctx:
            integrate_tanh_sinh(np.exp, 0.0, 1.0, cfg)
        self.assertTrue(math.isfinite(ctx.exception.best_estimate))
        self.assertEqual(ctx.exception.levels_used, 1)

    def test_invalid_interval(self) -> None:
        """a ≥ b 或无穷端点应报错。"""
        with self.assertRaises(DomainError):
            integrate_tanh_sinh(np.exp, 1.0, 1.0)
        with self.assertRaises(DomainError):
            integrate_tanh_sinh(np.exp, 0.0, math.inf)

    def test_invalid_config(self) -> None:
        """非正容差应报错。"""
        with self.assertRaises(DomainError):
            QuadratureConfig(abs_tol=0.0)
        with self.assertRaises(DomainError):
            QuadratureConfig(max_levels=0)


class TestTanhSinhMany(unittest.TestCase):
    """测试向量被积函数。"""

    def test_columns_are_independent(self) -> None:
        """每一列与单独积分的结果一致。"""
        powers = np.arange(4)
        result = integrate_tanh_sinh_many(lambda x: x[:, None] ** powers[None, :], 0.0, 1.0)
        np.testing.assert_allclose(result.values, 1.0 / (powers + 1), rtol=0, atol=1e-13)
        for k in powers:
            single = integrate_tanh_sinh(lambda x, k=k: x**k, 0.0, 1.0)
            self.assertAlmostEqual(result.values[k], single.value, delta=1e-14)

    def test_shape_mismatch(self) -> None:
        """返回行数与节点数不一致时应报错。"""
        with self.assertRaises(QuadratureError):
            integrate_tanh_sinh_many(lambda x: np.ones((3, 2)), 0.0, 1.0)


class TestSemiInfiniteQuartic(unittest.TestCase):
    """测试 ∫_c^∞ dx/√(1+x⁴)。"""

    def test_zero_is_quarter_beta(self) -> None:
        """c = 0 时等于 B(1/4,1/4)/4。"""
        result = integrate_semi_infinite_quartic(0.0)
        self.assertAlmostEqual(result.value, beta_quarter() / 4, delta=1e-12)
        self.assertAlmostEqual(result.value, 1.8540746, delta=1e-7)

    def test_one_is_half(self) -> None:
        """x → 1/x 对称性：c = 1 时恰为 c = 0 的一半。"""
        full = integrate_semi_infinite_quartic(0.0).value
        self.assertAlmostEqual(integrate_semi_infinite_quartic(1.0).value, full / 2, delta=1e-13)

    def test_large_c_tail(self) -> None:
        """c = 100 时约为 1/c。"""
        self.assertAlmostEqual(integrate_semi_infinite_quartic(100.0).value, 0.01, delta=1e-9)

    def test_against_quadpack(self) -> None:
        """多个下限与 QUADPACK 一致。"""
        cs = np.array([0.05, 0.3, 0.999, 1.5, 7.0, 40.0])
        result = semi_infinite_quartic_many(cs)
        for c, value in zip(cs, result.values):
            expected, _ = integrate.quad(_quartic, c, np.inf, epsabs=1e-14, epsrel=1e-13)
            with self.subTest(c=c):
                self.assertAlmostEqual(value, expected, delta=1e-12)

    def test_strictly_decreasing(self) -> None:
        """被积函数为正，积分随下限 c 严格递减。"""
        cs = np.concatenate([[0.0], np.sort(np.random.default_rng(11).uniform(0.0, 50.0, 40))])
        values = semi_infinite_quartic_many(cs).values
        self.assertTrue(np.all(np.diff(values) < 0), values)

    def test_complements_finite_part(self) -> None:
        """∫_c^∞ 与 tanh-sinh 的 ∫_0^c 之和等于 ∫_0^∞，误差在两者估计之内。"""
        full = integrate_semi_infinite_quartic(0.0)
        for c in np.random.default_rng(5).uniform(0.0, 10.0, 8):
            with self.subTest(c=c):
                tail = integrate_semi_infinite_quartic(float(c))
                head = integrate_tanh_sinh(_quartic, 0.0, float(c))
                bound = full.error_estimate + tail.error_estimate + head.error_estimate
                self.assertAlmostEqual(
                    tail.value + head.value, full.value, delta=max(bound, 1e-12)
                )

    def test_negative_rejected(self) -> None:
        """c < 0 应报错。"""
        with self.assertRaises(DomainError):
            integrate_semi_infinite_quartic(-0.1)
        with self.assertRaises(DomainError):
            semi_infinite_quartic_many(np.array([1.0, np.nan]))


class TestConstants(unittest.TestCase):
    """测试常数。"""

    def test_beta_quarter(self) -> None:
        """与 Γ 函数计算的 B(1/4,1/4) 一致。"""
        expected = special.gamma(0.25) ** 2 / math.sqrt(math.pi)
        self.assertAlmostEqual(beta_quarter(), expected, delta=1e-13)
        self.assertAlmostEqual(beta_quarter(), special.beta(0.25, 0.25), delta=1e-13)

    def test_born_a_tilde(self) -> None:
        """ã_B = B·α²/6。"""
        self.assertEqual(born_a_tilde(), beta_quarter() * ALPHA**2 / 6.0)
        self.assertAlmostEqual(born_a_tilde(), 6.5822e-5, delta=1e-8)


if __name__ == "__main__":
    unittest.main()
