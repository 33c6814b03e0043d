#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

import math
import unittest

import numpy as np

from litelmg.common import ConfigError
from litelmg.semiclassical import BlochVector, bloch_rhs, steady_state_residual, integrate_bloch
from litelmg.semiclassical import critical_coupling, broken_phase_paper, steady_state_paper
from litelmg.semiclassical import steady_state_oracle, sweep_phase_diagram, transition_jump
from litelmg.semiclassical import sweep_csv, sweep_header

from test.common import assert_close, compare_with_reference


class TestBlochEquations(unittest.TestCase):
    def test_rhs(self):
        d = bloch_rhs(BlochVector(1, 0, 0), h=1, lam=1, gamma_b=0.5, gamma_dep=0.2)
        assert_close(self, d, [-0.1, -2.0, 0.5], rtol=1e-15)

    def test_norm_decay(self):
        # d(r^2)/dt = -gamma_dep (X^2 + Y^2), whatever the other rates.
        rng = np.random.default_rng(42)
        for _ in range(1000):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            h, lam, gamma_b, gamma_dep = rng.uniform(0, 3, size=4)
            d = bloch_rhs(BlochVector.from_array(v), h, lam, gamma_b, gamma_dep)
            rate = 2*np.dot(v, d)
            self.assertAlmostEqual(rate, -gamma_dep*(v[0]**2 + v[1]**2), delta=1e-12)

    def test_poles_are_fixed_points(self):
        for z in [1.0, -1.0]:
            r = steady_state_residual(BlochVector(0, 0, z), 1.0, 2.0, 0.5, 0.3)
            self.assertEqual(list(r), [0.0, 0.0, 0.0, 0.0])

    def test_integration_preserves_norm(self):
        tr = integrate_bloch(BlochVector(0.6, 0, 0.8), h=1, lam=0.5, gamma_b=0.5, gamma_dep=0, t_end=10)
        norms = np.sum(tr.states**2, axis=1)
        self.assertLess(np.max(np.abs(norms - 1)), 1e-6)

    def test_integration_with_dephasing_shrinks(self):
        tr = integrate_bloch(BlochVector(0.6, 0, 0.8), h=1, lam=0.5, gamma_b=0.0, gamma_dep=0.5,
            t_end=5, samples=10)
        self.assertLess(tr.final.norm2, 1.0)
        self.assertLessEqual(len(tr), 12)

    def test_relaxes_to_broken_phase(self):
        tr = integrate_bloch(BlochVector(0.1, 0, math.sqrt(0.99)), h=1, lam=2, gamma_b=0.5, gamma_dep=0,
            t_end=200, samples=100)
        s = tr.final
        assert_close(self, [abs(s.x), abs(s.y), s.z], [0.85445, 0.10853, 0.50807], atol=1e-4)


class TestCriticalCoupling(unittest.TestCase):
    def test_values(self):
        for gamma_b, lambda_c in [(0.2, 1.01), (0.5, 1.0625), (0.8, 1.16), (0.0, 1.0)]:
            with self.subTest(gamma_b=gamma_b):
                self.assertAlmostEqual(critical_coupling(1.0, gamma_b), lambda_c, delta=1e-9)

    def test_needs_field(self):
        with self.assertRaises(ValueError):
            critical_coupling(0.0, 0.5)


class TestPaperMode(unittest.TestCase):
    def test_broken_point(self):
        plus, minus = broken_phase_paper(h=1, lam=10, gamma_b=0.5, gamma_dep=1)
        self.assertEqual(plus.branch, "broken-plus")
        assert_close(self, [plus.bloch.x, plus.bloch.y], [0.87, 0.24], atol=0.01)
        assert_close(self, [plus.z0, plus.bloch.z, plus.r0], [1.10767, 0.10767, 1.0], atol=1e-5)
        assert_close(self, [minus.bloch.x, minus.bloch.y], [-plus.bloch.x, -plus.bloch.y])
        # The closed form is not on the unit sphere.
        self.assertFalse(plus.consistent)

    def test_normal_below_critical(self):
        results = steady_state_paper(h=1, lam=1.0, gamma_b=0.5, gamma_dep=0.3)
        self.assertEqual([r.branch for r in results], ["normal"])
        self.assertEqual(results[0].z0, 1.0)
        self.assertEqual(results[0].bloch.as_array().tolist(), [0.0, 0.0, 1.0])

    def test_continuous_at_critical(self):
        lambda_c = critical_coupling(1.0, 0.5)
        plus = steady_state_paper(h=1, lam=lambda_c*(1 + 1e-9), gamma_b=0.5, gamma_dep=0)[0]
        self.assertEqual(plus.branch, "broken-plus")
        self.assertLess(plus.bloch.x, 1e-4)
        assert_close(self, plus.bloch.z, 1.0, atol=1e-6)

    def test_no_real_solution_above_critical(self):
        # r0 = 1: just above lambda_c the closed-form Z exceeds 1.
        results = steady_state_paper(h=1, lam=1.07, gamma_b=0.5, gamma_dep=1.0)
        self.assertEqual([r.branch for r in results], ["none"])
        self.assertTrue(math.isnan(results[0].bloch.x))

    def test_no_gamma_b(self):
        self.assertEqual(broken_phase_paper(1, 2, 0.0, 0.0)[0].branch, "none")


class TestOracleMode(unittest.TestCase):
    def test_without_dephasing(self):
        results = steady_state_oracle(h=1, lam=2, gamma_b=0.5, gamma_dep=0)
        branches = [r.branch for r in results]
        self.assertEqual(branches, ["normal", "inverted", "broken-plus", "broken-minus"])
        plus = results[2]
        assert_close(self, plus.bloch.as_array(), [0.85445, 0.10853, 0.50807], atol=1e-4)
        for r in results:
            self.assertTrue(r.consistent)
            self.assertLess(r.residual_norm, 1e-10)

    def test_paper_mode_differs(self):
        paper  = steady_state_paper(h=1, lam=2, gamma_b=0.5, gamma_dep=0)[0]
        oracle = steady_state_oracle(h=1, lam=2, gamma_b=0.5, gamma_dep=0)[2]
        self.assertGreater(abs(paper.bloch.x - oracle.bloch.x), 0.01)

    def test_with_dephasing(self):
        for r in steady_state_oracle(h=1, lam=3, gamma_b=0.5, gamma_dep=0.5):
            with self.subTest(branch=r.branch):
                if r.consistent:
                    self.assertLess(math.hypot(r.bloch.x, r.bloch.y), 1e-6)
                else:
                    self.assertGreater(r.residual_norm, 1e-10)


class TestSweep(unittest.TestCase):
    def test_gamma_b_jump(self):
        points = sweep_phase_diagram([0.9, 1.0, 1.005, 1.02, 1.05], "gamma_b", [0.2])
        z = [p.first_moments.z for p in points]
        self.assertEqual(z[:3], [1.0, 1.0, 1.0])
        self.assertLess(z[3], 1.0)
        self.assertLess(z[4], z[3])
        jump = transition_jump(points)
        self.assertEqual((jump.lambda_below, jump.lambda_above), (1.005, 1.02))
        assert_close(self, jump.jump, 0.01, rtol=0.02)

    def test_dephasing_does_not_move_critical_point(self):
        points = sweep_phase_diagram([0.5, 1.5], "gamma_dep", [0.0, 0.5, 1.0], gamma_b=0.5)
        self.assertEqual({p.lambda_c_over_gamma for p in points}, {1.0625})

    def test_order_and_gaps(self):
        points = sweep_phase_diagram([1.07, 10.0], "gamma_dep", [0.0, 1.0], gamma_b=0.5)
        self.assertEqual([(p.gamma_dep_over_gamma, p.lambda_over_gamma) for p in points],
            [(0.0, 1.07), (0.0, 10.0), (1.0, 1.07), (1.0, 10.0)])
        self.assertEqual([p.branch for p in points], ["broken-plus", "broken-plus", "gap", "broken-plus"])
        self.assertTrue(math.isnan(points[2].residual_norm))
        self.assertEqual(points[3].quadratic_moments[0], points[3].first_moments.x**2)

    def test_oracle_sweep(self):
        points = sweep_phase_diagram([0.5, 2.0], "gamma_b", [0.5], mode="oracle")
        self.assertEqual([p.branch for p in points], ["normal", "broken-plus"])
        assert_close(self, points[1].first_moments.x, 0.85445, atol=1e-4)

    def test_parallel_matches_serial(self):
        args = ([0.5, 1.2, 3.0], "gamma_b", [0.2, 0.8])
        serial   = sweep_phase_diagram(*args, threads=1)
        parallel = sweep_phase_diagram(*args, threads=2)
        self.assertEqual(sweep_csv(serial), sweep_csv(parallel))

    def test_invalid_grids(self):
        for args, kwargs in [
                (([], "gamma_b", [0.5]), {}),
                (([1.0], "gamma_b", []), {}),
                (([1.0], "kappa", [0.5]), {}),
                (([1.0], "gamma_b", [0.5]), {"mode": "exact"}),
                (([1.0], "gamma_b", [0.5]), {"h": 0.0}),
            ]:
            with self.subTest(args=args, kwargs=kwargs):
                with self.assertRaises(ConfigError):
                    sweep_phase_diagram(*args, **kwargs)

    def test_csv(self):
        points  = sweep_phase_diagram([0.5, 1.0], "gamma_b", [0.5])
        content = sweep_csv(points)
        self.assertEqual(content.split("\n")[0], ",".join(sweep_header))
        #update_reference(content, "sweep_normal.csv")
        compare_with_reference(self, content, "sweep_normal.csv")
