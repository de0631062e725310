"""Tests for pump and fiber-mode amplitudes and their quadratic form."""

import math
import sys
import unittest
from pathlib import Path

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.beams import (
    CollectionSpec,
    PumpSpec,
    beam_prefactor,
    beam_quadratic,
    fiber_mode,
    idler_center,
    mean_waist,
    optimal_pump_waist,
    pump_spatial,
    pump_temporal,
    signal_center,
)
from src.crystal import TransverseWaveVector
from src.metrics import brightness_ppm_analytic
from src.numerics import QuadSpec, gauss_kronrod
from tests.fixtures import make_setup

OMEGA0 = 2.4150


class TestPump(unittest.TestCase):
    """Temporal and spatial pump amplitudes"""

    def setUp(self):
        self.pump = PumpSpec(tau_p=120.0, w_p=35.0, omega0=OMEGA0)

    def test_temporal_peak_and_width(self):
        peak = math.sqrt(self.pump.tau_p) / math.pi ** 0.25
        self.assertAlmostEqual(float(pump_temporal(2 * OMEGA0, self.pump)), peak, places=12)
        one_sigma = float(pump_temporal(2 * OMEGA0 + 1 / self.pump.tau_p, self.pump))
        self.assertAlmostEqual(one_sigma, peak * math.exp(-0.5), places=12)

    def test_temporal_normalised(self):
        span = 12 / self.pump.tau_p
        result = gauss_kronrod(lambda w: pump_temporal(w, self.pump) ** 2,
                               2 * OMEGA0 - span, 2 * OMEGA0 + span, QuadSpec(rel_tol=1e-10))
        self.assertAlmostEqual(result.value.real, 1.0, delta=1e-6)

    def test_spatial_peak_and_isotropy(self):
        self.assertAlmostEqual(float(pump_spatial(TransverseWaveVector(), self.pump)),
                               self.pump.w_p / math.sqrt(math.pi))
        a = pump_spatial(TransverseWaveVector(0.03, 0.04), self.pump)
        b = pump_spatial(TransverseWaveVector(0.05, 0.0), self.pump)
        self.assertAlmostEqual(float(a), float(b), places=14)

    def test_spatial_normalised(self):
        k = np.linspace(-8, 8, 801) / self.pump.w_p
        kx, ky = np.meshgrid(k, k, indexing="ij")
        density = pump_spatial(TransverseWaveVector(kx, ky), self.pump) ** 2
        self.assertAlmostEqual(float(trapezoid(trapezoid(density, k, axis=1), k)), 1.0, delta=1e-6)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            PumpSpec(tau_p=0.0, w_p=35.0, omega0=OMEGA0)


class TestFiberModes(unittest.TestCase):
    """Collection modes"""

    def setUp(self):
        self.collection = CollectionSpec(alpha_s=0.04, alpha_i=0.04, w_s=70.0, w_i=70.0)

    def test_centres_on_opposite_sides(self):
        self.assertGreater(float(signal_center(OMEGA0, self.collection).kx), 0)
        self.assertLess(float(idler_center(OMEGA0, self.collection).kx), 0)
        self.assertEqual(float(signal_center(OMEGA0, self.collection).ky), 0.0)

    def test_peak_at_centre(self):
        centre = signal_center(OMEGA0, self.collection)
        value = fiber_mode(centre, OMEGA0, 70.0, 0.04, +1)
        self.assertAlmostEqual(float(value), 70.0 / math.sqrt(math.pi), places=12)

    def test_normalised(self):
        centre = idler_center(OMEGA0, self.collection)
        k = np.linspace(-8, 8, 801) / 70.0
        kx, ky = np.meshgrid(float(centre.kx) + k, k, indexing="ij")
        density = fiber_mode(TransverseWaveVector(kx, ky), OMEGA0, 70.0, 0.04, -1) ** 2
        total = trapezoid(trapezoid(density, k, axis=1), k)
        self.assertAlmostEqual(float(total), 1.0, delta=1e-6)

    def test_symmetric_flag(self):
        self.assertTrue(self.collection.symmetric)
        self.assertFalse(CollectionSpec(0.04, 0.05, 70.0, 70.0).symmetric)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            CollectionSpec(alpha_s=-0.1, alpha_i=0.0, w_s=70.0, w_i=70.0)
        with self.assertRaises(ValueError):
            CollectionSpec(alpha_s=0.1, alpha_i=0.1, w_s=70.0, w_i=0.0)


class TestBeamQuadratic(unittest.TestCase):
    """Gaussian exponent of pump x signal mode x idler mode"""

    @classmethod
    def setUpClass(cls):
        cls.setup = make_setup(collection__w_i_um=90)

    def test_b2_symmetric_positive_definite(self):
        beam = beam_quadratic(self.setup, OMEGA0, OMEGA0)
        np.testing.assert_array_equal(beam.B2, beam.B2.T)
        self.assertTrue(np.all(np.linalg.eigvalsh(beam.B2) > 0))
        self.assertGreaterEqual(beam.B0, 0)

    @settings(max_examples=50, deadline=None)
    @given(
        kappa=st.lists(st.floats(-0.05, 0.05), min_size=4, max_size=4),
        detune_s=st.floats(-0.05, 0.05),
        detune_i=st.floats(-0.05, 0.05),
    )
    def test_reconstructs_product(self, kappa, detune_s, detune_i):
        setup = self.setup
        col = setup.collection
        ws, wi = OMEGA0 + detune_s, OMEGA0 + detune_i
        ks = signal_center(ws, col) + TransverseWaveVector(kappa[0], kappa[1])
        ki = idler_center(wi, col) + TransverseWaveVector(kappa[2], kappa[3])

        direct = (pump_spatial(ks + ki, setup.pump)
                  * fiber_mode(ks, ws, col.w_s, col.alpha_s, +1)
                  * fiber_mode(ki, wi, col.w_i, col.alpha_i, -1))
        beam = beam_quadratic(setup, ws, wi)
        k = np.array(kappa)
        model = beam_prefactor(setup) * math.exp(-beam.B0 - beam.B1 @ k - k @ beam.B2 @ k)
        self.assertAlmostEqual(float(direct), model, delta=1e-10 * max(model, 1e-300) + 1e-300)


class TestWaists(unittest.TestCase):
    """Mean waist and the optimal pump waist"""

    def test_mean_waist(self):
        self.assertAlmostEqual(mean_waist(70.0, 70.0, 35.0), (2 / 4900 + 1 / 1225) ** -0.5)

    def test_optimal_equal_waists(self):
        self.assertAlmostEqual(optimal_pump_waist(70.0, 70.0), 35.0)

    def test_optimal_infinite_idler(self):
        self.assertAlmostEqual(optimal_pump_waist(70.0, math.inf), 70.0 / math.sqrt(2))

    def test_optimal_invalid(self):
        with self.assertRaises(ValueError):
            optimal_pump_waist(0.0, 70.0)

    def test_optimal_maximises_perfect_rate(self):
        best = optimal_pump_waist(70.0, 120.0)
        rates = [brightness_ppm_analytic(make_setup(pump__w_um=best * f, collection__w_i_um=120))
                 for f in (0.8, 1.0, 1.25)]
        self.assertGreater(rates[1], rates[0])
        self.assertGreater(rates[1], rates[2])


if __name__ == "__main__":
    unittest.main()
