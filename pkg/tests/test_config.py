"""Tests for configuration loading, hashing and scan recipes."""

import math
import os
import shutil
import sys
import tempfile
import textwrap
import unittest
from pathlib import Path
from unittest.mock import patch

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import Config, Constraint, ScanAxis, ScanSpec, SetupConfig, get_config
from src.errors import ConfigError


class TestSetupConfig(unittest.TestCase):
    """Resolution of interface units"""

    def test_defaults(self):
        setup = SetupConfig.from_dict({})
        self.assertEqual(setup.crystal.name, "BBO")
        self.assertEqual(setup.crystal.length, 1000.0)
        self.assertAlmostEqual(math.degrees(setup.crystal.cut_angle), 30.0)
        self.assertAlmostEqual(math.degrees(setup.collection.alpha_s), 2.2, delta=0.2)
        self.assertEqual(setup.collection.alpha_s, setup.collection.alpha_i)
        self.assertAlmostEqual(setup.pump.w_p, 35.0)
        self.assertAlmostEqual(setup.pump.tau_p, 100.0 / math.sqrt(math.log(2)))
        self.assertIsNone(setup.filters)
        self.assertIsNone(setup.window)
        self.assertEqual(setup.grid_n, 32)

    def test_explicit_values(self):
        setup = SetupConfig.from_dict({
            "pump": {"tau_p_fs": 50, "w_um": 40, "omega0_rad_fs": 2.4},
            "collection": {"alpha_s_deg": 2.0, "alpha_i_deg": 2.5, "w_s_um": 80, "w_i_um": 90},
            "grid": {"n": 24, "window": 0.2},
        })
        self.assertEqual(setup.pump.tau_p, 50.0)
        self.assertEqual(setup.pump.omega0, 2.4)
        self.assertAlmostEqual(math.degrees(setup.collection.alpha_i), 2.5)
        self.assertEqual(setup.collection.w_i, 90.0)
        self.assertEqual((setup.grid_n, setup.window), (24, 0.2))

    def test_filters(self):
        setup = SetupConfig.from_dict({"filters": {"sigma_nm": 2.6}})
        self.assertIsNotNone(setup.filters)
        self.assertEqual(setup.filters.sigma_s, setup.filters.sigma_i)
        one_arm = SetupConfig.from_dict({"filters": {"sigma_s_nm": 2.6}})
        self.assertIsNone(one_arm.filters.sigma_i)
        self.assertIsNone(setup.without_filters().filters)

    def test_custom_sellmeier(self):
        setup = SetupConfig.from_dict({"crystal": {
            "name": "my-bbo",
            "sellmeier_o": [2.7405, 0.0184, 0.0179, 0.0155],
            "sellmeier_e": [2.3730, 0.0128, 0.0156, 0.0044],
        }})
        reference = SetupConfig.from_dict({})
        self.assertEqual(setup.crystal.name, "my-bbo")
        self.assertAlmostEqual(setup.collection.alpha_s, reference.collection.alpha_s, places=12)

    def test_custom_sellmeier_needs_both(self):
        with self.assertRaises(ConfigError):
            SetupConfig.from_dict({"crystal": {"sellmeier_o": [2.7]}})

    def test_errors_name_the_key(self):
        with self.assertRaises(ConfigError) as ctx:
            SetupConfig.from_dict({"crystal": {"length_um": -5}})
        self.assertEqual(ctx.exception.key, "crystal.length_um")
        with self.assertRaises(ConfigError) as ctx:
            SetupConfig.from_dict({"pump": {"w_um": "wide"}})
        self.assertEqual(ctx.exception.key, "pump.w_um")

    def test_unknown_section(self):
        with self.assertRaises(ConfigError):
            SetupConfig.from_dict({"laser": {}})

    def test_non_integer_grid(self):
        with self.assertRaises(ConfigError):
            SetupConfig.from_dict({"grid": {"n": 20.5}})

    def test_unknown_crystal(self):
        with self.assertRaises(ConfigError):
            SetupConfig.from_dict({"crystal": {"name": "KTP"}})


class TestHashAndReplace(unittest.TestCase):
    """Canonical echo, hash and parameter replacement"""

    def setUp(self):
        self.setup = SetupConfig.from_dict({"crystal": {"length_um": 100}})

    def test_hash_stable(self):
        other = SetupConfig.from_dict({"crystal": {"length_um": 100}})
        self.assertEqual(self.setup.hash(), other.hash())
        self.assertEqual(len(self.setup.hash()), 16)
        int(self.setup.hash(), 16)

    def test_hash_changes(self):
        self.assertNotEqual(self.setup.hash(), self.setup.replace_path("crystal.length_um", 200).hash())

    def test_echo_has_resolved_values(self):
        echo = self.setup.to_dict()
        self.assertEqual(echo["resolved"]["length_um"], 100.0)
        self.assertIn("crystal", echo)

    def test_replace_path(self):
        longer = self.setup.replace_path("crystal.length_um", 250)
        self.assertEqual(longer.crystal.length, 250.0)
        self.assertEqual(self.setup.crystal.length, 100.0)
        self.assertEqual(longer.get_path("crystal.length_um"), 250)

    def test_replace_drops_shadowed_key(self):
        setup = SetupConfig.from_dict({"pump": {"tau_p_fs": 50}})
        replaced = setup.replace_path("pump.tau_fwhm_fs", 100)
        self.assertAlmostEqual(replaced.pump.tau_p, 100 / math.sqrt(math.log(2)))

    def test_replace_unknown_path(self):
        with self.assertRaises(ConfigError):
            self.setup.replace_path("laser.power", 1)
        with self.assertRaises(ConfigError):
            self.setup.get_path("crystal")


class TestScanRecipes(unittest.TestCase):
    """Scan axes, constraints and point expansion"""

    def test_axis_forms(self):
        self.assertEqual(ScanAxis.from_dict({"path": "a.b", "values": [1, 2]}, "x").values, (1.0, 2.0))
        linear = ScanAxis.from_dict({"path": "a.b", "start": 0, "stop": 1, "num": 5}, "x")
        self.assertEqual(linear.values, (0.0, 0.25, 0.5, 0.75, 1.0))
        log = ScanAxis.from_dict({"path": "a.b", "start": 10, "stop": 1000, "num": 3, "spacing": "log"}, "x")
        self.assertAlmostEqual(log.values[1], 100.0)

    def test_axis_errors(self):
        with self.assertRaises(ConfigError):
            ScanAxis.from_dict({"values": [1]}, "x")
        with self.assertRaises(ConfigError):
            ScanAxis.from_dict({"path": "a.b", "start": 0, "stop": 10, "num": 3, "spacing": "log"}, "x")
        with self.assertRaises(ConfigError):
            ScanAxis.from_dict({"path": "a.b", "start": 1, "stop": 10, "num": 3, "spacing": "cubic"}, "x")

    def test_constraints(self):
        half = Constraint.parse("pump.w_um = collection.w_s_um / 2")
        self.assertEqual((half.target, half.source, half.factor), ("pump.w_um", "collection.w_s_um", 0.5))
        triple = Constraint.parse("collection.w_i_um = 3 * collection.w_s_um")
        self.assertEqual(triple.factor, 3.0)
        with self.assertRaises(ConfigError):
            Constraint.parse("pump.w_um == 2")

    def test_points_and_setup_at(self):
        spec = ScanSpec.from_dict("waists", {
            "axis1": {"path": "collection.w_s_um", "values": [100, 200]},
            "axis2": {"path": "crystal.length_um", "values": [10, 20, 50]},
            "constraints": ["pump.w_um = collection.w_s_um / 2"],
            "quantities": ["Rc", "purity"],
        })
        points = spec.points()
        self.assertEqual(len(points), 6)
        self.assertEqual(points[:3], [(100.0, 10.0), (100.0, 20.0), (100.0, 50.0)])

        base = SetupConfig.from_dict({})
        spec.validate(base)
        setup = spec.setup_at(base, points[4])
        self.assertEqual(setup.collection.w_s, 200.0)
        self.assertEqual(setup.crystal.length, 20.0)
        self.assertEqual(setup.pump.w_p, 100.0)

    def test_defaults_and_overrides(self):
        spec = ScanSpec.from_dict("thin", {
            "axis1": {"path": "crystal.length_um", "values": [10]},
            "overrides": {"collection.w_s_um": 120},
        })
        self.assertEqual(spec.quantities, ("Rc",))
        self.assertEqual(spec.methods, ("paraxial",))
        self.assertEqual(spec.reference_method, "direct")
        self.assertEqual(spec.setup_at(SetupConfig.from_dict({}), (10.0,)).collection.w_s, 120.0)

    def test_unknown_quantity(self):
        with self.assertRaises(ConfigError):
            ScanSpec.from_dict("x", {"axis1": {"path": "a.b", "values": [1]}, "quantities": ["Rc", "noise"]})

    def test_validate_unknown_path(self):
        spec = ScanSpec.from_dict("x", {"axis1": {"path": "laser.power", "values": [1]}})
        with self.assertRaises(ConfigError):
            spec.validate(SetupConfig.from_dict({}))

    def test_constraint_source_without_value(self):
        spec = ScanSpec.from_dict("x", {
            "axis1": {"path": "crystal.length_um", "values": [10]},
            "constraints": ["pump.w_um = collection.w_i_um / 2"],
        })
        with self.assertRaises(ConfigError):
            spec.validate(SetupConfig.from_dict({}))


class TestConfigFile(unittest.TestCase):
    """YAML loading and environment overrides"""

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix="spdc_test_")
        self.path = Path(self.tmpdir, "config.yaml")
        self.path.write_text(textwrap.dedent("""\
            crystal:
              length_um: 100
            collection:
              w_s_um: 70
            threads: 3
            scans:
              thin:
                axis1: {path: crystal.length_um, values: [10, 20]}
                quantities: [Rc]
            output:
              directory: results
        """))

    def tearDown(self):
        shutil.rmtree(self.tmpdir, ignore_errors=True)

    def test_load(self):
        cfg = Config(str(self.path))
        self.assertEqual(cfg.setup().crystal.length, 100.0)
        self.assertEqual(cfg.scan_names, ["thin"])
        self.assertEqual(cfg.scan("thin").axes[0].values, (10.0, 20.0))
        self.assertEqual(cfg.output_config["directory"], "results")
        self.assertIn("config.yaml", repr(cfg))

    def test_missing_scan(self):
        with self.assertRaises(ConfigError):
            Config(str(self.path)).scan("thick")

    def test_threads_env_override(self):
        with patch.dict(os.environ, {"SPDC_THREADS": "8"}):
            self.assertEqual(Config(str(self.path)).threads, 8)
        with patch.dict(os.environ, {}, clear=False):
            os.environ.pop("SPDC_THREADS", None)
            self.assertEqual(Config(str(self.path)).threads, 3)

    def test_config_env_var(self):
        with patch.dict(os.environ, {"SPDC_CONFIG": str(self.path)}):
            self.assertEqual(get_config().config_path, self.path)

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            Config(str(Path(self.tmpdir, "absent.yaml")))

    def test_invalid_yaml(self):
        bad = Path(self.tmpdir, "bad.yaml")
        bad.write_text("crystal: [unclosed\n")
        with self.assertRaises(ConfigError):
            Config(str(bad))

    def test_not_a_mapping(self):
        bad = Path(self.tmpdir, "list.yaml")
        bad.write_text("- 1\n- 2\n")
        with self.assertRaises(ConfigError):
            Config(str(bad))


class TestShippedConfig(unittest.TestCase):
    """The repository's config.yaml parses and every recipe validates"""

    def test_recipes_validate(self):
        cfg = Config(str(Path(__file__).parent.parent / "config.yaml"))
        setup = cfg.setup()
        self.assertGreater(len(cfg.scan_names), 0)
        for name in cfg.scan_names:
            spec = cfg.scan(name)
            spec.validate(setup)
            spec.setup_at(setup, spec.points()[0])


if __name__ == "__main__":
    unittest.main()
