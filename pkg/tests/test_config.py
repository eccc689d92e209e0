import json
import logging
import os
import shutil
import tempfile
import unittest

import pandas as pd

from hmiwlan import Toolkit, create_app
from hmiwlan.errors import ConfigError, UnknownKeyError
from hmiwlan.utils.configfile import DEFAULTS, load_config, parse_config, parse_range, resolve
from hmiwlan.utils.output import RunManifest, manifest_path, write_csv, write_manifest


class ConfigFileTestCase(unittest.TestCase):
    """Test case for run configuration files."""

    def setUp(self):
        """Set up a scratch directory."""
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def write(self, name, text):
        path = os.path.join(self.tmp, name)
        with open(path, "w") as f:
            f.write(text)
        return path

    def test_empty_file_gives_defaults(self):
        """Test an empty TOML or JSON file resolves to every default."""
        self.assertEqual(load_config(self.write("a.toml", "")), DEFAULTS)
        self.assertEqual(load_config(self.write("b.json", "  \n")), DEFAULTS)

    def test_single_override(self):
        """Test one key overrides only that field."""
        resolved = load_config(self.write("c.toml", "safety_msi_ms = 24\n"))
        self.assertEqual(resolved["safety_msi_ms"], 24.0)
        self.assertIsInstance(resolved["safety_msi_ms"], float)
        changed = {k for k in DEFAULTS if resolved[k] != DEFAULTS[k]}
        self.assertEqual(changed, {"safety_msi_ms"})

    def test_unknown_key(self):
        """Test a misspelt key names the key and suggests the right one."""
        with self.assertRaises(UnknownKeyError) as ctx:
            load_config(self.write("d.toml", "saftey_msi_ms = 24\n"))
        self.assertEqual(ctx.exception.key, "saftey_msi_ms")
        self.assertEqual(ctx.exception.suggestion, "safety_msi_ms")

    def test_parse_error_position(self):
        """Test parse errors carry a line and column."""
        with self.assertRaises(ConfigError) as ctx:
            parse_config('{"seed": 1,\n "threads": }', "json")
        self.assertEqual(ctx.exception.line, 2)
        with self.assertRaises(ConfigError) as ctx:
            parse_config("seed = 1\nthreads = = 2\n", "toml")
        self.assertIsNotNone(ctx.exception.line)

    def test_type_mismatch(self):
        """Test values of the wrong type are rejected."""
        with self.assertRaises(ConfigError):
            resolve({"n_safety": "two"})
        with self.assertRaises(ConfigError):
            resolve({"n_safety": True})

    def test_extension(self):
        """Test only .toml and .json files are accepted."""
        with self.assertRaises(ConfigError):
            load_config(self.write("e.yaml", ""))
        with self.assertRaises(ConfigError):
            load_config(os.path.join(self.tmp, "missing.toml"))

    def test_parse_range(self):
        """Test inclusive ranges, steps and single values."""
        self.assertEqual(parse_range("5..50:5"), [5, 10, 15, 20, 25, 30, 35, 40, 45, 50])
        self.assertEqual(parse_range("7"), [7])
        self.assertEqual(parse_range("0..10:2", float), [0.0, 2.0, 4.0, 6.0, 8.0, 10.0])
        with self.assertRaises(ConfigError):
            parse_range("10..5")


class OutputTestCase(unittest.TestCase):
    """Test case for CSV and manifest output."""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_csv_format(self):
        """Test floats use six decimals and rows end in a bare newline."""
        path = write_csv(pd.DataFrame({"a": [1], "b": [0.5]}), os.path.join(self.tmp, "sub", "x.csv"))
        with open(path, "rb") as f:
            self.assertEqual(f.read(), b"a,b\n1,0.500000\n")

    def test_manifest_round_trip(self):
        """Test a manifest sits beside its CSV and loads back."""
        csv = os.path.join(self.tmp, "run.csv")
        manifest = RunManifest("mac-sim", {"seed": 3}, 3, "1.0.0", [csv])
        path = write_manifest(manifest, csv)
        self.assertEqual(path, manifest_path(csv))
        self.assertTrue(path.endswith("run.manifest.json"))
        self.assertEqual(RunManifest.load(path), manifest)
        with open(path) as f:
            self.assertEqual(json.load(f)["subcommand"], "mac-sim")


class AppTestCase(unittest.TestCase):
    """Test case for the settings profiles and logging setup."""

    def test_testing_profile(self):
        """Test the testing profile resolves its settings."""
        app = create_app(config_name="testing")
        self.assertIsInstance(app, Toolkit)
        self.assertTrue(app.config["TESTING"])
        self.assertEqual(app.logger.level, logging.getLevelName(app.config["LOG_LEVEL"].upper()))

    def test_single_handler(self):
        """Test creating the app twice installs one handler."""
        create_app(config_name="testing")
        app = create_app(config_name="testing")
        ours = [h for h in app.logger.handlers if getattr(h, "_hmiwlan", False)]
        self.assertEqual(len(ours), 1)

    def test_unknown_profile(self):
        """Test an unknown profile name is a configuration error."""
        with self.assertRaises(ConfigError):
            create_app(config_name="staging")


if __name__ == "__main__":
    unittest.main()
