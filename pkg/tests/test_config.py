# tests/test_config.py
import unittest
from unittest.mock import patch
import io
import os
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import Config
import verify_config


class TestConfig(unittest.TestCase):
    """Test suite for environment configuration"""

    @patch.dict(os.environ, {}, clear=True)
    def test_defaults(self):
        """Test defaults when nothing is set"""
        config = Config()
        self.assertGreaterEqual(config.WORKERS, 1)
        self.assertEqual(config.MAX_N, 10)
        self.assertEqual(config.OUTPUT_DIR, 'results')
        self.assertEqual(config.SEED, 0)
        self.assertEqual(config.SUITE_SIZE, 500)
        self.assertEqual(config.MAX_EPOCHS, 5_000_000)
        self.assertEqual(config.LOG_LEVEL, 'INFO')

    @patch.dict(os.environ, {
        'POLLBENCH_WORKERS': '3',
        'POLLBENCH_MAX_N': '8',
        'POLLBENCH_OUTPUT_DIR': 'out',
        'POLLBENCH_SEED': '42',
        'POLLBENCH_SUITE_SIZE': '20',
        'POLLBENCH_MAX_EPOCHS': '1000',
        'LOG_LEVEL': 'debug',
    }, clear=True)
    def test_overrides(self):
        """Test values read from the environment"""
        config = Config()
        self.assertEqual(config.WORKERS, 3)
        self.assertEqual(config.MAX_N, 8)
        self.assertEqual(config.OUTPUT_DIR, 'out')
        self.assertEqual(config.SEED, 42)
        self.assertEqual(config.SUITE_SIZE, 20)
        self.assertEqual(config.MAX_EPOCHS, 1000)
        self.assertEqual(config.LOG_LEVEL, 'DEBUG')
        self.assertTrue(repr(config).startswith("Config(\n  WORKERS=3,"))

    @patch.dict(os.environ, {'POLLBENCH_WORKERS': ' '}, clear=True)
    def test_blank_value_uses_default(self):
        self.assertGreaterEqual(Config().WORKERS, 1)

    @patch.dict(os.environ, {
        'POLLBENCH_WORKERS': '0',
        'POLLBENCH_SEED': 'abc',
        'LOG_LEVEL': 'VERBOSE',
    }, clear=True)
    def test_errors_are_reported_together(self):
        """Test every invalid setting appears in one error"""
        with self.assertRaises(ValueError) as caught:
            Config()
        message = str(caught.exception)
        self.assertTrue(message.startswith("Configuration errors:"))
        self.assertIn("POLLBENCH_WORKERS must be >= 1", message)
        self.assertIn("POLLBENCH_SEED must be an integer", message)
        self.assertIn("LOG_LEVEL must be one of", message)

    @patch.dict(os.environ, {'POLLBENCH_OUTPUT_DIR': ''}, clear=True)
    def test_empty_output_dir(self):
        with self.assertRaises(ValueError):
            Config()


class TestVerifyConfig(unittest.TestCase):
    """Test suite for the configuration check script"""

    @patch.dict(os.environ, {'POLLBENCH_SEED': '7'}, clear=True)
    def test_check_env_var(self):
        self.assertEqual(verify_config.check_env_var('POLLBENCH_SEED'), (True, '7'))
        self.assertEqual(verify_config.check_env_var('POLLBENCH_MAX_N'), (False, 'NOT SET'))

    @patch('verify_config.load_dotenv')
    @patch.dict(os.environ, {'POLLBENCH_SEED': '7'}, clear=True)
    def test_main_valid(self, mock_load_dotenv):
        with patch('sys.stdout', new_callable=io.StringIO) as out:
            self.assertEqual(verify_config.main(), 0)
        self.assertIn("✓ POLLBENCH_SEED: 7", out.getvalue())
        self.assertIn("Configuration is VALID", out.getvalue())

    @patch('verify_config.load_dotenv')
    @patch.dict(os.environ, {'POLLBENCH_MAX_EPOCHS': '0'}, clear=True)
    def test_main_invalid(self, mock_load_dotenv):
        with patch('sys.stdout', new_callable=io.StringIO) as out:
            self.assertEqual(verify_config.main(), 1)
        self.assertIn("Configuration is INVALID", out.getvalue())


if __name__ == '__main__':
    unittest.main()
