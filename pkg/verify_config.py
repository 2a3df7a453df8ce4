#!/usr/bin/env python3
"""
Configuration verification script for pollbench.
This script prints every POLLBENCH_* setting and checks that Config accepts them.
"""

import os
import sys
from typing import Tuple

from dotenv import load_dotenv

SETTINGS = [
    ('POLLBENCH_WORKERS', 'number of CPUs'),
    ('POLLBENCH_MAX_N', '10'),
    ('POLLBENCH_OUTPUT_DIR', 'results'),
    ('POLLBENCH_SEED', '0'),
    ('POLLBENCH_SUITE_SIZE', '500'),
    ('POLLBENCH_MAX_EPOCHS', '5000000'),
    ('LOG_LEVEL', 'INFO'),
]


def check_env_var(var_name: str) -> Tuple[bool, str]:
    """Check if an environment variable is set"""
    value = os.getenv(var_name)
    if value:
        return True, value
    return False, 'NOT SET'


def main():
    """Main verification function"""
    load_dotenv()

    print("=" * 70)
    print("pollbench - Configuration Verification")
    print("=" * 70)
    print()

    print("ENVIRONMENT VARIABLES (all optional):")
    print("-" * 70)
    for var_name, default in SETTINGS:
        is_set, display_value = check_env_var(var_name)
        if is_set:
            print(f"  ✓ {var_name}: {display_value}")
        else:
            print(f"  - {var_name}: NOT SET (will use default: {default})")

    print()
    print("CONFIGURATION TEST:")
    print("-" * 70)
    try:
        from config import Config

        config = Config()
        print("  ✓ Configuration validation passed")
        print()
        print("Configuration details:")
        print(config)
    except Exception as e:
        print(f"  ✗ Failed to load configuration: {e}")
        print()
        print("Configuration is INVALID. See CONFIGURATION.md for the accepted values.")
        return 1

    print()
    print("=" * 70)
    print("✓ Configuration is VALID and ready to use!")
    print("=" * 70)

    return 0


if __name__ == '__main__':
    sys.exit(main())
