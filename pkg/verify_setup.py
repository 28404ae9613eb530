#!/usr/bin/env python3
"""
Sheaf Invariants Setup Verification Script
"""

import sys
from pathlib import Path


def check_python_dependencies():
    """Check if required Python packages are installed"""
    required_packages = {
        "click": "click",
        "PyYAML": "yaml",
        "sympy": "sympy",
    }
    optional_packages = {
        "gmpy2": "gmpy2",
    }

    missing_packages = []

    for package, module in required_packages.items():
        try:
            __import__(module)
            print(f"✅ {package} is installed")
        except ImportError:
            missing_packages.append(package)
            print(f"❌ {package} is NOT installed")

    for package, module in optional_packages.items():
        try:
            __import__(module)
            print(f"✅ {package} is installed (fast rational arithmetic)")
        except ImportError:
            print(f"⚠️  {package} is not installed; sympy falls back to pure-Python rationals")

    if missing_packages:
        print("\n🔧 To install missing packages, run:")
        print("   pip install " + " ".join(missing_packages))
        return False

    return True


def check_configuration():
    """Check if config.yaml is present and loads over the defaults"""
    config_path = Path("config/config.yaml")

    if not config_path.exists():
        print("⚠️  config/config.yaml not found; built-in defaults will be used")
        return True

    try:
        sys.path.insert(0, str(Path(__file__).parent / "src"))
        from utils import load_config
        config = load_config(str(config_path))

        expected = config.get("table1", {}).get("expected", {})
        if sorted(expected) != ["W1", "Z1", "Z2", "Z3"]:
            print(f"⚠️  table1.expected should list Z1, Z2, Z3 and W1, found: {sorted(expected)}")

        print("✅ Configuration file is valid")
        print(f"   Samples per splitting type: {config['sampling']['samples']}")
        print(f"   Cache: {'enabled at ' + config['cache']['path'] if config['cache']['enabled'] else 'disabled'}")
        return True

    except ImportError as e:
        print(f"❌ Cannot import the package: {e}")
        return False
    except Exception as e:
        print(f"❌ Error reading configuration: {e}")
        return False


def check_cache_directory():
    """Check that the cache and log directories can be created"""
    try:
        for directory in (Path("data"), Path("logs")):
            directory.mkdir(parents=True, exist_ok=True)
        print("✅ data/ and logs/ are writable")
        return True
    except OSError as e:
        print(f"❌ Cannot create data/ or logs/: {e}")
        return False


def main():
    """Main verification function"""
    print("🔍 Sheaf Invariants Setup Verification")
    print("=" * 40)

    checks = [
        ("Python Dependencies", check_python_dependencies),
        ("Configuration File", check_configuration),
        ("Cache Directory", check_cache_directory),
    ]

    all_passed = True

    for check_name, check_func in checks:
        print(f"\n📋 Checking {check_name}:")
        if not check_func():
            all_passed = False

    print("\n" + "=" * 40)

    if all_passed:
        print("🎉 All checks passed! Your setup is ready.")
        print("\n📝 Next steps:")
        print("1. Run: python src/cli.py invariants --space zk:1 --j 3 --class split")
        print("2. Reproduce the reference table: python src/cli.py table1 --format pretty")
    else:
        print("❌ Some checks failed. Please fix the issues above.")
        sys.exit(1)


if __name__ == "__main__":
    main()
