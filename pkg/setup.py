"""
Setup script for Sheaf Invariants
"""

import re
from pathlib import Path

from setuptools import setup

# Read requirements
requirements = []
with open("requirements.txt", "r") as f:
    requirements = [line.strip() for line in f if line.strip() and not line.startswith("#")]

# Read README
readme_content = ""
try:
    with open("README.md", "r", encoding="utf-8") as f:
        readme_content = f.read()
except FileNotFoundError:
    readme_content = "Sheaf Invariants - local invariants of rank-2 bundles on Z_k and W_1"

version = re.search(r'^__version__ = "([^"]+)"', Path("src/utils.py").read_text(), re.M).group(1)

setup(
    name="sheaf-invariants",
    version=version,
    author="Sheaf Invariants Team",
    author_email="dev@example.com",
    description="Width, height, Euler characteristic and h1(End) of rank-2 bundles on Z_k and W_1",
    long_description=readme_content,
    long_description_content_type="text/markdown",
    package_dir={"": "src"},
    py_modules=[
        "atlas",
        "bundles",
        "cech",
        "cli",
        "formulas",
        "invariants",
        "models",
        "results_cache",
        "series_algebra",
        "spaces",
        "utils",
    ],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
    python_requires=">=3.10",
    install_requires=requirements,
    entry_points={
        "console_scripts": [
            "sheaf-invariants=cli:cli",
        ],
    },
    include_package_data=True,
    data_files=[
        ("config", ["config/config.yaml"]),
    ],
    extras_require={
        "fast": [
            "gmpy2>=2.1.0",
        ],
        "dev": [
            "pytest>=7.0.0",
            "pytest-asyncio>=0.23.0",
            "pytest-mock>=3.12.0",
            "click>=8.1.0,<8.2",
            "black>=23.0.0",
            "flake8>=6.0.0",
            "mypy>=1.8.0",
        ],
    },
)
