#!/usr/bin/env python3
"""
Setup script for carreau-stokes
"""

from setuptools import setup

# Read README for long description
try:
    with open('README.md', 'r', encoding='utf-8') as f:
        long_description = f.read()
except FileNotFoundError:
    long_description = "Finite element solver for the non-isothermal Carreau Stokes problem"

requirements = [
    "numpy>=1.22",
    "scipy>=1.8",
    "click>=8.2.0",
    "pydantic>=2.0",
    "jinja2>=3.0.0",
    "pyyaml>=6.0.0",
    "python-json-logger>=2.0.0",
]

dev_requirements = [
    "pytest>=7.0.0",
    "pytest-mock>=3.6.0",
    "pytest-cov>=4.0.0",
    "black>=22.0.0",
    "flake8>=4.0.0",
    "mypy>=0.950",
]

setup(
    name="carreau-stokes",
    version="1.0.0",
    description="Taylor-Hood finite element solver and convergence harness for the non-isothermal Carreau Stokes problem",
    long_description=long_description,
    long_description_content_type="text/markdown",

    packages=["carreau_stokes", "carreau_stokes.tests"],

    python_requires=">=3.9",

    install_requires=requirements,

    extras_require={
        "dev": dev_requirements,
        "all": requirements + dev_requirements,
    },

    entry_points={
        "console_scripts": [
            "carreau-stokes=carreau_stokes.cli:cli",
        ],
    },

    include_package_data=True,

    package_data={
        "carreau_stokes": ["config/*.ini", "config/*.md"],
    },

    keywords="finite-elements, stokes, carreau, non-newtonian, convergence",

    zip_safe=False,
)
