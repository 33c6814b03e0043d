#!/usr/bin/env python3

from setuptools import setup
from setuptools import find_packages


with open("README.md", "r", encoding="utf-8") as fp:
    long_description = fp.read()


setup(
    name                          = "litelmg",
    version                       = "2026.10",
    description                   = "LMG model simulator for NV spin ensembles coupled to two cavities",
    long_description              = long_description,
    long_description_content_type = "text/markdown",
    test_suite                    = "test",
    license                       = "BSD",
    python_requires               = "~=3.8",
    install_requires              = ["pyyaml", "numpy", "scipy"],
    packages                      = find_packages(exclude=("test*", "configs*", "examples*")),
    include_package_data          = True,
    keywords                      = "LMG spin-squeezing open-quantum-systems NV-centers cavity-QED",
    classifiers                   = [
        "Topic :: Scientific/Engineering :: Physics",
        "Environment :: Console",
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: BSD License",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
    ],
    entry_points = {
        "console_scripts": [
            "litelmg_gen=litelmg.gen:main",
        ],
    },
)
