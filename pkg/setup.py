from setuptools import find_packages, setup

import io

install_required = ["numpy>=1.19", "scipy>=1.7", "pandas>=1.5", "joblib>=1.0"]

LONG_DESCRIPTION = io.open("README.md", encoding="utf-8").read()

classifiers = [
    "Development Status :: 4 - Beta",
    "Environment :: Console",
    "Intended Audience :: Science/Research",
    "License :: OSI Approved",
    "Operating System :: MacOS :: MacOS X",
    "Operating System :: Microsoft :: Windows",
    "Operating System :: POSIX :: Linux",
    "Operating System :: Unix",
    "Programming Language :: Python :: 3.8",
    "Programming Language :: Python :: 3.9",
    "Programming Language :: Python :: 3.10",
    "Programming Language :: Python :: 3.11",
    "Topic :: Scientific/Engineering",
    "Topic :: Scientific/Engineering :: Mathematics",
]


setup(
    name="osfd",
    classifiers=classifiers,
    packages=find_packages(),
    package_dir={"osfd": "./osfd"},
    package_data={"": ["py.typed"]},
    include_package_data=True,
    license="NCSA",
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    description="Sequential designs of computer experiments that fill the output space",
    keywords=[
        "design of experiments",
        "computer experiments",
        "space-filling design",
        "sequential design",
        "output space",
        "fill distance",
        "expected improvement",
        "latin hypercube",
        "inverse design",
    ],
    entry_points={"console_scripts": ["osfd = osfd.cli:main"]},
    zip_safe=False,
    install_requires=install_required,
    python_requires=">=3.8",
)
