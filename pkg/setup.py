from setuptools import setup, find_packages
import os.path

HERE = os.path.abspath(os.path.dirname(__file__))


def read(*parts):
    with open(os.path.join(HERE, *parts)) as f:
        return f.read()


setup(
    name="affdim",
    version="0.1.0",
    description="Affinity dimension, L^q dimensions and their estimators for "
                "planar self-affine sets and measures",
    long_description=read("README.rst"),
    license="MIT",
    keywords=["fractals", "self-affine", "dimension", "multifractal",
              "iterated function systems"],
    packages=find_packages(exclude=["tests"]),
    entry_points={
        'console_scripts': ['affdim=affdim.__main__:main'],
    },
    install_requires=[
        "numpy>=1.17",  # SeedSequence
        "scipy",
        "Pillow",
    ],
    extras_require={
        "tests": [
            "coverage",
            "pytest>=3.6.2",
            "tox",
        ],
    },
    classifiers=[
        # How mature is this project? Common values are
        #   3 - Alpha
        #   4 - Beta
        #   5 - Production/Stable
        'Development Status :: 3 - Alpha',

        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',

        'License :: OSI Approved :: MIT License',

        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
    ],
)
