#!/usr/bin/env python

from setuptools import setup

setup(
    name='levelchain',
    version='1.0',
    description='Exact and Monte Carlo fixed-budget analysis of (1+1) '
                'evolutionary algorithms with binomial crossover',
    packages=['levelchain'],
    install_requires=['numpy', 'scipy'],
    entry_points={
        'console_scripts': ['levelchain = levelchain.__main__:main'],
    },
    )
