#!/usr/bin/env python

try:
    from setuptools import setup, find_packages
except ImportError:
    from setuptools import setup, find_packages

setup(
    name='consortium_ledger',
    version='0.1.0',
    description='A desk-scale confidential consortium ledger driven by a deterministic simulator',
    classifiers=[
        "Development Status :: 4 - Beta",
        "Environment :: Console",
        "Intended Audience :: Developers",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: System :: Distributed Computing",
    ],
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "click>=8.1.7",
        "rich>=13.7.0",
        "tqdm>=4.66.1",
        "pyyaml>=6.0.1",
        "pydantic>=2.6.1",
        "tomli>=2.0.1",
        "cryptography>=42.0.0",
    ],
    entry_points={
        'console_scripts': [
            'consortium-ledger = consortium_ledger.cli:main',
        ]
    },
    python_requires='>=3.9',
    tests_require=['pytest', 'hypothesis'],
    zip_safe=True
)
