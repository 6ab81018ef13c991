import sys

from setuptools import setup

REQUIRED_PYTHON = (3, 10)

if sys.version_info[:2] < REQUIRED_PYTHON:
    sys.exit(
        "cfselect needs Python {}.{} or newer (found {}.{}).".format(
            *REQUIRED_PYTHON, *sys.version_info[:2]
        )
    )

setup()
