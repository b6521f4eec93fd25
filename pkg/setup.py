"""
This file is used to install the package innerlab.

Run the following command from the root directory of the package to install the package:
    ```pip install -e .```

"""

from setuptools import find_packages, setup

setup(
    name='innerlab',
    version='0.1.0',
    packages=find_packages(include=['innerlab', 'innerlab.*']),
    python_requires='>=3.10',
    install_requires=[
        'numpy',
        'pandas',
        'scipy',
        'mpmath',
        'parglare>=0.16,<0.19',
        'loguru',
        'rich',
    ],
    entry_points={
        'console_scripts': ['innerlab=innerlab.cli:main'],
    },
)
