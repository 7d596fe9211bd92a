"""Setup script."""
import setuptools

REQUIRES = [
    "attrs",
    "numpy>=1.20",
    "scipy>=1.7",
    "sympy>=1.9",
    "mpmath>=1.2",
]

setuptools.setup(
    include_package_data=True,
    install_requires=REQUIRES,
    package_data={"libwavelets": ["fixtures/*.json"]},
    entry_points={"console_scripts": ["libwavelets = libwavelets.cli:main"]},
)
