from setuptools import setup, find_packages

with open("requirements.txt") as f:
	install_requires = [line for line in f.read().strip().split("\n") if line and not line.startswith("#")]

# get version from __version__ variable in fide_solver/__init__.py
from fide_solver import __version__ as version

setup(
	name="fide_solver",
	version=version,
	description="Green's-function fixed-point solver for fourth-order functional integro-differential boundary value problems",
	author="fide_solver contributors",
	packages=find_packages(),
	zip_safe=False,
	include_package_data=True,
	python_requires=">=3.10",
	install_requires=install_requires,
	extras_require={"test": ["pytest>=7"]},
	entry_points={"console_scripts": ["fide-solver=fide_solver.cli:main"]},
)
