from setuptools import find_packages, setup

with open("README.md", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="hypergeometric-pingpong",
    version="0.1.0",
    description="hypergeometric-pingpong builds the hypergeometric group generators R, T and U = TR and decides, "
    "in exact rational arithmetic, whether simplicial cones give ping-pong tables for them. It also reproduces the "
    "uniqueness obstructions and the plane projection figures.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "examples*"]),
    keywords="hypergeometric groups ping-pong cones exact arithmetic",
    install_requires=["pandas>=2.0.0", "numpy", "sympy", "python-dotenv"],
    entry_points={"console_scripts": ["hypergeometric-pingpong=hypergeometric_pingpong.cli:main"]},
    python_requires=">=3.9",
)
