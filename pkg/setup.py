from setuptools import setup, find_packages

setup(
    name="dta-prevalence-bias",
    version="0.1.0",
    packages=find_packages(),
    package_data={
        "dta_prevalence_bias": ["examples/*.toml"],
    },
    include_package_data=True,
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "pandas>=1.5",
        "joblib>=1.1",
        "matplotlib>=3.5",
        "Pillow>=8.0.0",
        "markdown>=3.0.0",
        "tomli>=1.1.0; python_version < '3.11'",
    ],
    extras_require={
        "dev": [
            "pytest>=6.0",
            "pytest-cov",
            "black",
            "flake8",
            "mypy",
            "pandas-stubs",
        ],
    },
    entry_points={
        "console_scripts": [
            "dta-bias=dta_prevalence_bias.__main__:main",
        ],
    },
    description="Simulate prevalence-related bias in diagnostic accuracy meta-analyses and adjust for it with latent class models",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
)
