from setuptools import setup

with open("README.md") as file:
    long_description = file.read()

setup(
    name="svmcoreset",
    version="0.1.0",
    packages=[
        "svmcoreset",
        "svmcoreset.data",
        "svmcoreset.datagen",
        "svmcoreset.objective",
        "svmcoreset.solver",
        "svmcoreset.clustering",
        "svmcoreset.sensitivity",
        "svmcoreset.coreset",
        "svmcoreset.streaming",
        "svmcoreset.bench",
    ],
    license="MIT",
    description="Sensitivity sampling coresets for regularized linear SVMs, offline and streaming.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Intended Audience :: Science/Research",
        "Development Status :: 3 - Alpha",
        "Natural Language :: English",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    python_requires=">=3.8",
    install_requires=["numpy>=1.20", "pandas>=1.2", "scikit-learn>=1.0"],
    extras_require={"orjson": ["orjson"], "test": ["pytest"], "all": ["orjson", "pytest"]},
    entry_points={"console_scripts": ["svmcoreset=svmcoreset.cli:main"]},
    keywords="coreset svm sensitivity sampling importance sampling streaming merge-and-reduce",
)
