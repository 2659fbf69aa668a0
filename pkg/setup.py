import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="hmm2-speaker",
    version="0.1.0",
    author="Illuminairy AI",
    author_email="tony.liu@yahoo.com",
    description="Second-order hidden Markov models with Gaussian-mixture "
        "emissions and an LPC-cepstral speaker identification pipeline",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    package_data={"hmm2_speaker.conf": ["*.toml"]},
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "pandas>=1.5.3",
        "toml~=0.10.2",
        "scikit-learn>=1.2.2",
    ],
    entry_points={
        "console_scripts": [
            "hmm2-speaker=hmm2_speaker.apps.console_app:main",
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.10",
        "License :: OSI Approved :: Apache Software License",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Multimedia :: Sound/Audio :: Speech",
        "Topic :: Software Development :: Libraries :: Python Modules"
    ],
)
