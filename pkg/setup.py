from setuptools import setup

# try:
#     import pypandoc
#     long_description = pypandoc.convert('README.md', 'rst')
# except (IOError, ImportError, OSError):
#     long_description = ""

setup(
    name = 'negotiation-utilities',
    version = '1.1.0.0',
    description = 'Two-player negotiation games between LLM and scripted agents, with tournaments and behavioral probes',
    # long_description = long_description,
    author = 'negotiation-utilities developers',
    packages = ['negotiation_utilities', 'tests'],
    install_requires = ['numpy', 'matplotlib', 'seaborn', 'scipy', 'openai', 'backoff'],
    extras_require = {'test': ['pytest']},
    entry_points = {
        'console_scripts': ['negotiation-utilities = negotiation_utilities.cli:main'],
    },

    classifiers = [
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Operating System :: MacOS',
        'Operating System :: Unix',
        'Programming Language :: Python :: 3.10',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
    ],
)
