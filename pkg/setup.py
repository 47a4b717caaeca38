try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup


with open("README.rst") as f:
    README = f.read()
with open("CHANGES.rst") as f:
    CHANGES = f.read()


tests_require = [
    'manuel',
    'scikit-learn',
    'zope.testrunner',
]

setup(
    name="SalBranch",
    version='1.0.dev0',
    author="SalBranch Contributors",
    description="Saliency maps learned by a classifier's attention branch",
    keywords=('saliency fixation prediction center bias eye tracking'
              ' metrics'),
    long_description=README + "\n\n" + CHANGES,
    license="ZPL 2.1",
    packages=[
        "SalBranch",
        "SalBranch.tests",
        ],
    package_dir={'': 'src'},
    package_data={'SalBranch': ['schema.xml']},
    install_requires=[
        'numpy',
        'pypng',
        'scipy',
        'ZConfig',
    ],
    entry_points={
        'console_scripts': [
            'salbranch = SalBranch.cmdline:main',
        ],
    },
    include_package_data=True,
    zip_safe=False,
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Zope Public License',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Programming Language :: Python :: Implementation :: CPython',
        'Topic :: Scientific/Engineering :: Image Recognition',
    ],
    python_requires='>=3.9',
    extras_require={
        'test': tests_require,
        'docs': [
            'Sphinx',
            'sphinxcontrib-programoutput',
        ],
    },
)
