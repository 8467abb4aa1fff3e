from setuptools import setup, find_packages

with open('README.md') as readme_file:
    readme = readme_file.read()

setup(name='sgtools',
      version='1.0.0',
      description='Partial 3D scene graph matching, registration and '
                  'mosaicking tools',
      long_description_content_type='text/markdown',
      long_description=readme,
      license='GPLv3',
      packages=find_packages(exclude=['tests']),
      python_requires='>=3.7',
      install_requires=[
            'deepdiff>=3.3.0',
            'numpy>=1.17',
            'PyYAML>=5.1',
            'scipy>=1.4'
      ],
      setup_requires=['pytest-runner'],
      tests_require=['pytest', 'hypothesis'],
      entry_points={
            'console_scripts': [
                  'sgtools=sgtools.cli.cli:main'
            ]
      },
      classifiers=[
            'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
            'Programming Language :: Python :: 3 :: Only'
      ]
      )
