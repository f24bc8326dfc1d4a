"""hdx-calculus version information.

The version is written into the header of every check report, so a change in
any asserted constant, tolerance or default grid bumps it.

Version numbering follows semantic versioning (semver.org):
- MAJOR version: incompatible changes to the report schema or the CLI
- MINOR version: new checks, suites or generators
- PATCH version: numerical fixes that do not change check semantics
"""

__version__ = "0.1.0"
