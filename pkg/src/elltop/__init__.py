"""elltop: a numerical laboratory for non-autonomous integrable tops.

Subpackages follow the layers of the construction: special functions
(`elliptic`), sine-algebra structure constants (`algebra`), the universal
spin-field phase space (`fields`), equations of motion and Hamiltonians for
every model family (`dynamics`), Lax pairs and zero-curvature certification
(`lax`), finite-dimensional reductions (`reductions`), fixed-step integration
(`flow`), and the batch CLI (`cli`).
"""

__version__ = "0.1.0"
