"""Ergodicity of magnetization, two-site correlations and entanglement after a
transverse-field quench of the anisotropic XY model."""

__version__ = "0.1.0"
