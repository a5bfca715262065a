"""Multi-peak bound states of coupled cubic Schrodinger systems:
ground-state profiles, ring ansatz assembly, energy expansions, reduced
radial models, symmetry-constrained Newton solves, and a config-driven
experiment pipeline."""

__version__ = "0.1.0"
