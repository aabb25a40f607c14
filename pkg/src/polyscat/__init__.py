"""polyscat: imaging convex polyhedral impedance scatterers from a single
electric far-field pattern, with a numerically verified reflection/extension
operator for Maxwell's equations under impedance boundary conditions."""

__version__ = "0.1.0"
