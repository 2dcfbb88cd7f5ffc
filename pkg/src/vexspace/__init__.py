"""Variable-exponent Lebesgue/Sobolev numerics on uniform grids."""
