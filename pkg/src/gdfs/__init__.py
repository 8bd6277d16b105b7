"""Fourier approximation on manifolds through symmetric torus parameterizations.

A DFS transform maps the torus onto a manifold while respecting a group of
shift-and-reflection symmetries.  Functions on the manifold are pulled back to
the torus, expanded with the FFT and summed over a symmetry-adapted basis.

Modules
-------
symmetry
    Index algebra of the symmetry group: orbits, signs, canonical index sets.
manifolds
    Registered transforms (circle, interval, balls, spheres, cylinder, SO(3)).
fourier
    Sampling, coefficients, basis evaluation, partial sums, residuals.
analysis
    Convergence studies, rate constants and property probes.
cli
    The ``gdfs`` command.
"""

__version__ = "0.1.0"
