"""Sine-Gordon inverse scattering toolkit.

Submodules: ``field`` (exact solutions, states, conserved quantities),
``scattering`` (direct transform), ``inverse`` (reconstruction),
``asymptotics`` (long-time formulas), ``pde`` (finite-difference reference
solver), ``diagnostics`` (norms and fits) and ``cli`` (the ``sg-ist`` command).
"""

__version__ = "0.1.0"
