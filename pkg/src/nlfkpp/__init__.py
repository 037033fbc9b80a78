"""Solvers for the 1D nonlocal Fisher-KPP equation with a top-hat kernel.

Modules: ``kernel`` (grids and window convolution), ``dispersion`` (linear
stability and tongue boundaries), ``evolve`` (time stepping), ``steady``
(periodic steady states), ``asymptote`` (reference problems from the small-D
analysis), ``travwave`` (travelling fronts and their tails) and ``cli``.
"""

__version__ = "0.1.0"
