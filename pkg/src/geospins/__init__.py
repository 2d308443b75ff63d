"""Monte Carlo toolkit for vector spin fields attached to random point sets.

Submodules: ``point_process`` (disorder sampling and correlation
estimation), ``geometric_graph`` (radius graphs and weighted degree
functionals), ``spin_model`` (potentials, energies, tempered norms),
``local_gibbs`` (finite-volume kernels by MCMC and quadrature),
``quench_experiments`` (volume/disorder studies), ``io``/``cli`` (formats
and command line).
"""

__version__ = "0.1.0"
