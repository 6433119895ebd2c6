"""Sieving of prime-factor counts and weighted ergodic averaging along them.

Submodules: ``sieve`` (segmented factor-count sieve), ``stats`` (almost-prime
weight tables and asymptotics), ``dynamics`` (demo systems), ``averaging``
(schemes and regrouping identities), ``maximal`` (weak-(1,1) certificates),
``sweepout`` (sweeping-out certificates), ``cli`` (command-line front-end).
"""

from .backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
