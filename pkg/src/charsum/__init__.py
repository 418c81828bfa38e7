"""Desk-scale statistics of Dirichlet character sums mod a prime.

Subpackages cover number-theoretic primitives (``arith``), the character
group via discrete logs (``characters``), the bulk prefix-sum scan engine
(``scan``), L(1, chi) evaluation (``lfun``), the Dickman rho / P(u) tables
(``dickman``), smooth-number sums and exact identity verifiers (``smooth``),
the random multiplicative model (``model``), empirical distributions and
structure analysis (``stats``), and the command-line orchestrator (``cli``).
"""

__version__ = "0.1.0"

from . import arith, characters  # noqa: F401
