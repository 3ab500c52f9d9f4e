"""Class group actions on ordinary elliptic curves and a simulated hidden-shift sieve.

Modules: ``classgroup`` (binary quadratic forms), ``relations`` (factor-base
relations and random walks), ``curves`` (the isogeny star operator),
``sieve`` (exact simulation of the hidden-shift sieve), ``attack`` (the
end-to-end quotient recovery) and ``cli``.
"""

__version__ = "0.1.0"
