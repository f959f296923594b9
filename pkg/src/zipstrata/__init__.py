"""Weyl-group combinatorics of algebraic zip data, with a finite-field oracle.

Subpackages:

* ``root_weyl``  -- root systems, Weyl elements, Bruhat order, Frobenius.
* ``parabolic``  -- parabolic types, minimal coset representatives, w0 identities.
* ``zip_poset``  -- zip data, twisted orders, strata posets, the duality sigma0.
* ``fq``         -- small finite fields with pinned Conway moduli.
* ``fq_oracle``  -- GL_n/SL_n(F_q) realisation: zip-group orbits, Lang map,
                    fine Deligne-Lusztig stratum point counts.
* ``cli``        -- the ``zipstrata`` command-line frontend.
"""

__version__ = "0.1.0"

from .exceptions import (
    ConfigurationError,
    ConsistencyError,
    ResourceCapError,
    UsageError,
    ZipstrataError,
)

__all__ = [
    "ConfigurationError",
    "ConsistencyError",
    "ResourceCapError",
    "UsageError",
    "ZipstrataError",
    "__version__",
]
