"""Identity sequences, spherical pictures, and independence certificates.

The package implements a symbolic toolkit for group presentations whose
relator set is split into families: free-group word algebra, sequences of
conjugated relators with their elementary operations, combinatorial pictures
with their moves, and an equator-factorization engine that certifies when a
word lying in both a family's normal closure and the complementary closure
factors into shared-relator conjugates and commutators.
"""

__version__ = "0.1.0"
