"""Linear differential systems over C(z) and R(z): series solutions, numerical
monodromy, gauge equivalence, Galois descent and a Fuchsian realizer for
conjugate-symmetric monodromy data."""

__version__ = "0.1.0"
