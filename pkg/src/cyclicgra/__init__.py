"""Group relation algebras over finite cyclic groups: construction from index
systems, and measurability analysis, scaffolds and complete representations
of finite atomic relation algebras."""

__version__ = "0.1.0"
