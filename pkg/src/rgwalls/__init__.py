"""Random-group wall laboratory.

Samples presentations in the density model and runs the combinatorial
machinery around them: cancellation, tiles, balanced tile-wall
structures and hypergraph walls on finite Cayley patches.
"""

__version__ = "0.1.0"
