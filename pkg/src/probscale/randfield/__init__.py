"""Random-data sampling, second Picard iterates, norms and variance oracles."""
