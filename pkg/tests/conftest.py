"""Shared builders for the test suite."""

import numpy as np

from blocklanczos import spectrum_to_matrix


def rand_spd(n, seed, low=0.5, high=5.0):
    """Dense SPD matrix with a known random spectrum.

    Returns (a, eigs, rng) with the generator advanced past the
    construction draws, so callers can draw start blocks from the same
    stream.
    """
    rng = np.random.default_rng(seed)
    eigs = np.sort(rng.uniform(low, high, n))
    a, _ = spectrum_to_matrix(eigs, rng)
    return a, eigs, rng
