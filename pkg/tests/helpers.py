"""Instance generators shared by the tests."""

import math

import numpy as np


def gaussian_rows(k, n, rng):
    A = rng.standard_normal((k, n))
    return A / np.linalg.norm(A, axis=1, keepdims=True)


def multiscale_matrix(k, n, rng, levels=2, ratio=1e3):
    """Rows whose mass sits on a few shared column blocks, each block `ratio`
    times heavier than the next, over a light dense background.  Under small
    S and a matching W the peeling loop removes the blocks one at a time and
    renormalises the structured rows."""
    width = max(1, n // (8 * (levels + 1)))
    A = rng.uniform(0.5, 1.5, (k, n)) * rng.choice([-1, 1], (k, n))
    structured = rng.random(k) < 0.75
    structured[0] = True
    for lev in range(levels):
        cols = slice(lev * width, (lev + 1) * width)
        A[structured, cols] *= ratio ** (levels - lev)
    return A / np.linalg.norm(A, axis=1, keepdims=True)


def loop_overrides(k, n, S=2, tau=1 / 10001):
    """Constants under which |N2| <= n/2 still follows from the potential bound."""
    W = math.sqrt(2 * k * (S + 1) / (tau * n))
    return {"S": S, "W": W, "tau": tau}
