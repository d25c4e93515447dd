"""Small shared helpers: vectorization, seeded random streams, solve auditing."""

import hashlib

import numpy as np


def vec(A):
    """Column-major vectorization: entry (i, j) lands at k = i + n*j."""
    return np.asarray(A).reshape(-1, order="F")


def unvec(v, n, p):
    """Inverse of :func:`vec`."""
    return np.asarray(v).reshape(n, p, order="F")


def stream_seed(master_seed, *names):
    """Deterministic 64-bit stream id for a named substream."""
    label = "/".join(str(s) for s in names)
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(master_seed, *names):
    """Independent generator for a named stream under one master seed.

    Streams are keyed by name, not by draw order, so adding a new consumer
    never perturbs the draws seen by existing ones.
    """
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed), stream_seed(master_seed, *names)])
    )


_ACTIVE_COUNTERS = []


class SolveCounter:
    """Context manager that audits every linear solve performed inside it.

    Every solve handle reports to all active counters, so nested counters
    see nested totals. This is the mechanism behind cost-accounting checks.
    """

    def __init__(self):
        self.count = 0

    def __enter__(self):
        _ACTIVE_COUNTERS.append(self)
        return self

    def __exit__(self, *exc):
        _ACTIVE_COUNTERS.remove(self)
        return False


def count_solve(n=1):
    for counter in _ACTIVE_COUNTERS:
        counter.count += n
