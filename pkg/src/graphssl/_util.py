import numpy as np


def argmax_lowest(scores: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Row-wise argmax where near-ties go to the lowest column.

    Scores within ``rtol`` (relative to the row's largest magnitude) of the
    row maximum count as tied; rounding noise cannot then decide the winner.
    """
    scores = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    top = scores.max(axis=1, keepdims=True)
    slack = rtol * np.abs(scores).max(axis=1, keepdims=True)
    return np.argmax(scores >= top - slack, axis=1)
