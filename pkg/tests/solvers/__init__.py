"""Tests for the model problem solvers."""

import numpy as np

MANUFACTURED = {
    "name": "manufactured",
    "wave_number": 10,
    "source": {
        "pieces": [
            {
                "interval": [0, 1],
                "terms": [{"omega": "10", "coeffs": [-10]}, {"omega": "-10", "coeffs": [-10]}],
            }
        ]
    },
    "radiation": "sin(10) + 10*cos(10) - 10*I*sin(10)",
}


def manufactured_solution(x):
    """Return x sin(10 x), the solution of the manufactured problem."""
    return x * np.sin(10 * x)
