"""Pauli and Dirac matrices and closed-form exponentials of the small
structured matrices that appear in every potential factor.

All exponentials are vectorized: scalar coefficients may be replaced by
arrays of any shape ``S`` and the result then has shape ``S + (n, n)``.
"""

import numpy as np
import scipy.linalg

from diracsim.errors import AlgebraError

SERIES_THRESHOLD = 1e-4

I2 = np.eye(2, dtype=np.complex128)
I4 = np.eye(4, dtype=np.complex128)

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)

_ZERO2 = np.zeros((2, 2), dtype=np.complex128)

ALPHA = np.array([np.block([[_ZERO2, s], [s, _ZERO2]]) for s in SIGMA])
BETA = np.block([[I2, _ZERO2], [_ZERO2, -I2]])
GAMMA = np.block([[_ZERO2, I2], [I2, _ZERO2]])

_DIRAC_NAMES = {
    "alpha1": ALPHA[0],
    "alpha2": ALPHA[1],
    "alpha3": ALPHA[2],
    "beta": BETA,
    "gamma": GAMMA,
}
_DIRAC_ALIASES = {"α1": "alpha1", "α2": "alpha2", "α3": "alpha3", "β": "beta", "γ": "gamma"}


def pauli(j: int) -> np.ndarray:
    if j not in (1, 2, 3):
        raise AlgebraError(f"Pauli index must be 1, 2 or 3, got {j!r}")
    return SIGMA[j - 1].copy()


def dirac_matrix(name: str) -> np.ndarray:
    key = _DIRAC_ALIASES.get(name, name).lower()
    if key not in _DIRAC_NAMES:
        raise AlgebraError(f"unknown Dirac matrix {name!r}")
    return _DIRAC_NAMES[key].copy()


def clifford_basis(ncomp: int, dimension: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the derivative generators ``M_1..M_d`` and the mass matrix ``B``.

    Two components use (σ1, σ2) with σ3; four components use (α1, α2, α3) with β.
    """
    if dimension not in (1, 2, 3):
        raise AlgebraError(f"dimension must be 1, 2 or 3, got {dimension}")
    if ncomp == 2:
        if dimension == 3:
            raise AlgebraError("two-component fields support dimension 1 or 2 only")
        return SIGMA[:dimension].copy(), SIGMA[2].copy()
    if ncomp == 4:
        return ALPHA[:dimension].copy(), BETA.copy()
    raise AlgebraError(f"component count must be 2 or 4, got {ncomp}")


def sin_over(x):
    """sin(x)/x, with a Taylor series near zero."""
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)


def _as_matrix_coefficient(values) -> np.ndarray:
    return np.asarray(values)[..., None, None]


def _pad3(vector) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape[-1] > 3:
        raise AlgebraError("affine coefficient vectors have at most 3 entries")
    if vector.shape[-1] == 3:
        return vector
    pad = [(0, 0)] * (vector.ndim - 1) + [(0, 3 - vector.shape[-1])]
    return np.pad(vector, pad)


def exp_pauli_affine(v0, b, s) -> np.ndarray:
    """exp(s(-i v0 I - i b·σ)) in closed form. ``b`` carries its 3 entries on the last axis."""
    v0 = np.asarray(v0, dtype=np.float64)
    b = _pad3(b)
    s = np.asarray(s, dtype=np.float64)

    norm = np.sqrt(np.sum(b * b, axis=-1))
    theta = s * norm
    cos_part = np.cos(theta)
    sin_part = s * sin_over(theta)

    b_sigma = np.einsum("...k,kab->...ab", b.astype(np.complex128), SIGMA)
    rotation = _as_matrix_coefficient(cos_part) * I2 - 1j * _as_matrix_coefficient(sin_part) * b_sigma
    phase = np.exp(-1j * s * v0)
    return _as_matrix_coefficient(phase) * rotation


def exp_dirac_affine(v0, a, bcoef, s) -> np.ndarray:
    """exp(s(-i v0 I + i a·α - i bcoef β)) in closed form, using (a·α - bβ)² = (|a|² + b²) I."""
    v0 = np.asarray(v0, dtype=np.float64)
    a = _pad3(a)
    bcoef = np.asarray(bcoef, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)

    radius = np.sqrt(np.sum(a * a, axis=-1) + bcoef * bcoef)
    theta = s * radius
    cos_part = np.cos(theta)
    sin_part = s * sin_over(theta)

    generator = np.einsum("...k,kab->...ab", a.astype(np.complex128), ALPHA)
    generator = generator - _as_matrix_coefficient(bcoef) * BETA
    rotation = _as_matrix_coefficient(cos_part) * I4 + 1j * _as_matrix_coefficient(sin_part) * generator
    phase = np.exp(-1j * s * v0)
    return _as_matrix_coefficient(phase) * rotation


def exp_dense(matrix, s: float = 1.0) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape not in ((2, 2), (4, 4)):
        raise AlgebraError(f"dense exponential supports 2x2 and 4x4 matrices, got {matrix.shape}")
    return scipy.linalg.expm(s * matrix)
