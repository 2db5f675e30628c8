"""Exact U(3) matrix algebra at machine precision.

Provides the trace-orthonormal nine-matrix basis (eight traceless Hermitian
generators plus a normalised identity), the coordinate map between doubly
indexed 3x3 matrices and their diagonal/off-diagonal components, residuals
for the completeness relation and the elementary-matrix commutator table,
and the detuning shifts produced by projecting onto fixed charge sectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "elementary",
    "gell_mann_basis",
    "OrthogonalCoords",
    "to_orthogonal_coords",
    "from_orthogonal_coords",
    "orthogonality_residual",
    "completeness_residual",
    "commutator_table_residual",
    "ChargeSector",
    "detuning_shift",
    "fundamental_weights",
    "weight_norm_residual",
]

# Coordinates of the diagonal sector use the three-body (Jacobi) vectors
# (1,-1,0)/sqrt2, (1,1,-2)/sqrt6, (1,1,1)/sqrt3.
_DIAG_SECTOR = (3, 8, 0)
_OFFDIAG_SECTOR = (1, 2, 4, 5, 6, 7)


def elementary(alpha: int, beta: int) -> np.ndarray:
    """3x3 complex matrix with a single unit entry at (alpha, beta), 0-based."""
    m = np.zeros((3, 3), dtype=complex)
    m[alpha, beta] = 1.0
    return m


def gell_mann_basis() -> list[np.ndarray]:
    """Ordered basis lam[0..8] with (1/2) Tr(lam_A lam_B) = delta_AB.

    lam[1..8] are the conventional traceless Hermitian generators in the
    standard numbering (so array positions 3 and 8 carry the two diagonal
    generators); lam[0] = sqrt(2/3) * identity completes the basis for
    arbitrary Hermitian 3x3 matrices.
    """
    lam = [np.zeros((3, 3), dtype=complex) for _ in range(9)]
    lam[0] = np.sqrt(2.0 / 3.0) * np.eye(3, dtype=complex)
    lam[1] = elementary(0, 1) + elementary(1, 0)
    lam[2] = -1j * elementary(0, 1) + 1j * elementary(1, 0)
    lam[3] = elementary(0, 0) - elementary(1, 1)
    lam[4] = elementary(0, 2) + elementary(2, 0)
    lam[5] = -1j * elementary(0, 2) + 1j * elementary(2, 0)
    lam[6] = elementary(1, 2) + elementary(2, 1)
    lam[7] = -1j * elementary(1, 2) + 1j * elementary(2, 1)
    lam[8] = (elementary(0, 0) + elementary(1, 1) - 2 * elementary(2, 2)) / np.sqrt(3.0)
    return lam


@dataclass(frozen=True)
class OrthogonalCoords:
    """Components of a Hermitian 3x3 matrix in the orthonormal basis lam_A/sqrt2.

    x3, x8, x0 span the diagonal sector (three-body combinations of the
    diagonal entries); the remaining six span the off-diagonal sector.
    """

    x0: float
    x3: float
    x8: float
    x1: float = 0.0
    x2: float = 0.0
    x4: float = 0.0
    x5: float = 0.0
    x6: float = 0.0
    x7: float = 0.0

    def as_array(self) -> np.ndarray:
        """Coordinates ordered by basis index 0..8."""
        return np.array([self.x0, self.x1, self.x2, self.x3, self.x4,
                         self.x5, self.x6, self.x7, self.x8])


def to_orthogonal_coords(x: np.ndarray, hermitian_tol: float = 1e-12) -> OrthogonalCoords:
    """Decompose a Hermitian 3x3 matrix as x = (1/sqrt2) sum_A x_A lam_A.

    The diagonal-sector components reduce to
    x3 = (x11 - x22)/sqrt2, x8 = (x11 + x22 - 2 x33)/sqrt6,
    x0 = (x11 + x22 + x33)/sqrt3.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {x.shape}")
    if np.max(np.abs(x - x.conj().T)) > hermitian_tol:
        raise ValueError("matrix is not Hermitian; coordinates would be complex")
    coeffs = {}
    for a, lam in enumerate(gell_mann_basis()):
        coeffs[a] = np.trace(x @ lam).real / np.sqrt(2.0)
    return OrthogonalCoords(x0=coeffs[0], x3=coeffs[3], x8=coeffs[8],
                            x1=coeffs[1], x2=coeffs[2], x4=coeffs[4],
                            x5=coeffs[5], x6=coeffs[6], x7=coeffs[7])


def from_orthogonal_coords(c: OrthogonalCoords) -> np.ndarray:
    """Inverse of :func:`to_orthogonal_coords`."""
    lam = gell_mann_basis()
    out = np.zeros((3, 3), dtype=complex)
    for a, xa in enumerate(c.as_array()):
        out += xa * lam[a] / np.sqrt(2.0)
    return out


def orthogonality_residual() -> float:
    """Max deviation of (1/2) Tr(lam_A lam_B) from delta_AB over all 81 pairs."""
    lam = gell_mann_basis()
    worst = 0.0
    for a in range(9):
        for b in range(9):
            val = 0.5 * np.trace(lam[a] @ lam[b])
            worst = max(worst, abs(val - (1.0 if a == b else 0.0)))
    return float(worst)


def completeness_residual(extended: bool = False) -> float:
    """Max deviation of the basis completeness relation over all 81 index tuples.

    Plain form:     delta_ab delta_gd = (1/3) delta_gb delta_ad
                                        + (1/2) sum_{A=1..8} (lam_A)_gb (lam_A)_ad
    Extended form (``extended=True``) folds the 1/3 term into the A=0 member:
                    delta_ab delta_gd = (1/2) sum_{A=0..8} (lam_A)_gb (lam_A)_ad
    """
    lam = gell_mann_basis()
    first = 0 if extended else 1
    worst = 0.0
    for a in range(3):
        for b in range(3):
            for g in range(3):
                for d in range(3):
                    lhs = (1.0 if a == b else 0.0) * (1.0 if g == d else 0.0)
                    rhs = 0.0 if extended else (
                        (1.0 if g == b else 0.0) * (1.0 if a == d else 0.0) / 3.0)
                    rhs += 0.5 * sum(lam[A][g, b] * lam[A][a, d] for A in range(first, 9))
                    worst = max(worst, abs(lhs - rhs))
    return worst


def commutator_table_residual() -> float:
    """Max norm defect of [e_ab, e_gd] = delta_bg e_ad - delta_ad e_gb."""
    worst = 0.0
    for a in range(3):
        for b in range(3):
            for g in range(3):
                for d in range(3):
                    lhs = elementary(a, b) @ elementary(g, d) - elementary(g, d) @ elementary(a, b)
                    rhs = np.zeros((3, 3), dtype=complex)
                    if b == g:
                        rhs += elementary(a, d)
                    if a == d:
                        rhs -= elementary(g, b)
                    worst = max(worst, np.max(np.abs(lhs - rhs)))
    return worst


@dataclass(frozen=True)
class ChargeSector:
    """Conserved quantum numbers of a fixed charge sector.

    n0 is the total fermion number; m3 and m8 are the eigenvalues of the two
    conserved fermion-plus-impurity combinations. c, c3, c8 parametrise the
    residual charge polynomial (quadratic coefficient and the two linear
    ones); they depend on boundary conditions and are supplied by the caller
    or fitted numerically, never assumed.
    """

    n0: int = 0
    m3: float = 0.0
    m8: float = 0.0
    c: float = 0.0
    c3: float = 0.0
    c8: float = 0.0


def detuning_shift(sector: ChargeSector) -> tuple[float, float]:
    """Shifts of the two detunings induced by charge-sector projection.

    Returns (-(c*m3 + c3/2), -(c*m8 + c8/2)).
    """
    d3 = -(sector.c * sector.m3 + 0.5 * sector.c3)
    d8 = -(sector.c * sector.m8 + 0.5 * sector.c8)
    return d3, d8


def fundamental_weights() -> list[tuple[float, float]]:
    """Joint (m, y) eigenvalue pairs of the two diagonal generators."""
    lam = gell_mann_basis()
    return [(lam[3][i, i].real, lam[8][i, i].real) for i in range(3)]


def weight_norm_residual() -> float:
    """Max deviation of m^2 + y^2 from 4/3 over the three weights."""
    return max(abs(m * m + y * y - 4.0 / 3.0) for m, y in fundamental_weights())
