"""Formal fundamental solution of s' = -A s at a regular point."""

from __future__ import annotations

from fractions import Fraction

from ..errors import InsufficientOrder, PoleAtBasePoint
from .matrix import Matrix, coefficients_to_series
from .series import TruncatedSeries


def series_solve_linear_ode(A: Matrix, z0, N: int) -> Matrix:
    """Psi with Psi(z0) = I and Psi' + A Psi = 0, as series of order N.

    Columns of Psi are the flat sections of the connection d + A.
    """
    if N < 0:
        raise InsufficientOrder("series order must be nonnegative")
    z0 = Fraction(z0)
    m = A.nrows
    if A.ncols != m:
        raise ValueError(f"connection matrix must be square, got {A.shape}")
    order_a = max(N - 1, 0)
    coeffs_a = []
    try:
        series = [[TruncatedSeries.from_rf(a, z0, order_a) for a in row] for row in A.rows]
    except PoleAtBasePoint as exc:
        raise PoleAtBasePoint(f"connection has a pole at z = {z0}: {exc}") from None
    for k in range(order_a + 1):
        coeffs_a.append(Matrix([[s.coeffs[k] for s in row] for row in series]))
    psi = [Matrix.identity(m, Fraction(1))]
    for k in range(N):
        acc = Matrix.zeros(m, m, Fraction(0))
        for i in range(k + 1):
            if not coeffs_a[i].is_zero():
                acc = acc + coeffs_a[i] @ psi[k - i]
        psi.append(acc * Fraction(-1, k + 1))
    return coefficients_to_series(psi, z0)
