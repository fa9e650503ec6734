"""Dimensionality-reduction models mapping a short spectrum ``gamma`` (length
``n``) to a full one ``delta`` (length ``n_c``).

Two families are provided:

* ``lft``: the conventional low-frequency selection matrix that keeps the top
  ``m`` and bottom ``k`` subcarriers and zeroes the rest.  It does *not*
  preserve the spectral geometry.
* ``pc_ppt``: the piecewise-constant geometry-preserving transformation
  ``T = F @ Ttilde @ Ftilde^H`` whose time-domain core ``Ttilde`` repeats each
  of the ``n`` time samples ``n_c/n`` times, scaled by ``sqrt(n/n_c)`` so its
  columns are orthonormal.  When ``gamma`` lies on the ``n``-dimensional
  geometry, ``T @ gamma`` lies on the ``n_c``-dimensional one.

``validate_ppt`` checks the three geometry-preservation conditions on a
candidate core ``Ttilde``, for every shift ``l = 1..n_c-1``:

    (a) ``Ttilde^H Ttilde = I``
    (b) ``t_i^H D_l t_j = 0`` for ``i != j``
    (c) ``sum_i t_i^H D_l t_i = 0``

where ``D_l = F^H P_l F = diag(exp(2j*pi*m*l/n_c))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phasenoise import SpectralVector, _values
from .spectral import dft_matrix

__all__ = [
    "DimRedModel",
    "PptValidation",
    "default_lft",
    "lft",
    "lift",
    "pc_ppt",
    "validate_ppt",
]

PPT_TOL = 1e-12


@dataclass(frozen=True)
class DimRedModel:
    """Immutable reduction model: ``delta = T @ gamma``."""

    kind: str  # "lft" | "ppt"
    T: np.ndarray  # n_c x n, orthonormal columns
    Ttilde: np.ndarray | None  # time-domain core (ppt only)
    n_c: int
    n: int
    ppt_valid: bool


def lft(n_c: int, m: int, k: int) -> DimRedModel:
    """Low-frequency selection model keeping ``m`` top and ``k`` bottom bins.

    Rows ``0..m-1`` of ``T`` map to ``gamma[0..m-1]`` and rows
    ``n_c-k..n_c-1`` to ``gamma[m..m+k-1]``; all other rows are zero.
    """
    if m < 1 or k < 0:
        raise ValueError("need m >= 1 and k >= 0")
    if m + k > n_c:
        raise ValueError(f"m + k = {m + k} exceeds n_c = {n_c}")
    n = m + k
    T = np.zeros((n_c, n), dtype=complex)
    T[:m, :m] = np.eye(m)
    if k:
        T[n_c - k:, m:] = np.eye(k)
    return DimRedModel("lft", T, None, n_c, n, False)


def default_lft(n_c: int, n: int) -> DimRedModel:
    """LFT with the default split ``m = ceil((n+1)/2)``, ``k = n - m``."""
    m = (n + 2) // 2
    return lft(n_c, m, n - m)


def pc_ppt(n_c: int, n: int) -> DimRedModel:
    """Piecewise-constant geometry-preserving model.

    Requires ``n`` to divide ``n_c``.  The core ``Ttilde`` has blocks
    ``sqrt(n/n_c) * ones(n_c/n)`` down the diagonal, which makes its columns
    orthonormal and maps constant-modulus ``1/sqrt(n)`` time samples to
    constant-modulus ``1/sqrt(n_c)`` ones.
    """
    if n < 1 or n_c < 1:
        raise ValueError("dimensions must be positive")
    if n_c % n != 0:
        raise ValueError(f"n = {n} must divide n_c = {n_c}")
    rep = n_c // n
    Ttilde = np.zeros((n_c, n), dtype=complex)
    scale = np.sqrt(n / n_c)
    for i in range(n):
        Ttilde[i * rep:(i + 1) * rep, i] = scale
    F = dft_matrix(n_c)
    Ft = dft_matrix(n)
    T = F @ Ttilde @ Ft.conj().T
    report = validate_ppt(Ttilde)
    return DimRedModel("ppt", T, Ttilde, n_c, n, report.passed)


@dataclass(frozen=True)
class PptValidation:
    """Worst violation of each geometry-preservation condition."""

    unitarity: float  # max |Ttilde^H Ttilde - I|
    off_diagonal: float  # max over l>=1, i != j of |t_i^H D_l t_j|
    trace_sum: float  # max over l>=1 of |sum_i t_i^H D_l t_i|
    tol: float
    passed: bool


def validate_ppt(Ttilde, tol: float = PPT_TOL) -> PptValidation:
    """Check the three core conditions for all shifts ``l = 1..n_c-1``.

    The inner products against the diagonal ``D_l`` are evaluated for all
    ``l`` at once via FFTs of the columnwise products, which is exact up to
    roundoff and O(n^2 * n_c log n_c).
    """
    Tt = np.asarray(Ttilde, dtype=complex)
    if Tt.ndim != 2:
        raise ValueError("Ttilde must be a matrix")
    n_c, n = Tt.shape
    # forms[l, i, j] = t_i^H D_l t_j = sum_m conj(Tt[m,i]) Tt[m,j] e^{2j pi m l / n_c}
    prods = np.conj(Tt)[:, :, None] * Tt[:, None, :]
    forms = n_c * np.fft.ifft(prods, axis=0)
    unitarity = float(np.max(np.abs(forms[0] - np.eye(n))))
    off = np.abs(forms[1:]).copy()
    off[:, np.arange(n), np.arange(n)] = 0.0
    off_diagonal = float(off.max()) if off.size else 0.0
    traces = np.trace(forms[1:], axis1=1, axis2=2)
    trace_sum = float(np.max(np.abs(traces))) if traces.size else 0.0
    passed = max(unitarity, off_diagonal, trace_sum) < tol
    return PptValidation(unitarity, off_diagonal, trace_sum, tol, passed)


def lift(model: DimRedModel, gamma) -> SpectralVector:
    """Lift a reduced spectrum: ``delta = T @ gamma``.

    For a valid geometry-preserving model and a ``gamma`` on the reduced
    geometry, the output lies on the full geometry; for an LFT it generally
    does not.
    """
    g = _values(gamma)
    if g.size != model.n:
        raise ValueError(f"gamma has length {g.size}, model expects {model.n}")
    return SpectralVector.from_values(model.T @ g)
