"""
H2 norms and distances of small dense LTI models.

Models are held in descriptor form E x' = A x + B u, y = C^T x, with E
invertible. Second-order models M x'' + D x' + K x = F u enter through the
first-order realisation on [x; x'].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.integrate import trapezoid

from reusemor.core.errors import DimensionMismatch


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DescriptorModel:
    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self) -> None:
        k = self.A.shape[0]
        if self.E.shape != (k, k) or self.A.shape != (k, k):
            raise DimensionMismatch(f"E {self.E.shape} and A {self.A.shape} must be square of equal size")
        if self.B.shape[0] != k or self.C.shape[0] != k:
            raise DimensionMismatch("B and C must have as many rows as A")

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def transfer(self, s: complex) -> np.ndarray:
        return self.C.T @ np.linalg.solve(s * self.E - self.A, self.B)

    def poles(self) -> np.ndarray:
        return sla.eigvals(self.A, self.E)

    def is_stable(self) -> bool:
        p = self.poles()
        return bool(np.all(np.isfinite(p)) and np.all(p.real < 0))


def first_order(M, D, K, F, C) -> DescriptorModel:
    """Realisation E = diag(I, M), A = [[0, I], [-K, -D]], B = [0; F], C = [C; 0]."""
    M, D, K, F, C = (np.atleast_2d(np.asarray(X, dtype=np.float64)) for X in (M, D, K, F, C))
    r = K.shape[0]
    Z = np.zeros((r, r))
    eye = np.eye(r)
    E = np.block([[eye, Z], [Z, M]])
    A = np.block([[Z, eye], [-K, -D]])
    B = np.vstack([np.zeros_like(F), F])
    Cf = np.vstack([C, np.zeros_like(C)])
    return DescriptorModel(E, A, B, Cf)


def difference(a: DescriptorModel, b: DescriptorModel) -> DescriptorModel:
    """Error system with transfer function H_a - H_b."""
    if a.B.shape[1] != b.B.shape[1] or a.C.shape[1] != b.C.shape[1]:
        raise DimensionMismatch("models must share input and output dimensions")
    return DescriptorModel(
        sla.block_diag(a.E, b.E),
        sla.block_diag(a.A, b.A),
        np.vstack([a.B, b.B]),
        np.vstack([a.C, -b.C]),
    )


def h2_norm(model: DescriptorModel) -> float:
    """sqrt(trace(C^T P C)) with A' P + P A'^T + B' B'^T = 0, A' = E^{-1} A."""
    Ai = np.linalg.solve(model.E, model.A)
    Bi = np.linalg.solve(model.E, model.B)
    P = sla.solve_continuous_lyapunov(Ai, -Bi @ Bi.T)
    val = float(np.trace(model.C.T @ P @ model.C))
    return math.sqrt(max(val, 0.0))


def _quadrature_norm(model: DescriptorModel, omegas: np.ndarray) -> float:
    vals = np.full(omegas.size, np.nan)
    for k, w in enumerate(omegas):
        try:
            vals[k] = np.linalg.norm(model.transfer(1j * w), "fro") ** 2
        except np.linalg.LinAlgError:
            continue
    ok = np.isfinite(vals)
    if ok.sum() < 2:
        return math.nan
    return math.sqrt(max(trapezoid(vals[ok], omegas[ok]) / math.pi, 0.0))


def _frequency_scale(*models: DescriptorModel) -> float:
    radii = []
    for m in models:
        p = m.poles()
        p = p[np.isfinite(p)]
        if p.size:
            radii.append(float(np.max(np.abs(p))))
    return max(radii) if radii and max(radii) > 0 else 1.0


def h2_distance(a: DescriptorModel, b: DescriptorModel, *, relative: bool = True) -> float:
    """
    ||H_a - H_b||_H2, divided by ||H_b||_H2 when relative.

    Unstable models have no H2 norm; the L2 norm on the imaginary axis is
    then estimated by quadrature over a logarithmic frequency grid.
    """
    err = difference(a, b)
    if a.is_stable() and b.is_stable():
        num = h2_norm(err)
        den = h2_norm(b) if relative else 1.0
    else:
        logger.warning("H2 distance of an unstable model: falling back to frequency quadrature")
        scale = _frequency_scale(a, b)
        omegas = np.concatenate([[0.0], scale * np.logspace(-4, 2, 600)])
        num = _quadrature_norm(err, omegas)
        den = _quadrature_norm(b, omegas) if relative else 1.0
    if den == 0.0:
        return num
    return num / den


def second_order_distance(a, b, *, relative: bool = True) -> float:
    """h2_distance for two reduced second-order models (anything with M, D, K, F, C)."""
    return h2_distance(first_order(a.M, a.D, a.K, a.F, a.C), first_order(b.M, b.D, b.K, b.F, b.C), relative=relative)
