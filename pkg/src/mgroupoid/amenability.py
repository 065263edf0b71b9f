"""Amenability witnesses and coefficients of the regular representation.

A unit field ξ has Σ_{r(γ)=x} |ξ(γ)|² = 1 on every range fibre.  Its
coefficient F(γ) = Σ_{r(γ1)=r(γ)} conj(ξ(γ1)) ξ(γ⁻¹γ1) is positive
definite, and every positive definite F with F = 1 on units arises this
way through ξ_F = ρ(F)^{1/2} 1_X.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from .convolution import ArrowFunction, FibreOperator
from .funkit import ALGEBRAIC_TOL, NotPositiveDefinite, translation_matrix
from .groupoid import FiniteGroupoid

CLAMP_TOL = 1e-10


class NotUnitField(ValueError):
    pass


def fibre_norms(xi: ArrowFunction) -> Dict[str, float]:
    """Σ_{r(γ)=x} |ξ(γ)|² for every unit x."""
    return {x: float(np.sum(np.abs(xi.values[idx]) ** 2)) for x, idx in xi.groupoid.range_fibres.items()}


def check_unit_field(xi: ArrowFunction, tol: float = ALGEBRAIC_TOL) -> None:
    bad = {x: n for x, n in fibre_norms(xi).items() if abs(n - 1.0) > tol}
    if bad:
        raise NotUnitField(f"range-fibre norms differ from 1: {bad}")


def normalise(xi: ArrowFunction) -> ArrowFunction:
    """Rescale every range fibre to norm one (fibres must be nonzero)."""
    v = xi.values.copy()
    for x, idx in xi.groupoid.range_fibres.items():
        n = np.linalg.norm(v[idx])
        if n == 0:
            raise NotUnitField(f"zero on the fibre over {x}")
        v[idx] /= n
    return ArrowFunction(xi.groupoid, v)


def coefficient_of_regular(xi: ArrowFunction, check: bool = True) -> ArrowFunction:
    """F(γ) = Σ_{r(γ1)=r(γ)} conj(ξ(γ1)) ξ(γ⁻¹γ1)."""
    if check:
        check_unit_field(xi)
    G = xi.groupoid
    T = G.product_table
    vals = np.empty(len(G.arrows), dtype=complex)
    for k in range(len(G.arrows)):
        idx = G.range_fibres[G.units[G.dst_idx[k]]]
        vals[k] = np.sum(xi.values[idx].conj() * xi.values[T[G.inv_idx[k], idx]])
    return ArrowFunction(G, vals)


def rho_operator(F: ArrowFunction) -> FibreOperator:
    """(ρ(F)ξ)(γ) = Σ_{r(γ1)=r(γ)} F(γ⁻¹γ1) ξ(γ1), as blocks on the range fibres."""
    G = F.groupoid
    T = G.product_table
    blocks = {x: F.values[T[np.ix_(G.inv_idx[idx], idx)]] for x, idx in G.range_fibres.items()}
    return FibreOperator(G, blocks, side="range")


def rho_commutation_residual(F: ArrowFunction) -> float:
    """max_γ ‖P_γ ρ(F)_{s(γ)} - ρ(F)_{r(γ)} P_γ‖ for the left translations P_γ."""
    G = F.groupoid
    rho = rho_operator(F)
    worst = 0.0
    for g in G.arrows:
        P = translation_matrix(G, g)
        diff = P @ rho.blocks[G.src[g]] - rho.blocks[G.dst[g]] @ P
        worst = max(worst, float(np.max(np.abs(diff), initial=0.0)))
    return worst


def rho_is_psd(F: ArrowFunction, tol: float = ALGEBRAIC_TOL) -> bool:
    rho = rho_operator(F)
    for M in rho.blocks.values():
        if np.max(np.abs(M - M.conj().T), initial=0.0) > tol:
            return False
        if np.linalg.eigvalsh((M + M.conj().T) / 2)[0] < -tol * max(1.0, np.abs(M).sum(1).max()):
            return False
    return True


def psd_sqrt(M: np.ndarray, clamp: float = CLAMP_TOL) -> np.ndarray:
    """Hermitian square root; eigenvalues in [-clamp, 0) are set to 0."""
    H = (M + M.conj().T) / 2
    w, U = np.linalg.eigh(H)
    if w.size and w[0] < -clamp * max(1.0, float(np.max(np.abs(w)))):
        raise NotPositiveDefinite(f"eigenvalue {w[0]:.3e} below the clamping threshold")
    w = np.clip(w, 0.0, None)
    return (U * np.sqrt(w)) @ U.conj().T


def xi_from_pd(F: ArrowFunction, nonnegative: bool = False) -> ArrowFunction:
    """ξ_F = ρ(F)^{1/2} 1_X.

    With ``nonnegative`` the result is replaced by its entrywise absolute
    value.  That keeps the fibre norms but generally changes the
    coefficient, so it is off by default.
    """
    G = F.groupoid
    rho = rho_operator(F)
    out = np.zeros(len(G.arrows), dtype=complex)
    for x, idx in G.range_fibres.items():
        root = psd_sqrt(rho.blocks[x])
        e = (idx == G.index[G.unit_arrow[x]]).astype(float)
        out[idx] = root @ e
    if nonnegative:
        out = np.abs(out).astype(complex)
    return ArrowFunction(G, out)


def uniform_field(G: FiniteGroupoid) -> ArrowFunction:
    """ξ = |G^x|^{-1/2} on every range fibre."""
    v = np.zeros(len(G.arrows), dtype=complex)
    for idx in G.range_fibres.values():
        v[idx] = 1.0 / np.sqrt(len(idx))
    return ArrowFunction(G, v)


def interpolating_fields(G: FiniteGroupoid, n: int) -> List[ArrowFunction]:
    """ξ_k ∝ (1 - k/n)·1_X + (k/n)·uniform, k = 0..n, fibre-normalised."""
    units = ArrowFunction.units(G)
    uni = uniform_field(G)
    return [normalise(units * (1 - k / n) + uni * (k / n)) for k in range(n + 1)]


@dataclass
class AmenabilityReport:
    deviations: List[float]
    support_counts: List[Dict[str, int]]
    nonincreasing: bool
    note: str = ("weak* convergence is replaced by the sup-norm deviation "
                 "max_γ |1 - F_n(γ)| on the finite arrow set")

    def to_json(self) -> dict:
        return {"deviations": self.deviations, "support_counts": self.support_counts,
                "nonincreasing": self.nonincreasing, "note": self.note}


def amenability_witness_check(fields: Sequence[ArrowFunction], tol: float = ALGEBRAIC_TOL
                              ) -> AmenabilityReport:
    """Coefficient deviations and range-fibre support sizes of a sequence of unit fields."""
    devs, counts = [], []
    for xi in fields:
        F = coefficient_of_regular(xi)
        devs.append(float(np.max(np.abs(1.0 - F.values))))
        counts.append({x: int(np.sum(np.abs(xi.values[idx]) > tol))
                       for x, idx in xi.groupoid.range_fibres.items()})
    mono = all(b <= a + tol for a, b in zip(devs, devs[1:]))
    return AmenabilityReport(devs, counts, mono)


def hahn_isometry(xi: ArrowFunction) -> ArrowFunction:
    """V ξ = δ^{1/2} ξ, from L²(G, ν⁻¹) to L²(G, ν)."""
    G = xi.groupoid
    return ArrowFunction(G, np.sqrt(G.delta_vector) * xi.values)


def inverse_inner(xi: ArrowFunction, eta: ArrowFunction) -> complex:
    """Inner product of L²(G, ν⁻¹): Σ conj(ξ) η μ(r(γ))."""
    G = xi.groupoid
    w = G.mu_vector[G.dst_idx]
    return complex(np.sum(xi.values.conj() * eta.values * w))
