"""Positive definite and conditionally negative definite functions.

Positivity is always decided fibre by fibre: for a unit x and the arrows
γ_1..γ_n with range x, the Gram matrix ``[F(γ_i⁻¹ γ_j)]`` must be
positive semidefinite.  The checks return the per-unit spectral data so
that callers can report witnesses, not just a verdict.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .convolution import ArrowFunction
from .groupoid import FiniteGroupoid, GroupoidError, is_embedded_in, nu_mass

ALGEBRAIC_TOL = 1e-10
SPECTRAL_TOL = 1e-8


class NotPositiveDefinite(ValueError):
    pass


class NotConditionallyNegative(ValueError):
    pass


def fibre_gram(F: ArrowFunction, x: str) -> np.ndarray:
    """Matrix ``[F(γ_i⁻¹ γ_j)]`` over the range fibre G^x (arrow order)."""
    G = F.groupoid
    idx = G.range_fibres[x]
    prod = G.product_table[np.ix_(G.inv_idx[idx], idx)]
    return F.values[prod]


@dataclass
class FibreReport:
    dim: int
    min_eig: float
    max_eig: float
    hermitian_residual: float
    passed: bool

    def to_json(self) -> dict:
        return {"dim": self.dim, "min_eig": self.min_eig, "max_eig": self.max_eig,
                "hermitian_residual": self.hermitian_residual, "passed": self.passed}


def is_positive_definite(F: ArrowFunction, tol: float = ALGEBRAIC_TOL
                         ) -> Tuple[bool, Dict[str, FibreReport]]:
    """Fibrewise Gram test; returns the verdict and a report per unit."""
    report = {}
    for x in F.groupoid.units:
        M = fibre_gram(F, x)
        herm = float(np.max(np.abs(M - M.conj().T), initial=0.0))
        eig = np.linalg.eigvalsh((M + M.conj().T) / 2)
        scale = max(1.0, float(np.max(np.sum(np.abs(M), axis=1), initial=0.0)))
        ok = herm <= tol and eig[0] >= -tol * scale
        report[x] = FibreReport(len(M), float(eig[0]), float(eig[-1]), herm, bool(ok))
    return all(r.passed for r in report.values()), report


def require_pd(F: ArrowFunction, unital: bool = True, tol: float = ALGEBRAIC_TOL) -> None:
    ok, report = is_positive_definite(F, tol)
    if not ok:
        bad = {x: r.min_eig for x, r in report.items() if not r.passed}
        raise NotPositiveDefinite(f"function is not positive definite (min eigenvalues {bad})")
    if unital and np.max(np.abs(F.unit_values() - 1), initial=0.0) > tol:
        raise NotPositiveDefinite("function must equal 1 on the unit arrows")


@dataclass
class CndReport:
    vanishes_on_units: float
    symmetry_residual: float
    compressed_max_eig: Dict[str, float]
    nonnegative: bool
    passed: bool
    scale: float = 1.0

    def to_json(self) -> dict:
        return {"vanishes_on_units": self.vanishes_on_units,
                "symmetry_residual": self.symmetry_residual,
                "compressed_max_eig": self.compressed_max_eig,
                "nonnegative": self.nonnegative, "passed": self.passed}


def _mean_zero_basis(n: int) -> np.ndarray:
    # orthonormal basis of the complement of the constant vector
    q, _ = np.linalg.qr(np.column_stack([np.ones(n), np.eye(n)[:, : n - 1]]))
    return q[:, 1:]


def is_cnd(psi: ArrowFunction, tol: float = ALGEBRAIC_TOL) -> Tuple[bool, CndReport]:
    """Real conditionally negative definite test.

    Raises ``ValueError`` on complex input: only real functions qualify.
    """
    G = psi.groupoid
    scale = max(1.0, psi.max_abs())
    if np.max(np.abs(psi.values.imag), initial=0.0) > tol * scale:
        raise ValueError("conditionally negative definite functions must be real")
    v = psi.values.real
    on_units = float(np.max(np.abs(v[G.unit_mask]), initial=0.0))
    sym = float(np.max(np.abs(v - v[G.inv_idx]), initial=0.0))
    compressed, fibre_ok = {}, True
    for x in G.units:
        M = fibre_gram(psi, x).real
        n = len(M)
        if n < 2:
            compressed[x] = 0.0
            continue
        Q = _mean_zero_basis(n)
        C = Q.T @ ((M + M.T) / 2) @ Q
        compressed[x] = float(np.linalg.eigvalsh(C)[-1])
        fibre_scale = max(1.0, float(np.max(np.sum(np.abs(M), axis=1))))
        fibre_ok &= compressed[x] <= tol * fibre_scale
    nonneg = bool(np.min(v, initial=0.0) >= -tol * scale)
    passed = on_units <= tol * scale and sym <= tol * scale and fibre_ok
    return passed, CndReport(on_units, sym, compressed, nonneg, bool(passed), scale)


def schoenberg(psi: ArrowFunction, t: float) -> ArrowFunction:
    """exp(-t·ψ) for a conditionally negative definite ψ and t > 0."""
    if t <= 0:
        raise ValueError("t must be positive")
    ok, _ = is_cnd(psi)
    if not ok:
        raise NotConditionallyNegative("psi is not conditionally negative definite")
    return ArrowFunction(psi.groupoid, np.exp(-t * psi.values.real))


def extend_by_zero(F: ArrowFunction, G: FiniteGroupoid, check: bool = True) -> ArrowFunction:
    """Extend a positive definite function on a wide subgroupoid H of G by 0."""
    H = F.groupoid
    if not is_embedded_in(H, G):
        raise GroupoidError("domain is not a wide subgroupoid of the target groupoid")
    if check:
        require_pd(F, unital=False)
    out = np.zeros(len(G.arrows), dtype=complex)
    out[[G.index[g] for g in H.arrows]] = F.values
    return ArrowFunction(G, out)


def restrict(F: ArrowFunction, H: FiniteGroupoid) -> ArrowFunction:
    G = F.groupoid
    return ArrowFunction(H, F.values[[G.index[g] for g in H.arrows]])


# ---------------------------------------------------------------------------
# representations, GNS and coefficients
# ---------------------------------------------------------------------------

@dataclass
class Representation:
    """Field of spaces ℂ^dims[x] with maps pi[γ]: H(s(γ)) → H(r(γ))."""

    groupoid: FiniteGroupoid
    dims: Dict[str, int]
    pi: Dict[str, np.ndarray]

    def residuals(self) -> Dict[str, float]:
        """Worst deviation from each representation axiom."""
        G = self.groupoid
        out = {"identity": 0.0, "multiplicative": 0.0, "inverse": 0.0, "unitary": 0.0,
               "shape": 0.0}
        for g in G.arrows:
            P = self.pi[g]
            if P.shape != (self.dims[G.dst[g]], self.dims[G.src[g]]):
                out["shape"] = 1.0
                return out
        for x in G.units:
            P = self.pi[G.unit_arrow[x]]
            out["identity"] = max(out["identity"], _maxabs(P - np.eye(self.dims[x])))
        for (a, b), c in G.compose.items():
            out["multiplicative"] = max(out["multiplicative"],
                                        _maxabs(self.pi[c] - self.pi[a] @ self.pi[b]))
        for g in G.arrows:
            P = self.pi[g]
            out["unitary"] = max(out["unitary"], _maxabs(P.conj().T @ P - np.eye(P.shape[1])))
            out["inverse"] = max(out["inverse"], _maxabs(self.pi[G.inverse[g]] @ P - np.eye(P.shape[1])))
        return out

    def is_valid(self, tol: float = ALGEBRAIC_TOL) -> bool:
        return all(v <= tol for v in self.residuals().values())

    @classmethod
    def trivial(cls, G: FiniteGroupoid) -> "Representation":
        return cls(G, {x: 1 for x in G.units}, {g: np.ones((1, 1), dtype=complex) for g in G.arrows})

    @classmethod
    def left_regular(cls, G: FiniteGroupoid) -> "Representation":
        """Translation action on (ℓ²(G^x))_x: (π(γ)ξ)(γ1) = ξ(γ⁻¹γ1)."""
        pi = {g: translation_matrix(G, g) for g in G.arrows}
        return cls(G, {x: len(idx) for x, idx in G.range_fibres.items()}, pi)


def _fibre_positions(G: FiniteGroupoid) -> Dict[int, int]:
    """Arrow index -> position inside its range fibre."""
    pos = {}
    for idx in G.range_fibres.values():
        for k, i in enumerate(idx):
            pos[int(i)] = k
    return pos


def translation_matrix(G: FiniteGroupoid, g: str) -> np.ndarray:
    """Permutation ℓ²(G^{s(γ)}) → ℓ²(G^{r(γ)}), f ↦ f(γ⁻¹ ·)."""
    fib = G.range_fibres
    pos = _fibre_positions(G)
    r, s = G.dst[g], G.src[g]
    P = np.zeros((len(fib[r]), len(fib[s])), dtype=complex)
    gi = G.index[G.inverse[g]]
    for row, i in enumerate(fib[r]):
        P[row, pos[int(G.product_table[gi, i])]] = 1.0
    return P


@dataclass
class Section:
    xi: Dict[str, np.ndarray]

    def is_unit(self, tol: float = ALGEBRAIC_TOL) -> bool:
        return all(abs(np.linalg.norm(v) - 1) <= tol for v in self.xi.values())


def _maxabs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a), initial=0.0))


def coefficient(rep: Representation, section: Section) -> ArrowFunction:
    """γ ↦ <ξ(r(γ)), π(γ) ξ(s(γ))>."""
    G = rep.groupoid
    vals = np.empty(len(G.arrows), dtype=complex)
    for k, g in enumerate(G.arrows):
        a, b = section.xi[G.dst[g]], section.xi[G.src[g]]
        P = rep.pi[g]
        if P.shape != (len(a), len(b)):
            raise ValueError(f"shape mismatch at arrow {g}")
        vals[k] = np.vdot(a, P @ b)
    return ArrowFunction(G, vals)


@dataclass
class GnsResult:
    representation: Representation
    section: Section
    # per unit: rank-truncated factor W with W^H W = Gram (rows = GNS coordinates)
    factors: Dict[str, np.ndarray] = field(repr=False)
    eigenvalues: Dict[str, np.ndarray] = field(repr=False)


def gns(F: ArrowFunction, rank_tol: float = 1e-10, check: bool = True) -> GnsResult:
    """GNS construction for a positive definite F equal to 1 on the units.

    H(x) is the quotient of functions on G^x by the null space of the Gram
    form; π(γ) is the translation f ↦ f(γ⁻¹ ·) written in those coordinates.
    The returned section is the class of the unit-arrow indicator.
    """
    if check:
        require_pd(F, unital=True)
    G = F.groupoid
    fib = G.range_fibres
    factors, pinv, evals = {}, {}, {}
    for x in G.units:
        K = fibre_gram(F, x)
        K = (K + K.conj().T) / 2
        w, U = np.linalg.eigh(K)
        top = max(float(w[-1]), 0.0)
        ambiguous = (w > 1e-12 * top) & (w < 1e-8 * top)
        if np.any(ambiguous):
            warnings.warn(f"GNS rank at unit {x} is ambiguous (eigenvalues {w[ambiguous]}); "
                          f"cutting at {rank_tol:g}", RuntimeWarning, stacklevel=2)
        keep = w > rank_tol * top
        wr, Ur = w[keep], U[:, keep]
        factors[x] = np.sqrt(wr)[:, None] * Ur.conj().T          # W = Λ^{1/2} U^H
        pinv[x] = Ur / np.sqrt(wr)[None, :]                      # W^+ = U Λ^{-1/2}
        evals[x] = w
    pos = _fibre_positions(G)
    pi = {g: factors[G.dst[g]] @ translation_matrix(G, g) @ pinv[G.src[g]] for g in G.arrows}
    xi = {}
    for x in G.units:
        e = np.zeros(len(fib[x]), dtype=complex)
        e[pos[int(G.index[G.unit_arrow[x]])]] = 1.0
        xi[x] = factors[x] @ e
    rep = Representation(G, {x: factors[x].shape[0] for x in G.units}, pi)
    return GnsResult(rep, Section(xi), factors, evals)


# ---------------------------------------------------------------------------
# cocycles
# ---------------------------------------------------------------------------

@dataclass
class Cocycle:
    representation: Representation
    b: Dict[str, np.ndarray]

    def residual(self) -> float:
        """Worst violation of b(γ1γ2) = b(γ1) + π(γ1) b(γ2)."""
        rep = self.representation
        G = rep.groupoid
        worst = 0.0
        for (a, c), ac in G.compose.items():
            worst = max(worst, _maxabs(self.b[ac] - self.b[a] - rep.pi[a] @ self.b[c]))
        return worst


def cocycle_to_cnd(cocycle: Cocycle, tol: float = ALGEBRAIC_TOL) -> ArrowFunction:
    """ψ(γ) = ‖b(γ)‖²."""
    res = cocycle.residual()
    if res > tol:
        raise ValueError(f"cocycle identity violated (residual {res:.3e})")
    G = cocycle.representation.groupoid
    return ArrowFunction(G, np.array([np.vdot(cocycle.b[g], cocycle.b[g]).real for g in G.arrows],
                                     dtype=complex))


def cnd_from_pd_sequence(Fs: Sequence[ArrowFunction], alphas: Optional[Sequence[float]] = None
                         ) -> ArrowFunction:
    """ψ = Σ_k α_k Re(1 - F_k); α_k defaults to k (1-based)."""
    if not Fs:
        raise ValueError("need at least one function")
    if alphas is None:
        alphas = range(1, len(Fs) + 1)
    alphas = list(alphas)
    if len(alphas) != len(Fs) or any(a <= 0 for a in alphas):
        raise ValueError("alphas must be positive and match the functions")
    G = Fs[0].groupoid
    total = np.zeros(len(G.arrows))
    for a, F in zip(alphas, Fs):
        require_pd(F, unital=True)
        total += a * (1.0 - F.values.real)
    return ArrowFunction(G, total.astype(complex))


# ---------------------------------------------------------------------------
# properness
# ---------------------------------------------------------------------------

def properness_profile(F: ArrowFunction, thresholds: Iterable[float], kind: str = "pd"
                       ) -> Dict[float, Fraction]:
    """Exact ν-mass of {|F| > ε} (``kind="pd"``) or {ψ ≤ c} (``kind="cnd"``)."""
    G = F.groupoid
    out = {}
    for t in thresholds:
        if kind == "pd":
            chosen = [g for g, v in zip(G.arrows, F.values) if abs(v) > t]
        elif kind == "cnd":
            chosen = [g for g, v in zip(G.arrows, F.values) if v.real <= t]
        else:
            raise ValueError("kind must be 'pd' or 'cnd'")
        out[t] = nu_mass(G, chosen)
    return out


def ball_bound(k: int, c: int) -> int:
    """Size bound 1 + k + ... + k^c for a ball of radius c, degrees ≤ k."""
    return sum(k ** j for j in range(int(c) + 1))


def tree_mass_bound(psi: ArrowFunction, degree: int, c: int) -> Dict[str, object]:
    """Compare ν({ψ ≤ c}) with the ball bound and with the bare power k^c."""
    mass = properness_profile(psi, [c], kind="cnd")[c]
    bound = ball_bound(degree, c)
    return {"mass": mass, "ball_bound": bound, "power_bound": degree ** int(c),
            "ball_bound_holds": mass <= bound, "power_bound_holds": mass <= degree ** int(c)}


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------

def random_unit_field(G: FiniteGroupoid, rng: np.random.Generator) -> np.ndarray:
    """Random complex function whose restriction to every G^x has norm 1."""
    v = rng.standard_normal(len(G.arrows)) + 1j * rng.standard_normal(len(G.arrows))
    for idx in G.range_fibres.values():
        v[idx] /= np.linalg.norm(v[idx])
    return v


def random_pd(G: FiniteGroupoid, rng: np.random.Generator) -> ArrowFunction:
    """Random positive definite function with F = 1 on the units.

    A coefficient of the left regular representation for a random unit
    field, mixed with the constant function 1 and occasionally multiplied
    by a second such coefficient.
    """
    def reg_coefficient():
        xi = random_unit_field(G, rng)
        vals = np.empty(len(G.arrows), dtype=complex)
        T = G.product_table
        for k in range(len(G.arrows)):
            idx = G.range_fibres[G.units[G.dst_idx[k]]]
            shifted = T[G.inv_idx[k], idx]
            vals[k] = np.sum(xi[idx].conj() * xi[shifted])
        return vals

    w = rng.uniform(0.05, 1.0)
    vals = w * reg_coefficient() + (1 - w)
    if rng.uniform() < 0.5:
        vals = vals * reg_coefficient()
    vals[G.unit_mask] = 1.0
    return ArrowFunction(G, vals)
