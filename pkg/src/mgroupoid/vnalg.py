"""The inclusion A ⊂ M of a finite measured groupoid.

M is the algebra of left convolution operators L(f); an element is
identified with its coefficient function f = L(f)1_X.  A is the
subalgebra of functions supported on the unit arrows.  L²(M, φ) is
L²(G, ν) with ``1_X`` as the cyclic vector.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .convolution import (ArrowFunction, FibreOperator, GroupoidMismatch, convolve, involute,
                          regular_rep)
from .funkit import ALGEBRAIC_TOL, SPECTRAL_TOL, gns, properness_profile, require_pd
from .groupoid import FiniteGroupoid, bisection_partition


@dataclass(eq=False)
class VnElement:
    """The operator L(f) in M, kept as its coefficient function."""

    f: ArrowFunction

    @cached_property
    def op(self) -> FibreOperator:
        return regular_rep(self.f)

    @property
    def groupoid(self) -> FiniteGroupoid:
        return self.f.groupoid

    def hat(self) -> ArrowFunction:
        """The vector m(1_X) in L²(G, ν)."""
        return self.op.apply(ArrowFunction.units(self.groupoid))

    def __matmul__(self, other: "VnElement") -> "VnElement":
        return VnElement(convolve(self.f, _coeff(other)))

    def __add__(self, other: "VnElement") -> "VnElement":
        return VnElement(self.f + _coeff(other))

    def __sub__(self, other: "VnElement") -> "VnElement":
        return VnElement(self.f - _coeff(other))

    def adjoint(self) -> "VnElement":
        return VnElement(involute(self.f))


Element = Union[VnElement, ArrowFunction]


def _coeff(m: Element) -> ArrowFunction:
    return m.f if isinstance(m, VnElement) else m


def state_phi(m: Element) -> complex:
    """φ(L(f)) = Σ_x f(x) μ(x)."""
    f = _coeff(m)
    return complex(np.sum(f.unit_values() * f.groupoid.mu_vector))


def cond_expectation(m: Element) -> VnElement:
    """E_A: restriction of the coefficient function to the unit arrows."""
    return VnElement(_coeff(m).restrict_to_units())


def e_A(G: FiniteGroupoid) -> FibreOperator:
    """Orthogonal projection of L²(G, ν) onto the unit-arrow subspace."""
    return FibreOperator.multiplication(ArrowFunction.units(G))


def modular_conjugation(xi: ArrowFunction) -> ArrowFunction:
    """(Jξ)(γ) = δ(γ)^{1/2} conj(ξ(γ⁻¹))."""
    G = xi.groupoid
    return ArrowFunction(G, np.sqrt(G.delta_vector) * xi.values[G.inv_idx].conj())


def j_conjugate_dense(m: Element) -> np.ndarray:
    """Matrix of the (linear) operator J L(f) J in arrow coordinates."""
    f = _coeff(m)
    G = f.groupoid
    L = regular_rep(f)
    n = len(G.arrows)
    out = np.zeros((n, n), dtype=complex)
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = 1.0
        out[:, k] = modular_conjugation(L.apply(modular_conjugation(ArrowFunction(G, e)))).values
    return out


def modular_flow(m: Element, t: float) -> VnElement:
    """σ_t(L(f)) = L(δ^{it} f)."""
    f = _coeff(m)
    phase = np.exp(1j * t * np.log(f.groupoid.delta_vector))
    return VnElement(ArrowFunction(f.groupoid, phase * f.values))


# ---------------------------------------------------------------------------
# the right A-module L²(M, φ)
# ---------------------------------------------------------------------------

def module_inner(xi: ArrowFunction, eta: ArrowFunction) -> np.ndarray:
    """<ξ, η>_A(x) = Σ_{s(γ)=x} conj(ξ(γ)) η(γ), ordered like ``units``."""
    G = xi.groupoid
    if eta.groupoid is not G and eta.groupoid != G:
        raise GroupoidMismatch("vectors live on different groupoids")
    prod = xi.values.conj() * eta.values
    return (np.bincount(G.src_idx, weights=prod.real, minlength=len(G.units))
            + 1j * np.bincount(G.src_idx, weights=prod.imag, minlength=len(G.units)))


def tau_mu(a: np.ndarray, G: FiniteGroupoid) -> complex:
    """τ_μ(a) = ∫ a dμ for a function on units."""
    return complex(np.sum(np.asarray(a) * G.mu_vector))


def module_gram_schmidt(vectors: Sequence[ArrowFunction], tol: float = ALGEBRAIC_TOL
                        ) -> Tuple[List[ArrowFunction], List[np.ndarray]]:
    """Orthonormalise over A, one source fibre at a time.

    Returns the family and, for each member, the projection p_j in A as a
    0/1 vector over units, so that <ξ_i, ξ_j>_A = δ_ij p_j.  A vector that
    is dependent on a fibre is zeroed there and gets p_j(x) = 0.
    """
    if not vectors:
        return [], []
    G = vectors[0].groupoid
    out = [np.zeros(len(G.arrows), dtype=complex) for _ in vectors]
    proj = [np.zeros(len(G.units)) for _ in vectors]
    for u, x in enumerate(G.units):
        idx = G.source_fibres[x]
        done: List[np.ndarray] = []
        for j, v in enumerate(vectors):
            w = v.values[idx].copy()
            scale = max(1.0, float(np.linalg.norm(w)))
            for q in done:
                w = w - np.vdot(q, w) * q
            for q in done:  # second pass keeps the family orthogonal to rounding level
                w = w - np.vdot(q, w) * q
            nrm = float(np.linalg.norm(w))
            if nrm <= tol * scale:
                continue
            q = w / nrm
            done.append(q)
            out[j][idx] = q
            proj[j][u] = 1.0
    return [ArrowFunction(G, v) for v in out], proj


def bisection_basis(G: FiniteGroupoid, method: str = "saturation") -> List[ArrowFunction]:
    """Indicators of a bisection partition: an orthonormal basis of the A-module."""
    return [ArrowFunction.indicator(G, piece) for piece in bisection_partition(G, method)]


def rank_one(xi: ArrowFunction, eta: ArrowFunction) -> FibreOperator:
    """L_ξ L_η^*: α ↦ ξ <η, α>_A."""
    G = xi.groupoid
    return FibreOperator(G, {x: np.outer(xi.values[idx], eta.values[idx].conj())
                             for x, idx in G.source_fibres.items()})


def basic_construction_element(m1: Element, m2: Element) -> FibreOperator:
    """m1 e_A m2 as an operator on L²(G, ν)."""
    G = _coeff(m1).groupoid
    return regular_rep(_coeff(m1)) @ e_A(G) @ regular_rep(_coeff(m2))


def _as_fibre_operator(x, G: Optional[FiniteGroupoid], tol: float) -> FibreOperator:
    if isinstance(x, FibreOperator):
        if x.side != "source":
            raise ValueError("trace needs an operator decomposed over source fibres")
        return x
    if G is None:
        raise ValueError("a dense operator needs its groupoid")
    matrix = np.asarray(x, dtype=complex)
    for k in range(len(G.units)):
        D = np.diag((G.src_idx == k).astype(float))
        if np.max(np.abs(matrix @ D - D @ matrix), initial=0.0) > tol * max(1.0, np.abs(matrix).max()):
            raise ValueError("operator does not commute with the right action of A")
    return FibreOperator.from_dense(G, matrix, "source", atol=tol * max(1.0, np.abs(matrix).max()))


def trace(x, G: Optional[FiniteGroupoid] = None, basis: Optional[Sequence[ArrowFunction]] = None,
          tol: float = ALGEBRAIC_TOL) -> complex:
    """Tr_μ(x) = Σ_i <ξ_i, x ξ_i>_{L²} over an orthonormal A-basis.

    ``x`` is a source-decomposed :class:`FibreOperator` or a dense matrix
    in arrow coordinates, which is checked to commute with the right
    A-action.  The basis defaults to the bisection indicators.
    """
    op = _as_fibre_operator(x, G, tol)
    if basis is None:
        basis = bisection_basis(op.groupoid)
    return complex(sum(xi.inner(op.apply(xi)) for xi in basis))


def trace_via_module(x, G: Optional[FiniteGroupoid] = None,
                     basis: Optional[Sequence[ArrowFunction]] = None,
                     tol: float = ALGEBRAIC_TOL) -> complex:
    """Tr_μ(x) = Σ_i τ_μ(<ξ_i, x ξ_i>_A)."""
    op = _as_fibre_operator(x, G, tol)
    if basis is None:
        basis = bisection_basis(op.groupoid)
    return complex(sum(tau_mu(module_inner(xi, op.apply(xi)), op.groupoid) for xi in basis))


# ---------------------------------------------------------------------------
# completely positive maps
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class CpMap:
    """Linear map on M stored in the basis of point masses δ_γ.

    ``Φ(L(f)) = L(matrix @ f)``.  A-bilinearity (and unitality when
    ``unital`` is set) is verified at construction unless ``check`` is off.
    """

    groupoid: FiniteGroupoid
    matrix: np.ndarray
    unital: bool = True
    check: bool = True

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        n = len(self.groupoid.arrows)
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix must be {n}x{n}")
        if self.check:
            res = bilinearity_residual(self)
            if res > ALGEBRAIC_TOL:
                raise ValueError(f"map is not A-bilinear (residual {res:.3e})")
            if self.unital:
                one = ArrowFunction.units(self.groupoid)
                if not self(one).allclose(one, ALGEBRAIC_TOL):
                    raise ValueError("map is not unital")

    def __call__(self, m: Element) -> ArrowFunction:
        f = _coeff(m)
        return ArrowFunction(self.groupoid, self.matrix @ f.values)

    @classmethod
    def identity(cls, G: FiniteGroupoid) -> "CpMap":
        return cls(G, np.eye(len(G.arrows)))

    @classmethod
    def expectation(cls, G: FiniteGroupoid) -> "CpMap":
        return cls(G, np.diag(G.unit_mask.astype(float)))

    def to_json(self) -> dict:
        return {"basis": list(self.groupoid.arrows),
                "re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()}

    @classmethod
    def from_json(cls, G: FiniteGroupoid, data: dict, check: bool = True) -> "CpMap":
        if list(data.get("basis", [])) != list(G.arrows):
            raise ValueError("CpMap basis must list the arrows in groupoid order")
        m = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data.get("im", 0.0), dtype=float)
        return cls(G, m, check=check)


def bilinearity_residual(phi: CpMap) -> float:
    """max over unit indicators a, b and point masses m of |Φ(amb) - aΦ(m)b|."""
    G = phi.groupoid
    worst = 0.0
    units = [ArrowFunction.on_units(G, {x: 1.0}) for x in G.units]
    for k in range(len(G.arrows)):
        m = ArrowFunction(G, np.eye(len(G.arrows))[k])
        pm = phi(m)
        for a in units:
            am = convolve(a, m)
            apm = convolve(a, pm)
            for b in units:
                lhs = phi(convolve(am, b))
                rhs = convolve(apm, b)
                worst = max(worst, float(np.max(np.abs(lhs.values - rhs.values))))
    return worst


def cp_from_pd(F: ArrowFunction, check: bool = True) -> CpMap:
    """Φ(L(f)) = L(F f): diagonal in the point-mass basis."""
    if check:
        require_pd(F, unital=True)
    return CpMap(F.groupoid, np.diag(F.values), unital=True, check=check)


def pd_from_cp(phi: CpMap, partition: Optional[Sequence[Sequence[str]]] = None) -> ArrowFunction:
    """F_Φ(γ) = E_A(Φ(1_S) * 1_S^*)(r(γ)), S the piece containing γ."""
    G = phi.groupoid
    if not phi.check:
        res = bilinearity_residual(phi)
        if res > ALGEBRAIC_TOL:
            raise ValueError(f"map is not A-bilinear (residual {res:.3e})")
    if partition is None:
        partition = bisection_partition(G)
    out = np.zeros(len(G.arrows), dtype=complex)
    for piece in partition:
        one_s = ArrowFunction.indicator(G, piece)
        h = convolve(phi(one_s), involute(one_s))
        for g in piece:
            out[G.index[g]] = h[G.unit_arrow[G.dst[g]]]
    return ArrowFunction(G, out)


@dataclass
class StinespringCheck:
    residual: float
    isometry_residual: float
    dims: Dict[str, int]


def verify_stinespring(F: ArrowFunction) -> StinespringCheck:
    """Build S from the GNS data of F and compare S*(L(f)⊗1)S with L(Ff).

    Both sides are evaluated on every point mass f = δ_γ; the returned
    residual is the largest entrywise difference over all fibres.
    """
    G = F.groupoid
    data = gns(F)
    rep, xi = data.representation, data.section
    S = {}
    iso = 0.0
    for x, idx in G.source_fibres.items():
        d = rep.dims[x]
        n = len(idx)
        Sx = np.zeros((n * d, n), dtype=complex)
        for j, i in enumerate(idx):
            g = G.arrows[i]
            Sx[j * d:(j + 1) * d, j] = rep.pi[g].conj().T @ xi.xi[G.dst[g]]
        S[x] = Sx
        iso = max(iso, float(np.max(np.abs(Sx.conj().T @ Sx - np.eye(n)), initial=0.0)))
    worst = 0.0
    eye = np.eye(len(G.arrows))
    for k in range(len(G.arrows)):
        f = ArrowFunction(G, eye[k])
        left = regular_rep(f)
        right = regular_rep(F * f)
        for x, Sx in S.items():
            d = rep.dims[x]
            lhs = Sx.conj().T @ np.kron(left.blocks[x], np.eye(d)) @ Sx
            worst = max(worst, float(np.max(np.abs(lhs - right.blocks[x]), initial=0.0)))
    return StinespringCheck(worst, iso, dict(rep.dims))


def _matrix_operator(blocks: List[List[ArrowFunction]], G: FiniteGroupoid) -> Dict[str, np.ndarray]:
    """Per-unit matrix of [L(P_ij)] acting on ℂ^k ⊗ ℓ²(G_x)."""
    ops = [[regular_rep(p) for p in row] for row in blocks]
    return {x: np.block([[op.blocks[x] for op in row] for row in ops]) for x in G.units}


def complete_positivity_margin(phi: CpMap, k: int, samples: int = 50,
                               rng: Optional[np.random.Generator] = None) -> float:
    """Smallest scaled eigenvalue of [Φ(P_ij)] over probe elements P = X*X.

    The probes start with the structured elements P_ij = 1_{S_i}^* 1_{S_j}
    built from k pieces of a bisection partition, then random X.
    """
    if not 1 <= k <= 4:
        raise ValueError("matrix size must be between 1 and 4")
    G = phi.groupoid
    rng = np.random.default_rng(0) if rng is None else rng
    zero = ArrowFunction.zeros(G)
    candidates: List[List[List[ArrowFunction]]] = []
    pieces = bisection_basis(G)
    for combo in itertools.islice(itertools.combinations(range(len(pieces)), min(k, len(pieces))), 20):
        row = [pieces[c] for c in combo] + [zero] * (k - len(combo))
        candidates.append([row] + [[zero] * k for _ in range(k - 1)])
    while len(candidates) < samples:
        candidates.append([[ArrowFunction.random(G, rng) for _ in range(k)] for _ in range(k)])
    worst = np.inf
    for X in candidates[:max(samples, 1)]:
        P = [[sum((convolve(involute(X[l][i]), X[l][j]) for l in range(k)), zero)
              for j in range(k)] for i in range(k)]
        image = [[phi(P[i][j]) for j in range(k)] for i in range(k)]
        for M in _matrix_operator(image, G).values():
            H = (M + M.conj().T) / 2
            eig = np.linalg.eigvalsh(H)
            scale = max(1.0, float(np.max(np.abs(eig))))
            worst = min(worst, float(eig[0]) / scale)
    return float(worst)


def complete_positivity_probe(phi: CpMap, k: int, samples: int = 50,
                              rng: Optional[np.random.Generator] = None,
                              tol: float = 1e-9) -> bool:
    """Randomised complete-positivity test on k×k matrices over M."""
    return complete_positivity_margin(phi, k, samples, rng) >= -tol


def relative_haagerup_report(maps: Sequence[CpMap], thresholds=(0.5, 0.25, 0.1)) -> dict:
    """Finite-scale check of the relative Haagerup conditions for a family of maps.

    (i) E_A∘Φ = E_A; (ii) compactness is automatic in finite dimension and
    is replaced by the ν-mass profile of {|F_Φ| > ε}; (iii) the distance
    max_γ ‖Φ(δ_γ) - δ_γ‖₂ over the point masses, which should not increase.
    """
    if not maps:
        raise ValueError("empty family")
    G = maps[0].groupoid
    eye = np.eye(len(G.arrows))
    stages = []
    for phi in maps:
        exp_res = 0.0
        dist = 0.0
        for k in range(len(G.arrows)):
            m = ArrowFunction(G, eye[k])
            img = phi(m)
            exp_res = max(exp_res, img.restrict_to_units().values.__sub__(
                m.restrict_to_units().values).__abs__().max())
            dist = max(dist, (img - m).norm2())
        F = pd_from_cp(phi)
        prof = properness_profile(F, thresholds, kind="pd")
        stages.append({"expectation_residual": float(exp_res), "distance": float(dist),
                       "profile": {str(t): str(v) for t, v in prof.items()}})
    dists = [s["distance"] for s in stages]
    monotone = all(b <= a + ALGEBRAIC_TOL for a, b in zip(dists, dists[1:]))
    return {"stages": stages, "distances_nonincreasing": monotone,
            "expectation_preserved": all(s["expectation_residual"] <= ALGEBRAIC_TOL for s in stages)}


SPECTRAL = SPECTRAL_TOL
