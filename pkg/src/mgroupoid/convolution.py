"""The convolution *-algebra of a finite groupoid and its regular representation.

Functions on arrows are the elements of the algebra and, with the
ν-weighted inner product ``<f, g> = Σ_g conj(f) g μ(s(g))``, the vectors
of L²(G, ν).  One type serves both roles.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Tuple, Union

import numpy as np

from .groupoid import FiniteGroupoid

Number = Union[int, float, complex]


class GroupoidMismatch(ValueError):
    pass


def _same(G: FiniteGroupoid, H: FiniteGroupoid) -> None:
    if G is not H and G != H:
        raise GroupoidMismatch("functions live on different groupoids")


@dataclass(eq=False)
class ArrowFunction:
    """Complex function on the arrows of ``groupoid``, in arrow order."""

    groupoid: FiniteGroupoid
    values: np.ndarray

    __array_ufunc__ = None  # numpy scalars defer to the reflected operators

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (len(self.groupoid.arrows),):
            raise ValueError(f"expected {len(self.groupoid.arrows)} values, got {values.shape}")
        self.values = values

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, G: FiniteGroupoid) -> "ArrowFunction":
        return cls(G, np.zeros(len(G.arrows), dtype=complex))

    @classmethod
    def constant(cls, G: FiniteGroupoid, c: Number = 1.0) -> "ArrowFunction":
        return cls(G, np.full(len(G.arrows), c, dtype=complex))

    @classmethod
    def indicator(cls, G: FiniteGroupoid, arrows: Iterable[str]) -> "ArrowFunction":
        v = np.zeros(len(G.arrows), dtype=complex)
        for g in arrows:
            v[G.index[g]] = 1.0
        return cls(G, v)

    @classmethod
    def units(cls, G: FiniteGroupoid) -> "ArrowFunction":
        """1_X, the identity of the convolution algebra."""
        return cls(G, G.unit_mask.astype(complex))

    @classmethod
    def from_mapping(cls, G: FiniteGroupoid, values: Mapping[str, Number]) -> "ArrowFunction":
        v = np.zeros(len(G.arrows), dtype=complex)
        for g, c in values.items():
            v[G.index[g]] = c
        return cls(G, v)

    @classmethod
    def on_units(cls, G: FiniteGroupoid, a: Mapping[str, Number]) -> "ArrowFunction":
        """Element of A = functions on units, placed on the unit arrows."""
        v = np.zeros(len(G.arrows), dtype=complex)
        for x, c in a.items():
            v[G.index[G.unit_arrow[x]]] = c
        return cls(G, v)

    @classmethod
    def random(cls, G: FiniteGroupoid, rng: np.random.Generator, real: bool = False) -> "ArrowFunction":
        v = rng.standard_normal(len(G.arrows))
        if not real:
            v = v + 1j * rng.standard_normal(len(G.arrows))
        return cls(G, v)

    # -- access -------------------------------------------------------
    def __getitem__(self, arrow: str) -> complex:
        return complex(self.values[self.groupoid.index[arrow]])

    def as_dict(self) -> Dict[str, complex]:
        return {g: complex(v) for g, v in zip(self.groupoid.arrows, self.values)}

    def __repr__(self):
        body = ", ".join(f"{g}: {v:.4g}" for g, v in self.as_dict().items() if v != 0)
        return f"ArrowFunction({{{body}}})"

    def support(self, tol: float = 0.0):
        return [g for g, v in zip(self.groupoid.arrows, self.values) if abs(v) > tol]

    # -- pointwise algebra ------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, ArrowFunction):
            _same(self.groupoid, other.groupoid)
            return other.values
        return other

    def __add__(self, other):
        return ArrowFunction(self.groupoid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ArrowFunction(self.groupoid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return ArrowFunction(self.groupoid, self._coerce(other) - self.values)

    def __neg__(self):
        return ArrowFunction(self.groupoid, -self.values)

    def __mul__(self, other):
        """Pointwise product (use ``@`` for convolution)."""
        return ArrowFunction(self.groupoid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, c: Number):
        return ArrowFunction(self.groupoid, self.values / c)

    def __matmul__(self, other: "ArrowFunction") -> "ArrowFunction":
        return convolve(self, other)

    def conj(self) -> "ArrowFunction":
        return ArrowFunction(self.groupoid, self.values.conj())

    @property
    def real(self) -> "ArrowFunction":
        return ArrowFunction(self.groupoid, self.values.real.astype(complex))

    @property
    def star(self) -> "ArrowFunction":
        return involute(self)

    def restrict_to_units(self) -> "ArrowFunction":
        return ArrowFunction(self.groupoid, np.where(self.groupoid.unit_mask, self.values, 0))

    def unit_values(self) -> np.ndarray:
        """Values on the unit arrows, ordered like ``groupoid.units``."""
        return self.values[self.groupoid.unit_arrow_idx]

    def allclose(self, other: "ArrowFunction", atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.values - self._coerce(other)), initial=0.0) <= atol)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values), initial=0.0))

    # -- L² structure -------------------------------------------------
    def inner(self, other: "ArrowFunction") -> complex:
        """ν-weighted inner product, conjugate-linear in ``self``."""
        return complex(np.sum(self.values.conj() * self._coerce(other) * self.groupoid.nu_vector))

    def norm2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * self.groupoid.nu_vector)))

    # -- serialisation ------------------------------------------------
    def to_json(self) -> dict:
        re = {g: float(v.real) for g, v in zip(self.groupoid.arrows, self.values) if v.real != 0}
        im = {g: float(v.imag) for g, v in zip(self.groupoid.arrows, self.values) if v.imag != 0}
        return {"re": re, "im": im}

    @classmethod
    def from_json(cls, G: FiniteGroupoid, data: Mapping) -> "ArrowFunction":
        if not isinstance(data, Mapping) or not set(data) <= {"re", "im"}:
            raise ValueError('arrow function must be an object with keys "re" and "im"')
        v = np.zeros(len(G.arrows), dtype=complex)
        for part, scale in (("re", 1.0), ("im", 1j)):
            for g, c in data.get(part, {}).items():
                if g not in G.index:
                    raise ValueError(f"unknown arrow {g!r}")
                v[G.index[g]] += scale * float(c)
        return cls(G, v)


# ---------------------------------------------------------------------------
# algebra operations
# ---------------------------------------------------------------------------

def convolve(f: ArrowFunction, g: ArrowFunction) -> ArrowFunction:
    """(f*g)(γ) = Σ_{γ1γ2=γ} f(γ1) g(γ2)."""
    _same(f.groupoid, g.groupoid)
    G = f.groupoid
    i, j, k = G.pairs
    out = np.zeros(len(G.arrows), dtype=complex)
    np.add.at(out, k, f.values[i] * g.values[j])
    return ArrowFunction(G, out)


def involute(f: ArrowFunction) -> ArrowFunction:
    """f*(γ) = conj(f(γ⁻¹))."""
    return ArrowFunction(f.groupoid, f.values[f.groupoid.inv_idx].conj())


def fibre_sums(f: ArrowFunction) -> Tuple[np.ndarray, np.ndarray]:
    """Per-unit sums of |f| over range fibres and over source fibres."""
    G = f.groupoid
    a = np.abs(f.values)
    by_range = np.bincount(G.dst_idx, weights=a, minlength=len(G.units))
    by_source = np.bincount(G.src_idx, weights=a, minlength=len(G.units))
    return by_range, by_source


def i_norm(f: ArrowFunction) -> float:
    """max over units of the larger of the range- and source-fibre |f| sums."""
    by_range, by_source = fibre_sums(f)
    return float(max(by_range.max(initial=0.0), by_source.max(initial=0.0)))


def modular_function(G: FiniteGroupoid, power: float = 1.0) -> ArrowFunction:
    """δ**power as an arrow function; δ(γ) = μ(r(γ))/μ(s(γ))."""
    return ArrowFunction(G, G.delta_vector.astype(complex) ** power)


# ---------------------------------------------------------------------------
# fibre operators
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class FibreOperator:
    """Decomposable operator: one matrix per unit.

    With ``side="source"`` the block at x acts on ℓ²(G_x) (arrows with
    source x); with ``side="range"`` on ℓ²(G^x).  Rows and columns follow
    arrow order inside the fibre.
    """

    groupoid: FiniteGroupoid
    blocks: Dict[str, np.ndarray]
    side: str = "source"

    def __post_init__(self):
        if self.side not in ("source", "range"):
            raise ValueError("side must be 'source' or 'range'")
        for x, idx in self.fibres.items():
            b = np.asarray(self.blocks[x], dtype=complex)
            if b.shape != (len(idx), len(idx)):
                raise ValueError(f"block at {x} has shape {b.shape}, fibre has {len(idx)} arrows")
            self.blocks[x] = b

    @property
    def fibres(self) -> Dict[str, np.ndarray]:
        G = self.groupoid
        return G.source_fibres if self.side == "source" else G.range_fibres

    @classmethod
    def identity(cls, G: FiniteGroupoid, side: str = "source") -> "FibreOperator":
        fib = G.source_fibres if side == "source" else G.range_fibres
        return cls(G, {x: np.eye(len(idx), dtype=complex) for x, idx in fib.items()}, side)

    @classmethod
    def multiplication(cls, f: ArrowFunction) -> "FibreOperator":
        """Pointwise multiplication by ``f`` (source-decomposed)."""
        G = f.groupoid
        return cls(G, {x: np.diag(f.values[idx]) for x, idx in G.source_fibres.items()})

    @classmethod
    def from_dense(cls, G: FiniteGroupoid, matrix: np.ndarray, side: str = "source",
                   atol: float = 1e-12) -> "FibreOperator":
        op = cls(G, {x: matrix[np.ix_(idx, idx)] for x, idx in
                     (G.source_fibres if side == "source" else G.range_fibres).items()}, side)
        if np.max(np.abs(op.to_dense() - matrix), initial=0.0) > atol:
            raise ValueError("operator is not decomposable over the fibres")
        return op

    def to_dense(self) -> np.ndarray:
        n = len(self.groupoid.arrows)
        out = np.zeros((n, n), dtype=complex)
        for x, idx in self.fibres.items():
            out[np.ix_(idx, idx)] = self.blocks[x]
        return out

    def apply(self, f: ArrowFunction) -> ArrowFunction:
        _same(self.groupoid, f.groupoid)
        out = np.zeros_like(f.values)
        for x, idx in self.fibres.items():
            out[idx] = self.blocks[x] @ f.values[idx]
        return ArrowFunction(self.groupoid, out)

    def __matmul__(self, other):
        if isinstance(other, ArrowFunction):
            return self.apply(other)
        if isinstance(other, FibreOperator):
            _same(self.groupoid, other.groupoid)
            if self.side != other.side:
                raise ValueError("cannot compose operators decomposed over different fibres")
            return FibreOperator(self.groupoid,
                                 {x: self.blocks[x] @ other.blocks[x] for x in self.blocks},
                                 self.side)
        return NotImplemented

    def __add__(self, other: "FibreOperator") -> "FibreOperator":
        return FibreOperator(self.groupoid, {x: b + other.blocks[x] for x, b in self.blocks.items()},
                             self.side)

    def __sub__(self, other: "FibreOperator") -> "FibreOperator":
        return FibreOperator(self.groupoid, {x: b - other.blocks[x] for x, b in self.blocks.items()},
                             self.side)

    def scale(self, c: Number) -> "FibreOperator":
        return FibreOperator(self.groupoid, {x: c * b for x, b in self.blocks.items()}, self.side)

    def adjoint(self) -> "FibreOperator":
        # the ν-weight is constant on each fibre, so the adjoint is blockwise
        return FibreOperator(self.groupoid, {x: b.conj().T for x, b in self.blocks.items()},
                             self.side)

    def norm(self) -> float:
        """Operator norm: the largest block spectral norm."""
        return max((float(np.linalg.norm(b, 2)) if b.size else 0.0
                    for b in self.blocks.values()), default=0.0)

    def max_abs_diff(self, other: "FibreOperator") -> float:
        return max((float(np.max(np.abs(b - other.blocks[x]), initial=0.0))
                    for x, b in self.blocks.items()), default=0.0)

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the Hermitian part over all blocks."""
        vals = [np.linalg.eigvalsh((b + b.conj().T) / 2).min() for b in self.blocks.values() if b.size]
        return float(min(vals, default=0.0))


def regular_rep(f: ArrowFunction) -> FibreOperator:
    """Left regular representation L(f) as blocks on ℓ²(G_x).

    Entry ``[γ, γ2]`` of the block at x is f(γ γ2⁻¹).
    """
    G = f.groupoid
    T = G.product_table
    blocks = {}
    for x, idx in G.source_fibres.items():
        prod = T[np.ix_(idx, G.inv_idx[idx])]  # γ · γ2⁻¹, always defined inside G_x
        blocks[x] = f.values[prod]
    return FibreOperator(G, blocks, "source")


def right_convolve(xi: ArrowFunction, g: ArrowFunction) -> Tuple[ArrowFunction, float, float]:
    """Return ξ*g together with ‖ξ*g‖₂ and the bound ‖δ^{-1/2} g‖_I ‖ξ‖₂."""
    out = convolve(xi, g)
    weighted = ArrowFunction(g.groupoid, g.values * g.groupoid.delta_vector ** -0.5)
    return out, out.norm2(), i_norm(weighted) * xi.norm2()


def right_rep_dense(g: ArrowFunction) -> np.ndarray:
    """Matrix of R(g): ξ ↦ ξ*g in arrow coordinates (not decomposable)."""
    G = g.groupoid
    n = len(G.arrows)
    out = np.zeros((n, n), dtype=complex)
    i, j, k = G.pairs
    # (ξ*g)(k) += ξ(i) g(j)
    np.add.at(out, (k, i), g.values[j])
    return out


def left_rep_dense(f: ArrowFunction) -> np.ndarray:
    return regular_rep(f).to_dense()


def unit_function(G: FiniteGroupoid, a: Mapping[str, Number]) -> ArrowFunction:
    return ArrowFunction.on_units(G, a)


def right_module_action(xi: ArrowFunction, a: Mapping[str, Number]) -> ArrowFunction:
    """ξ·a: (ξa)(γ) = ξ(γ) a(s(γ))."""
    G = xi.groupoid
    av = np.array([a.get(x, 0.0) for x in G.units], dtype=complex)
    return ArrowFunction(G, xi.values * av[G.src_idx])


def op_norm_dense(matrix: np.ndarray, G: FiniteGroupoid) -> float:
    """Operator norm on L²(G, ν) of a dense matrix in arrow coordinates."""
    w = np.sqrt(G.nu_vector)
    return float(np.linalg.norm((w[:, None] * matrix) / w[None, :], 2))


def dense_adjoint(matrix: np.ndarray, G: FiniteGroupoid) -> np.ndarray:
    """Adjoint for the ν-weighted inner product."""
    w = G.nu_vector
    return (matrix.conj().T * w[None, :]) / w[:, None]

