import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import fixture_and_functions
from mgroupoid import fixtures
from mgroupoid import vnalg as vn
from mgroupoid.convolution import (ArrowFunction, FibreOperator, convolve, involute,
                                   modular_function, regular_rep, right_rep_dense)
from mgroupoid.funkit import random_pd, schoenberg
from mgroupoid.groupoid import bisection_partition

TOL = 1e-10
SEEDS = st.integers(0, 2 ** 32 - 1)


def tol(*fs):
    return TOL * max(1.0, *(f.max_abs() for f in fs)) ** 2


# -- state and expectation ---------------------------------------------------

def test_state_examples():
    R2 = fixtures.r2()
    assert vn.state_phi(ArrowFunction.units(R2)) == 1
    assert vn.state_phi(ArrowFunction.indicator(R2, ["ab"])) == 0


@given(fixture_and_functions(k=2))
def test_state_gives_inner_product(args):
    G, f, g = args
    lhs = vn.state_phi(convolve(involute(f), g))
    assert abs(lhs - f.inner(g)) <= tol(f, g)
    assert abs(vn.state_phi(convolve(involute(f), f)) - f.norm2() ** 2) <= tol(f)


def test_expectation_examples():
    R2 = fixtures.r2()
    one = ArrowFunction.units(R2)
    assert vn.cond_expectation(one).f.allclose(one)
    assert vn.cond_expectation(ArrowFunction.indicator(R2, ["ab"])).f.allclose(ArrowFunction.zeros(R2))


@given(fixture_and_functions(k=3))
def test_expectation_bimodule_and_compression(args):
    G, m, a, b = args
    a, b = a.restrict_to_units(), b.restrict_to_units()
    lhs = vn.cond_expectation(convolve(convolve(a, m), b)).f
    rhs = convolve(convolve(a, vn.cond_expectation(m).f), b)
    assert lhs.allclose(rhs, tol(a, m, b) * 10)
    hat = vn.VnElement(m).hat()
    assert vn.cond_expectation(m).f.allclose(vn.e_A(G).apply(hat), tol(m))


# -- modular theory ----------------------------------------------------------

def test_modular_conjugation_examples():
    R2 = fixtures.r2()
    f = ArrowFunction.random(R2, np.random.default_rng(1))
    assert vn.modular_conjugation(f).allclose(involute(f), 1e-15)
    assert vn.modular_conjugation(vn.modular_conjugation(f)).allclose(f, 1e-15)

    # weighted R2: δ(ba) = μ(b)/μ(a) = 1/2, so J(1_ab) = 2^{-1/2} 1_ba
    W = fixtures.r2w()
    J = vn.modular_conjugation(ArrowFunction.indicator(W, ["ab"]))
    assert J.allclose(ArrowFunction.indicator(W, ["ba"]) / math.sqrt(2), 1e-15)
    assert math.isclose(J.norm2() ** 2, 1 / 3) and math.isclose(
        ArrowFunction.indicator(W, ["ab"]).norm2() ** 2, 1 / 3)


@given(fixture_and_functions(k=3))
def test_modular_conjugation_identities(args):
    G, f, xi, g = args
    J = vn.modular_conjugation
    assert J(J(xi)).allclose(xi, tol(xi))
    assert math.isclose(J(xi).norm2(), xi.norm2(), rel_tol=1e-12, abs_tol=1e-12)
    assert abs(J(xi).inner(J(g)) - np.conj(xi.inner(g))) <= tol(xi, g)
    JLJ = vn.j_conjugate_dense(f)
    R = right_rep_dense(modular_function(G, 0.5) * involute(f))
    assert np.max(np.abs(JLJ - R)) <= tol(f)
    assert np.allclose(JLJ @ xi.values, convolve(xi, modular_function(G, 0.5) * involute(f)).values,
                       atol=tol(f, xi) * 10)
    Lg = regular_rep(g).to_dense()
    assert np.max(np.abs(JLJ @ Lg - Lg @ JLJ)) <= tol(f, g) * 10


def test_modular_flow_examples():
    R2 = fixtures.r2()
    f = ArrowFunction.random(R2, np.random.default_rng(2))
    for t in (-1.0, 0.3, 5.0):
        assert vn.modular_flow(f, t).f.allclose(f, 1e-15)
    W = fixtures.r2w()
    out = vn.modular_flow(ArrowFunction.indicator(W, ["ab"]), math.pi / math.log(2))
    assert out.f.allclose(-ArrowFunction.indicator(W, ["ab"]), 1e-12)


@given(fixture_and_functions(k=2), st.floats(-5, 5), st.floats(-5, 5))
def test_modular_flow_laws(args, s, t):
    G, f, g = args
    sig = lambda h, u: vn.modular_flow(h, u).f  # noqa: E731
    assert sig(convolve(f, g), t).allclose(convolve(sig(f, t), sig(g, t)), tol(f, g) * 10)
    a = f.restrict_to_units()
    assert sig(a, t).allclose(a, tol(a))
    assert sig(sig(f, s), t).allclose(sig(f, s + t), tol(f))
    assert abs(vn.state_phi(sig(f, t)) - vn.state_phi(f)) <= tol(f)


def test_vn_element_wrapper(G, rng):
    f, g = ArrowFunction.random(G, rng), ArrowFunction.random(G, rng)
    m, n = vn.VnElement(f), vn.VnElement(g)
    assert (m @ n).op.max_abs_diff(m.op @ n.op) <= 1e-10
    assert m.adjoint().op.max_abs_diff(m.op.adjoint()) <= 1e-12
    assert m.hat().allclose(f, 1e-12)
    assert (m + n).f.allclose(f + g) and (m - n).f.allclose(f - g)


# -- module structure and trace ---------------------------------------------

def test_gram_schmidt_examples():
    R2 = fixtures.r2()
    basis = vn.bisection_basis(R2)
    out, proj = vn.module_gram_schmidt(basis)
    assert all(o.allclose(b, 1e-15) for o, b in zip(out, basis))
    assert all(np.array_equal(p, np.ones(2)) for p in proj)
    one = ArrowFunction.units(R2)
    out, proj = vn.module_gram_schmidt([one, one])
    assert out[0].allclose(one) and out[1].allclose(ArrowFunction.zeros(R2))
    assert np.array_equal(proj[1], np.zeros(2))


@given(st.sampled_from(["R3", "S3", "Z2swap", "R2w"]), SEEDS)
def test_gram_schmidt_reconstruction_identity(name, seed):
    G = fixtures.get(name)
    rng = np.random.default_rng(seed)
    vecs = [ArrowFunction.random(G, rng) for _ in range(3)]
    fam, proj = vn.module_gram_schmidt(vecs)
    for i, a in enumerate(fam):
        for j, b in enumerate(fam):
            expected = proj[j] if i == j else 0
            assert np.allclose(vn.module_inner(a, b), expected, atol=1e-10)
    # ξ in the A-span of the family
    coeffs = [rng.standard_normal(len(G.units)) for _ in fam]
    xi = sum((vn.VnElement(b).hat() * ArrowFunction(G, c[G.src_idx]) for b, c in zip(fam, coeffs)),
             ArrowFunction.zeros(G))
    lhs = vn.module_inner(xi, xi)
    rhs = sum(vn.module_inner(xi, b) * vn.module_inner(b, xi) for b in fam)
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_bisection_basis_is_orthonormal_and_complete(G):
    basis = vn.bisection_basis(G)
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            ip = vn.module_inner(a, b)
            assert np.allclose(ip, ip * ip) if i == j else np.allclose(ip, 0)
    total = sum((vn.rank_one(b, b) for b in basis[1:]), vn.rank_one(basis[0], basis[0]))
    assert total.max_abs_diff(FibreOperator.identity(G)) == 0


def test_trace_examples():
    R2 = fixtures.r2()
    assert abs(vn.trace(vn.e_A(R2)) - 1) <= 1e-12
    assert abs(vn.trace(FibreOperator.multiplication(ArrowFunction.constant(R2, 1.0))) - 2) <= 1e-12
    ab = ArrowFunction.indicator(R2, ["ab"])
    assert abs(vn.trace(vn.rank_one(ab, ab)) - 0.5) <= 1e-12
    assert abs(vn.tau_mu(vn.module_inner(ab, ab), R2) - 0.5) <= 1e-12


def test_trace_of_e_A_is_one(G):
    assert abs(vn.trace(vn.e_A(G)) - 1) <= 1e-10
    assert abs(vn.trace_via_module(vn.e_A(G)) - 1) <= 1e-10


@given(fixture_and_functions(k=2))
def test_trace_formulas(args):
    G, f, g = args
    M = FibreOperator.multiplication(f)
    integral = np.sum(f.values * G.nu_vector)
    for method in ("saturation", "scan", "singletons"):
        assert abs(vn.trace(M, basis=vn.bisection_basis(G, method)) - integral) <= tol(f)
    assert abs(vn.trace(vn.rank_one(f, g)) - vn.tau_mu(vn.module_inner(g, f), G)) <= tol(f, g)
    assert abs(vn.trace_via_module(vn.rank_one(f, g)) - vn.trace(vn.rank_one(f, g))) <= tol(f, g)
    bc = vn.basic_construction_element(f, g)
    assert abs(vn.trace(bc) - vn.state_phi(convolve(g, f))) <= tol(f, g) * 10


def test_trace_accepts_dense_and_rejects_non_commuting(G, rng):
    f = ArrowFunction.random(G, rng)
    M = FibreOperator.multiplication(f)
    assert abs(vn.trace(M.to_dense(), G) - vn.trace(M)) <= 1e-12
    if len(G.units) > 1:
        D = np.ones((len(G.arrows), len(G.arrows)))
        with pytest.raises(ValueError, match="right action"):
            vn.trace(D, G)


# -- completely positive maps ------------------------------------------------

def test_cp_from_pd_examples():
    R2 = fixtures.r2()
    assert np.allclose(vn.cp_from_pd(ArrowFunction.constant(R2, 1.0)).matrix, np.eye(4))
    assert np.allclose(vn.cp_from_pd(ArrowFunction.units(R2)).matrix, vn.CpMap.expectation(R2).matrix)
    F = schoenberg(ArrowFunction.from_mapping(R2, {"ab": 1, "ba": 1}), 1.0)
    ab = ArrowFunction.indicator(R2, ["ab"])
    assert vn.cp_from_pd(F)(ab).allclose(ab * math.exp(-1), 1e-15)


def test_pd_from_cp_examples(G):
    assert vn.pd_from_cp(vn.CpMap.identity(G)).allclose(ArrowFunction.constant(G, 1.0))
    assert vn.pd_from_cp(vn.CpMap.expectation(G)).allclose(ArrowFunction.units(G))


@given(st.sampled_from(sorted(fixtures.FIXTURES)), SEEDS)
def test_pd_cp_round_trip_and_partition_independence(name, seed):
    G = fixtures.get(name)
    F = random_pd(G, np.random.default_rng(seed))
    phi = vn.cp_from_pd(F)
    for method in ("saturation", "scan", "singletons"):
        assert vn.pd_from_cp(phi, bisection_partition(G, method)).allclose(F, 1e-10)


@given(st.sampled_from(sorted(fixtures.FIXTURES)), SEEDS)
def test_stinespring(name, seed):
    F = random_pd(fixtures.get(name), np.random.default_rng(seed))
    chk = vn.verify_stinespring(F)
    assert chk.residual <= 1e-8 and chk.isometry_residual <= 1e-8


def test_stinespring_constant_function():
    chk = vn.verify_stinespring(ArrowFunction.constant(fixtures.r2(), 1.0))
    assert chk.residual <= 1e-14 and chk.dims == {"a": 1, "b": 1}


@given(st.sampled_from(sorted(fixtures.FIXTURES)), SEEDS)
def test_cp_maps_contract_and_preserve_expectation(name, seed):
    G = fixtures.get(name)
    rng = np.random.default_rng(seed)
    phi = vn.cp_from_pd(random_pd(G, rng))
    m = ArrowFunction.random(G, rng)
    assert phi(m).norm2() <= m.norm2() * (1 + 1e-12)
    assert vn.cond_expectation(phi(m)).f.allclose(vn.cond_expectation(m).f, 1e-12)


def test_cp_map_validation():
    R2 = fixtures.r2()
    with pytest.raises(ValueError, match="bilinear"):
        vn.CpMap(R2, np.ones((4, 4)))
    with pytest.raises(ValueError, match="unital"):
        vn.CpMap(R2, 2 * np.eye(4))
    phi = vn.CpMap.identity(R2)
    again = vn.CpMap.from_json(R2, phi.to_json())
    assert np.array_equal(again.matrix, phi.matrix)


def test_cp_probe_examples(rng):
    R2 = fixtures.r2()
    for k in (1, 2, 3):
        assert vn.complete_positivity_probe(vn.CpMap.identity(R2), k, samples=10, rng=rng)
    assert vn.complete_positivity_probe(vn.cp_from_pd(random_pd(R2, rng)), 2, rng=rng)
    bad = ArrowFunction.from_mapping(R2, {"aa": 1, "bb": 1, "ab": 2, "ba": 2})
    phi = vn.CpMap(R2, np.diag(bad.values))
    assert not vn.complete_positivity_probe(phi, 2, rng=rng)


def test_relative_haagerup_report():
    R2 = fixtures.r2()
    psi = ArrowFunction.from_mapping(R2, {"ab": 1, "ba": 1})
    maps = [vn.cp_from_pd(schoenberg(psi, 1.0 / n)) for n in (1, 2, 4, 8)]
    rep = vn.relative_haagerup_report(maps)
    assert rep["expectation_preserved"] and rep["distances_nonincreasing"]
    assert rep["stages"][0]["profile"]["0.5"] == "1"  # e^{-1} < 1/2: only units survive
