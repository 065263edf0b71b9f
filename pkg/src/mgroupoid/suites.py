"""Named check suites: each runs a module's invariants and returns a CheckReport."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import amenability as am
from . import treeing as tr
from . import vnalg as vn
from .convolution import (ArrowFunction, FibreOperator, convolve, i_norm, involute,
                          modular_function, regular_rep, right_rep_dense)
from .funkit import (ALGEBRAIC_TOL, SPECTRAL_TOL, NotPositiveDefinite, coefficient, gns,
                     is_cnd, is_positive_definite, properness_profile, random_pd, schoenberg,
                     tree_mass_bound)
from .groupoid import FiniteGroupoid, bisection_partition, validate
from .report import CheckReport

SUITES = ("pd", "cnd", "treeing", "vn", "amen", "haagerup")
SCHOENBERG_TIMES = (0.25, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    samples: int = 200
    tol_algebraic: float = ALGEBRAIC_TOL
    tol_spectral: float = SPECTRAL_TOL
    stages: int = 3

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _label(G: FiniteGroupoid) -> str:
    return G.name or f"{len(G.units)}u{len(G.arrows)}a"


def validate_report(G: FiniteGroupoid) -> CheckReport:
    rep = CheckReport("validate", _label(G))
    problems = validate(G)
    rep.add("groupoid.axioms", not problems, float(len(problems)), problems or None)
    return rep


def non_pd_control(G: FiniteGroupoid) -> ArrowFunction:
    """1 on units and 2 on one non-unit arrow and its inverse: never positive definite."""
    g = next(a for a in G.arrows if not G.is_unit_arrow(a))
    return ArrowFunction.from_mapping(G, {**{G.unit_arrow[x]: 1.0 for x in G.units},
                                          g: 2.0, G.inverse[g]: 2.0})


# ---------------------------------------------------------------------------

def suite_pd(F: ArrowFunction, cfg: SuiteConfig = SuiteConfig()) -> CheckReport:
    G = F.groupoid
    rep = CheckReport("pd", _label(G))
    ok, fibres = is_positive_definite(F, cfg.tol_algebraic)
    for x, r in fibres.items():
        rep.add(f"pd.fibre[{x}]", r.passed, max(0.0, -r.min_eig), r.to_json())
    unit_dev = float(np.max(np.abs(F.unit_values() - 1), initial=0.0))
    rep.add("pd.unit_restriction_is_one", unit_dev <= cfg.tol_algebraic, unit_dev, warn_only=True)
    if ok and unit_dev <= cfg.tol_algebraic:
        data = gns(F)
        res = float(np.max(np.abs(coefficient(data.representation, data.section).values - F.values)))
        rep.within("pd.gns_coefficient", res, cfg.tol_spectral, {"dims": data.representation.dims})
        rep.within("pd.gns_representation", max(data.representation.residuals().values()),
                   cfg.tol_algebraic)
    return rep


def suite_cnd(psi: ArrowFunction, cfg: SuiteConfig = SuiteConfig()) -> CheckReport:
    G = psi.groupoid
    rep = CheckReport("cnd", _label(G))
    imag = float(np.max(np.abs(psi.values.imag), initial=0.0))
    rep.within("cnd.real", imag, cfg.tol_algebraic)
    if imag > cfg.tol_algebraic:
        return rep
    ok, r = is_cnd(psi, cfg.tol_algebraic)
    rep.within("cnd.vanishes_on_units", r.vanishes_on_units, cfg.tol_algebraic * r.scale)
    rep.within("cnd.symmetric", r.symmetry_residual, cfg.tol_algebraic * r.scale)
    worst = max(r.compressed_max_eig.values(), default=0.0)
    rep.add("cnd.mean_zero_compression", ok, max(0.0, worst), r.compressed_max_eig)
    if ok:
        for t in SCHOENBERG_TIMES:
            E = schoenberg(psi, t)
            pd_ok, fib = is_positive_definite(E, cfg.tol_algebraic)
            rep.add(f"cnd.schoenberg[t={t}]", pd_ok, max(0.0, -min(f.min_eig for f in fib.values())))
    return rep


def suite_treeing(G: FiniteGroupoid, Q: Sequence[str], cfg: SuiteConfig = SuiteConfig()
                  ) -> CheckReport:
    rep = CheckReport("treeing", _label(G))
    try:
        ok, diag = tr.is_treeing(G, Q)
    except tr.GraphingError as exc:
        rep.add(f"treeing.graphing[{exc.reason}]", False, 1.0, {"arrows": exc.arrows})
        return rep
    cycles = {x: d.cycle for x, d in diag.items() if not d.is_tree}
    rep.add("treeing.fibres_are_trees", ok, float(len(cycles)),
            {"cycles": cycles} if cycles else {x: d.to_json() for x, d in diag.items()})
    if not ok:
        return rep
    dist, psi = tr.tree_metric(G, Q)
    rep.within("treeing.psi_symmetric", float(np.max(np.abs(psi.values - psi.values[G.inv_idx]))),
               cfg.tol_algebraic)
    tri = 0
    for table in dist.values():
        verts = sorted({a for a, _ in table})
        for a in verts:
            for b in verts:
                for c in verts:
                    tri = max(tri, table[(a, c)] - table[(a, b)] - table[(b, c)])
    rep.add("treeing.triangle_inequality", tri <= 0, float(max(tri, 0)))
    inv = 0
    for (g, v1), gv1 in G.compose.items():
        for v2 in G.range_fibre(G.dst[v1]):
            inv = max(inv, abs(dist[G.dst[g]][(gv1, G.mul(g, v2))] - dist[G.dst[v1]][(v1, v2)]))
    rep.add("treeing.left_invariance", inv == 0, float(inv))
    cnd_rep = suite_cnd(psi, cfg)
    rep.extend(cnd_rep)
    degree = max(sum(1 for g in Q if G.dst[g] == x) for x in G.units) if Q else 0
    for c in (1, 2, 3):
        b = tree_mass_bound(psi, degree, c)
        rep.add(f"treeing.ball_bound[c={c}]", b["ball_bound_holds"],
                max(0.0, float(b["mass"] - b["ball_bound"])), b)
    try:
        plus, _ = tr.orient(G, Q)
        rep.add("treeing.orientation_invariant", tr.orientation_invariance(G, plus), 0.0,
                {"Q_plus": plus}, warn_only=True)
    except tr.GraphingError as exc:
        rep.add("treeing.orientation", False, 0.0, {"self_inverse": exc.arrows}, warn_only=True)
    return rep


def suite_haagerup(G: FiniteGroupoid, Q: Sequence[str], cfg: SuiteConfig = SuiteConfig(),
                   stages: Optional[List[tr.HaagerupStage]] = None) -> CheckReport:
    rep = CheckReport("haagerup", _label(G))
    if stages is None:
        try:
            stages = tr.haagerup_from_treeing(G, Q, cfg.stages)
        except tr.GraphingError as exc:
            rep.add(f"haagerup.treeing[{exc.reason}]", False, 1.0, str(exc))
            return rep
    prev = None
    for s in stages:
        pd_ok, fib = is_positive_definite(s.F, cfg.tol_algebraic)
        rep.add(f"haagerup.stage[{s.k}].positive_definite", pd_ok,
                max(0.0, -min(f.min_eig for f in fib.values())))
        rep.within(f"haagerup.stage[{s.k}].one_on_units",
                   float(np.max(np.abs(s.F.unit_values() - 1))), cfg.tol_algebraic)
        rep.add(f"haagerup.stage[{s.k}].deviation_rule", s.deviation <= 1.0 / s.k + cfg.tol_algebraic,
                max(0.0, s.deviation - 1.0 / s.k), {"n": s.n, "deviation": s.deviation})
        prof = properness_profile(s.F, (0.5, 0.1), kind="pd")
        rep.add(f"haagerup.stage[{s.k}].properness_profile", True, 0.0,
                {str(t): str(m) for t, m in prof.items()})
        phi = vn.cp_from_pd(s.F)
        ident = float(max((phi(vn.cond_expectation(ArrowFunction(G, e))) -
                           ArrowFunction(G, e).restrict_to_units()).max_abs()
                          for e in np.eye(len(G.arrows))))
        rep.within(f"haagerup.stage[{s.k}].preserves_expectation", ident, cfg.tol_algebraic)
        if prev is not None:
            drop = float(np.max(prev.F.values.real - s.F.values.real))
            rep.add(f"haagerup.stage[{s.k}].monotone", drop <= cfg.tol_algebraic, max(drop, 0.0),
                    warn_only=True)
        prev = s
    return rep


# ---------------------------------------------------------------------------

class _Max:
    """Running maximum of residuals for one named identity."""

    def __init__(self):
        self.value = 0.0

    def __call__(self, x) -> None:
        self.value = max(self.value, float(np.max(np.abs(x), initial=0.0)))


def suite_vn(G: FiniteGroupoid, cfg: SuiteConfig = SuiteConfig()) -> CheckReport:
    """Algebra, modular theory, module/trace and PD ↔ CP identities on random samples."""
    rep = CheckReport("vn", _label(G))
    rng = cfg.rng()
    tol, stol = cfg.tol_algebraic, cfg.tol_spectral
    names = ["assoc", "anti", "invol", "inorm", "opnorm", "hom", "starhom",
             "J_inv", "J_iso", "JLJ", "sig_mul", "sig_A", "sig_grp", "phi_faith", "phi_E",
             "calc", "bc_trace"]
    R = {k: _Max() for k in names}
    sqrt_delta = modular_function(G, 0.5)
    J_samples = min(cfg.samples, 20)
    for i in range(cfg.samples):
        f, g, h = (ArrowFunction.random(G, rng) for _ in range(3))
        fg = convolve(f, g)
        R["assoc"]((convolve(fg, h) - convolve(f, convolve(g, h))).values)
        R["anti"]((involute(fg) - convolve(involute(g), involute(f))).values)
        R["invol"]((involute(involute(f)) - f).values)
        R["inorm"](max(0.0, i_norm(fg) - i_norm(f) * i_norm(g)))
        Lf = regular_rep(f)
        R["opnorm"](max(0.0, Lf.norm() - i_norm(f)))
        R["hom"](regular_rep(fg).max_abs_diff(Lf @ regular_rep(g)))
        R["starhom"](regular_rep(involute(f)).max_abs_diff(Lf.adjoint()))
        xi, eta = ArrowFunction.random(G, rng), ArrowFunction.random(G, rng)
        Jxi, Jeta = vn.modular_conjugation(xi), vn.modular_conjugation(eta)
        R["J_inv"]((vn.modular_conjugation(Jxi) - xi).values)
        R["J_iso"](Jxi.inner(Jeta) - np.conj(xi.inner(eta)))
        if i < J_samples:
            R["JLJ"](vn.j_conjugate_dense(f) - right_rep_dense(sqrt_delta * involute(f)))
        s, t = rng.uniform(-3, 3, size=2)
        R["sig_mul"]((vn.modular_flow(fg, t).f - convolve(vn.modular_flow(f, t).f,
                                                            vn.modular_flow(g, t).f)).values)
        a = f.restrict_to_units()
        R["sig_A"]((vn.modular_flow(a, t).f - a).values)
        R["sig_grp"]((vn.modular_flow(vn.modular_flow(f, s), t).f - vn.modular_flow(f, s + t).f).values)
        R["phi_faith"](vn.state_phi(convolve(involute(f), f)) - f.norm2() ** 2)
        R["phi_E"](vn.state_phi(vn.cond_expectation(f)) - vn.state_phi(f))
        R["calc"](vn.trace(vn.rank_one(xi, eta)) - vn.tau_mu(vn.module_inner(eta, xi), G))
        R["bc_trace"](vn.trace(vn.basic_construction_element(f, g)) - vn.state_phi(convolve(g, f)))

    ids = {"assoc": "algebra.associativity", "anti": "algebra.involution_antimultiplicative",
           "invol": "algebra.involution_involutive", "inorm": "algebra.i_norm_submultiplicative",
           "opnorm": "algebra.operator_norm_bound", "hom": "algebra.regular_rep_multiplicative",
           "starhom": "algebra.regular_rep_star", "J_inv": "modular.J_involution",
           "J_iso": "modular.J_antiunitary", "JLJ": "modular.JLJ_equals_right_rep",
           "sig_mul": "modular.flow_multiplicative", "sig_A": "modular.flow_fixes_A",
           "sig_grp": "modular.flow_one_parameter", "phi_faith": "modular.state_faithful",
           "phi_E": "modular.state_expectation", "calc": "trace.rank_one_identity",
           "bc_trace": "trace.basic_construction"}
    for k in names:
        rep.within(ids[k], R[k].value, tol)

    # module basis and trace
    basis = vn.bisection_basis(G)
    ortho = _Max()
    for i, b1 in enumerate(basis):
        for j, b2 in enumerate(basis):
            ip = vn.module_inner(b1, b2)
            ortho(ip if i != j else ip * (1 - ip))  # off-diagonal 0, diagonal a projection
    total = sum((vn.rank_one(b, b) for b in basis[1:]), vn.rank_one(basis[0], basis[0]))
    rep.within("trace.bisection_basis_orthonormal", ortho.value, tol)
    rep.within("trace.bisection_basis_complete", total.max_abs_diff(FibreOperator.identity(G)), tol)
    rep.within("trace.projection_e_A", abs(vn.trace(vn.e_A(G)) - 1.0), tol)
    other = vn.bisection_basis(G, "scan")
    mres = _Max()
    for _ in range(min(cfg.samples, 50)):
        f = ArrowFunction.random(G, rng)
        integral = complex(np.sum(f.values * G.nu_vector))
        M = FibreOperator.multiplication(f)
        mres(vn.trace(M) - integral)
        mres(vn.trace(M, basis=other) - integral)
        mres(vn.trace_via_module(M) - integral)
    rep.within("trace.multiplication_integral", mres.value, tol)

    # positive definite ↔ completely positive
    parts = [bisection_partition(G), bisection_partition(G, "scan"), bisection_partition(G, "singletons")]
    rt, pi, st, iso, gc, gr = (_Max() for _ in range(6))
    heavy = min(cfg.samples, 100)
    for i in range(cfg.samples):
        F = random_pd(G, rng)
        phi = vn.cp_from_pd(F, check=False)
        back = vn.pd_from_cp(phi, parts[0])
        rt((back - F).values)
        for p in parts[1:]:
            pi((vn.pd_from_cp(phi, p) - back).values)
        if i < heavy:
            s_chk = vn.verify_stinespring(F)
            st(s_chk.residual)
            iso(s_chk.isometry_residual)
            data = gns(F)
            gc((coefficient(data.representation, data.section) - F).values)
            gr(max(data.representation.residuals().values()))
    rep.within("roundtrip.pd_cp_pd", rt.value, tol)
    rep.within("roundtrip.partition_independence", pi.value, tol)
    rep.within("roundtrip.stinespring", st.value, stol)
    rep.within("roundtrip.stinespring_isometry", iso.value, stol)
    rep.within("gns.coefficient", gc.value, stol)
    rep.within("gns.representation_axioms", gr.value, tol)

    F = random_pd(G, rng)
    margin = vn.complete_positivity_margin(vn.cp_from_pd(F, check=False), 2, samples=10, rng=rng)
    rep.add("cp.probe_pd_diagonal", margin >= -1e-9, max(0.0, -margin))
    if len(G.arrows) > len(G.units):
        bad = non_pd_control(G)
        margin = vn.complete_positivity_margin(vn.CpMap(G, np.diag(bad.values)), 2, samples=10, rng=rng)
        rep.add("cp.probe_rejects_non_pd", margin < -1e-9, max(0.0, margin))
    return rep


def suite_amen(G: FiniteGroupoid, cfg: SuiteConfig = SuiteConfig(),
               F: Optional[ArrowFunction] = None) -> CheckReport:
    rep = CheckReport("amen", _label(G))
    rng = cfg.rng()
    tol, stol = cfg.tol_algebraic, cfg.tol_spectral
    samples = [F] if F is not None else [random_pd(G, rng) for _ in range(cfg.samples)]
    rt, norms, comm = _Max(), _Max(), _Max()
    agree = 0
    for H in samples:
        pd_ok, _ = is_positive_definite(H, tol)
        agree += int(pd_ok == am.rho_is_psd(H, tol))
        if not pd_ok:
            continue
        xi = am.xi_from_pd(H)
        norms(np.array(list(am.fibre_norms(xi).values())) - 1.0)
        rt((am.coefficient_of_regular(xi, check=False) - H).values)
        comm(am.rho_commutation_residual(H))
    rep.within("amen.xi_unit_field", norms.value, stol)
    rep.within("amen.coefficient_round_trip", rt.value, stol)
    rep.within("amen.rho_commutes_with_translations", comm.value, tol)
    rep.add("amen.rho_psd_iff_pd", agree == len(samples), float(len(samples) - agree))
    if len(G.arrows) > len(G.units):
        bad = non_pd_control(G)
        rejected = not is_positive_definite(bad, tol)[0] and not am.rho_is_psd(bad, tol)
        try:
            am.xi_from_pd(bad)
            raised = False
        except NotPositiveDefinite:
            raised = True
        rep.add("amen.rejects_non_pd", rejected and raised, 0.0 if rejected and raised else 1.0)
    fields = am.interpolating_fields(G, 4)
    w = am.amenability_witness_check(fields)
    rep.add("amen.interpolation_monotone", w.nonincreasing, 0.0, {"deviations": w.deviations})
    rep.within("amen.uniform_field_coefficient", w.deviations[-1], tol)
    return rep


def check_all(groupoids: Sequence[FiniteGroupoid], treeings: dict, cfg: SuiteConfig
              ) -> List[CheckReport]:
    """Every suite on every groupoid; treeing suites only where a treeing is given."""
    out = []
    for G in groupoids:
        out.append(validate_report(G))
        out.append(suite_vn(G, cfg))
        out.append(suite_amen(G, cfg))
        Q = treeings.get(G.name)
        if Q is not None:
            out.append(suite_treeing(G, Q, cfg))
            out.append(suite_haagerup(G, Q, cfg))
    return out
