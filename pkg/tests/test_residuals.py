import numpy as np
import pytest

from bihkit.calculus import Immersion, PointCalculus
from bihkit.residuals import (
    COROLLARIES,
    ERRATA,
    ResidualContext,
    bi_f_tension_direct,
    bitension_direct,
    compare_modes,
    curvature_trace,
    f_bitension_direct,
    tension,
    theorem_residual,
)
from bihkit.spaces import SpaceError, make_space

S3 = make_space("sasakian_sphere", n=1, ctilde=1.0)
S3D = make_space("sasakian_sphere", n=1, ctilde=3.0)
FLAT3 = make_space("cosymplectic_flat", n=1)
C2 = make_space("euclidean_complex", n=2)

R_SMALL = np.sqrt(2.0) - 1.0  # chart radius of the 45-degree small sphere


def small_sphere(weight="1"):
    return Immersion.from_strings(
        ["u", "v"], S3,
        [f"{R_SMALL}*cos(v)*cos(u)", f"{R_SMALL}*cos(v)*sin(u)",
         f"{R_SMALL}*sin(v)"], weight)


def great_circle():
    return Immersion.from_strings(["u"], S3, ["cos(u)", "0", "sin(u)"], "1")


def test_tension_examples():
    # geodesic great circle: tau = 0
    assert np.abs(tension(great_circle(), [0.4])).max() <= 1e-12
    # S^2(r) in flat space: |tau| = 2/r
    r = 0.7
    imm = Immersion.from_strings(
        ["u", "v"], FLAT3,
        [f"{r}*cos(v)*cos(u)", f"{r}*cos(v)*sin(u)", f"{r}*sin(v)"], "1")
    tau = tension(imm, [0.5, 0.3])
    assert np.linalg.norm(tau) == pytest.approx(2.0 / r, abs=1e-9)


def test_bitension_known_examples():
    # proper biharmonic small sphere
    assert np.linalg.norm(bitension_direct(small_sphere(), [0.7, 0.4])) <= 1e-6
    # minimal great sphere: everything zero
    great = Immersion.from_strings(
        ["u", "v"], S3, ["cos(v)*cos(u)", "cos(v)*sin(u)", "sin(v)"], "1")
    assert np.linalg.norm(tension(great, [0.7, 0.4])) <= 1e-10
    assert np.linalg.norm(bitension_direct(great, [0.7, 0.4])) <= 1e-10
    # unit sphere in flat space: residual norm 4
    flat_sphere = Immersion.from_strings(
        ["u", "v"], FLAT3, ["cos(v)*cos(u)", "cos(v)*sin(u)", "sin(v)"], "1")
    assert np.linalg.norm(bitension_direct(flat_sphere, [0.7, 0.4])) >= 0.1


def test_constant_weight_reductions():
    imm1 = small_sphere("1")
    imm3 = small_sphere("3")
    p = [0.7, 0.4]
    t2 = bitension_direct(imm1, p)
    fb = f_bitension_direct(imm3, p)
    assert np.abs(fb - 3.0 * t2).max() <= 1e-10
    # bi-f field is parallel to the bitension for constant weight
    nonminimal = Immersion.from_strings(
        ["u"], S3, ["0.5*cos(u)", "0.4*sin(u)", "0.2 + 0.1*sin(u)"], "2.5")
    base = Immersion.from_strings(
        ["u"], S3, ["0.5*cos(u)", "0.4*sin(u)", "0.2 + 0.1*sin(u)"], "1")
    p = [0.9]
    bf = bi_f_tension_direct(nonminimal, p)
    t2 = bitension_direct(base, p)
    # stable wedge norm: |a ^ b| = |a - proj_b a| |b|
    rej = bf - (np.dot(bf, t2) / np.dot(t2, t2)) * t2
    cross = np.linalg.norm(rej) * np.linalg.norm(t2)
    assert cross <= 1e-8 * (1 + np.linalg.norm(bf) * np.linalg.norm(t2))
    # and the ratio is -c^2
    assert np.abs(bf + 2.5**2 * t2).max() <= 1e-8


def test_f_constant_one_matches_bitension():
    imm = small_sphere("1")
    p = [0.3, 0.9]
    assert np.array_equal(
        f_bitension_direct(imm, p), f_bitension_direct(imm, p)
    )
    assert np.abs(
        f_bitension_direct(imm, p) - bitension_direct(imm, p)
    ).max() <= 1e-14


def test_abstract_ambient_rejected_for_direct():
    ab = make_space("abstract_gssf", n=1, f1="1", f2="0", f3="0")
    imm = Immersion.from_strings(["u"], ab, ["cos(u)", "sin(u)", "0"], "1")
    with pytest.raises(SpaceError):
        bitension_direct(imm, [0.1])
    with pytest.raises(SpaceError):
        theorem_residual(imm, [0.1], kind="fbh")


def test_term_breakdown_sums_to_residual():
    imm = Immersion.from_strings(
        ["u", "v"], S3D,
        ["(0.5 + 0.2*cos(v))*cos(u)", "(0.5 + 0.2*cos(v))*sin(u)",
         "0.2*sin(v) + 0.1"],
        "1 + 0.2*sin(u)*cos(v)")
    for kind in ("fbh", "bif"):
        rep = theorem_residual(imm, [0.4, 1.1], kind=kind, errata=True)
        normal = np.zeros(3)
        tangent = np.zeros(3)
        for name, part, coeff, contrib in rep.terms:
            if part == "normal":
                normal = normal + contrib
            else:
                tangent = tangent + contrib
        assert np.abs(normal - rep.normal).max() <= 1e-12
        assert np.abs(tangent - rep.tangent).max() <= 1e-12


MODE_CASES = [
    ("fbh", Immersion.from_strings(
        ["u"], S3D, ["0.5*cos(u)", "0.4*sin(u)", "0.2 + 0.1*sin(u)"],
        "1 + 0.3*cos(u)"), [[0.3], [1.7]]),
    ("bif", Immersion.from_strings(
        ["u"], S3D, ["0.5*cos(u)", "0.4*sin(u)", "0.2 + 0.1*sin(u)"],
        "1 + 0.3*cos(u)"), [[0.3], [1.7]]),
    ("fbh", Immersion.from_strings(
        ["u", "v"], C2,
        ["0.8*cos(u)", "0.8*sin(u)", "0.5*cos(v)", "0.5*sin(v)"],
        "1 + 0.25*sin(u)*cos(v)"), [[0.4, 1.3]]),
    ("bif", Immersion.from_strings(
        ["u", "v"], C2,
        ["0.8*cos(u)", "0.8*sin(u)", "0.5*cos(v)", "0.5*sin(v)"],
        "1 + 0.25*sin(u)*cos(v)"), [[0.4, 1.3]]),
]


@pytest.mark.parametrize("kind,imm,points", MODE_CASES)
def test_mode_agreement_with_errata(kind, imm, points):
    for p in points:
        out = compare_modes(imm, p, kind=kind, errata=True)
        assert out["delta_normal"] <= 1e-10
        assert out["delta_tangent"] <= 1e-10
        assert out["agree"]


def test_mode_disagreement_without_errata_is_itemized():
    imm = Immersion.from_strings(
        ["u"], S3D, ["0.5*cos(u)", "0.4*sin(u)", "0.2 + 0.1*sin(u)"],
        "1 + 0.3*cos(u)")
    out = compare_modes(imm, [0.3], kind="fbh", errata=False)
    assert not out["agree"]
    # every itemized term carries a catalogued correction
    catalogued = {e.term for e in ERRATA}
    for item in out["itemized_corrections"]:
        assert item["term"] in catalogued
    assert out["itemized_corrections"]


def test_errata_catalog_covers_all_corrected_terms():
    from bihkit.residuals import EQUATIONS

    catalogued = {e.term for e in ERRATA}
    for eq_id, builder in EQUATIONS.items():
        terms = builder() if eq_id != "bif_general" else builder("concrete")
        for term in terms:
            if term.corrected is not None:
                assert term.name in catalogued, (eq_id, term.name)


def test_gcsf_curvature_trace_identity():
    # tr R(., H). = -p a H + 3 b (jlH + klH), both sides independent
    fs = make_space("fubini_study", n=2, hol=4.0)
    imm = Immersion.from_strings(
        ["u", "v"], fs, ["0.3*cos(u)", "0.3*sin(u)", "0.2*cos(v)", "0.2*sin(v)"],
        "1")
    p = [0.4, 1.0]
    pc = PointCalculus(imm, p)
    ctx = ResidualContext(imm, p, calc=pc)
    lhs = curvature_trace(pc, ctx.H, backend="model")
    alpha, beta = ctx.coeffs
    rhs = -pc.m * alpha * ctx.H + 3.0 * beta * (ctx.jl_H + ctx.kl_H)
    assert np.abs(lhs - rhs).max() <= 1e-9
    # and the model trace agrees with the AD trace
    lhs_ad = curvature_trace(pc, ctx.H, backend="concrete")
    assert np.abs(lhs - lhs_ad).max() <= 1e-9


def test_gssf_curvature_trace_identity():
    imm = Immersion.from_strings(
        ["u", "v"], S3D,
        ["(0.5 + 0.2*cos(v))*cos(u)", "(0.5 + 0.2*cos(v))*sin(u)",
         "0.2*sin(v) + 0.1"], "1")
    p = [0.7, 0.9]
    pc = PointCalculus(imm, p)
    ctx = ResidualContext(imm, p, calc=pc)
    f1, f2, f3 = ctx.coeffs
    st = S3D.structure_at(pc.psi_val)
    xi = st["xi"]
    lhs = curvature_trace(pc, ctx.H, backend="model")
    rhs = (
        -pc.m * f1 * ctx.H
        + f2 * (ctx.tt.xi_tan_norm2 * ctx.H - ctx.tt.eta_h * ctx.tt.xi_tan
                + pc.m * ctx.tt.eta_h * xi)
        + 3.0 * f3 * (ctx.Ps_H + ctx.Ns_H)
    )
    assert np.abs(lhs - rhs).max() <= 1e-9
    assert np.abs(lhs - curvature_trace(pc, ctx.H, backend="concrete")).max() <= 1e-9


def test_gradf_curvature_trace_lemmas():
    # GCSF: tr R(., grad f). = -(n-1) a grad f + 3 b (j^2 + kj) grad f
    fs = make_space("fubini_study", n=2, hol=4.0)
    imm = Immersion.from_strings(
        ["u", "v"], fs, ["0.3*cos(u)", "0.3*sin(u)", "0.2*cos(v)", "0.2*sin(v)"],
        "1 + 0.2*sin(u)")
    p = [0.4, 1.0]
    pc = PointCalculus(imm, p)
    ctx = ResidualContext(imm, p, calc=pc)
    alpha, beta = ctx.coeffs
    lhs = curvature_trace(pc, ctx.grad_f, backend="model")
    rhs = -(pc.m - 1.0) * alpha * ctx.grad_f + 3.0 * beta * (
        ctx.j2_grad_f + ctx.kj_grad_f)
    assert np.abs(lhs - rhs).max() <= 1e-9

    # GSSF analogue with the corrected factor-3 phi-trace
    imm2 = Immersion.from_strings(
        ["u", "v"], S3D,
        ["(0.5 + 0.2*cos(v))*cos(u)", "(0.5 + 0.2*cos(v))*sin(u)",
         "0.2*sin(v) + 0.1"], "1 + 0.2*sin(u)")
    pc2 = PointCalculus(imm2, p)
    ctx2 = ResidualContext(imm2, p, calc=pc2)
    f1, f2, f3 = ctx2.coeffs
    st = S3D.structure_at(pc2.psi_val)
    lhs2 = curvature_trace(pc2, ctx2.grad_f, backend="model")
    rhs2 = (
        -(pc2.m - 1.0) * f1 * ctx2.grad_f
        + f2 * (ctx2.tt.xi_tan_norm2 * ctx2.grad_f
                - ctx2.eta_grad_f * ctx2.tt.xi_tan
                + (pc2.m - 1.0) * ctx2.eta_grad_f * st["xi"])
        + 3.0 * f3 * (ctx2.P2_grad_f + ctx2.NP_grad_f)
    )
    assert np.abs(lhs2 - rhs2).max() <= 1e-9


def test_bif_general_matches_direct():
    imm = Immersion.from_strings(
        ["u", "v"], C2,
        ["0.8*cos(u)", "0.8*sin(u)", "0.5*cos(v)", "0.5*sin(v)"],
        "1 + 0.25*sin(u)*cos(v)")
    p = [0.4, 1.3]
    pc = PointCalculus(imm, p)
    rep = theorem_residual(imm, p, kind="bif_general", errata=True, calc=pc)
    direct = bi_f_tension_direct(imm, p, calc=pc)
    P_tan, P_nor = pc.projectors
    assert np.abs(rep.normal - P_nor @ direct).max() <= 1e-10
    assert np.abs(rep.tangent - P_tan @ direct).max() <= 1e-10


def _reduction_delta(imm, p, name, errata=True):
    cor = COROLLARIES[name]
    kind = "fbh" if cor.equation.startswith("fbh") else "bif"
    rep_parent = theorem_residual(imm, p, kind=kind, errata=errata)
    rep_cor = theorem_residual(imm, p, kind=kind, errata=errata, corollary=name)
    return max(
        np.abs(rep_parent.normal - rep_cor.normal).max(),
        np.abs(rep_parent.tangent - rep_cor.tangent).max(),
    ) / rep_parent.scale


def test_sample_corollary_reductions():
    lag = Immersion.from_strings(
        ["u", "v"], C2,
        ["0.8*cos(u)", "0.8*sin(u)", "0.5*cos(v)", "0.5*sin(v)"],
        "1 + 0.25*sin(u)*cos(v)")
    assert _reduction_delta(lag, [0.4, 1.3], "fbh_gcsf_lagrangian") <= 1e-10
    assert _reduction_delta(lag, [0.4, 1.3], "fbh_gcsf_lagrangian_parallel") <= 1e-10
    assert _reduction_delta(lag, [0.4, 1.3], "bif_gcsf_lagrangian_parallel") <= 1e-10

    hopf = Immersion.from_strings(
        ["u", "v"], S3,
        ["0.6*cos(u)/(1 + 0.8*sin(v))", "0.6*sin(u)/(1 + 0.8*sin(v))",
         "0.8*cos(v)/(1 + 0.8*sin(v))"],
        "1 + 0.2*cos(u)")
    for name in ("fbh_gssf_anti_invariant", "fbh_gssf_xi_tangent",
                 "fbh_gssf_hypersurface", "bif_gssf_hypersurface"):
        assert _reduction_delta(hopf, [0.5, 1.1], name) <= 1e-10


def test_corollary_requires_verified_flags_documented():
    # every registered corollary names only known flags
    from bihkit.calculus import FLAG_NAMES

    for cor in COROLLARIES.values():
        for f in cor.flags:
            assert f in FLAG_NAMES
