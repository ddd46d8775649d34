import numpy as np
import pytest

from bihkit.calculus import (
    CalcError,
    FlagError,
    Immersion,
    PointCalculus,
    decomposition_operators_at,
    flag_deviation,
    fundamental_data_at,
    intrinsic_calculus_at,
    normal_derivative,
    normal_laplacian,
    trace_terms_at,
    verify_flags,
)
from bihkit.spaces import SpaceError, make_space

FLAT3 = make_space("cosymplectic_flat", n=1)
C2 = make_space("euclidean_complex", n=2)
S3 = make_space("sasakian_sphere", n=1, ctilde=1.0)

RNG = np.random.default_rng(5)


def sphere_immersion(r=1.0, ambient=FLAT3, weight="1"):
    return Immersion.from_strings(
        ["u", "v"], ambient,
        [f"{r}*cos(v)*cos(u)", f"{r}*cos(v)*sin(u)", f"{r}*sin(v)"], weight)


def test_plane_is_totally_geodesic():
    plane = Immersion.from_strings(["u", "v"], FLAT3, ["u", "v", "0"], "1")
    fd = fundamental_data_at(plane, [0.3, -0.7])
    assert np.abs(fd.second_fundamental).max() == 0.0
    assert np.abs(fd.mean_curvature).max() == 0.0


def test_round_sphere_closed_forms():
    r = 0.8
    imm = sphere_immersion(r)
    for p in ([0.5, 0.3], [2.0, -0.6]):
        fd = fundamental_data_at(imm, p)
        tt = trace_terms_at(imm, p)
        assert np.sqrt(tt.h_norm2) == pytest.approx(1.0 / r, abs=1e-9)
        assert tt.b_norm2 == pytest.approx(2.0 / r**2, abs=1e-9)
        assert tt.scal == pytest.approx(2.0 / r**2, abs=1e-8)
        # umbilic shape operator: A = (1/r) Id up to sign
        A = fd.shape_operators[0]
        assert np.abs(np.abs(A) - np.eye(2) / r).max() <= 1e-9


def test_frames_and_duality():
    imm = sphere_immersion(0.8, weight="1 + 0.2*sin(u)*cos(v)")
    p = [0.7, 0.4]
    fd = fundamental_data_at(imm, p)
    G = fd.ambient_metric
    E, N = fd.tangent_frame, fd.normal_frame
    assert np.abs(E @ G @ E.T - np.eye(2)).max() <= 1e-10
    assert np.abs(N @ G @ N.T - np.eye(1)).max() <= 1e-10
    assert np.abs(E @ G @ N.T).max() <= 1e-10
    B = fd.second_fundamental
    assert np.abs(B - B.transpose(1, 0, 2)).max() <= 1e-9
    # H = tr B / m in coordinates
    assert np.abs(
        fd.mean_curvature
        - np.einsum("ab,abk->k", fd.metric_inv, B) / 2.0
    ).max() <= 1e-12
    # Weingarten duality g(A_nu X, Y) = g(B(X,Y), nu)
    got = np.einsum("ijk,kl,l->ij", fd.B_frame, G, N[0])
    assert np.abs(got - fd.shape_operators[0]).max() <= 1e-9
    # B is normal-valued
    assert np.abs(np.einsum("abk,kl,il->abi", B, G, E)).max() <= 1e-9


def test_clifford_torus_minimal_in_s3():
    r = 1.0 / np.sqrt(2.0)
    imm = Immersion.from_strings(
        ["u", "v"], S3,
        [f"{r}*cos(u)/(1 + {r}*sin(v))",
         f"{r}*sin(u)/(1 + {r}*sin(v))",
         f"{r}*cos(v)/(1 + {r}*sin(v))"],
        "1")
    for p in ([0.3, 1.2], [2.1, 0.4]):
        tt = trace_terms_at(imm, p)
        assert np.sqrt(tt.h_norm2) <= 1e-9


def test_rank_deficiency_raises():
    bad = Immersion.from_strings(["u", "v"], FLAT3, ["u", "u", "0"], "1")
    with pytest.raises(CalcError):
        fundamental_data_at(bad, [0.1, 0.2])


def test_abstract_ambient_rejected():
    ab = make_space("abstract_gcsf", alpha="1", beta="1")
    imm = Immersion.from_strings(["u"], ab, ["cos(u)", "sin(u)", "0", "0"], "1")
    with pytest.raises(SpaceError):
        PointCalculus(imm, [0.1])


def test_lagrangian_operators_vanish():
    imm = Immersion.from_strings(
        ["u", "v"], C2,
        ["0.8*cos(u)", "0.8*sin(u)", "0.5*cos(v)", "0.5*sin(v)"], "1")
    tt_m, tn, nt, nn = decomposition_operators_at(imm, [0.4, 1.3])
    assert np.abs(tt_m).max() <= 1e-10  # j = 0
    assert np.abs(nn).max() <= 1e-10    # m = 0


def test_complex_curve_operators_vanish():
    imm = Immersion.from_strings(
        ["u", "v"], C2, ["u", "v", "u^2 - v^2", "2*u*v"], "1")
    tt_m, tn, nt, nn = decomposition_operators_at(imm, [0.3, -0.2])
    assert np.abs(tn).max() <= 1e-10    # k = 0
    assert np.abs(nt).max() <= 1e-10    # l = 0


def test_hypersurface_hermitian_facts():
    # m = 0 and klH = -H for hypersurfaces of Hermitian ambients
    imm = Immersion.from_strings(
        ["u", "v", "w"], C2,
        ["0.9*cos(v)*cos(u)", "0.9*cos(v)*sin(u)",
         "0.9*sin(v)*cos(w)", "0.9*sin(v)*sin(w)"], "1")
    p = [0.5, 0.7, 1.0]
    pc = PointCalculus(imm, p)
    tt_m, tn, nt, nn = decomposition_operators_at(imm, p, calc=pc)
    assert np.abs(nn).max() <= 1e-10
    from bihkit.residuals import ResidualContext

    ctx = ResidualContext(imm, p, calc=pc)
    assert np.abs(ctx.kl_H + ctx.H).max() <= 1e-9
    assert np.abs(ctx.jl_H).max() <= 1e-9


def test_trace_terms_minimal_and_constant_weight():
    great = Immersion.from_strings(
        ["u", "v"], S3, ["cos(v)*cos(u)", "cos(v)*sin(u)", "sin(v)"], "1")
    tt = trace_terms_at(great, [0.4, 0.2])
    assert np.abs(tt.tb_ah).max() <= 1e-10
    assert np.abs(tt.a_h_grad_f).max() <= 1e-12
    assert np.abs(tt.grad_f).max() == 0.0
    assert tt.delta_f_pos == 0.0
    assert np.abs(tt.grad_delta_f_pos).max() == 0.0
    assert np.abs(tt.b_gradf_gradf).max() == 0.0


def test_hypersurface_tb_identity():
    # tr B(., A_H .) = |B|^2 H for hypersurfaces
    imm = sphere_immersion(0.8)
    imm2 = Immersion.from_strings(
        ["u", "v"], FLAT3,
        ["(1 + 0.3*cos(v))*cos(u)", "(1 + 0.3*cos(v))*sin(u)", "0.3*sin(v)"],
        "1")
    for im, p in ((imm, [0.5, 0.3]), (imm2, [0.7, 1.1])):
        tt = trace_terms_at(im, p)
        pc = PointCalculus(im, p)
        assert np.abs(tt.tb_ah - tt.b_norm2 * pc.H_val).max() <= 1e-8


def test_intrinsic_scal_unit_sphere():
    imm = sphere_immersion(1.0)
    out = intrinsic_calculus_at(imm, [0.7, 0.5])
    assert out["scal"] == pytest.approx(2.0, abs=1e-8)


def test_normal_derivative_splits():
    plane = Immersion.from_strings(["u", "v"], FLAT3, ["u", "v", "0"], "1")
    for nor, tan in normal_derivative(plane, [0.2, 0.4]):
        assert np.abs(nor).max() <= 1e-12 and np.abs(tan).max() <= 1e-12
    # round sphere: H is parallel, tangential part is -A_H
    imm = sphere_immersion(0.8)
    p = [0.6, 0.2]
    fd = fundamental_data_at(imm, p)
    for al, (nor, tan) in enumerate(normal_derivative(imm, p)):
        assert np.abs(nor).max() <= 1e-9
        # duality: g(A_H d_al, d_be) = g(B(d_al, d_be), H)
    tt = trace_terms_at(imm, p)
    assert np.abs(tt.nabla_perp_h).max() <= 1e-9


def test_normal_laplacian_parallel_field_and_bochner():
    imm = sphere_immersion(0.9)
    lap = normal_laplacian(imm, [0.4, 0.8])
    assert np.abs(lap).max() <= 1e-9

    # Bochner: (1/2) Delta |H|^2 = <Delta-perp H, H> - |nabla-perp H|^2
    bumpy = Immersion.from_strings(
        ["u", "v"], FLAT3,
        ["(1 + 0.25*cos(v))*cos(u)", "(1 + 0.25*cos(v))*sin(u)",
         "0.25*sin(v) + 0.05*sin(u)"],
        "1")
    for p in ([0.5, 1.0], [2.2, 0.3]):
        pc = PointCalculus(bumpy, p)
        tt = trace_terms_at(bumpy, p, calc=pc)
        h2_field = None
        ord2 = pc.order - 2
        for a in range(pc.d):
            for b in range(pc.d):
                term = pc.G_field[a][b].truncate(ord2) * pc.H_field[a] * pc.H_field[b]
                h2_field = term if h2_field is None else h2_field + term
        lap_h2 = pc.laplacian_pos_field(h2_field).value
        lhs = 0.5 * lap_h2
        rhs = float(tt.delta_perp_h_pos @ pc.G_val @ pc.H_val) - tt.nabla_perp_h_norm2
        assert abs(lhs - rhs) <= 1e-6 * (1.0 + abs(lhs))


def test_small_sphere_normal_laplacian_zero():
    r0 = np.sqrt(2.0) - 1.0
    imm = Immersion.from_strings(
        ["u", "v"], S3,
        [f"{r0}*cos(v)*cos(u)", f"{r0}*cos(v)*sin(u)", f"{r0}*sin(v)"], "1")
    lap = normal_laplacian(imm, [0.7, 0.4])
    assert np.abs(lap).max() <= 1e-9


def test_cauchy_schwarz_shape_bound():
    scenarios = [
        sphere_immersion(0.8),
        Immersion.from_strings(
            ["u", "v"], C2,
            ["0.8*cos(u)", "0.8*sin(u)", "0.5*cos(v)", "0.5*sin(v)"], "1"),
    ]
    for imm in scenarios:
        for _ in range(5):
            p = RNG.uniform(0.1, 1.2, size=2)
            tt = trace_terms_at(imm, p)
            m = imm.param_dim
            assert tt.a_h_norm2 >= m * tt.h_norm2**2 - 1e-10


def test_frame_remix_invariance():
    """Scalars assembled from frames match the coordinate-form trace terms
    under random orthonormal re-mixing of both frames."""
    imm = Immersion.from_strings(
        ["u", "v"], C2,
        ["0.9*cos(u)", "0.9*sin(u)", "0.55*cos(v) + 0.1*cos(u)", "0.55*sin(v)"],
        "1 + 0.2*sin(u)")
    p = [0.8, 1.7]
    pc = PointCalculus(imm, p)
    fd = fundamental_data_at(imm, p, calc=pc)
    tt = trace_terms_at(imm, p, calc=pc)
    G = fd.ambient_metric
    rng = np.random.default_rng(17)
    for _ in range(4):
        Qt, _ = np.linalg.qr(rng.normal(size=(2, 2)))
        Qn, _ = np.linalg.qr(rng.normal(size=(2, 2)))
        E = Qt @ fd.tangent_frame
        Nf = Qn @ fd.normal_frame
        B = np.einsum("ia,jb,abk->ijk", Qt, Qt, fd.B_frame)
        H = np.einsum("ab,abk->k", np.eye(2), B) / 2.0
        b_norm2 = float(np.einsum("ijk,kl,ijl->", B, G, B))
        BH = np.einsum("ijk,kl,l->ij", B, G, H)
        a_h_norm2 = float(np.einsum("ij,ij->", BH, BH))
        tb = np.einsum("ij,ijk->k", BH, B)
        assert abs(b_norm2 - tt.b_norm2) <= 1e-8 * (1 + abs(tt.b_norm2))
        assert abs(a_h_norm2 - tt.a_h_norm2) <= 1e-8 * (1 + abs(tt.a_h_norm2))
        assert np.abs(tb - tt.tb_ah).max() <= 1e-8 * (1 + np.abs(tt.tb_ah).max())
        assert np.abs(H - fd.mean_curvature).max() <= 1e-10


def test_hypersurface_xi_tangent_normal_line_facts():
    # Ps = 0 and Ns = -Id on the normal line of a Hopf torus
    imm = Immersion.from_strings(
        ["u", "v"], S3,
        ["0.6*cos(u)/(1 + 0.8*sin(v))", "0.6*sin(u)/(1 + 0.8*sin(v))",
         "0.8*cos(v)/(1 + 0.8*sin(v))"],
        "1")
    p = [0.5, 1.1]
    pc = PointCalculus(imm, p)
    fd = fundamental_data_at(imm, p, calc=pc)
    st = S3.structure_at(pc.psi_val)
    phi = st["phi"]
    P_tan, P_nor = pc.projectors
    nu = fd.normal_frame[0]
    s_nu = P_tan @ (phi @ nu)
    Ps = P_tan @ (phi @ s_nu)
    Ns = P_nor @ (phi @ s_nu)
    assert np.abs(Ps).max() <= 1e-9
    assert np.abs(Ns + nu).max() <= 1e-9


def test_flag_verification_and_denial():
    imm = Immersion.from_strings(
        ["u", "v"], C2,
        ["0.8*cos(u)", "0.8*sin(u)", "0.5*cos(v)", "0.5*sin(v)"], "1",
        flags={"lagrangian": "asserted", "complex": "denied"})
    pts = [[0.3, 0.4], [1.5, 2.0]]
    report = verify_flags(imm, pts)
    assert report["lagrangian"] <= 1e-10
    assert report["complex"] > 1e-2

    bad = Immersion.from_strings(
        ["u", "v"], C2,
        ["0.8*cos(u)", "0.8*sin(u)", "0.5*cos(v)", "0.5*sin(v)"], "1",
        flags={"complex": "asserted"})
    with pytest.raises(FlagError):
        verify_flags(bad, pts)

    denied_wrong = Immersion.from_strings(
        ["u", "v"], C2,
        ["0.8*cos(u)", "0.8*sin(u)", "0.5*cos(v)", "0.5*sin(v)"], "1",
        flags={"lagrangian": "denied"})
    with pytest.raises(FlagError):
        verify_flags(denied_wrong, pts)


def test_structural_flags():
    curve = Immersion.from_strings(["u"], FLAT3, ["cos(u)", "sin(u)", "0"], "1")
    assert flag_deviation(curve, [[0.1]], "curve") == 0.0
    assert flag_deviation(curve, [[0.1]], "hypersurface") == float("inf")


def test_weight_positivity_not_enforced_here():
    # evaluation works even where f < 0; scenario validation owns the check
    imm = Immersion.from_strings(["u"], FLAT3, ["cos(u)", "sin(u)", "0"],
                                 "cos(u)")
    pc = PointCalculus(imm, [3.0])
    assert pc.f_jet.value < 0
