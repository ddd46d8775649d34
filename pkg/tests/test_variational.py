import numpy as np
import pytest

from bihkit.calculus import Immersion
from bihkit.residuals import tension
from bihkit.spaces import ChartError, make_space
from bihkit.variational import (
    ENERGIES,
    VARIATION_PAIRING,
    QuadratureGrid,
    el_field,
    energy,
    first_variation_check,
    first_variation_suite,
)

TAU = 2.0 * np.pi
FLAT3 = make_space("cosymplectic_flat", n=1)
S3 = make_space("sasakian_sphere", n=1, ctilde=1.0)


def circle(weight="1"):
    return Immersion.from_strings(["u"], FLAT3, ["cos(u)", "sin(u)", "0"], weight)


def test_circle_energy_closed_forms():
    grid = QuadratureGrid([(0.0, TAU, 24, True)])
    imm = circle()
    E, nodes = energy(imm, grid, "E")
    assert E == pytest.approx(np.pi, abs=1e-12)
    E2, _ = energy(imm, grid, "E2", node_cache=nodes)
    assert E2 == pytest.approx(np.pi, abs=1e-12)
    EF, _ = energy(circle("2"), grid, "EF")
    assert EF == pytest.approx(2.0 * np.pi, abs=1e-12)
    with pytest.raises(ValueError):
        energy(imm, grid, "E3")


def test_quadrature_grid_shapes():
    g = QuadratureGrid([(0.0, TAU, 8, True), (-1.0, 1.0, 5, False)])
    assert len(g) == 40
    assert np.all(g.weights > 0.0)
    # periodic axis: equispaced, open axis: interior Gauss nodes
    assert g.points[:, 1].min() > -1.0 and g.points[:, 1].max() < 1.0
    with pytest.raises(ValueError):
        QuadratureGrid([(0.0, 1.0, 1, False)])


def test_quadrature_convergence_doubling():
    imm = Immersion.from_strings(
        ["u"], S3, ["0.5*cos(u)", "0.4*sin(u)", "0.2 + 0.1*sin(u)"],
        "1 + 0.2*cos(u)")
    vals = {}
    for n in (32, 64):
        grid = QuadratureGrid([(0.0, TAU, n, True)])
        nodes = None
        for which in ENERGIES:
            v, nodes = energy(imm, grid, which, node_cache=nodes)
            vals.setdefault(which, []).append(v)
    for which, (a, b) in vals.items():
        assert abs(a - b) <= 1e-9 * (1.0 + abs(b)), which


def test_zero_variation_gives_zero():
    imm = circle("1 + 0.3*cos(u)")
    grid = QuadratureGrid([(0.0, TAU, 16, True)])
    fv = first_variation_check(imm, grid, "E2F", ["0", "0", "0"])
    assert fv["rhs"] == 0.0
    assert max(abs(v) for v in fv["lhs"]) <= 1e-12


def test_sign_coherence_tension_from_energy():
    """The field recovered variationally from E is the tension field with
    its sign (pairing constant +1)."""
    imm = circle()
    assert VARIATION_PAIRING["E"] == 1.0
    el = el_field(imm, [0.3], "E")
    assert np.abs(el - tension(imm, [0.3])).max() == 0.0
    grid = QuadratureGrid([(0.0, TAU, 24, True)])
    fv = first_variation_check(imm, grid, "E", ["cos(u)", "sin(u)", "0"])
    # expanding circle with frozen metric: dE/dt = 2 pi, pairing agrees
    assert fv["rhs"] == pytest.approx(2.0 * np.pi, abs=1e-10)
    assert min(fv["deltas"]) <= 1e-10


def test_all_functionals_anchor_flat():
    imm = circle("1 + 0.3*cos(u)")
    grid = QuadratureGrid([(0.0, TAU, 24, True)])
    V = ["0.3*cos(2*u)", "-0.2*sin(u)", "0.1*cos(u)"]
    out = first_variation_suite(imm, grid, list(ENERGIES), V)
    for which, fv in out.items():
        assert min(fv["deltas"]) <= 1e-10, which


def test_all_functionals_anchor_curved_with_decay():
    imm = Immersion.from_strings(
        ["u"], S3, ["0.5*cos(u)", "0.4*sin(u)", "0.2 + 0.1*sin(u)"],
        "1 + 0.2*cos(u)")
    grid = QuadratureGrid([(0.0, TAU, 32, True)])
    V = ["0.3*cos(2*u)", "-0.2*sin(u)", "0.1*cos(u)"]
    out = first_variation_suite(imm, grid, list(ENERGIES), V)
    for which, fv in out.items():
        scale = 1.0 + abs(fv["rhs"])
        plateau = min(fv["deltas"])
        assert plateau <= 1e-5 * scale, (which, fv["deltas"])
        # observed O(h^2): the first step dominates the second by ~100x
        if fv["deltas"][0] > 100 * plateau and fv["deltas"][0] > 1e-12:
            assert fv["deltas"][1] <= fv["deltas"][0] / 20.0, (which, fv["deltas"])


def test_open_axis_variation_with_window():
    r0 = np.sqrt(2.0) - 1.0
    imm = Immersion.from_strings(
        ["u", "v"], S3,
        [f"{r0}*cos(v)*cos(u)", f"{r0}*cos(v)*sin(u)", f"{r0}*sin(v)"], "1")
    grid = QuadratureGrid([(0.0, TAU, 12, True), (-1.2, 1.2, 10, False)])
    win = "((v) - (-1.2))*((1.2) - (v))"
    V = [f"0.1*sin(u)*{win}", f"0.05*cos(v)*{win}", f"0.08*cos(u)*{win}"]
    fv = first_variation_check(imm, grid, "E2", V, steps=(1e-2, 1e-3))
    scale = 1.0 + abs(fv["rhs"])
    assert min(fv["deltas"]) <= 1e-5 * scale


def test_variation_chart_exit_detected():
    ch = make_space("complex_hyperbolic", n=1, hol=-4.0)
    imm = Immersion.from_strings(
        ["u"], ch, ["0.5*cos(u)", "0.5*sin(u)"], "1")
    grid = QuadratureGrid([(0.0, TAU, 8, True)])
    with pytest.raises(ChartError):
        first_variation_check(imm, grid, "E", ["100*cos(u)", "100*sin(u)"],
                              steps=(1e-2,))


def test_el_field_pairing_table():
    assert VARIATION_PAIRING == {
        "E": 1.0, "EF": 1.0, "E2": -1.0, "E2F": -1.0, "EF2": 2.0
    }
