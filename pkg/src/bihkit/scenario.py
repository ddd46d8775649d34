"""Scenario files: a sectioned key-value format, parsing and validation.

Grammar (one logical statement per line; `#` starts a comment):

    [section]
    key = value
    value  := scalar | '[' scalar (',' scalar)* ']'
    scalar := number | true | false | bareword | "quoted string"

Sections and keys:

    [ambient]     kind = sasakian_sphere | fubini_study | ... plus the
                  kind's parameters (n, hol, ctilde, alpha, beta, f1.. as
                  quoted expressions for the abstract kinds)
    [immersion]   params = [u, v]; one axis per parameter:
                  u = [lo, hi, periodic|open]; map = ["expr", ...]
    [weight]      f = "expr"       (defaults to 1)
    [flags]       name = asserted | denied   (unlisted flags are unknown)
    [sampling]    grid = [n1, ...]; margin = 0.05; seed = 7
    [tolerances]  mode_agreement, flags, identity, reduction (optional)
    [mode]        residual = both|direct|theorem; errata = on|off;
                  corollary = name; backend = concrete|model
    [variation]   components = ["expr", ...]   (optional; the CLI builds a
                  windowed default otherwise)

Validation parses every expression, enforces grid >= 4 nodes per axis,
checks periodic axes close up (endpoint values of the map agree), checks
rank/weight-positivity/chart membership at the sample points and runs the
numeric pre-check of every asserted or denied flag.  Errors carry section,
key and the byte offset of the offending line.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .calculus import FLAG_NAMES, FlagError, Immersion, PointCalculus, verify_flags
from .expr import ParseError, parse
from .spaces import ChartError, SpaceError, make_space
from .variational import QuadratureGrid

__all__ = ["Scenario", "ScenarioError", "load_scenario", "parse_scenario_text"]


class ScenarioError(ValueError):
    def __init__(self, message, section=None, key=None, offset=None):
        loc = []
        if section is not None:
            loc.append(f"section [{section}]")
        if key is not None:
            loc.append(f"key {key!r}")
        if offset is not None:
            loc.append(f"offset {offset}")
        suffix = f" ({', '.join(loc)})" if loc else ""
        super().__init__(message + suffix)
        self.section = section
        self.key = key
        self.offset = offset


def _parse_scalar(text, section, key, offset):
    text = text.strip()
    if not text:
        raise ScenarioError("empty value", section, key, offset)
    if text == "true":
        return True
    if text == "false":
        return False
    if text.startswith('"'):
        if not (len(text) >= 2 and text.endswith('"')):
            raise ScenarioError("unterminated string", section, key, offset)
        return text[1:-1]
    try:
        return float(text) if any(c in text for c in ".eE") or "inf" in text else int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if all(c.isalnum() or c == "_" for c in text):
        return text
    raise ScenarioError(f"malformed scalar {text!r}", section, key, offset)


def _split_array(body, section, key, offset):
    # split on commas not inside quotes
    items, depth, cur = [], False, []
    for ch in body:
        if ch == '"':
            depth = not depth
            cur.append(ch)
        elif ch == "," and not depth:
            items.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur or items:
        items.append("".join(cur))
    return [_parse_scalar(item, section, key, offset) for item in items]


def parse_scenario_text(text):
    """Raw parse into {section: {key: value}} with strict errors."""
    sections = {}
    current = None
    offset = 0
    for line in text.splitlines(keepends=True):
        stripped = line.split("#", 1)[0].strip()
        line_offset = offset
        offset += len(line)
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ScenarioError("malformed section header", offset=line_offset)
            name = stripped[1:-1].strip()
            if not name:
                raise ScenarioError("empty section name", offset=line_offset)
            if name in sections:
                raise ScenarioError(f"duplicate section [{name}]", offset=line_offset)
            sections[name] = {}
            current = name
            continue
        if current is None:
            raise ScenarioError("statement outside any section", offset=line_offset)
        if "=" not in stripped:
            raise ScenarioError("expected key = value", current, offset=line_offset)
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not all(c.isalnum() or c == "_" for c in key):
            raise ScenarioError(f"malformed key {key!r}", current, offset=line_offset)
        if key in sections[current]:
            raise ScenarioError(f"duplicate key {key!r}", current, key, line_offset)
        if value.startswith("["):
            if not value.endswith("]"):
                raise ScenarioError("unterminated array", current, key, line_offset)
            sections[current][key] = _split_array(value[1:-1], current, key, line_offset)
        else:
            sections[current][key] = _parse_scalar(value, current, key, line_offset)
    return sections


@dataclass
class AxisSpec:
    name: str
    lo: float
    hi: float
    periodic: bool


@dataclass
class Scenario:
    """Validated scenario: ambient, immersion, sampling and mode options."""

    path: str
    digest: str
    ambient_kind: str
    immersion: Immersion
    axes: list
    grid_sizes: list
    margin: float
    seed: int
    tolerances: dict = field(default_factory=dict)
    mode: dict = field(default_factory=dict)
    variation: list = None
    flag_report: dict = field(default_factory=dict)

    def sample_points(self, factor=1):
        """Deterministic residual-evaluation grid (margin-shaved)."""
        axes_nodes = []
        for ax, n in zip(self.axes, self.grid_sizes):
            count = int(n * factor)
            if ax.periodic:
                h = (ax.hi - ax.lo) / count
                axes_nodes.append(ax.lo + h * np.arange(count))
            else:
                lo = ax.lo + self.margin * (ax.hi - ax.lo)
                hi = ax.hi - self.margin * (ax.hi - ax.lo)
                axes_nodes.append(np.linspace(lo, hi, count))
        mesh = np.meshgrid(*axes_nodes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def quadrature(self, factor=1):
        return QuadratureGrid(
            [(ax.lo, ax.hi, int(n * factor), ax.periodic)
             for ax, n in zip(self.axes, self.grid_sizes)]
        )

    def tolerance(self, name, default):
        return float(self.tolerances.get(name, default))

    def default_variation(self):
        """Windowed smooth variation: periodic waves, endpoint-vanishing
        windows on open axes."""
        if self.variation:
            return self.variation
        window = []
        for ax in self.axes:
            if not ax.periodic:
                window.append(f"(({ax.name}) - ({ax.lo!r}))*(({ax.hi!r}) - ({ax.name}))")
        out = []
        d = self.immersion.ambient.chart_dim
        for a in range(d):
            wave = " + ".join(
                f"sin({k + a + 1}*{ax.name} + {0.37 * (a + 1):.2f})"
                for k, ax in enumerate(self.axes)
            )
            comp = f"0.1*({wave})"
            for w in window:
                comp = f"{comp}*{w}"
            out.append(comp)
        return out


_AMBIENT_KEYS = {
    "euclidean_complex": ("n",),
    "fubini_study": ("n", "hol"),
    "complex_hyperbolic": ("n", "hol"),
    "sasakian_sphere": ("n", "ctilde"),
    "cosymplectic_flat": ("n",),
    "kenmotsu_hyperbolic": ("n",),
    "abstract_gcsf": ("alpha", "beta", "dim"),
    "abstract_gssf": ("n", "f1", "f2", "f3"),
}

_DEFAULTS = {"hol": 4.0, "ctilde": 1.0, "dim": 4}


def _build_ambient(amb, prefix_error):
    kind = amb.get("kind")
    if kind not in _AMBIENT_KEYS:
        prefix_error(f"unknown or missing ambient kind {kind!r}", "ambient", "kind")
    kwargs = {}
    for key in _AMBIENT_KEYS[kind]:
        if key in amb:
            kwargs[key] = amb[key]
        elif key in _DEFAULTS:
            kwargs[key] = _DEFAULTS[key]
        elif key == "n":
            prefix_error("ambient needs the complex/contact rank n", "ambient", "n")
        else:
            prefix_error(f"ambient kind {kind!r} needs key {key!r}", "ambient", key)
    extra = set(amb) - set(_AMBIENT_KEYS[kind]) - {"kind"}
    if extra:
        prefix_error(f"unknown ambient keys {sorted(extra)}", "ambient", sorted(extra)[0])
    try:
        return make_space(kind, **kwargs)
    except (SpaceError, ParseError) as exc:
        prefix_error(f"ambient construction failed: {exc}", "ambient", "kind")


def parse_scenario(text, path="<memory>", validate=True):
    raw = parse_scenario_text(text)

    def fail(message, section=None, key=None):
        raise ScenarioError(message, section, key)

    for required in ("ambient", "immersion"):
        if required not in raw:
            fail(f"missing [{required}] section", required)

    space = _build_ambient(raw["ambient"], lambda m, s, k: fail(m, s, k))

    imm_block = raw["immersion"]
    params = imm_block.get("params")
    if not isinstance(params, list) or not params or not all(
        isinstance(p, str) for p in params
    ):
        fail("params must be a list of names", "immersion", "params")
    axes = []
    for name in params:
        spec = imm_block.get(name)
        if (
            not isinstance(spec, list)
            or len(spec) != 3
            or not all(isinstance(v, (int, float)) for v in spec[:2])
            or spec[2] not in ("periodic", "open")
        ):
            fail(f"axis {name!r} must be [lo, hi, periodic|open]", "immersion", name)
        lo, hi = float(spec[0]), float(spec[1])
        if not hi > lo:
            fail(f"axis {name!r} needs hi > lo", "immersion", name)
        axes.append(AxisSpec(name, lo, hi, spec[2] == "periodic"))
    comp = imm_block.get("map")
    if not isinstance(comp, list) or not all(isinstance(cstr, str) for cstr in comp):
        fail("map must be a list of component expressions", "immersion", "map")

    weight = raw.get("weight", {}).get("f", "1")
    flags = {}
    for name, state in raw.get("flags", {}).items():
        if name not in FLAG_NAMES:
            fail(f"unknown flag {name!r}", "flags", name)
        if state not in ("asserted", "denied", "unknown"):
            fail(f"flag state must be asserted|denied|unknown", "flags", name)
        flags[name] = state

    try:
        immersion = Immersion.from_strings(params, space, comp, weight, flags)
    except (ParseError, ValueError) as exc:
        fail(f"immersion construction failed: {exc}", "immersion", "map")

    sampling = raw.get("sampling", {})
    grid_sizes = sampling.get("grid", [8] * len(params))
    if not isinstance(grid_sizes, list) or len(grid_sizes) != len(params):
        fail("grid must list one node count per parameter", "sampling", "grid")
    if any(int(g) < 4 for g in grid_sizes):
        fail("grid needs at least 4 nodes per axis", "sampling", "grid")
    grid_sizes = [int(g) for g in grid_sizes]
    margin = float(sampling.get("margin", 0.05))
    if not 0.0 <= margin < 0.5:
        fail("margin must lie in [0, 0.5)", "sampling", "margin")
    seed = int(sampling.get("seed", 0))

    tolerances = {k: float(v) for k, v in raw.get("tolerances", {}).items()}
    mode = dict(raw.get("mode", {}))
    variation = raw.get("variation", {}).get("components")

    digest = hashlib.sha256(text.encode()).hexdigest()
    scenario = Scenario(
        path=path,
        digest=digest,
        ambient_kind=space.kind,
        immersion=immersion,
        axes=axes,
        grid_sizes=grid_sizes,
        margin=margin,
        seed=seed,
        tolerances=tolerances,
        mode=mode,
        variation=variation,
    )
    if validate:
        _validate(scenario)
    return scenario


def _validate(sc):
    imm = sc.immersion
    if not imm.ambient.has_metric:
        # curvature-model-only ambient: nothing metric-dependent to verify;
        # commands other than the curvature-trace audit reject the scenario
        return sc
    points = sc.sample_points()
    flag_tol = sc.tolerance("flags", 1e-8)
    # rank, chart membership, weight positivity at every sample point
    calcs = []
    for p in points:
        try:
            pc = PointCalculus(imm, p)
            pc.gram_det
        except (ChartError, SpaceError, ValueError) as exc:
            raise ScenarioError(f"sample point {list(p)} rejected: {exc}",
                                "sampling", "grid") from None
        if pc.f_jet.value <= 0.0:
            raise ScenarioError(
                f"weight not positive at {list(p)} (f = {pc.f_jet.value:.3e})",
                "weight", "f")
        calcs.append(pc)
    # periodic axes must close up
    probe = points[0]
    for i, ax in enumerate(sc.axes):
        if not ax.periodic:
            continue
        lo_pt, hi_pt = probe.copy(), probe.copy()
        lo_pt[i], hi_pt[i] = ax.lo, ax.hi
        a = PointCalculus(imm, lo_pt, order=0).psi_val
        b = PointCalculus(imm, hi_pt, order=0).psi_val
        if float(np.max(np.abs(a - b))) > 1e-10:
            raise ScenarioError(
                f"axis {ax.name!r} declared periodic but map endpoints differ "
                f"by {float(np.max(np.abs(a - b))):.3e}",
                "immersion", ax.name)
    # flag pre-checks
    try:
        sc.flag_report = verify_flags(imm, points, tol=flag_tol, calcs=calcs)
    except FlagError as exc:
        raise ScenarioError(f"flag pre-check failed: {exc}", "flags") from None
    return sc


def load_scenario(path, validate=True):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario(text, path=str(path), validate=validate)
