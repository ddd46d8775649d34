"""Ambient model spaces: metrics, structure tensors and curvature backends.

Every concrete space exposes its metric and structure tensors as jet-valued
functions of chart coordinates, so the Levi-Civita connection and the
curvature tensor derive from automatic differentiation ("concrete" backend).
The algebraic space-form curvature expressions form the second, independent
backend ("model"); agreement of the two on the concrete spaces is part of
the acceptance suite.

Charts:
  * euclidean_complex(n): R^2n, identity metric, standard J on coordinate
    pairs (2k, 2k+1).
  * fubini_study(n, hol): inhomogeneous (affine) coordinates on one chart of
    complex projective space with holomorphic sectional curvature `hol` > 0;
    the chart misses the hyperplane at infinity.
  * complex_hyperbolic(n, hol): ball chart |x| < 1, hol < 0.
  * sasakian_sphere(n, ctilde): unit sphere S^(2n+1) in stereographic
    coordinates (the chart excludes the antipode of the chart center); a
    D-homothetic deformation realizes phi-sectional curvature ctilde > -3.
  * cosymplectic_flat(n): R^(2n+1), flat, Reeb coordinate last.
  * kenmotsu_hyperbolic(n): warped product dt^2 + e^(2t) * flat, t last;
    phi-sectional curvature -1.
  * abstract_gcsf / abstract_gssf: curvature model only (coefficient
    expressions over chart coordinates x1, x2, ...), evaluated in a fiducial
    frame with identity metric and standard structure tensors.  Operations
    needing the ambient connection reject these spaces.
"""

from __future__ import annotations

import numpy as np

from .expr import parse, eval_on_jets
from .jets import Jet, jet_space

__all__ = [
    "AmbientSpace",
    "ChartError",
    "SpaceError",
    "make_space",
    "space_form_coefficients",
    "christoffels_at",
    "curvature_concrete",
    "curvature_model",
    "sectional_curvature",
    "metric_and_christoffel_jets",
    "chart_jets",
]


class SpaceError(ValueError):
    """Unsupported operation or invalid construction for a space."""


class ChartError(ValueError):
    """Point outside the chart domain."""


def _std_J(dim):
    if dim % 2:
        raise SpaceError("complex structure needs even dimension")
    J = np.zeros((dim, dim))
    for k in range(dim // 2):
        J[2 * k + 1, 2 * k] = 1.0
        J[2 * k, 2 * k + 1] = -1.0
    return J


def _const_matrix(mat, space):
    return [[Jet.constant(space, mat[i, j]) for j in range(mat.shape[1])]
            for i in range(mat.shape[0])]


def chart_jets(point, order):
    """Seed chart coordinates as jet variables around `point`."""
    point = np.asarray(point, dtype=float)
    sp = jet_space(len(point), order)
    return [Jet.variable(sp, i, point[i]) for i in range(len(point))]


class AmbientSpace:
    """Base class; concrete subclasses provide jet-valued evaluators."""

    kind = "abstract"
    structure = None       # "hermitian" | "contact"
    family = None          # "gcsf" | "gssf"
    has_metric = True

    def __init__(self, chart_dim):
        self.chart_dim = chart_dim

    # -- every subclass with a metric implements metric_jets/structure_jets --

    def metric_jets(self, x):
        raise SpaceError(f"{self.kind} has no concrete metric")

    def structure_jets(self, x):
        raise NotImplementedError

    def curvature_coeff_jets(self, x):
        """GCSF (alpha, beta) or GSSF (f1, f2, f3) fields at chart jets x."""
        raise NotImplementedError

    # -- numeric conveniences ------------------------------------------------

    def chart_check(self, point):
        if len(point) != self.chart_dim:
            raise ChartError(
                f"point has {len(point)} coordinates, chart needs {self.chart_dim}"
            )

    def metric_at(self, point):
        self.chart_check(point)
        x = chart_jets(point, 0)
        G = np.array([[g.value for g in row] for row in self.metric_jets(x)])
        if not np.all(np.isfinite(G)):
            raise ChartError("metric not finite at point")
        try:
            np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            raise ChartError("metric not positive definite at point") from None
        return G

    def structure_at(self, point):
        self.chart_check(point)
        x = chart_jets(point, 0)
        tensors = self.structure_jets(x)
        out = {}
        for key, val in tensors.items():
            if isinstance(val[0], list):
                out[key] = np.array([[j.value for j in row] for row in val])
            else:
                out[key] = np.array([j.value for j in val])
        return out

    def curvature_coeffs_at(self, point):
        x = chart_jets(point, 0)
        return tuple(c.value for c in self.curvature_coeff_jets(x))

    def describe(self):
        return f"{self.kind}(chart_dim={self.chart_dim})"


# -- Hermitian spaces ---------------------------------------------------------


class EuclideanComplex(AmbientSpace):
    kind = "euclidean_complex"
    structure = "hermitian"
    family = "gcsf"

    def __init__(self, n):
        super().__init__(2 * n)
        self.n = n
        self._J = _std_J(self.chart_dim)

    def metric_jets(self, x):
        return _const_matrix(np.eye(self.chart_dim), x[0].space)

    def structure_jets(self, x):
        return {"J": _const_matrix(self._J, x[0].space)}

    def curvature_coeff_jets(self, x):
        zero = Jet.constant(x[0].space, 0.0)
        return (zero, zero)


class _KaehlerPotentialSpace(AmbientSpace):
    """Kaehler metric from a radial potential: G = (Hess K + J^T Hess K J)/4."""

    structure = "hermitian"
    family = "gcsf"

    def __init__(self, n, hol):
        super().__init__(2 * n)
        self.n = n
        self.hol = float(hol)
        self.csf_coeff = self.hol / 4.0
        self._J = _std_J(self.chart_dim)

    def _potential_hessian(self, x):
        """Closed-form Euclidean Hessian of the Kaehler potential (jets)."""
        raise NotImplementedError

    def metric_jets(self, x):
        d = self.chart_dim
        H = self._potential_hessian(x)
        J = self._J
        G = [[None] * d for _ in range(d)]
        for a in range(d):
            for b in range(a, d):
                acc = H[a][b]
                # (J^T H J)_ab = J_ca H_cd J_db ; J has one entry per column
                ca = np.flatnonzero(J[:, a])[0]
                db = np.flatnonzero(J[:, b])[0]
                acc = acc + J[ca, a] * J[db, b] * H[ca][db]
                G[a][b] = acc * 0.25
                G[b][a] = G[a][b]
        return G

    def structure_jets(self, x):
        return {"J": _const_matrix(self._J, x[0].space)}

    def curvature_coeff_jets(self, x):
        c = Jet.constant(x[0].space, self.csf_coeff)
        return (c, c)


class FubiniStudy(_KaehlerPotentialSpace):
    kind = "fubini_study"

    def __init__(self, n, hol=4.0):
        if hol <= 0:
            raise SpaceError("fubini_study needs positive holomorphic curvature")
        super().__init__(n, hol)

    def _potential_hessian(self, x):
        # K = (1/c) log(1+rho): K_ab = (2/c) (delta_ab (1+rho) - 2 x_a x_b)/(1+rho)^2
        d = self.chart_dim
        rho = x[0] * x[0]
        for xi in x[1:]:
            rho = rho + xi * xi
        w = rho + 1.0
        scale = (2.0 / self.csf_coeff) / (w * w)
        H = [[None] * d for _ in range(d)]
        for a in range(d):
            for b in range(a, d):
                term = -2.0 * x[a] * x[b]
                if a == b:
                    term = term + w
                H[a][b] = term * scale
                H[b][a] = H[a][b]
        return H


class ComplexHyperbolic(_KaehlerPotentialSpace):
    kind = "complex_hyperbolic"

    def __init__(self, n, hol=-4.0):
        if hol >= 0:
            raise SpaceError("complex_hyperbolic needs negative holomorphic curvature")
        super().__init__(n, hol)

    def chart_check(self, point):
        super().chart_check(point)
        if float(np.dot(point, point)) >= 1.0:
            raise ChartError("complex_hyperbolic chart requires |x| < 1")

    def _potential_hessian(self, x):
        # K = (1/c) log(1-rho), c < 0:
        # K_ab = -(2/c) (delta_ab (1-rho) + 2 x_a x_b)/(1-rho)^2
        d = self.chart_dim
        rho = x[0] * x[0]
        for xi in x[1:]:
            rho = rho + xi * xi
        w = 1.0 - rho
        scale = (-2.0 / self.csf_coeff) / (w * w)
        H = [[None] * d for _ in range(d)]
        for a in range(d):
            for b in range(a, d):
                term = 2.0 * x[a] * x[b]
                if a == b:
                    term = term + w
                H[a][b] = term * scale
                H[b][a] = H[a][b]
        return H


# -- contact spaces -----------------------------------------------------------


class CosymplecticFlat(AmbientSpace):
    """Flat R^(2n+1) = C^n x R with parallel contact structure (ctilde = 0).

    Doubles as plain Euclidean ambient space for curves and surfaces.
    """

    kind = "cosymplectic_flat"
    structure = "contact"
    family = "gssf"
    space_form = "cosymplectic"
    ctilde = 0.0

    def __init__(self, n):
        super().__init__(2 * n + 1)
        self.n = n
        self._phi = np.zeros((self.chart_dim, self.chart_dim))
        self._phi[: 2 * n, : 2 * n] = _std_J(2 * n)

    def metric_jets(self, x):
        return _const_matrix(np.eye(self.chart_dim), x[0].space)

    def structure_jets(self, x):
        sp = x[0].space
        d = self.chart_dim
        xi = [Jet.constant(sp, 1.0 if a == d - 1 else 0.0) for a in range(d)]
        eta = [Jet.constant(sp, 1.0 if a == d - 1 else 0.0) for a in range(d)]
        return {"phi": _const_matrix(self._phi, sp), "xi": xi, "eta": eta}

    def curvature_coeff_jets(self, x):
        zero = Jet.constant(x[0].space, 0.0)
        return (zero, zero, zero)


class KenmotsuHyperbolic(AmbientSpace):
    """Warped product dt^2 + e^(2t) * flat over C^n; Kenmotsu, ctilde = -1."""

    kind = "kenmotsu_hyperbolic"
    structure = "contact"
    family = "gssf"
    space_form = "kenmotsu"
    ctilde = -1.0

    def __init__(self, n):
        super().__init__(2 * n + 1)
        self.n = n
        self._phi = np.zeros((self.chart_dim, self.chart_dim))
        self._phi[: 2 * n, : 2 * n] = _std_J(2 * n)

    def metric_jets(self, x):
        sp = x[0].space
        d = self.chart_dim
        warp = (x[d - 1] * 2.0).exp()
        zero = Jet.constant(sp, 0.0)
        G = [[zero] * d for _ in range(d)]
        for a in range(2 * self.n):
            G[a] = list(G[a])
            G[a][a] = warp
        G[d - 1] = list(G[d - 1])
        G[d - 1][d - 1] = Jet.constant(sp, 1.0)
        return G

    def structure_jets(self, x):
        sp = x[0].space
        d = self.chart_dim
        xi = [Jet.constant(sp, 1.0 if a == d - 1 else 0.0) for a in range(d)]
        eta = [Jet.constant(sp, 1.0 if a == d - 1 else 0.0) for a in range(d)]
        return {"phi": _const_matrix(self._phi, sp), "xi": xi, "eta": eta}

    def curvature_coeff_jets(self, x):
        f1, f2, f3 = space_form_coefficients("kenmotsu", self.ctilde)
        sp = x[0].space
        return tuple(Jet.constant(sp, v) for v in (f1, f2, f3))


class SasakianSphere(AmbientSpace):
    """Unit sphere with its standard Sasakian structure, stereographic chart.

    For ctilde != 1 the metric, Reeb field and contact form carry the
    D-homothetic deformation g -> a g + a(a-1) eta (x) eta, xi -> xi/a,
    eta -> a eta with a = 4/(ctilde+3), which keeps the structure Sasakian
    and sets the phi-sectional curvature to ctilde.
    """

    kind = "sasakian_sphere"
    structure = "contact"
    family = "gssf"
    space_form = "sasaki"

    def __init__(self, n, ctilde=1.0):
        if ctilde <= -3.0:
            raise SpaceError("sasakian_sphere needs ctilde > -3")
        super().__init__(2 * n + 1)
        self.n = n
        self.ctilde = float(ctilde)
        self.homothety = 4.0 / (self.ctilde + 3.0)
        self._J_amb = _std_J(2 * n + 2)

    def _embedding(self, x):
        """X(u) = (2u, 1-|u|^2)/(1+|u|^2), its closed-form differential and
        the conformal factor lambda = 4/(1+|u|^2)^2 of the round pullback."""
        d = self.chart_dim
        rho = x[0] * x[0]
        for xi in x[1:]:
            rho = rho + xi * xi
        denom_inv = 1.0 / (rho + 1.0)
        denom_inv2 = denom_inv * denom_inv
        X = [x[a] * 2.0 * denom_inv for a in range(d)]
        X.append((1.0 - rho) * denom_inv)
        # dX[a][i] = dX_a/du_i, closed form (no jet differentiation)
        dX = [[None] * d for _ in range(d + 1)]
        for a in range(d):
            for i in range(d):
                entry = x[i] * x[a] * -4.0 * denom_inv2
                if a == i:
                    entry = entry + 2.0 * denom_inv
                dX[a][i] = entry
        for i in range(d):
            dX[d][i] = x[i] * -4.0 * denom_inv2
        lam = 4.0 * denom_inv2
        return X, dX, lam

    def _round_structure(self, x):
        """Round-metric conformal factor, Reeb field and phi in the chart.

        The Reeb field is the pullback of -J.X: this orientation gives the
        standard Sasakian sign nabla_X xi = -phi(X)."""
        d = self.chart_dim
        X, dX, lam = self._embedding(x)
        # ambient Reeb -J.X restricted to the sphere
        JX = []
        for a in range(d + 1):
            col = np.flatnonzero(self._J_amb[a])[0]
            JX.append(X[col] * -self._J_amb[a, col])
        # eta0_i = (dX^T (-J X))_i ; xi0 = eta0 / lambda (round metric lam*I)
        eta0 = []
        for al in range(d):
            acc = dX[0][al] * JX[0]
            for a in range(1, d + 1):
                acc = acc + dX[a][al] * JX[a]
            eta0.append(acc)
        lam_inv = 1.0 / lam
        xi0 = [e * lam_inv for e in eta0]
        # phi0 = dX^T J dX / lambda
        phi0 = [[None] * d for _ in range(d)]
        for al in range(d):
            JdX_al = []
            for a in range(d + 1):
                col = np.flatnonzero(self._J_amb[a])[0]
                JdX_al.append(dX[col][al] * self._J_amb[a, col])
            for be in range(d):
                acc = dX[0][be] * JdX_al[0]
                for a in range(1, d + 1):
                    acc = acc + dX[a][be] * JdX_al[a]
                phi0[be][al] = acc * lam_inv
        return lam, xi0, eta0, phi0

    def metric_jets(self, x):
        d = self.chart_dim
        a = self.homothety
        lam, xi0, eta0, phi0 = self._round_structure(x)
        G = [[None for _ in range(d)] for _ in range(d)]
        for al in range(d):
            for be in range(al, d):
                acc = eta0[al] * eta0[be] * (a * (a - 1.0))
                if al == be:
                    acc = acc + lam * a
                G[al][be] = acc
                G[be][al] = acc
        return G

    def structure_jets(self, x):
        a = self.homothety
        lam, xi0, eta0, phi0 = self._round_structure(x)
        xi = [v / a for v in xi0]
        eta = [v * a for v in eta0]
        return {"phi": phi0, "xi": xi, "eta": eta}

    def curvature_coeff_jets(self, x):
        f1, f2, f3 = space_form_coefficients("sasaki", self.ctilde)
        sp = x[0].space
        return tuple(Jet.constant(sp, v) for v in (f1, f2, f3))


# -- abstract curvature-model-only spaces --------------------------------------


class AbstractGCSF(AmbientSpace):
    """Generalized complex space form given only by curvature coefficients.

    No concrete metric exists for non-constant (alpha, beta); evaluation
    happens in a fiducial orthonormal frame (identity metric, standard J).
    """

    kind = "abstract_gcsf"
    structure = "hermitian"
    family = "gcsf"
    has_metric = False

    def __init__(self, alpha, beta, dim=4):
        if dim % 2:
            raise SpaceError("abstract_gcsf needs even dimension")
        super().__init__(dim)
        self.coord_names = [f"x{i + 1}" for i in range(dim)]
        self.alpha = parse(alpha, self.coord_names) if isinstance(alpha, str) else alpha
        self.beta = parse(beta, self.coord_names) if isinstance(beta, str) else beta
        self._J = _std_J(dim)

    def structure_jets(self, x):
        return {"J": _const_matrix(self._J, x[0].space)}

    def curvature_coeff_jets(self, x):
        env = dict(zip(self.coord_names, x))
        return (eval_on_jets(self.alpha, env), eval_on_jets(self.beta, env))


class AbstractGSSF(AmbientSpace):
    """Generalized Sasakian space form by coefficient expressions only."""

    kind = "abstract_gssf"
    structure = "contact"
    family = "gssf"
    has_metric = False

    def __init__(self, n, f1, f2, f3):
        super().__init__(2 * n + 1)
        self.n = n
        self.coord_names = [f"x{i + 1}" for i in range(self.chart_dim)]
        parse_maybe = lambda e: parse(e, self.coord_names) if isinstance(e, str) else e
        self.f1 = parse_maybe(f1)
        self.f2 = parse_maybe(f2)
        self.f3 = parse_maybe(f3)
        self._phi = np.zeros((self.chart_dim, self.chart_dim))
        self._phi[: 2 * n, : 2 * n] = _std_J(2 * n)

    def structure_jets(self, x):
        sp = x[0].space
        d = self.chart_dim
        xi = [Jet.constant(sp, 1.0 if a == d - 1 else 0.0) for a in range(d)]
        eta = [Jet.constant(sp, 1.0 if a == d - 1 else 0.0) for a in range(d)]
        return {"phi": _const_matrix(self._phi, sp), "xi": xi, "eta": eta}

    def curvature_coeff_jets(self, x):
        env = dict(zip(self.coord_names, x))
        return tuple(eval_on_jets(f, env) for f in (self.f1, self.f2, self.f3))


# -- factories and tables -------------------------------------------------------


def make_space(kind, **params):
    table = {
        "euclidean_complex": EuclideanComplex,
        "fubini_study": FubiniStudy,
        "complex_hyperbolic": ComplexHyperbolic,
        "sasakian_sphere": SasakianSphere,
        "cosymplectic_flat": CosymplecticFlat,
        "kenmotsu_hyperbolic": KenmotsuHyperbolic,
        "abstract_gcsf": AbstractGCSF,
        "abstract_gssf": AbstractGSSF,
    }
    if kind not in table:
        raise SpaceError(f"unknown ambient kind {kind!r}")
    return table[kind](**params)


def space_form_coefficients(kind, ctilde):
    """Coefficient triple (f1, f2, f3) of the contact space-form families."""
    c = float(ctilde)
    if kind == "sasaki":
        return ((c + 3.0) / 4.0, (c - 1.0) / 4.0, (c - 1.0) / 4.0)
    if kind == "kenmotsu":
        return ((c - 3.0) / 4.0, (c + 1.0) / 4.0, (c + 1.0) / 4.0)
    if kind == "cosymplectic":
        return (c / 4.0, c / 4.0, c / 4.0)
    raise SpaceError(f"unknown contact space-form kind {kind!r}")


# -- connection and curvature (concrete backend) -------------------------------


def _jet_matrix_inverse(M):
    """Gauss-Jordan inverse of a square matrix of jets (value pivoting)."""
    n = len(M)
    A = [row[:] for row in M]
    sp = A[0][0].space
    I = [[Jet.constant(sp, 1.0 if i == j else 0.0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r][col].value))
        if abs(A[piv][col].value) < 1e-14:
            raise SpaceError("singular jet matrix")
        A[col], A[piv] = A[piv], A[col]
        I[col], I[piv] = I[piv], I[col]
        inv_p = 1.0 / A[col][col]
        A[col] = [a * inv_p for a in A[col]]
        I[col] = [a * inv_p for a in I[col]]
        for r in range(n):
            if r != col:
                factor = A[r][col]
                A[r] = [a - factor * b for a, b in zip(A[r], A[col])]
                I[r] = [a - factor * b for a, b in zip(I[r], I[col])]
    return I


def christoffel_jets(G):
    """Christoffel symbols Gamma[k][i][j] (jets, one order below G)."""
    d = len(G)
    order = G[0][0].space.order
    if order < 1:
        raise SpaceError("christoffel symbols need metric jets of order >= 1")
    dG = [[[G[i][j].deriv(k) for k in range(d)] for j in range(d)] for i in range(d)]
    G_lo = [[G[i][j].truncate(order - 1) for j in range(d)] for i in range(d)]
    Ginv = _jet_matrix_inverse(G_lo)
    Gam = [[[None] * d for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            # w_l = (d_i g_lj + d_j g_li - d_l g_ij) / 2
            w = [dG[l][j][i] + dG[l][i][j] - dG[i][j][l] for l in range(d)]
            for k in range(d):
                acc = Ginv[k][0] * w[0]
                for l in range(1, d):
                    acc = acc + Ginv[k][l] * w[l]
                val = acc * 0.5
                Gam[k][i][j] = val
                Gam[k][j][i] = val
    return Gam


def metric_and_christoffel_jets(space, point, order):
    """Chart-seeded metric jets (given order) and Christoffels (order-1)."""
    if not space.has_metric:
        raise SpaceError(f"{space.kind} supplies no ambient connection")
    space.chart_check(point)
    x = chart_jets(point, order)
    G = space.metric_jets(x)
    return G, christoffel_jets(G)


def christoffels_at(space, point):
    """Gamma^k_ij values; symmetric in the lower indices."""
    _, Gam = metric_and_christoffel_jets(space, point, 1)
    d = space.chart_dim
    out = np.zeros((d, d, d))
    for k in range(d):
        for i in range(d):
            for j in range(d):
                out[k, i, j] = Gam[k][i][j].value
    return out


def curvature_tensor_at(space, point):
    """R[l,i,j,k] with R(e_i, e_j) e_k = R[l,i,j,k] e_l (bracket convention)."""
    _, Gam = metric_and_christoffel_jets(space, point, 2)
    d = space.chart_dim
    G_val = np.zeros((d, d, d))
    dG = np.zeros((d, d, d, d))  # dG[i, k, j, l] = d_l Gamma^k_ij... see below
    Gv = np.zeros((d, d, d))
    dGv = np.zeros((d, d, d, d))
    for k in range(d):
        for i in range(d):
            for j in range(d):
                Gv[k, i, j] = Gam[k][i][j].value
                for l in range(d):
                    dGv[l, k, i, j] = Gam[k][i][j].deriv(l).value
    R = np.zeros((d, d, d, d))
    for i in range(d):
        for j in range(d):
            for k in range(d):
                for l in range(d):
                    R[l, i, j, k] = (
                        dGv[i, l, j, k]
                        - dGv[j, l, i, k]
                        + np.dot(Gv[l, i, :], Gv[:, j, k])
                        - np.dot(Gv[l, j, :], Gv[:, i, k])
                    )
    return R


def curvature_concrete(space, point, X, Y, Z):
    """R(X, Y)Z from metric jets, convention R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]."""
    R = curvature_tensor_at(space, point)
    return np.einsum("lijk,i,j,k->l", R, X, Y, Z)


def curvature_model(space, point, X, Y, Z):
    """Algebraic space-form curvature with coefficients evaluated at `point`.

    Hermitian family: alpha*R1 + beta*R2; contact family: f1*R1s + f2*R2s
    + f3*R3s, with the fiducial identity metric for abstract spaces.
    """
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    Z = np.asarray(Z, float)
    if space.has_metric:
        G = space.metric_at(point)
    else:
        G = np.eye(space.chart_dim)
    tensors = (
        space.structure_at(point)
        if space.has_metric
        else {
            k: np.array([[j.value for j in row] for row in v])
            if isinstance(v[0], list)
            else np.array([j.value for j in v])
            for k, v in space.structure_jets(chart_jets(point, 0)).items()
        }
    )
    g = lambda a, b: float(a @ G @ b)
    coeffs = space.curvature_coeffs_at(point)
    if space.family == "gcsf":
        alpha, beta = coeffs
        J = tensors["J"]
        R1 = g(Y, Z) * X - g(X, Z) * Y
        JX, JY, JZ = J @ X, J @ Y, J @ Z
        R2 = g(JY, Z) * JX - g(JX, Z) * JY + 2.0 * g(JY, X) * JZ
        return alpha * R1 + beta * R2
    f1, f2, f3 = coeffs
    phi, xi = tensors["phi"], tensors["xi"]
    eta = lambda v: g(v, xi)
    R1 = g(Y, Z) * X - g(X, Z) * Y
    R2 = (
        eta(X) * eta(Z) * Y
        - eta(Y) * eta(Z) * X
        + g(X, Z) * eta(Y) * xi
        - g(Y, Z) * eta(X) * xi
    )
    pX, pY, pZ = phi @ X, phi @ Y, phi @ Z
    Om = lambda a, pb: g(a, pb)  # Omega(A, B) = g(A, phi B)
    R3 = Om(Z, pY) * pX - Om(Z, pX) * pY + 2.0 * Om(X, pY) * pZ
    return f1 * R1 + f2 * R2 + f3 * R3


def gcsf_coefficient_sum_spread(space, points):
    """Spread of alpha+beta over sample points.

    The coefficient sum of a generalized complex space form is necessarily
    constant; user-supplied expressions are not forced to satisfy this, so
    consumers warn when the sampled spread is non-zero.
    """
    vals = []
    for p in points:
        coeffs = space.curvature_coeffs_at(np.asarray(p, float))
        vals.append(coeffs[0] + coeffs[1])
    return float(max(vals) - min(vals))


def sectional_curvature(space, point, X, Y, backend="concrete"):
    G = space.metric_at(point)
    g = lambda a, b: float(a @ G @ b)
    R = (
        curvature_concrete(space, point, X, Y, Y)
        if backend == "concrete"
        else curvature_model(space, point, X, Y, Y)
    )
    denom = g(X, X) * g(Y, Y) - g(X, Y) ** 2
    return g(R, X) / denom
