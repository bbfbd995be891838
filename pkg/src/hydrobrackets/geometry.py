"""Symbolic pseudo-Riemannian computations on exact metrics.

Index conventions used throughout:

* ``Gamma[i][j][k]`` holds the Levi-Civita symbols Gamma^i_{jk},
  computed as (1/2) g^{is} (d_j g_{sk} + d_k g_{sj} - d_s g_{jk});
* ``b[i][j][k]`` holds the contravariant connection
  b^{ij}_k = -g^{is} Gamma^j_{sk};
* ``R[i][j][k][l]`` holds the curvature tensor
  R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj}
            + Gamma^i_{ks} Gamma^s_{lj} - Gamma^i_{ls} Gamma^s_{kj}.

With these conventions a metric has constant curvature ``K`` exactly when
R^i_{jkl} = K (delta^i_k g_{jl} - delta^i_l g_{jk}); the sign was pinned
once against the closed-form constant-curvature family built by
:func:`canonical_metric` and is locked in by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .expr import Expr, Zeroness, as_expr, is_zero

__all__ = [
    "ContravariantMetric",
    "CovariantMetric",
    "Connection",
    "CurvatureTensor",
    "DegenerateMetricError",
    "invert_metric",
    "christoffel",
    "riemann",
    "constant_curvature_residual",
    "canonical_metric",
    "field_vars",
]


class DegenerateMetricError(ValueError):
    """The symbolic determinant vanishes identically."""


def field_vars(n: int, prefix: str = "u") -> tuple:
    return tuple(f"{prefix}{i + 1}" for i in range(n))


def _check_square(entries) -> int:
    n = len(entries)
    if any(len(row) != n for row in entries):
        raise ValueError("metric matrix must be square")
    return n


def _freeze(entries):
    return tuple(tuple(as_expr(e) for e in row) for row in entries)


@dataclass(frozen=True)
class ContravariantMetric:
    """Symmetric matrix of expressions g^{ij}(u)."""

    vars: tuple
    entries: tuple

    def __post_init__(self):
        n = _check_square(self.entries)
        object.__setattr__(self, "entries", _freeze(self.entries))
        if len(self.vars) != n:
            raise ValueError("variable list does not match matrix size")
        for i in range(n):
            for j in range(i + 1, n):
                if is_zero(self.entries[i][j] - self.entries[j][i]) is Zeroness.NONZERO:
                    raise ValueError(f"metric is not symmetric at ({i + 1},{j + 1})")

    @property
    def n(self) -> int:
        return len(self.vars)

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]


@dataclass(frozen=True)
class CovariantMetric:
    """Symmetric matrix g_{ij}(u), optionally carrying its contravariant partner."""

    vars: tuple
    entries: tuple
    contravariant: ContravariantMetric | None = field(default=None, compare=False)

    def __post_init__(self):
        _check_square(self.entries)
        object.__setattr__(self, "entries", _freeze(self.entries))

    @property
    def n(self) -> int:
        return len(self.vars)

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]


@dataclass(frozen=True)
class Connection:
    """Levi-Civita symbols Gamma^i_{jk} and contravariant form b^{ij}_k."""

    vars: tuple
    gamma: tuple
    b: tuple

    @property
    def n(self) -> int:
        return len(self.vars)


@dataclass(frozen=True)
class CurvatureTensor:
    vars: tuple
    entries: tuple  # R[i][j][k][l] = R^i_{jkl}

    @property
    def n(self) -> int:
        return len(self.vars)


# ---------------------------------------------------------------------------
# exact linear algebra on expression matrices
# ---------------------------------------------------------------------------


def det(entries) -> Expr:
    """Determinant by cofactor expansion (sizes here stay at most 4 or 5)."""
    n = len(entries)
    if n == 1:
        return as_expr(entries[0][0])
    if n == 2:
        a, b_, c, d = entries[0][0], entries[0][1], entries[1][0], entries[1][1]
        return as_expr(a) * d - as_expr(b_) * c
    total = Expr.const(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in entries[1:]]
        term = as_expr(entries[0][j]) * det(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def adjugate(entries):
    n = len(entries)
    if n == 1:
        return [[Expr.const(1)]]
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [entries[r][c] for c in range(n) if c != j]
                for r in range(n)
                if r != i
            ]
            cof = det(minor)
            adj[j][i] = cof if (i + j) % 2 == 0 else -cof
    return adj


def matrix_inverse(entries):
    """Exact inverse via adjugate/determinant; raises on identic degeneracy."""
    d = det(entries)
    if is_zero(d) is Zeroness.ZERO:
        raise DegenerateMetricError("matrix is identically degenerate")
    adj = adjugate(entries)
    n = len(entries)
    return [[adj[i][j] / d for j in range(n)] for i in range(n)], d


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def invert_metric(g: ContravariantMetric) -> CovariantMetric:
    inv, _ = matrix_inverse(g.entries)
    return CovariantMetric(vars=g.vars, entries=inv, contravariant=g)


def _contravariant_of(g_cov: CovariantMetric):
    if g_cov.contravariant is not None:
        return g_cov.contravariant.entries
    inv, _ = matrix_inverse(g_cov.entries)
    return tuple(tuple(row) for row in inv)


def christoffel(g_cov: CovariantMetric) -> Connection:
    """Levi-Civita connection of the covariant metric; also populates the
    contravariant coefficients b^{ij}_k = -g^{is} Gamma^j_{sk}."""
    n = g_cov.n
    vars = g_cov.vars
    up = _contravariant_of(g_cov)
    lo = g_cov.entries
    dlo = [
        [[lo[i][j].diff(vars[k]) for k in range(n)] for j in range(n)]
        for i in range(n)
    ]
    half = Fraction(1, 2)
    gamma = [
        [
            [
                sum(
                    (up[i][s] * (dlo[s][k][j] + dlo[s][j][k] - dlo[j][k][s]) for s in range(n)),
                    Expr.const(0),
                )
                * half
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    b = [
        [
            [
                -sum((up[i][s] * gamma[j][s][k] for s in range(n)), Expr.const(0))
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    freeze3 = lambda t: tuple(tuple(tuple(r) for r in p) for p in t)
    return Connection(vars=vars, gamma=freeze3(gamma), b=freeze3(b))


def riemann(g_cov: CovariantMetric) -> CurvatureTensor:
    n = g_cov.n
    vars = g_cov.vars
    gam = christoffel(g_cov).gamma
    dgam = [
        [
            [[gam[i][j][k].diff(vars[l]) for l in range(n)] for k in range(n)]
            for j in range(n)
        ]
        for i in range(n)
    ]
    ent = [
        [
            [
                [
                    dgam[i][l][j][k]
                    - dgam[i][k][j][l]
                    + sum(
                        (
                            gam[i][k][s] * gam[s][l][j] - gam[i][l][s] * gam[s][k][j]
                            for s in range(n)
                        ),
                        Expr.const(0),
                    )
                    for l in range(n)
                ]
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    ent = tuple(tuple(tuple(tuple(r) for r in q) for q in p) for p in ent)
    return CurvatureTensor(vars=vars, entries=ent)


def constant_curvature_residual(g: ContravariantMetric, K) -> list:
    """Residuals R^i_{jkl} - K (delta^i_k g_{jl} - delta^i_l g_{jk});
    all zero exactly when g has constant curvature K."""
    K = as_expr(K)
    cov = invert_metric(g)
    R = riemann(cov).entries
    lo = cov.entries
    n = g.n
    out = [
        [
            [
                [
                    R[i][j][k][l]
                    - K
                    * (
                        (lo[j][l] if i == k else Expr.const(0))
                        - (lo[j][k] if i == l else Expr.const(0))
                    )
                    for l in range(n)
                ]
                for k in range(n)
            ]
            for j in range(n)
        ]
        for i in range(n)
    ]
    return out


def canonical_metric(a: Sequence, K, prefix: str = "u"):
    """The constant-curvature family g^{ij} = a^i delta^{ij} - K u^i u^j.

    Returns (contravariant, covariant, determinant).  The determinant is the
    closed product form a^1...a^N (1 - K sum (u^s)^2/a^s).  At most one of
    the N+1 constants a^1..a^N, K may vanish; when some a^m = 0 the covariant
    components come from the degenerate closed-form model (the contravariant
    matrix is then singular along u^m = 0 but not identically).
    """
    a = [Fraction(x) for x in a]
    K = Fraction(K)
    n = len(a)
    zeros = [i for i, x in enumerate(a) if x == 0] + ([n] if K == 0 else [])
    if len(zeros) > 1:
        raise ValueError(
            "at most one of the constants a^1..a^N, K may be zero"
        )
    vars = field_vars(n, prefix)
    u = [Expr.var(v) for v in vars]
    Ke = Expr.const(K)

    up = [
        [
            (Expr.const(a[i]) if i == j else Expr.const(0)) - Ke * u[i] * u[j]
            for j in range(n)
        ]
        for i in range(n)
    ]
    contra = ContravariantMetric(vars=vars, entries=up)

    if all(x != 0 for x in a):
        disc = Expr.const(1) - sum(
            (u[s] * u[s] * Fraction(1, 1) / a[s] * K for s in range(n)), Expr.const(0)
        )
        prod_a = Fraction(1)
        for x in a:
            prod_a *= x
        det_expr = Expr.const(prod_a) * disc
        lo = [
            [
                (Expr.const(Fraction(1, 1) / a[i]) if i == j else Expr.const(0))
                + Ke * u[i] * u[j] / (Expr.const(a[i] * a[j]) * disc)
                for j in range(n)
            ]
            for i in range(n)
        ]
    else:
        m = zeros[0]
        prod_rest = Fraction(1)
        for s in range(n):
            if s != m:
                prod_rest *= a[s]
        det_expr = Expr.const(-K * prod_rest) * u[m] * u[m]
        lo = [[Expr.const(0) for _ in range(n)] for _ in range(n)]
        tail = Expr.const(1) - sum(
            (u[s] * u[s] * (K / a[s]) for s in range(n) if s != m), Expr.const(0)
        )
        lo[m][m] = -tail / (Ke * u[m] * u[m])
        for i in range(n):
            if i == m:
                continue
            lo[i][i] = Expr.const(Fraction(1, 1) / a[i])
            lo[i][m] = lo[m][i] = -u[i] / (Expr.const(a[i]) * u[m])

    cov = CovariantMetric(vars=vars, entries=lo, contravariant=contra)
    return contra, cov, det_expr
