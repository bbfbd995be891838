"""Recursion operator, explicit flows, Hamiltonian representations,
commutation and involution."""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from hydrobrackets.bracket import CanonicalPair, ConstantBracket
from hydrobrackets.expr import Expr, Zeroness, is_zero, parse
from hydrobrackets.hierarchy import (
    ClosednessError,
    ConservativeFlow,
    FlowInvariantError,
    HamiltonianDensity,
    NotPoissonError,
    apply_recursion,
    bihamiltonian_check,
    commute_check,
    eta_gradient_gauge,
    flow_t1,
    flow_t2,
    hierarchy,
    involution_check,
    linear_density_flow,
    recursion_matrix,
    translation_flow,
)

ETA1 = ConstantBracket([[1]])
ETA2 = ConstantBracket([[1, 0], [0, 1]])
UV = ("u1", "u2")


def _zero(e) -> bool:
    return is_zero(e) is Zeroness.ZERO


def _scalar_pair(h_text, K, extra=()):
    return CanonicalPair(
        eta=ETA1, K=K, H=(parse(h_text, ("u1",) + tuple(extra)),), vars=("u1",)
    )


def _linear_pair(K=1):
    return CanonicalPair(
        eta=ETA2,
        K=K,
        H=(parse("2*u1 - u2", UV), parse("u1 + 3*u2", UV)),
        vars=UV,
    )


# -- independent scalar oracle -------------------------------------------------
#
# For one component with eta = 1 and K = 0 the recursion collapses to plain
# univariate calculus: V -> g1 S'' + b1 S' with g1 = 2h', b1 = h''.  The
# oracle below iterates that with bare coefficient lists (no Expr machinery),
# and the expected flows are frozen from it.


def _list_diff(p):
    return [c * (i + 1) for i, c in enumerate(p[1:], start=0)]


def _list_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _list_add(p, q):
    out = [Fraction(0)] * max(len(p), len(q))
    for i, a in enumerate(p):
        out[i] += a
    for i, b in enumerate(q):
        out[i] += b
    return out


def _list_ray_int(p):
    # antiderivative with value 0 at the origin
    return [Fraction(0)] + [c / (i + 1) for i, c in enumerate(p)]


def _scalar_oracle_chain(h_coeffs, levels):
    """V coefficient lists for levels 0..levels of the K=0 scalar hierarchy."""
    g1 = _list_mul([Fraction(2)], _list_diff(h_coeffs))
    b1 = _list_diff(_list_diff(h_coeffs))
    S = [Fraction(0), Fraction(0), Fraction(1, 2)]  # v^2/2
    out = [[Fraction(1)]]
    for _ in range(levels):
        Spp = _list_diff(_list_diff(S))
        Sp = _list_diff(S)
        V = _list_add(_list_mul(g1, Spp), _list_mul(b1, Sp))
        out.append(V)
        F = _list_ray_int(V)
        S = _list_ray_int(F)  # eta = 1
    return out


def test_scalar_oracle_chain_frozen_values():
    chain = _scalar_oracle_chain([Fraction(0), Fraction(0), Fraction(1, 2)], 3)
    assert chain[1] == [Fraction(0), Fraction(3)]  # 3 v
    assert chain[2] == [Fraction(0), Fraction(0), Fraction(15, 2)]  # 15/2 v^2
    assert chain[3] == [Fraction(0), Fraction(0), Fraction(0), Fraction(35, 2)]


def test_hierarchy_matches_scalar_oracle():
    P = _scalar_pair("u1^2/2", 0)
    flows = hierarchy(P, 3)
    v = Expr.var("v1")
    chain = _scalar_oracle_chain([Fraction(0), Fraction(0), Fraction(1, 2)], 3)
    for level, coeffs in enumerate(chain):
        expect = sum((v**i * c for i, c in enumerate(coeffs)), Expr.const(0))
        assert _zero(flows[level].V[0][0] - expect)
    assert _zero(flows[1].F[0] - parse("3/2*v1^2", ("v1",)))
    assert _zero(flows[1].S - parse("v1^3/2", ("v1",)))


# -- translation flow ------------------------------------------------------------


def test_translation_flow_identity():
    fl = translation_flow(ETA2)
    for i in range(2):
        assert _zero(fl.F[i] - Expr.var(f"v{i + 1}"))
        for k in range(2):
            assert _zero(fl.V[i][k] - Expr.const(1 if i == k else 0))
    assert _zero(fl.S - parse("(v1^2 + v2^2)/2", ("v1", "v2")))


def test_translation_flow_indefinite_eta():
    fl = translation_flow(ConstantBracket([[1, 0], [0, -1]]))
    assert _zero(fl.S - parse("(v1^2 - v2^2)/2", ("v1", "v2")))


# -- recursion -----------------------------------------------------------------


def test_apply_recursion_scalar_step():
    P = _scalar_pair("u1^2/2", 0)
    fl1 = apply_recursion(P, translation_flow(ETA1))
    assert _zero(fl1.V[0][0] - parse("3*v1", ("v1",)))
    assert _zero(fl1.F[0] - parse("3/2*v1^2", ("v1",)))


def test_apply_recursion_reproduces_closed_form_with_gradient_gauge():
    # potentials with h(0) != 0 exercise the gauge constant
    P = CanonicalPair(
        eta=ETA2,
        K=1,
        H=(parse("1/2 + 2*u1 - u2", UV), parse("-1/3 + u1 + 3*u2", UV)),
        vars=UV,
    )
    rec = apply_recursion(P, translation_flow(ETA2), gauge=eta_gradient_gauge(P))
    t1 = flow_t1(P)
    for i in range(2):
        assert _zero(rec.F[i] - t1.F[i])
        for k in range(2):
            assert _zero(rec.V[i][k] - t1.V[i][k])
    assert _zero(rec.S - t1.S)


def test_recursion_constant_coefficient_square():
    # linear potentials with K = 0: level-2 coefficients square level-1's
    P = CanonicalPair(
        eta=ETA2, K=0, H=(parse("2*u1 - u2", UV), parse("u1 + 3*u2", UV)), vars=UV
    )
    flows = hierarchy(P, 2)
    V1, V2 = flows[1].V, flows[2].V
    for i in range(2):
        for k in range(2):
            sq = sum((V1[i][s] * V1[s][k] for s in range(2)), Expr.const(0))
            assert _zero(V2[i][k] - sq)


def test_closedness_failure_raised_for_invalid_pair():
    P = CanonicalPair(
        eta=ETA2, K=1, H=(parse("u1^2/2", UV), Expr.const(0)), vars=UV
    )
    with pytest.raises(ClosednessError):
        apply_recursion(P, flow_t1(P))


def test_hierarchy_rejects_invalid_pair_and_negative_levels():
    with pytest.raises(NotPoissonError):
        hierarchy(
            CanonicalPair(eta=ETA2, K=1, H=(parse("u1^2/2", UV), Expr.const(0)), vars=UV),
            2,
        )
    with pytest.raises(ValueError):
        hierarchy(_linear_pair(), -1)


def test_flow_invariants_enforced():
    with pytest.raises(FlowInvariantError):
        ConservativeFlow(
            eta=ETA1,
            vars=("v1",),
            F=(Expr.var("v1"),),
            S=parse("v1^2", ("v1",)),  # wrong potential
            V=((Expr.const(1),),),
        )


# -- the first flow -------------------------------------------------------------


def test_flow_t1_scalar_general_coefficient():
    # V1 = 2h' + h'' v - (3/2) K v^2 for arbitrary cubic h and symbolic K
    extra = ("c0", "c1", "c2", "c3", "kap")
    P = _scalar_pair("c0 + c1*u1 + c2*u1^2 + c3*u1^3", Expr.var("kap"), extra)
    t1 = flow_t1(P)
    v = Expr.var("v1")
    h = parse("c0 + c1*v1 + c2*v1^2 + c3*v1^3", ("v1",) + extra)
    expect = (
        h.diff("v1") * 2 + h.diff("v1").diff("v1") * v - Expr.var("kap") * v * v * Fraction(3, 2)
    )
    assert _zero(t1.V[0][0] - expect)


def test_flow_t1_three_forms_coincide():
    # operator form, expanded form and flux gradient agree
    for P in (
        _linear_pair(K=1),
        CanonicalPair(
            eta=ETA2,
            K=0,
            H=(parse("u1^3/6 + u1*u2", UV), parse("u2^2/2", UV)),
            vars=UV,
        ),
    ):
        t1 = flow_t1(P)
        vars = t1.vars
        s0 = translation_flow(P.eta).S
        V_op = recursion_matrix(P, s0, vars)
        n = P.n
        for i in range(n):
            for k in range(n):
                assert _zero(V_op[i][k] - t1.V[i][k])
                assert _zero(t1.F[i].diff(vars[k]) - t1.V[i][k])


def test_flow_t1_three_forms_fully_symbolic_cubic():
    # generic cubic potentials: every coefficient and K symbolic; the three
    # faces agree identically in all 21 parameters
    mons = ["1", "u1", "u2", "u1^2", "u1*u2", "u2^2", "u1^3", "u1^2*u2", "u1*u2^2", "u2^3"]
    params = tuple(f"a{i}" for i in range(10)) + tuple(f"b{i}" for i in range(10)) + ("kap",)
    h1 = " + ".join(f"a{i}*({m})" for i, m in enumerate(mons))
    h2 = " + ".join(f"b{i}*({m})" for i, m in enumerate(mons))
    P = CanonicalPair(
        eta=ETA2,
        K=Expr.var("kap"),
        H=(parse(h1, UV + params), parse(h2, UV + params)),
        vars=UV,
    )
    t1 = flow_t1(P)  # construction verifies the gradient and potential faces
    V_op = recursion_matrix(P, translation_flow(ETA2).S, t1.vars)
    for i in range(2):
        for k in range(2):
            assert _zero(V_op[i][k] - t1.V[i][k])


def test_flow_t1_scalar_fixture():
    P = _scalar_pair("u1^2/2", 0)
    t1 = flow_t1(P)
    assert _zero(t1.F[0] - parse("3/2*v1^2", ("v1",)))
    assert _zero(t1.V[0][0] - parse("3*v1", ("v1",)))


# -- the second flow -------------------------------------------------------------


def test_flow_t2_scalar_fixture():
    P = _scalar_pair("u1^2/2", 0)
    t2 = flow_t2(P)
    assert _zero(t2.V[0][0] - parse("15/2*v1^2", ("v1",)))


def test_flow_t2_matches_recursion_with_gradient_gauge():
    extra = ("c0", "c1", "c2", "c3", "kap")
    for P in (
        _linear_pair(K=1),
        _scalar_pair("c0 + c1*u1 + c2*u1^2 + c3*u1^3", Expr.var("kap"), extra),
    ):
        t2 = flow_t2(P)  # raises InconsistencyError on any mismatch
        rec = apply_recursion(P, flow_t1(P), gauge=eta_gradient_gauge(P))
        for i in range(P.n):
            assert _zero(t2.F[i] - rec.F[i])
        assert _zero(t2.S - rec.S)


def test_gauge_zero_defect_decomposition():
    # with gauge 0 the second-level potentials lose exactly the constant
    # h(0) / linear density eta h(0) v; one level later the coefficient
    # defect is exactly the flow of that linear density
    extra = ("c0", "c1", "c2", "c3", "kap")
    P = _scalar_pair("c0 + c1*u1 + c2*u1^2 + c3*u1^3", Expr.var("kap"), extra)
    t2 = flow_t2(P)
    rec0 = apply_recursion(P, flow_t1(P), gauge=None)
    gauge = eta_gradient_gauge(P)
    h0 = P.h_origin()
    for i in range(P.n):
        assert _zero(t2.F[i] - rec0.F[i] - h0[i])
        for k in range(P.n):
            assert _zero(t2.V[i][k] - rec0.V[i][k])
    vlin = sum(
        (gauge[j] * Expr.var(f"v{j + 1}") for j in range(P.n)), Expr.const(0)
    )
    assert _zero(t2.S - rec0.S - vlin)
    r3 = apply_recursion(P, t2)
    r3_zero = apply_recursion(P, rec0)
    defect = linear_density_flow(P, gauge)
    for i in range(P.n):
        for k in range(P.n):
            assert _zero(r3.V[i][k] - r3_zero.V[i][k] - defect.V[i][k])


# -- Hamiltonian representations -------------------------------------------------


def test_bihamiltonian_scalar_general():
    extra = ("c0", "c1", "c2", "c3", "kap")
    P = _scalar_pair("c0 + c1*u1 + c2*u1^2 + c3*u1^3", Expr.var("kap"), extra)
    report = bihamiltonian_check(P, flow_t1(P))
    assert report.exact


def test_bihamiltonian_linear_pair():
    P = _linear_pair(K=1)
    report = bihamiltonian_check(P, flow_t1(P))
    assert report.exact


def test_bihamiltonian_zero_flow():
    P = CanonicalPair(eta=ETA1, K=0, H=(Expr.const(0),), vars=("u1",))
    zero = Expr.const(0)
    fl = ConservativeFlow(
        eta=ETA1, vars=("v1",), F=(zero,), S=zero, V=((zero,),)
    )
    assert bihamiltonian_check(P, fl).exact


# -- commutation ---------------------------------------------------------------


def test_scalar_flows_always_commute():
    a = _scalar_pair("u1^2/2", 0)
    b = _scalar_pair("u1^3/6", 0)
    assert commute_check(flow_t1(a), flow_t1(b)).exact


@pytest.mark.parametrize(
    "pair",
    [
        _scalar_pair("u1^2/2", 1),
        _scalar_pair("u1^3/6", 1),
        _linear_pair(K=1),
    ],
    ids=["quadratic-scalar", "cubic-scalar", "linear-two-component"],
)
def test_hierarchy_levels_commute_pairwise(pair):
    flows = hierarchy(pair, 3)
    for fa, fb in itertools.combinations(flows, 2):
        assert commute_check(fa, fb).exact


def test_symbolic_scalar_hierarchy_to_level_three():
    # arbitrary cubic potential with symbolic coefficients and symbolic K:
    # the whole chain stays exact to level 3
    extra = ("c0", "c1", "c2", "c3", "kap")
    P = _scalar_pair("c0 + c1*u1 + c2*u1^2 + c3*u1^3", Expr.var("kap"), extra)
    flows = hierarchy(P, 3)
    assert [fl.level for fl in flows] == [0, 1, 2, 3]
    for fa, fb in itertools.combinations(flows, 2):
        assert commute_check(fa, fb).exact


def test_translation_commutes_with_first_flow():
    P = _linear_pair(K=1)
    assert commute_check(translation_flow(ETA2), flow_t1(P)).exact


def test_linear_density_flow_is_commuting_symmetry():
    P = CanonicalPair(
        eta=ETA2,
        K=1,
        H=(parse("1/2 + 2*u1 - u2", UV), parse("-1/3 + u1 + 3*u2", UV)),
        vars=UV,
    )
    defect = linear_density_flow(P, eta_gradient_gauge(P))
    assert commute_check(defect, flow_t1(P)).exact
    assert commute_check(defect, translation_flow(ETA2)).exact


# -- involution -----------------------------------------------------------------


def test_involution_of_hierarchy_densities():
    P = _linear_pair(K=1)
    flows = hierarchy(P, 2)
    h1 = HamiltonianDensity(flows[0].S, "P2")
    h2 = HamiltonianDensity(flows[1].S, "P2")
    assert involution_check(P, h1, h2)
    assert involution_check(P, h1, h1)


def test_annihilators_in_involution_with_momentum():
    P = _linear_pair(K=1)
    s0 = translation_flow(ETA2).S
    for i in range(2):
        assert involution_check(P, Expr.var(f"v{i + 1}"), s0, operator="P1")


def test_involution_of_conserved_densities_along_first_flow():
    P = _linear_pair(K=1)
    flows = hierarchy(P, 1)
    t1 = flows[1]
    for dens in (Expr.var("v1"), Expr.var("v2"), flows[0].S, t1.S):
        assert involution_check(P, dens, t1.S)
