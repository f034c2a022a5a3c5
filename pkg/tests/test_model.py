import json
import random
from fractions import Fraction

import pytest

from padic_gibbs.padic import DomainError, PadicNumber, PadicVec2, PrecisionError, exp_p, make
from padic_gibbs.poly import PadicMPoly
from padic_gibbs.model import (
    F1,
    F2,
    BoundaryField,
    ModelParams,
    _weights,
    check_compatibility,
    config_from_index,
    config_index,
    field_dot,
    hamiltonian,
    line_quadratic,
    measure,
    measure_table,
    partition_function,
    printed_line_quadratic,
    pull_back,
    recursion_step,
    recursion_step_kernels,
    spin_basis,
    symmetric_map,
    ti_system,
    transfer_sum,
)
from padic_gibbs.tree import ROOT, Vertex, build


def small(rng, p, n, r=1):
    """A random element of p^r Z_p known to n absolute digits."""
    k = rng.randrange(p ** (n - r))
    return PadicNumber.from_rational(k * p**r, p, n) if k else PadicNumber.zero(p, n)


def random_field(rng, params, vertices, r=1):
    w = params.working_precision
    return BoundaryField({x: PadicVec2(small(rng, params.prime, w, r), small(rng, params.prime, w, r)) for x in vertices})


# -- params and spins -----------------------------------------------------------


def test_domain_is_enforced():
    with pytest.raises(DomainError):
        ModelParams.create(3, 1, 3)
    with pytest.raises(DomainError):
        ModelParams.create(2, 2, 4)
    ModelParams.create(2, 4, 4)


def test_theta_close_to_one():
    P = ModelParams.create(7, 7, -49, 14)
    for x in (P.theta, P.kappa, P.theta1):
        assert (x - 1).norm <= Fraction(1, 7)


def test_config_round_trip():
    P = ModelParams.create(5, "5/2", {"num": 25, "den": 3}, 0, 10)
    again = ModelParams.from_json(json.loads(json.dumps(P.to_json())))
    assert again.J.agrees(P.J) and again.K.agrees(P.K) and again.H.is_zero()


def test_inhomogeneous_config_round_trip():
    data = {"p": 5, "J": 5, "K": 5, "H": 0, "couplings": {"J": [[[0, 0], [1, 1], 25]], "K": [[[1, 0], [1, 1], -5]]}}
    P = ModelParams.from_json(data)
    assert not P.homogeneous
    assert P.edge_J[Vertex(1, 1)].agrees(make(5, 25))
    assert P.pair_K[ROOT].agrees(make(5, -5))
    again = ModelParams.from_json(P.to_json())
    assert again.edge_J[Vertex(1, 1)].agrees(P.edge_J[Vertex(1, 1)])


def test_with_precision_re_embeds_exact_inputs():
    P = ModelParams.create(3, 3, "-9/7", 0, 8)
    Q = P.with_precision(20)
    assert Q.K.precision >= 20
    assert Q.K.agrees(P.K, P.K.precision)


def test_spin_basis():
    z = spin_basis(5)
    assert field_dot(z[1], 2).is_zero() and field_dot(z[2], 1).is_zero()
    assert field_dot(z[1], 1).agrees(make(5, 1))
    assert z[3].norm == 1
    assert (z[1] + z[2]).agrees(z[3])
    h = PadicVec2(make(5, 5), make(5, 10))
    assert field_dot(h, 3).agrees(make(5, 15))


# -- Hamiltonian and measures ----------------------------------------------------


def test_hamiltonian_examples():
    P = ModelParams.create(5, 5, 25, 10)
    t = build(1)
    J, K, H = P.J, P.K, P.H
    const1 = {x: 1 for x in t.vertices}
    const3 = {x: 3 for x in t.vertices}
    mixed = {ROOT: 1, Vertex(1, 0): 2, Vertex(1, 1): 3}
    assert hamiltonian(const1, P, t).agrees(-2 * J - K)
    assert hamiltonian(const3, P, t).agrees(-2 * J - K - 3 * H)
    assert hamiltonian(mixed, P, t).agrees(-H)


def test_hamiltonian_rejects_partial_config():
    with pytest.raises(ValueError):
        hamiltonian({ROOT: 1}, ModelParams.create(5, 5, 5), build(1))


def test_config_enumeration_is_bijective():
    vs = build(1).vertices
    seen = {config_index(config_from_index(i, vs), vs) for i in range(27)}
    assert seen == set(range(27))


def test_uniform_measure_without_interactions():
    P = ModelParams.create(5, 0, 0, 0)
    zero = PadicVec2.zero(5, P.working_precision)
    table = measure_table(BoundaryField.constant(zero), P, build(1))
    third = PadicNumber.from_rational(Fraction(1, 27), 5, P.precision)
    assert all(m.agrees(third, P.precision) for m in table)


def test_constant_config_weight():
    P = ModelParams.create(5, 5, 5, 0)
    t = build(1)
    f = BoundaryField.constant(PadicVec2.zero(5, P.working_precision))
    mu = measure({x: 1 for x in t.vertices}, f, P, t)
    want = exp_p(2 * P.J + P.K) / partition_function(f, P, t)
    assert mu.agrees(want, P.precision)
    assert mu.norm == 1


@pytest.mark.parametrize("p,H", [(3, 0), (3, 3), (5, 0), (5, 5), (7, 7), (2, 4)])
@pytest.mark.parametrize("depth", [1, 2])
def test_normalization(p, H, depth):
    rng = random.Random(p * 100 + depth)
    r = 2 if p in (2, 3) else 1
    P = ModelParams.create(p, p**r, -(p**r), H)
    t = build(depth)
    f = random_field(rng, P, t.boundary, r)
    total = sum(measure_table(f, P, t)[1:], measure_table(f, P, t)[0])
    assert total.agrees(make(p, 1), P.precision)


@pytest.mark.parametrize("p", [3, 5])
def test_every_summand_is_a_unit(p):
    rng = random.Random(p)
    P = ModelParams.create(p, p, p, p)
    f = random_field(rng, P, build(2).boundary)
    weights, digits = _weights(f, P, 2)
    assert all(w % p for w in weights)
    z = partition_function(f, P, build(2))
    assert z.valuation == (7 if p == 3 else 0)


def test_exp_route_matches_product_route():
    rng = random.Random(4)
    P = ModelParams.create(5, 5, 25, 5)
    t = build(2)
    f = random_field(rng, P, t.boundary)
    table = measure_table(f, P, t)
    for i in (0, 13, 500, 2186):
        sigma = config_from_index(i, t.vertices)
        assert measure(sigma, f, P, t).agrees(table[i], P.precision)


def test_literal_boundary_convention_is_a_shift():
    rng = random.Random(5)
    P = ModelParams.create(5, 5, 5, 5)
    t = build(2)
    f = random_field(rng, P, t.boundary)
    shift = PadicVec2(P.H, P.H)
    g = BoundaryField({x: f[x] - shift for x in t.boundary})
    a = measure_table(f, P, t, absorbed=True)
    b = measure_table(g, P, t, absorbed=False)
    assert all(x.agrees(y, P.precision) for x, y in zip(a, b))


# -- compatibility -----------------------------------------------------------------


@pytest.mark.parametrize("p,H", [(5, 0), (5, 5), (7, 0), (3, 0), (3, 3)])
def test_pulled_back_fields_are_compatible(p, H):
    rng = random.Random(p + H)
    r = 2 if p == 3 else 1  # keeps every transfer ratio inside the log domain at p = 3
    P = ModelParams.create(p, p, p, H)
    f = pull_back(random_field(rng, P, build(2).boundary, r), P, 2)
    rep = check_compatibility(f, P, 2)
    assert rep.passed, rep.reason
    assert rep.cylinders == 27 and rep.terms == 2187


@pytest.mark.parametrize("level", [1, 2])
def test_one_vertex_perturbation_is_caught(level):
    rng = random.Random(level)
    P = ModelParams.create(5, 5, 5, 0)
    f = pull_back(random_field(rng, P, build(2).boundary), P, 2)
    x = Vertex(level, 1)
    bump = PadicVec2(make(5, 5, 1, P.working_precision), PadicVec2.zero(5, P.working_precision).c2)
    rep = check_compatibility(f.updated({x: f[x] + bump}), P, 2)
    assert not rep.passed
    assert rep.max_violation > 0


def test_zero_field_compatible_only_without_external_field():
    zero = BoundaryField.constant(PadicVec2.zero(5, 24))
    assert check_compatibility(zero, ModelParams.create(5, 5, 25, 0), 2).passed
    assert not check_compatibility(zero, ModelParams.create(5, 5, 25, 5), 2).passed


def test_depth_budget_is_refused():
    zero = BoundaryField.constant(PadicVec2.zero(5, 24))
    with pytest.raises(ValueError):
        check_compatibility(zero, ModelParams.create(5, 5, 5), 3)


# -- kernels and recursion ---------------------------------------------------------


def _generic_ring():
    one = make(7, 1, 1, 12)
    v = [PadicMPoly.variable(i, 7, one) for i in range(7)]
    a1, a2, b, h1, h2, r1, r2 = v
    return a1, a2, b, (h1, h2), (r1, r2)


def _same_poly(f, g):
    keys = set(f.terms) | set(g.terms)
    for e in keys:
        x, y = f.terms.get(e), g.terms.get(e)
        if x is None or y is None:
            z = x if y is None else y
            assert z.is_zero(), e
        else:
            assert (x - y).is_zero(), e


def test_transfer_sums_expand_to_printed_kernels():
    a1, a2, b, h, r = _generic_ring()
    U = (h[0], h[1], h[0] * h[1])
    V = (r[0], r[1], r[0] * r[1])
    _same_poly(transfer_sum(3, a1, a2, b, U, V), F1(a1, a2, b, h, r))
    _same_poly(transfer_sum(1, a1, a2, b, U, V), F2(a1, a2, b, h, r))


def test_kernel_values_at_ones():
    P = ModelParams.create(5, 5, 10)
    th, ka, one = P.theta, P.kappa, P.one
    ones = (one, one)
    want = th * th * ka + 4 * th + 2 * ka + 2
    assert F1(th, th, ka, ones, ones).agrees(want)
    assert F2(th, th, ka, ones, ones).agrees(want)
    assert F2(1, 1, 1, (1, 1), (1, 1)) == 9


def test_F1_symmetries():
    rng = random.Random(9)
    p = 5
    args = [make(p, 1 + p * rng.randrange(1000)) for _ in range(7)]
    a1, a2, b, h1, h2, r1, r2 = args
    base = F1(a1, a1, b, (h1, h2), (r1, r2))
    assert base.agrees(F1(a1, a1, b, (r1, r2), (h1, h2)))
    assert base.agrees(F1(a1, a1, b, (h2, h1), (r2, r1)))


@pytest.mark.parametrize("p", [3, 5, 7])
def test_recursion_paths_agree(p):
    rng = random.Random(p)
    r = 2 if p == 3 else 1
    P = ModelParams.create(p, p**r, -(p**r), p)
    for _ in range(25):
        hy = PadicVec2(small(rng, p, P.working_precision, r), small(rng, p, P.working_precision, r))
        hz = PadicVec2(small(rng, p, P.working_precision, r), small(rng, p, P.working_precision, r))
        assert recursion_step(hy, hz, P).agrees(recursion_step_kernels(hy, hz, P), P.precision)


def test_recursion_fixes_zero_without_field():
    P = ModelParams.create(5, 5, 5, 0)
    z = PadicVec2.zero(5, P.working_precision)
    out = recursion_step(z, z, P)
    assert out.c1.is_zero() and out.c2.is_zero()


def test_recursion_swap_symmetry():
    rng = random.Random(2)
    P = ModelParams.create(7, 7, 14, 7)
    for _ in range(10):
        hy = PadicVec2(small(rng, 7, P.working_precision), small(rng, 7, P.working_precision))
        hz = PadicVec2(small(rng, 7, P.working_precision), small(rng, 7, P.working_precision))
        assert recursion_step(hy, hz, P).agrees(recursion_step(hz, hy, P), P.precision)


@pytest.mark.parametrize("p", [5, 7])
def test_field_norm_contraction(p):
    rng = random.Random(p * 3)
    P = ModelParams.create(p, p, -p, 0)
    for _ in range(50):
        hy = PadicVec2(small(rng, p, P.working_precision), small(rng, p, P.working_precision))
        hz = PadicVec2(small(rng, p, P.working_precision), small(rng, p, P.working_precision))
        out = recursion_step(hy, hz, P)
        assert out.norm <= Fraction(1, p) * max(hy.norm, hz.norm)


# -- translation-invariant system ---------------------------------------------------


def test_trivial_root_without_field():
    for p in (3, 5, 7):
        P = ModelParams.create(p, p, 2 * p, 0)
        one = P.one
        for eq in ti_system(P):
            assert eq((one, one)).is_zero()


def test_difference_vanishes_on_diagonal_and_leading_factor():
    for p in (3, 5, 7, 11):
        P = ModelParams.create(p, p, p, 0)
        e1, e2 = ti_system(P)
        rng = random.Random(p)
        for _ in range(5):
            u = make(p, 1 + p * rng.randrange(p**6), 1, P.working_precision)
            assert (e1 - e2)((u, u)).is_zero()
        g_line = (e1 - e2).substitute(1, P.one).to_univariate(0)
        g, rem = g_line.deflate(P.one)
        assert rem.is_zero()
        assert g(P.one).residue(1) == 9 % p


def test_symmetric_restriction_matches_map():
    rng = random.Random(1)
    P = ModelParams.create(5, 5, 25, 5)
    f = symmetric_map(P)
    e1, _ = ti_system(P)
    th, ka = P.theta, P.kappa
    for _ in range(10):
        u = make(5, 1 + 5 * rng.randrange(5**8), 1, P.working_precision)
        t2 = ka * u**4 + 2 * (th + 1) * u**3 + (th * th * ka + 2 * th + ka) * u**2
        assert e1((u, u)).agrees(t2 * (u - f(u)), P.precision)


def test_symmetric_map_fixes_one_without_field():
    P = ModelParams.create(5, 5, 5, 0)
    assert symmetric_map(P)(P.one).agrees(P.one)


def test_line_reduction():
    P = ModelParams.create(3, 3, 3, 0)
    red = line_quadratic(P)
    assert red.remainder.is_zero()
    assert red.quadratic.degree == 2
    assert red.diff, "derived and printed quadratics should differ"
    assert [d["power"] for d in red.diff] == [0, 1]
    assert red.derived_value_at_one.residue(2) == 0
    assert printed_line_quadratic(P)(P.one).residue(1) == 5 % 3


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_derived_quadratic_at_one_vanishes_mod_p_only_at_three(p):
    P = ModelParams.create(p, p, p, 0)
    at_one = line_quadratic(P).derived_value_at_one
    assert (at_one.residue(1) == 0) == (p == 3)


def test_line_reduction_needs_zero_field():
    with pytest.raises(ValueError):
        line_quadratic(ModelParams.create(5, 5, 5, 5))


def test_low_precision_partition_function_error():
    P = ModelParams.create(3, 3, 3, 0, 4)
    f = BoundaryField.constant(PadicVec2.zero(3, 2))
    with pytest.raises(PrecisionError):
        measure_table(f, P, build(2))
