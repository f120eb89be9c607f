from __future__ import annotations

import itertools
import json
import random

import numpy as np
import pytest

from oracles import simulate_reference
from spdplab.arithmetizer.dtm import (
    EXAMPLE_MACHINES,
    DtmSpec,
    Tableau,
    accepts,
    compile_dtm,
    first_bit_one,
    locality_radius,
    parity_machine,
    simulate,
    solutions,
    tape_width,
)
from spdplab.errors import DomainError, SizeError
from spdplab.ffpoly import FieldCtx, evaluate
from spdplab.workloads import cube_values

MACHINES = [(name, make()) for name, make in EXAMPLE_MACHINES.items()] + [("parity_2", parity_machine(2))]


def reference_runs(spec, n, T):
    W = tape_width(n, T)
    halting = {spec.acc, spec.rej}
    out = {}
    for x in itertools.product((0, 1), repeat=n):
        out[x] = simulate_reference(spec.delta, spec.q0, halting, x, T, W)
    return out


def test_simulator_matches_reference():
    for _, spec in MACHINES:
        for n in range(0, 4):
            for T in range(0, 7):
                for x, ref in reference_runs(spec, n, T).items():
                    got = [(c.state, c.head, c.tape) for c in simulate(spec, x, T)]
                    assert got == ref


@pytest.mark.parametrize("name,spec", MACHINES)
@pytest.mark.parametrize("n,T", [(1, 1), (2, 2), (2, 3), (3, 4)])
def test_solutions_are_exactly_accepting_runs(name, spec, n, T):
    comp = compile_dtm(spec, n, T)
    tb = comp.tableau
    sols = solutions(comp)
    want = set()
    for x, ref in reference_runs(spec, n, T).items():
        if ref[-1][0] == spec.acc:
            want.add(tuple(tb.point(x, simulate(spec, x, T))))
    assert set(sols) == want
    assert len(sols) == len(want)
    for a in sols:
        assert comp.accepts_point(a)


def test_first_bit_one_full_cube():
    comp = compile_dtm(first_bit_one(), 1, 1)
    assert comp.tableau.nvars == 21
    vals = cube_values(comp.poly, cap=21)
    hits = np.flatnonzero(vals == 1)
    pt = comp.tableau.point((1,), simulate(first_bit_one(), (1,), 1))
    assert list(hits) == [sum(b << i for i, b in enumerate(pt))]


@pytest.mark.parametrize("name,spec", MACHINES)
def test_degree_bounds(name, spec):
    comp = compile_dtm(spec, 2, 3)
    assert max(c.poly.degree() for c in comp.constraints) <= 3
    assert comp.poly.degree() <= 6
    assert comp.square_bound < comp.poly.ctx.modulus


@pytest.mark.parametrize("name,spec", MACHINES)
def test_constraints_are_local(name, spec):
    comp = compile_dtm(spec, 3, 4)
    for c in comp.constraints:
        dt, di = locality_radius(comp, c)
        assert dt <= 1 and di <= 2, c.kind


def test_aggregate_identity_on_perturbed_points():
    rng = random.Random(3)
    spec = EXAMPLE_MACHINES["one_of_first_two"]()
    comp = compile_dtm(spec, 2, 3)
    ctx = comp.poly.ctx
    base = comp.tableau.point((0, 1), simulate(spec, (0, 1), 3))
    assert evaluate(comp.poly, base) == 1 and comp.violations(base) == 0
    for _ in range(200):
        a = list(base)
        for v in rng.sample(range(len(a)), rng.randint(1, 4)):
            a[v] ^= 1
        total = sum(ctx.signed(evaluate(c.poly, a)) ** 2 for c in comp.constraints)
        assert evaluate(comp.poly, a) == ctx(1 - total)


def test_rejecting_run_violates_only_acceptance():
    spec = first_bit_one()
    comp = compile_dtm(spec, 1, 2)
    a = comp.tableau.point((0,), simulate(spec, (0,), 2))
    assert comp.violations(a) == 1
    assert [c.kind for c in comp.constraints if evaluate(c.poly, a)] == ["accept"]
    assert evaluate(comp.poly, a) == 0
    assert not comp.accepts_point(a)


def test_size_and_domain_caps():
    spec = first_bit_one()
    with pytest.raises(SizeError):
        compile_dtm(spec, 1, 9)
    with pytest.raises(SizeError):
        compile_dtm(spec, 5, 2)
    with pytest.raises(DomainError):
        compile_dtm(spec, -1, 2)
    with pytest.raises(DomainError):
        compile_dtm(spec, 2, 3, ctx=FieldCtx(101))


def test_spec_validation_and_json():
    spec = EXAMPLE_MACHINES["flip_and_check"]()
    back = DtmSpec.from_json(json.dumps(spec.to_json()))
    assert back == spec
    with pytest.raises(DomainError):
        DtmSpec(("q0", "acc", "rej"), {("q0", 0): ("acc", 0, "S")}, "q0", "acc", "rej")
    with pytest.raises(DomainError):
        DtmSpec(("q0", "acc", "rej"), {("q0", 0): ("acc", 0, "X"), ("q0", 1): ("acc", 1, "S")}, "q0", "acc", "rej")
    with pytest.raises(DomainError):
        DtmSpec(("q0", "acc", "rej"), {("q0", "_"): ("acc", 0, "S"), ("q0", 0): ("rej", 0, "S"), ("q0", 1): ("acc", 1, "S")}, "q0", "acc", "rej")
    with pytest.raises(DomainError):
        DtmSpec.from_json('{"states": ["a"]}')


def test_parity_machine_semantics():
    spec = parity_machine(3)
    for x in itertools.product((0, 1), repeat=3):
        assert accepts(spec, x, 5) == bool(sum(x) % 2)


def test_tableau_layout_is_time_major():
    tb = Tableau.layout(2, 2, ("q0", "acc", "rej"))
    assert tb.W == 3
    assert tb.x == [0, 1]
    assert max(tb.s[0].values()) < min(tb.s[1].values())
    assert len(tb.y) == 2 * 3 * 3
