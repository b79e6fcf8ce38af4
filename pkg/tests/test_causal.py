import numpy as np
import pytest

from causal_channels.causal import (
    AggregateWiring,
    CausalOrder,
    CausalOrderError,
    OpLabel,
    all_orders,
    build_q_channels,
    find_causal_violation,
    linear_extension,
    past_set,
    protocol_to_wired_form,
    reconstruct_locc,
    respects_causal_order,
)
from causal_channels.channels import choi_distance, random_instrument, validate_instrument
from causal_channels.composition import (
    compose_locc_protocol,
    compose_wired,
    delta_wiring,
)
from causal_channels.selftest import _bsc_fixture, _memoryful_fixture, _random_protocol


def test_causal_order_closure_and_cycles():
    order = CausalOrder(2, 1, frozenset({(OpLabel("A", 2), OpLabel("B", 1))}))
    # within-party edges and transitivity are implied
    assert order.precedes(OpLabel("A", 1), OpLabel("A", 2))
    assert order.precedes(OpLabel("A", 1), OpLabel("B", 1))
    with pytest.raises(CausalOrderError):
        CausalOrder(
            1,
            1,
            frozenset({(OpLabel("A", 1), OpLabel("B", 1)), (OpLabel("B", 1), OpLabel("A", 1))}),
        )


def test_all_orders_enumeration_counts():
    # one operation per party: unordered, A<B, B<A
    assert sum(1 for _ in all_orders(1, 1)) == 3


def test_past_set():
    order = CausalOrder(1, 1, frozenset({(OpLabel("A", 1), OpLabel("B", 1))}))
    assert past_set(order, [OpLabel("B", 1)]) == {OpLabel("A", 1)}
    assert past_set(order, [OpLabel("A", 1)]) == set()


def test_loop_wiring_violates_every_order():
    dist = delta_wiring((2, 2), (2, 2), (1, 0))
    w = AggregateWiring(1, 1, dist)
    for order in all_orders(1, 1):
        witness = find_causal_violation(w, order)
        assert witness is not None
        k, l, label = witness
        assert isinstance(label, OpLabel)


def test_one_way_copy_wiring_respects_only_matching_orders():
    # i_A pinned, i_B copies o_A: needs A before B
    dist = delta_wiring((1, 2), (2, 2), (("const", 0), 0))
    w = AggregateWiring(1, 1, dist)
    a_first = CausalOrder(1, 1, frozenset({(OpLabel("A", 1), OpLabel("B", 1))}))
    b_first = CausalOrder(1, 1, frozenset({(OpLabel("B", 1), OpLabel("A", 1))}))
    assert respects_causal_order(w, a_first)
    assert not respects_causal_order(w, b_first)


def test_linear_extension_orders_and_tie_breaks():
    order = CausalOrder(1, 1, frozenset({(OpLabel("B", 1), OpLabel("A", 1))}))
    ext = linear_extension(order)
    assert ext.sequence == (OpLabel("B", 1), OpLabel("A", 1))
    unordered = CausalOrder(1, 1)
    assert linear_extension(unordered).sequence == (OpLabel("A", 1), OpLabel("B", 1))


def test_q_channels_multiply_back_to_the_wiring():
    rng = np.random.default_rng(0)
    _, _, w, order = _bsc_fixture(rng)
    ext = linear_extension(order)
    channels = build_q_channels(w, ext)
    # product of the per-step conditionals reproduces the wiring table
    q = w.dist.table.transpose((0, 1, 2, 3))  # already in extension order (A then B)
    prod = np.ones_like(q)
    r1 = channels[0].table  # (I_A,)
    r2 = channels[1].table  # (I_A, I_B, O_A)
    for i_a in range(1):
        for i_b in range(2):
            for o_a in range(2):
                for o_b in range(2):
                    prod[i_a, i_b, o_a, o_b] = r1[i_a] * r2[i_a, i_b, o_a]
    assert np.allclose(prod, q, atol=1e-12)


def test_protocols_respect_their_own_order():
    rng = np.random.default_rng(1)
    for parties in (["A", "B"], ["B", "A"], ["A", "B", "A", "B"]):
        p = _random_protocol(parties, rng)
        _, _, wiring, order = protocol_to_wired_form(p)
        assert respects_causal_order(wiring, order)


def test_reconstruction_matches_direct_contraction():
    rng = np.random.default_rng(2)
    for fixture in (_bsc_fixture(rng), _memoryful_fixture(rng)):
        ar, br, wiring, order = fixture
        rebuilt = reconstruct_locc(ar, br, wiring, order)
        for _, inst in rebuilt.rounds:
            assert validate_instrument(inst, 1e-9)
        parties = [p for p, _ in rebuilt.rounds]
        assert all(parties[k] != parties[k + 1] for k in range(len(parties) - 1))
        d = choi_distance(compose_locc_protocol(rebuilt), compose_wired(ar, br, wiring.dist))
        assert d < 1e-8


def test_reconstruction_of_a_standard_protocol_is_faithful():
    rng = np.random.default_rng(3)
    p = _random_protocol(["A", "B", "A", "B"], rng)
    ar, br, wiring, order = protocol_to_wired_form(p)
    rebuilt = reconstruct_locc(ar, br, wiring, order)
    assert choi_distance(compose_locc_protocol(rebuilt), compose_locc_protocol(p)) < 1e-8


def test_reconstruction_rejects_violating_wirings():
    rng = np.random.default_rng(4)
    dist = delta_wiring((2, 2), (2, 2), (1, 0))
    w = AggregateWiring(1, 1, dist)
    ar = [random_instrument(2, 2, 2, 2, 1, rng)]
    br = [random_instrument(2, 2, 2, 2, 1, rng)]
    order = CausalOrder(1, 1, frozenset({(OpLabel("A", 1), OpLabel("B", 1))}))
    with pytest.raises(CausalOrderError):
        reconstruct_locc(ar, br, w, order)
