import numpy as np
import pytest
from hypothesis import given, strategies as st

from rbnedit import landscape as ls
from rbnedit import network as nw
from rbnedit import prng
from rbnedit.network import Genome, NetworkParams

OR2 = [0, 1, 1, 1]
ZERO2 = [0, 0, 0, 0]


def a(x, dtype=np.int32):
    return np.array(x, dtype=dtype)


def five_node(rows=((1, 4),)):
    """Five nodes, B=B'=2. Node 3 is editable and feeds node 0 slot 0 and node 2 slot 1.

    From the all-zero start node 3 switches on, its gRNA is active (row 0),
    then the gRNA goes off because node 3 is among its own gRNA inputs.
    """
    inputs = a([[3, 2], [0, 2], [4, 3], [0, 2], [0, 1]])
    ttable = a([OR2, OR2, OR2, [1, 0, 0, 0], OR2], np.uint8)
    editable = a([0, 0, 0, 1, 0], np.uint8)
    gtable = a([ZERO2, ZERO2, ZERO2, [1, 0, 0, 0], ZERO2], np.uint8)
    ginputs = a([[-1, -1], [-1, -1], [-1, -1], [3, 0], [-1, -1]])
    reconnect = np.full((5, 4, 3), -1, dtype=np.int32)
    reconnect[3, 0, :2] = rows[0]
    return Genome(5, 2, 2, 0, np.zeros(5, dtype=np.uint8), ttable, inputs, editable,
                  gtable, ginputs, reconnect, a([0, 1, 2, 3, 4]))


def test_edit_scenario_wiring_and_reset():
    g = five_node()
    nw.validate(g)
    rng = prng.root(1).derive("edit")
    st0 = nw.initial_state(g)
    assert st0.grna_states.tolist() == [0, 0, 0, 1, 0]

    st1, w1 = nw.step(g, st0, rng=rng, return_wiring=True)
    assert st1.node_states.tolist() == [0, 0, 0, 1, 0]
    assert st1.grna_states[3] == 1 and st1.grna_rows[3] == 0
    assert w1.extras == [] and np.array_equal(w1.slots, g.inputs)

    st2, w2 = nw.step(g, st1, rng=rng, return_wiring=True)
    # node 3 no longer feeds nodes 0 and 2; it feeds nodes 1 and 4 instead
    assert w2.slots[0].tolist() == [-1, 2] and w2.slots[2].tolist() == [4, -1]
    assert w2.sources(1) == [0, 2, 3] and w2.sources(4) == [0, 1, 3]
    assert 3 not in w2.sources(0) and 3 not in w2.sources(2)
    assert st2.node_states.tolist() == [0, 1, 0, 1, 1]
    assert st2.grna_states[3] == 0

    st3, w3 = nw.step(g, st2, rng=rng, return_wiring=True)
    # the edit lasted one cycle: original wiring is back
    assert w3.extras == [] and np.array_equal(w3.slots, g.inputs)
    assert st3.node_states.tolist() == [1, 0, 1, 1, 1]


def test_new_targets_fill_vacated_slots_first():
    g = five_node(rows=((0, 4),))
    st1 = nw.step(g, nw.initial_state(g))
    st2, w = nw.step(g, st1, rng=prng.root(2), return_wiring=True)
    assert w.slots[0].tolist() == [3, 2]
    assert [(u, src) for u, _, src in w.extras] == [(4, 3)]
    # node 0 reads node 3 (on) through the refilled slot
    assert st2.node_states[0] == 1


def test_step_leaves_state_untouched():
    g = five_node()
    st0 = nw.initial_state(g)
    before = st0.node_states.copy()
    nw.step(g, st0)
    assert np.array_equal(before, st0.node_states)


def naive_trajectory(g, cycles, clamp):
    """Plain synchronous RBN with slot 0 as most significant bit."""
    s = [int(x) for x in g.start]
    out = []
    for _ in range(cycles):
        for i, bit in enumerate(clamp):
            s[i] = bit
        nxt = []
        for u in range(g.R):
            key = "".join(str(s[src]) for src in g.inputs[u])
            nxt.append(int(g.ttable[u][int(key, 2)]))
        s = nxt
        out.append(list(s))
    return out


def test_plain_network_matches_naive_stepper():
    root = prng.root(99)
    for i in range(100):
        r = root.derive(f"genome/{i}")
        R = 4 + r.next_index(29)
        B = 1 + r.next_index(3)
        n_input = r.next_index(3)
        g = nw.init_genome(NetworkParams(R, min(4, R), B, n_input=n_input, editing=False), r)
        clamp = [r.next_index(2) for _ in range(n_input)]
        ref = naive_trajectory(g, 100, clamp)
        st = nw.initial_state(g)
        for c in range(100):
            st = nw.step(g, st, input=clamp)
            assert st.node_states.tolist() == ref[c]
        # the compiled lifetime loop agrees too
        L = ls.flat_nk(g.N, 0)
        sched = nw.Schedule(np.tile(np.array(clamp, dtype=np.uint8), (100, 1)).reshape(100, n_input),
                            np.zeros(100, dtype=np.int32))
        for skip in (False, True):
            _, trace = nw.run_episode(g, L, sched, r, with_trace=True, skip_attractors=skip)
            expected = np.array(ref, dtype=np.uint8)[:, g.trait_ids]
            assert np.array_equal(trace, expected)


def test_out_degree_ring():
    R = 6
    inputs = a([[(u - 1) % R] for u in range(R)])
    g = Genome(R, 1, 1, 0, np.zeros(R, np.uint8), np.zeros((R, 2), np.uint8), inputs,
               np.zeros(R, np.uint8), np.zeros((R, 2), np.uint8), np.full((R, 1), -1, np.int32),
               np.full((R, 2, 1), -1, np.int32), a([0]))
    assert [nw.out_degree(g, v) for v in range(R)] == [1] * R
    with pytest.raises(IndexError):
        nw.out_degree(g, R)


@given(seed=st.integers(0, 2**32), B=st.integers(1, 5), coupled=st.booleans())
def test_out_degree_sum_and_validity(seed, B, coupled):
    R, N = 30, 10
    g = nw.init_genome(NetworkParams(R, N, B, coupled=coupled), prng.root(seed))
    nw.validate(g)
    partner = N if coupled else 0
    assert sum(nw.out_degree(g, v) for v in range(R)) == R * B - partner


def test_one_cycle_edits_on_random_genomes():
    """Each cycle's effective wiring follows from the genome alone, never from earlier edits."""
    root = prng.root(5)
    for i in range(20):
        r = root.derive(f"g/{i}")
        g = nw.init_genome(NetworkParams(20, 5, 3, p_editable=0.8), r)
        st = nw.initial_state(g)
        for _ in range(30):
            nxt, w = nw.step(g, st, rng=r, return_wiring=True)
            firing = [v for v in range(g.R)
                      if g.editable[v] and st.node_states[v] and st.grna_states[v]]
            expected = g.inputs.astype(np.int64).copy()
            for v in firing:
                expected[expected == v] = -1
            if not firing:
                assert w.extras == [] and np.array_equal(w.slots, g.inputs)
            # slots not touched by a firing node keep the genome's source
            untouched = (expected != -1)
            assert np.array_equal(w.slots[untouched], expected[untouched])
            st = nxt


def recompute_mean(L, trace):
    return sum(ls.evaluate_nk(L, row) for row in trace) / len(trace)


@pytest.mark.parametrize("B", [1, 2, 3, 5])
def test_trace_replay_oracle(B):
    r = prng.root(B)
    g = nw.init_genome(NetworkParams(8, 8, B), r)
    L = ls.generate_nk(8, 2, r.derive("land"))
    mean, trace = nw.run_episode(g, L, nw.constant_schedule(100, 0), r, with_trace=True)
    assert mean == pytest.approx(recompute_mean(L, trace), rel=1e-12)


@pytest.mark.parametrize("B", [1, 2, 3, 5])
@pytest.mark.parametrize("switching", [False, True])
def test_attractor_skip_matches_full_simulation(B, switching):
    root = prng.root(40 + B)
    for i in range(25):
        r = root.derive(f"g/{i}")
        g = nw.init_genome(NetworkParams(30, 10, B, n_input=10), r)
        L1 = ls.generate_nk(10, 2, r.derive("l/1"))
        L2 = ls.generate_nk(10, 2, r.derive("l/2"))
        sched = nw.switching_schedule(100, 10) if switching else nw.constant_schedule(100, 10)
        full_rng, skip_rng = r.derive("run"), r.derive("run")
        m1, t1 = nw.run_episode(g, [L1, L2], sched, full_rng, with_trace=True, skip_attractors=False)
        m2, t2 = nw.run_episode(g, [L1, L2], sched, skip_rng, with_trace=True, skip_attractors=True)
        assert m1 == m2 and np.array_equal(t1, t2)
        assert full_rng.next_unit() == skip_rng.next_unit()


@given(seed=st.integers(0, 2**32), R=st.integers(1, 12), B=st.integers(1, 3))
def test_plain_network_reaches_cycle(seed, R, B):
    g = nw.init_genome(NetworkParams(R, 1, B, editing=False), prng.root(seed))
    st = nw.initial_state(g)
    seen = {}
    for c in range(2 ** R + 1):
        key = st.node_states.tobytes()
        if key in seen:
            break
        seen[key] = c
        st = nw.step(g, st)
    else:
        pytest.fail("no repeated state within 2^R cycles")
    period = c - seen[key]
    assert 1 <= period <= 2 ** R
    later = st
    for _ in range(period):
        later = nw.step(g, later)
    assert np.array_equal(later.node_states, st.node_states)


def test_genome_dump_roundtrip(tmp_path):
    r = prng.root(3)
    for coupled in (False, True):
        g = nw.init_genome(NetworkParams(12, 4, 3, coupled=coupled), r)
        path = tmp_path / "g.txt"
        nw.save(g, path)
        back = nw.load(path)
        nw.validate(back)
        assert nw.dumps(back) == nw.dumps(g)
        for name in ("start", "ttable", "inputs", "editable", "gtable", "ginputs", "reconnect", "trait_ids"):
            assert np.array_equal(getattr(back, name), getattr(g, name))


def test_validate_rejects_bad_reconnect():
    g = five_node()
    bad = g.reconnect.copy()
    bad[3, 0, 1] = -1
    with pytest.raises(nw.GenomeInvariantError):
        nw.validate(g.evolve(reconnect=bad))


def test_malformed_list_raises_during_step():
    g = five_node()
    bad = g.reconnect.copy()
    bad[3, 0, 1] = -1
    broken = g.evolve(reconnect=bad)
    st1 = nw.step(broken, nw.initial_state(broken))
    with pytest.raises(nw.GenomeInvariantError):
        nw.step(broken, st1, rng=prng.root(0))


def test_genome_arrays_are_read_only():
    g = five_node()
    with pytest.raises(ValueError):
        g.inputs[0, 0] = 1


def test_coupled_pair_ordering():
    """b reads a's traits from the same cycle, a reads b's from the previous one."""
    r = prng.root(8)
    p = NetworkParams(10, 4, 2, coupled=True, editing=False)
    ga, gb = nw.init_genome(p, r.derive("a")), nw.init_genome(p, r.derive("b"))
    La = ls.generate_nkcs(4, 1, 1, 1, r.derive("la"))
    Lb = ls.generate_nkcs(4, 1, 1, 1, r.derive("lb"))
    fa, fb, ta, tb = nw.run_pair(ga, gb, La, Lb, 20, r, with_trace=True)
    sa, sb = nw.initial_state(ga), nw.initial_state(gb)
    prev_b = sb.node_states[gb.trait_ids]
    for c in range(20):
        sa = nw.step(ga, sa, external_traits=prev_b)
        traits_a = sa.node_states[ga.trait_ids]
        sb = nw.step(gb, sb, external_traits=traits_a)
        prev_b = sb.node_states[gb.trait_ids]
        assert np.array_equal(ta[c], traits_a) and np.array_equal(tb[c], prev_b)
    exp_a = sum(ls.evaluate_nkcs(La, ta[c], [tb[c]]) for c in range(20)) / 20
    exp_b = sum(ls.evaluate_nkcs(Lb, tb[c], [ta[c]]) for c in range(20)) / 20
    assert fa == pytest.approx(exp_a, rel=1e-12) and fb == pytest.approx(exp_b, rel=1e-12)
