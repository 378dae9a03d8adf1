import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rbnedit import landscape as ls
from rbnedit import prng


def brute_nk(L, traits):
    """Naive recomputation: spell each key out as a binary string."""
    total = 0.0
    for i in range(L.N):
        bits = [traits[i]] + [traits[j] for j in L.neighbors[i]]
        total += L.table[i][int("".join(str(int(b)) for b in bits), 2)]
    return total / L.N


def brute_nkcs(L, own, partners):
    total = 0.0
    for i in range(L.N):
        bits = [own[i]] + [own[j] for j in L.neighbors[i]]
        for s in range(L.S):
            bits += [partners[s][j] for j in L.partner_neighbors[i][s]]
        total += L.table[i][int("".join(str(int(b)) for b in bits), 2)]
    return total / L.N


def all_vectors(n):
    return [np.array(v, dtype=np.uint8) for v in itertools.product((0, 1), repeat=n)]


def test_table_sizes(root):
    assert ls.generate_nk(10, 0, root.derive("a")).table.shape == (10, 2)
    assert ls.generate_nk(10, 5, root.derive("a")).table.shape == (10, 64)
    assert ls.generate_nkcs(10, 0, 1, 1, root.derive("a")).table.shape == (10, 4)
    assert ls.generate_nkcs(10, 5, 5, 1, root.derive("a")).table.shape == (10, 2048)


def test_neighbors_and_range(root):
    L = ls.generate_nkcs(10, 4, 3, 2, root.derive("a"))
    for i in range(10):
        assert len(set(L.neighbors[i].tolist())) == 4 and i not in L.neighbors[i]
        for s in range(2):
            assert len(set(L.partner_neighbors[i][s].tolist())) == 3
    assert L.table.min() >= 0.0 and L.table.max() < 1.0


def test_determinism(root):
    a = ls.generate_nkcs(6, 2, 2, 1, prng.root(3).derive("landscape/0"))
    b = ls.generate_nkcs(6, 2, 2, 1, prng.root(3).derive("landscape/0"))
    assert ls.dumps(a) == ls.dumps(b)


@pytest.mark.parametrize("N,K", [(3, 3), (1, 1), (0, 0)])
def test_invalid_nk(root, N, K):
    with pytest.raises(ValueError):
        ls.generate_nk(N, K, root)


def test_invalid_nkcs(root):
    with pytest.raises(ValueError):
        ls.generate_nkcs(4, 1, 0, 1, root)
    with pytest.raises(ValueError):
        ls.generate_nkcs(4, 1, 5, 1, root)
    with pytest.raises(ValueError):
        ls.generate_nkcs(4, 1, 1, 0, root)


def test_single_lookup():
    L = ls.NkLandscape(1, 0, np.zeros((1, 0), dtype=np.int32), np.array([[0.25, 0.75]]))
    assert ls.evaluate_nk(L, [1]) == 0.75
    assert ls.evaluate_nk(L, [0]) == 0.25


def test_n4_k2_oracle(root):
    L = ls.generate_nk(4, 2, root.derive("o"))
    for v in all_vectors(4):
        assert ls.evaluate_nk(L, v) == brute_nk(L, v)


def test_nkcs_n3_oracle(root):
    L = ls.generate_nkcs(3, 1, 1, 1, root.derive("o"))
    for own in all_vectors(3):
        for p in all_vectors(3):
            assert ls.evaluate_nkcs(L, own, [p]) == brute_nkcs(L, own, [p])


def test_zero_partners_use_subtable(root):
    L = ls.generate_nkcs(4, 1, 2, 1, root.derive("z"))
    zero = np.zeros(4, dtype=np.uint8)
    for own in all_vectors(4):
        expected = 0.0
        for i in range(4):
            key = (int(own[i]) << 1 | int(own[L.neighbors[i][0]])) << 2
            expected += L.table[i][key]
        assert ls.evaluate_nkcs(L, own, [zero]) == pytest.approx(expected / 4, abs=1e-15)


def test_wrong_partner_count(root):
    L = ls.generate_nkcs(4, 1, 1, 1, root)
    with pytest.raises(ValueError):
        ls.evaluate_nkcs(L, np.zeros(4), [np.zeros(4), np.zeros(4)])


def test_nkcs_results_in_unit_interval(root):
    L = ls.generate_nkcs(10, 3, 2, 1, root.derive("u"))
    gen = root.derive("v").generator
    for _ in range(10**4 // 20):
        own = gen.integers(0, 2, 10)
        p = gen.integers(0, 2, (1, 10))
        f = ls.evaluate_nkcs(L, own, p)
        assert 0.0 <= f <= 1.0


@given(N=st.integers(1, 4), K=st.integers(0, 2), seed=st.integers(0, 2**32))
def test_oracle_equivalence_property(N, K, seed):
    K = min(K, N - 1)
    r = prng.root(seed)
    L = ls.generate_nk(N, K, r.derive("nk"))
    for v in all_vectors(N):
        assert ls.evaluate_nk(L, v) == brute_nk(L, v)
    Lc = ls.generate_nkcs(N, K, 1, 1, r.derive("nkcs"))
    for own in all_vectors(N):
        for p in all_vectors(N):
            assert ls.evaluate_nkcs(Lc, own, [p]) == brute_nkcs(Lc, own, [p])


@given(seed=st.integers(0, 2**32), j=st.integers(0, 5))
def test_k0_perturbation_touches_one_term(seed, j):
    r = prng.root(seed)
    L = ls.generate_nk(6, 0, r)
    traits = r.next_bits(6)
    flipped = traits.copy()
    flipped[j] ^= 1
    delta = ls.evaluate_nk(L, flipped) - ls.evaluate_nk(L, traits)
    expected = (L.table[j][flipped[j]] - L.table[j][traits[j]]) / 6
    assert delta == pytest.approx(expected, abs=1e-15)


def test_dump_roundtrip(root, tmp_path):
    for L in (ls.generate_nk(5, 2, root.derive("a")), ls.generate_nkcs(5, 2, 2, 2, root.derive("b"))):
        path = tmp_path / "l.txt"
        ls.save(L, path)
        back = ls.load(path)
        assert type(back) is type(L)
        assert np.array_equal(back.table, L.table) and np.array_equal(back.neighbors, L.neighbors)
        assert ls.digest(back) == ls.digest(L)
    with pytest.raises(ValueError):
        ls.loads("garbage\n")
