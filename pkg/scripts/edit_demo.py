"""Step a five-node network through one RNA edit and print the wiring.

Node 3 is editable. From the all-zero start it switches on with its gRNA,
so on the next cycle its out-connections move to nodes 1 and 4; one cycle
later the original wiring is back.
"""

import numpy as np

from rbnedit import network as nw
from rbnedit import prng

OR2, ZERO2 = [0, 1, 1, 1], [0, 0, 0, 0]


def build() -> nw.Genome:
    i32 = dict(dtype=np.int32)
    reconnect = np.full((5, 4, 3), -1, **i32)
    reconnect[3, 0, :2] = [1, 4]
    return nw.Genome(
        R=5, B=2, Bp=2, n_input=0,
        start=np.zeros(5, dtype=np.uint8),
        ttable=np.array([OR2, OR2, OR2, [1, 0, 0, 0], OR2], dtype=np.uint8),
        inputs=np.array([[3, 2], [0, 2], [4, 3], [0, 2], [0, 1]], **i32),
        editable=np.array([0, 0, 0, 1, 0], dtype=np.uint8),
        gtable=np.array([ZERO2, ZERO2, ZERO2, [1, 0, 0, 0], ZERO2], dtype=np.uint8),
        ginputs=np.array([[-1, -1]] * 3 + [[3, 0], [-1, -1]], **i32),
        reconnect=reconnect,
        trait_ids=np.arange(5, dtype=np.int32),
    )


def main():
    g = build()
    nw.validate(g)
    rng = prng.root(0)
    st = nw.initial_state(g)
    print(f"t=0 nodes={st.node_states.tolist()} gRNA={st.grna_states.tolist()}")
    for t in range(1, 4):
        st, w = nw.step(g, st, rng=rng, return_wiring=True)
        srcs = {u: w.sources(u) for u in range(g.R)}
        print(f"t={t} nodes={st.node_states.tolist()} gRNA={st.grna_states.tolist()} inputs={srcs}")


if __name__ == "__main__":
    main()
