"""Compiled inner loops for network dynamics and landscape lookups.

Random slot choices for surplus connections come from a SplitMix64 state
(``rstate``, a one-element uint64 array) seeded once per lifetime by the
caller, so a lifetime consumes exactly one draw from its parent stream.

Slot source codes in ``primary``: ``>= 0`` node id, ``VACATED`` (the source was
edited away; reads as 0), ``PARTNER`` (slot bound to a partner trait).
"""

import numpy as np
from numba import njit

VACATED = -1
PARTNER = -2
INVARIANT_BROKEN = -1


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def splitmix_next(rstate):
    rstate[0] += _GOLDEN
    z = rstate[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def splitmix_below(rstate, n):
    """Unbiased integer in [0, n) by rejecting the low ``2**64 mod n`` values."""
    un = np.uint64(n)
    threshold = (np.uint64(0) - un) % un
    while True:
        z = splitmix_next(rstate)
        if z >= threshold:
            return np.int64(z % un)


@njit(cache=True)
def out_slots(inputs, R):
    """Out-degree per node and a CSR list of the (node*B + slot) each node feeds."""
    B = inputs.shape[1]
    outdeg = np.zeros(R, dtype=np.int32)
    for u in range(R):
        for k in range(B):
            src = inputs[u, k]
            if src >= 0:
                outdeg[src] += 1
    ptr = np.zeros(R + 1, dtype=np.int32)
    for v in range(R):
        ptr[v + 1] = ptr[v] + outdeg[v]
    fill = ptr[:R].copy()
    slots = np.empty(ptr[R], dtype=np.int32)
    for u in range(R):
        for k in range(B):
            src = inputs[u, k]
            if src >= 0:
                slots[fill[src]] = u * B + k
                fill[src] += 1
    return outdeg, ptr, slots


@njit(cache=True)
def fitness(own, partner, nb, pflat, table):
    N = own.shape[0]
    K = nb.shape[1]
    P = pflat.shape[1]
    total = 0.0
    for i in range(N):
        key = np.int64(own[i])
        for k in range(K):
            key = (key << 1) | own[nb[i, k]]
        for q in range(P):
            key = (key << 1) | partner[pflat[i, q]]
        total += table[i, key]
    return total / N


@njit(cache=True)
def grna_next(s, editable, gtable, ginputs, g_next, grow_next):
    R = s.shape[0]
    Bp = ginputs.shape[1]
    for v in range(R):
        if editable[v]:
            row = 0
            for k in range(Bp):
                row = (row << 1) | s[ginputs[v, k]]
            g_next[v] = gtable[v, row]
            grow_next[v] = row if g_next[v] else -1
        else:
            g_next[v] = 0
            grow_next[v] = -1


@njit(cache=True)
def step(s, g, grow, s_next, g_next, grow_next,
         ttable, inputs, cidx, editable, gtable, ginputs, reconnect,
         outdeg, ptr, slots, clamp, external,
         primary, eff, ex_u, ex_k, ex_src, counters, rstate, record):
    """One synchronous update. Mutates ``s`` only by clamping; writes ``*_next``.

    ``counters[0]`` receives the number of extra (OR-folded) connections and
    ``counters[1]`` the number of random draws made. With ``record`` set the
    effective wiring is always left in ``primary``/``ex_*``. Returns 0, or
    ``INVARIANT_BROKEN`` for a malformed reconnect list.
    """
    R, B = inputs.shape
    cap = reconnect.shape[2]
    counters[0] = 0
    counters[1] = 0

    for i in range(clamp.shape[0]):
        s[i] = clamp[i]

    any_edit = False
    for v in range(R):
        if editable[v] and s[v] == 1 and g[v] == 1:
            any_edit = True
            break

    if not any_edit and not record:
        for u in range(R):
            idx = 0
            for k in range(B):
                src = inputs[u, k]
                if src >= 0:
                    idx = (idx << 1) | s[src]
                else:
                    idx = (idx << 1) | external[cidx[u]]
            s_next[u] = ttable[u, idx]
        grna_next(s, editable, gtable, ginputs, g_next, grow_next)
        return 0

    for u in range(R):
        for k in range(B):
            src = inputs[u, k]
            primary[u, k] = src if src >= 0 else PARTNER

    n_extra = 0
    n_draw = 0
    if any_edit:
        for v in range(R):
            if editable[v] and s[v] == 1 and g[v] == 1:
                for p in range(ptr[v], ptr[v + 1]):
                    sl = slots[p]
                    primary[sl // B, sl % B] = VACATED
        for v in range(R):
            if not (editable[v] and s[v] == 1 and g[v] == 1):
                continue
            row = grow[v]
            d = outdeg[v]
            if row < 0 or d > cap or (d < cap and reconnect[v, row, d] != -1):
                return INVARIANT_BROKEN
            for t in range(d):
                u = reconnect[v, row, t]
                if u < 0 or u >= R:
                    return INVARIANT_BROKEN
                placed = False
                for k in range(B):
                    if primary[u, k] == VACATED:
                        primary[u, k] = v
                        placed = True
                        break
                if placed:
                    continue
                # surplus connection: OR into a random slot, never a partner-bound one
                first = 1 if cidx[u] >= 0 else 0
                n_opt = B - first
                if n_opt == 0:
                    continue
                if n_opt == 1:
                    k = first
                else:
                    k = first + splitmix_below(rstate, n_opt)
                    n_draw += 1
                ex_u[n_extra] = u
                ex_k[n_extra] = k
                ex_src[n_extra] = v
                n_extra += 1

    for u in range(R):
        for k in range(B):
            p = primary[u, k]
            if p >= 0:
                eff[u, k] = s[p]
            elif p == PARTNER:
                eff[u, k] = external[cidx[u]]
            else:
                eff[u, k] = 0
    for e in range(n_extra):
        eff[ex_u[e], ex_k[e]] |= s[ex_src[e]]

    for u in range(R):
        idx = 0
        for k in range(B):
            idx = (idx << 1) | eff[u, k]
        s_next[u] = ttable[u, idx]

    grna_next(s, editable, gtable, ginputs, g_next, grow_next)
    counters[0] = n_extra
    counters[1] = n_draw
    return 0


@njit(cache=True)
def _same_state(hs, hg, hr, i, j):
    R = hs.shape[1]
    for v in range(R):
        if hs[i, v] != hs[j, v] or hg[i, v] != hg[j, v] or hr[i, v] != hr[j, v]:
            return False
    return True


@njit(cache=True)
def _same_schedule(clamp_sched, land_sched, i, j):
    if land_sched[i] != land_sched[j]:
        return False
    for q in range(clamp_sched.shape[1]):
        if clamp_sched[i, q] != clamp_sched[j, q]:
            return False
    return True


@njit(cache=True)
def episode(start, ttable, inputs, cidx, editable, gtable, ginputs, reconnect, trait_ids,
            clamp_sched, land_sched, nbs, tables, seed, trace, fits, skip_attractors):
    """Single-cell lifetime; per-cycle trait states go to ``trace`` and fitness to ``fits``.

    With ``skip_attractors`` the post-step state (node, gRNA, activating row)
    is remembered; once a state recurs within a constant stretch of the
    schedule and no random draw happened since its first visit, the rest of
    that stretch is periodic and is replayed from history. The result is
    identical to full simulation, including generator consumption.

    Returns the mean fitness, or NaN if an invariant broke.
    """
    R, B = inputs.shape
    N = trait_ids.shape[0]
    cycles = land_sched.shape[0]
    outdeg, ptr, slots = out_slots(inputs, R)
    s = start.copy()
    g = np.zeros(R, dtype=np.uint8)
    grow = np.empty(R, dtype=np.int64)
    grna_next(s, editable, gtable, ginputs, g, grow)
    s2 = np.empty_like(s)
    g2 = np.empty_like(g)
    grow2 = np.empty_like(grow)
    primary = np.empty((R, B), dtype=np.int64)
    eff = np.empty((R, B), dtype=np.uint8)
    nmax = R * B + 1
    ex_u = np.empty(nmax, dtype=np.int64)
    ex_k = np.empty(nmax, dtype=np.int64)
    ex_src = np.empty(nmax, dtype=np.int64)
    counters = np.zeros(2, dtype=np.int64)
    rstate = np.full(1, seed, dtype=np.uint64)
    no_ext = np.zeros(0, dtype=np.uint8)
    no_partner = np.zeros(0, dtype=np.uint8)
    pflat = np.zeros((N, 0), dtype=np.int32)
    traits = np.empty(N, dtype=np.uint8)

    hs = np.empty((cycles, R), dtype=np.uint8)
    hg = np.empty((cycles, R), dtype=np.uint8)
    hr = np.empty((cycles, R), dtype=np.int64)
    hkey = np.empty(cycles, dtype=np.uint64)
    draws_upto = np.zeros(cycles, dtype=np.int64)  # cumulative draws through cycle c
    seg_start = 0
    total_draws = 0

    c = 0
    while c < cycles:
        if c > 0 and not _same_schedule(clamp_sched, land_sched, c, c - 1):
            seg_start = c
        rc = step(s, g, grow, s2, g2, grow2, ttable, inputs, cidx, editable, gtable, ginputs,
                  reconnect, outdeg, ptr, slots, clamp_sched[c], no_ext,
                  primary, eff, ex_u, ex_k, ex_src, counters, rstate, False)
        if rc < 0:
            return np.nan
        s, s2 = s2, s
        g, g2 = g2, g
        grow, grow2 = grow2, grow
        total_draws += counters[1]
        for j in range(N):
            traits[j] = s[trait_ids[j]]
        li = land_sched[c]
        fits[c] = fitness(traits, no_partner, nbs[li], pflat, tables[li])
        trace[c, :] = traits
        if not skip_attractors:
            c += 1
            continue

        key = np.uint64(1469598103934665603)
        for v in range(R):
            hs[c, v] = s[v]
            hg[c, v] = g[v]
            hr[c, v] = grow[v]
            key = (key ^ np.uint64(s[v] + 2 * g[v] + 4 * (grow[v] + 1))) * np.uint64(1099511628211)
        hkey[c] = key
        draws_upto[c] = total_draws

        prev = -1
        for j in range(seg_start, c):
            if hkey[j] == key and draws_upto[j] == total_draws and _same_state(hs, hg, hr, j, c):
                prev = j
                break
        if prev < 0:
            c += 1
            continue
        seg_end = c + 1
        while seg_end < cycles and _same_schedule(clamp_sched, land_sched, seg_end, c):
            seg_end += 1
        period = c - prev
        for t in range(c + 1, seg_end):
            src = prev + (t - prev - 1) % period + 1
            fits[t] = fits[src]
            trace[t, :] = trace[src]
            hs[t, :] = hs[src]
            hg[t, :] = hg[src]
            hr[t, :] = hr[src]
            hkey[t] = hkey[src]
            draws_upto[t] = total_draws
        last = seg_end - 1
        for v in range(R):
            s[v] = hs[last, v]
            g[v] = hg[last, v]
            grow[v] = hr[last, v]
        c = seg_end

    total = 0.0
    for c in range(cycles):
        total += fits[c]
    return total / cycles


@njit(cache=True)
def pair_episode(a_start, a_ttable, a_inputs, a_cidx, a_editable, a_gtable, a_ginputs, a_reconnect, a_traits,
                 b_start, b_ttable, b_inputs, b_cidx, b_editable, b_gtable, b_ginputs, b_reconnect, b_traits,
                 a_nb, a_pflat, a_table, b_nb, b_pflat, b_table,
                 a_clamp, b_clamp, cycles, pre_steps, seed, trace_a, trace_b):
    """Two coupled networks updating in turn, ``a`` first.

    ``a`` takes ``pre_steps`` unscored updates before the alternation starts.
    Returns (mean fitness of a, mean fitness of b); NaNs if an invariant broke.
    """
    Ra, Ba = a_inputs.shape
    Rb, Bb = b_inputs.shape
    N = a_traits.shape[0]
    a_outdeg, a_ptr, a_slots = out_slots(a_inputs, Ra)
    b_outdeg, b_ptr, b_slots = out_slots(b_inputs, Rb)

    sa = a_start.copy()
    ga = np.zeros(Ra, dtype=np.uint8)
    rwa = np.empty(Ra, dtype=np.int64)
    grna_next(sa, a_editable, a_gtable, a_ginputs, ga, rwa)
    sa2 = np.empty_like(sa)
    ga2 = np.empty_like(ga)
    rwa2 = np.empty_like(rwa)
    sb = b_start.copy()
    gb = np.zeros(Rb, dtype=np.uint8)
    rwb = np.empty(Rb, dtype=np.int64)
    grna_next(sb, b_editable, b_gtable, b_ginputs, gb, rwb)
    sb2 = np.empty_like(sb)
    gb2 = np.empty_like(gb)
    rwb2 = np.empty_like(rwb)

    pa = np.empty((Ra, Ba), dtype=np.int64)
    ea = np.empty((Ra, Ba), dtype=np.uint8)
    pb = np.empty((Rb, Bb), dtype=np.int64)
    eb = np.empty((Rb, Bb), dtype=np.uint8)
    nmax = max(Ra * Ba, Rb * Bb) + 1
    ex_u = np.empty(nmax, dtype=np.int64)
    ex_k = np.empty(nmax, dtype=np.int64)
    ex_src = np.empty(nmax, dtype=np.int64)
    counters = np.zeros(2, dtype=np.int64)
    rstate = np.full(1, seed, dtype=np.uint64)

    ta = np.empty(N, dtype=np.uint8)
    tb = np.empty(N, dtype=np.uint8)
    for j in range(N):
        ta[j] = sa[a_traits[j]]
        tb[j] = sb[b_traits[j]]

    tot_a = 0.0
    tot_b = 0.0
    for c in range(pre_steps + cycles):
        rc = step(sa, ga, rwa, sa2, ga2, rwa2, a_ttable, a_inputs, a_cidx, a_editable, a_gtable,
                  a_ginputs, a_reconnect, a_outdeg, a_ptr, a_slots, a_clamp, tb,
                  pa, ea, ex_u, ex_k, ex_src, counters, rstate, False)
        if rc < 0:
            return np.nan, np.nan
        sa, sa2 = sa2, sa
        ga, ga2 = ga2, ga
        rwa, rwa2 = rwa2, rwa
        for j in range(N):
            ta[j] = sa[a_traits[j]]
        if c < pre_steps:
            continue

        rc = step(sb, gb, rwb, sb2, gb2, rwb2, b_ttable, b_inputs, b_cidx, b_editable, b_gtable,
                  b_ginputs, b_reconnect, b_outdeg, b_ptr, b_slots, b_clamp, ta,
                  pb, eb, ex_u, ex_k, ex_src, counters, rstate, False)
        if rc < 0:
            return np.nan, np.nan
        sb, sb2 = sb2, sb
        gb, gb2 = gb2, gb
        rwb, rwb2 = rwb2, rwb
        for j in range(N):
            tb[j] = sb[b_traits[j]]

        i = c - pre_steps
        trace_a[i, :] = ta
        trace_b[i, :] = tb
        tot_a += fitness(ta, tb, a_nb, a_pflat, a_table)
        tot_b += fitness(tb, ta, b_nb, b_pflat, b_table)
    return tot_a / cycles, tot_b / cycles
