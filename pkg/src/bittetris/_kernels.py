"""JIT-compiled bitboard kernels: engine mechanics, feature extraction, playouts.

All boards are int64 arrays of 10 column words (bit k = row k from the
bottom). Game state is a 15-slot int64 array: columns 0-9, reward 10,
score 11, current piece 12, drop height 13, cleared-row mask 14.
Generator / sampling streams are splitmix64 states in uint64 arrays so
every playout is reproducible from a seed and safe to run in parallel.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .pieces import ACTION_COL, ACTION_ROT, ACTION_SIZE, SHAPE_COLS, SHAPE_H, SHAPE_W

GEN_RANDOM = 0
GEN_BAG7 = 1
GEN_ADVERSARIAL_SZ = 2

_U = np.uint64
_GOLD = _U(0x9E3779B97F4A7C15)
_MIX1 = _U(0xBF58476D1CE4E5B9)
_MIX2 = _U(0x94D049BB133111EB)
_SH30 = _U(30)
_SH27 = _U(27)
_SH31 = _U(31)
_SH11 = _U(11)
_INV53 = 1.0 / 9007199254740992.0  # 2^-53


@njit(cache=True)
def rng_next(st):
    """Advance a splitmix64 stream stored at st[0]."""
    s = st[0] + _GOLD
    st[0] = s
    z = (s ^ (s >> _SH30)) * _MIX1
    z = (z ^ (z >> _SH27)) * _MIX2
    return z ^ (z >> _SH31)


@njit(cache=True)
def rng_below(st, n):
    return np.int64(rng_next(st) % _U(n))


@njit(cache=True)
def rng_float(st):
    return np.float64(rng_next(st) >> _SH11) * _INV53


@njit(cache=True)
def gen_next(gen):
    """Draw the next piece index from a generator state array.

    Layout: gen[0] kind, gen[1] rng state, gen[2] bag position / parity,
    gen[3:10] current bag order.
    """
    kind = gen[0]
    if kind == _U(GEN_RANDOM):
        return np.int64(rng_next(gen[1:2]) % _U(7))
    elif kind == _U(GEN_BAG7):
        pos = np.int64(gen[2])
        if pos == 0:
            for i in range(7):
                gen[3 + i] = _U(i)
            for i in range(6, 0, -1):
                j = np.int64(rng_next(gen[1:2]) % _U(i + 1))
                tmp = gen[3 + i]
                gen[3 + i] = gen[3 + j]
                gen[3 + j] = tmp
        piece = np.int64(gen[3 + pos])
        gen[2] = _U((pos + 1) % 7)
        return piece
    else:
        parity = np.int64(gen[2])
        gen[2] = _U(1 - parity)
        return np.int64(2 + parity)  # S then Z, deterministic


@njit(cache=True)
def popcount(x):
    x = x - ((x >> 1) & 0x55555555)
    x = (x & 0x33333333) + ((x >> 2) & 0x33333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F
    # the multiply carries into bytes above bit 31 in 64-bit arithmetic
    return ((x * 0x01010101) >> 24) & 0xFF


@njit(cache=True)
def top_index(d):
    """Index of the highest set bit; 0 for d == 0 (callers special-case empty)."""
    h = 0
    if d & 0xFFFF0000:
        d >>= 16
        h += 16
    if d & 0xFF00:
        d >>= 8
        h += 8
    if d & 0xF0:
        d >>= 4
        h += 4
    if d & 0x0C:
        d >>= 2
        h += 2
    if d & 0x02:
        h += 1
    return h


@njit(cache=True)
def fill_below(d):
    d |= d >> 1
    d |= d >> 2
    d |= d >> 4
    d |= d >> 8
    d |= d >> 16
    return d


@njit(cache=True)
def drop_offset_pattern(cols, pattern, width, column):
    """Smallest shift d at which the pattern overlaps nothing in cols."""
    d = np.int64(0)
    while True:
        ok = True
        for i in range(width):
            if (pattern[i] << d) & cols[column + i] != 0:
                ok = False
                break
        if ok:
            return d
        d += 1


@njit(cache=True)
def delete_mask(cols):
    m = cols[0]
    for i in range(1, 10):
        m &= cols[i]
    return m


@njit(cache=True)
def clear_rows(cols):
    """Remove full rows one at a time, top full row first. Returns rows removed."""
    lines = np.int64(0)
    while True:
        t = cols[0]
        for i in range(1, 10):
            t &= cols[i]
        if t == 0:
            return lines
        t = fill_below(t)
        below_mask = t >> 1
        above_mask = ~t
        for i in range(10):
            below = cols[i] & below_mask
            above = cols[i] & above_mask
            cols[i] = below | (above >> 1)
        lines += 1


@njit(cache=True)
def game_over(cols, h):
    band = np.int64(15) << h
    for i in range(10):
        if cols[i] & band != 0:
            return True
    return False


@njit(cache=True)
def board_popcount(cols):
    p = np.int64(0)
    for i in range(10):
        p += popcount(cols[i])
    return p


@njit(cache=True)
def reset_state(state, gen):
    for i in range(15):
        state[i] = 0
    state[12] = gen_next(gen)


@njit(cache=True)
def apply_action(state, h, action, gen):
    """Drop the current piece at the decoded action, clear rows, advance.

    Mutates state in place; records drop height (slot 13) and the pre-clear
    full-row mask (slot 14). Returns (reward, done). The next piece is drawn
    only when the game continues.
    """
    piece = state[12]
    rot = ACTION_ROT[piece, action]
    col = ACTION_COL[piece, action]
    w = SHAPE_W[piece, rot]
    d = np.int64(0)
    while True:
        ok = True
        for i in range(w):
            if (SHAPE_COLS[piece, rot, i] << d) & state[col + i] != 0:
                ok = False
                break
        if ok:
            break
        d += 1
    for i in range(w):
        state[col + i] |= SHAPE_COLS[piece, rot, i] << d
    dl = state[0]
    for i in range(1, 10):
        dl &= state[i]
    reward = popcount(dl)
    state[10] = reward
    state[13] = d
    state[14] = dl
    if reward != 0:
        clear_rows(state[:10])
    state[11] += reward
    band = np.int64(15) << h
    done = np.int64(0)
    for i in range(10):
        if state[i] & band != 0:
            done = np.int64(1)
            break
    if done == 0:
        state[12] = gen_next(gen)
    return reward, done


@njit(cache=True)
def transition_features(cols, h, piece, rot, col, out9, scratch):
    """Nine afterstate features of placing (piece, rot) at col on cols.

    Landing height and eroded cells come from the pre-clear placement; the
    remaining seven are computed on the post-clear board. Writes the feature
    vector into out9 and returns (reward, done). cols is left untouched;
    scratch must be an int64 array of length >= 10.
    """
    for i in range(10):
        scratch[i] = cols[i]
    w = SHAPE_W[piece, rot]
    d = np.int64(0)
    while True:
        ok = True
        for i in range(w):
            if (SHAPE_COLS[piece, rot, i] << d) & scratch[col + i] != 0:
                ok = False
                break
        if ok:
            break
        d += 1
    for i in range(w):
        scratch[col + i] |= SHAPE_COLS[piece, rot, i] << d
    dl = scratch[0]
    for i in range(1, 10):
        dl &= scratch[i]
    reward = popcount(dl)
    eroded = np.int64(0)
    if dl != 0:
        dls = dl >> d
        for i in range(w):
            eroded += popcount(dls & SHAPE_COLS[piece, rot, i])
        eroded *= reward
        clear_rows(scratch[:10])

    full = (np.int64(1) << h) - 1
    rowt = popcount(scratch[0] ^ full) + popcount(scratch[9] ^ full)
    for i in range(9):
        rowt += popcount(scratch[i] ^ scratch[i + 1])

    colt = np.int64(0)
    holes = np.int64(0)
    hole_rows = np.int64(0)
    hdepth = np.int64(0)
    for i in range(10):
        c = scratch[i]
        colt += popcount(c ^ ((c << 1) + 1))
        if c > 1:
            y = fill_below(c) ^ c
            holes += popcount(y)
            hole_rows |= y
        hdepth += popcount(c & ~(c ^ (c + 1)))

    well = np.int64(0)
    for i in range(10):
        left = scratch[i - 1] if i > 0 else full
        right = scratch[i + 1] if i < 9 else full
        flank = (~scratch[i]) & left & right & full
        while flank != 0:
            b = flank & (-flank)
            j = top_index(b)
            below = scratch[i] & (b - 1)
            if below == 0:
                well += j + 1  # empty run reaches the floor
            else:
                well += j - top_index(below)
            flank &= flank - 1

    flags = np.int64(0)
    prev_h = np.int64(0)
    for i in range(10):
        c = scratch[i]
        ht = top_index(c) if c != 0 else np.int64(-1)
        if i > 0:
            dh = prev_h - ht
            if -2 <= dh <= 2:
                flags |= np.int64(1) << (dh + 2)
        prev_h = ht

    band = np.int64(15) << h
    done = np.int64(0)
    for i in range(10):
        if scratch[i] & band != 0:
            done = np.int64(1)
            break

    out9[0] = d + (SHAPE_H[piece, rot] - 1) * 0.5
    out9[1] = eroded
    out9[2] = rowt
    out9[3] = colt
    out9[4] = holes
    out9[5] = well
    out9[6] = hdepth
    out9[7] = popcount(hole_rows)
    out9[8] = popcount(flags)
    return reward, done


@njit(cache=True)
def batch_features(cols, h, piece, out_feat, out_mask, scratch):
    """Fill the 34-slot afterstate feature batch; infeasible rows zeroed."""
    n = ACTION_SIZE[piece]
    for a in range(34):
        if a < n:
            rot = ACTION_ROT[piece, a]
            c = ACTION_COL[piece, a]
            transition_features(cols, h, piece, rot, c, out_feat[a], scratch)
            out_mask[a] = 1
        else:
            out_mask[a] = 0
            for k in range(9):
                out_feat[a, k] = 0.0


@njit(cache=True)
def batch_features_tiered(cols, h, piece, out_feat, out_mask, scratch):
    """Feature batch whose mask keeps only the best survival tier.

    Placements grade into: keeps a spare row above the stack, merely
    survives, or ends the game. The mask marks the lowest (best) tier
    present, so a sampling actor never picks a fatal placement while a
    surviving one exists. Degenerates to the plain geometric mask only when
    every placement is fatal.
    """
    n = ACTION_SIZE[piece]
    spare_band = np.int64(-1) << (h - 1)
    live_band = np.int64(-1) << h
    best_tier = np.int64(2)
    for a in range(34):
        if a < n:
            rot = ACTION_ROT[piece, a]
            c = ACTION_COL[piece, a]
            transition_features(cols, h, piece, rot, c, out_feat[a], scratch)
            tier = np.int64(0)
            for i in range(10):
                if scratch[i] & spare_band != 0:
                    tier = np.int64(2) if scratch[i] & live_band != 0 else np.int64(1)
                    if tier == 2:
                        break
            out_mask[a] = tier
            if tier < best_tier:
                best_tier = tier
        else:
            out_mask[a] = 3
            for k in range(9):
                out_feat[a, k] = 0.0
    for a in range(34):
        out_mask[a] = 1 if out_mask[a] == best_tier else 0


@njit(cache=True)
def empty_board_features(h, out9):
    """Feature vector of an empty board (landing and eroded fixed to 0)."""
    for k in range(9):
        out9[k] = 0.0
    out9[2] = 2.0 * h
    out9[3] = 10.0
    out9[8] = 1.0


@njit(cache=True)
def make_gen(kind, seed):
    gen = np.zeros(10, dtype=np.uint64)
    gen[0] = _U(kind)
    gen[1] = _U(seed)
    return gen


@njit(cache=True)
def greedy_pick(weights, cols, h, piece, f9, scratch):
    """Tiered greedy action choice over the current piece's placements.

    Prefers the best-scoring afterstate that leaves the top playfield row
    empty (headroom for the next piece), then the best that merely survives,
    then the best overall. Ties break toward the lowest action index.
    """
    n = ACTION_SIZE[piece]
    spare_band = np.int64(-1) << (h - 1)
    live_band = np.int64(-1) << h
    best = -1.0e300
    ba = np.int64(-1)
    best_live = -1.0e300
    ba_live = np.int64(-1)
    best_any = -1.0e300
    ba_any = np.int64(0)
    for a in range(n):
        transition_features(
            cols, h, piece, ACTION_ROT[piece, a], ACTION_COL[piece, a], f9, scratch
        )
        s = 0.0
        for k in range(9):
            s += weights[k] * f9[k]
        if s > best_any:
            best_any = s
            ba_any = a
        over = np.int64(0)
        for i in range(10):
            if scratch[i] & spare_band != 0:
                over = np.int64(2) if scratch[i] & live_band != 0 else np.int64(1)
                if over == 2:
                    break
        if over == 0:
            if s > best:
                best = s
                ba = a
        elif over == 1:
            if s > best_live:
                best_live = s
                ba_live = a
    if ba >= 0:
        return ba
    if ba_live >= 0:
        return ba_live
    return ba_any


@njit(cache=True)
def greedy_game(weights, h, gen_kind, seed, max_steps, check_invariants):
    """Play one greedy game; returns (score, steps, finished, violations).

    With check_invariants != 0 every step verifies reward bounds, cell
    conservation across clearing, and the headroom band above the playfield.
    """
    state = np.zeros(15, dtype=np.int64)
    gen = make_gen(gen_kind, seed)
    scratch = np.empty(10, dtype=np.int64)
    f9 = np.empty(9, dtype=np.float64)
    state[12] = gen_next(gen)
    steps = np.int64(0)
    violations = np.int64(0)
    finished = np.int64(0)
    cols = state[:10]
    while steps < max_steps:
        best_a = greedy_pick(weights, cols, h, state[12], f9, scratch)
        pre_pop = board_popcount(cols) if check_invariants != 0 else np.int64(0)
        reward, done = apply_action(state, h, best_a, gen)
        steps += 1
        if check_invariants != 0:
            if reward < 0 or reward > 4:
                violations += 1
            if board_popcount(cols) != pre_pop + 4 - 10 * reward:
                violations += 1
            head = np.int64(-1) << (h + 4)
            for i in range(10):
                if cols[i] & head != 0:
                    violations += 1
                    break
        if done != 0:
            finished = np.int64(1)
            break
    return state[11], steps, finished, violations


@njit(parallel=True, cache=True)
def greedy_game_many(weights, h, gen_kind, seeds, max_steps, out_score, out_steps, out_fin):
    for g in prange(seeds.shape[0]):
        score, steps, fin, _ = greedy_game(weights, h, gen_kind, seeds[g], max_steps, 0)
        out_score[g] = score
        out_steps[g] = steps
        out_fin[g] = fin


@njit(cache=True)
def sample_masked(logits, mask, n, act):
    """Draw a slot from the softmax over masked-in logits; returns (slot, logp)."""
    m = -1.0e300
    for a in range(n):
        if mask[a] != 0 and logits[a] > m:
            m = logits[a]
    total = 0.0
    for a in range(n):
        if mask[a] != 0:
            total += math.exp(logits[a] - m)
    u = rng_float(act) * total
    acc = 0.0
    chosen = np.int64(-1)
    for a in range(n):
        if mask[a] != 0:
            chosen = np.int64(a)
            acc += math.exp(logits[a] - m)
            if u < acc:
                break
    logp = logits[chosen] - m - math.log(total)
    return chosen, logp


@njit(cache=True)
def policy_episode(theta, tau, h, gen_kind, seed, act_seed, max_steps):
    """Play one episode sampling from the masked softmax actor; returns (score, steps)."""
    state = np.zeros(15, dtype=np.int64)
    gen = make_gen(gen_kind, seed)
    act = np.zeros(1, dtype=np.uint64)
    act[0] = _U(act_seed)
    scratch = np.empty(10, dtype=np.int64)
    feats = np.empty((34, 9), dtype=np.float64)
    mask = np.empty(34, dtype=np.uint8)
    logits = np.empty(34, dtype=np.float64)
    state[12] = gen_next(gen)
    steps = np.int64(0)
    cols = state[:10]
    while steps < max_steps:
        piece = state[12]
        n = ACTION_SIZE[piece]
        batch_features_tiered(cols, h, piece, feats, mask, scratch)
        for a in range(n):
            if mask[a] != 0:
                s = 0.0
                for k in range(9):
                    s += theta[k] * feats[a, k]
                logits[a] = s / tau
        chosen, _ = sample_masked(logits, mask, n, act)
        _, done = apply_action(state, h, chosen, gen)
        steps += 1
        if done != 0:
            break
    return state[11], steps


@njit(parallel=True, cache=True)
def policy_episode_many(theta, tau, h, gen_kind, seeds, act_seeds, max_steps, out_score):
    for g in prange(seeds.shape[0]):
        score, _ = policy_episode(theta, tau, h, gen_kind, seeds[g], act_seeds[g], max_steps)
        out_score[g] = score


@njit(cache=True)
def collect_steps(
    state,
    h,
    gen,
    act,
    theta,
    tau,
    cur_pre,
    n_target,
    stop_on_done,
    out_pre,
    out_batch,
    out_mask,
    out_act,
    out_logp,
    out_rew,
    out_done,
):
    """Sample transitions with the masked softmax actor into the out arrays.

    Runs until n_target transitions are stored (episodes continue across
    calls; the environment resets internally on game over) or, with
    stop_on_done, until the current episode ends. cur_pre holds the feature
    vector of the pre-decision board and is updated in place so a caller can
    resume collection seamlessly. Returns the number of transitions stored.
    """
    scratch = np.empty(10, dtype=np.int64)
    logits = np.empty(34, dtype=np.float64)
    t = np.int64(0)
    cols = state[:10]
    while t < n_target:
        piece = state[12]
        batch_features_tiered(cols, h, piece, out_batch[t], out_mask[t], scratch)
        for k in range(9):
            out_pre[t, k] = cur_pre[k]
        n = ACTION_SIZE[piece]
        for a in range(n):
            if out_mask[t, a] != 0:
                s = 0.0
                for k in range(9):
                    s += theta[k] * out_batch[t, a, k]
                logits[a] = s / tau
        chosen, logp = sample_masked(logits, out_mask[t], n, act)
        out_act[t] = chosen
        out_logp[t] = logp
        for k in range(9):
            cur_pre[k] = out_batch[t, chosen, k]
        reward, done = apply_action(state, h, chosen, gen)
        out_rew[t] = reward
        out_done[t] = done
        t += 1
        if done != 0:
            reset_state(state, gen)
            empty_board_features(h, cur_pre)
            if stop_on_done != 0:
                break
    return t


@njit(cache=True)
def random_steps(h, gen_kind, seed, n, trace):
    """Step n uniformly random feasible actions, resetting on game over.

    Writes (piece, action) pairs into trace when it is sized 2n. Returns the
    number of finished games.
    """
    state = np.zeros(15, dtype=np.int64)
    gen = make_gen(gen_kind, seed)
    state[12] = gen_next(gen)
    games = np.int64(0)
    record = trace.shape[0] >= 2 * n
    for t in range(n):
        piece = state[12]
        a = rng_below(gen[1:2], ACTION_SIZE[piece])
        if record:
            trace[2 * t] = piece
            trace[2 * t + 1] = a
        _, done = apply_action(state, h, a, gen)
        if done != 0:
            games += 1
            reset_state(state, gen)
    return games


@njit(cache=True)
def random_steps_with_features(h, gen_kind, seed, n, trace):
    """random_steps plus a full afterstate feature batch extracted per step."""
    state = np.zeros(15, dtype=np.int64)
    gen = make_gen(gen_kind, seed)
    state[12] = gen_next(gen)
    feats = np.empty((34, 9), dtype=np.float64)
    mask = np.empty(34, dtype=np.uint8)
    scratch = np.empty(10, dtype=np.int64)
    games = np.int64(0)
    record = trace.shape[0] >= 2 * n
    cols = state[:10]
    for t in range(n):
        piece = state[12]
        batch_features(cols, h, piece, feats, mask, scratch)
        a = rng_below(gen[1:2], ACTION_SIZE[piece])
        if record:
            trace[2 * t] = piece
            trace[2 * t + 1] = a
        _, done = apply_action(state, h, a, gen)
        if done != 0:
            games += 1
            reset_state(state, gen)
    return games
