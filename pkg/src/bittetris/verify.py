"""Differential fuzzing of the bitboard engine against the grid reference.

Transitions come from random playouts (reachable states, realistic garbage
above holes) plus a hand-built pathological board set. Every transition is
compared bit-exactly: afterstate columns, reward, drop height, cleared-row
mask, game-over flag, and all nine features, alongside the engine's own
step invariants.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import gridref
from .engine import Board, GameState, TetrisGame
from .features import (
    afterstate_batch,
    board_well,
    column_transitions,
    features_of_transition,
    hole_depth,
    holes,
    pattern_diversity,
    row_transitions,
    rows_with_holes,
)
from .pieces import ACTION_SIZE, decode_action, shape_of


@dataclass
class FuzzReport:
    transitions: int
    mismatches: int
    boards_checked: int
    seconds: float
    first_failure: str = ""
    invariant_violations: int = 0

    @property
    def ok(self) -> bool:
        return self.mismatches == 0 and self.invariant_violations == 0


def pathological_boards(height: int) -> list[Board]:
    """Edge-case boards: full, checkerboards, wells of every depth, hole stacks."""
    full = (1 << height) - 1
    boards = [
        Board.empty(height),
        Board((full,) * 10, height),
        Board(tuple(0x155 & full if i % 2 == 0 else 0x2AA & full for i in range(10)), height),
        Board(tuple(0x2AA & full if i % 2 == 0 else 0x155 & full for i in range(10)), height),
    ]
    for depth in range(1, height + 1):
        wall = full
        low = (1 << (height - depth)) - 1
        cols = [wall, low, wall] + [0] * 7
        boards.append(Board(tuple(cols), height))
        boards.append(Board(tuple([low, wall, low] + [low] * 7), height))
    # multi-hole columns: alternating filled/empty runs of growing period
    for period in (2, 3, 4):
        cols = []
        for i in range(10):
            c = 0
            for r in range(height):
                if (r // period + i) % 2 == 0:
                    c |= 1 << r
            cols.append(c | 1 << (height - 1))
        boards.append(Board(tuple(cols), height))
    return boards


def compare_transition(board: Board, piece: int, action: int):
    """Engine-vs-oracle discrepancies for one (board, piece, action).

    Returns (problems, engine transition) so callers can reuse the features.
    """
    problems = []
    rot, col = decode_action(piece, action)
    shape = shape_of(piece, rot)

    tf = features_of_transition(board, shape, col)
    ostep = gridref.oracle_step(gridref.to_grid(board), piece, rot, col)
    ofeats = gridref.oracle_features(ostep, shape)

    if gridref.from_grid(ostep.after).columns != tf.after.columns:
        problems.append(f"afterstate columns differ: {tf.after.columns} vs oracle")
    if ostep.reward != tf.reward:
        problems.append(f"reward {tf.reward} vs oracle {ostep.reward}")
    if ostep.done != tf.done:
        problems.append(f"done {tf.done} vs oracle {ostep.done}")
    engine_drop = tf.features[0] - (shape.height - 1) / 2
    if engine_drop != ostep.drop_height:
        problems.append(f"drop height {engine_drop} vs oracle {ostep.drop_height}")
    if not np.array_equal(tf.features, ofeats):
        problems.append(f"features {tf.features.tolist()} vs oracle {ofeats.tolist()}")
    return problems, tf, ostep


def _check_step_invariants(pre: GameState, post: GameState, reward: int,
                           done: bool) -> list[str]:
    problems = []
    if not 0 <= reward <= 4:
        problems.append(f"reward {reward} outside 0..4")
    expect = pre.board.popcount() + 4 - 10 * reward
    if post.board.popcount() != expect:
        problems.append(f"popcount {post.board.popcount()} != {expect}")
    if reward != bin(post.delete_line).count("1"):
        problems.append("reward != popcount(delete mask)")
    if post.score < pre.score:
        problems.append("score decreased")
    head = -1 << (pre.height + 4)
    if any(c & head for c in post.board.columns):
        problems.append("bits above the headroom band")
    if not done and any(c >> pre.height for c in post.board.columns):
        problems.append("live board has cells above the playfield")
    return problems


def _check_feature_invariants(feats: np.ndarray) -> list[str]:
    problems = []
    if feats[7] > feats[4]:
        problems.append("rows_with_holes > holes")
    if (feats[6] == 0) != (feats[4] == 0):
        problems.append("hole_depth zero iff holes zero violated")
    if not 1 <= feats[8] <= 5:
        problems.append("pattern diversity outside [1, 5]")
    return problems


def _board_feature_mismatch(board: Board) -> list[str]:
    ofeats = gridref.oracle_board_features(gridref.to_grid(board))
    engine = [
        row_transitions(board), column_transitions(board), holes(board),
        board_well(board), hole_depth(board), rows_with_holes(board),
        pattern_diversity(board),
    ]
    if not np.array_equal(np.array(engine, dtype=np.float64), ofeats):
        return [f"board features {engine} vs oracle {ofeats.tolist()} on {board.columns}"]
    return []


def differential_fuzz(transitions: int, seed: int = 0, heights=(10, 20),
                      batch_check_every: int = 200, on_mismatch: str = "continue"
                      ) -> FuzzReport:
    """Random-playout differential run; returns counts and the first failure."""
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    report = FuzzReport(0, 0, 0, 0.0)

    for height in heights:
        for board in pathological_boards(height):
            report.boards_checked += 1
            problems = _board_feature_mismatch(board)
            if problems:
                report.mismatches += 1
                report.first_failure = report.first_failure or problems[0]
                if on_mismatch == "raise":
                    raise AssertionError(problems[0])

    per_height = transitions // len(heights)
    for height in heights:
        game = TetrisGame(height=height, gen="random", seed=int(rng.integers(2 ** 62)))
        for t in range(per_height):
            state = game.state
            piece = state.piece
            action = int(rng.integers(ACTION_SIZE[piece]))

            problems, tf, ostep = compare_transition(state.board, piece, action)
            problems += _check_feature_invariants(tf.features)

            if t % batch_check_every == 0:
                batch = afterstate_batch(state)
                for a in range(34):
                    if batch.mask[a]:
                        r2, c2 = decode_action(piece, a)
                        row = features_of_transition(state.board, shape_of(piece, r2), c2)
                        if not np.array_equal(batch.features[a], row.features):
                            problems.append(f"batch row {a} != per-transition features")
                    elif batch.features[a].any():
                        problems.append(f"masked batch row {a} not zeroed")

            pre = state.copy()
            nxt, reward, done = game.step(action)
            step_problems = _check_step_invariants(pre, nxt, reward, done)
            rot, _ = decode_action(piece, action)
            if nxt.drop_height != ostep.drop_height:
                step_problems.append("step drop height != oracle drop height")
            if nxt.delete_line != gridref.cleared_rows_mask(ostep):
                step_problems.append("step delete mask != oracle cleared rows")
            if nxt.board.columns != tf.after.columns:
                step_problems.append("step afterstate != feature path afterstate")
            if (reward != tf.reward) or (done != tf.done):
                step_problems.append("step reward/done != feature path")

            report.transitions += 1
            if problems:
                report.mismatches += 1
                report.first_failure = report.first_failure or problems[0]
                if on_mismatch == "raise":
                    raise AssertionError(problems[0])
            if step_problems:
                report.invariant_violations += 1
                report.first_failure = report.first_failure or step_problems[0]
                if on_mismatch == "raise":
                    raise AssertionError(step_problems[0])
            if done:
                game.reset()
    report.seconds = time.perf_counter() - t0
    return report
