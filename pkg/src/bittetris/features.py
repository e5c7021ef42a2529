"""The nine afterstate board features and the 34-slot masked feature batch.

Feature order is fixed everywhere (weight files, batches, policies):
landing height, eroded piece cells, row transitions, column transitions,
holes, board well, hole depth, rows with holes, pattern diversity.
Hole depth follows the lowest-empty-cell rule: per column, the filled
cells strictly above the lowest empty cell.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .engine import Board, GameState
from .pieces import ACTION_SIZE, MAX_ACTIONS, PieceShape, shape_of

FEATURE_NAMES = (
    "landing_height",
    "eroded_piece_cells",
    "row_transitions",
    "column_transitions",
    "holes",
    "board_well",
    "hole_depth",
    "rows_with_holes",
    "pattern_diversity",
)
N_FEATURES = len(FEATURE_NAMES)


def landing_height(drop_height: int, shape_height: int) -> float:
    """Resting row of the piece bottom plus half its remaining height."""
    return drop_height + (shape_height - 1) / 2


def eroded_piece_cells(state: GameState, shape: PieceShape) -> int:
    """Lines cleared times the placed piece's cells lying in those lines."""
    if state.reward == 0:
        return 0
    aligned = state.delete_line >> state.drop_height
    cells = sum(int(aligned & c).bit_count() for c in shape.cols)
    return cells * state.reward


def _full(board: Board) -> int:
    return (1 << board.height) - 1


def row_transitions(board: Board) -> int:
    cols = board.columns
    full = _full(board)
    n = int(cols[0] ^ full).bit_count() + int(cols[9] ^ full).bit_count()
    for i in range(9):
        n += int(cols[i] ^ cols[i + 1]).bit_count()
    return n


def column_transitions(board: Board) -> int:
    # the +1 treats the floor as filled; the shift exposes the top edge
    return sum(int(c ^ ((c << 1) + 1)).bit_count() for c in board.columns)


def holes(board: Board) -> int:
    n = 0
    for c in board.columns:
        if c > 1:
            n += int(K.fill_below(np.int64(c)) ^ c).bit_count()
    return n


def board_well(board: Board) -> int:
    """Running-count well depth: scanning up, each flanked empty cell adds
    the length of the empty run it ends."""
    cols = board.columns
    full = _full(board)
    total = 0
    for i in range(10):
        left = cols[i - 1] if i > 0 else full
        right = cols[i + 1] if i < 9 else full
        y = 0
        for j in range(board.height):
            if (cols[i] >> j) & 1 == 0:
                y += 1
                if (left >> j) & 1 and (right >> j) & 1:
                    total += y
            else:
                y = 0
    return total


def hole_depth(board: Board) -> int:
    n = 0
    for c in board.columns:
        n += int(c & ~(c ^ (c + 1))).bit_count()
    return n


def rows_with_holes(board: Board) -> int:
    merged = 0
    for c in board.columns:
        if c > 1:
            merged |= int(K.fill_below(np.int64(c))) ^ c
    return int(merged).bit_count()


def pattern_diversity(board: Board) -> int:
    """Distinct adjacent height differences among {-2,-1,0,1,2}."""
    heights = [
        int(K.top_index(np.int64(c))) if c != 0 else -1 for c in board.columns
    ]
    seen = set()
    for i in range(9):
        dh = heights[i] - heights[i + 1]
        if -2 <= dh <= 2:
            seen.add(dh)
    return len(seen)


@dataclass(frozen=True)
class TransitionFeatures:
    features: np.ndarray  # shape (9,)
    reward: int
    after: Board
    done: bool


def features_of_transition(board: Board, shape: PieceShape, column: int) -> TransitionFeatures:
    """Drop, clear, and extract the nine features of the resulting afterstate."""
    out = np.empty(N_FEATURES, dtype=np.float64)
    scratch = np.empty(10, dtype=np.int64)
    cols = board.as_array()
    reward, done = K.transition_features(
        cols, board.height, shape.piece, shape.rotation, column, out, scratch
    )
    # scratch holds the post-clear columns after the kernel call
    after = Board(tuple(int(c) for c in scratch), board.height)
    return TransitionFeatures(out, int(reward), after, bool(done))


@dataclass(frozen=True)
class AfterstateBatch:
    """34 x 9 afterstate features in action-index order plus feasibility mask."""

    features: np.ndarray  # (34, 9) float64
    mask: np.ndarray  # (34,) uint8

    def flat(self) -> np.ndarray:
        return self.features.reshape(-1)


def afterstate_batch(state: GameState) -> AfterstateBatch:
    feats = np.zeros((MAX_ACTIONS, N_FEATURES), dtype=np.float64)
    mask = np.zeros(MAX_ACTIONS, dtype=np.uint8)
    scratch = np.empty(10, dtype=np.int64)
    K.batch_features(state.slots[:10], state.height, state.piece, feats, mask, scratch)
    return AfterstateBatch(feats, mask)


def feasible_count(state: GameState) -> int:
    return int(ACTION_SIZE[state.piece])


def empty_board_features(height: int = 10) -> np.ndarray:
    out = np.empty(N_FEATURES, dtype=np.float64)
    K.empty_board_features(height, out)
    return out


def transition_by_action(state: GameState, action: int) -> TransitionFeatures:
    """features_of_transition for a decoded action index of the current piece."""
    from .pieces import decode_action

    rot, col = decode_action(state.piece, action)
    return features_of_transition(state.board, shape_of(state.piece, rot), col)
