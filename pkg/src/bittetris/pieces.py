"""Tetromino catalog: per-rotation column bit patterns and action decoding.

Every rotation of every piece is stored as a list of column words whose
bit 0 is the shape's bottom row. An action index enumerates placements
rotation-major: for each rotation in catalog order, columns 0..10-width.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BOARD_WIDTH = 10

O, I, S, Z, L, J, T = range(7)
PIECE_NAMES = ("O", "I", "S", "Z", "L", "J", "T")

MAX_ACTIONS = 34


@dataclass(frozen=True)
class PieceShape:
    """One rotation of a piece: column bit patterns plus bounding box."""

    piece: int
    rotation: int
    cols: tuple[int, ...]
    width: int
    height: int


@dataclass(frozen=True)
class PieceDef:
    """All rotations of one piece with its placement count."""

    index: int
    name: str
    shapes: tuple[PieceShape, ...]
    rotation_num: int
    action_size: int
    max_height: int


def _piece(index: int, raw_shapes: list[tuple[tuple[int, ...], int, int]]) -> PieceDef:
    shapes = tuple(
        PieceShape(index, r, cols, w, h) for r, (cols, w, h) in enumerate(raw_shapes)
    )
    for s in shapes:
        assert s.width == len(s.cols)
        assert all(0 < c < (1 << s.height) for c in s.cols)
    action_size = sum(BOARD_WIDTH - s.width + 1 for s in shapes)
    return PieceDef(
        index,
        PIECE_NAMES[index],
        shapes,
        len(shapes),
        action_size,
        max(s.height for s in shapes),
    )


PIECES: tuple[PieceDef, ...] = (
    _piece(O, [((3, 3), 2, 2)]),
    _piece(I, [((15,), 1, 4), ((1, 1, 1, 1), 4, 1)]),
    _piece(S, [((6, 3), 2, 3), ((1, 3, 2), 3, 2)]),
    _piece(Z, [((3, 6), 2, 3), ((2, 3, 1), 3, 2)]),
    _piece(L, [((7, 1), 2, 3), ((3, 2, 2), 3, 2), ((4, 7), 2, 3), ((1, 1, 3), 3, 2)]),
    _piece(J, [((1, 7), 2, 3), ((3, 1, 1), 3, 2), ((7, 4), 2, 3), ((2, 2, 3), 3, 2)]),
    _piece(T, [((1, 3, 1), 3, 2), ((7, 2), 2, 3), ((2, 3, 2), 3, 2), ((2, 7), 2, 3)]),
)


def legal_action_count(piece: int) -> int:
    """Number of feasible (rotation, column) placements for a piece."""
    return PIECES[piece].action_size


def decode_action(piece: int, index: int) -> tuple[int, int]:
    """Map an action index to (rotation, column), rotation-major order."""
    if not 0 <= index < PIECES[piece].action_size:
        raise ValueError(
            f"action {index} out of range for piece {PIECE_NAMES[piece]} "
            f"(feasible range 0..{PIECES[piece].action_size - 1})"
        )
    return int(ACTION_ROT[piece, index]), int(ACTION_COL[piece, index])


def encode_action(piece: int, rotation: int, column: int) -> int:
    """Inverse of decode_action."""
    index = 0
    for r, shape in enumerate(PIECES[piece].shapes):
        span = BOARD_WIDTH - shape.width + 1
        if r == rotation:
            if not 0 <= column < span:
                raise ValueError(f"column {column} invalid for rotation {rotation}")
            return index + column
        index += span
    raise ValueError(f"rotation {rotation} invalid for piece {PIECE_NAMES[piece]}")


def shape_of(piece: int, rotation: int) -> PieceShape:
    return PIECES[piece].shapes[rotation]


# Flat tables consumed by the compiled kernels.
N_PIECES = 7
_MAX_ROT = 4
_MAX_W = 4

SHAPE_COLS = np.zeros((N_PIECES, _MAX_ROT, _MAX_W), dtype=np.int64)
SHAPE_W = np.zeros((N_PIECES, _MAX_ROT), dtype=np.int64)
SHAPE_H = np.zeros((N_PIECES, _MAX_ROT), dtype=np.int64)
ROT_NUM = np.zeros(N_PIECES, dtype=np.int64)
ACTION_SIZE = np.zeros(N_PIECES, dtype=np.int64)
ACTION_ROT = np.full((N_PIECES, MAX_ACTIONS), -1, dtype=np.int64)
ACTION_COL = np.full((N_PIECES, MAX_ACTIONS), -1, dtype=np.int64)

for _p in PIECES:
    ROT_NUM[_p.index] = _p.rotation_num
    ACTION_SIZE[_p.index] = _p.action_size
    _idx = 0
    for _s in _p.shapes:
        SHAPE_W[_p.index, _s.rotation] = _s.width
        SHAPE_H[_p.index, _s.rotation] = _s.height
        for _i, _c in enumerate(_s.cols):
            SHAPE_COLS[_p.index, _s.rotation, _i] = _c
        for _col in range(BOARD_WIDTH - _s.width + 1):
            ACTION_ROT[_p.index, _idx] = _s.rotation
            ACTION_COL[_p.index, _idx] = _col
            _idx += 1
    assert _idx == _p.action_size

for _arr in (SHAPE_COLS, SHAPE_W, SHAPE_H, ROT_NUM, ACTION_SIZE, ACTION_ROT, ACTION_COL):
    _arr.setflags(write=False)
