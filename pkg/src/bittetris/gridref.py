"""Naive 2-D grid reference for the bitboard engine and feature extraction.

Everything here is explicit cell-by-cell loops, no bit tricks: the point is
an independent implementation to diff the optimized kernels against. The
grid carries 4 overflow rows above the playfield so placements that end a
game are representable, mirroring the bitboard's headroom band.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import Board
from .features import N_FEATURES
from .pieces import BOARD_WIDTH, PieceShape, shape_of


@dataclass
class GridBoard:
    """Boolean matrix, rows[r][c], row 0 at the bottom; rows h..h+3 are overflow."""

    rows: list[list[bool]]
    height: int

    @classmethod
    def empty(cls, height: int = 10) -> "GridBoard":
        return cls([[False] * BOARD_WIDTH for _ in range(height + 4)], height)

    def cell(self, column: int, row: int) -> bool:
        if row >= len(self.rows):
            return False
        return self.rows[row][column]

    def filled_cells(self) -> int:
        return sum(1 for row in self.rows for v in row if v)

    def copy(self) -> "GridBoard":
        return GridBoard([row[:] for row in self.rows], self.height)


def to_grid(board: Board) -> GridBoard:
    g = GridBoard.empty(board.height)
    for c in range(BOARD_WIDTH):
        for r in range(board.height + 4):
            if (board.columns[c] >> r) & 1:
                g.rows[r][c] = True
    return g


def from_grid(g: GridBoard) -> Board:
    cols = [0] * BOARD_WIDTH
    for c in range(BOARD_WIDTH):
        for r in range(len(g.rows)):
            if g.rows[r][c]:
                cols[c] |= 1 << r
    return Board(tuple(cols), g.height)


def shape_cells(shape: PieceShape) -> list[tuple[int, int]]:
    """(column offset, row offset) of every cell of the shape."""
    cells = []
    for dx, pattern in enumerate(shape.cols):
        for dy in range(shape.height):
            if (pattern >> dy) & 1:
                cells.append((dx, dy))
    return cells


@dataclass
class OracleStep:
    after: GridBoard
    reward: int
    drop_height: int
    cleared_rows: list[int]        # pre-clear row indices, ascending
    piece_cells: list[tuple[int, int]]  # absolute pre-clear cells of the piece
    done: bool


def oracle_step(g: GridBoard, piece: int, rotation: int, column: int) -> OracleStep:
    """Reference step: smallest non-overlapping rest offset, then row compaction."""
    shape = shape_of(piece, rotation)
    cells = shape_cells(shape)
    h = g.height
    d = 0
    while True:
        if all(not g.cell(column + dx, d + dy) for dx, dy in cells):
            break
        d += 1
    placed = g.copy()
    abs_cells = []
    for dx, dy in cells:
        row = d + dy
        assert row < len(placed.rows), "placement escaped the overflow band"
        placed.rows[row][column + dx] = True
        abs_cells.append((column + dx, row))

    cleared = [r for r in range(len(placed.rows)) if all(placed.rows[r])]
    after_rows = [row for r, row in enumerate(placed.rows) if r not in cleared]
    while len(after_rows) < h + 4:
        after_rows.append([False] * BOARD_WIDTH)
    after = GridBoard(after_rows, h)

    done = any(after.rows[r][c] for r in range(h, h + 4) for c in range(BOARD_WIDTH))
    return OracleStep(after, len(cleared), d, cleared, abs_cells, done)


def _column_top(g: GridBoard, c: int) -> int:
    """Highest filled row of a column, -1 when empty."""
    for r in range(len(g.rows) - 1, -1, -1):
        if g.rows[r][c]:
            return r
    return -1


def oracle_features(step: OracleStep, shape: PieceShape) -> np.ndarray:
    """The nine features of a transition, loop-based."""
    out = np.zeros(N_FEATURES, dtype=np.float64)
    out[0] = step.drop_height + (shape.height - 1) / 2
    if step.reward > 0:
        in_cleared = sum(1 for (_, r) in step.piece_cells if r in step.cleared_rows)
        out[1] = step.reward * in_cleared
    out[2:] = oracle_board_features(step.after)
    return out


def oracle_board_features(g: GridBoard) -> np.ndarray:
    """The seven board-only features (all but landing height and eroded cells)."""
    h = g.height
    rows = g.rows
    n_rows = len(rows)
    out = np.zeros(N_FEATURES - 2, dtype=np.float64)

    # Row transitions: border columns count as filled inside the playfield only.
    rowt = 0
    for r in range(h + 4):
        row = rows[r]
        border = r < h
        if row[0] != border:
            rowt += 1
        if row[9] != border:
            rowt += 1
        for c in range(9):
            if row[c] != row[c + 1]:
                rowt += 1
    out[0] = rowt

    # Column transitions: the floor counts as filled; scan past the top edge.
    colt = 0
    for c in range(BOARD_WIDTH):
        prev = True
        for r in range(h + 5):
            cur = rows[r][c] if r < n_rows else False
            if cur != prev:
                colt += 1
            prev = cur
    out[1] = colt

    hole_count = 0
    hole_row_set = set()
    for c in range(BOARD_WIDTH):
        top = _column_top(g, c)
        for r in range(top):
            if not rows[r][c]:
                hole_count += 1
                hole_row_set.add(r)
    out[2] = hole_count
    out[5] = len(hole_row_set)

    # Board well: running count of an empty run, added whenever the current
    # empty cell has both horizontal neighbors filled. Playfield rows only.
    well = 0
    for c in range(BOARD_WIDTH):
        y = 0
        for r in range(h):
            row = rows[r]
            if not row[c]:
                y += 1
                left = row[c - 1] if c > 0 else True
                right = row[c + 1] if c < 9 else True
                if left and right:
                    well += y
            else:
                y = 0
    out[3] = well

    # Hole depth: filled cells strictly above the lowest empty cell per column.
    hdepth = 0
    for c in range(BOARD_WIDTH):
        lowest_empty = 0
        while lowest_empty < n_rows and rows[lowest_empty][c]:
            lowest_empty += 1
        for r in range(lowest_empty + 1, n_rows):
            if rows[r][c]:
                hdepth += 1
    out[4] = hdepth

    heights = [_column_top(g, c) for c in range(BOARD_WIDTH)]
    seen = set()
    for c in range(9):
        dh = heights[c] - heights[c + 1]
        if -2 <= dh <= 2:
            seen.add(dh)
    out[6] = len(seen)

    return out


def cleared_rows_mask(step: OracleStep) -> int:
    m = 0
    for r in step.cleared_rows:
        m |= 1 << r
    return m
