import numpy as np
import pytest

from bittetris.engine import Board, GameState, PieceGenerator, reset
from bittetris.features import (
    afterstate_batch,
    board_well,
    column_transitions,
    empty_board_features,
    eroded_piece_cells,
    features_of_transition,
    hole_depth,
    holes,
    landing_height,
    pattern_diversity,
    row_transitions,
    rows_with_holes,
    transition_by_action,
)
from bittetris.pieces import I, O, T, decode_action, legal_action_count, shape_of

from conftest import AFTER_COLUMNS, FIXTURE_FEATURES, PRE_COLUMNS


class TestLandingHeight:
    def test_fixture(self):
        assert landing_height(1, 3) == 2.0

    def test_floor(self):
        assert landing_height(0, 1) == 0.0

    def test_direct_formula(self):
        assert landing_height(5, 4) == 6.5


class TestErodedPieceCells:
    def test_fixture(self, t_shape):
        state = GameState.zeros(10)
        state.slots[10] = 2   # reward
        state.slots[13] = 1   # drop height
        state.slots[14] = 6   # cleared-row mask
        assert eroded_piece_cells(state, t_shape) == 6

    def test_zero_reward_short_circuit(self, t_shape):
        state = GameState.zeros(10)
        state.slots[14] = 6
        assert eroded_piece_cells(state, t_shape) == 0

    def test_horizontal_i_through_single_row(self):
        state = GameState.zeros(10)
        state.slots[10] = 1
        state.slots[13] = 0
        state.slots[14] = 1
        assert eroded_piece_cells(state, shape_of(I, 1)) == 4


class TestRowTransitions:
    def test_fixture(self, after_board):
        assert row_transitions(after_board) == 22

    def test_empty_board_is_twice_height(self):
        assert row_transitions(Board.empty(10)) == 20
        assert row_transitions(Board.empty(20)) == 40

    def test_full_board(self):
        assert row_transitions(Board((0x3FF,) * 10, 10)) == 0


class TestColumnTransitions:
    def test_fixture(self, after_board):
        assert column_transitions(after_board) == 12

    def test_empty_board(self):
        assert column_transitions(Board.empty(10)) == 10

    def test_single_bottom_cell(self):
        cols = [0] * 10
        cols[3] = 1
        assert column_transitions(Board(tuple(cols), 10)) == 10


class TestHoles:
    def test_fixture(self, after_board):
        assert holes(after_board) == 1

    def test_empty(self):
        assert holes(Board.empty(10)) == 0

    def test_single_covered_cell(self):
        cols = [0] * 10
        cols[4] = 0b101
        assert holes(Board(tuple(cols), 10)) == 1


class TestBoardWell:
    def test_fixture(self, after_board):
        assert board_well(after_board) == 3

    def test_empty(self):
        assert board_well(Board.empty(10)) == 0

    def test_depth_two_well_counts_one_plus_two(self):
        cols = [0] * 10
        cols[0] = 3
        cols[2] = 3
        assert board_well(Board(tuple(cols), 10)) == 3

    def test_wall_flanks_edge_wells(self):
        cols = [0] * 10
        cols[1] = 0b11
        assert board_well(Board(tuple(cols), 10)) == 3  # column 0 against the wall


class TestHoleDepth:
    def test_fixture(self, after_board):
        assert hole_depth(after_board) == 1

    def test_empty(self):
        assert hole_depth(Board.empty(10)) == 0

    def test_filled_above_lowest_empty(self):
        cols = [0] * 10
        cols[0] = 0b1101
        assert hole_depth(Board(tuple(cols), 10)) == 2


class TestRowsWithHoles:
    def test_fixture(self, after_board):
        assert rows_with_holes(after_board) == 1

    def test_empty(self):
        assert rows_with_holes(Board.empty(10)) == 0

    def test_same_row_holes_collapse(self):
        cols = [0] * 10
        cols[2] = 0b101  # hole in row 1
        cols[7] = 0b101  # hole in the same row
        board = Board(tuple(cols), 10)
        assert holes(board) == 2
        assert rows_with_holes(board) == 1


class TestPatternDiversity:
    def test_fixture(self, after_board):
        assert pattern_diversity(after_board) == 4

    def test_empty(self):
        assert pattern_diversity(Board.empty(10)) == 1

    def test_staircase(self):
        cols = tuple((1 << (i + 1)) - 1 for i in range(10))
        assert pattern_diversity(Board(cols, 10)) == 1


class TestFeaturesOfTransition:
    def test_fixture_all_nine(self, pre_board, t_shape):
        tf = features_of_transition(pre_board, t_shape, 5)
        assert tuple(tf.features) == FIXTURE_FEATURES
        assert tf.reward == 2
        assert tf.after.columns == AFTER_COLUMNS
        assert not tf.done

    def test_o_on_empty_board(self):
        tf = features_of_transition(Board.empty(10), shape_of(O, 0), 0)
        # row transitions: 8 border empties left, 10 right, one interior edge pair
        assert tuple(tf.features) == (0.5, 0.0, 20.0, 10.0, 0.0, 0.0, 0.0, 0.0, 2.0)
        assert tf.reward == 0

    def test_zero_reward_zero_eroded(self, pre_board):
        tf = features_of_transition(pre_board, shape_of(O, 0), 2)
        assert tf.reward == 0
        assert tf.features[1] == 0.0


class TestAfterstateBatch:
    def _state(self, piece):
        gen = PieceGenerator("random", 0)
        state = reset(gen, 10)
        state.slots[12] = piece
        return state

    def test_o_piece_masks_nine(self):
        batch = afterstate_batch(self._state(O))
        assert batch.mask.sum() == 9
        assert batch.mask.shape == (34,)
        assert batch.features.shape == (34, 9)

    def test_t_piece_masks_thirty_four(self):
        batch = afterstate_batch(self._state(T))
        assert batch.mask.sum() == 34

    def test_rows_match_per_transition_features(self):
        state = self._state(T)
        state.slots[:10] = PRE_COLUMNS
        batch = afterstate_batch(state)
        for a in range(34):
            if batch.mask[a]:
                tf = transition_by_action(state, a)
                assert np.array_equal(batch.features[a], tf.features)
            else:
                assert not batch.features[a].any()

    def test_masked_rows_zeroed(self):
        batch = afterstate_batch(self._state(O))
        assert not batch.features[9:].any()

    def test_flat_is_306(self):
        batch = afterstate_batch(self._state(O))
        assert batch.flat().shape == (306,)


def test_empty_board_feature_vector():
    assert empty_board_features(10).tolist() == [0, 0, 20, 10, 0, 0, 0, 0, 1]
    assert empty_board_features(20).tolist() == [0, 0, 40, 10, 0, 0, 0, 0, 1]


def test_mask_matches_action_count():
    for piece in range(7):
        gen = PieceGenerator("random", 0)
        state = reset(gen, 10)
        state.slots[12] = piece
        batch = afterstate_batch(state)
        n = legal_action_count(piece)
        assert batch.mask[:n].all()
        assert not batch.mask[n:].any()
