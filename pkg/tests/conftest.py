import numpy as np
import pytest

from bittetris.engine import Board
from bittetris.pieces import T, shape_of

# The worked transition used throughout: a T piece dropped at column 5 on a
# 10-high board, clearing two rows.
PRE_COLUMNS = (127, 127, 14, 31, 31, 3, 1, 63, 63, 63)
PRE_CLEAR_COLUMNS = (127, 127, 14, 31, 31, 7, 15, 63, 63, 63)
AFTER_COLUMNS = (31, 31, 2, 7, 7, 1, 3, 15, 15, 15)
FIXTURE_FEATURES = (2.0, 6.0, 22.0, 12.0, 1.0, 3.0, 1.0, 1.0, 4.0)

DT10 = np.array([-2.18, 2.42, -2.17, -3.31, 0.95, -2.22, -0.81, -9.65, 1.27])
DT20 = np.array([-2.68, 1.38, -2.41, -6.32, 2.03, -2.71, -0.43, -9.48, 0.89])
PPO_BEST = np.array([-0.51, 0.16, -0.40, -0.75, -0.18, -0.39, -0.17, -0.83, 0.36])


@pytest.fixture
def pre_board():
    return Board(PRE_COLUMNS, 10)


@pytest.fixture
def after_board():
    return Board(AFTER_COLUMNS, 10)


@pytest.fixture
def t_shape():
    return shape_of(T, 3)  # the {2, 7} rotation
