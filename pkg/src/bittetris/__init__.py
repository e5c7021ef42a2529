"""Bitboard Tetris: simulation engine, afterstate features, RL trainers,
and an evaluation/benchmark CLI."""

from .engine import (
    Board,
    GameState,
    PieceGenerator,
    TetrisGame,
    apply_action,
    clear_lines,
    column_top_index,
    delete_line_mask,
    drop,
    fill_below_highest,
    is_game_over,
    reset,
)
from .features import (
    FEATURE_NAMES,
    AfterstateBatch,
    afterstate_batch,
    features_of_transition,
)
from .pieces import PIECES, decode_action, legal_action_count
from .policy import LinearCritic, LinearPolicy, actor_distribution, greedy_action, temperature
from .weights import PRESETS, load_weights, save_weights

__version__ = "0.1.0"

__all__ = [
    "Board", "GameState", "PieceGenerator", "TetrisGame",
    "apply_action", "clear_lines", "column_top_index", "delete_line_mask",
    "drop", "fill_below_highest", "is_game_over", "reset",
    "FEATURE_NAMES", "AfterstateBatch", "afterstate_batch", "features_of_transition",
    "PIECES", "decode_action", "legal_action_count",
    "LinearCritic", "LinearPolicy", "actor_distribution", "greedy_action", "temperature",
    "PRESETS", "load_weights", "save_weights",
]
