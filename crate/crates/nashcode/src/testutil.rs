//! Shared fixtures for unit tests.

use crate::model::{Game, Word};
use crate::rat::Rat;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num, den).unwrap()
}

pub fn word(symbols: &[usize]) -> Word {
    Word(symbols.to_vec())
}

/// The three-symbol worked example: see [`crate::reference::ternary_instance`].
pub fn ternary_game() -> Game {
    crate::reference::ternary_instance().game
}

/// The four-codeword binary worked example game (M=4, n=3, eps=1/10).
pub fn binary_game() -> Game {
    crate::reference::binary_instance().game
}
