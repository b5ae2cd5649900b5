//! Sender-receiver coordination games over discrete noisy channels, in exact
//! rational arithmetic.
//!
//! The sender encodes one of finitely many states as a codeword transmitted
//! through a memoryless noisy channel; the receiver decodes the channel
//! output as a state. Both players are paid only on correct decoding. This
//! crate computes best-response tie structures, applies tie-breaking rules,
//! verifies whether a codebook is a Nash code by exhaustive deviation
//! enumeration, searches for receiver-optimal codes, and runs exhaustive
//! desk-scale verification of the structural results that make those
//! searches work (receiver-optimal codes are Nash; monotonically decoded
//! binary codes are Nash; deterministic monotonic tie-breaking is
//! fixed-order tie-breaking).
//!
//! All probabilities and payoffs are exact rationals ([`rat::Rat`]): ties are
//! knife-edge equalities, so no verdict ever touches floating point.

pub mod binary;
pub mod cli;
pub mod decoding;
pub mod equilibrium;
pub mod error;
pub mod instance;
pub mod model;
pub mod rat;
pub mod reference;
pub mod search;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;
pub use rat::Rat;

/// Cap on exhaustive enumerations (deviation candidates per state, codebooks
/// in a global search or sweep). Exceeding it yields
/// [`Error::BudgetExceeded`] rather than an open-ended computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(1 << 20)
    }
}

impl Budget {
    /// Errors unless `need <= budget`.
    pub fn admit(&self, need: u128) -> Result<(), Error> {
        if need > self.0 as u128 {
            Err(Error::BudgetExceeded {
                need,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}
