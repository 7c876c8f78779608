//! Subshifts of finite type, their languages, higher-block recodings and
//! towers of one-block factor maps.

mod chain;
mod recode;
mod sft;
mod words;

pub use chain::{validate_chain, FactorChain, FactorMap, ValidationReport};
pub use recode::{higher_block_recode, HigherBlock};
pub use sft::{Sft, SpecificationGaps};
pub use words::{WordIndex, WordList};

/// A symbol of a 0-based contiguous alphabet.
pub type Symbol = u32;

/// Which specification property a connector search uses: connectors of
/// length at most `p` (weak) or exactly `p` (exact).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpecMode {
    Weak,
    Exact,
}

/// Resource limits for enumeration-based passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of words any single enumeration may visit.
    pub words: u128,
    /// Maximum alphabet size of a recoded shift.
    pub alphabet: usize,
    /// Maximum number of entries in a dense per-word table kept in memory.
    pub table: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            words: 50_000_000,
            alphabet: 65_535,
            table: 1 << 22,
        }
    }
}

impl Caps {
    pub(crate) fn check_words(&self, what: &'static str, needed: u128) -> crate::Result<()> {
        if needed > self.words {
            return Err(crate::Error::ResourceCap {
                what,
                needed,
                cap: self.words,
            });
        }
        Ok(())
    }

    pub(crate) fn check_table(&self, what: &'static str, needed: u128) -> crate::Result<()> {
        if needed > self.table {
            return Err(crate::Error::ResourceCap {
                what,
                needed,
                cap: self.table,
            });
        }
        Ok(())
    }
}
