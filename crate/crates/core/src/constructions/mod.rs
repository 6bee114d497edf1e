//! Explicit objects from the construction: the Sturmian base word, the
//! reference SFTs `H_1`, `H_2`, `H_3`, finite construction stages and the
//! product with a full shift.

pub mod stages;
pub mod sturmian;

pub use stages::{build_stage_oracle, eliminate_periodic_stage, Family, StageConfig, StageOracle};
pub use sturmian::{factor_absent, sturmian_letters, type1_word, QuadIrrational, SturmianParams};

use crate::cover::SubshiftOracle;
use crate::error::{Error, Result};
use crate::sft::SftSpec;
use crate::words::Alphabet;

/// `h1` forbids `111`, `h2` forbids `11`, `h3` forbids `11` and `1001`.
pub fn reference_sft(name: &str) -> Result<SftSpec> {
    let words: &[&str] = match name {
        "h1" => &["111"],
        "h2" => &["11"],
        "h3" => &["11", "1001"],
        other => return Err(Error::InvalidArgument(format!("unknown reference shift {other:?}"))),
    };
    SftSpec::from_words(&Alphabet::binary(), words)
}

/// `X × {0,1}^ℤ`; the pair `(a, b)` is the letter `2a + b`.
pub fn product_with_full_shift(oracle: &SubshiftOracle) -> Result<SubshiftOracle> {
    SubshiftOracle::product(oracle.clone(), 2)
}
