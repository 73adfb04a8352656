//! TeX tokenization under the plain math catcode table and expansion of a
//! registered macro subset.

mod catcode;
mod error;
mod expand;
mod macros;
mod token;
mod tokenizer;

pub use catcode::{Catcode, CatcodeTable};
pub use error::TexError;
pub use expand::{expand, ExpansionLimits, Expander, InputResolver};
pub use macros::{parse_fixture, DefineMode, MacroDefinition, MacroTable, Origin, PatternPart};
pub use token::{detokenize, Locator, Token, TokenKind};
pub use tokenizer::tokenize;
