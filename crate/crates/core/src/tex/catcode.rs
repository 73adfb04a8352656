use serde::Serialize;

/// The sixteen TeX category codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Catcode {
    Escape = 0,
    BeginGroup = 1,
    EndGroup = 2,
    MathShift = 3,
    Alignment = 4,
    EndOfLine = 5,
    Parameter = 6,
    Superscript = 7,
    Subscript = 8,
    Ignored = 9,
    Space = 10,
    Letter = 11,
    Other = 12,
    Active = 13,
    Comment = 14,
    Invalid = 15,
}

impl Catcode {
    pub const ALL: [Catcode; 16] = [
        Catcode::Escape,
        Catcode::BeginGroup,
        Catcode::EndGroup,
        Catcode::MathShift,
        Catcode::Alignment,
        Catcode::EndOfLine,
        Catcode::Parameter,
        Catcode::Superscript,
        Catcode::Subscript,
        Catcode::Ignored,
        Catcode::Space,
        Catcode::Letter,
        Catcode::Other,
        Catcode::Active,
        Catcode::Comment,
        Catcode::Invalid,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Catcode> {
        Catcode::ALL.get(code as usize).copied()
    }
}

/// A category-code assignment for every character.
///
/// Only the plain-TeX math settings are supported; there is no `\catcode`
/// reassignment at run time.
#[derive(Clone, Debug, Default)]
pub struct CatcodeTable {
    _private: (),
}

impl CatcodeTable {
    pub fn plain() -> Self {
        CatcodeTable { _private: () }
    }

    pub fn get(&self, ch: char) -> Catcode {
        match ch {
            '\\' => Catcode::Escape,
            '{' => Catcode::BeginGroup,
            '}' => Catcode::EndGroup,
            '$' => Catcode::MathShift,
            '&' => Catcode::Alignment,
            '\r' | '\n' => Catcode::EndOfLine,
            '#' => Catcode::Parameter,
            '^' => Catcode::Superscript,
            '_' => Catcode::Subscript,
            '\0' => Catcode::Ignored,
            ' ' | '\t' => Catcode::Space,
            'a'..='z' | 'A'..='Z' => Catcode::Letter,
            '~' => Catcode::Active,
            '%' => Catcode::Comment,
            '\u{7f}' => Catcode::Invalid,
            c if c.is_control() => Catcode::Invalid,
            _ => Catcode::Other,
        }
    }
}
