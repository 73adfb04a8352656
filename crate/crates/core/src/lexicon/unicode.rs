//! Mathematical Alphanumeric Symbols (Plane 1) mapping.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::{LexiconError, MathStyle};

/// Result of mapping a character under a math style.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Glyph {
    /// A codepoint that carries the style by itself (or the unchanged
    /// character for upright).
    Char(char),
    /// No styled codepoint exists; the style must travel as an attribute.
    Styled { base: char, style: MathStyle },
}

impl Glyph {
    pub fn text(&self) -> String {
        match *self {
            Glyph::Char(c) => c.to_string(),
            Glyph::Styled { base, .. } => base.to_string(),
        }
    }

    /// The style that still needs an explicit attribute, if any.
    pub fn pending_style(&self) -> Option<MathStyle> {
        match *self {
            Glyph::Char(_) => None,
            Glyph::Styled { style, .. } => Some(style),
        }
    }
}

/// (capital A, small a, digit zero) block starts per style.
fn block_starts(style: MathStyle) -> Option<(u32, u32, Option<u32>)> {
    Some(match style {
        MathStyle::Bold => (0x1D400, 0x1D41A, Some(0x1D7CE)),
        MathStyle::Italic => (0x1D434, 0x1D44E, None),
        MathStyle::BoldItalic => (0x1D468, 0x1D482, None),
        MathStyle::Script => (0x1D49C, 0x1D4B6, None),
        MathStyle::Fraktur => (0x1D504, 0x1D51E, None),
        MathStyle::DoubleStruck => (0x1D538, 0x1D552, Some(0x1D7D8)),
        MathStyle::Sans => (0x1D5A0, 0x1D5BA, Some(0x1D7E2)),
        MathStyle::Monospace => (0x1D670, 0x1D68A, Some(0x1D7F6)),
        MathStyle::Upright => return None,
    })
}

/// Capital Alpha start per style; small alpha sits 26 slots later.
fn greek_start(style: MathStyle) -> Option<u32> {
    match style {
        MathStyle::Bold => Some(0x1D6A8),
        MathStyle::Italic => Some(0x1D6E2),
        MathStyle::BoldItalic => Some(0x1D71C),
        _ => None,
    }
}

/// Reserved slots in the SMP block, filled by Letterlike Symbols.
fn reserved(style: MathStyle, ch: char) -> Option<char> {
    let cp = match (style, ch) {
        (MathStyle::Italic, 'h') => 0x210E,
        (MathStyle::Script, 'B') => 0x212C,
        (MathStyle::Script, 'E') => 0x2130,
        (MathStyle::Script, 'F') => 0x2131,
        (MathStyle::Script, 'H') => 0x210B,
        (MathStyle::Script, 'I') => 0x2110,
        (MathStyle::Script, 'L') => 0x2112,
        (MathStyle::Script, 'M') => 0x2133,
        (MathStyle::Script, 'R') => 0x211B,
        (MathStyle::Script, 'e') => 0x212F,
        (MathStyle::Script, 'g') => 0x210A,
        (MathStyle::Script, 'o') => 0x2134,
        (MathStyle::Fraktur, 'C') => 0x212D,
        (MathStyle::Fraktur, 'H') => 0x210C,
        (MathStyle::Fraktur, 'I') => 0x2111,
        (MathStyle::Fraktur, 'R') => 0x211C,
        (MathStyle::Fraktur, 'Z') => 0x2128,
        (MathStyle::DoubleStruck, 'C') => 0x2102,
        (MathStyle::DoubleStruck, 'H') => 0x210D,
        (MathStyle::DoubleStruck, 'N') => 0x2115,
        (MathStyle::DoubleStruck, 'P') => 0x2119,
        (MathStyle::DoubleStruck, 'Q') => 0x211A,
        (MathStyle::DoubleStruck, 'R') => 0x211D,
        (MathStyle::DoubleStruck, 'Z') => 0x2124,
        _ => return None,
    };
    char::from_u32(cp)
}

fn is_greek(ch: char) -> bool {
    matches!(ch as u32, 0x391..=0x3A1 | 0x3A3..=0x3A9 | 0x3B1..=0x3C9)
}

/// Map a letter or digit to its styled codepoint.
///
/// SMP codepoints are preferred; reserved slots map to their BMP letterlike
/// symbol; anything else keeps the base character and reports the style
/// as pending.
pub fn map_unicode(ch: char, style: MathStyle) -> Result<Glyph, LexiconError> {
    let alnum = ch.is_ascii_alphanumeric() || is_greek(ch);
    if !alnum {
        return Err(LexiconError::Unmappable { input: ch.to_string(), style });
    }
    if style == MathStyle::Upright {
        return Ok(Glyph::Char(ch));
    }
    if let Some(c) = reserved(style, ch) {
        return Ok(Glyph::Char(c));
    }
    let cp = ch as u32;
    let mapped = if ch.is_ascii_uppercase() {
        block_starts(style).map(|(cap, _, _)| cap + (cp - 'A' as u32))
    } else if ch.is_ascii_lowercase() {
        block_starts(style).map(|(_, small, _)| small + (cp - 'a' as u32))
    } else if ch.is_ascii_digit() {
        block_starts(style).and_then(|(_, _, d)| d).map(|d| d + (cp - '0' as u32))
    } else if let Some(start) = greek_start(style) {
        // ϴ occupies the slot of the unassigned U+03A2, so capitals line up
        // directly; smalls start after the nabla slot.
        if cp <= 0x3A9 {
            Some(start + (cp - 0x391))
        } else {
            Some(start + 26 + (cp - 0x3B1))
        }
    } else {
        None
    };
    Ok(match mapped.and_then(char::from_u32) {
        Some(c) => Glyph::Char(c),
        None => Glyph::Styled { base: ch, style },
    })
}

fn inverse_table() -> &'static HashMap<char, (char, MathStyle)> {
    static TABLE: OnceLock<HashMap<char, (char, MathStyle)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = HashMap::new();
        let bases = ('A'..='Z')
            .chain('a'..='z')
            .chain('0'..='9')
            .chain((0x391u32..=0x3C9).filter_map(char::from_u32).filter(|c| is_greek(*c)));
        for base in bases {
            for style in MathStyle::ALL {
                if style == MathStyle::Upright {
                    continue;
                }
                if let Ok(Glyph::Char(c)) = map_unicode(base, style) {
                    t.insert(c, (base, style));
                }
            }
        }
        t
    })
}

/// Recover `(base, style)` from a styled codepoint produced by
/// [`map_unicode`].
pub fn decode_styled(ch: char) -> Option<(char, MathStyle)> {
    inverse_table().get(&ch).copied()
}
