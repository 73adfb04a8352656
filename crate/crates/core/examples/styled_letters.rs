//! Map letters to the mathematical alphanumeric block.

use texmath::lexicon::{decode_styled, map_unicode, Glyph, MathStyle};

fn main() {
    for style in [MathStyle::Bold, MathStyle::Italic, MathStyle::BoldItalic, MathStyle::DoubleStruck] {
        let row: String = "AhRz"
            .chars()
            .map(|c| match map_unicode(c, style).expect("map") {
                Glyph::Char(ch) => format!("{ch} U+{:05X}  ", ch as u32),
                Glyph::Styled { base, .. } => format!("{base} (styled)  "),
            })
            .collect();
        println!("{:<14}{row}", style.to_string());
    }
    println!("{:?}", decode_styled('\u{211D}'));
}
