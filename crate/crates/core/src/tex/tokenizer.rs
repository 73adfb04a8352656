use std::sync::Arc;

use super::catcode::{Catcode, CatcodeTable};
use super::error::TexError;
use super::token::{Locator, Token};

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    NewLine,
    MidLine,
    SkipBlanks,
}

/// Split `source` into TeX tokens under `table`.
///
/// Comments are dropped, runs of blanks collapse to one space token, blanks
/// at the start of a line and after control words are skipped, and an empty
/// line yields `\par`.
pub fn tokenize(source: &str, source_id: &str, table: &CatcodeTable) -> Result<Vec<Token>, TexError> {
    let id: Arc<str> = Arc::from(source_id);
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let mut state = State::NewLine;
    let (mut line, mut col) = (1u32, 1u32);
    let mut i = 0;
    let loc = |line, col| Locator::new(id.clone(), line, col);

    while i < chars.len() {
        let ch = chars[i];
        let cat = table.get(ch);
        let here = loc(line, col);
        match cat {
            Catcode::Escape => {
                let Some(&first) = chars.get(i + 1) else {
                    return Err(TexError::UnterminatedControlSequence { locator: here });
                };
                let first_cat = table.get(first);
                if first_cat == Catcode::Letter {
                    let mut j = i + 1;
                    while j < chars.len() && table.get(chars[j]) == Catcode::Letter {
                        j += 1;
                    }
                    let name: String = chars[i + 1..j].iter().collect();
                    out.push(Token::control_sequence(name, here));
                    col += (j - i) as u32;
                    i = j;
                    state = State::SkipBlanks;
                } else if first_cat == Catcode::EndOfLine {
                    // `\` at end of line is a control space
                    out.push(Token::control_sequence(" ", here));
                    i += 2;
                    if first == '\r' && chars.get(i) == Some(&'\n') {
                        i += 1;
                    }
                    line += 1;
                    col = 1;
                    state = State::NewLine;
                } else {
                    out.push(Token::control_sequence(first.to_string(), here));
                    i += 2;
                    col += 2;
                    state = if first_cat == Catcode::Space { State::SkipBlanks } else { State::MidLine };
                }
            }
            Catcode::EndOfLine => {
                match state {
                    State::NewLine => out.push(Token::control_sequence("par", here)),
                    State::MidLine => out.push(Token::character(' ', Catcode::Space, here)),
                    State::SkipBlanks => {}
                }
                i += 1;
                if ch == '\r' && chars.get(i) == Some(&'\n') {
                    i += 1;
                }
                line += 1;
                col = 1;
                state = State::NewLine;
            }
            Catcode::Space => {
                if state == State::MidLine {
                    out.push(Token::character(' ', Catcode::Space, here));
                    state = State::SkipBlanks;
                }
                i += 1;
                col += 1;
            }
            Catcode::Comment => {
                while i < chars.len() && table.get(chars[i]) != Catcode::EndOfLine {
                    i += 1;
                }
                if i < chars.len() {
                    if chars[i] == '\r' && chars.get(i + 1) == Some(&'\n') {
                        i += 1;
                    }
                    i += 1;
                    line += 1;
                    col = 1;
                }
                state = State::NewLine;
            }
            Catcode::Ignored => {
                i += 1;
                col += 1;
            }
            Catcode::Invalid => return Err(TexError::InvalidCharacter { ch, locator: here }),
            _ => {
                out.push(Token::character(ch, cat, here));
                i += 1;
                col += 1;
                state = State::MidLine;
            }
        }
    }
    Ok(out)
}
