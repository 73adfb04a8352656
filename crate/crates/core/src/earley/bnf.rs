use super::grammar::{Grammar, GrammarBuilder, GrammarError, Symbol};

/// Parse a small BNF dialect:
///
/// ```text
/// # comment
/// start S
/// S -> S "+" S @plus | "a"
/// E -> ε | E "x"
/// ```
///
/// Quoted names are terminals, bare names nonterminals. `@tag` labels an
/// alternative, `ε` or an empty alternative is the empty string. Without a
/// `start` line the first left-hand side is the start symbol.
pub fn parse_bnf(text: &str) -> Result<Grammar, GrammarError> {
    let mut b = GrammarBuilder::new();
    let mut start: Option<String> = None;
    let mut defined = std::collections::HashSet::new();
    let mut referenced: Vec<(String, usize)> = Vec::new();
    let mut last_lhs: Option<Symbol> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| GrammarError::Syntax { line: line_no, message: message.to_string() };
        if let Some(rest) = line.strip_prefix("start ") {
            start = Some(rest.trim().to_string());
            continue;
        }
        let (lhs, body) = if let Some(rest) = line.strip_prefix('|') {
            (last_lhs.ok_or_else(|| err("continuation without a rule"))?, rest)
        } else {
            let (name, body) = line.split_once("->").ok_or_else(|| err("expected `->`"))?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
                return Err(err("bad nonterminal name"));
            }
            if start.is_none() {
                start = Some(name.to_string());
            }
            defined.insert(name.to_string());
            (b.nonterminal(name), body)
        };
        last_lhs = Some(lhs);
        for alt in split_alternatives(body).map_err(|m| err(&m))? {
            let mut rhs = Vec::new();
            let mut tag = String::new();
            for tok in lex_alternative(&alt).map_err(|m| err(&m))? {
                match tok {
                    Lexeme::Terminal(t) => rhs.push(b.terminal(&t)),
                    Lexeme::Name(n) if n == "ε" => {}
                    Lexeme::Name(n) => {
                        referenced.push((n.clone(), line_no));
                        rhs.push(b.nonterminal(&n));
                    }
                    Lexeme::Tag(t) => tag = t,
                }
            }
            b.rule(lhs, rhs, &tag);
        }
    }
    for (name, line) in referenced {
        if !defined.contains(&name) {
            return Err(GrammarError::Syntax { line, message: format!("nonterminal {name} has no rules") });
        }
    }
    let start = start.ok_or(GrammarError::Syntax { line: 0, message: "empty grammar".into() })?;
    b.build(&start)
}

fn strip_comment(line: &str) -> &str {
    let mut quote = None;
    for (i, c) in line.char_indices() {
        match (quote, c) {
            (None, '"' | '\'') => quote = Some(c),
            (Some(q), c) if c == q => quote = None,
            (None, '#') => return &line[..i],
            _ => {}
        }
    }
    line
}

fn split_alternatives(body: &str) -> Result<Vec<String>, String> {
    let mut out = vec![String::new()];
    let mut quote = None;
    for c in body.chars() {
        match (quote, c) {
            (None, '|') => out.push(String::new()),
            (None, '"' | '\'') => {
                quote = Some(c);
                out.last_mut().unwrap().push(c);
            }
            (Some(q), c) if c == q => {
                quote = None;
                out.last_mut().unwrap().push(c);
            }
            _ => out.last_mut().unwrap().push(c),
        }
    }
    if quote.is_some() {
        return Err("unterminated quote".into());
    }
    Ok(out)
}

enum Lexeme {
    Terminal(String),
    Name(String),
    Tag(String),
}

fn lex_alternative(alt: &str) -> Result<Vec<Lexeme>, String> {
    let chars: Vec<char> = alt.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' || c == '\'' {
            let end = chars[i + 1..].iter().position(|&d| d == c).ok_or("unterminated quote")? + i + 1;
            let name: String = chars[i + 1..end].iter().collect();
            if name.is_empty() {
                return Err("empty terminal".into());
            }
            out.push(Lexeme::Terminal(name));
            i = end + 1;
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '"' {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if let Some(tag) = word.strip_prefix('@') {
                out.push(Lexeme::Tag(tag.to_string()));
            } else {
                out.push(Lexeme::Name(word));
            }
        }
    }
    Ok(out)
}
