//! Tokenizer and reader for the s-expression surface.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{loc}: {msg}")]
pub struct ParseError {
    pub loc: Loc,
    pub msg: String,
}

pub fn err<T>(loc: Loc, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { loc, msg: msg.into() })
}

#[derive(Clone, Debug)]
pub enum Sexp {
    Atom(String, Loc),
    List(Vec<Sexp>, Loc),
}

impl Sexp {
    pub fn loc(&self) -> Loc {
        match self {
            Sexp::Atom(_, l) | Sexp::List(_, l) => *l,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a, _) => Some(a),
            Sexp::List(..) => None,
        }
    }

    /// Head keyword and arguments of a list form.
    pub fn form(&self) -> Option<(&str, &[Sexp])> {
        match self {
            Sexp::List(items, _) => match items.split_first() {
                Some((Sexp::Atom(h, _), rest)) => Some((h, rest)),
                _ => None,
            },
            Sexp::Atom(..) => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a, _) => f.write_str(a),
            Sexp::List(items, _) => {
                f.write_str("(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}", x)?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Read every top-level form in `text`. Comments run from `;` to the end
/// of the line.
pub fn read_all(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, Loc)> = Vec::new();
    let mut top = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let here = Loc { line, col };
        match c {
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '(' => {
                chars.next();
                col += 1;
                stack.push((Vec::new(), here));
            }
            ')' => {
                chars.next();
                col += 1;
                let Some((items, start)) = stack.pop() else { return err(here, "unbalanced ')'") };
                let node = Sexp::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
            _ => {
                let mut tok = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    tok.push(c);
                    chars.next();
                    col += 1;
                }
                let node = Sexp::Atom(tok, here);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
        }
    }
    if let Some((_, start)) = stack.pop() {
        return err(start, "unclosed '('");
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_comments() {
        let xs = read_all("; header\n(a (b c)\n   d) e").unwrap();
        assert_eq!(xs.len(), 2);
        assert_eq!(xs[0].loc(), Loc { line: 2, col: 1 });
        assert_eq!(xs[1].loc(), Loc { line: 3, col: 7 });
        assert_eq!(xs[0].to_string(), "(a (b c) d)");
    }

    #[test]
    fn unbalanced() {
        assert_eq!(read_all("(a\n (b)").unwrap_err().loc, Loc { line: 1, col: 1 });
        assert_eq!(read_all("a)").unwrap_err().loc, Loc { line: 1, col: 2 });
    }
}
