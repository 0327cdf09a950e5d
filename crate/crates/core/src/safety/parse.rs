//! Parser for the `AG`-rooted safety property language.
//!
//! Grammar, from loosest to tightest binding:
//!
//! ```text
//! property := "AG" expr
//! expr     := term { "|" term }
//! term     := factor { "&" factor }
//! factor   := "!" factor | "(" expr ")" | "true" | "false" | IDENT
//! ```
//!
//! `IDENT` names an atomic proposition (a plant hazard label, or an output
//! symbol when checking a controller in isolation). Other temporal
//! operators are recognised so they can be rejected with a pointed message
//! instead of a generic one: this checker decides invariants only.

use std::fmt;

/// Temporal operator spellings reserved by the rejection logic. Atoms may
/// not use these names.
const TEMPORAL: &[&str] = &["AG", "AF", "AX", "EG", "EF", "EX", "A", "E"];

/// A parsed safety property: `AG` over a boolean state predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetyProperty {
    source: String,
    body: BoolExpr,
}

/// Boolean state predicate under the `AG`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoolExpr {
    Const(bool),
    Atom(String),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PropertyError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("property must be rooted at `AG` (found `{found}`)")]
    NotAgRooted { found: String },
    #[error("temporal operator `{operator}` at position {position}: \
             only `AG` over a boolean expression is supported")]
    TemporalOutsideAg { operator: String, position: usize },
    /// Raised when a property is applied to a model that does not declare
    /// one of its atoms.
    #[error("unknown atomic proposition `{atom}`")]
    UnknownAtom { atom: String },
}

impl SafetyProperty {
    /// Parses a property from its textual form.
    pub fn parse(text: &str) -> Result<Self, PropertyError> {
        let tokens = lex(text)?;
        let mut parser = PropParser { tokens, pos: 0 };
        let body = parser.property()?;
        Ok(SafetyProperty { source: text.to_string(), body })
    }

    /// The predicate required to hold in every reachable state.
    pub fn body(&self) -> &BoolExpr {
        &self.body
    }

    /// The property text as originally written.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Canonical text: `AG` followed by the predicate with minimal
    /// parentheses. Parsing this text yields a structurally identical
    /// property body.
    pub fn canonical_text(&self) -> String {
        self.to_string()
    }

    /// The distinct atoms referenced, in first-appearance order.
    pub fn atoms(&self) -> Vec<&str> {
        let mut atoms = Vec::new();
        collect_atoms(&self.body, &mut atoms);
        atoms
    }
}

fn collect_atoms<'e>(expr: &'e BoolExpr, out: &mut Vec<&'e str>) {
    match expr {
        BoolExpr::Const(_) => {}
        BoolExpr::Atom(name) => {
            if !out.contains(&name.as_str()) {
                out.push(name);
            }
        }
        BoolExpr::Not(inner) => collect_atoms(inner, out),
        BoolExpr::And(lhs, rhs) | BoolExpr::Or(lhs, rhs) => {
            collect_atoms(lhs, out);
            collect_atoms(rhs, out);
        }
    }
}

impl fmt::Display for SafetyProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AG ")?;
        write_expr(f, &self.body, 0)
    }
}

/// Writes `expr` with parentheses only where the surrounding precedence
/// requires them. `min_level`: 0 = or-context, 1 = and-context, 2 = operand
/// of `!`.
fn write_expr(f: &mut fmt::Formatter<'_>, expr: &BoolExpr, min_level: u8) -> fmt::Result {
    let level = match expr {
        BoolExpr::Or(..) => 0,
        BoolExpr::And(..) => 1,
        _ => 2,
    };
    let parens = level < min_level;
    if parens {
        write!(f, "(")?;
    }
    match expr {
        BoolExpr::Const(value) => write!(f, "{value}")?,
        BoolExpr::Atom(name) => write!(f, "{name}")?,
        BoolExpr::Not(inner) => {
            write!(f, "!")?;
            write_expr(f, inner, 2)?;
        }
        BoolExpr::And(lhs, rhs) => {
            write_expr(f, lhs, 1)?;
            write!(f, " & ")?;
            write_expr(f, rhs, 1)?;
        }
        BoolExpr::Or(lhs, rhs) => {
            write_expr(f, lhs, 0)?;
            write!(f, " | ")?;
            write_expr(f, rhs, 0)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ag,
    Temporal(String),
    Ident(String),
    Const(bool),
    Not,
    And,
    Or,
    Open,
    Close,
}

/// A token plus its 1-based character position in the source.
type Spanned = (Token, usize);

fn lex(text: &str) -> Result<Vec<Spanned>, PropertyError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let position = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '!' => {
                tokens.push((Token::Not, position));
                i += 1;
            }
            '&' => {
                tokens.push((Token::And, position));
                i += 1;
            }
            '|' => {
                tokens.push((Token::Or, position));
                i += 1;
            }
            '(' => {
                tokens.push((Token::Open, position));
                i += 1;
            }
            ')' => {
                tokens.push((Token::Close, position));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let token = match word.as_str() {
                    "AG" => Token::Ag,
                    "true" => Token::Const(true),
                    "false" => Token::Const(false),
                    w if TEMPORAL.contains(&w) => Token::Temporal(word.clone()),
                    _ => Token::Ident(word.clone()),
                };
                tokens.push((token, start + 1));
            }
            other => {
                return Err(PropertyError::Syntax {
                    position,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(tokens)
}

struct PropParser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl PropParser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<Spanned> {
        let token = self.tokens.get(self.pos).cloned();
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn end_position(&self) -> usize {
        self.tokens.last().map(|(_, p)| p + 1).unwrap_or(1)
    }

    fn property(&mut self) -> Result<BoolExpr, PropertyError> {
        match self.advance() {
            Some((Token::Ag, _)) => {}
            Some((token, _)) => {
                return Err(PropertyError::NotAgRooted { found: token_text(&token) })
            }
            None => {
                return Err(PropertyError::Syntax {
                    position: 1,
                    message: "empty property".into(),
                })
            }
        }
        let body = self.expr()?;
        match self.peek() {
            None => Ok(body),
            Some((token, position)) => Err(PropertyError::Syntax {
                position: *position,
                message: format!("unexpected `{}` after property body", token_text(token)),
            }),
        }
    }

    fn expr(&mut self) -> Result<BoolExpr, PropertyError> {
        let mut lhs = self.term()?;
        while matches!(self.peek(), Some((Token::Or, _))) {
            self.advance();
            let rhs = self.term()?;
            lhs = BoolExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<BoolExpr, PropertyError> {
        let mut lhs = self.factor()?;
        while matches!(self.peek(), Some((Token::And, _))) {
            self.advance();
            let rhs = self.factor()?;
            lhs = BoolExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<BoolExpr, PropertyError> {
        match self.advance() {
            Some((Token::Not, _)) => Ok(BoolExpr::Not(Box::new(self.factor()?))),
            Some((Token::Open, position)) => {
                let inner = self.expr()?;
                match self.advance() {
                    Some((Token::Close, _)) => Ok(inner),
                    Some((token, position)) => Err(PropertyError::Syntax {
                        position,
                        message: format!("expected `)`, found `{}`", token_text(&token)),
                    }),
                    None => Err(PropertyError::Syntax {
                        position,
                        message: "unclosed `(`".into(),
                    }),
                }
            }
            Some((Token::Const(value), _)) => Ok(BoolExpr::Const(value)),
            Some((Token::Ident(name), _)) => Ok(BoolExpr::Atom(name)),
            Some((Token::Ag, position)) => {
                Err(PropertyError::TemporalOutsideAg { operator: "AG".into(), position })
            }
            Some((Token::Temporal(op), position)) => {
                Err(PropertyError::TemporalOutsideAg { operator: op, position })
            }
            Some((token, position)) => Err(PropertyError::Syntax {
                position,
                message: format!("expected an atom, `!`, or `(`; found `{}`", token_text(&token)),
            }),
            None => Err(PropertyError::Syntax {
                position: self.end_position(),
                message: "expected an expression".into(),
            }),
        }
    }
}

fn token_text(token: &Token) -> String {
    match token {
        Token::Ag => "AG".into(),
        Token::Temporal(op) => op.clone(),
        Token::Ident(name) => name.clone(),
        Token::Const(value) => value.to_string(),
        Token::Not => "!".into(),
        Token::And => "&".into(),
        Token::Or => "|".into(),
        Token::Open => "(".into(),
        Token::Close => ")".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(name: &str) -> BoolExpr {
        BoolExpr::Atom(name.into())
    }

    #[test]
    fn simple_negated_atom() {
        let prop = SafetyProperty::parse("AG !overflow").unwrap();
        assert_eq!(*prop.body(), BoolExpr::Not(Box::new(atom("overflow"))));
    }

    #[test]
    fn precedence_and_parens() {
        // `&` binds tighter than `|`; parens override.
        let prop = SafetyProperty::parse("AG a | b & c").unwrap();
        assert_eq!(
            *prop.body(),
            BoolExpr::Or(
                Box::new(atom("a")),
                Box::new(BoolExpr::And(Box::new(atom("b")), Box::new(atom("c"))))
            )
        );
        let prop = SafetyProperty::parse("AG !(overflow | underflow)").unwrap();
        assert_eq!(
            *prop.body(),
            BoolExpr::Not(Box::new(BoolExpr::Or(
                Box::new(atom("overflow")),
                Box::new(atom("underflow"))
            )))
        );
    }

    #[test]
    fn constants_parse() {
        assert_eq!(*SafetyProperty::parse("AG true").unwrap().body(), BoolExpr::Const(true));
        assert_eq!(*SafetyProperty::parse("AG false").unwrap().body(), BoolExpr::Const(false));
    }

    #[test]
    fn non_ag_root_is_rejected() {
        let err = SafetyProperty::parse("EF crash").unwrap_err();
        assert_eq!(err, PropertyError::NotAgRooted { found: "EF".into() });
        let err = SafetyProperty::parse("crash").unwrap_err();
        assert_eq!(err, PropertyError::NotAgRooted { found: "crash".into() });
    }

    #[test]
    fn nested_temporal_operator_is_rejected() {
        let err = SafetyProperty::parse("AG EX p").unwrap_err();
        assert_eq!(err, PropertyError::TemporalOutsideAg { operator: "EX".into(), position: 4 });
        let err = SafetyProperty::parse("AG AG p").unwrap_err();
        assert!(matches!(err, PropertyError::TemporalOutsideAg { .. }));
    }

    #[test]
    fn trailing_tokens_are_a_syntax_error() {
        let err = SafetyProperty::parse("AG a b").unwrap_err();
        assert!(matches!(err, PropertyError::Syntax { position: 6, .. }));
    }

    #[test]
    fn unclosed_paren_is_reported() {
        let err = SafetyProperty::parse("AG (a | b").unwrap_err();
        assert!(matches!(err, PropertyError::Syntax { .. }));
    }

    #[test]
    fn canonical_text_round_trips_structurally() {
        for text in [
            "AG !(overflow | underflow)",
            "AG a & !b | c",
            "AG !(a & (b | !c)) | true",
            "AG ((a))",
            "AG !!a",
        ] {
            let prop = SafetyProperty::parse(text).unwrap();
            let printed = prop.canonical_text();
            let reparsed = SafetyProperty::parse(&printed).unwrap();
            assert_eq!(prop.body(), reparsed.body(), "round-trip of {text} via {printed}");
        }
    }

    #[test]
    fn atoms_are_collected_once_in_order() {
        let prop = SafetyProperty::parse("AG a & b | !a").unwrap();
        assert_eq!(prop.atoms(), vec!["a", "b"]);
    }
}
