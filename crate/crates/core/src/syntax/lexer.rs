//! Tokenizer accepting both the Unicode mathematical alphabet and its ASCII
//! shortcuts. Every alias maps to the same [`TokenKind`].

use std::fmt;

use thiserror::Error;

use super::span::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Int,
    // declarations and commands
    Val,
    Type,
    Pred,
    Fun,
    Theorem,
    Proc,
    Requires,
    Ensures,
    Invariant,
    Decreases,
    Var,
    While,
    Do,
    For,
    If,
    Then,
    Else,
    Return,
    Assert,
    Choose,
    With,
    Let,
    LetPar,
    In,
    True,
    False,
    // type constructors
    ArrayKw,
    SetKw,
    TupleKw,
    BoolKw,
    Nat,
    IntKw,
    // logic
    Forall,
    Exists,
    Not,
    And,
    Or,
    Implies,
    Iff,
    // operators
    Assign,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Times,
    Div,
    Mod,
    Member,
    EmptySet,
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LAngle,
    RAngle,
    Comma,
    Semi,
    Colon,
    Dot,
}

impl TokenKind {
    /// Canonical (Unicode) spelling used by the printer and in diagnostics.
    pub fn symbol(self) -> &'static str {
        use TokenKind::*;
        match self {
            Ident => "identifier",
            Int => "integer",
            Val => "val",
            Type => "type",
            Pred => "pred",
            Fun => "fun",
            Theorem => "theorem",
            Proc => "proc",
            Requires => "requires",
            Ensures => "ensures",
            Invariant => "invariant",
            Decreases => "decreases",
            Var => "var",
            While => "while",
            Do => "do",
            For => "for",
            If => "if",
            Then => "then",
            Else => "else",
            Return => "return",
            Assert => "assert",
            Choose => "choose",
            With => "with",
            Let => "let",
            LetPar => "letpar",
            In => "in",
            True => "true",
            False => "false",
            ArrayKw => "Array",
            SetKw => "Set",
            TupleKw => "Tuple",
            BoolKw => "Bool",
            Nat => "ℕ",
            IntKw => "ℤ",
            Forall => "∀",
            Exists => "∃",
            Not => "¬",
            And => "∧",
            Or => "∨",
            Implies => "⇒",
            Iff => "⇔",
            Assign => "≔",
            Eq => "=",
            Neq => "≠",
            Lt => "<",
            Le => "≤",
            Gt => ">",
            Ge => "≥",
            Plus => "+",
            Minus => "-",
            Times => "⋅",
            Div => "/",
            Mod => "%",
            Member => "∈",
            EmptySet => "∅",
            LParen => "(",
            RParen => ")",
            LBracket => "[",
            RBracket => "]",
            LBrace => "{",
            RBrace => "}",
            LAngle => "⟨",
            RAngle => "⟩",
            Comma => ",",
            Semi => ";",
            Colon => ":",
            Dot => ".",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LexError {
    #[error("unexpected character {ch:?} at {span}")]
    UnexpectedChar { ch: char, span: Span },
    #[error("unterminated block comment starting at {span}")]
    UnterminatedComment { span: Span },
    #[error("integer literal out of range at {span}")]
    IntegerOverflow { span: Span },
}

impl LexError {
    pub fn span(&self) -> Span {
        match self {
            LexError::UnexpectedChar { span, .. }
            | LexError::UnterminatedComment { span }
            | LexError::IntegerOverflow { span } => *span,
        }
    }
}

fn keyword(word: &str) -> Option<TokenKind> {
    use TokenKind::*;
    Some(match word {
        "val" => Val,
        "type" => Type,
        "pred" => Pred,
        "fun" => Fun,
        "theorem" => Theorem,
        "proc" => Proc,
        "requires" => Requires,
        "ensures" => Ensures,
        "invariant" => Invariant,
        "decreases" => Decreases,
        "var" => Var,
        "while" => While,
        "do" => Do,
        "for" => For,
        "if" => If,
        "then" => Then,
        "else" => Else,
        "return" => Return,
        "assert" => Assert,
        "choose" => Choose,
        "with" => With,
        "let" => Let,
        "letpar" => LetPar,
        "in" => In,
        "true" => True,
        "false" => False,
        "Array" => ArrayKw,
        "Set" => SetKw,
        "Tuple" => TupleKw,
        "Bool" => BoolKw,
        "Nat" => Nat,
        "Int" => IntKw,
        "forall" => Forall,
        "exists" => Exists,
        "not" => Not,
        "and" => And,
        "or" => Or,
        "implies" => Implies,
        "iff" => Iff,
        "isin" => Member,
        "emptyset" => EmptySet,
        _ => return None,
    })
}

fn unicode_symbol(ch: char) -> Option<TokenKind> {
    use TokenKind::*;
    Some(match ch {
        '∀' => Forall,
        '∃' => Exists,
        '¬' => Not,
        '∧' => And,
        '∨' => Or,
        '⇒' => Implies,
        '⇔' => Iff,
        '≔' => Assign,
        '≠' => Neq,
        '≤' => Le,
        '≥' => Ge,
        '⋅' | '·' | '×' => Times,
        '−' => Minus,
        'ℕ' => Nat,
        'ℤ' => IntKw,
        '𝔹' => BoolKw,
        '∈' => Member,
        '∅' => EmptySet,
        '⟨' => LAngle,
        '⟩' => RAngle,
        _ => return None,
    })
}

/// ASCII operator spellings, longest first so that maximal munch holds.
const ASCII_OPERATORS: &[(&str, TokenKind)] = &[
    ("<=>", TokenKind::Iff),
    ("=>", TokenKind::Implies),
    (":=", TokenKind::Assign),
    ("<=", TokenKind::Le),
    (">=", TokenKind::Ge),
    ("!=", TokenKind::Neq),
    ("~=", TokenKind::Neq),
    ("<<", TokenKind::LAngle),
    (">>", TokenKind::RAngle),
    ("=", TokenKind::Eq),
    ("<", TokenKind::Lt),
    (">", TokenKind::Gt),
    ("+", TokenKind::Plus),
    ("-", TokenKind::Minus),
    ("*", TokenKind::Times),
    ("/", TokenKind::Div),
    ("%", TokenKind::Mod),
    ("(", TokenKind::LParen),
    (")", TokenKind::RParen),
    ("[", TokenKind::LBracket),
    ("]", TokenKind::RBracket),
    ("{", TokenKind::LBrace),
    ("}", TokenKind::RBrace),
    (",", TokenKind::Comma),
    (";", TokenKind::Semi),
    (":", TokenKind::Colon),
    (".", TokenKind::Dot),
    ("!", TokenKind::Not),
    ("~", TokenKind::Not),
];

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        if ch == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if ch == '/' && chars.get(i + 1) == Some(&'*') {
            let start = i;
            i += 2;
            loop {
                if i + 1 >= chars.len() {
                    return Err(LexError::UnterminatedComment {
                        span: Span::new(start, chars.len()),
                    });
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        let start = i;
        if ch.is_ascii_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let kind = keyword(&word).unwrap_or(TokenKind::Ident);
            tokens.push(Token {
                kind,
                lexeme: word,
                span: Span::new(start, i),
            });
            continue;
        }
        if ch.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let span = Span::new(start, i);
            if digits.parse::<i64>().is_err() {
                return Err(LexError::IntegerOverflow { span });
            }
            tokens.push(Token {
                kind: TokenKind::Int,
                lexeme: digits,
                span,
            });
            continue;
        }
        if let Some(kind) = unicode_symbol(ch) {
            i += 1;
            tokens.push(Token {
                kind,
                lexeme: ch.to_string(),
                span: Span::new(start, i),
            });
            continue;
        }
        let matched = ASCII_OPERATORS.iter().find(|(text, _)| {
            let n = text.chars().count();
            i + n <= chars.len() && text.chars().eq(chars[i..i + n].iter().copied())
        });
        match matched {
            Some((text, kind)) => {
                i += text.chars().count();
                tokens.push(Token {
                    kind: *kind,
                    lexeme: text.to_string(),
                    span: Span::new(start, i),
                });
            }
            None => {
                return Err(LexError::UnexpectedChar {
                    ch,
                    span: Span::new(start, start + 1),
                })
            }
        }
    }
    Ok(tokens)
}

/// Rewrites Unicode mathematical symbols into their ASCII shortcuts, for
/// terminals that cannot display them. Keyword shortcuts are padded with
/// spaces so that the result still tokenizes the same way.
pub fn to_ascii(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        let rep = match ch {
            '∀' => "forall ",
            '∃' => "exists ",
            '¬' => "~",
            '∧' => " and ",
            '∨' => " or ",
            '⇒' => "=>",
            '⇔' => "<=>",
            '≔' => ":=",
            '≠' => "~=",
            '≤' => "<=",
            '≥' => ">=",
            '⋅' | '·' | '×' => "*",
            '−' => "-",
            'ℕ' => "Nat",
            'ℤ' => "Int",
            '𝔹' => "Bool",
            '∈' => " isin ",
            '∅' => "emptyset",
            '⟨' => "<<",
            '⟩' => ">>",
            _ => {
                out.push(ch);
                continue;
            }
        };
        out.push_str(rep);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn quantifier_header() {
        assert_eq!(kinds("∀x:T"), vec![Forall, Ident, Colon, Ident]);
        assert_eq!(kinds("forall x:T"), kinds("∀x:T"));
    }

    #[test]
    fn assignment_aliases() {
        assert_eq!(kinds("a ≔ b"), kinds("a := b"));
        assert_eq!(kinds("a ≔ b"), vec![Ident, Assign, Ident]);
    }

    #[test]
    fn ascii_aliases_match_unicode() {
        let pairs = [
            ("∃", "exists"),
            ("¬", "not"),
            ("∧", "and"),
            ("∨", "or"),
            ("⇒", "implies"),
            ("⇒", "=>"),
            ("⇔", "iff"),
            ("⇔", "<=>"),
            ("≤", "<="),
            ("≥", ">="),
            ("≠", "!="),
            ("≠", "~="),
            ("ℕ", "Nat"),
            ("ℤ", "Int"),
            ("∈", "isin"),
            ("⋅", "*"),
            ("choose", "choose"),
        ];
        for (u, a) in pairs {
            assert_eq!(kinds(u), kinds(a), "{u} vs {a}");
        }
    }

    #[test]
    fn maximal_munch() {
        assert_eq!(kinds("a<=>b"), vec![Ident, Iff, Ident]);
        assert_eq!(kinds("a<=b"), vec![Ident, Le, Ident]);
        assert_eq!(kinds("a<b"), vec![Ident, Lt, Ident]);
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(kinds("a // note\n/* b\n c */ d"), vec![Ident, Ident]);
        assert!(matches!(
            tokenize("/* open"),
            Err(LexError::UnterminatedComment { .. })
        ));
    }

    #[test]
    fn spans_use_character_offsets() {
        let toks = tokenize("∀x ≔ 12").unwrap();
        let spans: Vec<_> = toks.iter().map(|t| (t.span.start, t.span.end)).collect();
        assert_eq!(spans, vec![(0, 1), (1, 2), (3, 4), (5, 7)]);
    }

    #[test]
    fn rejects_foreign_characters() {
        assert_eq!(
            tokenize("a $ b"),
            Err(LexError::UnexpectedChar {
                ch: '$',
                span: Span::new(2, 3)
            })
        );
        assert!(matches!(
            tokenize("99999999999999999999"),
            Err(LexError::IntegerOverflow { .. })
        ));
    }

    #[test]
    fn ascii_transliteration_preserves_tokens() {
        let src = "∀x:ℕ[3]. ¬(x ≠ 1) ∧ ∃y:ℤ[0,2]. x⋅y ≤ 2 ⇒ x ∈ {1} ⇔ true";
        assert_eq!(kinds(&to_ascii(src)), kinds(src));
    }
}
