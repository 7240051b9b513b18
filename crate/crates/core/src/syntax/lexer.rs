use std::fmt;

use super::ast::Span;

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum TokenKind {
    Number(f64),
    /// `a..b`; the upper bound may be `inf`.
    Interval(f64, f64),
    Ident,
    Keyword(Keyword),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Eq,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Dot,
    FatArrow,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    AndAnd,
    OrOr,
    Bang,
    Question,
    Pipe,
    Lambda,
    EmptySet,
    Eof,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Keyword {
    Fn,
    Def,
    Let,
    Res,
    If,
    Then,
    Else,
    Case,
    Of,
    Inl,
    Inr,
    Fold,
    Unfold,
    Fix,
    Try,
    Catch,
    True,
    False,
    Forall,
    Mu,
    Fst,
    Snd,
    Laplace,
}

const KEYWORDS: &[(&str, Keyword)] = &[
    ("fn", Keyword::Fn),
    ("def", Keyword::Def),
    ("let", Keyword::Let),
    ("res", Keyword::Res),
    ("if", Keyword::If),
    ("then", Keyword::Then),
    ("else", Keyword::Else),
    ("case", Keyword::Case),
    ("of", Keyword::Of),
    ("inl", Keyword::Inl),
    ("inr", Keyword::Inr),
    ("fold", Keyword::Fold),
    ("unfold", Keyword::Unfold),
    ("fix", Keyword::Fix),
    ("try", Keyword::Try),
    ("catch", Keyword::Catch),
    ("true", Keyword::True),
    ("false", Keyword::False),
    ("forall", Keyword::Forall),
    ("mu", Keyword::Mu),
    ("fst", Keyword::Fst),
    ("snd", Keyword::Snd),
    ("laplace", Keyword::Laplace),
];

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn lexeme<'a>(&self, src: &'a str) -> &'a str {
        &src[self.span.lo as usize..self.span.hi as usize]
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    let pos = |i: usize| chars.get(i).map_or(src.len(), |&(p, _)| p);
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && at(i + 1) == Some('/') {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let two = |a: char, b: char| c == a && at(i + 1) == Some(b);
        let kind = if c.is_ascii_digit() {
            let (lo, next) = lex_number(&chars, i, src).map_err(|m| LexError {
                span: Span::new(pos(i), pos(i + 1)),
                message: m,
            })?;
            i = next;
            if at(i) == Some('.') && at(i + 1) == Some('.') {
                i += 2;
                let hi = if src[pos(i)..].starts_with("inf") && !at(i + 3).is_some_and(is_ident_char) {
                    i += 3;
                    f64::INFINITY
                } else if at(i).is_some_and(|c| c.is_ascii_digit()) {
                    let (hi, next) = lex_number(&chars, i, src).map_err(|m| LexError {
                        span: Span::new(pos(start), pos(i)),
                        message: m,
                    })?;
                    i = next;
                    hi
                } else {
                    return Err(LexError {
                        span: Span::new(pos(start), pos(i)),
                        message: "malformed interval: expected a number or `inf` after `..`".into(),
                    });
                };
                if hi < lo {
                    return Err(LexError {
                        span: Span::new(pos(start), pos(i)),
                        message: format!("empty interval {}..{}", lo, hi),
                    });
                }
                TokenKind::Interval(lo, hi)
            } else {
                TokenKind::Number(lo)
            }
        } else if is_ident_start(c) {
            while at(i).is_some_and(is_ident_char) {
                i += 1;
            }
            let word = &src[pos(start)..pos(i)];
            match KEYWORDS.iter().find(|(k, _)| *k == word) {
                Some((_, kw)) => TokenKind::Keyword(*kw),
                None => TokenKind::Ident,
            }
        } else {
            let (k, len) = if two(':', ':') {
                (TokenKind::ColonColon, 2)
            } else if two('=', '>') {
                (TokenKind::FatArrow, 2)
            } else if two('-', '>') {
                (TokenKind::Arrow, 2)
            } else if two('=', '=') {
                (TokenKind::EqEq, 2)
            } else if two('!', '=') {
                (TokenKind::Ne, 2)
            } else if two('<', '=') {
                (TokenKind::Le, 2)
            } else if two('>', '=') {
                (TokenKind::Ge, 2)
            } else if two('&', '&') {
                (TokenKind::AndAnd, 2)
            } else if two('|', '|') {
                (TokenKind::OrOr, 2)
            } else if two('/', '\\') {
                (TokenKind::Lambda, 2)
            } else {
                let k = match c {
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '[' => TokenKind::LBracket,
                    ']' => TokenKind::RBracket,
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '<' => TokenKind::Lt,
                    '>' => TokenKind::Gt,
                    '=' => TokenKind::Eq,
                    ',' => TokenKind::Comma,
                    ';' => TokenKind::Semi,
                    ':' => TokenKind::Colon,
                    '.' => TokenKind::Dot,
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    '/' => TokenKind::Slash,
                    '!' => TokenKind::Bang,
                    '?' => TokenKind::Question,
                    '|' => TokenKind::Pipe,
                    'Λ' => TokenKind::Lambda,
                    '∅' => TokenKind::EmptySet,
                    _ => {
                        return Err(LexError {
                            span: Span::new(pos(i), pos(i + 1)),
                            message: format!("unexpected character `{}`", c),
                        })
                    }
                };
                (k, 1)
            };
            i += len;
            k
        };
        toks.push(Token { kind, span: Span::new(pos(start), pos(i)) });
    }
    toks.push(Token { kind: TokenKind::Eof, span: Span::new(src.len(), src.len()) });
    Ok(toks)
}

fn lex_number(chars: &[(usize, char)], mut i: usize, src: &str) -> Result<(f64, usize), String> {
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    let pos = |i: usize| chars.get(i).map_or(src.len(), |&(p, _)| p);
    let start = i;
    while at(i).is_some_and(|c| c.is_ascii_digit()) {
        i += 1;
    }
    // A single dot followed by a digit is a fraction; `..` starts an interval.
    if at(i) == Some('.') && at(i + 1).is_some_and(|c| c.is_ascii_digit()) {
        i += 1;
        while at(i).is_some_and(|c| c.is_ascii_digit()) {
            i += 1;
        }
        if at(i) == Some('.') && at(i + 1).is_some_and(|c| c.is_ascii_digit()) {
            return Err("malformed number".into());
        }
    }
    let text = &src[pos(start)..pos(i)];
    text.parse::<f64>().map(|v| (v, i)).map_err(|_| format!("malformed number `{}`", text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn effect_tokens() {
        assert_eq!(
            kinds("Number[?r]"),
            vec![
                TokenKind::Ident,
                TokenKind::LBracket,
                TokenKind::Question,
                TokenKind::Ident,
                TokenKind::RBracket,
                TokenKind::Eof
            ]
        );
        assert_eq!(kinds("0..3r"), vec![TokenKind::Interval(0.0, 3.0), TokenKind::Ident, TokenKind::Eof]);
        assert_eq!(kinds("2..inf r"), vec![TokenKind::Interval(2.0, f64::INFINITY), TokenKind::Ident, TokenKind::Eof]);
        assert_eq!(kinds("1.5"), vec![TokenKind::Number(1.5), TokenKind::Eof]);
    }

    #[test]
    fn illegal_characters() {
        assert!(tokenize("@#").is_err());
        assert!(tokenize("3..1").is_err());
    }

    #[test]
    fn lexemes_reproduce_source() {
        let src = "def f(x: Number[2r]): Number = x :: Number[?r]; // done";
        let toks = tokenize(src).unwrap();
        let mut rebuilt = String::new();
        let mut last = 0;
        for t in &toks {
            rebuilt.push_str(&src[last..t.span.lo as usize]);
            rebuilt.push_str(t.lexeme(src));
            last = t.span.hi as usize;
        }
        rebuilt.push_str(&src[last..]);
        assert_eq!(rebuilt, src);
    }
}
