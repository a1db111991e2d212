use super::{ParseError, ParseErrorKind, Pos};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Arrow,
    EqEq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer {v}"),
            Tok::Real(v) => format!("number {v}"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Lexer<'_> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn lex_error(pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError::new(ParseErrorKind::Lex, pos, message)
    }

    /// Skips whitespace and `//` / `/* */` comments.
    fn skip_trivia(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') => {
                    let mut ahead = self.chars.clone();
                    ahead.next();
                    match ahead.next() {
                        Some('/') => {
                            while !matches!(self.peek(), None | Some('\n')) {
                                self.bump();
                            }
                        }
                        Some('*') => {
                            let start = self.pos();
                            self.bump();
                            self.bump();
                            let mut prev = '\0';
                            loop {
                                match self.bump() {
                                    None => {
                                        return Err(Self::lex_error(start, "unterminated comment"))
                                    }
                                    Some('/') if prev == '*' => break,
                                    Some(c) => prev = c,
                                }
                            }
                        }
                        _ => return Ok(()),
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn digits(&mut self, text: &mut String) {
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            text.push(c);
            self.bump();
        }
    }

    fn number(&mut self, start: Pos) -> Result<Tok, ParseError> {
        let mut text = String::new();
        self.digits(&mut text);
        let mut is_real = false;
        if self.peek() == Some('.') {
            is_real = true;
            text.push('.');
            self.bump();
            self.digits(&mut text);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            is_real = true;
            text.push('e');
            self.bump();
            if let Some(sign @ ('+' | '-')) = self.peek() {
                text.push(sign);
                self.bump();
            }
            let before = text.len();
            self.digits(&mut text);
            if text.len() == before {
                return Err(Self::lex_error(start, format!("malformed exponent in `{text}`")));
            }
        }
        if text == "." {
            return Err(Self::lex_error(start, "lone `.`"));
        }
        if is_real {
            text.parse::<f64>()
                .map(Tok::Real)
                .map_err(|_| Self::lex_error(start, format!("malformed number `{text}`")))
        } else {
            text.parse::<u64>()
                .map(Tok::Int)
                .map_err(|_| Self::lex_error(start, format!("integer `{text}` is too large")))
        }
    }
}

pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer { chars: source.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia()?;
        let pos = lx.pos();
        let Some(c) = lx.peek() else {
            out.push(Token { tok: Tok::Eof, pos });
            return Ok(out);
        };
        let tok = match c {
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(c) = lx.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                    s.push(c);
                    lx.bump();
                }
                Tok::Ident(s)
            }
            c if c.is_ascii_digit() || c == '.' => lx.number(pos)?,
            '"' => {
                lx.bump();
                let mut s = String::new();
                loop {
                    match lx.bump() {
                        Some('"') => break,
                        Some('\n') | None => {
                            return Err(Lexer::lex_error(pos, "unterminated string"))
                        }
                        Some(c) => s.push(c),
                    }
                }
                Tok::Str(s)
            }
            '-' => {
                lx.bump();
                if lx.peek() == Some('>') {
                    lx.bump();
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            '=' => {
                lx.bump();
                if lx.peek() == Some('=') {
                    lx.bump();
                    Tok::EqEq
                } else {
                    return Err(Lexer::lex_error(pos, "expected `==`"));
                }
            }
            _ => {
                lx.bump();
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    other => {
                        return Err(Lexer::lex_error(pos, format!("unexpected character `{other}`")))
                    }
                }
            }
        };
        out.push(Token { tok, pos });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("OPENQASM 2.0; // hi\nmeasure q[0] -> c[1];"),
            vec![
                Tok::Ident("OPENQASM".into()),
                Tok::Real(2.0),
                Tok::Semi,
                Tok::Ident("measure".into()),
                Tok::Ident("q".into()),
                Tok::LBracket,
                Tok::Int(0),
                Tok::RBracket,
                Tok::Arrow,
                Tok::Ident("c".into()),
                Tok::LBracket,
                Tok::Int(1),
                Tok::RBracket,
                Tok::Semi,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn numbers() {
        assert_eq!(toks("1e-7 .5 3.25E2 7"), vec![
            Tok::Real(1e-7),
            Tok::Real(0.5),
            Tok::Real(325.0),
            Tok::Int(7),
            Tok::Eof
        ]);
        assert!(tokenize("1e").is_err());
        assert!(tokenize(".").is_err());
    }

    #[test]
    fn positions_and_errors() {
        let t = tokenize("h\n  x;").unwrap();
        assert_eq!(t[1].pos, Pos { line: 2, column: 3 });
        let e = tokenize("h q[0];\n  @").unwrap_err();
        assert_eq!((e.line, e.column, e.kind), (2, 3, ParseErrorKind::Lex));
        assert!(tokenize("/* open").is_err());
        assert!(tokenize("\"open").is_err());
        assert!(tokenize("a = b").is_err());
    }
}
