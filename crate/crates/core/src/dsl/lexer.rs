use super::{ParseError, ParseErrorCode, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident(String),
    Number(String),
    Str(String),
    LBrace,
    RBrace,
    Equals,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number(n) => format!("number {n}"),
            TokenKind::Str(s) => format!("string \"{s}\""),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::Equals => "`=`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, usize, usize) {
        (self.pos, self.line, self.col)
    }

    fn span_from(&self, (start, line, col): (usize, usize, usize)) -> SourceSpan {
        SourceSpan {
            line,
            column: col,
            start,
            end: self.pos,
        }
    }
}

pub(crate) fn tokenize(src: &str) -> Result<(Vec<Token>, SourceSpan), ParseError> {
    let mut cur = Cursor {
        src,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        let mark = cur.mark();
        match c {
            '#' => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            }
            c if c.is_whitespace() => {
                cur.bump();
            }
            '{' | '}' | '=' => {
                cur.bump();
                let kind = match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    _ => TokenKind::Equals,
                };
                tokens.push(Token {
                    kind,
                    span: cur.span_from(mark),
                });
            }
            '"' => {
                cur.bump();
                let mut text = String::new();
                loop {
                    match cur.bump() {
                        Some('"') => break,
                        Some('\\') => match cur.bump() {
                            Some(e @ ('"' | '\\')) => text.push(e),
                            Some('n') => text.push('\n'),
                            _ => {
                                return Err(ParseError::new(
                                    ParseErrorCode::InvalidCharacter,
                                    cur.span_from(mark),
                                    "invalid escape in string literal",
                                ))
                            }
                        },
                        Some('\n') | None => {
                            return Err(ParseError::new(
                                ParseErrorCode::UnterminatedString,
                                cur.span_from(mark),
                                "string literal is not terminated on this line",
                            ))
                        }
                        Some(other) => text.push(other),
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Str(text),
                    span: cur.span_from(mark),
                });
            }
            c if c.is_ascii_digit() => {
                while cur.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    cur.bump();
                }
                let text = &src[mark.0..cur.pos];
                tokens.push(Token {
                    kind: TokenKind::Number(text.to_owned()),
                    span: cur.span_from(mark),
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while cur.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    cur.bump();
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(src[mark.0..cur.pos].to_owned()),
                    span: cur.span_from(mark),
                });
            }
            other => {
                cur.bump();
                return Err(ParseError::new(
                    ParseErrorCode::InvalidCharacter,
                    cur.span_from(mark),
                    format!("unexpected character {other:?}"),
                ));
            }
        }
    }
    let eof = SourceSpan {
        line: cur.line,
        column: cur.col,
        start: cur.pos,
        end: cur.pos,
    };
    Ok((tokens, eof))
}
