use std::collections::{HashMap, HashSet};

use super::lexer::{tokenize, Token, TokenKind};
use super::{ParseError, ParseErrorCode, SourceSpan};
use crate::model::{Action, ArrivalPattern, EmissionKind, Priority, SubAction, SystemModel, Tick, Transaction};

/// Parses `.rts` text into a model. Only syntax and name resolution are
/// checked here; structural rules are left to [`crate::model::validate`].
pub fn parse(text: &str) -> Result<SystemModel, ParseError> {
    let (tokens, eof) = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::new(
            ParseErrorCode::EmptyModel,
            SourceSpan {
                line: 1,
                column: 1,
                start: 0,
                end: 0,
            },
            "input contains no model",
        )
        .expecting(&["system"]));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        eof,
        refs: Refs::default(),
    };
    let model = parser.model()?;
    parser.refs.resolve()?;
    Ok(model)
}

#[derive(Default)]
struct Refs {
    externals: HashSet<String>,
    emitted: Vec<(String, SourceSpan)>,
    triggers: Vec<(String, SourceSpan)>,
    actions: HashMap<String, SourceSpan>,
    duplicate: Option<(String, SourceSpan)>,
}

impl Refs {
    fn resolve(self) -> Result<(), ParseError> {
        if let Some((id, span)) = self.duplicate {
            return Err(ParseError::new(
                ParseErrorCode::DuplicateId,
                span,
                format!("`{id}` is already declared"),
            ));
        }
        let emitted: HashSet<&str> = self.emitted.iter().map(|(e, _)| e.as_str()).collect();
        let triggers: HashSet<&str> = self.triggers.iter().map(|(e, _)| e.as_str()).collect();
        for (event, span) in &self.triggers {
            if !self.externals.contains(event) && !emitted.contains(event.as_str()) {
                return Err(ParseError::new(
                    ParseErrorCode::DanglingRef,
                    *span,
                    format!("event `{event}` is neither external nor emitted by any sub-action"),
                ));
            }
        }
        for (event, span) in &self.emitted {
            if !triggers.contains(event.as_str()) {
                return Err(ParseError::new(
                    ParseErrorCode::DanglingRef,
                    *span,
                    format!("emitted event `{event}` does not trigger any action"),
                ));
            }
        }
        Ok(())
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: SourceSpan,
    refs: Refs,
}

enum Value {
    Ident(String),
    Number(String),
    Str(String),
}

struct Attr {
    key: String,
    key_span: SourceSpan,
    value: Value,
    value_span: SourceSpan,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind_at(&self, offset: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn next(&mut self, expected: &[&str]) -> Result<Token, ParseError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(
                ParseError::new(ParseErrorCode::UnexpectedEof, self.eof, "unexpected end of input").expecting(expected),
            ),
        }
    }

    fn unexpected(tok: &Token, expected: &[&str]) -> ParseError {
        ParseError::new(
            ParseErrorCode::UnexpectedToken,
            tok.span,
            format!("unexpected {}", tok.kind.describe()),
        )
        .expecting(expected)
    }

    fn keyword(&mut self, kw: &str) -> Result<SourceSpan, ParseError> {
        let tok = self.next(&[kw])?;
        match &tok.kind {
            TokenKind::Ident(s) if s == kw => Ok(tok.span),
            _ => Err(Self::unexpected(&tok, &[kw])),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        let tok = self.next(&[what])?;
        match tok.kind {
            TokenKind::Ident(s) => Ok((s, tok.span)),
            _ => Err(Self::unexpected(&tok, &[what])),
        }
    }

    fn punct(&mut self, kind: TokenKind, shown: &str) -> Result<(), ParseError> {
        let tok = self.next(&[shown])?;
        if tok.kind == kind {
            Ok(())
        } else {
            Err(Self::unexpected(&tok, &[shown]))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Ident(s)) if s == kw)
    }

    fn model(&mut self) -> Result<SystemModel, ParseError> {
        self.keyword("system")?;
        let tok = self.next(&["string"])?;
        let name = match tok.kind {
            TokenKind::Str(s) => s,
            _ => return Err(Self::unexpected(&tok, &["string"])),
        };
        let mut model = SystemModel::new(name);
        let mut tx_ids = HashSet::new();
        while let Some(tok) = self.peek() {
            if !self.at_keyword("transaction") {
                return Err(Self::unexpected(tok, &["transaction"]));
            }
            let tx = self.transaction()?;
            if !tx_ids.insert(tx.id.clone()) && self.refs.duplicate.is_none() {
                let span = self.tokens[self.pos - 1].span;
                self.refs.duplicate = Some((tx.id.clone(), span));
            }
            model.transactions.push(tx);
        }
        Ok(model)
    }

    fn transaction(&mut self) -> Result<Transaction, ParseError> {
        self.keyword("transaction")?;
        let (id, _) = self.ident("transaction id")?;
        self.punct(TokenKind::LBrace, "{")?;
        self.keyword("external")?;
        let (event, event_span) = self.ident("event id")?;
        if !self.refs.externals.insert(event.clone()) && self.refs.duplicate.is_none() {
            self.refs.duplicate = Some((event.clone(), event_span));
        }
        let pattern = self.pattern()?;
        let mut tx = Transaction::new(id, event, pattern);
        loop {
            if self.at_keyword("action") {
                tx.actions.push(self.action()?);
                continue;
            }
            let tok = self.next(&["action", "}"])?;
            if tok.kind == TokenKind::RBrace {
                return Ok(tx);
            }
            return Err(Self::unexpected(&tok, &["action", "}"]));
        }
    }

    fn pattern(&mut self) -> Result<ArrivalPattern, ParseError> {
        let expected = ["periodic", "aperiodic", "sporadic"];
        let tok = self.next(&expected)?;
        let kind = match &tok.kind {
            TokenKind::Ident(s) if expected.contains(&s.as_str()) => s.clone(),
            _ => return Err(Self::unexpected(&tok, &expected)),
        };
        let (required, optional): (&[&str], &[&str]) = match kind.as_str() {
            "periodic" => (&["period"], &["jitter"]),
            "aperiodic" => (&["min_interarrival"], &["jitter"]),
            _ => (&["outer", "inner", "burst"], &["jitter"]),
        };
        let attrs = self.attrs(required, optional, tok.span)?;
        let jitter = attrs.number("jitter")?.unwrap_or(0);
        Ok(match kind.as_str() {
            "periodic" => ArrivalPattern::periodic(attrs.required_number("period")?, jitter),
            "aperiodic" => ArrivalPattern::aperiodic(attrs.required_number("min_interarrival")?, jitter),
            _ => {
                let burst: u32 = attrs.required_small("burst")?;
                ArrivalPattern::sporadic(
                    attrs.required_number("outer")?,
                    attrs.required_number("inner")?,
                    burst,
                    jitter,
                )
            }
        })
    }

    fn action(&mut self) -> Result<Action, ParseError> {
        let kw = self.keyword("action")?;
        let (id, id_span) = self.ident("action id")?;
        if self.refs.actions.insert(id.clone(), id_span).is_some() && self.refs.duplicate.is_none() {
            self.refs.duplicate = Some((id.clone(), id_span));
        }
        let attrs = self.attrs(&["trigger", "owner", "priority", "deadline"], &[], kw)?;
        let (trigger, trigger_span) = attrs.required_ident("trigger")?;
        self.refs.triggers.push((trigger.clone(), trigger_span));
        let owner = attrs.required_name("owner")?;
        let priority: Priority = attrs.required_small("priority")?;
        let deadline = attrs.required_number("deadline")?;
        self.punct(TokenKind::LBrace, "{")?;
        let mut subs = Vec::new();
        loop {
            if self.at_keyword("sub") {
                subs.push(self.sub_action()?);
                continue;
            }
            let tok = self.next(&["sub", "}"])?;
            if tok.kind == TokenKind::RBrace {
                break;
            }
            return Err(Self::unexpected(&tok, &["sub", "}"]));
        }
        Ok(Action::new(id, trigger, owner, priority, deadline, subs))
    }

    fn sub_action(&mut self) -> Result<SubAction, ParseError> {
        let kw = self.keyword("sub")?;
        let (id, _) = self.ident("sub-action id")?;
        let attrs = self.attrs(&["exec"], &[], kw)?;
        let mut sub = SubAction::new(id, attrs.required_number("exec")?);
        if self.at_keyword("emits") {
            self.pos += 1;
            let kinds = ["signal", "call"];
            let tok = self.next(&kinds)?;
            let kind = match &tok.kind {
                TokenKind::Ident(s) if s == "signal" => EmissionKind::Signal,
                TokenKind::Ident(s) if s == "call" => EmissionKind::Call,
                _ => return Err(Self::unexpected(&tok, &kinds)),
            };
            let (event, span) = self.ident("event id")?;
            self.refs.emitted.push((event.clone(), span));
            sub = sub.emits(kind, event);
        }
        if self.at_keyword("reply") {
            self.pos += 1;
            sub.reply = true;
        }
        Ok(sub)
    }

    /// Reads `key=value` pairs while the upcoming tokens have that shape.
    fn attrs(&mut self, required: &[&str], optional: &[&str], owner: SourceSpan) -> Result<Attrs, ParseError> {
        let mut found: Vec<Attr> = Vec::new();
        while matches!(self.peek_kind_at(0), Some(TokenKind::Ident(_)))
            && matches!(self.peek_kind_at(1), Some(TokenKind::Equals))
        {
            let (key, key_span) = self.ident("attribute")?;
            self.pos += 1;
            if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                let allowed: Vec<&str> = required.iter().chain(optional).copied().collect();
                return Err(ParseError::new(
                    ParseErrorCode::UnknownAttribute,
                    key_span,
                    format!("unknown attribute `{key}`"),
                )
                .expecting(&allowed));
            }
            if found.iter().any(|a| a.key == key) {
                return Err(ParseError::new(
                    ParseErrorCode::DuplicateAttribute,
                    key_span,
                    format!("attribute `{key}` given twice"),
                ));
            }
            let tok = self.next(&["number", "identifier"])?;
            let value = match tok.kind {
                TokenKind::Ident(s) => Value::Ident(s),
                TokenKind::Number(n) => Value::Number(n),
                TokenKind::Str(s) => Value::Str(s),
                _ => return Err(Self::unexpected(&tok, &["number", "identifier"])),
            };
            found.push(Attr {
                key,
                key_span,
                value,
                value_span: tok.span,
            });
        }
        for req in required {
            if !found.iter().any(|a| a.key == *req) {
                let at = self.peek().map_or(owner, |t| t.span);
                return Err(ParseError::new(
                    ParseErrorCode::MissingAttribute,
                    at,
                    format!("missing attribute `{req}`"),
                )
                .expecting(&[&format!("{req}=")]));
            }
        }
        Ok(Attrs(found))
    }
}

struct Attrs(Vec<Attr>);

impl Attrs {
    fn get(&self, key: &str) -> Option<&Attr> {
        self.0.iter().find(|a| a.key == key)
    }

    fn number(&self, key: &str) -> Result<Option<Tick>, ParseError> {
        let Some(attr) = self.get(key) else {
            return Ok(None);
        };
        match &attr.value {
            Value::Number(n) => n.parse::<Tick>().map(Some).map_err(|_| {
                ParseError::new(
                    ParseErrorCode::InvalidNumber,
                    attr.value_span,
                    format!("`{n}` is not a non-negative integer"),
                )
            }),
            _ => Err(ParseError::new(
                ParseErrorCode::UnexpectedToken,
                attr.value_span,
                format!("attribute `{}` takes a number", attr.key),
            )
            .expecting(&["number"])),
        }
    }

    fn required_number(&self, key: &str) -> Result<Tick, ParseError> {
        Ok(self.number(key)?.expect("presence checked when reading attributes"))
    }

    fn required_small<T: TryFrom<Tick>>(&self, key: &str) -> Result<T, ParseError> {
        let v = self.required_number(key)?;
        T::try_from(v).map_err(|_| {
            let attr = self.get(key).expect("present");
            ParseError::new(
                ParseErrorCode::InvalidNumber,
                attr.value_span,
                format!("`{v}` is out of range for `{key}`"),
            )
        })
    }

    fn required_ident(&self, key: &str) -> Result<(String, SourceSpan), ParseError> {
        let attr = self.get(key).expect("presence checked when reading attributes");
        match &attr.value {
            Value::Ident(s) => Ok((s.clone(), attr.value_span)),
            _ => Err(ParseError::new(
                ParseErrorCode::UnexpectedToken,
                attr.value_span,
                format!("attribute `{key}` takes an identifier"),
            )
            .expecting(&["identifier"])),
        }
    }

    fn required_name(&self, key: &str) -> Result<String, ParseError> {
        let attr = self.get(key).expect("presence checked when reading attributes");
        match &attr.value {
            Value::Ident(s) | Value::Str(s) => Ok(s.clone()),
            Value::Number(_) => Err(ParseError::new(
                ParseErrorCode::UnexpectedToken,
                attr.key_span,
                format!("attribute `{key}` takes a name"),
            )
            .expecting(&["identifier", "string"])),
        }
    }
}
