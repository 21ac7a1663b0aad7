use std::collections::BTreeSet;

use chrono::NaiveDate;

use super::lexer::{lex_line, Spanned, Tok};
use super::ParseError;
use crate::decimal::Decimal;
use crate::expr::{ExprTree, OpKind};
use crate::rule::{Action, Context, CurrencyScope, Period, Predicate, Relop, Rule};

pub(crate) struct Parser {
    line: usize,
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(line: usize, text: &str) -> Result<Self, ParseError> {
        Ok(Parser { line, toks: lex_line(line, text)?, pos: 0 })
    }

    pub(crate) fn is_blank(&self) -> bool {
        matches!(self.toks[0].tok, Tok::Eof)
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn column(&self) -> usize {
        self.toks[self.pos].column
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.column(),
            expected: expected.into(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(tok.describe()))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.error(format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub(crate) fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.error("end of line")),
        }
    }

    /// `ID ":" "IF" expr relop number "THEN" action [ "CONTEXT" atom { "AND" atom } ]`
    pub(crate) fn rule(&mut self) -> Result<Rule, ParseError> {
        let id = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.error("rule id")),
        };
        self.bump();
        self.expect(Tok::Colon)?;
        self.expect_keyword("IF")?;
        let body = self.expr()?;
        let relop = self.relop()?;
        let threshold = self.signed_number("threshold")?;
        self.expect_keyword("THEN")?;
        let action = match self.peek() {
            Tok::Ident(s) if s == "FAIL" => Action::Fail,
            Tok::Ident(s) if s == "WARN" => Action::Warn,
            _ => return Err(self.error("`FAIL` or `WARN`")),
        };
        self.bump();
        let context = if self.at_keyword("CONTEXT") {
            self.bump();
            self.context()?
        } else {
            Context::universal()
        };
        self.expect_eof()?;
        Ok(Rule { id, body, predicate: Predicate::new(relop, threshold), action, context })
    }

    fn relop(&mut self) -> Result<Relop, ParseError> {
        let r = match self.peek() {
            Tok::Eq => Relop::Eq,
            Tok::Lt => Relop::Lt,
            Tok::Gt => Relop::Gt,
            Tok::Le => Relop::Le,
            Tok::Ge => Relop::Ge,
            Tok::Ne => Relop::Ne,
            _ => return Err(self.error("operator or relational operator")),
        };
        self.bump();
        Ok(r)
    }

    fn signed_number(&mut self, what: &str) -> Result<Decimal, ParseError> {
        let neg = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        match self.peek().clone() {
            Tok::Number(s) => {
                let text = if neg { format!("-{s}") } else { s };
                let value = text.parse().map_err(|_| self.error(what))?;
                self.bump();
                Ok(value)
            }
            _ => Err(self.error(what)),
        }
    }

    /// `term { ("+"|"-") term }`; runs of `+` become one n-ary ADD node.
    pub(crate) fn expr(&mut self) -> Result<ExprTree, ParseError> {
        self.chain(OpKind::Add, OpKind::Sub, Tok::Plus, Tok::Minus, Self::term)
    }

    fn term(&mut self) -> Result<ExprTree, ParseError> {
        self.chain(OpKind::Mul, OpKind::Div, Tok::Star, Tok::Slash, Self::factor)
    }

    fn chain(
        &mut self,
        nary: OpKind,
        binary: OpKind,
        nary_tok: Tok,
        binary_tok: Tok,
        operand: fn(&mut Self) -> Result<ExprTree, ParseError>,
    ) -> Result<ExprTree, ParseError> {
        let mut lhs = operand(self)?;
        // whether `lhs` is an n-ary node built by this loop (not parenthesized)
        let mut open_chain = false;
        loop {
            if *self.peek() == nary_tok {
                self.bump();
                let rhs = operand(self)?;
                match &mut lhs {
                    ExprTree::Op { children, .. } if open_chain => children.push(rhs),
                    _ => {
                        lhs = ExprTree::op(nary, vec![lhs, rhs]);
                        open_chain = true;
                    }
                }
            } else if *self.peek() == binary_tok {
                self.bump();
                let rhs = operand(self)?;
                lhs = ExprTree::op(binary, vec![lhs, rhs]);
                open_chain = false;
            } else {
                return Ok(lhs);
            }
        }
    }

    /// `"sum" "(" expr ")" | param | number | "(" expr ")"`
    fn factor(&mut self) -> Result<ExprTree, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if name == "sum" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(ExprTree::sum(inner))
            }
            Tok::Ident(name) => {
                if !is_param_name(&name) {
                    return Err(self.error("parameter name ([a-z][a-z0-9_]*)"));
                }
                self.bump();
                Ok(ExprTree::param(name))
            }
            Tok::Number(_) | Tok::Minus | Tok::Plus => Ok(ExprTree::value(self.signed_number("number")?)),
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => Err(self.error("expression")),
        }
    }

    /// `atom { "AND" atom }`
    pub(crate) fn context(&mut self) -> Result<Context, ParseError> {
        let mut ctx = Context::universal();
        loop {
            self.atom(&mut ctx)?;
            if self.at_keyword("AND") {
                self.bump();
            } else {
                return Ok(ctx);
            }
        }
    }

    fn atom(&mut self, ctx: &mut Context) -> Result<(), ParseError> {
        let (keyword, column) = match self.peek() {
            Tok::Ident(s) => (s.clone(), self.column()),
            _ => return Err(self.error("context clause")),
        };
        let already = match keyword.as_str() {
            "class" => ctx.classes.is_some(),
            "ccy" => ctx.ccy.is_some(),
            "period" => ctx.period.is_some(),
            _ => return Err(ParseError::UnknownContextKeyword { token: keyword, line: self.line, column }),
        };
        if already {
            return Err(self.error(format!("at most one `{keyword}` clause")));
        }
        self.bump();
        self.expect(Tok::Eq)?;
        match keyword.as_str() {
            "class" => {
                let mut classes = BTreeSet::new();
                loop {
                    match self.peek() {
                        Tok::Ident(s) => {
                            classes.insert(s.clone());
                            self.bump();
                        }
                        _ => return Err(self.error("asset class")),
                    }
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                ctx.classes = Some(classes);
            }
            "ccy" => {
                let scope = match self.peek() {
                    Tok::Ident(s) if s == "local" => CurrencyScope::Local,
                    Tok::Ident(s) if s == "base" => CurrencyScope::Base,
                    Tok::Ident(s) if s.len() == 3 && s.bytes().all(|b| b.is_ascii_uppercase()) => {
                        CurrencyScope::Iso(s.clone())
                    }
                    _ => return Err(self.error("`local`, `base` or an ISO 4217 code")),
                };
                self.bump();
                ctx.ccy = Some(scope);
            }
            _ => {
                let open_column = self.column();
                self.expect(Tok::LBracket)?;
                let start = self.date()?;
                self.expect(Tok::Comma)?;
                let end = self.date()?;
                self.expect(Tok::RBracket)?;
                ctx.period = Some(Period::new(start, end).ok_or(ParseError::InvalidPeriod {
                    line: self.line,
                    column: open_column,
                    start,
                    end,
                })?);
            }
        }
        Ok(())
    }

    fn date(&mut self) -> Result<NaiveDate, ParseError> {
        match self.peek() {
            Tok::Date(s) => {
                let d = NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| self.error("valid calendar date"))?;
                self.bump();
                Ok(d)
            }
            _ => Err(self.error("date (YYYY-MM-DD)")),
        }
    }
}

pub(crate) fn is_param_name(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b'a'..=b'z'))
        && bytes.all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
        && s != "sum"
}
