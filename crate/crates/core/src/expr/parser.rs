//! Recursive descent parser. Precedence, loosest first: `or`, `and`, `not`,
//! comparisons, `+ -`, `* / // %`, unary minus, `**` (right associative).

use thiserror::Error;

use super::lexer::{tokenize, Token, TokenKind};
use super::{BinaryOp, Expr, UnaryOp};
use crate::value::{ArithOp, CmpOp, ParamValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unsupported syntax at byte {offset}: {what}")]
    Unsupported { offset: usize, what: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::Unsupported { offset, .. } => *offset,
        }
    }
}

pub fn parse_expression(source: &str) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 0,
            expected: "an expression".to_string(),
            found: "empty input".to_string(),
        });
    }
    let mut parser = Parser {
        tokens: tokenize(source)?,
        pos: 0,
    };
    let expr = parser.parse_or()?;
    parser.expect_eof()?;
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, ahead: usize) -> &TokenKind {
        let idx = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    fn advance(&mut self) -> TokenKind {
        let kind = self.tokens[self.pos].kind.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        kind
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek() {
            TokenKind::Eof => Ok(()),
            TokenKind::LParen => Err(ParseError::Unsupported {
                offset: self.offset(),
                what: "function call".to_string(),
            }),
            _ => Err(self.error("an operator or end of input")),
        }
    }

    fn parse_or(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.parse_and()?;
        while *self.peek() == TokenKind::Or {
            self.advance();
            let right = self.parse_and()?;
            left = Expr::binary(BinaryOp::Or, left, right);
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.parse_not()?;
        while *self.peek() == TokenKind::And {
            self.advance();
            let right = self.parse_not()?;
            left = Expr::binary(BinaryOp::And, left, right);
        }
        Ok(left)
    }

    fn parse_not(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == TokenKind::Not {
            self.advance();
            let operand = self.parse_not()?;
            return Ok(Expr::unary(UnaryOp::Not, operand));
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> Result<Expr, ParseError> {
        let first = self.parse_arith()?;
        let mut operands = vec![first];
        let mut ops = Vec::new();
        loop {
            let op = match self.peek() {
                TokenKind::Lt => CmpOp::Lt,
                TokenKind::Le => CmpOp::Le,
                TokenKind::Gt => CmpOp::Gt,
                TokenKind::Ge => CmpOp::Ge,
                TokenKind::EqEq => CmpOp::Eq,
                TokenKind::Ne => CmpOp::Ne,
                _ => break,
            };
            self.advance();
            ops.push(op);
            operands.push(self.parse_arith()?);
        }
        if ops.is_empty() {
            Ok(operands.pop().expect("one operand"))
        } else {
            Ok(Expr::Compare { operands, ops })
        }
    }

    fn parse_arith(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.parse_term()?;
        loop {
            let op = match self.peek() {
                TokenKind::Plus => ArithOp::Add,
                TokenKind::Minus => ArithOp::Sub,
                _ => break,
            };
            self.advance();
            let right = self.parse_term()?;
            left = Expr::binary(BinaryOp::Arith(op), left, right);
        }
        Ok(left)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                TokenKind::Star => ArithOp::Mul,
                TokenKind::Slash => ArithOp::Div,
                TokenKind::SlashSlash => ArithOp::FloorDiv,
                TokenKind::Percent => ArithOp::Mod,
                _ => break,
            };
            self.advance();
            let right = self.parse_unary()?;
            left = Expr::binary(BinaryOp::Arith(op), left, right);
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            TokenKind::Minus => {
                let minus_offset = self.offset();
                // `-<number>` folds into a negative literal unless the number is a
                // `**` base, since `-2 ** 2` means `-(2 ** 2)`.
                let folds = matches!(self.peek_at(1), TokenKind::Int(_) | TokenKind::Real(_))
                    && *self.peek_at(2) != TokenKind::StarStar;
                self.advance();
                if folds {
                    return match self.advance() {
                        TokenKind::Int(v) => {
                            if v <= i64::MAX as u128 + 1 {
                                Ok(Expr::Literal(ParamValue::Int((v as i128).wrapping_neg() as i64)))
                            } else {
                                Err(ParseError::Syntax {
                                    offset: minus_offset,
                                    expected: "an integer that fits in 64 bits".to_string(),
                                    found: format!("`-{v}`"),
                                })
                            }
                        }
                        TokenKind::Real(v) => Ok(Expr::Literal(ParamValue::Real(-v))),
                        _ => unreachable!(),
                    };
                }
                let operand = self.parse_unary()?;
                Ok(Expr::unary(UnaryOp::Neg, operand))
            }
            TokenKind::Plus => Err(ParseError::Unsupported {
                offset: self.offset(),
                what: "unary `+`".to_string(),
            }),
            _ => self.parse_power(),
        }
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        if *self.peek() == TokenKind::StarStar {
            self.advance();
            let exponent = self.parse_unary()?;
            return Ok(Expr::binary(BinaryOp::Arith(ArithOp::Pow), base, exponent));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            TokenKind::Int(v) => {
                self.advance();
                let v = i64::try_from(v).map_err(|_| ParseError::Syntax {
                    offset,
                    expected: "an integer that fits in 64 bits".to_string(),
                    found: format!("`{v}`"),
                })?;
                Ok(Expr::int(v))
            }
            TokenKind::Real(v) => {
                self.advance();
                Ok(Expr::Literal(ParamValue::Real(v)))
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(Expr::Literal(ParamValue::text(s)))
            }
            TokenKind::True => {
                self.advance();
                Ok(Expr::Literal(ParamValue::Bool(true)))
            }
            TokenKind::False => {
                self.advance();
                Ok(Expr::Literal(ParamValue::Bool(false)))
            }
            TokenKind::Ident(name) => {
                self.advance();
                if *self.peek() == TokenKind::LParen {
                    return Err(ParseError::Unsupported {
                        offset,
                        what: format!("function call `{name}(...)`"),
                    });
                }
                Ok(Expr::Param(name))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.parse_or()?;
                if *self.peek() != TokenKind::RParen {
                    return Err(self.error("`)`"));
                }
                self.advance();
                Ok(inner)
            }
            _ => Err(self.error("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    #[test]
    fn chained_comparison_is_one_node() {
        let e = p("32 <= thread_block_x * thread_block_y <= 1024");
        let expected = Expr::Compare {
            operands: vec![
                Expr::int(32),
                Expr::binary(BinaryOp::MUL, Expr::param("thread_block_x"), Expr::param("thread_block_y")),
                Expr::int(1024),
            ],
            ops: vec![CmpOp::Le, CmpOp::Le],
        };
        assert_eq!(e, expected);
    }

    #[test]
    fn literals() {
        assert_eq!(p("True"), Expr::Literal(ParamValue::Bool(true)));
        assert_eq!(p("1.5e3"), Expr::Literal(ParamValue::Real(1500.0)));
        assert_eq!(p("'ab\\'c'"), Expr::Literal(ParamValue::text("ab'c")));
        assert_eq!(p("-9223372036854775808"), Expr::int(i64::MIN));
        assert!(parse_expression("9223372036854775808").is_err());
    }

    #[test]
    fn precedence() {
        let e = p("a + b * c");
        assert_eq!(
            e,
            Expr::binary(
                BinaryOp::ADD,
                Expr::param("a"),
                Expr::binary(BinaryOp::MUL, Expr::param("b"), Expr::param("c"))
            )
        );
        // Power binds tighter than unary minus on its left.
        assert_eq!(
            p("-2 ** 2"),
            Expr::unary(UnaryOp::Neg, Expr::binary(BinaryOp::Arith(ArithOp::Pow), Expr::int(2), Expr::int(2)))
        );
        // and right associative.
        assert_eq!(
            p("a ** b ** c"),
            Expr::binary(
                BinaryOp::Arith(ArithOp::Pow),
                Expr::param("a"),
                Expr::binary(BinaryOp::Arith(ArithOp::Pow), Expr::param("b"), Expr::param("c"))
            )
        );
        assert_eq!(
            p("not a or b and c"),
            Expr::binary(
                BinaryOp::Or,
                Expr::unary(UnaryOp::Not, Expr::param("a")),
                Expr::binary(BinaryOp::And, Expr::param("b"), Expr::param("c"))
            )
        );
        assert_eq!(p("(a - b) - c"), p("a - b - c"));
        assert_ne!(p("a - (b - c)"), p("a - b - c"));
    }

    #[test]
    fn malformed_input_reports_offset() {
        let err = parse_expression("a <=").unwrap_err();
        assert_eq!(err.offset(), 4);
        assert!(matches!(err, ParseError::Syntax { ref found, .. } if found == "end of input"));
        assert!(parse_expression("").is_err());
        assert!(parse_expression("(a + b").is_err());
        assert!(parse_expression("a b").is_err());
    }

    #[test]
    fn unsupported_syntax() {
        for src in ["max(a, b)", "a[0]", "lambda p: p", "a if b else c", "a & b", "+a", "a.b"] {
            match parse_expression(src) {
                Err(ParseError::Unsupported { .. }) => {}
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
