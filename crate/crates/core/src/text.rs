//! Small cursor shared by the textual grammars (sets, charges, maps, profiles).

use crate::error::Error;
use crate::rational::Rational;

pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    context: &'static str,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str, context: &'static str) -> Self {
        Cursor {
            src,
            pos: 0,
            context,
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.context, self.src, self.pos, msg)
    }

    pub fn error_at(&self, pos: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.context, self.src, pos, msg)
    }

    pub fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    pub fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<(), Error> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    pub fn expect_str(&mut self, s: &str) -> Result<(), Error> {
        if self.eat_str(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    pub fn finish(&mut self) -> Result<(), Error> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    /// An identifier: letters, digits, `_`, `-`, `'`, starting with a letter.
    pub fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_alphabetic() || c == '_' || c == '∞' => {}
            _ => return None,
        }
        let end = rest
            .char_indices()
            .find(|&(_, c)| !(c.is_alphanumeric() || c == '_' || c == '\'' || c == '∞'))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += end;
        Some(&rest[..end])
    }

    /// Peeks at the identifier ahead without consuming it.
    pub fn peek_ident(&mut self) -> Option<&'a str> {
        let save = self.pos;
        let id = self.ident();
        self.pos = save;
        id
    }

    pub fn nat(&mut self) -> Result<u64, Error> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|&(_, c)| !c.is_ascii_digit())
            .map_or(rest.len(), |(i, _)| i);
        if end == 0 {
            return Err(self.error("expected a natural number"));
        }
        let v = rest[..end]
            .parse()
            .map_err(|_| self.error("natural number out of range"))?;
        self.pos += end;
        Ok(v)
    }

    /// A rational literal: `p/q`, `p`, or a decimal, with optional sign.
    pub fn rational(&mut self) -> Result<Rational, Error> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_digit() || c == '/' || c == '.' || (i == 0 && c == '-')))
            .map_or(rest.len(), |(i, _)| i);
        let lit = &rest[..end];
        let r: Rational = lit
            .parse()
            .map_err(|_| self.error(format!("invalid rational `{lit}`")))?;
        self.pos += end;
        Ok(r)
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, pos: usize) {
        self.pos = pos;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn tokens() {
        let mut c = Cursor::new(" abc ( 12 , -3/4 )", "test");
        assert_eq!(c.ident(), Some("abc"));
        c.expect('(').unwrap();
        assert_eq!(c.nat().unwrap(), 12);
        c.expect(',').unwrap();
        assert_eq!(c.rational().unwrap(), q(-3, 4));
        c.expect(')').unwrap();
        c.finish().unwrap();
    }

    #[test]
    fn error_position() {
        let mut c = Cursor::new("ab\n  x", "test");
        c.ident();
        match c.nat().unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 3)),
            e => panic!("{e}"),
        }
    }
}
