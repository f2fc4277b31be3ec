//! Grammar: `fin{1,3}`, `ap(a,d)`, `int(lo,hi)`, `int(lo,)`, the aliases
//! `evens`, `odds`, `nat`, `empty`, with `!` > `&` > `|` and parentheses.

use super::SetExpr;
use crate::error::Error;
use crate::text::Cursor;

pub(crate) fn parse_set(src: &str) -> Result<SetExpr, Error> {
    let mut cur = Cursor::new(src, "set expression");
    let e = SetParser::expr(&mut cur)?;
    cur.finish()?;
    Ok(e)
}

pub(crate) struct SetParser;

impl SetParser {
    pub(crate) fn expr(cur: &mut Cursor<'_>) -> Result<SetExpr, Error> {
        let mut acc = Self::term(cur)?;
        while cur.eat('|') {
            let rhs = Self::term(cur)?;
            acc = acc.union(&rhs);
        }
        Ok(acc)
    }

    fn term(cur: &mut Cursor<'_>) -> Result<SetExpr, Error> {
        let mut acc = Self::factor(cur)?;
        while cur.eat('&') {
            let rhs = Self::factor(cur)?;
            acc = acc.intersection(&rhs);
        }
        Ok(acc)
    }

    fn factor(cur: &mut Cursor<'_>) -> Result<SetExpr, Error> {
        if cur.eat('!') {
            return Ok(Self::factor(cur)?.complement());
        }
        if cur.eat('(') {
            let e = Self::expr(cur)?;
            cur.expect(')')?;
            return Ok(e);
        }
        if cur.peek() == Some('{') {
            return Self::finite_body(cur);
        }
        let start = cur.position();
        let Some(word) = cur.ident() else {
            return Err(cur.error("expected a set atom"));
        };
        match word {
            "fin" => Self::finite_body(cur),
            "ap" => {
                cur.expect('(')?;
                let a = cur.nat()?;
                cur.expect(',')?;
                let d = cur.nat()?;
                if d == 0 {
                    return Err(cur.error("progression period must be at least 1"));
                }
                cur.expect(')')?;
                Ok(SetExpr::ap(a, d))
            }
            "int" => {
                cur.expect('(')?;
                let lo = cur.nat()?;
                cur.expect(',')?;
                if cur.eat(')') {
                    return Ok(SetExpr::from_lo(lo));
                }
                let hi = cur.nat()?;
                cur.expect(')')?;
                Ok(SetExpr::interval(lo, hi))
            }
            "evens" => Ok(SetExpr::evens()),
            "odds" => Ok(SetExpr::odds()),
            "nat" | "all" => Ok(SetExpr::naturals()),
            "empty" => Ok(SetExpr::empty()),
            _ => {
                cur.reset(start);
                Err(cur.error(format!("unknown set atom `{word}`")))
            }
        }
    }

    fn finite_body(cur: &mut Cursor<'_>) -> Result<SetExpr, Error> {
        cur.expect('{')?;
        let mut v = Vec::new();
        if !cur.eat('}') {
            loop {
                v.push(cur.nat()?);
                if cur.eat('}') {
                    break;
                }
                cur.expect(',')?;
            }
        }
        Ok(SetExpr::finite(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_set("fin{1} | ap(0,2) & int(1,4)").unwrap();
        let members: Vec<u64> = (1..10).filter(|&n| e.contains(n)).collect();
        assert_eq!(members, vec![1, 2, 4]);
    }

    #[test]
    fn aliases_and_braces() {
        assert!(parse_set("evens").unwrap().same_set(&SetExpr::ap(0, 2)));
        assert!(parse_set("{2,3}").unwrap().same_set(&SetExpr::finite([2, 3])));
        assert!(parse_set("fin{}").unwrap().is_empty());
    }

    #[test]
    fn errors_carry_columns() {
        match parse_set("ap(1,0)").unwrap_err() {
            Error::Parse { column, .. } => assert_eq!(column, 7),
            e => panic!("{e}"),
        }
        assert!(parse_set("foo(1)").is_err());
        assert!(parse_set("ap(1,2) |").is_err());
        assert!(parse_set("").is_err());
    }
}
