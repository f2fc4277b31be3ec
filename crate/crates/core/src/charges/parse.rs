//! Charge literals: a `+`-separated sum of optionally weighted terms.
//!
//! ```text
//! atoms{1:1/2, 4:1/4}    delta(k)
//! tail(k0=3, c=1/8, r=1/2[, mod=2, res=0])    geom(k0=1, r=1/2)
//! diffuse[(1/4, uf{ap(0,2)}), ...]    uf{evens, ap(0,3)}    diffuse
//! 1/2*geom(k0=1, r=1/2) + 1/2*uf{evens}
//! ```

use super::{GeometricTail, Measure, UltrafilterBase};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sets::SetParser;
use crate::text::Cursor;

pub(crate) fn parse_measure(src: &str) -> Result<Measure> {
    let mut cur = Cursor::new(src, "charge");
    let mut m = Measure::zero();
    loop {
        m = m.plus(&term(&mut cur)?);
        if !cur.eat('+') {
            break;
        }
    }
    cur.finish()?;
    Ok(m)
}

fn term(cur: &mut Cursor<'_>) -> Result<Measure> {
    let weight = match cur.peek() {
        Some(c) if c.is_ascii_digit() => {
            let w = cur.rational()?;
            cur.expect('*')?;
            Some(w)
        }
        _ => None,
    };
    let m = atom(cur)?;
    Ok(match weight {
        Some(w) => m.scaled(&w),
        None => m,
    })
}

fn atom(cur: &mut Cursor<'_>) -> Result<Measure> {
    let start = cur.position();
    let Some(word) = cur.ident() else {
        return Err(cur.error("expected a charge term"));
    };
    match word {
        "atoms" => {
            cur.expect('{')?;
            let mut atoms = Vec::new();
            if !cur.eat('}') {
                loop {
                    let k = cur.nat()?;
                    cur.expect(':')?;
                    let w = cur.rational()?;
                    atoms.push((k, w));
                    if cur.eat('}') {
                        break;
                    }
                    cur.expect(',')?;
                }
            }
            Measure::from_parts(atoms, Vec::new(), Vec::new()).map_err(|e| at(&*cur, start, e))
        }
        "delta" => {
            cur.expect('(')?;
            let k = cur.nat()?;
            cur.expect(')')?;
            if k == 0 {
                return Err(cur.error("naturals start at 1"));
            }
            Ok(Measure::dirac(k))
        }
        "tail" | "geom" => {
            let fields = keyed(cur)?;
            let get = |name: &str| fields.iter().find(|(n, _)| n == name).map(|(_, v)| v.clone());
            let nat_field = |name: &str, default: Option<u64>| -> Result<u64> {
                match get(name) {
                    Some(v) => v
                        .to_u64()
                        .ok_or_else(|| at(&*cur, start, format!("`{name}` must be a natural number"))),
                    None => default.ok_or_else(|| at(&*cur, start, format!("missing `{name}`"))),
                }
            };
            for (n, _) in &fields {
                let allowed: &[&str] = if word == "geom" { &["k0", "r"] } else { &["k0", "c", "r", "mod", "res"] };
                if !allowed.contains(&n.as_str()) {
                    return Err(at(&*cur, start, format!("unknown field `{n}` in {word}")));
                }
            }
            let k0 = nat_field("k0", Some(1))?;
            let r = get("r").ok_or_else(|| at(&*cur, start, "missing `r`"))?;
            if !(r.is_positive() && r < 1) {
                return Err(at(&*cur, start, format!("ratio {r} must lie in (0,1)")));
            }
            if k0 == 0 {
                return Err(at(&*cur, start, "naturals start at 1"));
            }
            let tail = if word == "geom" {
                GeometricTail::normalized(k0, r)
            } else {
                let c = get("c").ok_or_else(|| at(&*cur, start, "missing `c`"))?;
                if c.is_negative() {
                    return Err(at(&*cur, start, "negative tail coefficient"));
                }
                let modulus = nat_field("mod", Some(1))?;
                if modulus == 0 {
                    return Err(at(&*cur, start, "`mod` must be positive"));
                }
                let residue = nat_field("res", Some(0))?;
                GeometricTail::on_class(k0, c, r, modulus, residue)
            };
            Measure::from_parts([], vec![tail], Vec::new())
        }
        "uf" => {
            let base = base_body(cur).map_err(|e| at_err(&*cur, start, e))?;
            Measure::from_parts([], Vec::new(), vec![(Rational::one(), base)])
        }
        "diffuse" => {
            if !cur.eat('[') {
                return Measure::from_parts([], Vec::new(), vec![(Rational::one(), UltrafilterBase::free())]);
            }
            let mut comps = Vec::new();
            if !cur.eat(']') {
                loop {
                    cur.expect('(')?;
                    let w = cur.rational()?;
                    cur.expect(',')?;
                    let pos = cur.position();
                    let base = if cur.eat_str("uf") {
                        base_body(cur).map_err(|e| at_err(&*cur, pos, e))?
                    } else {
                        return Err(cur.error("expected `uf{...}`"));
                    };
                    cur.expect(')')?;
                    comps.push((w, base));
                    if cur.eat(']') {
                        break;
                    }
                    cur.expect(',')?;
                }
            }
            Measure::from_parts([], Vec::new(), comps).map_err(|e| at(&*cur, start, e))
        }
        other => {
            cur.reset(start);
            Err(cur.error(format!("unknown charge term `{other}`")))
        }
    }
}

fn base_body(cur: &mut Cursor<'_>) -> Result<UltrafilterBase> {
    cur.expect('{')?;
    let mut gens = Vec::new();
    if !cur.eat('}') {
        loop {
            gens.push(SetParser::expr(cur)?);
            if cur.eat('}') {
                break;
            }
            cur.expect(',')?;
        }
    }
    if gens.is_empty() {
        Ok(UltrafilterBase::free())
    } else {
        UltrafilterBase::new(gens)
    }
}

fn keyed(cur: &mut Cursor<'_>) -> Result<Vec<(String, Rational)>> {
    cur.expect('(')?;
    let mut out = Vec::new();
    loop {
        let name = cur.ident().ok_or_else(|| cur.error("expected a field name"))?;
        cur.expect('=')?;
        out.push((name.to_string(), cur.rational()?));
        if cur.eat(')') {
            break;
        }
        cur.expect(',')?;
    }
    Ok(out)
}

fn at(cur: &Cursor<'_>, pos: usize, msg: impl ToString) -> Error {
    cur.error_at(pos, msg.to_string())
}

fn at_err(cur: &Cursor<'_>, pos: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => at(cur, pos, other),
    }
}
