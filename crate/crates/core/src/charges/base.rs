use std::fmt;

use crate::error::{Error, Result};
use crate::sets::SetExpr;

/// Stands for any free ultrafilter containing every generator.
///
/// Decisions only ever consult the intersection of all generators (the
/// core): if some finite intersection is almost inside `E`, so is the core.
#[derive(Clone)]
pub struct UltrafilterBase {
    generators: Vec<SetExpr>,
    core: SetExpr,
}

impl UltrafilterBase {
    pub fn new(generators: Vec<SetExpr>) -> Result<Self> {
        for g in &generators {
            if !g.is_infinite() {
                return Err(Error::invariant(format!(
                    "ultrafilter generator {g} is not infinite"
                )));
            }
        }
        let core = SetExpr::intersection_all(generators.iter());
        if !core.is_infinite() {
            return Err(Error::invariant(format!(
                "generators {} lack the finite intersection property",
                fmt_list(&generators)
            )));
        }
        Ok(UltrafilterBase { generators, core })
    }

    /// No constraint beyond freeness.
    pub fn free() -> Self {
        UltrafilterBase {
            generators: Vec::new(),
            core: SetExpr::naturals(),
        }
    }

    pub fn generated_by(set: SetExpr) -> Result<Self> {
        Self::new(vec![set])
    }

    pub fn generators(&self) -> &[SetExpr] {
        &self.generators
    }

    pub fn core(&self) -> &SetExpr {
        &self.core
    }

    /// `Some(true)` if every extension contains `e`, `Some(false)` if none does.
    pub fn decide(&self, e: &SetExpr) -> Option<bool> {
        if e.is_finite() {
            return Some(false);
        }
        if e.complement().is_finite() {
            return Some(true);
        }
        if self.core.almost_subset(e) {
            Some(true)
        } else if self.core.almost_subset(&e.complement()) {
            Some(false)
        } else {
            None
        }
    }

    pub fn decide_or_err(&self, e: &SetExpr) -> Result<bool> {
        self.decide(e).ok_or_else(|| Error::UndeterminedByBase {
            set: e.to_string(),
            base: self.to_string(),
        })
    }

    /// Same forced sets: the cores differ by a finite set.
    pub fn equivalent(&self, other: &UltrafilterBase) -> bool {
        self.core.almost_subset(&other.core) && other.core.almost_subset(&self.core)
    }

    /// Cores meet in only finitely many points, so the ultrafilters must differ.
    pub fn necessarily_distinct(&self, other: &UltrafilterBase) -> bool {
        self.core.intersection(&other.core).is_finite()
    }
}

fn fmt_list(v: &[SetExpr]) -> String {
    let parts: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    parts.join(", ")
}

impl fmt::Display for UltrafilterBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "uf{{{}}}", fmt_list(&self.generators))
    }
}

impl fmt::Debug for UltrafilterBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(UltrafilterBase::new(vec![SetExpr::finite([1, 2])]).is_err());
        assert!(UltrafilterBase::new(vec![SetExpr::evens(), SetExpr::odds()]).is_err());
        assert!(UltrafilterBase::new(vec![SetExpr::evens(), SetExpr::ap(0, 3)]).is_ok());
    }

    #[test]
    fn decisions() {
        let b = UltrafilterBase::generated_by(SetExpr::evens()).unwrap();
        assert_eq!(b.decide(&SetExpr::evens()), Some(true));
        assert_eq!(b.decide(&SetExpr::odds()), Some(false));
        assert_eq!(b.decide(&SetExpr::ap(0, 4)), None);
        assert_eq!(b.decide(&SetExpr::finite([2, 4])), Some(false));
        assert_eq!(b.decide(&SetExpr::from_lo(100)), Some(true));
        let both = UltrafilterBase::new(vec![SetExpr::evens(), SetExpr::ap(0, 3)]).unwrap();
        assert_eq!(both.decide(&SetExpr::ap(0, 6)), Some(true));
    }

    #[test]
    fn equivalence() {
        let a = UltrafilterBase::generated_by(SetExpr::evens()).unwrap();
        let b = UltrafilterBase::generated_by("ap(0,2) & int(9,)".parse().unwrap()).unwrap();
        assert!(a.equivalent(&b));
        let c = UltrafilterBase::generated_by(SetExpr::odds()).unwrap();
        assert!(a.necessarily_distinct(&c));
    }
}
