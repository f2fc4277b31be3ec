//! Finitely additive charges on ℕ.
//!
//! A [`Measure`] is a finite non-negative finitely additive set function made
//! of three exact parts: point masses, geometric tails on residue classes, and
//! weighted ultrafilter placeholders. A [`Charge`] is a measure of total mass 1.
//!
//! The point mass at `k` is the atom at `k` plus the contributions of every
//! tail whose support contains `k`; tails may overlap atoms and each other.

mod base;
mod map;
mod parse;
mod tail;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

pub use base::UltrafilterBase;
pub use map::{NatMap, Target};
pub use tail::GeometricTail;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sets::SetExpr;

#[derive(Clone, Debug)]
pub struct DiffuseComponent {
    pub weight: Rational,
    pub base: UltrafilterBase,
}

#[derive(Clone, Debug, Default)]
pub struct Measure {
    atoms: BTreeMap<u64, Rational>,
    tails: Vec<GeometricTail>,
    diffuse: Vec<DiffuseComponent>,
}

impl Measure {
    pub fn zero() -> Self {
        Measure::default()
    }

    pub fn from_parts(
        atoms: impl IntoIterator<Item = (u64, Rational)>,
        tails: Vec<GeometricTail>,
        diffuse: Vec<(Rational, UltrafilterBase)>,
    ) -> Result<Self> {
        let mut m = Measure::zero();
        for (k, w) in atoms {
            if k == 0 {
                return Err(Error::invariant("atom at 0: naturals start at 1"));
            }
            if w.is_negative() {
                return Err(Error::invariant(format!("negative atom {w} at {k}")));
            }
            *m.atoms.entry(k).or_insert_with(Rational::zero) += w;
        }
        m.tails = tails;
        for (weight, base) in diffuse {
            if weight.is_negative() {
                return Err(Error::invariant(format!("negative diffuse weight {weight}")));
            }
            m.diffuse.push(DiffuseComponent { weight, base });
        }
        m.normalize();
        Ok(m)
    }

    pub fn dirac(k: u64) -> Self {
        Self::from_parts([(k, Rational::one())], Vec::new(), Vec::new()).expect("valid dirac")
    }

    pub fn atoms(&self) -> &BTreeMap<u64, Rational> {
        &self.atoms
    }

    pub fn tails(&self) -> &[GeometricTail] {
        &self.tails
    }

    pub fn diffuse(&self) -> &[DiffuseComponent] {
        &self.diffuse
    }

    pub fn total(&self) -> Rational {
        self.ca_mass() + self.diffuse_mass()
    }

    /// Mass of the countably additive part.
    pub fn ca_mass(&self) -> Rational {
        let a: Rational = self.atoms.values().sum();
        a + self.tails.iter().map(GeometricTail::total).sum::<Rational>()
    }

    pub fn diffuse_mass(&self) -> Rational {
        self.diffuse.iter().map(|d| &d.weight).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.tails.is_empty() && self.diffuse.is_empty()
    }

    pub fn is_diffuse(&self) -> bool {
        self.atoms.is_empty() && self.tails.is_empty()
    }

    pub fn is_countably_additive(&self) -> bool {
        self.diffuse.is_empty()
    }

    /// Finitely many points carry all countably additive mass.
    pub fn has_finite_support(&self) -> bool {
        self.tails.is_empty()
    }

    pub fn point_mass(&self, k: u64) -> Rational {
        let mut m = self.atoms.get(&k).cloned().unwrap_or_else(Rational::zero);
        for t in &self.tails {
            m += t.point(k);
        }
        m
    }

    /// Countably additive mass on `e` (diffuse part excluded).
    pub fn ca_eval(&self, e: &SetExpr) -> Rational {
        let mut total: Rational = self
            .atoms
            .iter()
            .filter(|(k, _)| e.contains(**k))
            .map(|(_, w)| w)
            .sum();
        for t in &self.tails {
            total += t.mass_on(e.nf());
        }
        total
    }

    /// Countably additive mass on the interval `[lo, hi]`.
    pub fn ca_interval(&self, lo: u64, hi: u64) -> Rational {
        if lo > hi {
            return Rational::zero();
        }
        let mut total: Rational = self.atoms.range(lo..=hi).map(|(_, w)| w).sum();
        if !self.tails.is_empty() {
            let e = SetExpr::interval(lo, hi);
            for t in &self.tails {
                total += t.mass_on(e.nf());
            }
        }
        total
    }

    pub fn eval(&self, e: &SetExpr) -> Result<Rational> {
        let mut total = self.ca_eval(e);
        for d in &self.diffuse {
            if d.base.decide_or_err(e)? {
                total += &d.weight;
            }
        }
        Ok(total)
    }

    pub fn scaled(&self, w: &Rational) -> Measure {
        assert!(!w.is_negative(), "negative scale");
        let mut m = Measure {
            atoms: self.atoms.iter().map(|(k, v)| (*k, v * w)).collect(),
            tails: self.tails.iter().map(|t| t.scaled(w)).collect(),
            diffuse: self
                .diffuse
                .iter()
                .map(|d| DiffuseComponent {
                    weight: &d.weight * w,
                    base: d.base.clone(),
                })
                .collect(),
        };
        m.normalize();
        m
    }

    pub fn plus(&self, other: &Measure) -> Measure {
        let mut m = self.clone();
        for (k, v) in &other.atoms {
            *m.atoms.entry(*k).or_insert_with(Rational::zero) += v;
        }
        m.tails.extend(other.tails.iter().cloned());
        m.diffuse.extend(other.diffuse.iter().cloned());
        m.normalize();
        m
    }

    /// Exact `self − other`, provided `other` sits structurally inside `self`.
    pub fn checked_sub(&self, other: &Measure) -> Result<Measure> {
        let level = self.level().max(other.level());
        let a = self.materialized(level);
        let b = other.materialized(level);
        let mut out = a.clone();
        for (k, v) in &b.atoms {
            let e = out.atoms.entry(*k).or_insert_with(Rational::zero);
            *e -= v;
            if e.is_negative() {
                return Err(Error::invariant(format!("subtraction leaves negative mass at {k}")));
            }
        }
        for t in &b.tails {
            let Some(slot) = out.tails.iter_mut().find(|s| s.class_key() == t.class_key()) else {
                return Err(Error::invariant(format!("no matching tail for {t}")));
            };
            let c = slot.coeff() - t.coeff();
            if c.is_negative() {
                return Err(Error::invariant(format!("tail {t} exceeds its counterpart")));
            }
            *slot = GeometricTail::on_class(slot.start(), c, slot.ratio().clone(), slot.modulus(), slot.residue());
        }
        for d in &b.diffuse {
            let Some(slot) = out.diffuse.iter_mut().find(|s| s.base.equivalent(&d.base)) else {
                return Err(Error::invariant(format!("no matching diffuse component for {}", d.base)));
            };
            slot.weight -= &d.weight;
            if slot.weight.is_negative() {
                return Err(Error::invariant(format!("diffuse weight on {} goes negative", d.base)));
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Equality as set functions on the representable class.
    pub fn same_as(&self, other: &Measure) -> bool {
        matches!(self.checked_sub(other), Ok(d) if d.is_zero())
    }

    /// Countably additive part, as an unnormalized measure.
    pub fn ca_part(&self) -> Measure {
        Measure {
            atoms: self.atoms.clone(),
            tails: self.tails.clone(),
            diffuse: Vec::new(),
        }
    }

    /// Diffuse part, as an unnormalized measure.
    pub fn diffuse_part(&self) -> Measure {
        Measure {
            atoms: BTreeMap::new(),
            tails: Vec::new(),
            diffuse: self.diffuse.clone(),
        }
    }

    /// Largest point that an alignment must cover.
    fn level(&self) -> u64 {
        let a = self.atoms.keys().next_back().copied().unwrap_or(0);
        let t = self.tails.iter().map(|t| t.start()).max().unwrap_or(1);
        a.max(t - 1)
    }

    /// Moves all tail points `≤ level` into atoms.
    fn materialized(&self, level: u64) -> Measure {
        let mut m = Measure {
            atoms: self.atoms.clone(),
            tails: Vec::new(),
            diffuse: self.diffuse.clone(),
        };
        for t in &self.tails {
            let (pts, rest) = t.split_at(level);
            for (k, v) in pts {
                *m.atoms.entry(k).or_insert_with(Rational::zero) += v;
            }
            m.tails.push(rest);
        }
        m.normalize();
        m
    }

    /// Merges tails of the same class and equivalent diffuse bases; drops zeros.
    fn normalize(&mut self) {
        self.atoms.retain(|_, v| !v.is_zero());
        let mut merged: Vec<GeometricTail> = Vec::new();
        let tails = std::mem::take(&mut self.tails);
        for t in tails.into_iter().filter(|t| !t.coeff().is_zero()) {
            if let Some(pos) = merged.iter().position(|s| s.class_key() == t.class_key()) {
                let s = merged.swap_remove(pos);
                let start = s.start().max(t.start());
                let (p1, r1) = s.split_at(start - 1);
                let (p2, r2) = t.split_at(start - 1);
                for (k, v) in p1.into_iter().chain(p2) {
                    *self.atoms.entry(k).or_insert_with(Rational::zero) += v;
                }
                merged.push(GeometricTail::on_class(
                    start,
                    r1.coeff() + r2.coeff(),
                    r1.ratio().clone(),
                    r1.modulus(),
                    r1.residue(),
                ));
            } else {
                merged.push(t);
            }
        }
        merged.sort_by(|a, b| {
            (a.ratio(), a.modulus(), a.residue()).cmp(&(b.ratio(), b.modulus(), b.residue()))
        });
        self.tails = merged;
        let mut diffuse: Vec<DiffuseComponent> = Vec::new();
        for d in std::mem::take(&mut self.diffuse) {
            if d.weight.is_zero() {
                continue;
            }
            if let Some(slot) = diffuse.iter_mut().find(|s| s.base.equivalent(&d.base)) {
                slot.weight += &d.weight;
            } else {
                diffuse.push(d);
            }
        }
        self.diffuse = diffuse;
    }

    pub fn pushforward(&self, phi: &NatMap) -> Result<Measure> {
        map::pushforward(self, phi)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if !self.atoms.is_empty() {
            let items: Vec<String> = self.atoms.iter().map(|(k, v)| format!("{k}:{v}")).collect();
            parts.push(format!("atoms{{{}}}", items.join(",")));
        }
        for t in &self.tails {
            parts.push(t.to_string());
        }
        if !self.diffuse.is_empty() {
            let items: Vec<String> = self
                .diffuse
                .iter()
                .map(|d| format!("({}, {})", d.weight, d.base))
                .collect();
            parts.push(format!("diffuse[{}]", items.join(", ")));
        }
        if parts.is_empty() {
            write!(f, "atoms{{}}")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// A finitely additive probability on ℕ.
#[derive(Clone, Debug)]
pub struct Charge(Measure);

impl Charge {
    pub fn new(m: Measure) -> Result<Self> {
        let total = m.total();
        if total != 1 {
            return Err(Error::invariant(format!("charge has total mass {total}, expected 1")));
        }
        Ok(Charge(m))
    }

    pub fn dirac(k: u64) -> Self {
        Charge(Measure::dirac(k))
    }

    /// `Σ w_k δ(k)`; the weights must sum to 1.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        Self::new(Measure::from_parts(atoms, Vec::new(), Vec::new())?)
    }

    /// Mixed strategy over actions `1..=m`.
    pub fn from_mixed(weights: &[Rational]) -> Result<Self> {
        Self::from_atoms(weights.iter().enumerate().map(|(i, w)| (i as u64 + 1, w.clone())))
    }

    pub fn ultrafilter(base: UltrafilterBase) -> Self {
        Charge(Measure {
            diffuse: vec![DiffuseComponent {
                weight: Rational::one(),
                base,
            }],
            ..Measure::default()
        })
    }

    /// Any free ultrafilter containing `set`.
    pub fn ultrafilter_on(set: SetExpr) -> Result<Self> {
        Ok(Self::ultrafilter(UltrafilterBase::generated_by(set)?))
    }

    /// `(1 − r)·r^(k − k0)` on `k ≥ k0`.
    pub fn geometric(k0: u64, ratio: Rational) -> Self {
        Charge(
            Measure::from_parts([], vec![GeometricTail::normalized(k0, ratio)], Vec::new())
                .expect("valid tail"),
        )
    }

    pub fn measure(&self) -> &Measure {
        &self.0
    }

    pub fn into_measure(self) -> Measure {
        self.0
    }
}

impl Deref for Charge {
    type Target = Measure;
    fn deref(&self) -> &Measure {
        &self.0
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl FromStr for Charge {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Charge::new(parse::parse_measure(s)?)
    }
}

impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse::parse_measure(s)
    }
}

pub fn charge_eval(kappa: &Charge, e: &SetExpr) -> Result<Rational> {
    kappa.eval(e)
}

pub fn carrier_positive(kappa: &Charge, e: &SetExpr) -> Result<bool> {
    Ok(kappa.eval(e)?.is_positive())
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub weight_ca: Rational,
    pub countably_additive: Option<Charge>,
    pub weight_d: Rational,
    pub diffuse: Option<Charge>,
}

pub fn decompose(kappa: &Charge) -> Decomposition {
    let weight_ca = kappa.ca_mass();
    let weight_d = kappa.diffuse_mass();
    let renorm = |m: Measure, w: &Rational| {
        (!w.is_zero()).then(|| Charge(m.scaled(&w.recip())))
    };
    Decomposition {
        countably_additive: renorm(kappa.ca_part(), &weight_ca),
        diffuse: renorm(kappa.diffuse_part(), &weight_d),
        weight_ca,
        weight_d,
    }
}

/// `Σ w_i κ_i`, exact. Tails of equal ratio and class merge; others are kept side by side.
pub fn convex_combine(components: &[(Rational, Charge)]) -> Result<Charge> {
    let mut total = Rational::zero();
    let mut m = Measure::zero();
    for (w, k) in components {
        if w.is_negative() {
            return Err(Error::invariant(format!("negative weight {w}")));
        }
        total += w;
        m = m.plus(&k.scaled(w));
    }
    if total != 1 {
        return Err(Error::invariant(format!("weights sum to {total}, expected 1")));
    }
    Charge::new(m)
}

pub fn pushforward_charge(kappa: &Charge, phi: &NatMap) -> Result<Charge> {
    Charge::new(kappa.pushforward(phi)?)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    pub(crate) fn uf(s: &str) -> Charge {
        Charge::ultrafilter_on(s.parse().unwrap()).unwrap()
    }

    fn set(s: &str) -> SetExpr {
        s.parse().unwrap()
    }

    #[test]
    fn eval_examples() {
        let k = convex_combine(&[(q(1, 2), Charge::dirac(3)), (q(1, 2), uf("evens"))]).unwrap();
        assert_eq!(charge_eval(&k, &SetExpr::evens()).unwrap(), q(1, 2));
        let g = Charge::geometric(1, q(1, 2));
        assert_eq!(charge_eval(&g, &SetExpr::ap(2, 2)).unwrap(), q(1, 3));
        let u = uf("evens");
        assert!(matches!(
            charge_eval(&u, &SetExpr::ap(0, 4)),
            Err(Error::UndeterminedByBase { .. })
        ));
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&Charge::dirac(5));
        assert_eq!(d.weight_ca, Rational::one());
        assert!(d.diffuse.is_none());
        assert!(d.countably_additive.unwrap().same_as(&Measure::dirac(5)));
        let d = decompose(&uf("evens"));
        assert_eq!(d.weight_d, Rational::one());
        assert!(d.countably_additive.is_none());
        let k = convex_combine(&[(q(1, 2), Charge::dirac(1)), (q(1, 2), uf("evens"))]).unwrap();
        let d = decompose(&k);
        assert_eq!((d.weight_ca.clone(), d.weight_d.clone()), (q(1, 2), q(1, 2)));
        assert!(d.diffuse.unwrap().same_as(&uf("evens")));
    }

    #[test]
    fn combine_examples() {
        let k = Charge::geometric(2, q(1, 3));
        assert!(convex_combine(&[(Rational::one(), k.clone())]).unwrap().same_as(&k));
        let c = convex_combine(&[(q(1, 2), Charge::dirac(1)), (q(1, 2), Charge::dirac(2))]).unwrap();
        assert_eq!(c.atoms().len(), 2);
        assert_eq!(c.point_mass(1), q(1, 2));
        assert!(convex_combine(&[(q(1, 2), Charge::dirac(1))]).is_err());
    }

    #[test]
    fn mixed_ratio_tails_stay_exact() {
        let a = Charge::geometric(1, q(1, 2));
        let b = Charge::geometric(3, q(1, 3));
        let c = convex_combine(&[(q(1, 4), a.clone()), (q(3, 4), b.clone())]).unwrap();
        for e in ["evens", "fin{1,4}", "ap(2,3) | int(10,)"] {
            let e = set(e);
            let lhs = c.eval(&e).unwrap();
            let rhs = q(1, 4) * a.eval(&e).unwrap() + q(3, 4) * b.eval(&e).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn carrier_examples() {
        let g = Charge::geometric(1, q(1, 2));
        assert!(carrier_positive(&g, &SetExpr::singleton(7)).unwrap());
        assert!(!carrier_positive(&uf("evens"), &SetExpr::odds()).unwrap());
        let k = convex_combine(&[(q(1, 2), Charge::dirac(1)), (q(1, 2), uf("evens"))]).unwrap();
        assert!(carrier_positive(&k, &SetExpr::singleton(1)).unwrap());
    }

    #[test]
    fn subtraction_aligns_tails() {
        let g = Charge::geometric(1, q(1, 2));
        let part = Measure::from_parts(
            [(2, q(1, 8))],
            vec![GeometricTail::new(5, Rational::one(), q(1, 2))],
            Vec::new(),
        )
        .unwrap();
        let rest = g.checked_sub(&part).unwrap();
        assert_eq!(rest.point_mass(2), q(1, 8));
        assert_eq!(rest.point_mass(6), Rational::zero());
        assert!(rest.plus(&part).same_as(&g));
        assert!(part.checked_sub(&g).is_err());
    }

    #[test]
    fn charge_requires_unit_mass() {
        let m = Measure::from_parts([(1, q(1, 2))], Vec::new(), Vec::new()).unwrap();
        assert!(Charge::new(m).is_err());
    }

    pub(crate) fn arb_charge() -> impl Strategy<Value = Charge> {
        let atoms = proptest::collection::vec((1u64..12, 1i64..6), 0..4);
        let tail = proptest::option::of((1u64..6, prop_oneof![Just(q(1, 2)), Just(q(1, 3)), Just(q(2, 3))]));
        let diffuse = proptest::collection::vec(
            (1i64..4, prop_oneof![
                Just("evens"), Just("odds"), Just("ap(0,3)"), Just("ap(1,4) | ap(2,4)"), Just("int(1,)")
            ]),
            0..3,
        );
        (atoms, tail, diffuse)
            .prop_filter("non-empty", |(a, t, d)| !a.is_empty() || t.is_some() || !d.is_empty())
            .prop_map(|(atoms, tail, diffuse)| {
                let mut parts: Vec<(Rational, Charge)> = Vec::new();
                for (k, w) in atoms {
                    parts.push((Rational::int(w), Charge::dirac(k)));
                }
                if let Some((k0, r)) = tail {
                    parts.push((Rational::int(3), Charge::geometric(k0, r)));
                }
                for (w, s) in diffuse {
                    parts.push((Rational::int(w), uf(s)));
                }
                let total: Rational = parts.iter().map(|p| &p.0).sum();
                let parts: Vec<(Rational, Charge)> =
                    parts.into_iter().map(|(w, c)| (w / &total, c)).collect();
                convex_combine(&parts).unwrap()
            })
    }

    /// Sets that every generated diffuse base decides: unions of residues mod 12, plus finite noise.
    pub(crate) fn arb_decided_set() -> impl Strategy<Value = SetExpr> {
        (proptest::collection::vec(any::<bool>(), 12), proptest::collection::vec(1u64..20, 0..3))
            .prop_map(|(mask, extra)| {
                let mut e = SetExpr::empty();
                for (r, b) in mask.iter().enumerate() {
                    if *b {
                        e = e.union(&SetExpr::ap(r as u64, 12));
                    }
                }
                e.union(&SetExpr::finite(extra))
            })
    }

    proptest! {
        #[test]
        fn empty_and_full(k in arb_charge()) {
            prop_assert_eq!(k.eval(&SetExpr::empty()).unwrap(), Rational::zero());
            prop_assert_eq!(k.eval(&SetExpr::naturals()).unwrap(), Rational::one());
        }

        #[test]
        fn finite_additivity(k in arb_charge(), a in arb_decided_set(), b in arb_decided_set()) {
            let b = b.difference(&a);
            let lhs = k.eval(&a.union(&b));
            if let (Ok(x), Ok(y), Ok(z)) = (k.eval(&a), k.eval(&b), lhs) {
                prop_assert_eq!(z, x + y);
            }
        }

        #[test]
        fn diffuse_vanishes_on_finite(k in arb_charge(), v in proptest::collection::vec(1u64..40, 0..6)) {
            let d = decompose(&k);
            if let Some(dk) = d.diffuse {
                prop_assert_eq!(dk.eval(&SetExpr::finite(v)).unwrap(), Rational::zero());
            }
        }

        #[test]
        fn decompose_roundtrip(k in arb_charge(), e in arb_decided_set()) {
            let d = decompose(&k);
            let mut parts = Vec::new();
            if let Some(c) = d.countably_additive.clone() { parts.push((d.weight_ca.clone(), c)); }
            if let Some(c) = d.diffuse.clone() { parts.push((d.weight_d.clone(), c)); }
            let back = convex_combine(&parts).unwrap();
            prop_assert!(back.same_as(&k));
            prop_assert_eq!(back.eval(&e).ok(), k.eval(&e).ok());
        }

        #[test]
        fn display_roundtrip(k in arb_charge(), e in arb_decided_set()) {
            let back: Charge = k.to_string().parse().unwrap();
            prop_assert!(back.same_as(&k));
            prop_assert_eq!(back.eval(&e).ok(), k.eval(&e).ok());
        }
    }
}
