//! Piecewise eventually periodic maps ℕ → ℕ and the induced pushforward.
//!
//! `φ(n)` is the listed exception when there is one; otherwise, when a rule
//! is present, it is read off the residue of `n`: either a fixed point `b`
//! or the shift `n + s`. Without a rule the domain is the finite set of
//! listed points.

use std::collections::BTreeMap;
use std::fmt;

use super::{GeometricTail, Measure, UltrafilterBase};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sets::{NormalForm, SetExpr};
use crate::text::Cursor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Point(u64),
    Shift(i64),
}

#[derive(Clone, Debug)]
pub struct NatMap {
    exceptions: BTreeMap<u64, u64>,
    rule: Option<(u64, Vec<Target>)>,
    /// Size of a finite target range `1..=m`; `None` means ℕ.
    codomain: Option<u64>,
    labels: Vec<String>,
}

impl NatMap {
    /// Builds and validates a map; `codomain = Some(m)` targets `1..=m`.
    pub fn new(
        exceptions: BTreeMap<u64, u64>,
        rule: Option<(u64, Vec<Target>)>,
        codomain: Option<u64>,
    ) -> Result<Self> {
        if exceptions.contains_key(&0) {
            return Err(Error::invariant("map lists source 0; naturals start at 1"));
        }
        if let Some((p, targets)) = &rule {
            if *p == 0 || targets.len() as u64 != *p {
                return Err(Error::invariant("rule needs one target per residue"));
            }
            for (r, t) in targets.iter().enumerate() {
                match *t {
                    Target::Point(0) => return Err(Error::invariant("target 0 is not a natural")),
                    Target::Shift(s) => {
                        if codomain.is_some() {
                            return Err(Error::invariant("shift targets need an infinite codomain"));
                        }
                        let first = if r == 0 { *p } else { r as u64 };
                        let lowest = (first..)
                            .step_by(*p as usize)
                            .find(|n| !exceptions.contains_key(n))
                            .expect("infinite class");
                        if (lowest as i64) + s < 1 {
                            return Err(Error::invariant(format!(
                                "rule sends {lowest} to {} which is not a natural",
                                lowest as i64 + s
                            )));
                        }
                    }
                    Target::Point(_) => {}
                }
            }
        } else {
            let n = exceptions.len() as u64;
            if exceptions.keys().next_back().copied().unwrap_or(0) != n {
                return Err(Error::invariant("finite map must list sources 1..=m"));
            }
        }
        let m = NatMap {
            exceptions,
            rule,
            codomain,
            labels: Vec::new(),
        };
        if let Some(size) = codomain {
            if m.exceptions.values().any(|&b| b == 0 || b > size) {
                return Err(Error::invariant(format!("target outside 1..={size}")));
            }
            if let Some((_, ts)) = &m.rule {
                if ts.iter().any(|t| matches!(t, Target::Point(b) if *b > size)) {
                    return Err(Error::invariant(format!("target outside 1..={size}")));
                }
            }
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Self::new(BTreeMap::new(), Some((1, vec![Target::Shift(0)])), None).expect("identity")
    }

    pub fn constant(b: u64) -> Self {
        Self::new(BTreeMap::new(), Some((1, vec![Target::Point(b)])), Some(b)).expect("constant map")
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = labels;
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn codomain(&self) -> Option<u64> {
        self.codomain
    }

    pub fn is_total(&self) -> bool {
        self.rule.is_some()
    }

    pub fn domain_size(&self) -> Option<u64> {
        if self.rule.is_some() {
            None
        } else {
            Some(self.exceptions.len() as u64)
        }
    }

    pub fn apply(&self, n: u64) -> Option<u64> {
        if let Some(b) = self.exceptions.get(&n) {
            return Some(*b);
        }
        let (p, ts) = self.rule.as_ref()?;
        if n == 0 {
            return None;
        }
        Some(match ts[(n % p) as usize] {
            Target::Point(b) => b,
            Target::Shift(s) => (n as i64 + s) as u64,
        })
    }

    fn class(&self, r: u64) -> NormalForm {
        let (p, _) = self.rule.as_ref().expect("rule");
        NormalForm::progression(r, *p)
    }

    fn exception_set(&self) -> NormalForm {
        NormalForm::finite(&self.exceptions.keys().copied().collect::<Vec<_>>())
    }

    pub fn image(&self) -> NormalForm {
        let vals: Vec<u64> = self.exceptions.values().copied().collect();
        let mut img = NormalForm::finite(&vals);
        if let Some((p, ts)) = &self.rule {
            let exc = self.exception_set();
            for (r, t) in ts.iter().enumerate() {
                let cls = self.class(r as u64).difference(&exc);
                if cls.is_empty() {
                    continue;
                }
                img = match *t {
                    Target::Point(b) => img.union(&NormalForm::finite(&[b])),
                    Target::Shift(s) => img.union(&cls.shift(s)),
                };
            }
            let _ = p;
        }
        img
    }

    pub fn is_surjective(&self) -> bool {
        let target = match self.codomain {
            Some(m) => NormalForm::interval(1, Some(m)),
            None => NormalForm::full(),
        };
        target.difference(&self.image()).is_empty()
    }

    /// `φ⁻¹(G)`, always representable for this map class.
    pub fn preimage(&self, g: &SetExpr) -> SetExpr {
        SetExpr::from_normal_form(&self.preimage_nf(g.nf()))
    }

    pub fn preimage_nf(&self, g: &NormalForm) -> NormalForm {
        let mut pre = NormalForm::empty();
        if let Some((_, ts)) = &self.rule {
            for (r, t) in ts.iter().enumerate() {
                let cls = self.class(r as u64);
                let part = match *t {
                    Target::Point(b) if g.contains(b) => cls,
                    Target::Point(_) => continue,
                    Target::Shift(s) => cls.intersection(&g.shift(-s)),
                };
                pre = pre.union(&part);
            }
        }
        let hit: Vec<u64> = self
            .exceptions
            .iter()
            .filter(|(_, b)| g.contains(**b))
            .map(|(a, _)| *a)
            .collect();
        pre.difference(&self.exception_set())
            .union(&NormalForm::finite(&hit))
    }
}

pub(super) fn pushforward(m: &Measure, phi: &NatMap) -> Result<Measure> {
    let mut atoms: BTreeMap<u64, Rational> = BTreeMap::new();
    let mut tails: Vec<GeometricTail> = Vec::new();
    let mut diffuse: Vec<(Rational, UltrafilterBase)> = Vec::new();
    let add = |atoms: &mut BTreeMap<u64, Rational>, k: u64, w: Rational| {
        *atoms.entry(k).or_insert_with(Rational::zero) += w;
    };
    for (k, w) in m.atoms() {
        let b = phi.apply(*k).ok_or_else(|| {
            Error::NonMeasurableMap(format!("point {k} carries mass but lies outside the map's domain"))
        })?;
        add(&mut atoms, b, w.clone());
    }
    let Some((p, ts)) = &phi.rule else {
        if !m.tails().is_empty() || !m.diffuse().is_empty() {
            return Err(Error::NonMeasurableMap(
                "a map with finite domain cannot carry infinite-support mass".into(),
            ));
        }
        return Measure::from_parts(atoms, Vec::new(), Vec::new());
    };
    let level = phi.exceptions.keys().next_back().copied().unwrap_or(0);
    for t in m.tails() {
        let (pts, rest) = t.split_at(level);
        for (k, w) in pts {
            let b = phi.apply(k).expect("total map");
            add(&mut atoms, b, w);
        }
        for (r, target) in ts.iter().enumerate() {
            let Some(piece) = rest.restrict_to_class(*p, r as u64) else {
                continue;
            };
            match *target {
                Target::Point(b) => add(&mut atoms, b, piece.total()),
                Target::Shift(s) => tails.push(piece.shifted(s)),
            }
        }
    }
    for d in m.diffuse() {
        let core = d.base.core();
        let mut constant = NormalForm::empty();
        let mut shifted = NormalForm::empty();
        for (r, target) in ts.iter().enumerate() {
            let cls = NormalForm::progression(r as u64, *p);
            match target {
                Target::Point(_) => constant = constant.union(&cls),
                Target::Shift(s) => shifted = shifted.union(&core.nf().intersection(&cls).shift(*s)),
            }
        }
        let undecided = || Error::UndeterminedByBase {
            set: SetExpr::from_normal_form(&constant).to_string(),
            base: d.base.to_string(),
        };
        let on_constant = d.base.decide(&SetExpr::from_normal_form(&constant)).ok_or_else(undecided)?;
        if on_constant {
            let mut hit = None;
            let targets: std::collections::BTreeSet<u64> = ts
                .iter()
                .filter_map(|t| match t {
                    Target::Point(b) => Some(*b),
                    Target::Shift(_) => None,
                })
                .collect();
            for b in targets {
                let mut cls = NormalForm::empty();
                for (r, t) in ts.iter().enumerate() {
                    if *t == Target::Point(b) {
                        cls = cls.union(&NormalForm::progression(r as u64, *p));
                    }
                }
                let set = SetExpr::from_normal_form(&cls);
                if d.base.decide_or_err(&set)? {
                    hit = Some(b);
                    break;
                }
            }
            let b = hit.expect("constant classes partition a decided set");
            add(&mut atoms, b, d.weight.clone());
        } else {
            let base = UltrafilterBase::generated_by(SetExpr::from_normal_form(&shifted))?;
            diffuse.push((d.weight.clone(), base));
        }
    }
    Measure::from_parts(atoms, tails, diffuse)
}

impl NatMap {
    /// Parses `map{1->a, 2->3}`, `rule(period=2, [even->x, odd->n+1], exceptions{1->z})`
    /// or `id`. Targets are naturals, `n`, `n+K`, `n-K`, or labels; labels are
    /// looked up in `labels` when given, else numbered in order of appearance.
    pub fn parse(src: &str, labels: Option<&[String]>) -> Result<Self> {
        let mut cur = Cursor::new(src, "action map");
        let mut names: Vec<String> = labels.map(|l| l.to_vec()).unwrap_or_default();
        let fixed = labels.is_some();
        let word = cur.ident().ok_or_else(|| cur.error("expected `map`, `rule` or `id`"))?;
        let map = match word {
            "id" => NatMap::identity(),
            "map" => {
                let table = parse_table(&mut cur, &mut names, fixed, false)?;
                let exceptions = table
                    .into_iter()
                    .map(|(a, t)| match t {
                        Target::Point(b) => Ok((a, b)),
                        Target::Shift(_) => Err(cur.error("`n` targets need a rule")),
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?;
                let codomain = codomain_for(&names, &exceptions, None);
                NatMap::new(exceptions, None, codomain)?
            }
            "rule" => {
                cur.expect('(')?;
                cur.expect_str("period")?;
                cur.expect('=')?;
                let p = cur.nat()?;
                if p == 0 {
                    return Err(cur.error("period must be positive"));
                }
                cur.expect(',')?;
                let residues = parse_table(&mut cur, &mut names, fixed, p == 2)?;
                let mut targets = vec![None; p as usize];
                for (r, t) in residues {
                    if r >= p {
                        return Err(cur.error(format!("residue {r} out of range for period {p}")));
                    }
                    targets[r as usize] = Some(t);
                }
                let Some(targets) = targets.into_iter().collect::<Option<Vec<_>>>() else {
                    return Err(cur.error("every residue needs a target"));
                };
                let mut exceptions = BTreeMap::new();
                if cur.eat(',') {
                    cur.expect_str("exceptions")?;
                    for (a, t) in parse_table(&mut cur, &mut names, fixed, false)? {
                        match t {
                            Target::Point(b) => exceptions.insert(a, b),
                            Target::Shift(_) => return Err(cur.error("exceptions need fixed targets")),
                        };
                    }
                }
                cur.expect(')')?;
                let codomain = codomain_for(&names, &exceptions, Some(&targets));
                NatMap::new(exceptions, Some((p, targets)), codomain)?
            }
            other => return Err(cur.error(format!("unknown map form `{other}`"))),
        };
        cur.finish()?;
        Ok(map.with_labels(names))
    }
}

fn codomain_for(names: &[String], exc: &BTreeMap<u64, u64>, rule: Option<&[Target]>) -> Option<u64> {
    if rule.is_some_and(|ts| ts.iter().any(|t| matches!(t, Target::Shift(_)))) {
        return None;
    }
    let mut m = names.len() as u64;
    m = m.max(exc.values().copied().max().unwrap_or(0));
    if let Some(ts) = rule {
        for t in ts {
            if let Target::Point(b) = t {
                m = m.max(*b);
            }
        }
    }
    Some(m)
}

fn parse_table(
    cur: &mut Cursor<'_>,
    names: &mut Vec<String>,
    fixed: bool,
    parity: bool,
) -> Result<Vec<(u64, Target)>> {
    let (open, close) = if cur.peek() == Some('[') { ('[', ']') } else { ('{', '}') };
    cur.expect(open)?;
    let mut out = Vec::new();
    if cur.eat(close) {
        return Ok(out);
    }
    loop {
        let src = match cur.peek_ident() {
            Some("even") if parity => {
                cur.ident();
                0
            }
            Some("odd") if parity => {
                cur.ident();
                1
            }
            _ => cur.nat()?,
        };
        cur.expect_str("->")?;
        let target = if let Some(id) = cur.peek_ident() {
            cur.ident();
            if id == "n" {
                if cur.eat('+') {
                    Target::Shift(cur.nat()? as i64)
                } else if cur.eat('-') {
                    Target::Shift(-(cur.nat()? as i64))
                } else {
                    Target::Shift(0)
                }
            } else if let Some(i) = names.iter().position(|x| x == id) {
                Target::Point(i as u64 + 1)
            } else if fixed {
                return Err(cur.error(format!("unknown target label `{id}`")));
            } else {
                names.push(id.to_string());
                Target::Point(names.len() as u64)
            }
        } else {
            Target::Point(cur.nat()?)
        };
        out.push((src, target));
        if cur.eat(close) {
            break;
        }
        cur.expect(',')?;
    }
    Ok(out)
}

impl fmt::Display for NatMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |b: u64| {
            self.labels
                .get(b as usize - 1)
                .cloned()
                .unwrap_or_else(|| b.to_string())
        };
        let tgt = |t: &Target| match *t {
            Target::Point(b) => name(b),
            Target::Shift(0) => "n".to_string(),
            Target::Shift(s) if s > 0 => format!("n+{s}"),
            Target::Shift(s) => format!("n-{}", -s),
        };
        let exc: Vec<String> = self
            .exceptions
            .iter()
            .map(|(a, b)| format!("{a}->{}", name(*b)))
            .collect();
        match &self.rule {
            None => write!(f, "map{{{}}}", exc.join(", ")),
            Some((p, ts)) => {
                let items: Vec<String> =
                    ts.iter().enumerate().map(|(r, t)| format!("{r}->{}", tgt(t))).collect();
                write!(f, "rule(period={p}, [{}]", items.join(", "))?;
                if !exc.is_empty() {
                    write!(f, ", exceptions{{{}}}", exc.join(", "))?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charges::tests::{arb_charge, arb_decided_set, uf};
    use crate::charges::{convex_combine, pushforward_charge, Charge};
    use crate::rational::q;
    use proptest::prelude::*;

    #[test]
    fn spec_examples() {
        let g = Charge::geometric(1, q(1, 2));
        let id = NatMap::identity();
        assert!(pushforward_charge(&g, &id).unwrap().same_as(&g));

        let k = convex_combine(&[(q(1, 2), g.clone()), (q(1, 2), uf("evens"))]).unwrap();
        let one = NatMap::parse("rule(period=1, [0->pt])", None).unwrap();
        let img = pushforward_charge(&k, &one).unwrap();
        assert!(img.same_as(&Charge::dirac(1)));

        let parity = NatMap::parse("rule(period=2, [even->e, odd->o])", None).unwrap();
        let img = pushforward_charge(&g, &parity).unwrap();
        assert_eq!(img.point_mass(1), q(1, 3));
        assert_eq!(img.point_mass(2), q(2, 3));
        assert_eq!(parity.labels(), ["e".to_string(), "o".to_string()]);
    }

    #[test]
    fn diffuse_images() {
        let parity = NatMap::parse("rule(period=2, [even->x, odd->y])", None).unwrap();
        let img = pushforward_charge(&uf("evens"), &parity).unwrap();
        assert!(img.same_as(&Charge::dirac(1)));
        let undecided = pushforward_charge(&uf("int(1,)"), &parity);
        assert!(matches!(undecided, Err(Error::UndeterminedByBase { .. })));
        let shift = NatMap::parse("rule(period=1, [0->n+1])", None).unwrap();
        assert!(!shift.is_surjective());
        assert!(NatMap::identity().is_surjective());
    }

    #[test]
    fn collapse_one_and_infinity() {
        let m = NatMap::parse("rule(period=1, [0->n-1], exceptions{1->1})", None).unwrap();
        assert_eq!(m.apply(1), Some(1));
        assert_eq!(m.apply(2), Some(1));
        assert_eq!(m.apply(7), Some(6));
        let pre = m.preimage(&SetExpr::finite([1]));
        assert!(pre.same_set(&SetExpr::finite([1, 2])));
    }

    #[test]
    fn finite_maps() {
        let m = NatMap::parse("map{1->a, 2->a, 3->b}", None).unwrap();
        assert_eq!(m.codomain(), Some(2));
        let k = Charge::from_mixed(&[q(1, 4), q(1, 4), q(1, 2)]).unwrap();
        let img = pushforward_charge(&k, &m).unwrap();
        assert_eq!(img.point_mass(1), q(1, 2));
        assert!(matches!(
            pushforward_charge(&Charge::geometric(1, q(1, 2)), &m),
            Err(Error::NonMeasurableMap(_))
        ));
        assert!(NatMap::parse("map{1->a, 3->b}", None).is_err());
        let partial = NatMap::parse("map{1->a}", Some(&["a".into(), "b".into()])).unwrap();
        assert!(!partial.is_surjective());
        assert!(NatMap::parse("map{1->c}", Some(&["a".into(), "b".into()])).is_err());
    }

    #[test]
    fn display_roundtrip() {
        for s in ["map{1->1, 2->1, 3->2}", "rule(period=2, [0->1, 1->n+3], exceptions{1->2})"] {
            let m = NatMap::parse(s, None).unwrap();
            let again = NatMap::parse(&m.to_string(), None).unwrap();
            for n in 1..20 {
                assert_eq!(m.apply(n), again.apply(n));
            }
        }
    }

    fn arb_map() -> impl Strategy<Value = NatMap> {
        let target = prop_oneof![(1u64..5).prop_map(Target::Point), (0i64..4).prop_map(Target::Shift)];
        (1u64..4, proptest::collection::vec(target, 4), proptest::collection::btree_map(1u64..6, 1u64..8, 0..3))
            .prop_map(|(p, ts, exc)| {
                let mut ts: Vec<Target> = ts.into_iter().take(p as usize).collect();
                ts[0] = Target::Shift(0);
                NatMap::new(exc, Some((p, ts)), None).unwrap()
            })
    }

    proptest! {
        #[test]
        fn preimage_is_pointwise(m in arb_map(), g in arb_decided_set()) {
            let pre = m.preimage(&g);
            for n in 1..60 {
                prop_assert_eq!(pre.contains(n), g.contains(m.apply(n).unwrap()));
            }
        }

        #[test]
        fn pushforward_matches_preimage(k in arb_charge(), m in arb_map(), g in arb_decided_set()) {
            if let Ok(img) = k.pushforward(&m) {
                prop_assert_eq!(img.total(), Rational::one());
                if let (Ok(a), Ok(b)) = (img.eval(&g), k.eval(&m.preimage(&g))) {
                    prop_assert_eq!(a, b);
                }
            }
        }

        #[test]
        fn pushforward_composes(k in arb_charge(), m1 in arb_map(), m2 in arb_map(), g in arb_decided_set()) {
            if let Ok(a) = k.pushforward(&m1) {
                if let Ok(b) = a.pushforward(&m2) {
                    let pre = m1.preimage(&m2.preimage(&g));
                    if let (Ok(x), Ok(y)) = (b.eval(&g), k.eval(&pre)) {
                        prop_assert_eq!(x, y);
                    }
                }
            }
        }

        #[test]
        fn pushforward_is_linear(a in arb_charge(), b in arb_charge(), m in arb_map(), g in arb_decided_set()) {
            let w = q(1, 3);
            let mix = convex_combine(&[(w.clone(), a.clone()), (Rational::one() - &w, b.clone())]).unwrap();
            if let (Ok(pa), Ok(pb), Ok(pm)) = (a.pushforward(&m), b.pushforward(&m), mix.pushforward(&m)) {
                let lhs = pm.eval(&g);
                if let (Ok(x), Ok(y), Ok(z)) = (pa.eval(&g), pb.eval(&g), lhs) {
                    prop_assert_eq!(z, &w * x + (Rational::one() - &w) * y);
                }
            }
        }
    }
}
