//! Expectations of payoff functions on products of countable action sets.
//!
//! A simple function is stored as a finite partition of `ℕ^n` into
//! rectangles, each carrying a value. Integrating against a profile of
//! charges multiplies coordinate masses cell by cell.

mod families;
mod payoff;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use families::{Example33, HazyFilterGame, VariantWald};
pub use payoff::{integrate_bracket, pure_action_payoff, Bracket, PayoffSpec, UniformLimit};

use crate::charges::{Charge, Measure};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sets::{NormalForm, SetExpr};

#[derive(Clone, Debug)]
pub struct Cell {
    pub rect: Vec<SetExpr>,
    pub value: Rational,
}

#[derive(Clone, Debug)]
pub struct SimpleFunction {
    arity: usize,
    cells: Vec<Cell>,
}

/// Atoms of the Boolean algebra generated by `sets`, dropping empty ones.
pub(crate) fn refine(sets: &[&SetExpr]) -> Vec<SetExpr> {
    let mut atoms = vec![SetExpr::naturals()];
    for s in sets {
        let mut next = Vec::with_capacity(atoms.len() * 2);
        for a in &atoms {
            let inside = a.intersection(s);
            let outside = a.difference(s);
            if !inside.is_empty() {
                next.push(inside);
            }
            if !outside.is_empty() {
                next.push(outside);
            }
        }
        atoms = next;
    }
    atoms
}

fn for_each_index(counts: &[usize], mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if counts.contains(&0) {
        return Ok(());
    }
    let mut idx = vec![0; counts.len()];
    loop {
        f(&idx)?;
        let mut i = counts.len();
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < counts[i] {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Per-coordinate atoms and the function's value on every product of atoms.
pub struct ProductForm {
    pub atoms: Vec<Vec<SetExpr>>,
    pub values: BTreeMap<Vec<usize>, Rational>,
}

impl SimpleFunction {
    /// Cells must be pairwise disjoint and cover `ℕ^arity`.
    pub fn new(arity: usize, cells: Vec<Cell>) -> Result<Self> {
        let f = Self::unchecked(arity, cells)?;
        f.check_partition()?;
        Ok(f)
    }

    /// Builds from a partition known to be valid by construction.
    pub(crate) fn unchecked(arity: usize, cells: Vec<Cell>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ShapeMismatch("simple function needs at least one coordinate".into()));
        }
        if let Some(c) = cells.iter().find(|c| c.rect.len() != arity) {
            return Err(Error::ShapeMismatch(format!(
                "rectangle with {} coordinates in a function of arity {arity}",
                c.rect.len()
            )));
        }
        Ok(SimpleFunction { arity, cells })
    }

    /// `Σ c_ℓ · I_{R^ℓ}` with arbitrary, possibly overlapping rectangles.
    pub fn from_terms(arity: usize, terms: Vec<(Vec<SetExpr>, Rational)>) -> Result<Self> {
        let rough = Self::unchecked(
            arity,
            terms
                .into_iter()
                .map(|(rect, value)| Cell { rect, value })
                .collect(),
        )?;
        let atoms: Vec<Vec<SetExpr>> = (0..arity)
            .map(|i| refine(&rough.cells.iter().map(|c| &c.rect[i]).collect::<Vec<_>>()))
            .collect();
        let counts: Vec<usize> = atoms.iter().map(Vec::len).collect();
        let mut cells = Vec::new();
        for_each_index(&counts, |idx| {
            let rect: Vec<SetExpr> = idx.iter().enumerate().map(|(i, &j)| atoms[i][j].clone()).collect();
            let value = rough
                .cells
                .iter()
                .filter(|c| c.rect.iter().zip(&rect).all(|(r, a)| a.is_subset(r)))
                .map(|c| c.value.clone())
                .sum();
            cells.push(Cell { rect, value });
            Ok(())
        })?;
        Self::unchecked(arity, cells)
    }

    pub fn constant(arity: usize, value: Rational) -> Self {
        SimpleFunction {
            arity,
            cells: vec![Cell {
                rect: vec![SetExpr::naturals(); arity],
                value,
            }],
        }
    }

    pub fn indicator(rect: Vec<SetExpr>) -> Result<Self> {
        let n = rect.len();
        Self::from_terms(n, vec![(rect, Rational::one())])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    fn check_partition(&self) -> Result<()> {
        for (a, ca) in self.cells.iter().enumerate() {
            for cb in &self.cells[a + 1..] {
                if ca.rect.iter().zip(&cb.rect).all(|(x, y)| !x.is_disjoint(y)) {
                    return Err(Error::invariant(format!(
                        "rectangles {} and {} overlap",
                        fmt_rect(&ca.rect),
                        fmt_rect(&cb.rect)
                    )));
                }
            }
        }
        let atoms: Vec<Vec<SetExpr>> = (0..self.arity)
            .map(|i| refine(&self.cells.iter().map(|c| &c.rect[i]).collect::<Vec<_>>()))
            .collect();
        let counts: Vec<usize> = atoms.iter().map(Vec::len).collect();
        for_each_index(&counts, |idx| {
            let covered = self.cells.iter().any(|c| {
                idx.iter()
                    .enumerate()
                    .all(|(i, &j)| atoms[i][j].is_subset(&c.rect[i]))
            });
            if covered {
                Ok(())
            } else {
                let hole: Vec<SetExpr> = idx.iter().enumerate().map(|(i, &j)| atoms[i][j].clone()).collect();
                Err(Error::invariant(format!("rectangles leave {} uncovered", fmt_rect(&hole))))
            }
        })
    }

    pub fn evaluate(&self, point: &[u64]) -> Rational {
        self.cells
            .iter()
            .find(|c| c.rect.iter().zip(point).all(|(s, &x)| s.contains(x)))
            .map_or_else(Rational::zero, |c| c.value.clone())
    }

    pub fn product_form(&self) -> ProductForm {
        let atoms: Vec<Vec<SetExpr>> = (0..self.arity)
            .map(|i| refine(&self.cells.iter().map(|c| &c.rect[i]).collect::<Vec<_>>()))
            .collect();
        let counts: Vec<usize> = atoms.iter().map(Vec::len).collect();
        let mut values = BTreeMap::new();
        for_each_index(&counts, |idx| {
            let point: Vec<u64> = idx
                .iter()
                .enumerate()
                .map(|(i, &j)| atoms[i][j].nf().min_element().expect("atoms are non-empty"))
                .collect();
            values.insert(idx.to_vec(), self.evaluate(&point));
            Ok(())
        })
        .expect("infallible");
        ProductForm { atoms, values }
    }

    /// Cells with a non-zero value.
    pub fn nonzero_cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.value.is_zero())
    }

    pub fn scaled(&self, w: &Rational) -> Self {
        SimpleFunction {
            arity: self.arity,
            cells: self
                .cells
                .iter()
                .map(|c| Cell {
                    rect: c.rect.clone(),
                    value: &c.value * w,
                })
                .collect(),
        }
    }

    /// Pointwise `self − other`, on the common refinement.
    pub fn minus(&self, other: &SimpleFunction) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch(format!("{} vs {}", self.arity, other.arity)));
        }
        let mut terms: Vec<(Vec<SetExpr>, Rational)> =
            self.cells.iter().map(|c| (c.rect.clone(), c.value.clone())).collect();
        terms.extend(other.cells.iter().map(|c| (c.rect.clone(), -c.value.clone())));
        Self::from_terms(self.arity, terms)
    }
}

fn fmt_rect(r: &[SetExpr]) -> String {
    let parts: Vec<String> = r.iter().map(|s| s.to_string()).collect();
    format!("[{}]", parts.join(" × "))
}

impl fmt::Display for SimpleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .cells
            .iter()
            .map(|c| format!("{}: {}", fmt_rect(&c.rect), c.value))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// One charge per player.
#[derive(Clone, Debug)]
pub struct ChargeProfile(Vec<Charge>);

impl ChargeProfile {
    pub fn new(charges: Vec<Charge>) -> Self {
        ChargeProfile(charges)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &Charge {
        &self.0[i]
    }

    pub fn charges(&self) -> &[Charge] {
        &self.0
    }

    pub fn with(&self, i: usize, kappa: Charge) -> Self {
        let mut v = self.0.clone();
        v[i] = kappa;
        ChargeProfile(v)
    }

    pub fn same_as(&self, other: &ChargeProfile) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.same_as(b))
    }
}

impl fmt::Display for ChargeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Charges separated by `;`.
impl FromStr for ChargeProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Vec::new();
        let mut offset = 0;
        for part in s.split(';') {
            let kappa = part.parse::<Charge>().map_err(|e| match e {
                Error::Parse {
                    context,
                    line,
                    column,
                    message,
                } => Error::Parse {
                    context,
                    line,
                    column: if line == 1 { column + offset } else { column },
                    message,
                },
                other => other,
            })?;
            out.push(kappa);
            offset += part.chars().count() + 1;
        }
        Ok(ChargeProfile(out))
    }
}

pub(crate) fn integrate_measures(measures: &[&Measure], f: &SimpleFunction) -> Result<Rational> {
    if measures.len() != f.arity {
        return Err(Error::ArityMismatch(format!(
            "function of arity {} against {} charges",
            f.arity,
            measures.len()
        )));
    }
    let mut total = Rational::zero();
    for c in f.nonzero_cells() {
        let mut w = c.value.clone();
        for (m, s) in measures.iter().zip(&c.rect) {
            if w.is_zero() {
                break;
            }
            w *= &m.eval(s)?;
        }
        total += w;
    }
    Ok(total)
}

/// `Σ_cells value · ∏ κ_i(R_i)`.
pub fn integrate_simple(profile: &ChargeProfile, f: &SimpleFunction) -> Result<Rational> {
    let ms: Vec<&Measure> = profile.0.iter().map(|k| k.measure()).collect();
    integrate_measures(&ms, f)
}

/// Integrates out the coordinates listed in `kappa_j`, leaving a simple
/// function of the remaining coordinates in increasing order.
pub fn partial_integrate(f: &SimpleFunction, kappa_j: &[(usize, Charge)]) -> Result<SimpleFunction> {
    let mut is_j = vec![None; f.arity];
    for (j, k) in kappa_j {
        if *j >= f.arity || is_j[*j].is_some() {
            return Err(Error::ArityMismatch(format!("coordinate {j} is out of range or repeated")));
        }
        is_j[*j] = Some(k);
    }
    let rest: Vec<usize> = (0..f.arity).filter(|i| is_j[*i].is_none()).collect();
    if rest.is_empty() {
        return Err(Error::ArityMismatch("nothing left after integrating every coordinate".into()));
    }
    let pf = f.product_form();
    let masses: Vec<Vec<Option<Rational>>> = pf
        .atoms
        .iter()
        .enumerate()
        .map(|(i, atoms)| match is_j[i] {
            Some(k) => atoms.iter().map(|a| k.eval(a).map(Some)).collect::<Result<Vec<_>>>(),
            None => Ok(vec![None; atoms.len()]),
        })
        .collect::<Result<_>>()?;
    let mut acc: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    for (idx, v) in &pf.values {
        let mut w = v.clone();
        for (i, &j) in idx.iter().enumerate() {
            if let Some(m) = &masses[i][j] {
                w *= m;
            }
        }
        let key: Vec<usize> = rest.iter().map(|&i| idx[i]).collect();
        *acc.entry(key).or_insert_with(Rational::zero) += w;
    }
    let cells = acc
        .into_iter()
        .map(|(key, value)| Cell {
            rect: key.iter().zip(&rest).map(|(&j, &i)| pf.atoms[i][j].clone()).collect(),
            value,
        })
        .collect();
    SimpleFunction::unchecked(rest.len(), cells)
}

/// Iterated integral over `I` of the partial integral over `J` equals the
/// product integral; `kappa_i` and `kappa_j` list coordinates and charges.
pub fn fubini_verify(f: &SimpleFunction, kappa_i: &[(usize, Charge)], kappa_j: &[(usize, Charge)]) -> Result<bool> {
    let inner = partial_integrate(f, kappa_j)?;
    let mut outer: Vec<(usize, Charge)> = kappa_i.to_vec();
    outer.sort_by_key(|p| p.0);
    let lhs = integrate_simple(&ChargeProfile(outer.iter().map(|p| p.1.clone()).collect()), &inner)?;
    let mut all: Vec<(usize, Charge)> = kappa_i.iter().chain(kappa_j).cloned().collect();
    all.sort_by_key(|p| p.0);
    if all.iter().enumerate().any(|(i, p)| p.0 != i) {
        return Err(Error::ArityMismatch("coordinates must split 0..arity".into()));
    }
    let rhs = integrate_simple(&ChargeProfile(all.into_iter().map(|p| p.1).collect()), f)?;
    Ok(lhs == rhs)
}

pub(crate) fn interval(lo: u64, hi: Option<u64>) -> SetExpr {
    SetExpr::from_normal_form(&NormalForm::interval(lo, hi))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::charges::tests::{arb_charge, uf};
    use crate::charges::convex_combine;
    use crate::rational::q;
    use proptest::prelude::*;

    fn set(s: &str) -> SetExpr {
        s.parse().unwrap()
    }

    fn k(s: &str) -> Charge {
        s.parse().unwrap()
    }

    #[test]
    fn integrate_examples() {
        let f = SimpleFunction::indicator(vec![set("{1}"), set("{2}")]).unwrap();
        let p = ChargeProfile::new(vec![Charge::dirac(1), Charge::dirac(2)]);
        assert_eq!(integrate_simple(&p, &f).unwrap(), q(1, 1));
        let g = SimpleFunction::indicator(vec![set("evens"), set("evens")]).unwrap();
        let p = ChargeProfile::new(vec![k("atoms{2:1/2,3:1/2}"), uf("evens")]);
        assert_eq!(integrate_simple(&p, &g).unwrap(), q(1, 2));
    }

    #[test]
    fn partition_checks() {
        let overlap = vec![
            Cell { rect: vec![set("nat")], value: q(1, 1) },
            Cell { rect: vec![set("evens")], value: q(1, 1) },
        ];
        assert!(SimpleFunction::new(1, overlap).is_err());
        let hole = vec![Cell { rect: vec![set("evens"), set("nat")], value: q(1, 1) }];
        assert!(SimpleFunction::new(2, hole).is_err());
        let ok = vec![
            Cell { rect: vec![set("evens"), set("nat")], value: q(1, 1) },
            Cell { rect: vec![set("odds"), set("{1}")], value: q(2, 1) },
            Cell { rect: vec![set("odds"), set("int(2,)")], value: q(3, 1) },
        ];
        let f = SimpleFunction::new(2, ok).unwrap();
        assert_eq!(f.evaluate(&[3, 1]), q(2, 1));
        assert_eq!(f.evaluate(&[3, 9]), q(3, 1));
    }

    #[test]
    fn partial_examples() {
        let f = SimpleFunction::indicator(vec![set("{1}"), set("evens")]).unwrap();
        let g = partial_integrate(&f, &[(1, uf("evens"))]).unwrap();
        assert_eq!(g.evaluate(&[1]), q(1, 1));
        assert_eq!(g.evaluate(&[2]), q(0, 1));
        let c = SimpleFunction::constant(2, q(7, 3));
        let g = partial_integrate(&c, &[(1, uf("odds"))]).unwrap();
        assert_eq!(g.evaluate(&[5]), q(7, 3));
        let e = SimpleFunction::indicator(vec![set("evens"), set("evens")]).unwrap();
        let g = partial_integrate(&e, &[(1, k("atoms{2:1/2,4:1/2}"))]).unwrap();
        assert_eq!(g.evaluate(&[6]), q(1, 1));
        assert_eq!(g.evaluate(&[5]), q(0, 1));
    }

    #[test]
    fn fubini_examples() {
        let f = SimpleFunction::indicator(vec![set("{1}"), set("{2}")]).unwrap();
        assert!(fubini_verify(&f, &[(0, Charge::dirac(1))], &[(1, Charge::dirac(2))]).unwrap());
        let e = SimpleFunction::indicator(vec![set("evens"), set("evens")]).unwrap();
        assert!(fubini_verify(&e, &[(0, k("atoms{2:1/2,3:1/2}"))], &[(1, uf("evens"))]).unwrap());
    }

    pub(crate) fn arb_decided_rect_set() -> impl Strategy<Value = SetExpr> {
        prop_oneof![
            (0u64..12, 1u64..=4).prop_map(|(a, d)| SetExpr::ap(a % (d * 3), d * 3)),
            (0u64..12, prop_oneof![Just(1u64), Just(2), Just(4), Just(6), Just(12)]).prop_map(|(a, d)| SetExpr::ap(a % d, d)),
            proptest::collection::vec(1u64..15, 1..4).prop_map(SetExpr::finite),
            (1u64..10).prop_map(SetExpr::from_lo),
        ]
    }

    pub(crate) fn arb_simple(arity: usize) -> impl Strategy<Value = SimpleFunction> {
        proptest::collection::vec(
            (proptest::collection::vec(arb_decided_rect_set(), arity), -4i64..=4),
            1..4,
        )
        .prop_map(move |terms| {
            SimpleFunction::from_terms(
                arity,
                terms.into_iter().map(|(r, c)| (r, Rational::int(c))).collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn from_terms_is_pointwise_sum(
            terms in proptest::collection::vec((proptest::collection::vec(arb_decided_rect_set(), 2), -3i64..=3), 1..4),
            a in 1u64..30, b in 1u64..30,
        ) {
            let terms: Vec<(Vec<SetExpr>, Rational)> = terms.into_iter().map(|(r, c)| (r, Rational::int(c))).collect();
            let f = SimpleFunction::from_terms(2, terms.clone()).unwrap();
            prop_assert!(f.check_partition().is_ok());
            let direct: Rational = terms.iter()
                .filter(|(r, _)| r[0].contains(a) && r[1].contains(b))
                .map(|(_, c)| c.clone()).sum();
            prop_assert_eq!(f.evaluate(&[a, b]), direct);
        }

        #[test]
        fn fubini_random(f in arb_simple(2), ki in arb_charge(), kj in arb_charge()) {
            match fubini_verify(&f, &[(0, ki)], &[(1, kj)]) {
                Ok(ok) => prop_assert!(ok),
                Err(Error::UndeterminedByBase { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }

        #[test]
        fn multilinear_in_each_coordinate(f in arb_simple(2), a in arb_charge(), b in arb_charge(), c in arb_charge(), w in 0i64..=5) {
            let w = Rational::new(w, 5);
            let mix = convex_combine(&[(w.clone(), a.clone()), (Rational::one() - &w, b.clone())]).unwrap();
            let lhs = integrate_simple(&ChargeProfile::new(vec![mix, c.clone()]), &f);
            let x = integrate_simple(&ChargeProfile::new(vec![a, c.clone()]), &f);
            let y = integrate_simple(&ChargeProfile::new(vec![b, c]), &f);
            if let (Ok(l), Ok(x), Ok(y)) = (lhs, x, y) {
                prop_assert_eq!(l, &w * x + (Rational::one() - &w) * y);
            }
        }
    }
}
