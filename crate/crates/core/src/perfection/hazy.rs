//! Best responses in the hazy filter game and the filter-side deciders.

use crate::charges::{Charge, UltrafilterBase};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sets::SetExpr;

/// `p_k = (2k + 1)/(k² + 3k + 1)`: at this weight on U, actions `k` and
/// `k + 1` tie for player 2.
pub fn br_threshold(k: u64) -> Rational {
    assert!(k >= 2, "thresholds start at k = 2");
    Rational::from(2 * k + 1) / Rational::from(k * k + 3 * k + 1)
}

/// `U^k = (1/k)(p − (1 − p)/k)`, player 2's payoff from `k ≥ 2` when player 1
/// puts `p` on U; 0 for `k = 1`.
pub fn hazy_payoff(p: &Rational, k: u64) -> Rational {
    if k < 2 {
        return Rational::zero();
    }
    let kk = Rational::from(k);
    (p - (Rational::one() - p) / &kk) / kk
}

/// Player 2's pure best responses against weight `p ∈ (0,1)` on U.
///
/// `U^k < p/k`, so once `p/k` drops to the best value found no later action
/// can reach it.
pub fn br_region(p: &Rational) -> Result<Vec<u64>> {
    if !p.is_positive() || *p >= 1 {
        return Err(Error::MassOutOfRange(p.clone()));
    }
    let mut best = Rational::zero();
    let mut arg: Vec<u64> = Vec::new();
    let mut k = 2u64;
    loop {
        let v = hazy_payoff(p, k);
        if v > best {
            best = v;
            arg = vec![k];
        } else if v == best && best.is_positive() {
            arg.push(k);
        }
        if best.is_positive() && p / Rational::from(k) <= best {
            return Ok(arg);
        }
        k += 1;
    }
}

#[derive(Clone, Debug)]
pub enum Haziness {
    Hazy,
    /// A partition of ℕ whose three cells all get positive mass.
    NotHazy([SetExpr; 3]),
    Undetermined,
}

/// Whether a diffuse charge is a mixture of at most two ultrafilters.
///
/// Components whose bases force the same sets are taken to be one
/// ultrafilter. Components with infinitely overlapping cores must fall in
/// one cell of any decided partition, so three linked groups give a witness
/// and fewer leave the answer open.
pub fn hazy_filter_test(kappa: &Charge) -> Result<Haziness> {
    let ca = kappa.ca_mass();
    if !ca.is_zero() {
        return Err(Error::NotDiffuse(ca));
    }
    let mut comps: Vec<&UltrafilterBase> = Vec::new();
    for d in kappa.diffuse() {
        if d.weight.is_positive() && !comps.iter().any(|b| b.equivalent(&d.base)) {
            comps.push(&d.base);
        }
    }
    if comps.len() <= 2 {
        return Ok(Haziness::Hazy);
    }
    let n = comps.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn root(g: &mut [usize], mut i: usize) -> usize {
        while g[i] != i {
            g[i] = g[g[i]];
            i = g[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if comps[i].core().intersection(comps[j].core()).is_infinite() {
                let (a, b) = (root(&mut group, i), root(&mut group, j));
                group[a] = b;
            }
        }
    }
    let mut unions: Vec<(usize, SetExpr)> = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        let r = root(&mut group, i);
        match unions.iter_mut().find(|(g, _)| *g == r) {
            Some((_, u)) => *u = u.union(c.core()),
            None => unions.push((r, c.core().clone())),
        }
    }
    if unions.len() < 3 {
        return Ok(Haziness::Undetermined);
    }
    let e1 = unions[0].1.clone();
    let e2 = unions[1].1.difference(&e1);
    let e3 = e1.union(&e2).complement();
    Ok(Haziness::NotHazy([e1, e2, e3]))
}

#[derive(Clone, Debug)]
pub enum Twinship {
    Twins,
    /// Forced sets with no window `{k, k+1}` meeting both.
    NotTwins(SetExpr, SetExpr),
}

/// Twins test on the sets the bases force.
///
/// Sets forced by a base are, up to finite sets, supersets of its core, so
/// the condition holds for all of them exactly when infinitely many windows
/// meet both cores.
pub fn twins_test(a: &UltrafilterBase, b: &UltrafilterBase) -> Twinship {
    let reach = |c: &SetExpr| c.union(&c.shift(-1));
    let windows = reach(a.core()).intersection(&reach(b.core()));
    if windows.is_infinite() {
        return Twinship::Twins;
    }
    let cut = windows.nf().max_element().unwrap_or(0) + 1;
    let head = SetExpr::interval(1, cut);
    Twinship::NotTwins(a.core().difference(&head), b.core().difference(&head))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charges::convex_combine;
    use crate::charges::tests::uf;
    use crate::rational::q;
    use proptest::prelude::*;

    #[test]
    fn thresholds() {
        assert_eq!(br_threshold(2), q(5, 11));
        assert_eq!(br_threshold(3), q(7, 19));
        assert_eq!(br_region(&q(5, 11)).unwrap(), vec![2, 3]);
        assert_eq!(hazy_payoff(&q(5, 11), 2), q(1, 11));
        assert_eq!(hazy_payoff(&q(5, 11), 3), q(1, 11));
        assert_eq!(br_region(&q(2, 5)).unwrap(), vec![3]);
        assert_eq!(br_region(&q(9, 10)).unwrap(), vec![2]);
        assert!(br_region(&q(0, 1)).is_err());
        for k in 2..=120u64 {
            assert!(br_threshold(k) > br_threshold(k + 1));
            assert_eq!(br_region(&br_threshold(k)).unwrap(), vec![k, k + 1]);
        }
    }

    fn third(a: &str, b: &str, c: &str) -> Charge {
        convex_combine(&[(q(1, 3), uf(a)), (q(1, 3), uf(b)), (q(1, 3), uf(c))]).unwrap()
    }

    #[test]
    fn hazy_examples() {
        let two = convex_combine(&[(q(1, 2), uf("evens")), (q(1, 2), uf("odds"))]).unwrap();
        assert!(matches!(hazy_filter_test(&two).unwrap(), Haziness::Hazy));
        assert!(matches!(hazy_filter_test(&uf("ap(1,5)")).unwrap(), Haziness::Hazy));
        let three = third("ap(0,3)", "ap(1,3)", "ap(2,3)");
        match hazy_filter_test(&three).unwrap() {
            Haziness::NotHazy(cells) => {
                assert!(crate::perfection::check_partition(&cells).is_ok());
                for c in &cells {
                    assert_eq!(three.eval(c).unwrap(), q(1, 3));
                }
            }
            h => panic!("{h:?}"),
        }
        assert!(matches!(
            hazy_filter_test(&third("evens", "ap(0,4)", "odds")).unwrap(),
            Haziness::Undetermined
        ));
        assert!(matches!(
            hazy_filter_test(&convex_combine(&[(q(1, 2), uf("evens")), (q(1, 2), Charge::dirac(1))]).unwrap()),
            Err(Error::NotDiffuse(_))
        ));
    }

    fn base(s: &str) -> UltrafilterBase {
        UltrafilterBase::generated_by(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn twins_examples() {
        assert!(matches!(twins_test(&base("evens"), &base("odds")), Twinship::Twins));
        assert!(matches!(twins_test(&base("ap(1,3)"), &base("ap(1,3)")), Twinship::Twins));
        match twins_test(&base("ap(0,4)"), &base("ap(2,4)")) {
            Twinship::NotTwins(x, y) => {
                assert!(x.same_set(&"ap(0,4)".parse().unwrap()));
                assert!(y.same_set(&"ap(2,4)".parse().unwrap()));
            }
            t => panic!("{t:?}"),
        }
        match twins_test(&base("ap(0,4) | {1}"), &base("ap(2,4) | {2}")) {
            Twinship::NotTwins(x, y) => {
                for k in 1..200 {
                    assert!(!((x.contains(k) || x.contains(k + 1)) && (y.contains(k) || y.contains(k + 1))));
                }
            }
            t => panic!("{t:?}"),
        }
    }

    fn mask_set(mask: u16) -> SetExpr {
        let mut e = SetExpr::empty();
        for r in 0..12 {
            if mask >> r & 1 == 1 {
                e = e.union(&SetExpr::ap(r, 12));
            }
        }
        e
    }

    /// Searches every 3-colouring of the residues mod 12 for a partition on
    /// which each component is decided and three cells are positive.
    fn oracle_not_hazy(masks: &[u16]) -> bool {
        let mut colour = [0u8; 12];
        loop {
            let mut classes = [0u16; 3];
            for (r, c) in colour.iter().enumerate() {
                classes[*c as usize] |= 1 << r;
            }
            let mut hit = [false; 3];
            let decided = masks.iter().all(|m| match (0..3).find(|&c| m & !classes[c] == 0) {
                Some(c) => {
                    hit[c] = true;
                    true
                }
                None => false,
            });
            if decided && hit.iter().all(|h| *h) {
                return true;
            }
            let mut i = 0;
            while i < 12 {
                colour[i] += 1;
                if colour[i] < 3 {
                    break;
                }
                colour[i] = 0;
                i += 1;
            }
            if i == 12 {
                return false;
            }
        }
    }

    fn oracle_twins(a: u16, b: u16) -> bool {
        let reach = |m: u16| m | (m >> 1) | ((m & 1) << 11);
        reach(a) & reach(b) != 0
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hazy_matches_oracle(masks in proptest::collection::vec(1u16..4096, 1..5), ws in proptest::collection::vec(1i64..4, 4)) {
            let mut masks = masks;
            masks.sort_unstable();
            masks.dedup();
            let total: i64 = ws.iter().take(masks.len()).sum();
            let parts: Vec<(Rational, Charge)> = masks.iter().zip(&ws)
                .map(|(m, w)| (Rational::new(*w, total), Charge::ultrafilter_on(mask_set(*m)).unwrap()))
                .collect();
            let kappa = convex_combine(&parts).unwrap();
            let found = oracle_not_hazy(&masks);
            match hazy_filter_test(&kappa).unwrap() {
                Haziness::Hazy => prop_assert!(!found && masks.len() <= 2),
                Haziness::NotHazy(cells) => {
                    prop_assert!(found);
                    for c in &cells {
                        prop_assert!(kappa.eval(c).unwrap().is_positive());
                    }
                }
                Haziness::Undetermined => prop_assert!(!found),
            }
        }

        #[test]
        fn twins_match_oracle(a in 1u16..4096, b in 1u16..4096) {
            let t = twins_test(
                &UltrafilterBase::generated_by(mask_set(a)).unwrap(),
                &UltrafilterBase::generated_by(mask_set(b)).unwrap(),
            );
            prop_assert_eq!(matches!(t, Twinship::Twins), oracle_twins(a, b));
        }
    }
}
