use crate::charges::{Charge, GeometricTail, Measure};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A full-support charge against which, in the variant Wald game, the
/// opponent's pure best responses are exactly `ks`.
///
/// With `P(k)` the mass below `k`, action `k` earns `P(k)/k`. Weights are 1
/// below `K_1`; between `K_m` and `K_{m+1} = K_m + ℓ` they are `τ` repeated
/// `ℓ − 1` times then `(ℓ + 1)τ` with `τ = P(K_m)/(2K_m)`, which keeps
/// `P(k)/k` level at the `K`s and strictly lower in between. From `K_M` on
/// the weights are `P(K_M)/(2K_M) · 2^(−k)`. The whole measure is then
/// divided by its total, which rescales every payoff alike.
pub fn wald_mixer(ks: &[u64]) -> Result<Charge> {
    let Some(&first) = ks.first() else {
        return Err(Error::InvalidK("empty list".into()));
    };
    if first <= 1 {
        return Err(Error::InvalidK(format!("K_1 = {first} must exceed 1")));
    }
    if let Some(w) = ks.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidK(format!("{} is not below {}", w[0], w[1])));
    }
    let mut atoms: Vec<(u64, Rational)> = (1..first).map(|k| (k, Rational::one())).collect();
    let mut below = Rational::from(first - 1);
    for w in ks.windows(2) {
        let (km, next) = (w[0], w[1]);
        let ell = next - km;
        let tau = &below / Rational::from(2 * km);
        for k in km..next - 1 {
            atoms.push((k, tau.clone()));
        }
        atoms.push((next - 1, &tau * Rational::from(ell + 1)));
        below += &tau * Rational::from(2 * ell);
    }
    let last = *ks.last().expect("non-empty");
    let coeff = &below / Rational::from(2 * last);
    let tail = GeometricTail::new(last, coeff, Rational::new(1, 2));
    let raw = Measure::from_parts(atoms, vec![tail], Vec::new())?;
    let total = raw.total();
    Charge::new(raw.scaled(&total.recip()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::{pure_action_payoff, ChargeProfile, PayoffSpec, VariantWald};
    use crate::rational::q;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    /// Exact argmax of `P(k)/k` over `k ≤ h`, summing point masses one by one.
    pub(crate) fn argmax_oracle(sigma: &Charge, h: u64) -> Vec<u64> {
        let mut below = Rational::zero();
        let mut best = Rational::zero();
        let mut arg = Vec::new();
        for k in 1..=h {
            let v = &below / Rational::from(k);
            if v > best {
                best = v;
                arg = vec![k];
            } else if v == best && !best.is_zero() {
                arg.push(k);
            }
            below += sigma.point_mass(k);
        }
        arg
    }

    #[test]
    fn rejects_bad_lists() {
        for ks in [vec![], vec![1, 3], vec![3, 3], vec![4, 2]] {
            assert!(matches!(wald_mixer(&ks), Err(Error::InvalidK(_))), "{ks:?}");
        }
    }

    #[test]
    fn small_lists_match_oracle() {
        for ks in [vec![2], vec![2, 3], vec![3, 7, 8, 20], vec![5, 6, 7]] {
            let s = wald_mixer(&ks).unwrap();
            assert_eq!(argmax_oracle(&s, 2000), ks);
            for k in 1..60 {
                assert!(s.point_mass(k).is_positive());
            }
        }
    }

    #[test]
    fn tie_is_exact_through_integration() {
        let s = wald_mixer(&[2, 3]).unwrap();
        let spec = PayoffSpec::UniformLimit(Arc::new(VariantWald::new(1)));
        let p = ChargeProfile::new(vec![s, Charge::dirac(1)]);
        let at = |k| pure_action_payoff(&spec, 1, k, &p, &q(1, 1_000_000)).unwrap();
        let (a, b) = (at(2), at(3));
        assert!(a.is_exact() && b.is_exact());
        assert_eq!(a.lower, b.lower);
        assert!(at(4).upper < a.lower);
    }

    #[test]
    fn random_lists_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let mut ks: Vec<u64> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(2..=50)).collect();
            ks.sort_unstable();
            ks.dedup();
            assert_eq!(argmax_oracle(&wald_mixer(&ks).unwrap(), 3000), ks);
        }
    }
}
