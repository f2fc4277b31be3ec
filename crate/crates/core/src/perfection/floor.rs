//! Strategy spaces with a floor: every strategy must dominate a fixed
//! subprobability `ζ`.

use crate::charges::{Charge, Measure};
use crate::error::{Error, Result};
use crate::integration::ChargeProfile;
use crate::rational::Rational;

use super::{best_response, BrOutcome, CountableGame};

/// `ζ = K·φ` with `φ` a charge and `0 < K < 1`, together with the bijection
/// `ψ ↦ (1 − K)ψ + Kφ` onto the charges above the floor.
#[derive(Clone, Debug)]
pub struct RestrictedIso {
    phi: Charge,
    k: Rational,
}

impl RestrictedIso {
    pub fn new(zeta: &Measure) -> Result<Self> {
        let k = zeta.total();
        if !k.is_positive() || k >= 1 {
            return Err(Error::MassOutOfRange(k));
        }
        let phi = Charge::new(zeta.scaled(&k.recip()))?;
        Ok(RestrictedIso { phi, k })
    }

    pub fn phi(&self) -> &Charge {
        &self.phi
    }

    pub fn k(&self) -> &Rational {
        &self.k
    }

    pub fn floor(&self) -> Measure {
        self.phi.scaled(&self.k)
    }

    pub fn forward(&self, psi: &Charge) -> Charge {
        let m = psi.scaled(&(Rational::one() - &self.k)).plus(&self.phi.scaled(&self.k));
        Charge::new(m).expect("convex combination of charges")
    }

    /// `ψ = (1 + λ)ρ − λφ` with `λ = K/(1 − K)`; fails when `ρ` is not above the floor.
    pub fn inverse(&self, rho: &Charge) -> Result<Charge> {
        let lambda = &self.k / (Rational::one() - &self.k);
        let up = rho.scaled(&(Rational::one() + &lambda));
        Charge::new(up.checked_sub(&self.phi.scaled(&lambda))?)
    }
}

pub fn restricted_iso(zeta: &Measure) -> Result<RestrictedIso> {
    RestrictedIso::new(zeta)
}

/// Sufficient condition for `ρ` to be Nash in the game with floors `ζ`:
/// every atom of the countably additive mass above the floor is a pure best
/// response to `ρ`, and the diffuse parts of `ρ` and `ζ` agree.
///
/// Mass above the floor on a geometric tail has infinitely many atoms to
/// check and is reported as inconclusive.
pub fn restricted_nash_sufficient(
    game: &CountableGame,
    zeta: &[Measure],
    rho: &ChargeProfile,
    br_horizon: u64,
    tol: &Rational,
) -> Result<bool> {
    if zeta.len() != rho.len() || rho.len() != game.players() {
        return Err(Error::ArityMismatch(format!(
            "{} floors and {} charges for a {}-player game",
            zeta.len(),
            rho.len(),
            game.players()
        )));
    }
    for (i, z) in zeta.iter().enumerate() {
        let r = rho.get(i);
        let above = r
            .ca_part()
            .checked_sub(&z.ca_part())
            .map_err(|_| Error::invariant(format!("rho_{} does not dominate its floor", i + 1)))?;
        if !above.tails().is_empty() {
            return Err(Error::Inconclusive {
                tol: tol.clone(),
                detail: format!("mass above the floor of player {} has infinite support", i + 1),
            });
        }
        for (&k, w) in above.atoms() {
            if !w.is_positive() {
                continue;
            }
            match best_response(game, i, &Charge::dirac(k), rho, br_horizon, tol)? {
                BrOutcome::BestResponse { .. } => {}
                BrOutcome::Beaten { .. } => return Ok(false),
            }
        }
        if !r.diffuse_part().same_as(&z.diffuse_part()) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charges::tests::arb_charge;
    use crate::finite::tests::{m, reduced_coordination};
    use crate::finite::FiniteGame;
    use crate::rational::q;
    use proptest::prelude::*;

    fn atoms(pairs: &[(u64, Rational)]) -> Measure {
        Measure::from_parts(pairs.to_vec(), Vec::new(), Vec::new()).unwrap()
    }

    #[test]
    fn iso_example() {
        let zeta = atoms(&[(1, q(1, 4)), (2, q(1, 4))]);
        let iso = restricted_iso(&zeta).unwrap();
        assert_eq!(*iso.k(), q(1, 2));
        assert!(iso.phi().same_as(&atoms(&[(1, q(1, 2)), (2, q(1, 2))])));
        let f = iso.forward(&Charge::dirac(3));
        assert!(f.same_as(&atoms(&[(1, q(1, 4)), (2, q(1, 4)), (3, q(1, 2))])));
        assert!(iso.inverse(&Charge::dirac(3)).is_err());
        assert!(matches!(restricted_iso(&Measure::zero()), Err(Error::MassOutOfRange(_))));
        assert!(matches!(restricted_iso(&Charge::dirac(1)), Err(Error::MassOutOfRange(_))));
    }

    /// Truncation of the sign game to five actions for the column player.
    fn truncated_sign_game() -> FiniteGame {
        let row = |s: i64| (1..=5).map(|l| Rational::new(s, l)).collect::<Vec<_>>();
        let u1 = vec![row(1), row(-1)];
        let u2: Vec<Vec<Rational>> = u1.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        FiniteGame::bimatrix(&u1, &u2).unwrap()
    }

    #[test]
    fn degenerate_floor() {
        let game = CountableGame::from_finite("reduced", &reduced_coordination());
        let zero = vec![Measure::zero(), Measure::zero()];
        for a in [1, 2] {
            let rho = ChargeProfile::new(vec![Charge::dirac(a), Charge::dirac(a)]);
            assert!(restricted_nash_sufficient(&game, &zero, &rho, 0, &q(1, 100)).unwrap());
        }
        let game = CountableGame::from_finite("admissible", &FiniteGame::bimatrix(&m(&[&[4, 0, 0], &[0, 4, 0], &[2, 2, 1]]), &m(&[&[4, 0, 2], &[0, 4, 2], &[0, 0, 1]])).unwrap());
        let rho = ChargeProfile::new(vec![Charge::dirac(3), Charge::dirac(3)]);
        assert!(restricted_nash_sufficient(&game, &zero, &rho, 0, &q(1, 100)).unwrap());
        let rho = ChargeProfile::new(vec![Charge::dirac(1), Charge::dirac(2)]);
        assert!(!restricted_nash_sufficient(&game, &zero, &rho, 0, &q(1, 100)).unwrap());
    }

    #[test]
    fn floored_sign_game() {
        let game = CountableGame::from_finite("sign", &truncated_sign_game());
        let zeta = vec![
            atoms(&[(1, q(1, 50)), (2, q(1, 100))]),
            atoms(&[(1, q(1, 400)), (2, q(1, 400)), (3, q(1, 400)), (4, q(1, 400)), (5, q(1, 50))]),
        ];
        let rho2 = Charge::from_mixed(&[q(1, 400), q(1, 400), q(1, 400), q(1, 400), q(99, 100)]).unwrap();
        let rho = ChargeProfile::new(vec![Charge::from_mixed(&[q(99, 100), q(1, 100)]).unwrap(), rho2.clone()]);
        assert!(restricted_nash_sufficient(&game, &zeta, &rho, 0, &q(1, 1000)).unwrap());
        let bad = ChargeProfile::new(vec![Charge::from_mixed(&[q(1, 2), q(1, 2)]).unwrap(), rho2]);
        assert!(!restricted_nash_sufficient(&game, &zeta, &bad, 0, &q(1, 1000)).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn inverse_undoes_forward(z in arb_charge(), psi in arb_charge(), w in 1i64..20) {
            let zeta = z.scaled(&Rational::new(w, 20));
            let iso = restricted_iso(&zeta).unwrap();
            let f = iso.forward(&psi);
            prop_assert!(f.checked_sub(&zeta).is_ok());
            prop_assert!(iso.inverse(&f).unwrap().same_as(&psi));
        }
    }
}
