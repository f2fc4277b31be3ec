//! Perfection for finite games.
//!
//! Two players: a profile is perfect iff it is a Nash equilibrium in which
//! neither strategy is weakly dominated. This is the classical bimatrix
//! characterization; it fails for three or more players, where only
//! refutations and tremble evidence are reported.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dominance::{weak_dominance, Dominance};
use super::{dirac_row, FiniteGame, MixedProfile};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum Refutation {
    NotNash { player: usize, action: usize, gain: Rational },
    Dominated { player: usize, by: Vec<Rational> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Perfection2p {
    /// `beliefs[i]`: completely mixed opponent strategy to which player i's strategy is a best response.
    Perfect { beliefs: Vec<Vec<Rational>> },
    NotPerfect(Refutation),
}

impl Perfection2p {
    pub fn is_perfect(&self) -> bool {
        matches!(self, Perfection2p::Perfect { .. })
    }
}

/// The first profitable pure deviation, if any.
pub fn is_nash_witnessed(game: &FiniteGame, profile: &MixedProfile) -> Result<Option<(usize, usize, Rational)>> {
    for i in 0..game.players() {
        let own = game.expected_payoff(profile, i)?;
        let vals = game.action_payoffs(profile, i)?;
        let (best, v) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        if *v > own {
            return Ok(Some((i, best, v - &own)));
        }
    }
    Ok(None)
}

fn refute(game: &FiniteGame, profile: &MixedProfile) -> Result<std::result::Result<Vec<Vec<Rational>>, Refutation>> {
    if let Some((player, action, gain)) = is_nash_witnessed(game, profile)? {
        return Ok(Err(Refutation::NotNash { player, action, gain }));
    }
    let mut beliefs = Vec::new();
    for i in 0..game.players() {
        match weak_dominance(game, i, profile.row(i))? {
            Dominance::DominatedBy(by) => return Ok(Err(Refutation::Dominated { player: i, by })),
            Dominance::Undominated { belief } => beliefs.push(belief),
        }
    }
    Ok(Ok(beliefs))
}

pub fn perfect_decide_2p(game: &FiniteGame, profile: &MixedProfile) -> Result<Perfection2p> {
    if game.players() != 2 {
        return Err(Error::PlayerCountUnsupported(game.players()));
    }
    Ok(match refute(game, profile)? {
        Ok(beliefs) => Perfection2p::Perfect { beliefs },
        Err(r) => Perfection2p::NotPerfect(r),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    /// The perturbed profile `(1 − ε)·base + ε·anchor`.
    pub profile: MixedProfile,
    pub base: MixedProfile,
    pub residual: Rational,
    pub iterations: usize,
}

fn check_perturbation(game: &FiniteGame, anchor: &MixedProfile, epsilon: &Rational) -> Result<()> {
    if anchor.shape() != game.action_counts() {
        return Err(Error::ShapeMismatch("anchor shape does not match the game".into()));
    }
    if !anchor.is_completely_mixed() {
        return Err(Error::invariant("anchor must put positive weight on every action"));
    }
    if !(epsilon.is_positive() && *epsilon < 1) {
        return Err(Error::invariant(format!("epsilon {epsilon} must lie in (0,1)")));
    }
    Ok(())
}

/// Largest gain from a unilateral switch within the perturbed strategy set.
fn residual(game: &FiniteGame, base: &MixedProfile, anchor: &MixedProfile, eps: &Rational) -> Result<Rational> {
    let sigma = base.mix(eps, anchor);
    let keep = Rational::one() - eps;
    let mut worst = Rational::zero();
    for i in 0..game.players() {
        let vals = game.action_payoffs(&sigma, i)?;
        let best = vals.iter().max().expect("non-empty").clone();
        let cur: Rational = vals.iter().zip(base.row(i)).map(|(v, s)| v * s).sum();
        worst = worst.max(&keep * (best - cur));
    }
    Ok(worst)
}

/// Best-response iteration inside `{(1 − ε)·s + ε·anchor}` starting from `s = anchor`.
pub fn perturbed_br_fixed_point(
    game: &FiniteGame,
    anchor: &MixedProfile,
    epsilon: &Rational,
    max_iters: usize,
) -> Result<FixedPoint> {
    perturbed_br_from(game, anchor, epsilon, anchor.clone(), max_iters)
}

pub fn perturbed_br_from(
    game: &FiniteGame,
    anchor: &MixedProfile,
    epsilon: &Rational,
    start: MixedProfile,
    max_iters: usize,
) -> Result<FixedPoint> {
    check_perturbation(game, anchor, epsilon)?;
    let mut base = start;
    for iter in 0..max_iters {
        let mut changed = false;
        for i in 0..game.players() {
            let sigma = base.mix(epsilon, anchor);
            let vals = game.action_payoffs(&sigma, i)?;
            let best = vals.iter().max().expect("non-empty").clone();
            let cur: Rational = vals.iter().zip(base.row(i)).map(|(v, s)| v * s).sum();
            if cur < best {
                let a = (0..vals.len()).find(|&a| vals[a] == best).expect("argmax");
                base = base.with_row(i, dirac_row(vals.len(), a))?;
                changed = true;
            }
        }
        if !changed {
            return Ok(FixedPoint {
                profile: base.mix(epsilon, anchor),
                residual: Rational::zero(),
                base,
                iterations: iter + 1,
            });
        }
    }
    Err(Error::NonConvergence {
        residual: residual(game, &base, anchor, epsilon)?,
    })
}

#[derive(Clone, Debug)]
pub struct NpOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for NpOptions {
    fn default() -> Self {
        NpOptions {
            restarts: 16,
            seed: 0,
            max_iters: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NpVerdict {
    Refuted(Refutation),
    /// For each ε, a completely mixed profile within ε to which the profile is a best response, if one was found.
    Candidate(Vec<(Rational, Option<MixedProfile>)>),
}

impl NpVerdict {
    pub fn is_candidate(&self) -> bool {
        matches!(self, NpVerdict::Candidate(_))
    }

    pub fn fully_witnessed(&self) -> bool {
        match self {
            NpVerdict::Candidate(ev) => ev.iter().all(|(_, w)| w.is_some()),
            NpVerdict::Refuted(_) => false,
        }
    }
}

fn best_response_to(game: &FiniteGame, profile: &MixedProfile, tremble: &MixedProfile) -> Result<bool> {
    for i in 0..game.players() {
        let br = game.pure_best_responses(i, tremble)?;
        if profile.support(i).iter().any(|a| !br.contains(a)) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn random_full_support(rng: &mut ChaCha8Rng, counts: &[usize]) -> MixedProfile {
    let rows = counts
        .iter()
        .map(|&n| {
            let w: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=16)).collect();
            let total: i64 = w.iter().sum();
            w.into_iter().map(|x| Rational::new(x, total)).collect()
        })
        .collect();
    MixedProfile::new(rows).expect("normalized")
}

pub fn perfect_candidate_np(game: &FiniteGame, profile: &MixedProfile, schedule: &[Rational]) -> Result<NpVerdict> {
    perfect_candidate_np_with(game, profile, schedule, &NpOptions::default())
}

/// Refutes via Nash and dominance tests; otherwise searches, per ε, for a
/// tremble `(1 − ε)·profile + ε·q` with `q` drawn from the uniform profile,
/// perturbed best-response fixed points and seeded random full-support profiles.
pub fn perfect_candidate_np_with(
    game: &FiniteGame,
    profile: &MixedProfile,
    schedule: &[Rational],
    opts: &NpOptions,
) -> Result<NpVerdict> {
    if schedule.iter().any(|e| !(e.is_positive() && *e < 1)) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invariant("epsilon schedule must be strictly decreasing in (0,1)"));
    }
    if let Err(r) = refute(game, profile)? {
        return Ok(NpVerdict::Refuted(r));
    }
    let counts = game.action_counts().to_vec();
    let uniform = MixedProfile::uniform(&counts);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut evidence = Vec::new();
    for eps in schedule {
        let mut anchors = vec![uniform.clone()];
        for _ in 0..opts.restarts {
            let start: Vec<usize> = counts.iter().map(|&n| rng.gen_range(0..n)).collect();
            let start = MixedProfile::pure(&counts, &start);
            if let Ok(fp) = perturbed_br_from(game, &uniform, eps, start, opts.max_iters) {
                anchors.push(fp.profile);
            }
            anchors.push(random_full_support(&mut rng, &counts));
        }
        let mut found = None;
        for q in &anchors {
            let tremble = profile.mix(eps, q);
            if best_response_to(game, profile, &tremble)? {
                found = Some(tremble);
                break;
            }
        }
        evidence.push((eps.clone(), found));
    }
    Ok(NpVerdict::Candidate(evidence))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::tests::{admissible_dominated, arb_game_profile, half_half, m, reduced_coordination};
    use crate::rational::q;
    use proptest::prelude::*;

    #[test]
    fn two_player_examples() {
        let g = admissible_dominated();
        match perfect_decide_2p(&g, &half_half()).unwrap() {
            Perfection2p::NotPerfect(Refutation::Dominated { player: 0, by }) => {
                assert_eq!(by, vec![q(0, 1), q(0, 1), q(1, 1)])
            }
            v => panic!("{v:?}"),
        }
        let r = reduced_coordination();
        assert!(perfect_decide_2p(&r, &MixedProfile::pure(&[2, 2], &[1, 1])).unwrap().is_perfect());
        assert!(!perfect_decide_2p(&r, &MixedProfile::pure(&[2, 2], &[0, 0])).unwrap().is_perfect());
        let id = FiniteGame::bimatrix(&m(&[&[1, 0], &[0, 1]]), &m(&[&[1, 0], &[0, 1]])).unwrap();
        for a in 0..2 {
            assert!(perfect_decide_2p(&id, &MixedProfile::pure(&[2, 2], &[a, a])).unwrap().is_perfect());
        }
        let three = FiniteGame::new(vec![1, 1, 1], vec![vec![q(0, 1)]; 3]).unwrap();
        assert_eq!(
            perfect_decide_2p(&three, &MixedProfile::pure(&[1, 1, 1], &[0, 0, 0])),
            Err(Error::PlayerCountUnsupported(3))
        );
    }

    #[test]
    fn perturbed_fixed_points() {
        let r = reduced_coordination();
        let u = MixedProfile::uniform(&[2, 2]);
        let fp = perturbed_br_fixed_point(&r, &u, &q(1, 10), 50).unwrap();
        assert_eq!(fp.residual, Rational::zero());
        assert_eq!(fp.profile.row(0)[1], q(19, 20));
        assert_eq!(fp.profile.row(1)[1], q(19, 20));

        let g = admissible_dominated();
        let u3 = MixedProfile::uniform(&[3, 3]);
        let eps = q(1, 100);
        let fp = perturbed_br_fixed_point(&g, &u3, &eps, 50).unwrap();
        assert_eq!(fp.base, MixedProfile::pure(&[3, 3], &[2, 2]));
        for (row, anchor) in fp.profile.rows().iter().zip(u3.rows()) {
            for (x, a) in row.iter().zip(anchor) {
                assert!(*x >= &eps * a);
            }
        }
        assert!(fp.profile.distance(&half_half()) > q(1, 3));
    }

    #[test]
    fn matching_pennies_does_not_settle() {
        let g = FiniteGame::bimatrix(&m(&[&[1, -1], &[-1, 1]]), &m(&[&[-1, 1], &[1, -1]])).unwrap();
        let start = MixedProfile::pure(&[2, 2], &[0, 0]);
        let res = perturbed_br_from(&g, &MixedProfile::uniform(&[2, 2]), &q(1, 10), start, 20);
        assert!(matches!(res, Err(Error::NonConvergence { residual }) if residual.is_positive()));
    }

    #[test]
    fn np_candidates() {
        let schedule = [q(1, 10), q(1, 100), q(1, 1000)];
        // Three players, each with a dominant action 0.
        let counts = vec![2, 2, 2];
        let tmp = FiniteGame::new(counts.clone(), vec![vec![q(0, 1); 8]; 3]).unwrap();
        let payoffs = (0..3)
            .map(|i| tmp.pure_profiles().map(|a| if a[i] == 0 { q(1, 1) } else { q(0, 1) }).collect())
            .collect();
        let dom = FiniteGame::new(counts.clone(), payoffs).unwrap();
        let v = perfect_candidate_np(&dom, &MixedProfile::pure(&counts, &[0, 0, 0]), &schedule).unwrap();
        assert!(v.fully_witnessed());
        let g = admissible_dominated();
        assert!(matches!(
            perfect_candidate_np(&g, &half_half(), &schedule).unwrap(),
            NpVerdict::Refuted(Refutation::Dominated { .. })
        ));
        let trivial = FiniteGame::new(vec![1, 1, 1], vec![vec![q(3, 1)]; 3]).unwrap();
        let v = perfect_candidate_np(&trivial, &MixedProfile::pure(&[1, 1, 1], &[0, 0, 0]), &schedule).unwrap();
        assert!(v.fully_witnessed());
        assert!(perfect_candidate_np(&g, &half_half(), &[q(1, 100), q(1, 10)]).is_err());
    }

    /// Grid oracle: the profile is a best response to `(1 − ε)·σ + ε·g` for
    /// some completely mixed `g` with common denominator ≤ 24 and `ε = 1/64`.
    fn tremble_oracle(game: &FiniteGame, p: &MixedProfile) -> bool {
        let eps = q(1, 64);
        let grids: Vec<Vec<Vec<Rational>>> = game
            .action_counts()
            .iter()
            .map(|&n| {
                let mut out = Vec::new();
                for d in n as i64..=24 {
                    let mut idx = vec![1i64; n];
                    loop {
                        if idx.iter().sum::<i64>() == d {
                            out.push(idx.iter().map(|&x| Rational::new(x, d)).collect());
                        }
                        let mut i = 0;
                        while i < n {
                            idx[i] += 1;
                            if idx[i] <= d {
                                break;
                            }
                            idx[i] = 1;
                            i += 1;
                        }
                        if i == n {
                            break;
                        }
                    }
                }
                out
            })
            .collect();
        if game.is_nash(p).unwrap() == false {
            return false;
        }
        (0..2).all(|i| {
            let j = 1 - i;
            grids[j].iter().any(|g| {
                let row: Vec<Rational> = p
                    .row(j)
                    .iter()
                    .zip(g)
                    .map(|(x, y)| (Rational::one() - &eps) * x + &eps * y)
                    .collect();
                let t = p.with_row(j, row).unwrap();
                let br = game.pure_best_responses(i, &t).unwrap();
                p.support(i).iter().all(|a| br.contains(a))
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn two_player_agrees_with_tremble_oracle((g, p) in arb_game_profile(3, 2)) {
            let exact = perfect_decide_2p(&g, &p).unwrap();
            prop_assert_eq!(exact.is_perfect(), tremble_oracle(&g, &p));
            if exact.is_perfect() {
                prop_assert!(g.is_nash(&p).unwrap());
            }
        }
    }
}
