//! Normal-form games with finitely many actions.
//!
//! Payoff tensors are stored flat, with player 0's action as the most
//! significant index. Actions are 0-based internally; labels are for display.

mod dominance;
mod lp;
mod perfect;

use std::fmt;
use std::str::FromStr;

pub use dominance::{undominated_belief, weak_dominance, Dominance};
pub use lp::{Constraint, LinearProgram, LpOutcome, Relation};
pub use perfect::{
    is_nash_witnessed, perfect_candidate_np, perfect_candidate_np_with, perfect_decide_2p,
    perturbed_br_fixed_point, perturbed_br_from, FixedPoint, NpOptions, NpVerdict, Perfection2p, Refutation,
};

use crate::error::{Error, Result};
use crate::rational::{fmt_vector, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGame {
    action_counts: Vec<usize>,
    labels: Vec<Vec<String>>,
    payoffs: Vec<Vec<Rational>>,
}

impl FiniteGame {
    /// `payoffs[i]` is player i's flat tensor of length `∏ action_counts`.
    pub fn new(action_counts: Vec<usize>, payoffs: Vec<Vec<Rational>>) -> Result<Self> {
        if action_counts.len() < 2 {
            return Err(Error::ShapeMismatch(format!(
                "a game needs at least 2 players, got {}",
                action_counts.len()
            )));
        }
        if action_counts.iter().any(|&c| c == 0) {
            return Err(Error::ShapeMismatch("every player needs at least one action".into()));
        }
        if payoffs.len() != action_counts.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} players but {} payoff tensors",
                action_counts.len(),
                payoffs.len()
            )));
        }
        let size: usize = action_counts.iter().product();
        for (i, t) in payoffs.iter().enumerate() {
            if t.len() != size {
                return Err(Error::ShapeMismatch(format!(
                    "payoff tensor of player {} has {} entries, expected {size}",
                    i + 1,
                    t.len()
                )));
            }
        }
        let labels = action_counts
            .iter()
            .map(|&c| (1..=c).map(|a| a.to_string()).collect())
            .collect();
        Ok(FiniteGame {
            action_counts,
            labels,
            payoffs,
        })
    }

    /// Two-player game from row-major matrices.
    pub fn bimatrix(u1: &[Vec<Rational>], u2: &[Vec<Rational>]) -> Result<Self> {
        let rows = u1.len();
        let cols = u1.first().map_or(0, Vec::len);
        if u2.len() != rows || u1.iter().chain(u2).any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("bimatrix rows have unequal lengths".into()));
        }
        Self::new(vec![rows, cols], vec![u1.concat(), u2.concat()])
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Result<Self> {
        if labels.len() != self.players()
            || labels.iter().zip(&self.action_counts).any(|(l, &c)| l.len() != c)
        {
            return Err(Error::ShapeMismatch("label lists do not match the action counts".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn labels(&self, player: usize) -> &[String] {
        &self.labels[player]
    }

    pub fn payoff_tensor(&self, player: usize) -> &[Rational] {
        &self.payoffs[player]
    }

    pub fn index(&self, actions: &[usize]) -> usize {
        actions
            .iter()
            .zip(&self.action_counts)
            .fold(0, |acc, (&a, &c)| acc * c + a)
    }

    pub fn payoff(&self, player: usize, actions: &[usize]) -> &Rational {
        &self.payoffs[player][self.index(actions)]
    }

    /// Every pure profile, in tensor order.
    pub fn pure_profiles(&self) -> PureProfiles {
        PureProfiles::new(self.action_counts.clone())
    }

    /// Pure profiles of everyone except `player`, with `player`'s slot set to 0.
    pub fn opposing_profiles(&self, player: usize) -> PureProfiles {
        let mut counts = self.action_counts.clone();
        counts[player] = 1;
        PureProfiles::new(counts)
    }

    fn check(&self, profile: &MixedProfile) -> Result<()> {
        let shape: Vec<usize> = profile.0.iter().map(Vec::len).collect();
        if shape != self.action_counts {
            return Err(Error::ShapeMismatch(format!(
                "profile shape {shape:?} does not match action counts {:?}",
                self.action_counts
            )));
        }
        Ok(())
    }

    /// Σ over pure profiles of the product of probabilities times `player`'s payoff.
    pub fn expected_payoff(&self, profile: &MixedProfile, player: usize) -> Result<Rational> {
        self.check(profile)?;
        Ok(self.expectation(&profile.0, player))
    }

    fn expectation(&self, rows: &[Vec<Rational>], player: usize) -> Rational {
        let mut total = Rational::zero();
        let supports: Vec<Vec<usize>> = rows
            .iter()
            .map(|r| (0..r.len()).filter(|&a| !r[a].is_zero()).collect())
            .collect();
        let counts: Vec<usize> = supports.iter().map(Vec::len).collect();
        for idx in PureProfiles::new(counts) {
            let actions: Vec<usize> = idx.iter().enumerate().map(|(p, &j)| supports[p][j]).collect();
            let mut w = Rational::one();
            for (p, &a) in actions.iter().enumerate() {
                w *= &rows[p][a];
            }
            total += w * self.payoff(player, &actions);
        }
        total
    }

    /// Payoff to `player` from pure `action` while the others follow `profile`.
    pub fn action_payoff(&self, profile: &MixedProfile, player: usize, action: usize) -> Result<Rational> {
        self.check(profile)?;
        let mut rows = profile.0.clone();
        rows[player] = dirac_row(self.action_counts[player], action);
        Ok(self.expectation(&rows, player))
    }

    pub fn action_payoffs(&self, profile: &MixedProfile, player: usize) -> Result<Vec<Rational>> {
        (0..self.action_counts[player])
            .map(|a| self.action_payoff(profile, player, a))
            .collect()
    }

    pub fn pure_best_responses(&self, player: usize, profile: &MixedProfile) -> Result<Vec<usize>> {
        let v = self.action_payoffs(profile, player)?;
        let best = v.iter().max().expect("non-empty").clone();
        Ok((0..v.len()).filter(|&a| v[a] == best).collect())
    }

    pub fn is_nash(&self, profile: &MixedProfile) -> Result<bool> {
        Ok(is_nash_witnessed(self, profile)?.is_none())
    }
}

pub(crate) fn dirac_row(n: usize, a: usize) -> Vec<Rational> {
    (0..n)
        .map(|j| if j == a { Rational::one() } else { Rational::zero() })
        .collect()
}

/// Odometer over `∏ 0..counts[i]`, last coordinate fastest.
#[derive(Clone, Debug)]
pub struct PureProfiles {
    counts: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl PureProfiles {
    fn new(counts: Vec<usize>) -> Self {
        let next = (!counts.contains(&0)).then(|| vec![0; counts.len()]);
        PureProfiles { counts, next }
    }
}

impl Iterator for PureProfiles {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut nxt = cur.clone();
        for i in (0..nxt.len()).rev() {
            nxt[i] += 1;
            if nxt[i] < self.counts[i] {
                self.next = Some(nxt);
                break;
            }
            nxt[i] = 0;
        }
        Some(cur)
    }
}

/// One probability vector per player.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedProfile(Vec<Vec<Rational>>);

impl MixedProfile {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if r.is_empty() {
                return Err(Error::invariant(format!("strategy of player {} is empty", i + 1)));
            }
            if let Some(x) = r.iter().find(|x| x.is_negative()) {
                return Err(Error::invariant(format!(
                    "strategy of player {} has negative entry {x}",
                    i + 1
                )));
            }
            let s: Rational = r.iter().sum();
            if s != 1 {
                return Err(Error::invariant(format!(
                    "strategy of player {} sums to {s}, expected 1",
                    i + 1
                )));
            }
        }
        Ok(MixedProfile(rows))
    }

    pub fn pure(counts: &[usize], actions: &[usize]) -> Self {
        MixedProfile(counts.iter().zip(actions).map(|(&n, &a)| dirac_row(n, a)).collect())
    }

    pub fn uniform(counts: &[usize]) -> Self {
        MixedProfile(
            counts
                .iter()
                .map(|&n| vec![Rational::new(1, n as i64); n])
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.0
    }

    pub fn row(&self, player: usize) -> &[Rational] {
        &self.0[player]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.0.iter().map(Vec::len).collect()
    }

    pub fn with_row(&self, player: usize, row: Vec<Rational>) -> Result<Self> {
        let mut rows = self.0.clone();
        rows[player] = row;
        MixedProfile::new(rows)
    }

    pub fn support(&self, player: usize) -> Vec<usize> {
        (0..self.0[player].len())
            .filter(|&a| self.0[player][a].is_positive())
            .collect()
    }

    pub fn is_completely_mixed(&self) -> bool {
        self.0.iter().flatten().all(Rational::is_positive)
    }

    /// `(1 − w)·self + w·other`.
    pub fn mix(&self, w: &Rational, other: &MixedProfile) -> MixedProfile {
        let keep = Rational::one() - w;
        MixedProfile(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| &keep * x + w * y).collect())
                .collect(),
        )
    }

    /// Largest coordinate difference.
    pub fn distance(&self, other: &MixedProfile) -> Rational {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(Rational::zero(), Rational::max)
    }
}

impl fmt::Display for MixedProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|r| fmt_vector(r)).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// `(1/2,1/2,0);(1/2,1/2,0)`; the parentheses are optional.
impl FromStr for MixedProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut offset = 0;
        for part in s.split(';') {
            let body = part.trim().trim_start_matches('(').trim_end_matches(')');
            let row = body
                .split(',')
                .map(|x| x.trim().parse::<Rational>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse("profile", s, offset, e.to_string()))?;
            rows.push(row);
            offset += part.len() + 1;
        }
        MixedProfile::new(rows)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    pub(crate) fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| Rational::int(x)).collect()).collect()
    }

    pub(crate) fn admissible_dominated() -> FiniteGame {
        FiniteGame::bimatrix(
            &m(&[&[4, 0, 0], &[0, 4, 0], &[2, 2, 1]]),
            &m(&[&[4, 0, 2], &[0, 4, 2], &[0, 0, 1]]),
        )
        .unwrap()
    }

    pub(crate) fn reduced_coordination() -> FiniteGame {
        FiniteGame::bimatrix(&m(&[&[0, 0], &[0, 1]]), &m(&[&[0, 0], &[0, 1]])).unwrap()
    }

    pub(crate) fn half_half() -> MixedProfile {
        "(1/2,1/2,0);(1/2,1/2,0)".parse().unwrap()
    }

    #[test]
    fn expected_payoff_examples() {
        let g = admissible_dominated();
        assert_eq!(g.expected_payoff(&half_half(), 0).unwrap(), q(2, 1));
        let pure = MixedProfile::pure(&[3, 3], &[2, 0]);
        assert_eq!(g.expected_payoff(&pure, 0).unwrap(), q(2, 1));
        let zero = FiniteGame::bimatrix(&m(&[&[0, 0]]), &m(&[&[0, 0]])).unwrap();
        assert!(zero.expected_payoff(&"(1);(1/3,2/3)".parse().unwrap(), 1).unwrap().is_zero());
        assert!(g.expected_payoff(&"(1);(1)".parse().unwrap(), 0).is_err());
    }

    #[test]
    fn best_responses_and_nash() {
        let g = admissible_dominated();
        assert_eq!(g.pure_best_responses(0, &half_half()).unwrap(), vec![0, 1, 2]);
        let r = reduced_coordination();
        let d = MixedProfile::pure(&[2, 2], &[1, 0]);
        assert_eq!(r.pure_best_responses(1, &d).unwrap(), vec![1]);
        assert!(g.is_nash(&half_half()).unwrap());
        assert!(r.is_nash(&MixedProfile::pure(&[2, 2], &[1, 1])).unwrap());
        assert!(r.is_nash(&MixedProfile::pure(&[2, 2], &[0, 0])).unwrap());
        assert!(!r.is_nash(&MixedProfile::pure(&[2, 2], &[0, 1])).unwrap());
        let two = FiniteGame::bimatrix(&m(&[&[1, 0], &[0, 0]]), &m(&[&[0, 0], &[0, 0]])).unwrap();
        assert_eq!(two.pure_best_responses(0, &MixedProfile::pure(&[2, 2], &[0, 0])).unwrap(), vec![0]);
    }

    #[test]
    fn profile_parsing() {
        assert!("(1/2,1/2,1/4);(1,0,0)".parse::<MixedProfile>().is_err());
        assert!("(1/2,x);(1)".parse::<MixedProfile>().is_err());
        let p: MixedProfile = "1/3,2/3;1".parse().unwrap();
        assert_eq!(p.to_string(), "(1/3,2/3);(1/1)");
    }

    pub(crate) fn arb_game(max_actions: usize, players: usize, vals: i64) -> impl Strategy<Value = FiniteGame> {
        proptest::collection::vec(1..=max_actions, players).prop_flat_map(move |counts| {
            let size: usize = counts.iter().product();
            proptest::collection::vec(proptest::collection::vec(0..=vals, size), counts.len()).prop_map(
                move |ps| {
                    FiniteGame::new(
                        counts.clone(),
                        ps.into_iter().map(|t| t.into_iter().map(Rational::int).collect()).collect(),
                    )
                    .unwrap()
                },
            )
        })
    }

    pub(crate) fn arb_row(n: usize) -> impl Strategy<Value = Vec<Rational>> {
        proptest::collection::vec(0i64..5, n).prop_map(|w| {
            let total: i64 = w.iter().sum();
            if total == 0 {
                dirac_row(w.len(), 0)
            } else {
                w.iter().map(|&x| Rational::new(x, total)).collect()
            }
        })
    }

    pub(crate) fn arb_game_profile(
        max_actions: usize,
        players: usize,
    ) -> impl Strategy<Value = (FiniteGame, MixedProfile)> {
        arb_game(max_actions, players, 4).prop_flat_map(|g| {
            let rows: Vec<_> = g.action_counts().iter().map(|&n| arb_row(n)).collect();
            (Just(g), rows).prop_map(|(g, rows)| (g, MixedProfile::new(rows).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn multilinear_in_each_player(
            (g, p) in arb_game_profile(3, 3),
            i in 0usize..3,
            lam in 0i64..=6,
            j in 0usize..3,
        ) {
            let n = g.action_counts()[i];
            let other = MixedProfile::pure(g.action_counts(), &vec![0; 3]).row(i).to_vec();
            let other = if n > 1 { dirac_row(n, n - 1) } else { other };
            let lam = Rational::new(lam, 6);
            let a = p.clone();
            let b = p.with_row(i, other).unwrap();
            let mixed_row: Vec<Rational> = a.row(i).iter().zip(b.row(i))
                .map(|(x, y)| &lam * x + (Rational::one() - &lam) * y).collect();
            let mixed = p.with_row(i, mixed_row).unwrap();
            let lhs = g.expected_payoff(&mixed, j).unwrap();
            let rhs = &lam * g.expected_payoff(&a, j).unwrap()
                + (Rational::one() - &lam) * g.expected_payoff(&b, j).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn nash_iff_payoff_equals_best((g, p) in arb_game_profile(3, 2)) {
            let mut all = true;
            for i in 0..2 {
                let own = g.expected_payoff(&p, i).unwrap();
                let best = g.action_payoffs(&p, i).unwrap().into_iter().max().unwrap();
                all &= own == best;
            }
            prop_assert_eq!(g.is_nash(&p).unwrap(), all);
        }
    }
}
