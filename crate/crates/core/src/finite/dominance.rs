use super::lp::{LinearProgram, LpOutcome, Relation};
use super::FiniteGame;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum Dominance {
    /// `belief` is a strictly positive distribution over the opposing pure
    /// profiles (in `opposing_profiles` order) against which the strategy is
    /// a best response.
    Undominated { belief: Vec<Rational> },
    DominatedBy(Vec<Rational>),
}

impl Dominance {
    pub fn is_dominated(&self) -> bool {
        matches!(self, Dominance::DominatedBy(_))
    }
}

/// `m[a][b]`: payoff to `player` from action `a` against opposing profile `b`.
fn payoff_matrix(game: &FiniteGame, player: usize) -> Vec<Vec<Rational>> {
    let opp: Vec<Vec<usize>> = game.opposing_profiles(player).collect();
    (0..game.action_counts()[player])
        .map(|a| {
            opp.iter()
                .map(|b| {
                    let mut prof = b.clone();
                    prof[player] = a;
                    game.payoff(player, &prof).clone()
                })
                .collect()
        })
        .collect()
}

fn strategy_values(m: &[Vec<Rational>], strategy: &[Rational]) -> Vec<Rational> {
    (0..m[0].len())
        .map(|b| m.iter().zip(strategy).map(|(row, s)| &row[b] * s).sum())
        .collect()
}

fn check_strategy(game: &FiniteGame, player: usize, strategy: &[Rational]) -> Result<()> {
    if player >= game.players() || strategy.len() != game.action_counts()[player] {
        return Err(Error::ShapeMismatch(format!(
            "strategy of length {} for player {}",
            strategy.len(),
            player + 1
        )));
    }
    Ok(())
}

/// Decides weak dominance of a mixed strategy by maximizing the total slack
/// `Σ_b (u(τ,b) − u(σ,b))` subject to every slack being non-negative.
pub fn weak_dominance(game: &FiniteGame, player: usize, strategy: &[Rational]) -> Result<Dominance> {
    check_strategy(game, player, strategy)?;
    let m = payoff_matrix(game, player);
    let s = strategy_values(&m, strategy);
    let n = m.len();
    let mut lp = LinearProgram::new(n);
    lp.maximize(m.iter().map(|row| row.iter().sum()).collect());
    for (b, sb) in s.iter().enumerate() {
        lp.constrain(m.iter().map(|row| row[b].clone()).collect(), Relation::Ge, sb.clone());
    }
    lp.constrain(vec![Rational::one(); n], Relation::Eq, Rational::one());
    let LpOutcome::Optimal { value, x } = lp.solve() else {
        unreachable!("the strategy itself is feasible and the simplex is bounded");
    };
    let base: Rational = s.iter().sum();
    if value > base {
        return Ok(Dominance::DominatedBy(x));
    }
    let belief = undominated_belief(game, player, strategy)?
        .ok_or_else(|| Error::invariant("no separating belief for an undominated strategy"))?;
    Ok(Dominance::Undominated { belief })
}

/// A strictly positive belief over opposing pure profiles making `strategy`
/// a best response, if one exists. Solves for `y ≥ 0` with
/// `Σ_b (m[a][b] − s_b)(1 + y_b) ≤ 0` for all `a`, then normalizes `1 + y`.
pub fn undominated_belief(game: &FiniteGame, player: usize, strategy: &[Rational]) -> Result<Option<Vec<Rational>>> {
    check_strategy(game, player, strategy)?;
    let m = payoff_matrix(game, player);
    let s = strategy_values(&m, strategy);
    let k = s.len();
    let mut lp = LinearProgram::new(k);
    for row in &m {
        let d: Vec<Rational> = row.iter().zip(&s).map(|(x, y)| x - y).collect();
        let rhs = -d.iter().cloned().sum::<Rational>();
        lp.constrain(d, Relation::Le, rhs);
    }
    let LpOutcome::Optimal { x, .. } = lp.solve() else {
        return Ok(None);
    };
    let w: Vec<Rational> = x.iter().map(|y| y + Rational::one()).collect();
    let total: Rational = w.iter().sum();
    let belief: Vec<Rational> = w.into_iter().map(|v| v / &total).collect();
    debug_assert!(is_best_response_to_belief(&m, strategy, &belief));
    Ok(Some(belief))
}

fn is_best_response_to_belief(m: &[Vec<Rational>], strategy: &[Rational], belief: &[Rational]) -> bool {
    let vals: Vec<Rational> = m
        .iter()
        .map(|row| row.iter().zip(belief).map(|(x, p)| x * p).sum())
        .collect();
    let own: Rational = vals.iter().zip(strategy).map(|(v, s)| v * s).sum();
    vals.iter().all(|v| *v <= own)
}
