//! Perfection in countable-action games with finitely additive strategies.
//!
//! A profile `σ` is perfect when every neighbourhood of it holds a trembling
//! profile `τ` with a prescribed carrier and a best response `κ` to `τ`.
//! Everything here checks one such instance: a finitely generated carrier
//! and a single basis neighbourhood per call. Completely mixed nets are
//! never built.

mod hazy;
mod floor;
mod scenarios;
mod wald;

use std::fmt;
use std::sync::Arc;

pub use hazy::{br_region, br_threshold, hazy_filter_test, hazy_payoff, twins_test, Haziness, Twinship};
pub use floor::{restricted_iso, restricted_nash_sufficient, RestrictedIso};
pub use scenarios::{scenario_names, scenario_verify};
pub use wald::wald_mixer;

use crate::charges::{Charge, Measure};
use crate::error::{Error, Result};
use crate::finite::FiniteGame;
use crate::integration::{
    integrate_bracket, pure_action_payoff, Bracket, ChargeProfile, Example33, HazyFilterGame, PayoffSpec, VariantWald,
};
use crate::rational::Rational;
use crate::report::{Check, Report};
use crate::sets::SetExpr;

/// Rounds of tolerance halving before a comparison is declared inconclusive.
pub const REFINEMENT_ROUNDS: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionSpace {
    /// Actions `1..=m`.
    Finite(usize),
    Naturals,
}

/// Upper bound on a player's payoff from every pure action above a horizon.
pub trait TailBound: fmt::Debug + Send + Sync {
    fn bound(&self, player: usize, profile: &ChargeProfile, horizon: u64) -> Result<Rational>;
}

#[derive(Clone, Debug)]
pub struct CountableGame {
    name: String,
    actions: Vec<ActionSpace>,
    payoffs: Vec<PayoffSpec>,
    tail: Option<Arc<dyn TailBound>>,
}

#[derive(Debug, Clone, Copy)]
enum Builtin {
    Wald,
    Example33,
    Hazy { with_infinity: bool },
}

#[derive(Debug)]
struct BuiltinTail(Builtin);

impl TailBound for BuiltinTail {
    fn bound(&self, player: usize, profile: &ChargeProfile, horizon: u64) -> Result<Rational> {
        let h = Rational::from(horizon);
        match self.0 {
            // Action k earns κ_other([1, k−1])/k, and diffuse mass sees no finite set.
            Builtin::Wald => Ok(profile.get(1 - player).ca_mass() / (h + Rational::one())),
            Builtin::Example33 => {
                let k1 = profile.get(0);
                let lead = k1.point_mass(2) - k1.point_mass(1);
                Ok(lead.max(Rational::zero()) / (h + Rational::one()))
            }
            Builtin::Hazy { with_infinity } => {
                if player == 0 {
                    return Ok(Rational::zero());
                }
                let p = profile.get(0).point_mass(1);
                let denom = if with_infinity { h.max(Rational::one()) } else { h + Rational::one() };
                Ok(p / denom)
            }
        }
    }
}

impl CountableGame {
    pub fn new(name: impl Into<String>, actions: Vec<ActionSpace>, payoffs: Vec<PayoffSpec>) -> Result<Self> {
        let n = actions.len();
        if payoffs.len() != n {
            return Err(Error::ArityMismatch(format!("{n} players but {} payoffs", payoffs.len())));
        }
        if let Some(p) = payoffs.iter().find(|p| p.arity() != n) {
            return Err(Error::ArityMismatch(format!("payoff of arity {} in a {n}-player game", p.arity())));
        }
        Ok(CountableGame {
            name: name.into(),
            actions,
            payoffs,
            tail: None,
        })
    }

    pub fn with_tail_bound(mut self, tail: Arc<dyn TailBound>) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn from_finite(name: impl Into<String>, game: &FiniteGame) -> Self {
        let counts = game.action_counts().to_vec();
        let payoffs = (0..game.players())
            .map(|p| PayoffSpec::FiniteMatrix {
                counts: counts.clone(),
                tensor: game.payoff_tensor(p).to_vec(),
            })
            .collect();
        CountableGame {
            name: name.into(),
            actions: counts.into_iter().map(ActionSpace::Finite).collect(),
            payoffs,
            tail: None,
        }
    }

    fn builtin(name: &str, actions: Vec<ActionSpace>, payoffs: [PayoffSpec; 2], kind: Builtin) -> Self {
        CountableGame::new(name, actions, payoffs.to_vec())
            .expect("builtin shapes agree")
            .with_tail_bound(Arc::new(BuiltinTail(kind)))
    }

    pub fn variant_wald() -> Self {
        Self::builtin(
            "variant_wald",
            vec![ActionSpace::Naturals; 2],
            [0, 1].map(|p| PayoffSpec::UniformLimit(Arc::new(VariantWald::new(p)))),
            Builtin::Wald,
        )
    }

    pub fn example_3_3() -> Self {
        Self::builtin(
            "example_3_3",
            vec![ActionSpace::Finite(2), ActionSpace::Naturals],
            [0, 1].map(|p| PayoffSpec::UniformLimit(Arc::new(Example33::new(p)))),
            Builtin::Example33,
        )
    }

    pub fn hazy_filter_game(with_infinity: bool) -> Self {
        let name = if with_infinity { "hazy_filter_game_inf" } else { "hazy_filter_game" };
        Self::builtin(
            name,
            vec![ActionSpace::Finite(2), ActionSpace::Naturals],
            [0, 1].map(|p| PayoffSpec::UniformLimit(Arc::new(HazyFilterGame::new(p, with_infinity)))),
            Builtin::Hazy { with_infinity },
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn players(&self) -> usize {
        self.actions.len()
    }

    pub fn action_space(&self, player: usize) -> ActionSpace {
        self.actions[player]
    }

    pub fn payoff(&self, player: usize) -> &PayoffSpec {
        &self.payoffs[player]
    }

    pub fn expected_payoff(&self, player: usize, profile: &ChargeProfile, tol: &Rational) -> Result<Bracket> {
        integrate_bracket(profile, &self.payoffs[player], tol)
    }

    pub fn tail_bound(&self, player: usize, profile: &ChargeProfile, horizon: u64) -> Result<Rational> {
        match &self.tail {
            Some(t) => t.bound(player, profile, horizon),
            None => Err(Error::MissingTailBound { player: player + 1 }),
        }
    }

    fn check_profile(&self, profile: &ChargeProfile) -> Result<()> {
        if profile.len() != self.players() {
            return Err(Error::ArityMismatch(format!(
                "{} charges for a {}-player game",
                profile.len(),
                self.players()
            )));
        }
        for (i, space) in self.actions.iter().enumerate() {
            if let ActionSpace::Finite(m) = space {
                let outside = profile.get(i).eval(&SetExpr::from_lo(*m as u64 + 1))?;
                if !outside.is_zero() {
                    return Err(Error::ShapeMismatch(format!(
                        "player {} has {m} actions but the charge puts {outside} beyond them",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Generators that must each receive positive mass, per player.
#[derive(Clone, Debug)]
pub struct CarrierSpec(Vec<Vec<SetExpr>>);

impl CarrierSpec {
    pub fn new(generators: Vec<Vec<SetExpr>>) -> Result<Self> {
        for (i, gens) in generators.iter().enumerate() {
            if let Some(g) = gens.iter().find(|g| g.is_empty()) {
                return Err(Error::invariant(format!("carrier generator {g} of player {} is empty", i + 1)));
            }
        }
        Ok(CarrierSpec(generators))
    }

    pub fn player(&self, i: usize) -> &[SetExpr] {
        &self.0[i]
    }

    pub fn players(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for CarrierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|g| {
                let s: Vec<String> = g.iter().map(|x| x.to_string()).collect();
                format!("{{{}}}", s.join(", "))
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub fn carrier_includes(kappa: &Charge, generators: &[SetExpr]) -> Result<bool> {
    for g in generators {
        if !kappa.eval(g)?.is_positive() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Profiles within `epsilon` of `center` on every cell of each player's partition.
#[derive(Clone, Debug)]
pub struct TychonovNbhd {
    center: ChargeProfile,
    partitions: Vec<Vec<SetExpr>>,
    epsilon: Rational,
}

impl TychonovNbhd {
    pub fn new(center: ChargeProfile, partitions: Vec<Vec<SetExpr>>, epsilon: Rational) -> Result<Self> {
        if !epsilon.is_positive() {
            return Err(Error::invariant(format!("neighbourhood radius {epsilon} must be positive")));
        }
        if partitions.len() != center.len() {
            return Err(Error::ArityMismatch(format!(
                "{} partitions for {} players",
                partitions.len(),
                center.len()
            )));
        }
        for (i, cells) in partitions.iter().enumerate() {
            check_partition(cells).map_err(|m| Error::invariant(format!("player {}: {m}", i + 1)))?;
        }
        Ok(TychonovNbhd {
            center,
            partitions,
            epsilon,
        })
    }

    pub fn center(&self) -> &ChargeProfile {
        &self.center
    }

    pub fn partition(&self, i: usize) -> &[SetExpr] {
        &self.partitions[i]
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }
}

pub(crate) fn check_partition(cells: &[SetExpr]) -> std::result::Result<(), String> {
    let mut seen = SetExpr::empty();
    for c in cells {
        if !seen.is_disjoint(c) {
            return Err(format!("cell {c} overlaps an earlier cell"));
        }
        seen = seen.union(c);
    }
    if !seen.complement().is_empty() {
        return Err(format!("cells miss {}", seen.complement()));
    }
    Ok(())
}

pub fn nbhd_contains(nbhd: &TychonovNbhd, kappa: &ChargeProfile) -> Result<bool> {
    if kappa.len() != nbhd.center.len() {
        return Err(Error::ArityMismatch("profile and neighbourhood differ in players".into()));
    }
    for (i, cells) in nbhd.partitions.iter().enumerate() {
        for c in cells {
            let d = (kappa.get(i).eval(c)? - nbhd.center.get(i).eval(c)?).abs();
            if d >= nbhd.epsilon {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

enum Cmp {
    Holds,
    Fails,
    Unclear,
}

/// Whether every point of `a` is at least every point of `b`.
fn at_least(a: &Bracket, b: &Bracket) -> Cmp {
    if a.lower >= b.upper {
        Cmp::Holds
    } else if a.upper < b.lower {
        Cmp::Fails
    } else {
        Cmp::Unclear
    }
}

#[derive(Clone, Debug)]
pub enum BrOutcome {
    /// The candidate's payoff bracket; each of its parts is at least every pure action.
    BestResponse { value: Bracket, horizon: u64, tail: Option<Rational> },
    /// A pure action strictly better than one part of the candidate: the
    /// atom `part`, or everything off its atoms when `part` is `None`.
    Beaten { part: Option<u64>, action: u64, value: Bracket, deviation: Bracket },
}

impl BrOutcome {
    pub fn is_best_response(&self) -> bool {
        matches!(self, BrOutcome::BestResponse { .. })
    }
}

/// Splits a charge into weighted atoms and its normalized remainder.
fn parts(candidate: &Charge) -> Result<Vec<(Option<u64>, Rational, Charge)>> {
    let mut out = Vec::new();
    let mut rest = Rational::one();
    for (&k, w) in candidate.atoms() {
        if w.is_positive() {
            rest -= w;
            out.push((Some(k), w.clone(), Charge::dirac(k)));
        }
    }
    if rest.is_positive() {
        let atoms = Measure::from_parts(candidate.atoms().iter().map(|(k, w)| (*k, w.clone())).collect::<Vec<_>>(), Vec::new(), Vec::new())?;
        let m = candidate.checked_sub(&atoms)?.scaled(&rest.recip());
        out.push((None, rest, Charge::new(m)?));
    }
    Ok(out)
}

/// Is `candidate` a best response for `player` against the rest of `profile`?
///
/// A mixture is a best response exactly when each of its parts is, so every
/// atom and the remainder are compared on their own against each pure action
/// up to `horizon` (all of them for a finite action space) and, beyond it,
/// against the game's tail bound. An atom is never compared with itself.
pub fn best_response(
    game: &CountableGame,
    player: usize,
    candidate: &Charge,
    profile: &ChargeProfile,
    horizon: u64,
    tol: &Rational,
) -> Result<BrOutcome> {
    let profile = profile.with(player, candidate.clone());
    game.check_profile(&profile)?;
    let (last, tail) = match game.action_space(player) {
        ActionSpace::Finite(m) => (m as u64, None),
        ActionSpace::Naturals => (horizon, Some(game.tail_bound(player, &profile, horizon)?)),
    };
    let pieces = parts(candidate)?;
    let mut t = tol.clone();
    let mut why = String::new();
    for _ in 0..=REFINEMENT_ROUNDS {
        let pure = |a: u64, t: &Rational| pure_action_payoff(game.payoff(player), player, a, &profile, t);
        let devs = (1..=last).map(|a| pure(a, &t)).collect::<Result<Vec<_>>>()?;
        let mut values = Vec::with_capacity(pieces.len());
        for (atom, _, c) in &pieces {
            values.push(match atom {
                Some(k) if *k <= last => devs[*k as usize - 1].clone(),
                Some(k) => pure(*k, &t)?,
                None => game.expected_payoff(player, &profile.with(player, c.clone()), &t)?,
            });
        }
        let mut unclear = None;
        for ((atom, _, _), value) in pieces.iter().zip(&values) {
            for (a, dev) in (1..=last).zip(&devs) {
                if *atom == Some(a) {
                    continue;
                }
                match at_least(value, dev) {
                    Cmp::Holds => {}
                    Cmp::Fails => {
                        return Ok(BrOutcome::Beaten {
                            part: *atom,
                            action: a,
                            value: value.clone(),
                            deviation: dev.clone(),
                        })
                    }
                    Cmp::Unclear => {
                        unclear.get_or_insert(format!("payoff {value} against action {a} at {dev}"));
                    }
                }
            }
            if let Some(tb) = &tail {
                if value.lower < *tb {
                    unclear.get_or_insert(format!(
                        "payoff {value} below the tail bound {tb} beyond {horizon}; raise the horizon"
                    ));
                }
            }
        }
        match unclear {
            None => {
                let total = |f: fn(&Bracket) -> &Rational| -> Rational {
                    pieces.iter().zip(&values).map(|((_, w, _), v)| w * f(v)).sum()
                };
                let value = Bracket {
                    lower: total(|b| &b.lower),
                    upper: total(|b| &b.upper),
                    index: None,
                };
                return Ok(BrOutcome::BestResponse {
                    value,
                    horizon: last,
                    tail,
                });
            }
            Some(w) => why = w,
        }
        t = t / Rational::int(2);
    }
    Err(Error::Inconclusive { tol: tol.clone(), detail: why })
}

/// Best-response outcome for every player at `profile`.
pub fn countable_nash(game: &CountableGame, profile: &ChargeProfile, horizon: u64, tol: &Rational) -> Result<Vec<BrOutcome>> {
    (0..game.players())
        .map(|i| best_response(game, i, profile.get(i), profile, horizon, tol))
        .collect()
}

/// One instance of the characterization: `τ` and `κ` in the neighbourhood
/// of `σ`, `τ` with the carrier, and `κ` a best response to `τ`.
#[allow(clippy::too_many_arguments)]
pub fn verify_perfection_witness(
    game: &CountableGame,
    sigma: &ChargeProfile,
    spec: &CarrierSpec,
    nbhd: &TychonovNbhd,
    tau: &ChargeProfile,
    kappa: &ChargeProfile,
    br_horizon: u64,
    tol: &Rational,
) -> Result<Report> {
    if !nbhd.center.same_as(sigma) {
        return Err(Error::invariant("neighbourhood is not centred at the profile"));
    }
    let n = game.players();
    if spec.players() != n || tau.len() != n || kappa.len() != n || sigma.len() != n {
        return Err(Error::ArityMismatch(format!("witness shapes do not match a {n}-player game")));
    }
    let mut report = Report::new(format!("perfection witness in {}", game.name()));
    report.push(Check::new("tau lies in the neighbourhood", nbhd_contains(nbhd, tau)?).value("epsilon", &nbhd.epsilon));
    report.push(Check::new("kappa lies in the neighbourhood", nbhd_contains(nbhd, kappa)?).value("epsilon", &nbhd.epsilon));
    for i in 0..n {
        report.push(
            Check::new(
                format!("tau_{} has the carrier", i + 1),
                carrier_includes(tau.get(i), spec.player(i))?,
            )
            .value("generators", fmt_sets(spec.player(i))),
        );
    }
    for i in 0..n {
        let claim = format!("kappa_{} is a best response to tau", i + 1);
        let check = match best_response(game, i, kappa.get(i), tau, br_horizon, tol)? {
            BrOutcome::BestResponse { value, horizon, tail } => {
                let c = Check::new(claim, true).value("payoff", value).value("horizon", horizon);
                match tail {
                    Some(t) => c.value("tail_bound", t),
                    None => c,
                }
            }
            BrOutcome::Beaten {
                part,
                action,
                value,
                deviation,
            } => Check::new(claim, false)
                .value("part", part.map_or("non-atomic".to_string(), |k| k.to_string()))
                .value("part_payoff", value)
                .value("action", action)
                .value("action_payoff", deviation),
        };
        report.push(check);
    }
    Ok(report)
}

pub(crate) fn fmt_sets(sets: &[SetExpr]) -> String {
    let s: Vec<String> = sets.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", s.join(", "))
}
