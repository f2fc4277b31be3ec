//! Payoff-respecting action maps, reduced forms and the finite shadow of
//! invariance of perfect equilibrium.

use std::collections::BTreeMap;
use std::fmt;

use crate::charges::{pushforward_charge, NatMap, Target};
use crate::error::{Error, Result};
use crate::finite::{perfect_decide_2p, FiniteGame, MixedProfile, Perfection2p};
use crate::integration::{ChargeProfile, PayoffSpec, SimpleFunction};
use crate::perfection::{ActionSpace, CountableGame};
use crate::rational::Rational;
use crate::report::{Check, Report};
use crate::sets::SetExpr;

/// Approximant index up to which uniform-limit payoffs are compared.
pub const RESPECT_INDEX: u64 = 32;

/// One surjective map per player.
#[derive(Clone, Debug)]
pub struct ActionMap(Vec<NatMap>);

impl ActionMap {
    pub fn new(maps: Vec<NatMap>) -> Result<Self> {
        for (i, m) in maps.iter().enumerate() {
            if !m.is_surjective() {
                return Err(Error::invariant(format!("map of player {} is not surjective", i + 1)));
            }
        }
        Ok(ActionMap(maps))
    }

    /// Finite tables with 0-based entries: `tables[i][a]` is the image of action `a`.
    pub fn from_tables(tables: &[Vec<usize>], target_counts: &[usize]) -> Result<Self> {
        if tables.len() != target_counts.len() {
            return Err(Error::ArityMismatch(format!(
                "{} tables for {} target players",
                tables.len(),
                target_counts.len()
            )));
        }
        let maps = tables
            .iter()
            .zip(target_counts)
            .map(|(t, &m)| {
                let ex: BTreeMap<u64, u64> = t.iter().enumerate().map(|(a, &b)| (a as u64 + 1, b as u64 + 1)).collect();
                NatMap::new(ex, None, Some(m as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(maps)
    }

    pub fn identity(counts: &[usize]) -> Self {
        let tables: Vec<Vec<usize>> = counts.iter().map(|&c| (0..c).collect()).collect();
        Self::from_tables(&tables, counts).expect("identity tables")
    }

    pub fn players(&self) -> usize {
        self.0.len()
    }

    pub fn player(&self, i: usize) -> &NatMap {
        &self.0[i]
    }

    /// 0-based image table of player `i` over `count` source actions.
    pub fn table(&self, i: usize, count: usize) -> Result<Vec<usize>> {
        (1..=count as u64)
            .map(|a| {
                self.0[i]
                    .apply(a)
                    .map(|b| b as usize - 1)
                    .ok_or_else(|| Error::ShapeMismatch(format!("action {a} of player {} has no image", i + 1)))
            })
            .collect()
    }

    pub fn push_profile(&self, profile: &MixedProfile, target_counts: &[usize]) -> Result<MixedProfile> {
        if profile.rows().len() != self.players() || target_counts.len() != self.players() {
            return Err(Error::ArityMismatch("profile, map and target differ in players".into()));
        }
        let rows = profile
            .rows()
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let t = self.table(i, row.len())?;
                let mut out = vec![Rational::zero(); target_counts[i]];
                for (a, w) in row.iter().enumerate() {
                    let b = *out
                        .get(t[a])
                        .map(|_| &t[a])
                        .ok_or_else(|| Error::ShapeMismatch(format!("image {} beyond the target", t[a] + 1)))?;
                    out[b] += w;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        MixedProfile::new(rows)
    }

    pub fn push_charges(&self, profile: &ChargeProfile) -> Result<ChargeProfile> {
        if profile.len() != self.players() {
            return Err(Error::ArityMismatch("profile and map differ in players".into()));
        }
        let charges = (0..self.players())
            .map(|i| pushforward_charge(profile.get(i), &self.0[i]))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChargeProfile::new(charges))
    }
}

impl fmt::Display for ActionMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Respect {
    Holds,
    /// `u_i(point) ≠ v_i(φ(point))`.
    Fails { player: usize, point: Vec<u64>, gap: Rational },
    /// Approximants up to `index` agree within their error bounds.
    HoldsUpTo { index: u64, slack: Rational },
}

impl Respect {
    pub fn holds(&self) -> bool {
        !matches!(self, Respect::Fails { .. })
    }
}

fn level(spec: &PayoffSpec, n: u64) -> (SimpleFunction, Rational) {
    match spec {
        PayoffSpec::UniformLimit(u) => ((*u.approximant(n)).clone(), u.bound(n)),
        other => (other.as_simple().expect("simple"), Rational::zero()),
    }
}

fn domain(space: ActionSpace) -> SetExpr {
    match space {
        ActionSpace::Finite(m) => SetExpr::interval(1, m as u64),
        ActionSpace::Naturals => SetExpr::naturals(),
    }
}

/// Largest gap between `f` and `g∘φ` on the source domain, beyond `slack`,
/// with a point where it occurs.
fn worst_gap(f: &SimpleFunction, g: &SimpleFunction, phi: &ActionMap, dom: &[SetExpr], slack: &Rational) -> Option<(Vec<u64>, Rational)> {
    let pulled: Vec<(Vec<SetExpr>, &Rational)> = g
        .cells()
        .iter()
        .map(|c| {
            let rect = c.rect.iter().enumerate().map(|(i, s)| phi.player(i).preimage(s).intersection(&dom[i])).collect();
            (rect, &c.value)
        })
        .collect();
    for c in f.cells() {
        let own: Vec<SetExpr> = c.rect.iter().zip(dom).map(|(s, d)| s.intersection(d)).collect();
        if own.iter().any(SetExpr::is_empty) {
            continue;
        }
        for (rect, v) in &pulled {
            let gap = (&c.value - *v).abs();
            if gap <= *slack {
                continue;
            }
            let meet: Vec<SetExpr> = own.iter().zip(rect).map(|(a, b)| a.intersection(b)).collect();
            if meet.iter().all(|s| !s.is_empty()) {
                let point = meet.iter().map(|s| s.nf().min_element().expect("non-empty")).collect();
                return Some((point, gap));
            }
        }
    }
    None
}

/// Whether `u_i = v_i ∘ φ` for every player. Simple payoffs are compared
/// exactly cell by cell; uniform limits on approximants up to
/// [`RESPECT_INDEX`], where a gap beyond the two error bounds refutes.
pub fn respects_payoffs(source: &CountableGame, target: &CountableGame, phi: &ActionMap) -> Result<Respect> {
    let n = source.players();
    if target.players() != n || phi.players() != n {
        return Err(Error::ArityMismatch(format!(
            "{n}-player source, {}-player target, {}-player map",
            target.players(),
            phi.players()
        )));
    }
    let dom: Vec<SetExpr> = (0..n).map(|i| domain(source.action_space(i))).collect();
    for i in 0..n {
        let image = phi.player(i).preimage(&domain(target.action_space(i)));
        if !dom[i].is_subset(&image) {
            return Err(Error::ShapeMismatch(format!("map of player {} leaves the target actions", i + 1)));
        }
    }
    let exact = (0..n).all(|i| {
        !matches!(source.payoff(i), PayoffSpec::UniformLimit(_)) && !matches!(target.payoff(i), PayoffSpec::UniformLimit(_))
    });
    let mut index = 1u64;
    let mut widest = Rational::zero();
    loop {
        for i in 0..n {
            let (f, bf) = level(source.payoff(i), index);
            let (g, bg) = level(target.payoff(i), index);
            let slack = &bf + &bg;
            if let Some((point, gap)) = worst_gap(&f, &g, phi, &dom, &slack) {
                return Ok(Respect::Fails {
                    player: i,
                    point,
                    gap: gap - &slack,
                });
            }
            widest = widest.max(slack);
        }
        if exact {
            return Ok(Respect::Holds);
        }
        if index >= RESPECT_INDEX {
            return Ok(Respect::HoldsUpTo { index, slack: widest });
        }
        index *= 2;
        widest = Rational::zero();
    }
}

/// Merges payoff-equivalent actions of each player, keeping the first of
/// each class. The map sends every action to its class.
pub fn reduced_form(game: &FiniteGame) -> (FiniteGame, ActionMap) {
    let counts = game.action_counts().to_vec();
    let n = counts.len();
    let mut tables = Vec::with_capacity(n);
    let mut reps: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let signature = |a: usize| -> Vec<Rational> {
            game.opposing_profiles(i)
                .flat_map(|mut b| {
                    b[i] = a;
                    (0..n).map(move |j| game.payoff(j, &b).clone()).collect::<Vec<_>>()
                })
                .collect()
        };
        let mut classes: Vec<(Vec<Rational>, usize)> = Vec::new();
        let mut table = Vec::with_capacity(counts[i]);
        for a in 0..counts[i] {
            let s = signature(a);
            match classes.iter().position(|(t, _)| *t == s) {
                Some(c) => table.push(c),
                None => {
                    table.push(classes.len());
                    classes.push((s, a));
                }
            }
        }
        reps.push(classes.iter().map(|(_, a)| *a).collect());
        tables.push(table);
    }
    let new_counts: Vec<usize> = reps.iter().map(Vec::len).collect();
    let size: usize = new_counts.iter().product();
    let mut payoffs = vec![Vec::with_capacity(size); n];
    let mut idx = vec![0usize; n];
    for _ in 0..size {
        let orig: Vec<usize> = idx.iter().enumerate().map(|(i, &c)| reps[i][c]).collect();
        for (j, p) in payoffs.iter_mut().enumerate() {
            p.push(game.payoff(j, &orig).clone());
        }
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < new_counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    let labels: Vec<Vec<String>> = reps
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().map(|&a| game.labels(i)[a].clone()).collect())
        .collect();
    let reduced = FiniteGame::new(new_counts.clone(), payoffs)
        .and_then(|g| g.with_labels(labels))
        .expect("reduced shapes agree");
    let map = ActionMap::from_tables(&tables, &new_counts).expect("class maps are onto");
    (reduced, map)
}

/// Pushes each supplied equilibrium of `source` through `phi` and checks
/// that perfection, certified in `source`, is certified again in `target`.
pub fn invariance_check_finite(
    source: &FiniteGame,
    target: &FiniteGame,
    phi: &ActionMap,
    equilibria: &[MixedProfile],
) -> Result<Report> {
    if source.players() != 2 || target.players() != 2 {
        return Err(Error::UncertifiableInput(format!(
            "perfection is only certified for two players, got {}",
            source.players().max(target.players())
        )));
    }
    let respect = respects_payoffs(
        &CountableGame::from_finite("source", source),
        &CountableGame::from_finite("target", target),
        phi,
    )?;
    if !respect.holds() {
        return Err(Error::invariant(format!("the map does not respect payoffs: {respect:?}")));
    }
    let mut r = Report::new("invariance");
    for eq in equilibria {
        let certified = perfect_decide_2p(source, eq)?.is_perfect();
        r.push(Check::new(format!("{eq} is perfect in the source"), certified));
        let pushed = phi.push_profile(eq, target.action_counts())?;
        let verdict = perfect_decide_2p(target, &pushed)?;
        r.push(Check::new(format!("its image {pushed} is perfect in the target"), verdict.is_perfect()));
    }
    Ok(r)
}

/// The finite game behind a countable one; games with an infinite action
/// space are refused.
pub fn finite_shadow(game: &CountableGame) -> Result<FiniteGame> {
    let mut counts = Vec::new();
    for i in 0..game.players() {
        match game.action_space(i) {
            ActionSpace::Finite(m) => counts.push(m),
            ActionSpace::Naturals => {
                return Err(Error::NotApplicable(format!(
                    "{} has infinitely many actions for player {}; perfection there is checked by scenario_verify, not by finite certification",
                    game.name(),
                    i + 1
                )))
            }
        }
    }
    let mut payoffs = Vec::new();
    for i in 0..game.players() {
        match game.payoff(i) {
            PayoffSpec::FiniteMatrix { tensor, .. } => payoffs.push(tensor.clone()),
            _ => {
                let mut t = Vec::new();
                let mut idx = vec![1u64; counts.len()];
                loop {
                    t.push(game.payoff(i).value(&idx));
                    let mut k = counts.len();
                    loop {
                        if k == 0 {
                            break;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] <= counts[k] as u64 {
                            break;
                        }
                        idx[k] = 1;
                    }
                    if idx.iter().all(|&x| x == 1) {
                        break;
                    }
                }
                payoffs.push(t);
            }
        }
    }
    FiniteGame::new(counts, payoffs)
}

/// Certifies that every perfect equilibrium among `candidates` lands in `allowed`.
pub fn pushforward_check(
    source: &FiniteGame,
    target: &FiniteGame,
    phi: &ActionMap,
    candidates: &[MixedProfile],
    allowed: &[MixedProfile],
) -> Result<Report> {
    let mut r = Report::new("pushforward");
    let mut found = 0;
    for c in candidates {
        if let Perfection2p::Perfect { .. } = perfect_decide_2p(source, c)? {
            found += 1;
            let pushed = phi.push_profile(c, target.action_counts())?;
            let inside = allowed.contains(&pushed);
            let again = perfect_decide_2p(target, &pushed)?.is_perfect();
            r.push(Check::new(format!("perfect {c} maps to {pushed}, an allowed perfect profile"), inside && again));
        }
    }
    r.push(Check::new("some candidate is perfect", found > 0).value("perfect_candidates", found));
    Ok(r)
}

/// A coordination game paying 1 only at `(1, 1)`, on `m` actions per
/// player, with the map onto its reduced 2×2 form: action 1 goes to D and
/// every other action to U.
pub fn coordination_embedding(m: usize) -> Result<(FiniteGame, FiniteGame, ActionMap)> {
    if m < 2 {
        return Err(Error::invariant("the embedding needs at least 2 actions"));
    }
    let mut u = vec![vec![Rational::zero(); m]; m];
    u[0][0] = Rational::one();
    let source = FiniteGame::bimatrix(&u, &u)?;
    let z = Rational::zero();
    let v = vec![vec![z.clone(), z.clone()], vec![z, Rational::one()]];
    let target = FiniteGame::bimatrix(&v, &v)?.with_labels(vec![vec!["U".into(), "D".into()], vec!["L".into(), "R".into()]])?;
    let table: Vec<usize> = (0..m).map(|a| if a == 0 { 1 } else { 0 }).collect();
    let phi = ActionMap::from_tables(&[table.clone(), table], &[2, 2])?;
    Ok((source, target, phi))
}

/// Player 2's map from the hazy filter game with ∞ onto the game without:
/// ∞ and 1 both go to 1.
pub fn hazy_collapse() -> ActionMap {
    let p1 = NatMap::new(BTreeMap::from([(1, 1), (2, 2)]), None, Some(2)).expect("identity on two actions");
    let p2 = NatMap::new(BTreeMap::from([(1, 1)]), Some((1, vec![Target::Shift(-1)])), None).expect("collapse");
    ActionMap::new(vec![p1, p2]).expect("onto")
}
