use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{integrate_measures, integrate_simple, interval, Cell, ChargeProfile, SimpleFunction};
use crate::charges::{Charge, Measure};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sets::SetExpr;

/// A payoff `u` given as the uniform limit of simple functions `f_n`.
///
/// `envelope(n)` is a non-negative simple function with `|u − f_n| ≤ envelope(n)`
/// pointwise and `envelope(n) ≤ bound(n)`.
pub trait UniformLimit: fmt::Debug + Send + Sync {
    fn name(&self) -> String;
    fn arity(&self) -> usize;
    /// Closed form of `u` at a pure profile.
    fn value(&self, point: &[u64]) -> Rational;
    fn approximant(&self, n: u64) -> Arc<SimpleFunction>;
    fn envelope(&self, n: u64) -> Arc<SimpleFunction>;
    fn bound(&self, n: u64) -> Rational;
    /// Coordinates `j` for which every cell of every increment `f_m − f_n`
    /// has a finite `j`-th side. A diffuse charge there sees no increment,
    /// so `f_1` already integrates exactly.
    fn finite_increments(&self) -> Vec<bool>;
    fn max_index(&self) -> u64 {
        1 << 20
    }
}

#[derive(Clone, Debug)]
pub enum PayoffSpec {
    /// Payoffs of one player on a finite game, flat with player 0 most
    /// significant; action `a` is the natural `a + 1`.
    FiniteMatrix { counts: Vec<usize>, tensor: Vec<Rational> },
    Simple(SimpleFunction),
    UniformLimit(Arc<dyn UniformLimit>),
}

const GRID: u64 = 32;
const GRID_RANDOM: usize = 64;

impl PayoffSpec {
    /// Wraps a uniform limit after spot-checking its error envelope.
    pub fn uniform_limit(u: Arc<dyn UniformLimit>) -> Result<Self> {
        check_envelope(u.as_ref())?;
        Ok(PayoffSpec::UniformLimit(u))
    }

    pub fn arity(&self) -> usize {
        match self {
            PayoffSpec::FiniteMatrix { counts, .. } => counts.len(),
            PayoffSpec::Simple(f) => f.arity(),
            PayoffSpec::UniformLimit(u) => u.arity(),
        }
    }

    pub fn value(&self, point: &[u64]) -> Rational {
        match self {
            PayoffSpec::FiniteMatrix { counts, tensor } => {
                let mut idx = 0usize;
                for (&x, &c) in point.iter().zip(counts) {
                    if x == 0 || x as usize > c {
                        return Rational::zero();
                    }
                    idx = idx * c + (x as usize - 1);
                }
                tensor[idx].clone()
            }
            PayoffSpec::Simple(f) => f.evaluate(point),
            PayoffSpec::UniformLimit(u) => u.value(point),
        }
    }

    /// Exact simple form, when there is one.
    pub fn as_simple(&self) -> Option<SimpleFunction> {
        match self {
            PayoffSpec::FiniteMatrix { counts, tensor } => Some(finite_as_simple(counts, tensor)),
            PayoffSpec::Simple(f) => Some(f.clone()),
            PayoffSpec::UniformLimit(_) => None,
        }
    }
}

fn finite_as_simple(counts: &[usize], tensor: &[Rational]) -> SimpleFunction {
    // Per coordinate: {1}, …, {m}, [m+1, ∞).
    let parts: Vec<Vec<SetExpr>> = counts
        .iter()
        .map(|&m| {
            let mut v: Vec<SetExpr> = (1..=m as u64).map(SetExpr::singleton).collect();
            v.push(interval(m as u64 + 1, None));
            v
        })
        .collect();
    let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
    let mut cells = Vec::new();
    let mut idx = vec![0usize; counts.len()];
    'outer: loop {
        let inside = idx.iter().zip(counts).all(|(i, c)| i < c);
        let value = if inside {
            tensor[idx.iter().zip(counts).fold(0, |acc, (i, c)| acc * c + i)].clone()
        } else {
            Rational::zero()
        };
        cells.push(Cell {
            rect: idx.iter().zip(&parts).map(|(&i, p)| p[i].clone()).collect(),
            value,
        });
        let mut k = idx.len();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    SimpleFunction::unchecked(counts.len(), cells).expect("arity matches")
}

fn check_envelope(u: &dyn UniformLimit) -> Result<()> {
    let arity = u.arity();
    let mut points: Vec<Vec<u64>> = Vec::new();
    if arity <= 3 {
        let total = GRID.pow(arity as u32);
        for mut code in 0..total {
            let mut p = vec![0u64; arity];
            for x in p.iter_mut().rev() {
                *x = code % GRID + 1;
                code /= GRID;
            }
            points.push(p);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..GRID_RANDOM {
        points.push((0..arity).map(|_| rng.gen_range(GRID + 1..=100_000)).collect());
    }
    for n in [1u64, 2, 4, 8, 16, 32, 64] {
        let f = u.approximant(n);
        let g = u.envelope(n);
        let b = u.bound(n);
        for p in &points {
            let err = (u.value(p) - f.evaluate(p)).abs();
            let env = g.evaluate(p);
            if err > env || env > b {
                return Err(Error::invariant(format!(
                    "{}: approximant {n} misses by {err} at {p:?} (envelope {env}, bound {b})",
                    u.name()
                )));
            }
        }
    }
    Ok(())
}

/// A closed interval holding an expectation.
#[derive(Clone, Debug, PartialEq)]
pub struct Bracket {
    pub lower: Rational,
    pub upper: Rational,
    /// Approximant index used, if any.
    pub index: Option<u64>,
}

impl Bracket {
    pub fn exact(v: Rational) -> Self {
        Bracket {
            lower: v.clone(),
            upper: v,
            index: None,
        }
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lower <= v && v <= &self.upper
    }

    /// Every point of `self` is strictly below every point of `other`.
    pub fn below(&self, other: &Bracket) -> bool {
        self.upper < other.lower
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lower)
        } else {
            write!(f, "[{}, {}]", self.lower, self.upper)
        }
    }
}

/// Expectation of `spec` under `profile`, exact for simple payoffs and
/// bracketed to width at most `tol` for uniform limits.
///
/// The profile is split into countably additive and diffuse parts and the
/// expectation into the `2^n` product terms. A term with a diffuse factor on
/// a finite-increment coordinate is exact; the rest are bracketed by
/// `κ(f_n) ± κ(envelope(n))`, doubling `n` until the total width fits.
pub fn integrate_bracket(profile: &ChargeProfile, spec: &PayoffSpec, tol: &Rational) -> Result<Bracket> {
    if !tol.is_positive() {
        return Err(Error::invariant(format!("tolerance {tol} must be positive")));
    }
    if profile.len() != spec.arity() {
        return Err(Error::ArityMismatch(format!(
            "payoff of arity {} against {} charges",
            spec.arity(),
            profile.len()
        )));
    }
    let u = match spec {
        PayoffSpec::UniformLimit(u) => u,
        other => {
            let f = other.as_simple().expect("finite and simple payoffs are simple");
            return Ok(Bracket::exact(integrate_simple(profile, &f)?));
        }
    };
    let arity = u.arity();
    let parts: Vec<[Measure; 2]> = profile
        .charges()
        .iter()
        .map(|k| [k.ca_part(), k.diffuse_part()])
        .collect();
    let flags = u.finite_increments();
    let mut exact_terms: Vec<Vec<&Measure>> = Vec::new();
    let mut open_terms: Vec<Vec<&Measure>> = Vec::new();
    for mask in 0u32..(1 << arity) {
        let term: Vec<&Measure> = (0..arity).map(|i| &parts[i][((mask >> i) & 1) as usize]).collect();
        if term.iter().any(|m| m.is_zero()) {
            continue;
        }
        if (0..arity).any(|i| (mask >> i) & 1 == 1 && flags[i]) {
            exact_terms.push(term);
        } else {
            open_terms.push(term);
        }
    }
    let mut fixed = Rational::zero();
    if !exact_terms.is_empty() {
        let f1 = u.approximant(1);
        for t in &exact_terms {
            fixed += integrate_measures(t, &f1)?;
        }
    }
    if open_terms.is_empty() {
        return Ok(Bracket::exact(fixed));
    }
    let mut n = 1u64;
    while n <= u.max_index() {
        let f = u.approximant(n);
        let g = u.envelope(n);
        let mut centre = fixed.clone();
        let mut err = Rational::zero();
        for t in &open_terms {
            centre += integrate_measures(t, &f)?;
            err += integrate_measures(t, &g)?;
        }
        if &err + &err <= *tol {
            return Ok(Bracket {
                lower: &centre - &err,
                upper: centre + err,
                index: Some(n),
            });
        }
        n *= 2;
    }
    Err(Error::NoApproximant { tol: tol.clone() })
}

/// Expectation for `player` playing the pure `action` against the rest of `profile`.
pub fn pure_action_payoff(
    spec: &PayoffSpec,
    player: usize,
    action: u64,
    profile: &ChargeProfile,
    tol: &Rational,
) -> Result<Bracket> {
    if player >= profile.len() {
        return Err(Error::ArityMismatch(format!("no player {}", player + 1)));
    }
    integrate_bracket(&profile.with(player, Charge::dirac(action)), spec, tol)
}
