//! Built-in countable games whose payoffs are uniform limits of simple functions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{interval, Cell, SimpleFunction, UniformLimit};
use crate::rational::Rational;
use crate::sets::SetExpr;

#[derive(Debug, Default)]
struct Cache(Mutex<HashMap<(u64, bool), Arc<SimpleFunction>>>);

impl Cache {
    fn get(&self, n: u64, envelope: bool, build: impl FnOnce() -> Vec<Cell>) -> Arc<SimpleFunction> {
        let mut map = self.0.lock().expect("cache lock");
        map.entry((n, envelope))
            .or_insert_with(|| Arc::new(SimpleFunction::unchecked(2, build()).expect("two coordinates")))
            .clone()
    }
}

fn cell(a: SetExpr, b: SetExpr, value: Rational) -> Cell {
    Cell { rect: vec![a, b], value }
}

fn transpose(cells: Vec<Cell>) -> Vec<Cell> {
    cells
        .into_iter()
        .map(|mut c| {
            c.rect.swap(0, 1);
            c
        })
        .collect()
}

fn recip(k: u64) -> Rational {
    Rational::from(k).recip()
}

/// Two players on ℕ; the lower number wins and collects nothing, the higher
/// collects its reciprocal: `u_1(k, l) = 1/k` if `l < k`, else 0, and
/// symmetrically for player 2.
#[derive(Debug)]
pub struct VariantWald {
    player: usize,
    cache: Cache,
}

impl VariantWald {
    pub fn new(player: usize) -> Self {
        assert!(player < 2, "two players");
        VariantWald {
            player,
            cache: Cache::default(),
        }
    }

    fn oriented(&self, cells: Vec<Cell>) -> Vec<Cell> {
        if self.player == 0 {
            cells
        } else {
            transpose(cells)
        }
    }
}

impl UniformLimit for VariantWald {
    fn name(&self) -> String {
        format!("variant_wald[{}]", self.player + 1)
    }

    fn arity(&self) -> usize {
        2
    }

    fn value(&self, p: &[u64]) -> Rational {
        let (own, other) = if self.player == 0 { (p[0], p[1]) } else { (p[1], p[0]) };
        if other < own {
            recip(own)
        } else {
            Rational::zero()
        }
    }

    /// `u` with the own coordinate cut at `n`: cells `{k} × [1, k−1]` worth `1/k`.
    fn approximant(&self, n: u64) -> Arc<SimpleFunction> {
        self.cache.get(n, false, || {
            let mut cells = vec![cell(SetExpr::singleton(1), SetExpr::naturals(), Rational::zero())];
            for k in 2..=n {
                cells.push(cell(SetExpr::singleton(k), SetExpr::interval(1, k - 1), recip(k)));
                cells.push(cell(SetExpr::singleton(k), interval(k, None), Rational::zero()));
            }
            cells.push(cell(interval(n.max(1) + 1, None), SetExpr::naturals(), Rational::zero()));
            self.oriented(cells)
        })
    }

    fn envelope(&self, n: u64) -> Arc<SimpleFunction> {
        self.cache.get(n, true, || {
            self.oriented(vec![
                cell(SetExpr::interval(1, n), SetExpr::naturals(), Rational::zero()),
                cell(interval(n + 1, None), SetExpr::naturals(), recip(n + 1)),
            ])
        })
    }

    fn bound(&self, n: u64) -> Rational {
        recip(n + 1)
    }

    fn finite_increments(&self) -> Vec<bool> {
        vec![true, true]
    }
}

/// Player 1 picks T (1) or B (2), player 2 picks a natural `l`; zero-sum
/// with `u_1(T, l) = 1/l` and `u_1(B, l) = −1/l`. Naturals above 2 in
/// player 1's coordinate are not actions and pay 0.
#[derive(Debug)]
pub struct Example33 {
    player: usize,
    cache: Cache,
}

impl Example33 {
    pub fn new(player: usize) -> Self {
        assert!(player < 2, "two players");
        Example33 {
            player,
            cache: Cache::default(),
        }
    }

    fn sign(&self) -> Rational {
        if self.player == 0 {
            Rational::one()
        } else {
            -Rational::one()
        }
    }
}

impl UniformLimit for Example33 {
    fn name(&self) -> String {
        format!("example_3_3[{}]", self.player + 1)
    }

    fn arity(&self) -> usize {
        2
    }

    fn value(&self, p: &[u64]) -> Rational {
        match p[0] {
            1 => self.sign() * recip(p[1]),
            2 => -self.sign() * recip(p[1]),
            _ => Rational::zero(),
        }
    }

    fn approximant(&self, n: u64) -> Arc<SimpleFunction> {
        self.cache.get(n, false, || {
            let s = self.sign();
            let mut cells = Vec::new();
            for l in 1..=n {
                cells.push(cell(SetExpr::singleton(1), SetExpr::singleton(l), &s * recip(l)));
                cells.push(cell(SetExpr::singleton(2), SetExpr::singleton(l), -&s * recip(l)));
            }
            cells.push(cell(SetExpr::interval(1, 2), interval(n + 1, None), Rational::zero()));
            cells.push(cell(interval(3, None), SetExpr::naturals(), Rational::zero()));
            cells
        })
    }

    fn envelope(&self, n: u64) -> Arc<SimpleFunction> {
        self.cache.get(n, true, || {
            vec![
                cell(SetExpr::interval(1, 2), SetExpr::interval(1, n), Rational::zero()),
                cell(SetExpr::interval(1, 2), interval(n + 1, None), recip(n + 1)),
                cell(interval(3, None), SetExpr::naturals(), Rational::zero()),
            ]
        })
    }

    fn bound(&self, n: u64) -> Rational {
        recip(n + 1)
    }

    fn finite_increments(&self) -> Vec<bool> {
        vec![true, true]
    }
}

/// Player 1 picks U (1) or D (2) and gets 0 or 1. Player 2 picks `k ∈ ℕ`,
/// optionally with an extra action ∞, getting `1/k` against U and `−1/k²`
/// against D for `k ≥ 2`, and 0 at `k = 1` and at ∞.
///
/// With ∞ present, player 2's coordinate encodes ∞ as 1 and `k` as `k + 1`.
#[derive(Debug)]
pub struct HazyFilterGame {
    player: usize,
    with_infinity: bool,
    cache: Cache,
}

impl HazyFilterGame {
    pub fn new(player: usize, with_infinity: bool) -> Self {
        assert!(player < 2, "two players");
        HazyFilterGame {
            player,
            with_infinity,
            cache: Cache::default(),
        }
    }

    fn shift(&self) -> u64 {
        u64::from(self.with_infinity)
    }

    /// First coordinate value of player 2 with non-zero payoff.
    fn first_paying(&self) -> u64 {
        2 + self.shift()
    }
}

impl UniformLimit for HazyFilterGame {
    fn name(&self) -> String {
        let inf = if self.with_infinity { "_inf" } else { "" };
        format!("hazy_filter_game{inf}[{}]", self.player + 1)
    }

    fn arity(&self) -> usize {
        2
    }

    fn value(&self, p: &[u64]) -> Rational {
        if self.player == 0 {
            return if p[0] == 2 { Rational::one() } else { Rational::zero() };
        }
        if p[1] < self.first_paying() {
            return Rational::zero();
        }
        let k = p[1] - self.shift();
        match p[0] {
            1 => recip(k),
            2 => -recip(k * k),
            _ => Rational::zero(),
        }
    }

    fn approximant(&self, n: u64) -> Arc<SimpleFunction> {
        self.cache.get(n, false, || {
            if self.player == 0 {
                return vec![
                    cell(SetExpr::singleton(2), SetExpr::naturals(), Rational::one()),
                    cell(SetExpr::singleton(1), SetExpr::naturals(), Rational::zero()),
                    cell(interval(3, None), SetExpr::naturals(), Rational::zero()),
                ];
            }
            let lo = self.first_paying();
            let mut cells = vec![
                cell(SetExpr::interval(1, 2), SetExpr::interval(1, lo - 1), Rational::zero()),
                cell(interval(3, None), SetExpr::naturals(), Rational::zero()),
            ];
            for m in lo..=n {
                let k = m - self.shift();
                cells.push(cell(SetExpr::singleton(1), SetExpr::singleton(m), recip(k)));
                cells.push(cell(SetExpr::singleton(2), SetExpr::singleton(m), -recip(k * k)));
            }
            cells.push(cell(SetExpr::interval(1, 2), interval(n.max(lo - 1) + 1, None), Rational::zero()));
            cells
        })
    }

    fn envelope(&self, n: u64) -> Arc<SimpleFunction> {
        self.cache.get(n, true, || {
            if self.player == 0 {
                return vec![cell(SetExpr::naturals(), SetExpr::naturals(), Rational::zero())];
            }
            let cut = n.max(self.first_paying() - 1);
            vec![
                cell(SetExpr::interval(1, 2), SetExpr::interval(1, cut), Rational::zero()),
                cell(SetExpr::interval(1, 2), interval(cut + 1, None), self.bound(n)),
                cell(interval(3, None), SetExpr::naturals(), Rational::zero()),
            ]
        })
    }

    fn bound(&self, n: u64) -> Rational {
        if self.player == 0 {
            Rational::zero()
        } else {
            recip(n + 1 - self.shift())
        }
    }

    fn finite_increments(&self) -> Vec<bool> {
        vec![true, true]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::{integrate_bracket, pure_action_payoff, ChargeProfile, PayoffSpec};
    use crate::charges::Charge;
    use crate::rational::q;

    fn families() -> Vec<Arc<dyn UniformLimit>> {
        vec![
            Arc::new(VariantWald::new(0)),
            Arc::new(VariantWald::new(1)),
            Arc::new(Example33::new(0)),
            Arc::new(Example33::new(1)),
            Arc::new(HazyFilterGame::new(0, false)),
            Arc::new(HazyFilterGame::new(1, false)),
            Arc::new(HazyFilterGame::new(0, true)),
            Arc::new(HazyFilterGame::new(1, true)),
        ]
    }

    #[test]
    fn approximants_partition_and_pass_spot_check() {
        for u in families() {
            for n in [1, 2, 3, 7] {
                let f = u.approximant(n);
                SimpleFunction::new(2, f.cells().to_vec()).unwrap();
                SimpleFunction::new(2, u.envelope(n).cells().to_vec()).unwrap();
            }
            PayoffSpec::uniform_limit(u.clone()).unwrap();
        }
    }

    #[test]
    fn increments_have_finite_sides() {
        for u in families() {
            let d = u.approximant(9).minus(&u.approximant(3)).unwrap();
            for c in d.nonzero_cells() {
                for (side, finite) in c.rect.iter().zip(u.finite_increments()) {
                    assert!(!finite || side.is_finite(), "{}: {:?}", u.name(), c);
                }
            }
        }
    }

    #[test]
    fn wald_table() {
        let u = VariantWald::new(0);
        assert_eq!(u.approximant(3).evaluate(&[3, 1]), q(1, 3));
        assert_eq!(u.value(&[2, 1]), q(1, 2));
        assert_eq!(u.value(&[1, 5]), q(0, 1));
        assert_eq!(u.value(&[4, 4]), q(0, 1));
        assert_eq!(VariantWald::new(1).value(&[1, 5]), q(1, 5));
    }

    #[test]
    fn example_3_3_pure_payoffs() {
        let spec = PayoffSpec::UniformLimit(Arc::new(Example33::new(0)));
        let tiny = q(1, 1_000_000);
        let diffuse = ChargeProfile::new(vec![Charge::dirac(1), "diffuse".parse().unwrap()]);
        let b = pure_action_payoff(&spec, 0, 1, &diffuse, &tiny).unwrap();
        assert!(b.contains(&q(0, 1)));
        let dn = ChargeProfile::new(vec![Charge::dirac(2), Charge::dirac(5)]);
        assert_eq!(integrate_bracket(&dn, &spec, &tiny).unwrap().lower, q(-1, 5));
    }

    #[test]
    fn hazy_encodings_agree() {
        let plain = HazyFilterGame::new(1, false);
        let inf = HazyFilterGame::new(1, true);
        for a in 1..=2 {
            for k in 1..40 {
                assert_eq!(plain.value(&[a, k]), inf.value(&[a, k + 1]));
            }
            assert_eq!(inf.value(&[a, 1]), q(0, 1));
        }
        assert_eq!(plain.value(&[1, 3]), q(1, 3));
        assert_eq!(plain.value(&[2, 3]), q(-1, 9));
    }
}
