//! Exact two-phase simplex over rationals with Bland's rule.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

/// Maximize `objective · x` subject to the constraints and `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram {
            vars,
            objective: vec![Rational::zero(); vars],
            constraints: Vec::new(),
        }
    }

    pub fn maximize(&mut self, objective: Vec<Rational>) -> &mut Self {
        assert_eq!(objective.len(), self.vars, "objective length");
        self.objective = objective;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        assert_eq!(coeffs.len(), self.vars, "constraint length");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective, self.vars)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Columns `artificial_from..width` are artificial.
    artificial_from: usize,
    width: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.vars;
        let slack_count = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let art_count = lp
            .constraints
            .iter()
            .filter(|c| {
                let flip = c.rhs.is_negative();
                matches!(
                    (c.relation, flip),
                    (Relation::Ge, false) | (Relation::Le, true) | (Relation::Eq, _)
                )
            })
            .count();
        let width = n + slack_count + art_count;
        let mut rows = Vec::new();
        let mut basis = Vec::new();
        let (mut s, mut a) = (n, n + slack_count);
        for c in &lp.constraints {
            let flip = c.rhs.is_negative();
            let sign = |x: &Rational| if flip { -x.clone() } else { x.clone() };
            let mut row: Vec<Rational> = c.coeffs.iter().map(sign).collect();
            row.resize(width + 1, Rational::zero());
            row[width] = sign(&c.rhs);
            let rel = match (c.relation, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            match rel {
                Relation::Le => {
                    row[s] = Rational::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -Rational::one();
                    s += 1;
                    row[a] = Rational::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = Rational::one();
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            artificial_from: n + slack_count,
            width,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            *x *= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost` over columns `< allowed`; `false` if unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let reduced = |j: usize, t: &Tableau| {
                let mut v = cost[j].clone();
                for (i, row) in t.rows.iter().enumerate() {
                    if !row[j].is_zero() {
                        v -= &cost[t.basis[i]] * &row[j];
                    }
                }
                v
            };
            let Some(enter) = (0..allowed)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| reduced(j, self).is_positive())
            else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter].is_positive() {
                    let ratio = &row[self.width] / &row[enter];
                    let better = match &leave {
                        None => true,
                        Some((l, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, enter);
        }
    }

    fn value_of(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .zip(&self.rows)
            .map(|(&b, row)| &cost[b] * &row[self.width])
            .sum()
    }

    fn run(mut self, objective: &[Rational], vars: usize) -> LpOutcome {
        let mut phase1 = vec![Rational::zero(); self.width];
        for c in phase1.iter_mut().skip(self.artificial_from) {
            *c = -Rational::one();
        }
        self.optimize(&phase1, self.width);
        if self.value_of(&phase1).is_negative() {
            return LpOutcome::Infeasible;
        }
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.artificial_from {
                match (0..self.artificial_from).find(|&j| !self.rows[r][j].is_zero()) {
                    Some(j) => self.pivot(r, j),
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        let mut cost = vec![Rational::zero(); self.width];
        cost[..vars].clone_from_slice(objective);
        if !self.optimize(&cost, self.artificial_from) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < vars {
                x[b] = self.rows[i][self.width].clone();
            }
        }
        LpOutcome::Optimal {
            value: self.value_of(&cost),
            x,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| Rational::int(x)).collect()
    }

    #[test]
    fn textbook() {
        let mut lp = LinearProgram::new(2);
        lp.maximize(v(&[3, 5]))
            .constrain(v(&[1, 0]), Relation::Le, q(4, 1))
            .constrain(v(&[0, 2]), Relation::Le, q(12, 1))
            .constrain(v(&[3, 2]), Relation::Le, q(18, 1));
        assert_eq!(
            lp.solve(),
            LpOutcome::Optimal {
                value: q(36, 1),
                x: v(&[2, 6])
            }
        );
    }

    #[test]
    fn equality_and_infeasible() {
        let mut lp = LinearProgram::new(2);
        lp.maximize(v(&[1, 0]))
            .constrain(v(&[1, 1]), Relation::Eq, q(1, 1))
            .constrain(v(&[1, -1]), Relation::Ge, q(-1, 2));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(1, 1)),
            o => panic!("{o:?}"),
        }
        lp.constrain(v(&[1, 0]), Relation::Ge, q(2, 1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let mut un = LinearProgram::new(1);
        un.maximize(v(&[1])).constrain(v(&[1]), Relation::Ge, q(0, 1));
        assert_eq!(un.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::new(4);
        lp.maximize(vec![q(3, 4), q(-150, 1), q(1, 50), q(-6, 1)])
            .constrain(vec![q(1, 4), q(-60, 1), q(-1, 25), q(9, 1)], Relation::Le, q(0, 1))
            .constrain(vec![q(1, 2), q(-90, 1), q(-1, 50), q(3, 1)], Relation::Le, q(0, 1))
            .constrain(v(&[0, 0, 1, 0]), Relation::Le, q(1, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(1, 20)),
            o => panic!("{o:?}"),
        }
    }

    proptest! {
        /// A bounded LP in the plane against a grid search.
        #[test]
        fn matches_grid_search(
            c in proptest::collection::vec(-3i64..=3, 2),
            a in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 2), 1..4),
            b in proptest::collection::vec(0i64..=6, 3),
        ) {
            let mut lp = LinearProgram::new(2);
            lp.maximize(v(&c));
            lp.constrain(v(&[1, 0]), Relation::Le, q(6, 1));
            lp.constrain(v(&[0, 1]), Relation::Le, q(6, 1));
            for (row, rhs) in a.iter().zip(&b) {
                lp.constrain(v(row), Relation::Le, Rational::int(*rhs));
            }
            let LpOutcome::Optimal { value, x } = lp.solve() else {
                return Err(TestCaseError::fail("bounded feasible LP must be optimal"));
            };
            for (row, rhs) in a.iter().zip(&b) {
                let lhs = Rational::int(row[0]) * &x[0] + Rational::int(row[1]) * &x[1];
                prop_assert!(lhs <= Rational::int(*rhs));
            }
            // No feasible grid point beats the optimum.
            for i in 0..=72 {
                for j in 0..=72 {
                    let (x0, x1) = (q(i, 12), q(j, 12));
                    let ok = a.iter().zip(&b).all(|(row, rhs)| {
                        Rational::int(row[0]) * &x0 + Rational::int(row[1]) * &x1 <= Rational::int(*rhs)
                    });
                    if ok {
                        prop_assert!(Rational::int(c[0]) * &x0 + Rational::int(c[1]) * &x1 <= value);
                    }
                }
            }
        }
    }
}
