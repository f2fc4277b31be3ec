//! Canonical normal form of an eventually periodic subset of ℕ = {1, 2, …}.
//!
//! Below the threshold `T` membership is listed as sorted, disjoint,
//! non-adjacent inclusive runs; from `T` on, `n` is a member iff
//! `mask[n % period]`. Every constructor returns the canonical form (minimal
//! period, then minimal threshold), so structural equality is set equality.

use num_integer::Integer;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalForm {
    threshold: u64,
    runs: Vec<(u64, u64)>,
    period: u64,
    mask: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Empty,
    Finite(u64),
    Infinite,
}

#[derive(Clone, Copy)]
pub(crate) enum Op {
    And,
    Or,
}

impl Op {
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Op::And => a && b,
            Op::Or => a || b,
        }
    }
}

impl NormalForm {
    fn build(threshold: u64, runs: Vec<(u64, u64)>, period: u64, mask: Vec<bool>) -> Self {
        debug_assert!(threshold >= 1 && period >= 1 && mask.len() as u64 == period);
        let mut nf = NormalForm {
            threshold,
            runs,
            period,
            mask,
        };
        nf.canonicalize();
        nf
    }

    pub fn empty() -> Self {
        Self::build(1, Vec::new(), 1, vec![false])
    }

    pub fn full() -> Self {
        Self::build(1, Vec::new(), 1, vec![true])
    }

    pub fn finite(members: &[u64]) -> Self {
        let mut v: Vec<u64> = members.iter().copied().filter(|&n| n >= 1).collect();
        v.sort_unstable();
        v.dedup();
        let threshold = v.last().map_or(1, |m| m + 1);
        Self::build(threshold, runs_from_sorted(&v), 1, vec![false])
    }

    /// `{a, a+d, a+2d, …} ∩ ℕ`.
    pub fn progression(offset: u64, period: u64) -> Self {
        assert!(period >= 1, "progression period must be positive");
        let mut mask = vec![false; period as usize];
        mask[(offset % period) as usize] = true;
        Self::build(offset.max(1), Vec::new(), period, mask)
    }

    /// `[lo, hi]` or `[lo, ∞)` intersected with ℕ.
    pub fn interval(lo: u64, hi: Option<u64>) -> Self {
        let lo = lo.max(1);
        match hi {
            Some(hi) if hi < lo => Self::empty(),
            Some(hi) => Self::build(hi + 1, vec![(lo, hi)], 1, vec![false]),
            None => Self::build(lo, Vec::new(), 1, vec![true]),
        }
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Membership runs strictly below the threshold.
    pub fn prefix_runs(&self) -> &[(u64, u64)] {
        &self.runs
    }

    pub fn contains(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        if n >= self.threshold {
            return self.mask[(n % self.period) as usize];
        }
        in_runs(&self.runs, n)
    }

    pub fn classify(&self) -> Classification {
        if self.mask.iter().any(|&b| b) {
            return Classification::Infinite;
        }
        let card: u64 = self.runs.iter().map(|(a, b)| b - a + 1).sum();
        if card == 0 {
            Classification::Empty
        } else {
            Classification::Finite(card)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.classify() == Classification::Empty
    }

    pub fn is_finite(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    /// Largest element, when the set is finite and non-empty.
    pub fn max_element(&self) -> Option<u64> {
        if self.is_infinite() {
            return None;
        }
        self.runs.last().map(|r| r.1)
    }

    pub fn min_element(&self) -> Option<u64> {
        if let Some(r) = self.runs.first() {
            return Some(r.0);
        }
        (0..self.period)
            .map(|j| self.threshold + j)
            .find(|&n| self.mask[(n % self.period) as usize])
    }

    pub fn complement(&self) -> Self {
        let runs = complement_runs(&self.runs, 1, self.threshold - 1);
        let mask = self.mask.iter().map(|b| !b).collect();
        Self::build(self.threshold, runs, self.period, mask)
    }

    pub(crate) fn combine(&self, other: &Self, op: Op) -> Self {
        let threshold = self.threshold.max(other.threshold);
        let period = self.period.lcm(&other.period);
        let mask = (0..period)
            .map(|r| {
                op.apply(
                    self.mask[(r % self.period) as usize],
                    other.mask[(r % other.period) as usize],
                )
            })
            .collect();
        let a = self.runs_in(1, threshold - 1);
        let b = other.runs_in(1, threshold - 1);
        let runs = merge_runs(&a, &b, op);
        Self::build(threshold, runs, period, mask)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, Op::Or)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.combine(other, Op::And)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersection(&other.complement())
    }

    /// True iff `self \ other` is finite.
    pub fn almost_subset(&self, other: &Self) -> bool {
        let period = self.period.lcm(&other.period);
        (0..period).all(|r| {
            !self.mask[(r % self.period) as usize] || other.mask[(r % other.period) as usize]
        })
    }

    /// `{n + s : n ∈ self} ∩ ℕ` for a signed shift `s`.
    pub fn shift(&self, s: i64) -> Self {
        if s == 0 {
            return self.clone();
        }
        let p = self.period;
        if s > 0 {
            let s = s as u64;
            let runs = self.runs.iter().map(|&(a, b)| (a + s, b + s)).collect();
            let mask = (0..p).map(|r| self.mask[((r + p - s % p) % p) as usize]).collect();
            Self::build(self.threshold + s, runs, p, mask)
        } else {
            let s = s.unsigned_abs();
            let runs = self
                .runs
                .iter()
                .filter(|&&(_, b)| b > s)
                .map(|&(a, b)| (a.saturating_sub(s).max(1), b - s))
                .collect();
            let mask = (0..p).map(|r| self.mask[((r + s) % p) as usize]).collect();
            let threshold = if self.threshold > s { self.threshold - s } else { 1 };
            let runs = if self.threshold > s { runs } else { Vec::new() };
            Self::build(threshold, runs, p, mask)
        }
    }

    /// Membership runs of the set restricted to `[lo, hi]`.
    pub fn runs_in(&self, lo: u64, hi: u64) -> Vec<(u64, u64)> {
        let lo = lo.max(1);
        let mut out = Vec::new();
        if lo > hi {
            return out;
        }
        for &(a, b) in &self.runs {
            if b < lo || a > hi {
                continue;
            }
            out.push((a.max(lo), b.min(hi)));
        }
        let start = lo.max(self.threshold);
        if start <= hi {
            let periodic = periodic_runs(&self.mask, self.period, start, hi);
            match (out.last_mut(), periodic.first()) {
                (Some(last), Some(first)) if last.1 + 1 == first.0 => {
                    last.1 = first.1;
                    out.extend_from_slice(&periodic[1..]);
                }
                _ => out.extend(periodic),
            }
        }
        out
    }

    fn canonicalize(&mut self) {
        let p = self.period as usize;
        let mut best = p;
        for d in 1..p {
            if p % d == 0 && (0..p).all(|r| self.mask[r] == self.mask[r % d]) {
                best = d;
                break;
            }
        }
        if best < p {
            self.mask.truncate(best);
            self.period = best as u64;
        }
        let all_true = self.mask.iter().all(|&b| b);
        let all_false = self.mask.iter().all(|&b| !b);
        while self.threshold > 1 {
            let n = self.threshold - 1;
            if all_true {
                match self.runs.last() {
                    Some(&(a, b)) if b == n => {
                        self.threshold = a;
                        self.runs.pop();
                    }
                    _ => break,
                }
            } else if all_false {
                match self.runs.last() {
                    Some(&(_, b)) if b == n => break,
                    Some(&(_, b)) => self.threshold = b + 1,
                    None => self.threshold = 1,
                }
            } else {
                let member = self.runs.last().is_some_and(|&(_, b)| b == n);
                if member != self.mask[(n % self.period) as usize] {
                    break;
                }
                if member {
                    let last = self.runs.last_mut().expect("member run");
                    if last.0 == n {
                        self.runs.pop();
                    } else {
                        last.1 = n - 1;
                    }
                }
                self.threshold = n;
            }
        }
    }
}

fn in_runs(runs: &[(u64, u64)], n: u64) -> bool {
    match runs.binary_search_by(|&(a, _)| a.cmp(&n)) {
        Ok(_) => true,
        Err(0) => false,
        Err(i) => runs[i - 1].1 >= n,
    }
}

fn runs_from_sorted(v: &[u64]) -> Vec<(u64, u64)> {
    let mut runs: Vec<(u64, u64)> = Vec::new();
    for &n in v {
        match runs.last_mut() {
            Some(last) if last.1 + 1 == n => last.1 = n,
            _ => runs.push((n, n)),
        }
    }
    runs
}

fn complement_runs(runs: &[(u64, u64)], lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut cur = lo;
    for &(a, b) in runs {
        if a > cur {
            out.push((cur, a - 1));
        }
        cur = b + 1;
    }
    if cur <= hi {
        out.push((cur, hi));
    }
    out
}

fn periodic_runs(mask: &[bool], period: u64, lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if mask.iter().all(|&b| b) {
        out.push((lo, hi));
        return out;
    }
    if mask.iter().all(|&b| !b) {
        return out;
    }
    let p = period as usize;
    // Distance from each residue to the next residue with the opposite value.
    let mut to_flip = vec![0u64; p];
    for r in 0..p {
        let mut d = 1u64;
        while mask[(r + d as usize) % p] == mask[r] {
            d += 1;
        }
        to_flip[r] = d;
    }
    let mut n = lo;
    while n <= hi {
        let r = (n % period) as usize;
        let end = n.saturating_add(to_flip[r] - 1).min(hi);
        if mask[r] {
            out.push((n, end));
        }
        n = end + 1;
    }
    out
}

fn merge_runs(a: &[(u64, u64)], b: &[(u64, u64)], op: Op) -> Vec<(u64, u64)> {
    let mut cuts: Vec<u64> = Vec::with_capacity(2 * (a.len() + b.len()));
    for &(x, y) in a.iter().chain(b) {
        cuts.push(x);
        cuts.push(y + 1);
    }
    cuts.sort_unstable();
    cuts.dedup();
    let mut out: Vec<(u64, u64)> = Vec::new();
    for w in cuts.windows(2) {
        let (x, y) = (w[0], w[1] - 1);
        if op.apply(in_runs(a, x), in_runs(b, x)) {
            match out.last_mut() {
                Some(last) if last.1 + 1 == x => last.1 = y,
                _ => out.push((x, y)),
            }
        }
    }
    out
}
