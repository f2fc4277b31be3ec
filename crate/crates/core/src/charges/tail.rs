use std::fmt;

use num_integer::Integer;

use crate::rational::Rational;
use crate::sets::NormalForm;

/// Geometric mass `c·r^k` on every `k ≥ start` with `k ≡ residue (mod modulus)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometricTail {
    start: u64,
    coeff: Rational,
    ratio: Rational,
    modulus: u64,
    residue: u64,
}

impl GeometricTail {
    /// Panics unless `0 < ratio < 1`, `coeff ≥ 0`, `modulus ≥ 1`.
    pub fn new(start: u64, coeff: Rational, ratio: Rational) -> Self {
        Self::on_class(start, coeff, ratio, 1, 0)
    }

    pub fn on_class(start: u64, coeff: Rational, ratio: Rational, modulus: u64, residue: u64) -> Self {
        assert!(modulus >= 1, "tail modulus must be positive");
        assert!(
            ratio.is_positive() && ratio < 1,
            "tail ratio must lie in (0,1), got {ratio}"
        );
        assert!(!coeff.is_negative(), "tail coefficient must be non-negative");
        let residue = residue % modulus;
        let start = first_in_class(start.max(1), modulus, residue);
        GeometricTail {
            start,
            coeff,
            ratio,
            modulus,
            residue,
        }
    }

    /// A probability tail: `(1 − r)·r^(k − k0)` on `k ≥ k0`.
    pub fn normalized(k0: u64, ratio: Rational) -> Self {
        let k0 = k0.max(1);
        let coeff = (Rational::one() - &ratio) * ratio.pow(-(k0 as i64));
        Self::new(k0, coeff, ratio)
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub(crate) fn class_key(&self) -> (Rational, u64, u64) {
        (self.ratio.clone(), self.modulus, self.residue)
    }

    pub fn in_support(&self, k: u64) -> bool {
        k >= self.start && k % self.modulus == self.residue
    }

    pub fn point(&self, k: u64) -> Rational {
        if self.in_support(k) {
            &self.coeff * self.ratio.pow(k as i64)
        } else {
            Rational::zero()
        }
    }

    pub fn total(&self) -> Rational {
        self.series(self.start, self.modulus)
    }

    /// `Σ_{j ≥ 0} c·r^(first + j·step)`.
    fn series(&self, first: u64, step: u64) -> Rational {
        &self.coeff * self.ratio.pow(first as i64) / (Rational::one() - self.ratio.pow(step as i64))
    }

    /// Sum over `k ∈ [lo, hi]` of the support.
    fn block(&self, lo: u64, hi: u64) -> Rational {
        let lo = first_in_class(lo.max(self.start), self.modulus, self.residue);
        if lo > hi {
            return Rational::zero();
        }
        let count = (hi - lo) / self.modulus + 1;
        let r_m = self.ratio.pow(self.modulus as i64);
        &self.coeff * self.ratio.pow(lo as i64) * (Rational::one() - r_m.pow(count as i64))
            / (Rational::one() - r_m)
    }

    /// Exact mass on a set, split into the listed prefix and one geometric
    /// series per residue class of the periodic part.
    pub fn mass_on(&self, set: &NormalForm) -> Rational {
        if self.coeff.is_zero() {
            return Rational::zero();
        }
        let t = set.threshold();
        let mut total = Rational::zero();
        if self.start < t {
            for (a, b) in set.runs_in(self.start, t - 1) {
                total += self.block(a, b);
            }
        }
        let from = self.start.max(t);
        let p = set.period();
        let l = self.modulus.lcm(&p);
        for j in 0..l {
            let n = from + j;
            if n % self.modulus == self.residue && set.mask()[(n % p) as usize] {
                total += self.series(n, l);
            }
        }
        total
    }

    pub fn scaled(&self, w: &Rational) -> Self {
        GeometricTail {
            coeff: &self.coeff * w,
            ..self.clone()
        }
    }

    /// Splits off the support points `≤ level`; returns them with the rest of the tail.
    pub(crate) fn split_at(&self, level: u64) -> (Vec<(u64, Rational)>, GeometricTail) {
        let mut points = Vec::new();
        let mut k = self.start;
        while k <= level {
            points.push((k, self.point(k)));
            k += self.modulus;
        }
        let rest = GeometricTail {
            start: k,
            ..self.clone()
        };
        (points, rest)
    }

    /// The part of the tail on `k ≡ x (mod m)`, or `None` if the classes are disjoint.
    pub(crate) fn restrict_to_class(&self, m: u64, x: u64) -> Option<GeometricTail> {
        let l = self.modulus.lcm(&m);
        let hit = (0..l).find(|&y| y % self.modulus == self.residue && y % m == x % m)?;
        Some(GeometricTail {
            start: first_in_class(self.start, l, hit),
            coeff: self.coeff.clone(),
            ratio: self.ratio.clone(),
            modulus: l,
            residue: hit,
        })
    }

    /// Moves every point `k` to `k + s`; requires `start + s ≥ 1`.
    pub(crate) fn shifted(&self, s: i64) -> GeometricTail {
        let start = (self.start as i64 + s) as u64;
        assert!(start >= 1, "shift moves tail below 1");
        GeometricTail {
            start,
            coeff: &self.coeff * self.ratio.pow(-s),
            ratio: self.ratio.clone(),
            modulus: self.modulus,
            residue: (((self.residue as i64 + s) % self.modulus as i64 + self.modulus as i64)
                % self.modulus as i64) as u64,
        }
    }
}

pub(crate) fn first_in_class(from: u64, modulus: u64, residue: u64) -> u64 {
    let r = from % modulus;
    if r <= residue {
        from + (residue - r)
    } else {
        from + (modulus - r + residue)
    }
}

impl fmt::Display for GeometricTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tail(k0={},c={},r={}", self.start, self.coeff, self.ratio)?;
        if self.modulus > 1 {
            write!(f, ",mod={},res={}", self.modulus, self.residue)?;
        }
        write!(f, ")")
    }
}
