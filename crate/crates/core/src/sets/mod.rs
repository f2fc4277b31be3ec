//! Symbolic eventually periodic subsets of ℕ = {1, 2, …}.
//!
//! A [`SetExpr`] keeps its expression tree next to a cached [`NormalForm`].
//! The tree is what prints; the normal form is what answers questions.

mod normal;
mod parse;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use normal::{Classification, NormalForm};

use crate::error::Error;

#[derive(Clone, Debug)]
pub enum Node {
    Finite(Vec<u64>),
    Progression { offset: u64, period: u64 },
    Interval { lo: u64, hi: Option<u64> },
    Complement(SetExpr),
    Union(SetExpr, SetExpr),
    Intersection(SetExpr, SetExpr),
}

#[derive(Clone)]
pub struct SetExpr(Arc<Inner>);

struct Inner {
    node: Node,
    nf: NormalForm,
}

impl SetExpr {
    fn from_node(node: Node) -> Self {
        let nf = match &node {
            Node::Finite(v) => NormalForm::finite(v),
            Node::Progression { offset, period } => NormalForm::progression(*offset, *period),
            Node::Interval { lo, hi } => NormalForm::interval(*lo, *hi),
            Node::Complement(e) => e.nf().complement(),
            Node::Union(a, b) => a.nf().union(b.nf()),
            Node::Intersection(a, b) => a.nf().intersection(b.nf()),
        };
        SetExpr(Arc::new(Inner { node, nf }))
    }

    pub fn finite(members: impl IntoIterator<Item = u64>) -> Self {
        let mut v: Vec<u64> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self::from_node(Node::Finite(v))
    }

    pub fn singleton(n: u64) -> Self {
        Self::finite([n])
    }

    /// `{a, a+d, a+2d, …} ∩ ℕ`; panics if `d == 0`.
    pub fn ap(offset: u64, period: u64) -> Self {
        assert!(period >= 1, "progression period must be positive");
        Self::from_node(Node::Progression { offset, period })
    }

    pub fn interval(lo: u64, hi: u64) -> Self {
        Self::from_node(Node::Interval { lo, hi: Some(hi) })
    }

    pub fn from_lo(lo: u64) -> Self {
        Self::from_node(Node::Interval { lo, hi: None })
    }

    pub fn naturals() -> Self {
        Self::from_lo(1)
    }

    pub fn empty() -> Self {
        Self::finite([])
    }

    pub fn evens() -> Self {
        Self::ap(0, 2)
    }

    pub fn odds() -> Self {
        Self::ap(1, 2)
    }

    pub fn complement(&self) -> Self {
        Self::from_node(Node::Complement(self.clone()))
    }

    pub fn union(&self, other: &SetExpr) -> Self {
        Self::from_node(Node::Union(self.clone(), other.clone()))
    }

    pub fn intersection(&self, other: &SetExpr) -> Self {
        Self::from_node(Node::Intersection(self.clone(), other.clone()))
    }

    pub fn difference(&self, other: &SetExpr) -> Self {
        self.intersection(&other.complement())
    }

    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a SetExpr>) -> Self {
        sets.into_iter()
            .fold(None::<SetExpr>, |acc, s| Some(acc.map_or_else(|| s.clone(), |a| a.union(s))))
            .unwrap_or_else(Self::empty)
    }

    pub fn intersection_all<'a>(sets: impl IntoIterator<Item = &'a SetExpr>) -> Self {
        sets.into_iter()
            .fold(None::<SetExpr>, |acc, s| {
                Some(acc.map_or_else(|| s.clone(), |a| a.intersection(s)))
            })
            .unwrap_or_else(Self::naturals)
    }

    /// Builds an expression whose normal form is `nf`.
    pub fn from_normal_form(nf: &NormalForm) -> Self {
        let mut parts: Vec<SetExpr> = Vec::new();
        let runs = nf.prefix_runs();
        let singles: Vec<u64> = runs.iter().filter(|r| r.0 == r.1).map(|r| r.0).collect();
        if !singles.is_empty() {
            parts.push(Self::finite(singles));
        }
        for &(a, b) in runs.iter().filter(|r| r.0 != r.1) {
            parts.push(Self::interval(a, b));
        }
        let p = nf.period();
        let t = nf.threshold();
        if nf.mask().iter().all(|&b| b) {
            parts.push(Self::from_lo(t));
        } else {
            for j in 0..p {
                let n = t + j;
                if nf.mask()[(n % p) as usize] {
                    parts.push(Self::ap(n, p));
                }
            }
        }
        let e = Self::union_all(parts.iter());
        debug_assert_eq!(e.nf(), nf);
        e
    }

    /// `{n + s : n ∈ self} ∩ ℕ`.
    pub fn shift(&self, s: i64) -> Self {
        if s == 0 {
            return self.clone();
        }
        Self::from_normal_form(&self.nf().shift(s))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn nf(&self) -> &NormalForm {
        &self.0.nf
    }

    /// Membership via the normal form.
    pub fn contains(&self, n: u64) -> bool {
        self.0.nf.contains(n)
    }

    /// Membership by walking the expression tree; used to cross-check the normal form.
    pub fn contains_by_tree(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        match self.node() {
            Node::Finite(v) => v.binary_search(&n).is_ok(),
            Node::Progression { offset, period } => n >= *offset && (n - offset) % period == 0,
            Node::Interval { lo, hi } => n >= *lo && hi.map_or(true, |h| n <= h),
            Node::Complement(e) => !e.contains_by_tree(n),
            Node::Union(a, b) => a.contains_by_tree(n) || b.contains_by_tree(n),
            Node::Intersection(a, b) => a.contains_by_tree(n) && b.contains_by_tree(n),
        }
    }

    pub fn classify(&self) -> Classification {
        self.0.nf.classify()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nf.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.nf.is_finite()
    }

    pub fn is_infinite(&self) -> bool {
        self.0.nf.is_infinite()
    }

    /// True iff `self \ other` is finite.
    pub fn almost_subset(&self, other: &SetExpr) -> bool {
        self.0.nf.almost_subset(&other.0.nf)
    }

    pub fn is_subset(&self, other: &SetExpr) -> bool {
        self.nf().difference(other.nf()).is_empty()
    }

    pub fn is_disjoint(&self, other: &SetExpr) -> bool {
        self.nf().intersection(other.nf()).is_empty()
    }

    /// Set equality (not syntactic equality).
    pub fn same_set(&self, other: &SetExpr) -> bool {
        self.nf() == other.nf()
    }

    /// A bound past which all structure is periodic: `T + 2P`.
    pub fn sample_horizon(&self) -> u64 {
        self.nf().threshold() + 2 * self.nf().period()
    }

    pub fn members_upto(&self, hi: u64) -> Vec<u64> {
        self.nf()
            .runs_in(1, hi)
            .into_iter()
            .flat_map(|(a, b)| a..=b)
            .collect()
    }

    fn is_binary(&self) -> bool {
        matches!(self.node(), Node::Union(..) | Node::Intersection(..))
    }
}

pub fn setexpr_eval(e: &SetExpr, n: u64) -> bool {
    e.contains(n)
}

pub fn setexpr_classify(e: &SetExpr) -> Classification {
    e.classify()
}

pub fn almost_subset(e1: &SetExpr, e2: &SetExpr) -> bool {
    e1.almost_subset(e2)
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &SetExpr, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if e.is_binary() {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self.node() {
            Node::Finite(v) => {
                let items: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "fin{{{}}}", items.join(","))
            }
            Node::Progression { offset, period } => write!(f, "ap({offset},{period})"),
            Node::Interval { lo, hi: Some(hi) } => write!(f, "int({lo},{hi})"),
            Node::Interval { lo, hi: None } => write!(f, "int({lo},)"),
            Node::Complement(e) => {
                write!(f, "!")?;
                wrap(e, f)
            }
            Node::Union(a, b) => {
                wrap(a, f)?;
                write!(f, " | ")?;
                wrap(b, f)
            }
            Node::Intersection(a, b) => {
                wrap(a, f)?;
                write!(f, " & ")?;
                wrap(b, f)
            }
        }
    }
}

impl fmt::Debug for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetExpr({self})")
    }
}

impl FromStr for SetExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        parse::parse_set(s)
    }
}

impl Serialize for SetExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SetExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) use parse::SetParser;
