//! Signed charges on a finite algebra and their lattice structure.
//!
//! On a finite space every bounded charge is countably additive and is just a
//! vector of atom values. The setwise order `μ ≤ ν` (for all events) coincides
//! with the atomwise order, so joins and meets are atomwise max/min. The
//! partition formula `(μ∨ν)(A) = sup{μ(B) + ν(A∖B) : B ⊆ A}` is kept as an
//! independent verification path.
//!
//! The relations `≪` and `≪≪` coincide on finite spaces, and a Lebesgue
//! decomposition is just the split into P-positive and P-null atoms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::choquet::SimpleRandomVariable;
use crate::error::{Error, Result};
use crate::space::{enumeration_guard, Event, ProbabilityCharge, Rational, ENUMERATION_CAP, PAIR_SCAN_CAP};
use crate::TOL;

/// Atom values of a bounded signed charge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SignedCharge {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SignedCharge {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        SignedCharge::new(values)
    }
}

impl From<SignedCharge> for Vec<f64> {
    fn from(c: SignedCharge) -> Self {
        c.values
    }
}

impl SignedCharge {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySpace);
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(SignedCharge { values })
    }

    pub fn zero(atoms: usize) -> Self {
        SignedCharge { values: vec![0.0; atoms] }
    }

    pub fn constant(atoms: usize, value: f64) -> Self {
        SignedCharge { values: vec![value; atoms] }
    }

    pub fn from_probability(p: &ProbabilityCharge) -> Self {
        SignedCharge { values: p.weights_f64() }
    }

    pub fn scaled_probability(p: &ProbabilityCharge, c: f64) -> Self {
        SignedCharge { values: p.weights_f64().into_iter().map(|w| c * w).collect() }
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn atom(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn value(&self, a: Event) -> f64 {
        a.atoms().map(|i| self.values[i]).sum()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scale(&self, c: f64) -> SignedCharge {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SignedCharge {
        SignedCharge { values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &SignedCharge, f: impl Fn(f64, f64) -> f64) -> Result<SignedCharge> {
        same_space(self.atoms(), other.atoms())?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(SignedCharge { values })
    }

    /// Setwise `self ≤ other` within `tol`; equivalent to the atomwise order.
    pub fn le(&self, other: &SignedCharge, tol: f64) -> bool {
        self.atoms() == other.atoms()
            && self.values.iter().zip(&other.values).all(|(a, b)| *a <= *b + tol)
    }

    pub fn approx_eq(&self, other: &SignedCharge, tol: f64) -> bool {
        self.atoms() == other.atoms()
            && self.values.iter().zip(&other.values).all(|(a, b)| (a - b).abs() <= tol)
    }

    pub fn max_abs_diff(&self, other: &SignedCharge) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.abs() <= tol)
    }
}

pub(crate) fn same_space(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::SpaceMismatch { left, right })
    }
}

// ---------------------------------------------------------------------------
// Lattice operations
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeOp {
    Join,
    Meet,
    Abs,
    PositivePart,
    NegativePart,
}

/// Atomwise lattice operation. `Join` and `Meet` need a second charge.
pub fn lattice_combine(op: LatticeOp, mu: &SignedCharge, nu: Option<&SignedCharge>) -> Result<SignedCharge> {
    let binary = |f: fn(f64, f64) -> f64| -> Result<SignedCharge> {
        let nu = nu.ok_or_else(|| Error::ParameterOutOfRange(format!("{op:?} needs two charges")))?;
        mu.zip_with(nu, f)
    };
    match op {
        LatticeOp::Join => binary(f64::max),
        LatticeOp::Meet => binary(f64::min),
        LatticeOp::Abs => Ok(mu.map(f64::abs)),
        LatticeOp::PositivePart => Ok(mu.map(|v| v.max(0.0))),
        LatticeOp::NegativePart => Ok(mu.map(|v| (-v).max(0.0))),
    }
}

pub fn join(mu: &SignedCharge, nu: &SignedCharge) -> Result<SignedCharge> {
    lattice_combine(LatticeOp::Join, mu, Some(nu))
}

pub fn meet(mu: &SignedCharge, nu: &SignedCharge) -> Result<SignedCharge> {
    lattice_combine(LatticeOp::Meet, mu, Some(nu))
}

/// `sup{μ(B) + ν(A∖B) : B ⊆ A}` by enumeration of the subsets of `a`.
pub fn join_by_partition(mu: &SignedCharge, nu: &SignedCharge, a: Event) -> Result<f64> {
    same_space(mu.atoms(), nu.atoms())?;
    enumeration_guard(a.len(), PAIR_SCAN_CAP)?;
    Ok(a.subsets().map(|b| mu.value(b) + nu.value(a.difference(b))).fold(f64::NEG_INFINITY, f64::max))
}

/// Checks the atomwise join against the partition formula on every event.
/// Returns the largest discrepancy found.
pub fn verify_join(mu: &SignedCharge, nu: &SignedCharge) -> Result<f64> {
    let j = join(mu, nu)?;
    enumeration_guard(mu.atoms(), PAIR_SCAN_CAP)?;
    let mut worst = 0.0f64;
    for a in Event::all(mu.atoms()) {
        worst = worst.max((join_by_partition(mu, nu, a)? - j.value(a)).abs());
    }
    Ok(worst)
}

/// Coordinatewise supremum of a finite family, which is its lattice supremum.
pub fn supremum(family: &[SignedCharge]) -> Result<SignedCharge> {
    fold_family(family, f64::max)
}

pub fn infimum(family: &[SignedCharge]) -> Result<SignedCharge> {
    fold_family(family, f64::min)
}

fn fold_family(family: &[SignedCharge], f: fn(f64, f64) -> f64) -> Result<SignedCharge> {
    let (first, rest) = family.split_first().ok_or(Error::EmptyList)?;
    rest.iter().try_fold(first.clone(), |acc, c| acc.zip_with(c, f))
}

/// `|μ|(Ω)`.
pub fn total_variation(mu: &SignedCharge) -> f64 {
    mu.values().iter().map(|v| v.abs()).sum()
}

// ---------------------------------------------------------------------------
// Absolute continuity and decomposition
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Relations {
    pub absolutely_continuous: bool,
    pub continuous_part: SignedCharge,
    pub singular_part: SignedCharge,
}

/// Lebesgue decomposition of `mu` relative to `p`: the continuous part lives
/// on P-positive atoms, the singular part on P-null atoms.
pub fn relations(mu: &SignedCharge, p: &ProbabilityCharge) -> Result<Relations> {
    same_space(mu.atoms(), p.atoms())?;
    let support = p.support();
    let split = |keep: bool| {
        SignedCharge {
            values: (0..mu.atoms())
                .map(|i| if support.contains(i) == keep { mu.atom(i) } else { 0.0 })
                .collect(),
        }
    };
    let singular_part = split(false);
    Ok(Relations {
        absolutely_continuous: singular_part.is_zero(TOL),
        continuous_part: split(true),
        singular_part,
    })
}

// ---------------------------------------------------------------------------
// Rearrangement functionals
// ---------------------------------------------------------------------------

/// Extremes of `μ` over one equal-probability class of events.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityClass {
    #[serde(serialize_with = "crate::cli::report::ser_rational")]
    pub probability: Rational,
    /// Number of events in the class.
    pub size: u64,
    /// `s_μ`: the largest `μ(B)` with `P(B) = probability`.
    pub sup: f64,
    /// `ι_μ`: the smallest.
    pub inf: f64,
}

/// `s_μ` and `ι_μ` tabulated per attainable probability value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RearrangementStats {
    pub total: f64,
    pub classes: Vec<ProbabilityClass>,
}

impl RearrangementStats {
    pub fn class(&self, p: Rational) -> Option<&ProbabilityClass> {
        self.classes.binary_search_by(|c| c.probability.cmp(&p)).ok().map(|i| &self.classes[i])
    }

    pub fn s(&self, p: Rational) -> Option<f64> {
        self.class(p).map(|c| c.sup)
    }

    pub fn iota(&self, p: Rational) -> Option<f64> {
        self.class(p).map(|c| c.inf)
    }
}

pub fn rearrangement_stats(mu: &SignedCharge, p: &ProbabilityCharge) -> Result<RearrangementStats> {
    same_space(mu.atoms(), p.atoms())?;
    let n = mu.atoms();
    if p.is_uniform() {
        let mut sorted = mu.values().to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut classes = Vec::with_capacity(n + 1);
        let (mut top, mut bottom) = (0.0, 0.0);
        for k in 0..=n {
            if k > 0 {
                top += sorted[k - 1];
                bottom += sorted[n - k];
            }
            classes.push(ProbabilityClass {
                probability: Rational::new(k as i128, n as i128),
                size: binomial(n, k),
                sup: top,
                inf: bottom,
            });
        }
        return Ok(RearrangementStats { total: mu.total(), classes });
    }
    enumeration_guard(n, ENUMERATION_CAP)?;
    let mut by_key: BTreeMap<i128, (u64, f64, f64)> = BTreeMap::new();
    for a in Event::all(n) {
        let v = mu.value(a);
        let e = by_key.entry(p.key(a)).or_insert((0, f64::NEG_INFINITY, f64::INFINITY));
        e.0 += 1;
        e.1 = e.1.max(v);
        e.2 = e.2.min(v);
    }
    let classes = by_key
        .into_iter()
        .map(|(k, (size, sup, inf))| ProbabilityClass {
            probability: Rational::new(k, p.denominator()),
            size,
            sup,
            inf,
        })
        .collect();
    Ok(RearrangementStats { total: mu.total(), classes })
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// `ρ_μ(X) = sup{E_μ[Y] : Y has the same P-distribution as X}`.
pub fn rho(mu: &SignedCharge, p: &ProbabilityCharge, x: &SimpleRandomVariable) -> Result<f64> {
    same_space(mu.atoms(), p.atoms())?;
    same_space(mu.atoms(), x.atoms())?;
    let rel = relations(mu, p)?;
    if !rel.absolutely_continuous {
        let atom = (0..mu.atoms()).find(|&i| rel.singular_part.atom(i).abs() > TOL).unwrap_or(0);
        return Err(Error::NotAbsolutelyContinuous(atom));
    }
    if p.is_uniform() {
        // rearrangement inequality: pair large with large
        let mut m = mu.values().to_vec();
        let mut v = x.values().to_vec();
        m.sort_by(f64::total_cmp);
        v.sort_by(f64::total_cmp);
        return Ok(m.iter().zip(&v).map(|(a, b)| a * b).sum());
    }
    enumeration_guard(mu.atoms(), PAIR_SCAN_CAP)?;
    // distinct values of X on the support, with their exact probability keys
    let support = p.support();
    let mut levels: Vec<(f64, i128)> = Vec::new();
    for i in support.atoms() {
        let xi = x.values()[i];
        match levels.iter_mut().find(|(v, _)| *v == xi) {
            Some(level) => level.1 += p.key(Event::singleton(i)),
            None => levels.push((xi, p.key(Event::singleton(i)))),
        }
    }
    Ok(best_assignment(mu, p, &levels, support))
}

fn best_assignment(mu: &SignedCharge, p: &ProbabilityCharge, levels: &[(f64, i128)], free: Event) -> f64 {
    let Some(((value, key), rest)) = levels.split_first() else {
        return 0.0;
    };
    free.subsets()
        .filter(|b| p.key(*b) == *key)
        .map(|b| value * mu.value(b) + best_assignment(mu, p, rest, free.difference(b)))
        .fold(f64::NEG_INFINITY, f64::max)
}
