//! Finite probability spaces.
//!
//! A [`FiniteSpace`] is a set of `n` atoms carrying exact rational weights; its
//! algebra of events is the full power set, with events stored as bitmasks.
//! Probabilities are kept over a common integer denominator so that equality
//! of event probabilities is an integer comparison.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Hard cap on atoms for anything that enumerates events.
pub const ENUMERATION_CAP: usize = 24;
/// Above this many atoms enumeration still works but is slow.
pub const ENUMERATION_WARN: usize = 16;
/// Cap for loops over pairs of events (4^n work).
pub const PAIR_SCAN_CAP: usize = 12;

/// Parses `"p/q"`, an integer, or a plain decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::BadRational(s.to_string());
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| bad())?;
        let q: i128 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, digits) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 30 {
        return Err(bad());
    }
    let scale = 10i128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    let whole: i128 = format!("{int}{frac}").trim_start_matches('0').parse().unwrap_or(0);
    let r = Rational::new(whole, scale);
    Ok(if neg { -r } else { r })
}

/// Exact rational formatted as `"p/q"` (or `"p"` for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents and semiconvergents).
pub fn rationalize(x: f64, max_den: i128) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = v.floor();
        let ai = a as i128;
        let q2 = q0 + ai * q1;
        if q2 > max_den {
            let k = (max_den - q0) / q1;
            let (ps, qs) = (p0 + k * p1, q0 + k * q1);
            let semi = Rational::new(ps, qs);
            let conv = Rational::new(p1, q1);
            let target = x.abs();
            let err = |r: &Rational| (rational_to_f64(r) - target).abs();
            let best = if err(&semi) < err(&conv) { semi } else { conv };
            return if neg { -best } else { best };
        }
        let p2 = p0 + ai * p1;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    let r = Rational::new(p1, q1);
    if neg {
        -r
    } else {
        r
    }
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

/// A set of atom indices, stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Event(u32);

impl Event {
    pub const EMPTY: Event = Event(0);

    pub fn from_bits(bits: u32) -> Self {
        Event(bits)
    }

    pub fn full(atoms: usize) -> Self {
        debug_assert!(atoms <= 32);
        if atoms >= 32 {
            Event(u32::MAX)
        } else {
            Event((1u32 << atoms) - 1)
        }
    }

    pub fn singleton(atom: usize) -> Self {
        Event(1 << atom)
    }

    pub fn from_atoms<I: IntoIterator<Item = usize>>(atoms: I) -> Self {
        Event(atoms.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn contains(self, atom: usize) -> bool {
        atom < 32 && self.0 & (1 << atom) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Event) -> Event {
        Event(self.0 | other.0)
    }

    pub fn intersection(self, other: Event) -> Event {
        Event(self.0 & other.0)
    }

    pub fn difference(self, other: Event) -> Event {
        Event(self.0 & !other.0)
    }

    pub fn complement(self, atoms: usize) -> Event {
        Event(!self.0 & Event::full(atoms).0)
    }

    pub fn is_disjoint(self, other: Event) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: Event) -> bool {
        self.0 & !other.0 == 0
    }

    /// Member atoms in ascending order.
    pub fn atoms(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Every event of a space with `atoms` atoms, in bitmask order.
    pub fn all(atoms: usize) -> impl Iterator<Item = Event> {
        (0..=Event::full(atoms).0 as u64).map(|b| Event(b as u32))
    }

    /// Every subset of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = Event> {
        let full = self.0;
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 { None } else { Some((cur - 1) & full) };
            Some(Event(cur))
        })
    }

    pub fn fits(self, atoms: usize) -> bool {
        self.is_subset_of(Event::full(atoms))
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms()).finish()
    }
}

// ---------------------------------------------------------------------------
// Probability charges
// ---------------------------------------------------------------------------

/// A probability on the atoms, kept as integer numerators over a common
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ProbabilityCharge {
    numer: Vec<i128>,
    denom: i128,
}

impl ProbabilityCharge {
    pub fn from_rationals(weights: &[Rational]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        if weights.len() > ENUMERATION_CAP {
            return Err(Error::TooManyAtoms { atoms: weights.len(), limit: ENUMERATION_CAP });
        }
        for (atom, w) in weights.iter().enumerate() {
            if w.is_negative() {
                return Err(Error::NegativeWeight { atom, value: format_rational(w) });
            }
        }
        let denom = weights
            .iter()
            .try_fold(1i128, |acc, w| {
                let g = acc.gcd(w.denom());
                (acc / g).checked_mul(*w.denom())
            })
            .ok_or_else(|| Error::BadRational("common denominator overflows".into()))?;
        let numer: Vec<i128> = weights.iter().map(|w| w.numer() * (denom / w.denom())).collect();
        let total: i128 = numer.iter().sum();
        if total == 0 {
            return Err(Error::ZeroTotal);
        }
        if total != denom {
            return Err(Error::NotNormalized(format_rational(&Rational::new(total, denom))));
        }
        Ok(ProbabilityCharge { numer, denom })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if n > ENUMERATION_CAP {
            return Err(Error::TooManyAtoms { atoms: n, limit: ENUMERATION_CAP });
        }
        Ok(ProbabilityCharge { numer: vec![1; n], denom: n as i128 })
    }

    /// Builds a probability from real atom weights. Each weight is snapped to
    /// the nearest rational with denominator at most 2^20; the exact total is
    /// then forced to 1 by moving the (tiny) residual onto the heaviest atom.
    pub fn from_reals(values: &[f64]) -> Result<Self> {
        for (atom, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(*v));
            }
            if *v < -1e-12 {
                return Err(Error::NegativeWeight { atom, value: v.to_string() });
            }
        }
        let total: f64 = values.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroTotal);
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(total.to_string()));
        }
        let mut weights: Vec<Rational> =
            values.iter().map(|v| rationalize(v.max(0.0), 1 << 20)).collect();
        let sum: Rational = weights.iter().sum();
        let residual = Rational::one() - sum;
        if !residual.is_zero() {
            let heaviest = (0..weights.len())
                .max_by(|&a, &b| weights[a].cmp(&weights[b]))
                .unwrap_or(0);
            weights[heaviest] += residual;
        }
        Self::from_rationals(&weights)
    }

    pub fn atoms(&self) -> usize {
        self.numer.len()
    }

    pub fn denominator(&self) -> i128 {
        self.denom
    }

    pub fn weight(&self, atom: usize) -> Rational {
        Rational::new(self.numer[atom], self.denom)
    }

    pub fn weights(&self) -> Vec<Rational> {
        (0..self.atoms()).map(|i| self.weight(i)).collect()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.numer.iter().map(|&k| k as f64 / self.denom as f64).collect()
    }

    pub fn is_uniform(&self) -> bool {
        self.numer.windows(2).all(|w| w[0] == w[1])
    }

    /// Numerator of `P(A)` over [`Self::denominator`]. Equal keys mean equal
    /// probabilities.
    pub fn key(&self, a: Event) -> i128 {
        a.atoms().map(|i| self.numer[i]).sum()
    }

    pub fn prob(&self, a: Event) -> Rational {
        Rational::new(self.key(a), self.denom)
    }

    pub fn prob_f64(&self, a: Event) -> f64 {
        self.key(a) as f64 / self.denom as f64
    }

    pub fn check_event(&self, a: Event) -> Result<()> {
        if a.fits(self.atoms()) {
            Ok(())
        } else {
            Err(Error::ForeignEvent { event: a.bits(), atoms: self.atoms() })
        }
    }

    /// `P^A(B) = P(A ∩ B) / P(A)`.
    pub fn conditional(&self, a: Event) -> Result<ProbabilityCharge> {
        self.check_event(a)?;
        let pa = self.key(a);
        if pa == 0 {
            return Err(Error::NullConditioningEvent);
        }
        let numer = (0..self.atoms()).map(|i| if a.contains(i) { self.numer[i] } else { 0 });
        let g = numer.clone().fold(pa, |g, k| g.gcd(&k));
        Ok(ProbabilityCharge { numer: numer.map(|k| k / g).collect(), denom: pa / g })
    }

    /// Atoms of positive weight.
    pub fn support(&self) -> Event {
        Event::from_atoms((0..self.atoms()).filter(|&i| self.numer[i] > 0))
    }
}

impl fmt::Debug for ProbabilityCharge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.weights().iter().map(format_rational)).finish()
    }
}

// ---------------------------------------------------------------------------
// Spaces
// ---------------------------------------------------------------------------

/// How to build a space.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceKind {
    Uniform(usize),
    Weighted(Vec<Rational>),
}

/// The discretized probability space: atoms, the power-set algebra and `P`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FiniteSpace {
    prob: ProbabilityCharge,
}

impl FiniteSpace {
    pub fn build(kind: &SpaceKind) -> Result<Self> {
        let prob = match kind {
            SpaceKind::Uniform(n) => ProbabilityCharge::uniform(*n)?,
            SpaceKind::Weighted(w) => ProbabilityCharge::from_rationals(w)?,
        };
        Ok(FiniteSpace { prob })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::build(&SpaceKind::Uniform(n))
    }

    pub fn weighted(weights: &[Rational]) -> Result<Self> {
        Self::build(&SpaceKind::Weighted(weights.to_vec()))
    }

    pub fn from_probability(prob: ProbabilityCharge) -> Self {
        FiniteSpace { prob }
    }

    pub fn atoms(&self) -> usize {
        self.prob.atoms()
    }

    pub fn probability(&self) -> &ProbabilityCharge {
        &self.prob
    }

    pub fn is_uniform(&self) -> bool {
        self.prob.is_uniform()
    }

    pub fn full(&self) -> Event {
        Event::full(self.atoms())
    }

    pub fn events(&self) -> impl Iterator<Item = Event> {
        Event::all(self.atoms())
    }

    pub fn event_probability(&self, a: Event) -> Result<Rational> {
        self.prob.check_event(a)?;
        Ok(self.prob.prob(a))
    }

    /// Guards an enumeration over events.
    pub fn require_enumerable(&self, limit: usize) -> Result<()> {
        enumeration_guard(self.atoms(), limit)
    }

    /// Splits every atom into `factor` equal children. Atom `i` becomes atoms
    /// `i*factor .. (i+1)*factor`.
    pub fn refine(&self, factor: usize) -> Result<(FiniteSpace, Lift)> {
        if factor == 0 {
            return Err(Error::ParameterOutOfRange("refinement factor must be positive".into()));
        }
        let atoms = self.atoms() * factor;
        if atoms > ENUMERATION_CAP {
            return Err(Error::TooManyAtoms { atoms, limit: ENUMERATION_CAP });
        }
        let k = factor as i128;
        let numer = self.prob.numer.iter().flat_map(|&w| std::iter::repeat_n(w, factor));
        let prob = ProbabilityCharge { numer: numer.collect(), denom: self.prob.denom * k };
        Ok((FiniteSpace { prob }, Lift { factor }))
    }
}

pub(crate) fn enumeration_guard(atoms: usize, limit: usize) -> Result<()> {
    if atoms > limit {
        return Err(Error::TooManyAtoms { atoms, limit });
    }
    if atoms > ENUMERATION_WARN && limit > ENUMERATION_WARN {
        log::warn!("enumerating 2^{atoms} events");
    }
    Ok(())
}

/// Maps events of a space to events of its refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lift {
    factor: usize,
}

impl Lift {
    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn lift(&self, a: Event) -> Event {
        let block = Event::full(self.factor).bits();
        Event::from_bits(a.atoms().fold(0, |acc, i| acc | (block << (i * self.factor))))
    }

    pub fn lift_atom(&self, atom: usize) -> Event {
        self.lift(Event::singleton(atom))
    }
}
