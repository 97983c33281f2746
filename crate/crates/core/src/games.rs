//! Cooperative games (set functions with `v(∅) = 0`), distortion builders for
//! the entropic, Expected Shortfall and Value-at-Risk families, structural
//! property scans, conjugation and envelopes.
//!
//! Continuity at `∅` is vacuous on a finite algebra and is always reported as
//! holding.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::charge_lattice::{same_space, SignedCharge};
use crate::error::{Error, Result};
use crate::space::{enumeration_guard, format_rational, rational_to_f64, Event, ProbabilityCharge, Rational, ENUMERATION_CAP, PAIR_SCAN_CAP};
use crate::TOL;

/// Games up to this many atoms are stored as full tables.
pub const MATERIALIZE_CAP: usize = 16;

// ---------------------------------------------------------------------------
// Distortions
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistortionTag {
    Entropic { alpha: f64 },
    Es { beta: f64 },
    Var {
        #[serde(with = "crate::cli::report::rational_str")]
        gamma: Rational,
    },
    Rvar {
        #[serde(with = "crate::cli::report::rational_str")]
        gamma: Rational,
    },
    Power { p: f64 },
    Custom { name: String },
}

type DistortionFn = dyn Fn(Rational) -> Option<f64> + Send + Sync;

/// A distortion `h : [0,1] → ℝ` evaluated at exact probabilities.
#[derive(Clone)]
pub struct DistortionFunction {
    tag: DistortionTag,
    eval: Arc<DistortionFn>,
}

impl fmt::Debug for DistortionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DistortionFunction({:?})", self.tag)
    }
}

/// `log((e^α − 1)x + 1) / α`.
pub fn entropic_h(alpha: f64, x: f64) -> f64 {
    (alpha.exp_m1() * x).ln_1p() / alpha
}

impl DistortionFunction {
    pub fn new(tag: DistortionTag, eval: impl Fn(Rational) -> Option<f64> + Send + Sync + 'static) -> Self {
        DistortionFunction { tag, eval: Arc::new(eval) }
    }

    /// A real-argument distortion, evaluated at the float value of the probability.
    pub fn custom(name: &str, h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(DistortionTag::Custom { name: name.to_string() }, move |x| {
            let y = h(rational_to_f64(&x));
            y.is_finite().then_some(y)
        })
    }

    pub fn identity() -> Self {
        Self::power(1.0)
    }

    pub fn power(p: f64) -> Self {
        Self::new(DistortionTag::Power { p }, move |x| Some(rational_to_f64(&x).powf(p)))
    }

    pub fn entropic(alpha: f64) -> Self {
        Self::new(DistortionTag::Entropic { alpha }, move |x| Some(entropic_h(alpha, rational_to_f64(&x))))
    }

    pub fn es(beta: f64) -> Self {
        Self::new(DistortionTag::Es { beta }, move |x| Some((rational_to_f64(&x) / (1.0 - beta)).min(1.0)))
    }

    /// Left-quantile indicator game: 1 iff `x > 1 − γ`.
    pub fn var(gamma: Rational) -> Self {
        let cut = Rational::one() - gamma;
        Self::new(DistortionTag::Var { gamma }, move |x| Some(if x > cut { 1.0 } else { 0.0 }))
    }

    /// Right-quantile indicator game: 1 iff `x ≥ 1 − γ`.
    pub fn rvar(gamma: Rational) -> Self {
        let cut = Rational::one() - gamma;
        Self::new(DistortionTag::Rvar { gamma }, move |x| Some(if x >= cut { 1.0 } else { 0.0 }))
    }

    pub fn tag(&self) -> &DistortionTag {
        &self.tag
    }

    pub fn eval(&self, x: Rational) -> Option<f64> {
        (self.eval)(x)
    }

    pub fn eval_f64(&self, x: Rational) -> Result<f64> {
        self.eval(x).ok_or_else(|| Error::DomainError(format_rational(&x)))
    }
}

/// The parameterized capacity families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Entropic { alpha: f64 },
    Es { beta: f64 },
    Var {
        #[serde(with = "crate::cli::report::rational_str")]
        gamma: Rational,
    },
    Rvar {
        #[serde(with = "crate::cli::report::rational_str")]
        gamma: Rational,
    },
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ParameterOutOfRange(m));
        match self {
            Family::Entropic { alpha } if !(*alpha > 0.0 && alpha.is_finite()) => bad(format!("alpha = {alpha} must be > 0")),
            Family::Es { beta } if !(0.0..1.0).contains(beta) => bad(format!("beta = {beta} must lie in [0, 1)")),
            Family::Var { gamma } | Family::Rvar { gamma } if *gamma <= Rational::zero() || *gamma >= Rational::one() => {
                bad(format!("gamma = {} must lie in (0, 1)", format_rational(gamma)))
            }
            _ => Ok(()),
        }
    }

    pub fn distortion(&self) -> Result<DistortionFunction> {
        self.validate()?;
        Ok(match self {
            Family::Entropic { alpha } => DistortionFunction::entropic(*alpha),
            Family::Es { beta } => DistortionFunction::es(*beta),
            Family::Var { gamma } => DistortionFunction::var(*gamma),
            Family::Rvar { gamma } => DistortionFunction::rvar(*gamma),
        })
    }
}

// ---------------------------------------------------------------------------
// Games
// ---------------------------------------------------------------------------

struct LazyGame {
    f: Box<dyn Fn(Event) -> f64 + Send + Sync>,
    memo: Mutex<HashMap<u32, f64>>,
}

#[derive(Clone)]
enum Repr {
    Table(Arc<[f64]>),
    Lazy(Arc<LazyGame>),
}

/// A set function on the events of a finite space with `v(∅) = 0`.
#[derive(Clone)]
pub struct Game {
    atoms: usize,
    repr: Repr,
    distortion: Option<(DistortionFunction, ProbabilityCharge)>,
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Game");
        d.field("atoms", &self.atoms);
        if let Repr::Table(t) = &self.repr {
            d.field("table", t);
        }
        if let Some((h, _)) = &self.distortion {
            d.field("distortion", h.tag());
        }
        d.finish()
    }
}

impl Game {
    /// Table indexed by event bitmask; must have `2^atoms` entries.
    pub fn from_table(atoms: usize, values: Vec<f64>) -> Result<Self> {
        enumeration_guard(atoms, ENUMERATION_CAP)?;
        let expected = 1usize << atoms;
        if values.len() != expected {
            return Err(Error::TableLength { got: values.len(), expected });
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        if values[0].abs() > TOL {
            return Err(Error::NotAGame(values[0]));
        }
        let mut values = values;
        values[0] = 0.0;
        Ok(Game { atoms, repr: Repr::Table(values.into()), distortion: None })
    }

    /// Builds from an evaluator. Materialized up to [`MATERIALIZE_CAP`] atoms,
    /// memoized lazily above. The value at `∅` is forced to 0.
    pub fn from_fn(atoms: usize, f: impl Fn(Event) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::EmptySpace);
        }
        enumeration_guard(atoms, ENUMERATION_CAP)?;
        let z = f(Event::EMPTY);
        if z.abs() > TOL {
            return Err(Error::NotAGame(z));
        }
        if atoms <= MATERIALIZE_CAP {
            let table: Vec<f64> = Event::all(atoms).map(|a| if a.is_empty() { 0.0 } else { f(a) }).collect();
            return Self::from_table(atoms, table);
        }
        let lazy = LazyGame {
            f: Box::new(move |a| if a.is_empty() { 0.0 } else { f(a) }),
            memo: Mutex::new(HashMap::new()),
        };
        Ok(Game { atoms, repr: Repr::Lazy(Arc::new(lazy)), distortion: None })
    }

    pub fn additive(mu: &SignedCharge) -> Game {
        let mu = mu.clone();
        let atoms = mu.atoms();
        Game::from_fn(atoms, move |a| mu.value(a)).expect("additive charge is a game")
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn value(&self, a: Event) -> f64 {
        match &self.repr {
            Repr::Table(t) => t[a.index()],
            Repr::Lazy(l) => {
                if let Some(v) = l.memo.lock().expect("memo lock").get(&a.bits()) {
                    return *v;
                }
                let v = (l.f)(a);
                l.memo.lock().expect("memo lock").insert(a.bits(), v);
                v
            }
        }
    }

    pub fn full_value(&self) -> f64 {
        self.value(Event::full(self.atoms))
    }

    pub fn table(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Table(t) => Some(t),
            Repr::Lazy(_) => None,
        }
    }

    /// Full table of values, enumerating if the game is lazy.
    pub fn to_table(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Table(t) => t.to_vec(),
            Repr::Lazy(_) => Event::all(self.atoms).map(|a| self.value(a)).collect(),
        }
    }

    pub fn distortion(&self) -> Option<&(DistortionFunction, ProbabilityCharge)> {
        self.distortion.as_ref()
    }

    /// `v({ω})` for every atom.
    pub fn singleton_profile(&self) -> Vec<f64> {
        (0..self.atoms).map(|i| self.value(Event::singleton(i))).collect()
    }

    pub fn is_zero_one(&self) -> bool {
        Event::all(self.atoms).all(|a| {
            let v = self.value(a);
            v == 0.0 || v == 1.0
        })
    }

    pub fn approx_eq(&self, other: &Game, tol: f64) -> bool {
        self.atoms == other.atoms && Event::all(self.atoms).all(|a| (self.value(a) - other.value(a)).abs() <= tol)
    }
}

/// `v(A) = h(P(A))`.
pub fn build_distortion(h: &DistortionFunction, p: &ProbabilityCharge) -> Result<Game> {
    let n = p.atoms();
    enumeration_guard(n, ENUMERATION_CAP)?;
    let h0 = h.eval_f64(Rational::zero())?;
    if h0.abs() > TOL {
        return Err(Error::DomainError(format!("h(0) = {h0} is not 0")));
    }
    // tabulate h on every attainable probability
    let mut by_key: HashMap<i128, f64> = HashMap::new();
    if p.is_uniform() {
        for k in 0..=n as i128 {
            by_key.insert(k * p.key(Event::singleton(0)), h.eval_f64(Rational::new(k, n as i128))?);
        }
    } else {
        for a in Event::all(n) {
            let key = p.key(a);
            if let std::collections::hash_map::Entry::Vacant(e) = by_key.entry(key) {
                e.insert(h.eval_f64(Rational::new(key, p.denominator()))?);
            }
        }
    }
    let prob = p.clone();
    let mut game = Game::from_fn(n, move |a| by_key[&prob.key(a)])?;
    game.distortion = Some((h.clone(), p.clone()));
    Ok(game)
}

pub fn build_family(family: &Family, p: &ProbabilityCharge) -> Result<Game> {
    build_distortion(&family.distortion()?, p)
}

// ---------------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub holds: bool,
    /// Events exhibiting a violation when `holds` is false.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Event>>,
}

impl PropertyCheck {
    fn pass() -> Self {
        PropertyCheck { holds: true, witness: None }
    }

    fn fail(events: Vec<Event>) -> Self {
        PropertyCheck { holds: false, witness: Some(events) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    pub monotone: PropertyCheck,
    pub superadditive: PropertyCheck,
    pub subadditive: PropertyCheck,
    pub submodular: PropertyCheck,
    /// Vacuous on finite algebras.
    pub continuous_at_empty: bool,
}

/// Exhaustive scans over subset pairs, disjoint pairs and all pairs.
pub fn classify_properties(v: &Game) -> Result<PropertyReport> {
    let n = v.atoms();
    enumeration_guard(n, PAIR_SCAN_CAP)?;
    let table = v.to_table();
    let val = |a: Event| table[a.index()];

    let mut monotone = PropertyCheck::pass();
    'mono: for a in Event::all(n) {
        for i in a.complement(n).atoms() {
            let b = a.union(Event::singleton(i));
            if val(a) > val(b) + TOL {
                monotone = PropertyCheck::fail(vec![a, b]);
                break 'mono;
            }
        }
    }

    let mut superadditive = PropertyCheck::pass();
    let mut subadditive = PropertyCheck::pass();
    for a in Event::all(n) {
        for b in a.complement(n).subsets() {
            let sum = val(a) + val(b);
            let joint = val(a.union(b));
            if superadditive.holds && joint < sum - TOL {
                superadditive = PropertyCheck::fail(vec![a, b]);
            }
            if subadditive.holds && joint > sum + TOL {
                subadditive = PropertyCheck::fail(vec![a, b]);
            }
        }
        if !superadditive.holds && !subadditive.holds {
            break;
        }
    }

    let mut submodular = PropertyCheck::pass();
    'sub: for a in Event::all(n) {
        for b in Event::all(n) {
            if b < a {
                continue;
            }
            if val(a) + val(b) < val(a.intersection(b)) + val(a.union(b)) - TOL {
                submodular = PropertyCheck::fail(vec![a, b]);
                break 'sub;
            }
        }
    }

    Ok(PropertyReport { monotone, superadditive, subadditive, submodular, continuous_at_empty: true })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub invariant: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(Event, Event)>,
}

/// Groups events by exact `P`-probability and checks that `v` is constant on
/// each group.
pub fn check_invariance(v: &Game, p: &ProbabilityCharge) -> Result<InvarianceReport> {
    same_space(v.atoms(), p.atoms())?;
    enumeration_guard(v.atoms(), ENUMERATION_CAP)?;
    let mut first: HashMap<i128, (Event, f64)> = HashMap::new();
    for a in Event::all(v.atoms()) {
        let va = v.value(a);
        match first.get(&p.key(a)) {
            Some(&(b, vb)) if (va - vb).abs() > TOL => {
                return Ok(InvarianceReport { invariant: false, witness: Some((b, a)) });
            }
            Some(_) => {}
            None => {
                first.insert(p.key(a), (a, va));
            }
        }
    }
    Ok(InvarianceReport { invariant: true, witness: None })
}

/// `v̄(A) = v(Ω) − v(Aᶜ)`.
pub fn conjugate_game(v: &Game) -> Game {
    let n = v.atoms();
    let inner = v.clone();
    let full = inner.full_value();
    Game::from_fn(n, move |a| full - inner.value(a.complement(n))).expect("conjugate of a game is a game")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMode {
    Lower,
    Upper,
}

/// Pointwise infimum (lower) or supremum (upper) of a list of charges.
pub fn envelope(mode: EnvelopeMode, charges: &[SignedCharge]) -> Result<Game> {
    let first = charges.first().ok_or(Error::EmptyList)?;
    for c in charges {
        same_space(first.atoms(), c.atoms())?;
    }
    let list = charges.to_vec();
    Game::from_fn(first.atoms(), move |a| {
        let vals = list.iter().map(|c| c.value(a));
        match mode {
            EnvelopeMode::Lower => vals.fold(f64::INFINITY, f64::min),
            EnvelopeMode::Upper => vals.fold(f64::NEG_INFINITY, f64::max),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i128, q: i128) -> Rational {
        Rational::new(p, q)
    }

    fn by_size(v: &Game) -> Vec<f64> {
        (0..=v.atoms()).map(|k| v.value(Event::full(k))).collect()
    }

    #[test]
    fn distortion_examples() {
        let p = ProbabilityCharge::uniform(4).unwrap();
        let id = build_distortion(&DistortionFunction::identity(), &p).unwrap();
        for a in Event::all(4) {
            assert!((id.value(a) - p.prob_f64(a)).abs() < 1e-15);
        }
        let sq = build_distortion(&DistortionFunction::power(2.0), &p).unwrap();
        assert_eq!(sq.value(Event::from_atoms([1, 3])), 0.25);
        let ent = build_distortion(&DistortionFunction::entropic(1.0), &p).unwrap();
        let expected = (1.0 + (std::f64::consts::E - 1.0) / 4.0).ln();
        assert!((ent.value(Event::singleton(2)) - expected).abs() < 1e-15);
        assert!((expected - 0.357_374_02).abs() < 1e-8);
    }

    #[test]
    fn distortion_domain_errors() {
        let p = ProbabilityCharge::uniform(3).unwrap();
        let shifted = DistortionFunction::custom("shift", |x| x + 1.0);
        assert!(matches!(build_distortion(&shifted, &p), Err(Error::DomainError(_))));
        let log = DistortionFunction::custom("log", |x| if x == 0.0 { 0.0 } else { (x - 0.5).ln() });
        assert!(matches!(build_distortion(&log, &p), Err(Error::DomainError(_))));
    }

    #[test]
    fn family_examples() {
        let p = ProbabilityCharge::uniform(8).unwrap();
        let es = build_family(&Family::Es { beta: 0.75 }, &p).unwrap();
        assert_eq!(by_size(&es)[1], 0.5);
        assert_eq!(by_size(&es)[2], 1.0);
        let var = build_family(&Family::Var { gamma: r(1, 2) }, &p).unwrap();
        assert_eq!(by_size(&var), vec![0., 0., 0., 0., 0., 1., 1., 1., 1.]);
        let rvar = build_family(&Family::Rvar { gamma: r(1, 2) }, &p).unwrap();
        assert_eq!(by_size(&rvar), vec![0., 0., 0., 0., 1., 1., 1., 1., 1.]);
    }

    #[test]
    fn family_parameter_errors() {
        let p = ProbabilityCharge::uniform(2).unwrap();
        for f in [
            Family::Entropic { alpha: 0.0 },
            Family::Es { beta: 1.0 },
            Family::Es { beta: -0.1 },
            Family::Var { gamma: r(0, 1) },
            Family::Rvar { gamma: r(1, 1) },
        ] {
            assert!(matches!(build_family(&f, &p), Err(Error::ParameterOutOfRange(_))), "{f:?}");
        }
    }

    #[test]
    fn property_examples() {
        let p = ProbabilityCharge::uniform(8).unwrap();
        let es = classify_properties(&build_family(&Family::Es { beta: 0.75 }, &p).unwrap()).unwrap();
        assert!(es.submodular.holds && es.subadditive.holds && es.monotone.holds);

        let var = classify_properties(&build_family(&Family::Var { gamma: r(1, 2) }, &p).unwrap()).unwrap();
        assert!(var.superadditive.holds);

        let var = build_family(&Family::Var { gamma: r(3, 4) }, &p).unwrap();
        let rep = classify_properties(&var).unwrap();
        assert!(!rep.superadditive.holds);
        let w = rep.superadditive.witness.unwrap();
        let (a, b) = (w[0], w[1]);
        assert!(a.is_disjoint(b));
        assert!(p.prob(a) > r(1, 4) && p.prob(b) > r(1, 4));
        assert_eq!((var.value(a), var.value(b), var.value(a.union(b))), (1.0, 1.0, 1.0));
    }

    #[test]
    fn property_scan_cap() {
        let big = Game::from_fn(13, |a| a.len() as f64).unwrap();
        assert!(matches!(classify_properties(&big), Err(Error::TooManyAtoms { .. })));
    }

    #[test]
    fn invariance_examples() {
        let p = ProbabilityCharge::uniform(6).unwrap();
        let g = build_family(&Family::Entropic { alpha: 2.0 }, &p).unwrap();
        assert!(check_invariance(&g, &p).unwrap().invariant);

        let coord = Game::from_fn(2, |a| if a.contains(1) { 1.0 } else { 0.0 }).unwrap();
        let w = ProbabilityCharge::from_rationals(&[r(2, 3), r(1, 3)]).unwrap();
        assert!(check_invariance(&coord, &w).unwrap().invariant);

        let u = ProbabilityCharge::uniform(2).unwrap();
        let rep = check_invariance(&coord, &u).unwrap();
        assert!(!rep.invariant);
        assert_eq!(rep.witness, Some((Event::singleton(0), Event::singleton(1))));
    }

    #[test]
    fn conjugate_examples() {
        let p = ProbabilityCharge::uniform(8).unwrap();
        for (g, dual) in [((3, 4), (1, 4)), ((1, 2), (1, 2)), ((1, 8), (7, 8))] {
            let var = build_family(&Family::Var { gamma: r(g.0, g.1) }, &p).unwrap();
            let rvar = build_family(&Family::Rvar { gamma: r(dual.0, dual.1) }, &p).unwrap();
            assert!(conjugate_game(&var).approx_eq(&rvar, 0.0));
        }
        let mu = SignedCharge::new(vec![0.3, -1.2, 2.0]).unwrap();
        let add = Game::additive(&mu);
        assert!(conjugate_game(&add).approx_eq(&add, 1e-12));
        let es = build_family(&Family::Es { beta: 0.3 }, &p).unwrap();
        assert!(conjugate_game(&conjugate_game(&es)).approx_eq(&es, 1e-12));
    }

    #[test]
    fn envelope_examples() {
        let p = SignedCharge::new(vec![0.5, 0.25, 0.25]).unwrap();
        let q = SignedCharge::new(vec![0.1, 0.1, 0.8]).unwrap();
        let up = envelope(EnvelopeMode::Upper, &[p.clone(), q.clone()]).unwrap();
        for a in Event::all(3) {
            assert_eq!(up.value(a), p.value(a).max(q.value(a)));
        }
        let lo = envelope(EnvelopeMode::Lower, std::slice::from_ref(&p)).unwrap();
        assert!(lo.approx_eq(&Game::additive(&p), 0.0));
        assert!(classify_properties(&up).unwrap().subadditive.holds);
        assert_eq!(envelope(EnvelopeMode::Lower, &[]).unwrap_err(), Error::EmptyList);
    }

    #[test]
    fn table_validation() {
        assert!(matches!(Game::from_table(2, vec![0.0; 3]), Err(Error::TableLength { .. })));
        assert!(matches!(Game::from_table(1, vec![1.0, 1.0]), Err(Error::NotAGame(_))));
    }

    #[test]
    fn lazy_games_above_materialize_cap() {
        let p = ProbabilityCharge::uniform(18).unwrap();
        let g = build_family(&Family::Es { beta: 0.5 }, &p).unwrap();
        assert!(g.table().is_none());
        assert!((g.value(Event::singleton(3)) - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(g.value(Event::full(18)), 1.0);
    }
}
