//! Choquet integration, closed-form evaluators for VaR / ES / entropic risk,
//! functional oracles, and randomized tests for comonotonic additivity and
//! law invariance of black-box functionals.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charge_lattice::same_space;
use crate::error::{Error, Result};
use crate::games::Game;
use crate::space::{enumeration_guard, rational_to_f64, Event, FiniteSpace, ProbabilityCharge, Rational, PAIR_SCAN_CAP};
use crate::TOL;

/// Tolerance for comonotonic additivity checks.
pub const COMONOTONIC_TOL: f64 = 1e-7;
/// Above this many atoms, permutation enumeration switches to sampling.
pub const PERMUTATION_CAP: usize = 7;
const SAMPLED_PERMUTATIONS: usize = 500;
pub const DEFAULT_SEED: u64 = 42;

/// A random variable on a finite space: one value per atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimpleRandomVariable {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SimpleRandomVariable {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        SimpleRandomVariable::new(values)
    }
}

impl From<SimpleRandomVariable> for Vec<f64> {
    fn from(x: SimpleRandomVariable) -> Self {
        x.values
    }
}

impl SimpleRandomVariable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySpace);
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(SimpleRandomVariable { values })
    }

    pub fn indicator(atoms: usize, a: Event) -> Self {
        SimpleRandomVariable { values: (0..atoms).map(|i| if a.contains(i) { 1.0 } else { 0.0 }).collect() }
    }

    pub fn constant(atoms: usize, c: f64) -> Self {
        SimpleRandomVariable { values: vec![c; atoms] }
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    pub fn scale(&self, t: f64) -> Self {
        SimpleRandomVariable { values: self.values.iter().map(|v| t * v).collect() }
    }

    pub fn shift(&self, c: f64) -> Self {
        SimpleRandomVariable { values: self.values.iter().map(|v| v + c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_space(self.atoms(), other.atoms())?;
        Ok(SimpleRandomVariable { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() })
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.atoms() == other.atoms() && self.values.iter().zip(&other.values).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// `∫ X dv` for a game `v`, using the asymmetric split for negative values:
/// with distinct values `x₁ > … > x_m` and level sets `L_i = {X ≥ x_i}`,
/// the integral is `x_m·v(Ω) + Σ_{i<m} (x_i − x_{i+1})·v(L_i)`.
pub fn choquet_integral(v: &Game, x: &SimpleRandomVariable) -> Result<f64> {
    same_space(v.atoms(), x.atoms())?;
    let mut order: Vec<usize> = (0..x.atoms()).collect();
    order.sort_by(|&a, &b| x.values[b].total_cmp(&x.values[a]));
    let mut total = 0.0;
    let mut level = Event::EMPTY;
    let mut i = 0;
    while i < order.len() {
        let xi = x.values[order[i]];
        while i < order.len() && x.values[order[i]] == xi {
            level = level.union(Event::singleton(order[i]));
            i += 1;
        }
        let next = if i < order.len() { x.values[order[i]] } else { 0.0 };
        if i < order.len() {
            total += (xi - next) * v.value(level);
        } else {
            total += xi * v.value(level);
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Risk metrics in closed form
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RiskMetric {
    Var {
        #[serde(with = "crate::cli::report::rational_str")]
        gamma: Rational,
    },
    Es { beta: f64 },
    Entropic { alpha: f64 },
}

/// Distinct values of `x` (ascending) with their exact probabilities.
fn distribution(p: &ProbabilityCharge, x: &SimpleRandomVariable) -> Vec<(f64, Rational)> {
    let mut order: Vec<usize> = (0..x.atoms()).collect();
    order.sort_by(|&a, &b| x.values[a].total_cmp(&x.values[b]));
    let mut out: Vec<(f64, Rational)> = Vec::new();
    for i in order {
        let w = p.weight(i);
        match out.last_mut() {
            Some((v, acc)) if *v == x.values[i] => *acc += w,
            _ => out.push((x.values[i], w)),
        }
    }
    out
}

/// Left quantile `inf{x : P(X ≤ x) ≥ q}`, with exact rational comparisons.
pub fn value_at_risk(p: &ProbabilityCharge, x: &SimpleRandomVariable, q: Rational) -> Result<f64> {
    same_space(p.atoms(), x.atoms())?;
    let mut cum = Rational::zero();
    let dist = distribution(p, x);
    for (v, w) in &dist {
        cum += w;
        if cum >= q {
            return Ok(*v);
        }
    }
    Ok(dist.last().map(|d| d.0).unwrap_or(0.0))
}

pub fn evaluate_riskmetric(metric: &RiskMetric, p: &ProbabilityCharge, x: &SimpleRandomVariable) -> Result<f64> {
    same_space(p.atoms(), x.atoms())?;
    match metric {
        RiskMetric::Var { gamma } => {
            if *gamma <= Rational::zero() || *gamma >= Rational::one() {
                return Err(Error::ParameterOutOfRange("VaR level must lie in (0, 1)".into()));
            }
            value_at_risk(p, x, *gamma)
        }
        RiskMetric::Es { beta } => {
            if !(0.0..1.0).contains(beta) {
                return Err(Error::ParameterOutOfRange("ES level must lie in [0, 1)".into()));
            }
            // the quantile is x_j on (F_{j-1}, F_j]; integrate it over (β, 1]
            let mut lo = 0.0;
            let mut acc = 0.0;
            for (v, w) in distribution(p, x) {
                let hi = lo + rational_to_f64(&w);
                let overlap = (hi.min(1.0) - lo.max(*beta)).max(0.0);
                acc += v * overlap;
                lo = hi;
            }
            Ok(acc / (1.0 - beta))
        }
        RiskMetric::Entropic { alpha } => {
            if !(*alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::ParameterOutOfRange("entropic parameter must be > 0".into()));
            }
            let dist = distribution(p, x);
            let shift = dist.iter().filter(|(_, w)| !w.is_zero()).map(|(v, _)| alpha * v).fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = dist.iter().map(|(v, w)| rational_to_f64(w) * (alpha * v - shift).exp()).sum();
            Ok((shift + sum.ln()) / alpha)
        }
    }
}

// ---------------------------------------------------------------------------
// Functional oracles and dictionaries
// ---------------------------------------------------------------------------

type OracleFn = dyn Fn(&SimpleRandomVariable) -> Option<f64> + Send + Sync;

/// A black-box functional `φ`. Returns `None` outside its domain.
#[derive(Clone)]
pub struct FunctionalOracle {
    tag: String,
    eval: Arc<OracleFn>,
}

impl fmt::Debug for FunctionalOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionalOracle({})", self.tag)
    }
}

impl FunctionalOracle {
    pub fn new(tag: &str, f: impl Fn(&SimpleRandomVariable) -> Option<f64> + Send + Sync + 'static) -> Self {
        FunctionalOracle { tag: tag.to_string(), eval: Arc::new(f) }
    }

    /// Wraps an oracle that is not safe for concurrent calls; calls are serialized.
    pub fn serialized(tag: &str, f: impl FnMut(&SimpleRandomVariable) -> Option<f64> + Send + 'static) -> Self {
        let cell = Mutex::new(f);
        Self::new(tag, move |x| (cell.lock().expect("oracle lock"))(x))
    }

    pub fn expectation(p: &ProbabilityCharge) -> Self {
        let w = p.weights_f64();
        Self::new("expectation", move |x| {
            (x.atoms() == w.len()).then(|| w.iter().zip(x.values()).map(|(a, b)| a * b).sum())
        })
    }

    pub fn coordinate(atom: usize) -> Self {
        Self::new(&format!("coordinate({atom})"), move |x| x.values().get(atom).copied())
    }

    pub fn choquet(v: &Game) -> Self {
        let v = v.clone();
        Self::new("choquet", move |x| choquet_integral(&v, x).ok())
    }

    pub fn riskmetric(metric: &RiskMetric, p: &ProbabilityCharge) -> Result<Self> {
        // surface parameter errors at construction
        evaluate_riskmetric(metric, p, &SimpleRandomVariable::constant(p.atoms(), 0.0))?;
        let (m, p) = (metric.clone(), p.clone());
        let tag = match metric {
            RiskMetric::Var { .. } => "var",
            RiskMetric::Es { .. } => "es",
            RiskMetric::Entropic { .. } => "entropic",
        };
        Ok(Self::new(tag, move |x| evaluate_riskmetric(&m, &p, x).ok()))
    }

    /// Functional known only on a finite table of `(variable, value)` pairs.
    pub fn table(entries: Vec<(SimpleRandomVariable, f64)>) -> Self {
        Self::new("table", move |x| entries.iter().find(|(y, _)| y.approx_eq(x, TOL)).map(|(_, v)| *v))
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn evaluate(&self, x: &SimpleRandomVariable) -> Option<f64> {
        (self.eval)(x)
    }
}

/// The test set `𝒟` on which a functional is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dictionary(Vec<SimpleRandomVariable>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum DictionaryStrategy {
    Indicators,
    SignedIndicators,
    IndicatorsPlusConstants,
    RandomSimple { k: usize, seed: u64 },
}

impl Dictionary {
    pub fn new(items: Vec<SimpleRandomVariable>) -> Result<Self> {
        let first = items.first().ok_or(Error::EmptyDictionary)?;
        for x in &items {
            same_space(first.atoms(), x.atoms())?;
        }
        Ok(Dictionary(items))
    }

    pub fn generate(strategy: &DictionaryStrategy, atoms: usize) -> Result<Self> {
        let indicators = || -> Result<Vec<SimpleRandomVariable>> {
            enumeration_guard(atoms, crate::space::ENUMERATION_CAP)?;
            Ok(Event::all(atoms).map(|a| SimpleRandomVariable::indicator(atoms, a)).collect())
        };
        let items = match strategy {
            DictionaryStrategy::Indicators => indicators()?,
            DictionaryStrategy::SignedIndicators => indicators()?.into_iter().flat_map(|x| [x.scale(-1.0), x]).collect(),
            DictionaryStrategy::IndicatorsPlusConstants => {
                let mut v = indicators()?;
                v.push(SimpleRandomVariable::constant(atoms, -1.0));
                v
            }
            DictionaryStrategy::RandomSimple { k, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*k)
                    .map(|_| SimpleRandomVariable { values: (0..atoms).map(|_| rng.gen_range(-4i32..=4) as f64 / 2.0).collect() })
                    .collect()
            }
        };
        Dictionary::new(items)
    }

    pub fn atoms(&self) -> usize {
        self.0[0].atoms()
    }

    pub fn items(&self) -> &[SimpleRandomVariable] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &SimpleRandomVariable) -> bool {
        self.0.iter().any(|y| y.approx_eq(x, TOL))
    }
}

// ---------------------------------------------------------------------------
// Functional-level tests
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub passes: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(SimpleRandomVariable, SimpleRandomVariable)>,
}

/// Random nondecreasing step function applied to the ranks of a common `Z`.
fn comonotone_pair(rng: &mut ChaCha8Rng, atoms: usize) -> (SimpleRandomVariable, SimpleRandomVariable) {
    let mut ranks: Vec<usize> = (0..atoms).collect();
    ranks.shuffle(rng);
    let mut step = || {
        let mut levels: Vec<f64> = (0..atoms).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
        levels.sort_by(f64::total_cmp);
        levels
    };
    let (f, g) = (step(), step());
    let x = ranks.iter().map(|&r| f[r]).collect();
    let y = ranks.iter().map(|&r| g[r]).collect();
    (SimpleRandomVariable { values: x }, SimpleRandomVariable { values: y })
}

/// Samples comonotone pairs and checks `φ(X+Y) = φ(X) + φ(Y)`.
pub fn comonotonic_additivity_test(phi: &FunctionalOracle, space: &FiniteSpace, trials: usize, seed: u64) -> Result<WitnessReport> {
    if trials == 0 {
        return Err(Error::ParameterOutOfRange("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let (x, y) = comonotone_pair(&mut rng, space.atoms());
        let sum = x.add(&y)?;
        let (Some(fx), Some(fy), Some(fs)) = (phi.evaluate(&x), phi.evaluate(&y), phi.evaluate(&sum)) else {
            continue;
        };
        if (fs - fx - fy).abs() > COMONOTONIC_TOL {
            return Ok(WitnessReport { passes: false, witness: Some((x, y)) });
        }
    }
    Ok(WitnessReport { passes: true, witness: None })
}

/// Next lexicographic permutation in place; false once the last one is reached.
fn next_permutation(v: &mut [f64]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Variables with the same `P`-distribution as `x` (all of them when
/// enumeration is feasible, otherwise a seeded sample on uniform spaces).
pub fn equidistributed_variants(p: &ProbabilityCharge, x: &SimpleRandomVariable, seed: u64) -> Result<Vec<SimpleRandomVariable>> {
    same_space(p.atoms(), x.atoms())?;
    let n = x.atoms();
    if p.is_uniform() {
        if n <= PERMUTATION_CAP {
            let mut vals = x.values.clone();
            vals.sort_by(f64::total_cmp);
            let mut out = vec![SimpleRandomVariable { values: vals.clone() }];
            while next_permutation(&mut vals) {
                out.push(SimpleRandomVariable { values: vals.clone() });
            }
            return Ok(out);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok((0..SAMPLED_PERMUTATIONS)
            .map(|_| {
                let mut v = x.values.clone();
                v.shuffle(&mut rng);
                SimpleRandomVariable { values: v }
            })
            .collect());
    }
    enumeration_guard(n, PAIR_SCAN_CAP)?;
    let support = p.support();
    let mut levels: Vec<(f64, i128)> = Vec::new();
    for i in support.atoms() {
        let key = p.key(Event::singleton(i));
        match levels.iter_mut().find(|(v, _)| *v == x.values[i]) {
            Some(l) => l.1 += key,
            None => levels.push((x.values[i], key)),
        }
    }
    let mut out = Vec::new();
    let mut current = x.values.clone();
    assign_levels(p, &levels, support, &mut current, &mut out);
    Ok(out)
}

fn assign_levels(p: &ProbabilityCharge, levels: &[(f64, i128)], free: Event, current: &mut Vec<f64>, out: &mut Vec<SimpleRandomVariable>) {
    let Some(((value, key), rest)) = levels.split_first() else {
        out.push(SimpleRandomVariable { values: current.clone() });
        return;
    };
    for b in free.subsets().filter(|b| p.key(*b) == *key) {
        for i in b.atoms() {
            current[i] = *value;
        }
        assign_levels(p, rest, free.difference(b), current, out);
    }
}

/// Searches the dictionary for a pair with equal `P`-distribution but
/// different `φ` values.
pub fn functional_invariance_test(phi: &FunctionalOracle, p: &ProbabilityCharge, dictionary: &Dictionary) -> Result<WitnessReport> {
    if dictionary.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    same_space(p.atoms(), dictionary.atoms())?;
    for x in dictionary.items() {
        let Some(fx) = phi.evaluate(x) else { continue };
        for y in equidistributed_variants(p, x, DEFAULT_SEED)? {
            if let Some(fy) = phi.evaluate(&y) {
                if (fx - fy).abs() > TOL {
                    return Ok(WitnessReport { passes: false, witness: Some((x.clone(), y)) });
                }
            }
        }
    }
    Ok(WitnessReport { passes: true, witness: None })
}
