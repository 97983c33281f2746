//! Turning extrema into reference probabilities.
//!
//! For distortion games the loose extrema are multiples of the reference
//! probability, so normalizing them yields the candidate and the scale yields
//! the family parameter. Value-at-Risk capacities have trivial extrema and go
//! through a recursion `g_t` (small levels) or `h_t` (large levels) whose
//! derived game has informative extrema again, up to a factor-2 quantization
//! of the level.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charge_lattice::SignedCharge;
use crate::error::{Error, Result};
use crate::games::{entropic_h, DistortionFunction, Game, MATERIALIZE_CAP};
use crate::space::{enumeration_guard, format_rational, rational_to_f64, Event, FiniteSpace, ProbabilityCharge, Rational, ENUMERATION_CAP};
use crate::supports::{self, loose_extremum, ExtremumReport, GameSide, Status};
use crate::TOL;

/// Largest space on which the recursion is evaluated by enumeration.
pub const BRUTE_ATOM_CAP: usize = 10;
/// Largest recursion depth (keeps `2^T` exact in `i128`).
pub const MAX_DEPTH: usize = 62;
/// Residual above which an extremum is not considered proportional.
pub const PROPORTIONALITY_TOL: f64 = 1e-7;
/// Largest `n` accepted by [`convergence_study`].
pub const CONVERGENCE_CAP: usize = 1 << 24;

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Ok,
    ZeroExtremum,
    NotProportional,
    Signed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateReport {
    pub status: CandidateStatus,
    #[serde(serialize_with = "crate::cli::report::ser_opt_probability")]
    pub candidate: Option<ProbabilityCharge>,
    pub scale: Option<f64>,
    pub residual: f64,
}

/// Normalizes an extremum into a candidate probability and its scale.
pub fn candidate_from_extremum(report: &ExtremumReport) -> Result<CandidateReport> {
    let mu = match (&report.status, &report.extremum) {
        (Status::Exists, Some(mu)) => mu,
        (status, _) => return Err(Error::NoExtremum(format!("extremum status is {status:?}"))),
    };
    if mu.is_zero(TOL) {
        return Ok(CandidateReport { status: CandidateStatus::ZeroExtremum, candidate: None, scale: None, residual: 0.0 });
    }
    if mu.values().iter().any(|&x| x < -TOL) {
        return Ok(CandidateReport { status: CandidateStatus::Signed, candidate: None, scale: None, residual: f64::NAN });
    }
    let c = mu.total();
    let weights: Vec<f64> = mu.values().iter().map(|x| x.max(0.0) / c).collect();
    let p = ProbabilityCharge::from_reals(&weights)?;
    let residual = proportionality_residual(mu, &p);
    let status = if residual <= PROPORTIONALITY_TOL { CandidateStatus::Ok } else { CandidateStatus::NotProportional };
    Ok(CandidateReport { status, candidate: Some(p), scale: Some(c), residual })
}

/// `max_ω |μ(ω) − c·P(ω)| / |c|` with `c = μ(Ω)`; infinite when `c = 0`.
pub fn proportionality_residual(mu: &SignedCharge, p: &ProbabilityCharge) -> f64 {
    let c = mu.total();
    if c.abs() <= TOL || mu.atoms() != p.atoms() {
        return f64::INFINITY;
    }
    mu.values()
        .iter()
        .zip(p.weights_f64())
        .map(|(m, w)| (m - c * w).abs() / c.abs())
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Parameter recovery
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterFamily {
    Es,
    Entropic,
}

/// `(e^α − 1)/α`, the limit of loose extremum totals for the entropic game.
pub fn entropic_scale(alpha: f64) -> f64 {
    alpha.exp_m1() / alpha
}

/// Inverts the scale of a loose extremum into the family parameter.
pub fn recover_parameter(family: ParameterFamily, c: f64) -> Result<f64> {
    if !c.is_finite() {
        return Err(Error::NonFinite(c));
    }
    if c == 1.0 {
        return Err(Error::OutOfRange("c = 1 is the boundary (beta = 0, alpha -> 0)".into()));
    }
    if c < 1.0 {
        return Err(Error::OutOfRange(format!("c = {c} < 1 has no valid parameter")));
    }
    match family {
        ParameterFamily::Es => Ok(1.0 - 1.0 / c),
        ParameterFamily::Entropic => {
            let (mut lo, mut hi) = (1e-8, 50.0);
            if c < entropic_scale(lo) || c > entropic_scale(hi) {
                return Err(Error::OutOfRange(format!("c = {c} is outside the bracket of alpha in [1e-8, 50]")));
            }
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if entropic_scale(mid) < c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

// ---------------------------------------------------------------------------
// Level brackets
// ---------------------------------------------------------------------------

/// A half-open interval `(lo, hi]` of levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    #[serde(with = "crate::cli::report::rational_str")]
    pub lo: Rational,
    #[serde(with = "crate::cli::report::rational_str")]
    pub hi: Rational,
}

impl Bracket {
    pub fn new(lo: Rational, hi: Rational) -> Option<Self> {
        (lo < hi).then_some(Bracket { lo, hi })
    }

    pub fn contains(&self, x: Rational) -> bool {
        self.lo < x && x <= self.hi
    }

    pub fn width(&self) -> Rational {
        self.hi - self.lo
    }

    pub fn intersect(&self, other: &Bracket) -> Option<Bracket> {
        Bracket::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaEstimate {
    /// On a finite grid every level in the readoff bracket induces the same
    /// capacity; `Exact` names the largest of them, which the estimator
    /// `1/ĉ` hits exactly.
    Exact {
        #[serde(with = "crate::cli::report::rational_str")]
        value: Rational,
    },
    Bracket {
        #[serde(with = "crate::cli::report::rational_str")]
        lo: Rational,
        #[serde(with = "crate::cli::report::rational_str")]
        hi: Rational,
    },
}

impl GammaEstimate {
    /// The estimate as a bracket; an exact value collapses to `(v, v]`.
    pub fn bounds(&self) -> (Rational, Rational) {
        match *self {
            GammaEstimate::Exact { value } => (value, value),
            GammaEstimate::Bracket { lo, hi } => (lo, hi),
        }
    }

    pub fn contains(&self, gamma: Rational) -> bool {
        match *self {
            GammaEstimate::Exact { value } => value == gamma,
            GammaEstimate::Bracket { lo, hi } => lo < gamma && gamma <= hi,
        }
    }
}

impl From<Bracket> for GammaEstimate {
    fn from(b: Bracket) -> Self {
        GammaEstimate::Bracket { lo: b.lo, hi: b.hi }
    }
}

// ---------------------------------------------------------------------------
// Capacities and probability classes
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Small,
    Large,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerMethod {
    Brute,
    ClosedForm,
}

/// Distinct event probabilities of a space, each with one representative.
struct Classes {
    keys: Vec<i128>,
    reps: Vec<Event>,
    denom: i128,
}

impl Classes {
    fn of(p: &ProbabilityCharge) -> Result<Self> {
        let n = p.atoms();
        if p.is_uniform() {
            let unit = p.key(Event::singleton(0));
            let keys = (0..=n as i128).map(|k| k * unit).collect();
            let reps = (0..=n).map(Event::full).collect();
            return Ok(Classes { keys, reps, denom: p.denominator() });
        }
        enumeration_guard(n, ENUMERATION_CAP)?;
        let mut by_key: HashMap<i128, Event> = HashMap::new();
        for a in Event::all(n) {
            by_key.entry(p.key(a)).or_insert(a);
        }
        let mut pairs: Vec<(i128, Event)> = by_key.into_iter().collect();
        pairs.sort_by_key(|(k, _)| *k);
        let (keys, reps) = pairs.into_iter().unzip();
        Ok(Classes { keys, reps, denom: p.denominator() })
    }

    fn probability(&self, i: usize) -> Rational {
        Rational::new(self.keys[i], self.denom)
    }

    fn position(&self, key: i128) -> usize {
        self.keys.binary_search(&key).expect("every event key is a class")
    }
}

/// Values of a 0/1 capacity per probability class, after validating that it
/// is invariant, monotone in the class and normalized.
fn capacity_profile(capacity: &Game, p: &ProbabilityCharge, classes: &Classes) -> Result<Vec<u8>> {
    let n = p.atoms();
    if capacity.atoms() != n {
        return Err(Error::SpaceMismatch { left: capacity.atoms(), right: n });
    }
    let as_bit = |x: f64| -> Result<u8> {
        if x == 0.0 {
            Ok(0)
        } else if x == 1.0 {
            Ok(1)
        } else {
            Err(Error::NotACapacity(format!("value {x} is not 0 or 1")))
        }
    };
    let profile = classes.reps.iter().map(|&a| as_bit(capacity.value(a))).collect::<Result<Vec<u8>>>()?;
    let known_invariant = capacity.distortion().is_some_and(|(_, q)| q == p);
    if !known_invariant {
        enumeration_guard(n, MATERIALIZE_CAP)?;
        for a in Event::all(n) {
            let expected = profile[classes.position(p.key(a))];
            if as_bit(capacity.value(a))? != expected {
                return Err(Error::NotACapacity(format!("value at {a:?} differs from another event of the same probability")));
            }
        }
    }
    if profile.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::NotACapacity("values decrease in the event probability".into()));
    }
    if profile[0] != 0 {
        return Err(Error::NotACapacity("value at the empty event must be 0".into()));
    }
    if profile[profile.len() - 1] != 1 {
        return Err(Error::NotACapacity("value at the full event must be 1".into()));
    }
    Ok(profile)
}

/// Small branch iff some event `A` has `VaR(𝟏_A) = VaR(𝟏_{A^c}) = 0`.
pub fn var_branch_classifier(capacity: &Game, space: &FiniteSpace) -> Result<Branch> {
    let p = space.probability();
    let classes = Classes::of(p)?;
    let profile = capacity_profile(capacity, p, &classes)?;
    Ok(classify(&profile, &classes))
}

fn classify(profile: &[u8], classes: &Classes) -> Branch {
    let small = (0..classes.keys.len()).any(|i| profile[i] == 0 && profile[classes.position(classes.denom - classes.keys[i])] == 0);
    if small {
        Branch::Small
    } else {
        Branch::Large
    }
}

// ---------------------------------------------------------------------------
// Recursion layers
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClassValue {
    #[serde(serialize_with = "crate::cli::report::ser_rational")]
    pub probability: Rational,
    pub value: u8,
}

/// `g_t` (small branch) or `h_t` (large branch) as a function of `P(A)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecursionLayer {
    pub branch: Branch,
    pub t: usize,
    pub values: Vec<ClassValue>,
    pub method: LayerMethod,
}

impl RecursionLayer {
    pub fn value_at(&self, probability: Rational) -> Option<u8> {
        self.values.iter().find(|c| c.probability == probability).map(|c| c.value)
    }

    /// Nondecreasing in the probability class.
    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0].value <= w[1].value)
    }

    /// Same branch, depth and values (the method may differ).
    pub fn same_table(&self, other: &RecursionLayer) -> bool {
        self.branch == other.branch && self.t == other.t && self.values == other.values
    }
}

/// The layer-0 table and the resolution data of a capacity.
struct Base {
    branch: Branch,
    classes: Classes,
    layer0: Vec<u8>,
    /// Effective threshold: `γ` rounded up to the grid (small) or `1 − γ`
    /// rounded down to the grid (large).
    theta: Rational,
    t_max: usize,
}

impl Base {
    fn new(branch: Branch, capacity: &Game, p: &ProbabilityCharge) -> Result<Self> {
        let classes = Classes::of(p)?;
        let profile = capacity_profile(capacity, p, &classes)?;
        let m = classes.keys.len();
        let layer0: Vec<u8> = match branch {
            // g_0(A) = 1 − VaR(𝟏_{A^c})
            Branch::Small => (0..m).map(|i| 1 - profile[classes.position(classes.denom - classes.keys[i])]).collect(),
            Branch::Large => profile,
        };
        let theta = match branch {
            Branch::Small => (0..m).find(|&i| layer0[i] == 1).map(|i| classes.probability(i)),
            Branch::Large => (0..m).rev().find(|&i| layer0[i] == 0).map(|i| classes.probability(i)),
        }
        .expect("normalized capacity has both values");
        let p_min = classes.probability(1);
        let mut t_max = 0;
        if theta >= p_min {
            while theta / Rational::from(1i128 << (t_max + 1)) >= p_min && t_max < MAX_DEPTH {
                t_max += 1;
            }
        }
        Ok(Base { branch, classes, layer0, theta, t_max })
    }

    fn layer(&self, t: usize, values: &[u8], method: LayerMethod) -> RecursionLayer {
        let values = values
            .iter()
            .enumerate()
            .map(|(i, &value)| ClassValue { probability: self.classes.probability(i), value })
            .collect();
        RecursionLayer { branch: self.branch, t, values, method }
    }

    fn closed_form(&self, t: usize) -> Vec<u8> {
        threshold_values(self.branch, self.theta, t, &self.classes)
    }
}

fn threshold_values(branch: Branch, theta: Rational, t: usize, classes: &Classes) -> Vec<u8> {
    let cut = theta / Rational::from(1i128 << t);
    (0..classes.keys.len())
        .map(|i| {
            let p = classes.probability(i);
            let hit = match branch {
                Branch::Small => p >= cut,
                Branch::Large => p > cut,
            };
            u8::from(hit)
        })
        .collect()
}

/// One step `g_t(A) = min(1, sup_B inf_{C ⊆ A^c} {g(A∪B) + g(A∪C) − g(B∪C)})`,
/// evaluated on one representative per class.
fn brute_step(prev: &[u8], p: &ProbabilityCharge, classes: &Classes) -> Vec<u8> {
    let n = p.atoms();
    let class_of: Vec<usize> = Event::all(n).map(|a| classes.position(p.key(a))).collect();
    let g: Vec<i32> = class_of.iter().map(|&c| i32::from(prev[c])).collect();
    classes
        .reps
        .par_iter()
        .map(|&a| {
            let comp = a.complement(n);
            let mut best = i32::MIN;
            for b in Event::all(n) {
                let gab = g[a.union(b).index()];
                let mut worst = i32::MAX;
                for c in comp.subsets() {
                    let val = gab + g[a.union(c).index()] - g[b.union(c).index()];
                    worst = worst.min(val);
                    if worst <= best {
                        break;
                    }
                }
                best = best.max(worst.min(1));
                if best >= 1 {
                    break;
                }
            }
            best.clamp(0, 1) as u8
        })
        .collect()
}

/// The threshold rule for a known level: `P(A) ≥ 2^{-t}γ` (small) or
/// `P(A) > 2^{-t}(1 − γ)` (large).
pub fn closed_form_layer(branch: Branch, gamma: Rational, t: usize, p: &ProbabilityCharge) -> Result<RecursionLayer> {
    if t > MAX_DEPTH {
        return Err(Error::ParameterOutOfRange(format!("depth {t} exceeds {MAX_DEPTH}")));
    }
    let classes = Classes::of(p)?;
    let theta = match branch {
        Branch::Small => gamma,
        Branch::Large => Rational::one() - gamma,
    };
    let values = threshold_values(branch, theta, t, &classes);
    let values = values
        .iter()
        .enumerate()
        .map(|(i, &value)| ClassValue { probability: classes.probability(i), value })
        .collect();
    Ok(RecursionLayer { branch, t, values, method: LayerMethod::ClosedForm })
}

/// Largest depth at which the brute recursion is trusted for this capacity.
pub fn resolution_limit(branch: Branch, capacity: &Game, space: &FiniteSpace) -> Result<usize> {
    Ok(Base::new(branch, capacity, space.probability())?.t_max)
}

/// Layer `t` of the recursion started from a VaR capacity.
///
/// The closed form uses the grid-effective level read off layer 0, which on
/// uniform spaces produces the same table as the true level.
pub fn var_layer(branch: Branch, t: usize, mode: LayerMethod, space: &FiniteSpace, capacity: &Game) -> Result<RecursionLayer> {
    if t > MAX_DEPTH {
        return Err(Error::ParameterOutOfRange(format!("depth {t} exceeds {MAX_DEPTH}")));
    }
    let p = space.probability();
    if mode == LayerMethod::Brute {
        enumeration_guard(p.atoms(), BRUTE_ATOM_CAP)?;
    }
    let base = Base::new(branch, capacity, p)?;
    match mode {
        LayerMethod::ClosedForm => Ok(base.layer(t, &base.closed_form(t), mode)),
        LayerMethod::Brute => {
            if t > base.t_max {
                return Err(Error::ResolutionExceeded { t, t_max: base.t_max });
            }
            let mut values = base.layer0.clone();
            for _ in 0..t {
                values = brute_step(&values, p, &base.classes);
            }
            Ok(base.layer(t, &values, mode))
        }
    }
}

/// Layers `0..=depth`, brute while trusted and closed form beyond.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerSchedule {
    pub layers: Vec<RecursionLayer>,
    pub t_max: usize,
    /// Last depth computed by enumeration, if any.
    pub brute_until: Option<usize>,
    /// Whether brute layers matched the closed form.
    pub cross_check_agrees: Option<bool>,
}

pub fn var_layers(branch: Branch, depth: usize, space: &FiniteSpace, capacity: &Game) -> Result<LayerSchedule> {
    if depth > MAX_DEPTH {
        return Err(Error::ParameterOutOfRange(format!("depth {depth} exceeds {MAX_DEPTH}")));
    }
    let p = space.probability();
    let base = Base::new(branch, capacity, p)?;
    let brute = p.atoms() <= BRUTE_ATOM_CAP;
    let mut layers = Vec::with_capacity(depth + 1);
    let mut agrees = true;
    let mut brute_until = None;
    let mut current = base.layer0.clone();
    for t in 0..=depth {
        let closed = base.closed_form(t);
        if brute && t <= base.t_max {
            if t > 0 {
                current = brute_step(&current, p, &base.classes);
            }
            agrees &= current == closed;
            brute_until = Some(t);
            layers.push(base.layer(t, &current, LayerMethod::Brute));
        } else {
            layers.push(base.layer(t, &closed, LayerMethod::ClosedForm));
        }
    }
    let cross_check_agrees = brute_until.map(|_| agrees);
    Ok(LayerSchedule { layers, t_max: base.t_max, brute_until, cross_check_agrees })
}

/// `sup{2^{-t} : layer_t = 1}` per probability class, exact.
fn derived_class_values(layers: &[RecursionLayer]) -> Result<Vec<(Rational, Rational)>> {
    let first = layers.first().ok_or_else(|| Error::InconsistentLayers("no layers".into()))?;
    for (t, layer) in layers.iter().enumerate() {
        if layer.t != t {
            return Err(Error::InconsistentLayers(format!("layer {} found at position {t}", layer.t)));
        }
        if layer.branch != first.branch {
            return Err(Error::InconsistentLayers("layers mix branches".into()));
        }
        if layer.values.len() != first.values.len() || layer.values.iter().zip(&first.values).any(|(a, b)| a.probability != b.probability) {
            return Err(Error::InconsistentLayers(format!("layer {t} has different probability classes")));
        }
    }
    Ok(first
        .values
        .iter()
        .enumerate()
        .map(|(i, cv)| {
            let value = layers
                .iter()
                .find(|l| l.values[i].value == 1)
                .map_or(Rational::zero(), |l| Rational::new(1, 1i128 << l.t));
            (cv.probability, value)
        })
        .collect())
}

/// `v(A) = sup{2^{-t} : g_t(A) = 1}` (or `w` from `h_t`), zero when never 1.
pub fn derived_game(layers: &[RecursionLayer], p: &ProbabilityCharge) -> Result<Game> {
    let values = derived_class_values(layers)?;
    let by_key: HashMap<i128, f64> = values
        .iter()
        .map(|(prob, v)| ((prob * p.denominator()).to_integer(), rational_to_f64(v)))
        .collect();
    let n = p.atoms();
    for a in Event::all(n).take(1 << n.min(MATERIALIZE_CAP)) {
        if !by_key.contains_key(&p.key(a)) {
            return Err(Error::InconsistentLayers(format!("no class for probability {}", format_rational(&p.prob(a)))));
        }
    }
    let prob = p.clone();
    Game::from_fn(n, move |a| by_key[&prob.key(a)])
}

// ---------------------------------------------------------------------------
// The pipeline
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElicitationDiagnostics {
    pub depth: usize,
    pub t_max: usize,
    pub brute_until: Option<usize>,
    pub cross_check_agrees: Option<bool>,
    pub quantization_note: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElicitationReport {
    pub branch: Branch,
    #[serde(serialize_with = "crate::cli::report::ser_probability")]
    pub candidate: ProbabilityCharge,
    #[serde(serialize_with = "crate::cli::report::ser_rational")]
    pub scale: Rational,
    pub gamma_estimate: GammaEstimate,
    /// The factor-2 bracket implied by the derived game.
    pub dyadic_bracket: Bracket,
    /// The grid bracket of [`threshold_readoff`] (uniform spaces).
    pub readoff_bracket: Option<Bracket>,
    /// Intersection of both brackets.
    pub refined_bracket: Bracket,
    pub extremum: ExtremumReport,
    pub diagnostics: ElicitationDiagnostics,
}

/// Per-atom level bracket from the derived singleton value `s` and the atom
/// probability `p`.
fn atom_bracket(branch: Branch, s: Rational, p: Rational, depth: usize) -> Option<Bracket> {
    let one = Rational::one();
    let two = Rational::from(2);
    let reach = p * Rational::from(1i128 << depth);
    match branch {
        Branch::Small if s.is_zero() => Bracket::new(reach, one),
        Branch::Small if s == one => Bracket::new(Rational::zero(), p),
        Branch::Small => Bracket::new(p / (two * s), p / s),
        Branch::Large if s.is_zero() => Bracket::new(Rational::zero(), one - reach),
        Branch::Large if s == one => Bracket::new(one - p, one),
        Branch::Large => Bracket::new(one - p / s, one - p / (two * s)),
    }
}

/// Recovers the reference probability and brackets the level of a VaR
/// capacity `A ↦ VaR_γ(𝟏_A)`.
pub fn elicit_var(capacity: &Game, space: &FiniteSpace, depth: usize) -> Result<ElicitationReport> {
    let p = space.probability();
    let n = p.atoms();
    let branch = var_branch_classifier(capacity, space)?;
    let schedule = var_layers(branch, depth, space, capacity)?;
    let class_values = derived_class_values(&schedule.layers)?;
    let lookup = |prob: Rational| class_values.iter().find(|(q, _)| *q == prob).map(|(_, v)| *v).expect("class exists");
    let singles: Vec<Rational> = (0..n).map(|i| lookup(p.weight(i))).collect();
    let total: Rational = singles.iter().sum();
    if total.is_zero() {
        return Err(Error::ParameterOutOfRange(format!("depth {depth} is too small: no atom reached value 1")));
    }

    let game = derived_game(&schedule.layers, p)?;
    let side = match branch {
        Branch::Small => GameSide::CoreInf,
        Branch::Large => GameSide::AnticoreSup,
    };
    let extremum = loose_extremum(&game, side);
    let candidate = ProbabilityCharge::from_rationals(&singles.iter().map(|s| s / total).collect::<Vec<_>>())?;

    let mut dyadic = Bracket::new(Rational::zero(), Rational::one()).expect("nonempty");
    for i in (0..n).filter(|&i| !p.weight(i).is_zero()) {
        let b = atom_bracket(branch, singles[i], p.weight(i), depth).ok_or_else(|| Error::NotACapacity("no level is consistent with the derived game".into()))?;
        dyadic = dyadic.intersect(&b).ok_or_else(|| Error::NotACapacity("atom brackets do not intersect".into()))?;
    }
    let readoff = if p.is_uniform() { Some(threshold_readoff(capacity, space)?) } else { None };
    let refined = match &readoff {
        Some(r) => dyadic.intersect(r).ok_or_else(|| Error::NotACapacity("readoff and dyadic brackets are disjoint".into()))?,
        None => dyadic,
    };

    let mut warnings = Vec::new();
    let degenerate_top = singles.iter().all(|s| *s == Rational::one());
    if degenerate_top {
        warnings.push("every nonempty event is reached at depth 0: the level is only bounded by one grid step".into());
    }
    if let Some(b) = schedule.brute_until {
        if b < depth {
            warnings.push(format!("layers beyond t = {b} use the threshold rule (grid resolution reached)"));
        }
    }
    let point = total.recip();
    let gamma_estimate = match branch {
        Branch::Small if !degenerate_top && readoff.is_some() && refined.contains(point) => GammaEstimate::Exact { value: point },
        _ => dyadic.into(),
    };
    let quantization_note = match branch {
        Branch::Small => format!(
            "total {} of the derived game brackets gamma in (1/(2c), 1/c]; the grid readoff narrows it to ({}, {}]",
            format_rational(&total),
            format_rational(&refined.lo),
            format_rational(&refined.hi)
        ),
        Branch::Large => format!(
            "total {} of the derived game brackets 1/(1-gamma) in (c, 2c]; the grid readoff narrows gamma to ({}, {}]",
            format_rational(&total),
            format_rational(&refined.lo),
            format_rational(&refined.hi)
        ),
    };
    Ok(ElicitationReport {
        branch,
        candidate,
        scale: total,
        gamma_estimate,
        dyadic_bracket: dyadic,
        readoff_bracket: readoff,
        refined_bracket: refined,
        extremum,
        diagnostics: ElicitationDiagnostics {
            depth,
            t_max: schedule.t_max,
            brute_until: schedule.brute_until,
            cross_check_agrees: schedule.cross_check_agrees,
            quantization_note,
            warnings,
        },
    })
}

/// If the smallest class where the capacity is 1 has probability `k/n`, then
/// `γ ∈ (1 − k/n, 1 − (k−1)/n]`.
pub fn threshold_readoff(capacity: &Game, space: &FiniteSpace) -> Result<Bracket> {
    if !space.is_uniform() {
        return Err(Error::ParameterOutOfRange("threshold readoff needs a uniform space".into()));
    }
    let n = space.atoms();
    if capacity.atoms() != n {
        return Err(Error::SpaceMismatch { left: capacity.atoms(), right: n });
    }
    let k = (1..=n).find(|&k| capacity.value(Event::full(k)) == 1.0).ok_or(Error::AllZero)?;
    let step = |j: usize| Rational::one() - Rational::new(j as i128, n as i128);
    Ok(Bracket::new(step(k), step(k - 1)).expect("grid step is positive"))
}

// ---------------------------------------------------------------------------
// Convergence under refinement
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ConvergenceFamily {
    Entropic { alpha: f64 },
    Es { beta: f64 },
    /// `h(x) = max(x, level)` for `x > 0`, with `h(0) = 0`.
    Floor { level: f64 },
}

impl ConvergenceFamily {
    pub fn distortion(&self) -> Result<DistortionFunction> {
        match *self {
            ConvergenceFamily::Entropic { alpha } if alpha > 0.0 && alpha.is_finite() => Ok(DistortionFunction::entropic(alpha)),
            ConvergenceFamily::Es { beta } if (0.0..1.0).contains(&beta) => Ok(DistortionFunction::es(beta)),
            ConvergenceFamily::Floor { level } if level > 0.0 && level <= 1.0 => {
                Ok(DistortionFunction::custom("floor", move |x| if x > 0.0 { x.max(level) } else { 0.0 }))
            }
            _ => Err(Error::ParameterOutOfRange(format!("{self:?}"))),
        }
    }

    /// Limit of the statistic as the uniform grid is refined, if it exists.
    pub fn limit(&self, statistic: Statistic) -> Option<f64> {
        match (self, statistic) {
            (ConvergenceFamily::Entropic { alpha }, Statistic::Total) => Some(entropic_scale(*alpha)),
            (ConvergenceFamily::Es { beta }, Statistic::Total) => Some(1.0 / (1.0 - beta)),
            (ConvergenceFamily::Floor { .. }, Statistic::Total) => None,
            (ConvergenceFamily::Entropic { .. } | ConvergenceFamily::Es { .. }, Statistic::PerAtom) => Some(0.0),
            (ConvergenceFamily::Floor { level }, Statistic::PerAtom) => Some(*level),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `Σ_ω v({ω})`, the total of the loose extremum.
    #[default]
    Total,
    /// `v({ω})` for one atom.
    PerAtom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub statistic: f64,
    pub limit: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceSeries {
    pub rows: Vec<ConvergenceRow>,
    pub diverging: bool,
}

/// Loose extremum statistic of the family's game on uniform(n) for each `n`.
///
/// Small spaces build the game and take its loose extremum; larger ones
/// evaluate the singleton value `h(1/n)` directly, which is what the loose
/// extremum of an invariant game reduces to.
pub fn convergence_study(family: &ConvergenceFamily, ns: &[usize], statistic: Statistic) -> Result<ConvergenceSeries> {
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::ParameterOutOfRange("n sequence must be positive and ascending".into()));
    }
    if let Some(&last) = ns.last() {
        if last > CONVERGENCE_CAP {
            return Err(Error::TooManyAtoms { atoms: last, limit: CONVERGENCE_CAP });
        }
    }
    let h = family.distortion()?;
    let limit = family.limit(statistic);
    let rows = ns
        .iter()
        .map(|&n| {
            let single = if n <= MATERIALIZE_CAP {
                let v = crate::games::build_distortion(&h, &ProbabilityCharge::uniform(n)?)?;
                loose_extremum(&v, GameSide::CoreInf).extremum.expect("closed form exists").atom(0)
            } else {
                h.eval_f64(Rational::new(1, n as i128))?
            };
            let value = match statistic {
                Statistic::Total => n as f64 * single,
                Statistic::PerAtom => single,
            };
            Ok(ConvergenceRow { n, statistic: value, limit, abs_error: limit.map(|l| (value - l).abs()) })
        })
        .collect::<Result<Vec<_>>>()?;
    let totals: Vec<(usize, f64)> = rows
        .iter()
        .map(|r| (r.n, if statistic == Statistic::Total { r.statistic } else { r.statistic * r.n as f64 }))
        .collect();
    Ok(ConvergenceSeries { rows, diverging: supports::grows_linearly(&totals) })
}

/// Entropic singleton value, exposed for analytic comparisons.
pub fn entropic_singleton(alpha: f64, n: usize) -> f64 {
    entropic_h(alpha, 1.0 / n as f64)
}
