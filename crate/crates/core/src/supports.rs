//! Extrema of supporting sets, cores and anticores.
//!
//! On a finite space the lattice supremum of a set of charges is its
//! coordinatewise supremum, so every extremum reduces to one optimization per
//! atom. For the loose (anti)core this has a closed form: at atom `ω` the
//! supremum of `{μ : μ ≤ v}` is `v({ω})` (all other coordinates can be pushed
//! down without violating an upper constraint), and symmetrically for the
//! infimum of the loose core. Normalized sets and dictionary-defined sets are
//! solved per atom by linear programming.

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charge_lattice::{same_space, SignedCharge};
use crate::choquet::{Dictionary, FunctionalOracle, SimpleRandomVariable};
use crate::error::{Error, Result};
use crate::games::{DistortionFunction, Game};
use crate::lp::{self, Constraint, LpProblem, LpResult, Relation, Sense};
use crate::space::{enumeration_guard, Event, ProbabilityCharge, Rational};
use crate::TOL;

/// Atom cap for LPs carrying one constraint per event.
pub const LP_ATOM_CAP: usize = 10;
/// Atom cap for dictionary LPs (one variable per atom).
pub const DICTIONARY_ATOM_CAP: usize = 16;
const MAX_BINDING: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameSide {
    /// Supremum of the (loose) anticore `{μ ≤ v}`.
    AnticoreSup,
    /// Infimum of the (loose) core `{μ ≥ v}`.
    CoreInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionarySide {
    /// Supremum of `{μ : ⟨μ, X⟩ ≤ φ(X) for X ∈ 𝒟}`.
    LowerSup,
    /// Infimum of `{μ : ⟨μ, X⟩ ≥ φ(X) for X ∈ 𝒟}`.
    UpperInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Exists,
    Unbounded,
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Lp,
}

/// Optimum at one atom together with the constraints binding there.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomOutcome {
    pub atom: usize,
    pub value: Option<f64>,
    /// Indices of binding constraints: event bitmasks for games, dictionary
    /// positions for functionals. Truncated to a few entries.
    pub binding: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremumReport {
    pub status: Status,
    pub extremum: Option<SignedCharge>,
    pub per_atom: Vec<AtomOutcome>,
    pub method: Method,
    /// Atoms whose optimization is unbounded.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unbounded_atoms: Vec<usize>,
    /// Rows certifying emptiness.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub infeasible_rows: Vec<usize>,
    /// Largest deviation between closed form and LP, when cross-checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_discrepancy: Option<f64>,
}

impl ExtremumReport {
    fn from_outcomes(method: Method, outcomes: Vec<(usize, LpResult, Vec<usize>)>) -> Self {
        if let Some((_, LpResult::Infeasible { rows }, _)) = outcomes.iter().find(|o| matches!(o.1, LpResult::Infeasible { .. })) {
            return ExtremumReport {
                status: Status::Empty,
                extremum: None,
                per_atom: outcomes.iter().map(|o| AtomOutcome { atom: o.0, value: None, binding: Vec::new() }).collect(),
                method,
                unbounded_atoms: Vec::new(),
                infeasible_rows: rows.clone(),
                lp_discrepancy: None,
            };
        }
        let unbounded_atoms: Vec<usize> = outcomes.iter().filter(|o| matches!(o.1, LpResult::Unbounded { .. })).map(|o| o.0).collect();
        let per_atom: Vec<AtomOutcome> = outcomes
            .into_iter()
            .map(|(atom, r, binding)| AtomOutcome { atom, value: r.value(), binding })
            .collect();
        let (status, extremum) = if unbounded_atoms.is_empty() {
            let values = per_atom.iter().map(|o| o.value.expect("bounded atom has a value")).collect();
            (Status::Exists, Some(SignedCharge::new(values).expect("finite LP optimum")))
        } else {
            (Status::Unbounded, None)
        };
        ExtremumReport { status, extremum, per_atom, method, unbounded_atoms, infeasible_rows: Vec::new(), lp_discrepancy: None }
    }
}

// ---------------------------------------------------------------------------
// Game-based sets
// ---------------------------------------------------------------------------

/// Coordinatewise extremum of the loose anticore / loose core: the singleton
/// profile `ω ↦ v({ω})`.
pub fn loose_extremum(v: &Game, side: GameSide) -> ExtremumReport {
    let _ = side;
    let profile = v.singleton_profile();
    let per_atom = profile
        .iter()
        .enumerate()
        .map(|(atom, &value)| AtomOutcome { atom, value: Some(value), binding: vec![Event::singleton(atom).index()] })
        .collect();
    ExtremumReport {
        status: Status::Exists,
        extremum: Some(SignedCharge::new(profile).expect("game values are finite")),
        per_atom,
        method: Method::ClosedForm,
        unbounded_atoms: Vec::new(),
        infeasible_rows: Vec::new(),
        lp_discrepancy: None,
    }
}

/// [`loose_extremum`] recomputed atom by atom with the LP solver; the report
/// records the largest deviation from the closed form.
pub fn loose_extremum_checked(v: &Game, side: GameSide) -> Result<ExtremumReport> {
    let lp_report = game_lp(v, side, false)?;
    let mut report = loose_extremum(v, side);
    let closed = report.extremum.as_ref().expect("closed form always exists");
    let diff = match &lp_report.extremum {
        Some(e) => closed.max_abs_diff(e),
        None => f64::INFINITY,
    };
    report.lp_discrepancy = Some(diff);
    Ok(report)
}

/// Extremum of the core `{μ ≥ v, μ(Ω) = v(Ω)}` or anticore
/// `{μ ≤ v, μ(Ω) = v(Ω)}` by one LP per atom over all events.
pub fn strict_extremum(v: &Game, side: GameSide) -> Result<ExtremumReport> {
    game_lp(v, side, true)
}

fn game_lp(v: &Game, side: GameSide, normalized: bool) -> Result<ExtremumReport> {
    let n = v.atoms();
    enumeration_guard(n, LP_ATOM_CAP)?;
    let full = Event::full(n);
    // Substitute μ = c·𝟏 + u with c strictly inside the loose set, so every
    // event row becomes `±u(A) ≤ positive` and the slack basis is feasible.
    let ratios = Event::all(n).filter(|a| !a.is_empty()).map(|a| v.value(a) / a.len() as f64);
    let (shift, sign) = match side {
        GameSide::AnticoreSup => (ratios.fold(f64::INFINITY, f64::min) - 1.0, 1.0),
        GameSide::CoreInf => (ratios.fold(f64::NEG_INFINITY, f64::max) + 1.0, -1.0),
    };
    let mut events = Vec::new();
    let mut constraints = Vec::new();
    for a in Event::all(n).filter(|a| !a.is_empty()) {
        if normalized && a == full {
            continue;
        }
        events.push(a.index());
        let row = indicator_row(n, a).into_iter().map(|x| sign * x).collect();
        constraints.push(Constraint::new(row, Relation::Le, sign * (v.value(a) - shift * a.len() as f64)));
    }
    if normalized {
        events.push(full.index());
        constraints.push(Constraint::new(vec![1.0; n], Relation::Eq, v.full_value() - shift * n as f64));
    }
    let sense = match side {
        GameSide::AnticoreSup => Sense::Maximize,
        GameSide::CoreInf => Sense::Minimize,
    };
    let outcomes = per_atom_lps(n, sense, &constraints, &events)?
        .into_iter()
        .map(|(atom, result, binding)| {
            let result = match result {
                LpResult::Optimal { x, value } => LpResult::Optimal { x: x.into_iter().map(|u| u + shift).collect(), value: value + shift },
                other => other,
            };
            (atom, result, binding)
        })
        .collect();
    Ok(ExtremumReport::from_outcomes(Method::Lp, outcomes))
}

fn indicator_row(n: usize, a: Event) -> Vec<f64> {
    (0..n).map(|i| if a.contains(i) { 1.0 } else { 0.0 }).collect()
}

fn per_atom_lps(n: usize, sense: Sense, constraints: &[Constraint], labels: &[usize]) -> Result<Vec<(usize, LpResult, Vec<usize>)>> {
    (0..n)
        .into_par_iter()
        .map(|atom| {
            let mut objective = vec![0.0; n];
            objective[atom] = 1.0;
            let problem = LpProblem { objective, sense, constraints: constraints.to_vec() };
            let result = lp::solve(&problem)?;
            let binding = match &result {
                LpResult::Optimal { x, .. } => constraints
                    .iter()
                    .zip(labels)
                    .filter(|(c, _)| (c.lhs(x) - c.bound).abs() <= TOL)
                    .map(|(_, &l)| l)
                    .take(MAX_BINDING)
                    .collect(),
                _ => Vec::new(),
            };
            Ok((atom, result, binding))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Dictionary-based supporting sets
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum Normalization {
    None,
    /// `μ(Ω) = v(Ω)` for games.
    TotalEqualsFull,
    /// `⟨μ, c⟩ = φ(c)` for a constant variable `c` of the dictionary.
    Pin(SimpleRandomVariable),
}

/// Per-atom LP over the supporting set of `φ` on `𝒟`. Dictionary elements
/// where `φ` is undefined are skipped.
pub fn dictionary_extremum(phi: &FunctionalOracle, dictionary: &Dictionary, side: DictionarySide, normalization: &Normalization) -> Result<ExtremumReport> {
    if dictionary.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let n = dictionary.atoms();
    enumeration_guard(n, DICTIONARY_ATOM_CAP)?;
    let relation = match side {
        DictionarySide::LowerSup => Relation::Le,
        DictionarySide::UpperInf => Relation::Ge,
    };
    let mut constraints = Vec::new();
    let mut labels = Vec::new();
    for (i, x) in dictionary.items().iter().enumerate() {
        if let Some(fx) = phi.evaluate(x) {
            constraints.push(Constraint::new(x.values().to_vec(), relation, fx));
            labels.push(i);
        }
    }
    match normalization {
        Normalization::None => {}
        Normalization::Pin(c) => {
            if !c.is_constant() || !dictionary.contains(c) {
                return Err(Error::PinNotInDictionary);
            }
            let fc = phi.evaluate(c).ok_or(Error::PinNotInDictionary)?;
            let pos = dictionary.items().iter().position(|y| y.approx_eq(c, TOL)).expect("checked above");
            constraints.push(Constraint::new(c.values().to_vec(), Relation::Eq, fc));
            labels.push(pos);
        }
        Normalization::TotalEqualsFull => {
            return Err(Error::ParameterOutOfRange("total normalization applies to games; pin a constant instead".into()))
        }
    }
    let sense = match side {
        DictionarySide::LowerSup => Sense::Maximize,
        DictionarySide::UpperInf => Sense::Minimize,
    };
    let outcomes = per_atom_lps(n, sense, &constraints, &labels)?;
    Ok(ExtremumReport::from_outcomes(Method::Lp, outcomes))
}

// ---------------------------------------------------------------------------
// Set specifications and membership
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum SupportTarget {
    Game(Game),
    Functional(FunctionalOracle, Dictionary),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSide {
    /// `μ ≤ v` / `⟨μ,X⟩ ≤ φ(X)`: anticores and lower supporting sets.
    Lower,
    /// `μ ≥ v` / `⟨μ,X⟩ ≥ φ(X)`: cores and upper supporting sets.
    Upper,
}

/// One of the sets `𝒜_v, ℒ𝒜_v, 𝒞_v, ℒ𝒞_v, ℒ^f, 𝒰^f` and their pinned variants.
#[derive(Clone, Debug)]
pub struct SupportSpec {
    pub target: SupportTarget,
    pub side: SetSide,
    pub normalization: Normalization,
}

impl SupportSpec {
    pub fn new(target: SupportTarget, side: SetSide, normalization: Normalization) -> Result<Self> {
        if let (SupportTarget::Functional(_, d), Normalization::Pin(c)) = (&target, &normalization) {
            if !c.is_constant() || !d.contains(c) {
                return Err(Error::PinNotInDictionary);
            }
        }
        Ok(SupportSpec { target, side, normalization })
    }

    pub fn loose_anticore(v: &Game) -> Self {
        SupportSpec { target: SupportTarget::Game(v.clone()), side: SetSide::Lower, normalization: Normalization::None }
    }

    pub fn loose_core(v: &Game) -> Self {
        SupportSpec { target: SupportTarget::Game(v.clone()), side: SetSide::Upper, normalization: Normalization::None }
    }
}

/// Checks every defining inequality and equality within [`TOL`].
pub fn membership(mu: &SignedCharge, spec: &SupportSpec) -> Result<bool> {
    let ok = |lhs: f64, rhs: f64| match spec.side {
        SetSide::Lower => lhs <= rhs + TOL,
        SetSide::Upper => lhs >= rhs - TOL,
    };
    match &spec.target {
        SupportTarget::Game(v) => {
            same_space(mu.atoms(), v.atoms())?;
            enumeration_guard(v.atoms(), crate::space::ENUMERATION_CAP)?;
            if spec.normalization == Normalization::TotalEqualsFull && (mu.total() - v.full_value()).abs() > TOL {
                return Ok(false);
            }
            Ok(Event::all(v.atoms()).all(|a| ok(mu.value(a), v.value(a))))
        }
        SupportTarget::Functional(phi, d) => {
            same_space(mu.atoms(), d.atoms())?;
            let dot = |x: &SimpleRandomVariable| mu.values().iter().zip(x.values()).map(|(a, b)| a * b).sum::<f64>();
            if let Normalization::Pin(c) = &spec.normalization {
                match phi.evaluate(c) {
                    Some(fc) if (dot(c) - fc).abs() <= TOL => {}
                    _ => return Ok(false),
                }
            }
            Ok(d.items().iter().all(|x| phi.evaluate(x).is_none_or(|fx| ok(dot(x), fx))))
        }
    }
}

// ---------------------------------------------------------------------------
// Sandwich constants
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SandwichConstants {
    /// `sup{a : aP ≤ v}`.
    pub a_star: Option<f64>,
    /// `inf{b : bP ≥ v}`.
    pub b_star: Option<f64>,
}

pub fn sandwich_constants(v: &Game, p: &ProbabilityCharge) -> Result<SandwichConstants> {
    same_space(v.atoms(), p.atoms())?;
    let n = v.atoms();
    let mut a_ok = true;
    let mut b_ok = true;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    if p.is_uniform() && v.distortion().is_some_and(|(_, q)| q == p) {
        // invariant game: one event per probability class suffices
        for k in 1..=n {
            let a = Event::full(k);
            let ratio = v.value(a) / p.prob_f64(a);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    } else {
        enumeration_guard(n, crate::space::ENUMERATION_CAP)?;
        for a in Event::all(n).filter(|a| !a.is_empty()) {
            let pa = p.prob_f64(a);
            let va = v.value(a);
            if p.key(a) == 0 {
                a_ok &= va >= -TOL;
                b_ok &= va <= TOL;
            } else {
                lo = lo.min(va / pa);
                hi = hi.max(va / pa);
            }
        }
    }
    Ok(SandwichConstants { a_star: (a_ok && lo.is_finite()).then_some(lo), b_star: (b_ok && hi.is_finite()).then_some(hi) })
}

// ---------------------------------------------------------------------------
// Existence diagnostics
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExistenceRow {
    pub n: usize,
    /// `Σ_ω v({ω}) = n·h(1/n)` on the uniform space.
    pub singleton_total: f64,
    pub core_empty: bool,
    pub anticore_empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExistenceSeries {
    pub rows: Vec<ExistenceRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Totals grow at least half as fast as `n`.
    pub diverging: bool,
}

/// Whether the core of the distortion game `h∘P` on uniform(n) is empty.
///
/// The core of a permutation-invariant game is permutation-closed and convex,
/// so it is nonempty iff it contains the uniform charge `h(1)·P`, i.e. iff
/// `h(k/n) ≤ (k/n)·h(1)` for every `k`. The anticore is symmetric.
pub fn symmetric_core_empty(h: &DistortionFunction, n: usize, side: GameSide) -> Result<bool> {
    let top = h.eval_f64(Rational::from(1))?;
    for k in 1..n {
        let x = Rational::new(k as i128, n as i128);
        let hk = h.eval_f64(x)?;
        let share = top * k as f64 / n as f64;
        let violated = match side {
            GameSide::CoreInf => hk > share + TOL,
            GameSide::AnticoreSup => hk < share - TOL,
        };
        if violated {
            return Ok(true);
        }
    }
    Ok(false)
}

pub fn diagnose_existence(h: &DistortionFunction, ns: &[usize]) -> Result<ExistenceSeries> {
    if h.eval_f64(Rational::zero())?.abs() > TOL {
        return Err(Error::DomainError("h(0) must be 0".into()));
    }
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) || ns[0] == 0 {
        return Err(Error::ParameterOutOfRange("refinement sizes must be positive and ascending".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let single = h.eval_f64(Rational::new(1, n as i128))?;
        rows.push(ExistenceRow {
            n,
            singleton_total: n as f64 * single,
            core_empty: symmetric_core_empty(h, n, GameSide::CoreInf)?,
            anticore_empty: symmetric_core_empty(h, n, GameSide::AnticoreSup)?,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.singleton_total).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    let totals: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.singleton_total)).collect();
    let diverging = grows_linearly(&totals);
    Ok(ExistenceSeries { rows, slope, intercept, r_squared, diverging })
}

/// Whether `(n, total)` pairs grow at least half as fast as `n` over the last
/// factor-4 span of `n`, so an initial flat stretch does not hide divergence.
pub fn grows_linearly(totals: &[(usize, f64)]) -> bool {
    let Some(&(n1, t1)) = totals.last() else {
        return false;
    };
    let Some(&(n0, t0)) = totals.iter().rev().find(|(n, _)| 4 * n <= n1) else {
        return false;
    };
    let span = n1 as f64 / n0 as f64;
    t0 > 0.0 && t1 / t0 >= 0.5 * span
}

/// Least-squares line; `r_squared` is 1 for an exact fit and for constant data.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 1.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= f64::EPSILON * my.abs().max(1.0) { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choquet::{DictionaryStrategy, RiskMetric};
    use crate::games::{build_distortion, build_family, Family};
    use crate::space::FiniteSpace;

    fn uniform(n: usize) -> ProbabilityCharge {
        ProbabilityCharge::uniform(n).unwrap()
    }

    fn es(beta: f64, n: usize) -> Game {
        build_family(&Family::Es { beta }, &uniform(n)).unwrap()
    }

    #[test]
    fn loose_examples() {
        let g = es(0.75, 8);
        for side in [GameSide::AnticoreSup, GameSide::CoreInf] {
            let r = loose_extremum_checked(&g, side).unwrap();
            assert!(r.extremum.unwrap().approx_eq(&SignedCharge::constant(8, 0.5), 1e-12));
            assert!(r.lp_discrepancy.unwrap() < 1e-9);
        }
        let var = build_family(&Family::Var { gamma: Rational::new(1, 2) }, &uniform(8)).unwrap();
        for side in [GameSide::AnticoreSup, GameSide::CoreInf] {
            assert!(loose_extremum(&var, side).extremum.unwrap().is_zero(0.0));
        }
        let ent = build_family(&Family::Entropic { alpha: 1.0 }, &uniform(4)).unwrap();
        let e = loose_extremum(&ent, GameSide::CoreInf).extremum.unwrap();
        assert!((e.atom(0) - 0.357_374_02).abs() < 1e-8);
    }

    #[test]
    fn strict_examples() {
        let g = es(0.75, 8);
        let r = strict_extremum(&g, GameSide::AnticoreSup).unwrap();
        assert_eq!(r.status, Status::Exists);
        assert!(r.extremum.unwrap().approx_eq(&SignedCharge::constant(8, 0.5), 1e-9));

        let r = strict_extremum(&g, GameSide::CoreInf).unwrap();
        assert_eq!(r.status, Status::Empty);
        assert!(!r.infeasible_rows.is_empty());

        let mu = SignedCharge::new(vec![0.5, -0.25, 1.0, 0.125]).unwrap();
        let r = strict_extremum(&Game::additive(&mu), GameSide::AnticoreSup).unwrap();
        assert!(r.extremum.unwrap().approx_eq(&mu, 1e-9));
    }

    #[test]
    fn dictionary_examples() {
        let p = uniform(8);
        let phi = FunctionalOracle::riskmetric(&RiskMetric::Es { beta: 0.75 }, &p).unwrap();
        let d = Dictionary::generate(&DictionaryStrategy::Indicators, 8).unwrap();
        let r = dictionary_extremum(&phi, &d, DictionarySide::UpperInf, &Normalization::None).unwrap();
        assert!(r.extremum.unwrap().approx_eq(&SignedCharge::constant(8, 0.5), 1e-9));

        let x = |v: &[f64]| SimpleRandomVariable::new(v.to_vec()).unwrap();
        let d = Dictionary::new(vec![x(&[1., 0.]), x(&[-1., 0.]), x(&[0., 1.]), x(&[0., -1.]), x(&[1., 1.]), x(&[-1., -1.])]).unwrap();
        let r = dictionary_extremum(&FunctionalOracle::coordinate(1), &d, DictionarySide::LowerSup, &Normalization::None).unwrap();
        assert!(r.extremum.unwrap().approx_eq(&SignedCharge::new(vec![0.0, 1.0]).unwrap(), 1e-9));

        let p4 = uniform(4);
        let d = Dictionary::generate(&DictionaryStrategy::SignedIndicators, 4).unwrap();
        let r = dictionary_extremum(&FunctionalOracle::expectation(&p4), &d, DictionarySide::LowerSup, &Normalization::None).unwrap();
        assert!(r.extremum.unwrap().approx_eq(&SignedCharge::from_probability(&p4), 1e-9));
    }

    #[test]
    fn dictionary_unbounded_and_pin() {
        let p = uniform(3);
        let d = Dictionary::generate(&DictionaryStrategy::Indicators, 3).unwrap();
        let phi = FunctionalOracle::expectation(&p);
        // only upper bounds on nonnegative combinations: minimizing is unbounded
        let r = dictionary_extremum(&phi, &d, DictionarySide::LowerSup, &Normalization::None).unwrap();
        assert_eq!(r.status, Status::Exists);
        let r = dictionary_extremum(&phi, &d, DictionarySide::UpperInf, &Normalization::None).unwrap();
        assert_eq!(r.status, Status::Exists);
        let d2 = Dictionary::new(vec![SimpleRandomVariable::new(vec![1.0, 1.0, 1.0]).unwrap()]).unwrap();
        let r = dictionary_extremum(&phi, &d2, DictionarySide::LowerSup, &Normalization::None).unwrap();
        assert_eq!(r.status, Status::Unbounded);
        assert_eq!(r.unbounded_atoms, vec![0, 1, 2]);

        let one = SimpleRandomVariable::constant(3, 1.0);
        let two = SimpleRandomVariable::constant(3, 2.0);
        assert_eq!(
            dictionary_extremum(&phi, &d, DictionarySide::LowerSup, &Normalization::Pin(two)).unwrap_err(),
            Error::PinNotInDictionary
        );
        let r = dictionary_extremum(&phi, &d, DictionarySide::LowerSup, &Normalization::Pin(one)).unwrap();
        assert!(r.extremum.unwrap().approx_eq(&SignedCharge::from_probability(&p), 1e-9));
        assert_eq!(
            dictionary_extremum(&phi, &Dictionary::generate(&DictionaryStrategy::Indicators, 3).unwrap(), DictionarySide::LowerSup, &Normalization::TotalEqualsFull)
                .map(|_| ()),
            Err(Error::ParameterOutOfRange("total normalization applies to games; pin a constant instead".into()))
        );
    }

    #[test]
    fn sandwich_examples() {
        let p = uniform(4);
        let sq = build_distortion(&DistortionFunction::power(2.0), &p).unwrap();
        let s = sandwich_constants(&sq, &p).unwrap();
        assert!((s.a_star.unwrap() - 0.25).abs() < 1e-15);
        let loose = loose_extremum(&sq, GameSide::AnticoreSup).extremum.unwrap();
        assert!(loose.approx_eq(&SignedCharge::constant(4, 1.0 / 16.0), 1e-15));
        assert!(loose.approx_eq(&SignedCharge::scaled_probability(&p, s.a_star.unwrap()), 1e-15));

        let s = sandwich_constants(&es(0.75, 8), &uniform(8)).unwrap();
        assert!((s.b_star.unwrap() - 4.0).abs() < 1e-12);

        let three = Game::additive(&SignedCharge::scaled_probability(&uniform(5), 3.0));
        let s = sandwich_constants(&three, &uniform(5)).unwrap();
        assert!((s.a_star.unwrap() - 3.0).abs() < 1e-12 && (s.b_star.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sandwich_null_events() {
        let p = ProbabilityCharge::from_rationals(&[Rational::from(0), Rational::from(1)]).unwrap();
        let v = Game::from_table(2, vec![0.0, -1.0, 2.0, 2.0]).unwrap();
        let s = sandwich_constants(&v, &p).unwrap();
        assert_eq!(s.a_star, None);
        assert_eq!(s.b_star, Some(2.0));
    }

    #[test]
    fn existence_examples() {
        let flat = DistortionFunction::custom("floor", |x| if x > 0.0 { x.max(0.1) } else { 0.0 });
        let ns: Vec<usize> = (10..=200).step_by(10).collect();
        let s = diagnose_existence(&flat, &ns).unwrap();
        assert!(s.diverging);
        assert!((s.slope - 0.1).abs() < 1e-12);
        // on the grid 1/10 the floor is inactive and the game is additive
        assert!(!s.rows[0].core_empty);
        assert!(s.rows[1..].iter().all(|r| r.core_empty));

        let id = diagnose_existence(&DistortionFunction::identity(), &[2, 4, 8, 16]).unwrap();
        assert!(!id.diverging);
        assert!(id.rows.iter().all(|r| (r.singleton_total - 1.0).abs() < 1e-12 && !r.core_empty));

        let esh = DistortionFunction::es(0.75);
        let s = diagnose_existence(&esh, &[4, 8, 16, 32]).unwrap();
        assert!(s.rows.iter().all(|r| (r.singleton_total - 4.0).abs() < 1e-12));
        assert!(!s.diverging);
    }

    #[test]
    fn symmetric_core_test_matches_lp() {
        for h in [
            DistortionFunction::custom("floor", |x| if x > 0.0 { x.max(0.1) } else { 0.0 }),
            DistortionFunction::power(2.0),
            DistortionFunction::power(0.5),
            DistortionFunction::es(0.5),
        ] {
            for n in [3, 5, 6] {
                let v = build_distortion(&h, &uniform(n)).unwrap();
                for side in [GameSide::CoreInf, GameSide::AnticoreSup] {
                    let lp = strict_extremum(&v, side).unwrap().status == Status::Empty;
                    assert_eq!(symmetric_core_empty(&h, n, side).unwrap(), lp, "{h:?} n={n} {side:?}");
                }
            }
        }
    }

    #[test]
    fn membership_examples() {
        let p = uniform(6);
        let v = build_distortion(&DistortionFunction::power(3.0), &p).unwrap();
        let s = sandwich_constants(&v, &p).unwrap();
        let a = SignedCharge::scaled_probability(&p, s.a_star.unwrap());
        assert!(membership(&a, &SupportSpec::loose_anticore(&v)).unwrap());
        assert!(membership(&SignedCharge::zero(6), &SupportSpec::loose_anticore(&v)).unwrap());
        let big = SignedCharge::scaled_probability(&p, 2.0 * s.b_star.unwrap());
        assert!(membership(&big, &SupportSpec::loose_core(&v)).unwrap());
        assert!(!membership(&big, &SupportSpec::loose_anticore(&v)).unwrap());
        let strict = SupportSpec::new(SupportTarget::Game(v.clone()), SetSide::Upper, Normalization::TotalEqualsFull).unwrap();
        assert!(!membership(&big, &strict).unwrap());
        assert!(membership(&SignedCharge::from_probability(&p), &strict).unwrap());
        assert!(matches!(membership(&SignedCharge::zero(3), &SupportSpec::loose_core(&v)), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn functional_membership_with_pin() {
        let space = FiniteSpace::uniform(3).unwrap();
        let p = space.probability();
        let d = Dictionary::generate(&DictionaryStrategy::IndicatorsPlusConstants, 3).unwrap();
        let one = SimpleRandomVariable::constant(3, 1.0);
        let spec = SupportSpec::new(SupportTarget::Functional(FunctionalOracle::expectation(p), d.clone()), SetSide::Lower, Normalization::Pin(one)).unwrap();
        assert!(membership(&SignedCharge::from_probability(p), &spec).unwrap());
        assert!(!membership(&SignedCharge::constant(3, 0.2), &spec).unwrap());
        let bad = SupportSpec::new(
            SupportTarget::Functional(FunctionalOracle::expectation(p), d),
            SetSide::Lower,
            Normalization::Pin(SimpleRandomVariable::constant(3, 5.0)),
        );
        assert_eq!(bad.unwrap_err(), Error::PinNotInDictionary);
    }
}
