//! Extrema of cores and supporting sets: closed forms against the LP,
//! proportionality for invariant games and ordering of loose and strict sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refmeasure::choquet::{Dictionary, DictionaryStrategy, FunctionalOracle, RiskMetric};
use refmeasure::games::{build_distortion, build_family, Family};
use refmeasure::supports::{diagnose_existence, dictionary_extremum, grows_linearly, loose_extremum, loose_extremum_checked, membership, sandwich_constants, strict_extremum, DictionarySide, GameSide, Normalization, Status, SupportSpec};
use refmeasure::{DistortionFunction, Event, Game, ProbabilityCharge, Rational, SignedCharge};

fn random_game(rng: &mut ChaCha8Rng, n: usize) -> Game {
    let table: Vec<f64> = (0..1usize << n).map(|i| if i == 0 { 0.0 } else { rng.gen_range(-1.0..2.0) }).collect();
    Game::from_table(n, table).unwrap()
}

#[test]
fn closed_form_matches_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..30 {
        let n = rng.gen_range(1..=6);
        let v = random_game(&mut rng, n);
        for side in [GameSide::AnticoreSup, GameSide::CoreInf] {
            let r = loose_extremum_checked(&v, side).unwrap();
            assert!(r.lp_discrepancy.unwrap() <= 1e-9, "{side:?}: {:?}", r.lp_discrepancy);
        }
    }
    let p = ProbabilityCharge::uniform(10).unwrap();
    let v = build_family(&Family::Entropic { alpha: 2.0 }, &p).unwrap();
    assert!(loose_extremum_checked(&v, GameSide::CoreInf).unwrap().lp_discrepancy.unwrap() <= 1e-9);
}

#[test]
fn invariant_games_have_constant_loose_extrema() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..30 {
        let n = rng.gen_range(1..=8);
        // an arbitrary function of the class, not necessarily monotone
        let h: Vec<f64> = (0..=n).map(|k| if k == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
        let v = Game::from_fn(n, move |a| h[a.len()]).unwrap();
        for side in [GameSide::AnticoreSup, GameSide::CoreInf] {
            let e = loose_extremum(&v, side).extremum.unwrap();
            assert!(e.values().iter().all(|x| (x - e.atom(0)).abs() <= 1e-12));
        }
    }
}

/// On a weighted space an invariant game can have a non-proportional loose
/// extremum: singletons of equal weight share a value, others need not scale.
#[test]
fn weighted_invariant_game_can_be_non_proportional() {
    let p = ProbabilityCharge::from_rationals(&[Rational::new(1, 2), Rational::new(1, 4), Rational::new(1, 4)]).unwrap();
    let v = build_distortion(&DistortionFunction::custom("sqrt", f64::sqrt), &p).unwrap();
    let e = loose_extremum(&v, GameSide::CoreInf).extremum.unwrap();
    assert!((e.atom(0) / 0.5 - e.atom(1) / 0.25).abs() > 0.1);
}

#[test]
fn strict_extrema_are_inside_loose_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut nonempty = 0;
    for _ in 0..40 {
        let n = rng.gen_range(1..=5);
        let p = ProbabilityCharge::uniform(n).unwrap();
        let e = rng.gen_range(0.3..3.0);
        let v = build_distortion(&DistortionFunction::power(e), &p).unwrap();
        for side in [GameSide::AnticoreSup, GameSide::CoreInf] {
            let strict = strict_extremum(&v, side).unwrap();
            if strict.status != Status::Exists {
                continue;
            }
            nonempty += 1;
            let s = strict.extremum.unwrap();
            let l = loose_extremum(&v, side).extremum.unwrap();
            match side {
                GameSide::AnticoreSup => assert!(s.le(&l, 1e-9)),
                GameSide::CoreInf => assert!(l.le(&s, 1e-9)),
            }
        }
    }
    assert!(nonempty > 10);
}

#[test]
fn es_identity_for_fine_grids() {
    for beta in [0.5f64, 0.75, 0.875] {
        let min_n = (1.0 / (1.0 - beta)).ceil() as usize;
        for n in min_n..=12 {
            let p = ProbabilityCharge::uniform(n).unwrap();
            let v = build_family(&Family::Es { beta }, &p).unwrap();
            let target = SignedCharge::scaled_probability(&p, 1.0 / (1.0 - beta));
            for side in [GameSide::AnticoreSup, GameSide::CoreInf] {
                assert!(loose_extremum(&v, side).extremum.unwrap().approx_eq(&target, 1e-12), "beta={beta} n={n}");
            }
        }
    }
}

#[test]
fn sandwich_constants_are_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..30 {
        let n = rng.gen_range(1..=8);
        let p = ProbabilityCharge::uniform(n).unwrap();
        let v = build_distortion(&DistortionFunction::power(rng.gen_range(0.2..4.0)), &p).unwrap();
        let k = sandwich_constants(&v, &p).unwrap();
        assert!(k.a_star.unwrap() <= k.b_star.unwrap() + 1e-12);
        // independent: extreme ratios over all nonempty events
        let ratios: Vec<f64> = Event::all(n).filter(|a| !a.is_empty()).map(|a| v.value(a) / p.prob_f64(a)).collect();
        assert!((k.a_star.unwrap() - ratios.iter().cloned().fold(f64::INFINITY, f64::min)).abs() <= 1e-12);
        assert!((k.b_star.unwrap() - ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).abs() <= 1e-12);
    }
    let p = ProbabilityCharge::uniform(4).unwrap();
    let scaled = Game::additive(&SignedCharge::scaled_probability(&p, 2.5));
    let k = sandwich_constants(&scaled, &p).unwrap();
    assert!((k.a_star.unwrap() - 2.5).abs() < 1e-12 && (k.b_star.unwrap() - 2.5).abs() < 1e-12);
}

#[test]
fn null_events_disable_a_side() {
    let p = ProbabilityCharge::from_rationals(&[Rational::from(1), Rational::from(0)]).unwrap();
    let v = Game::from_table(2, vec![0.0, 1.0, -0.5, 1.0]).unwrap();
    let k = sandwich_constants(&v, &p).unwrap();
    assert!(k.a_star.is_none());
    assert!(k.b_star.is_some());
}

#[test]
fn extremum_bounds_sampled_members() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = ProbabilityCharge::uniform(6).unwrap();
    let v = build_family(&Family::Entropic { alpha: 1.0 }, &p).unwrap();
    for (side, spec) in [(GameSide::AnticoreSup, SupportSpec::loose_anticore(&v)), (GameSide::CoreInf, SupportSpec::loose_core(&v))] {
        let e = loose_extremum(&v, side).extremum.unwrap();
        let mut members = 0;
        for _ in 0..2000 {
            let mu = SignedCharge::new((0..6).map(|i| e.atom(i) + rng.gen_range(-0.2..0.2)).collect()).unwrap();
            if membership(&mu, &spec).unwrap() {
                members += 1;
                match side {
                    GameSide::AnticoreSup => assert!(mu.le(&e, 1e-9)),
                    GameSide::CoreInf => assert!(e.le(&mu, 1e-9)),
                }
            }
        }
        assert!(members > 0, "{side:?}: no members sampled");
        // the game is subadditive: the core extremum is attained, the
        // anticore one is not
        assert_eq!(membership(&e, &spec).unwrap(), side == GameSide::CoreInf);
    }
}

#[test]
fn entropic_dictionary_extremum_equals_loose_core() {
    let p = ProbabilityCharge::uniform(6).unwrap();
    let phi = FunctionalOracle::riskmetric(&RiskMetric::Entropic { alpha: 1.0 }, &p).unwrap();
    let d = Dictionary::generate(&DictionaryStrategy::Indicators, 6).unwrap();
    let upper = dictionary_extremum(&phi, &d, DictionarySide::UpperInf, &Normalization::None).unwrap();
    let v = build_family(&Family::Entropic { alpha: 1.0 }, &p).unwrap();
    let core = loose_extremum(&v, GameSide::CoreInf).extremum.unwrap();
    assert!(upper.extremum.unwrap().approx_eq(&core, 1e-9));
}

#[test]
fn divergence_is_judged_on_the_tail() {
    // flat until the floor binds, then linear
    let totals: Vec<(usize, f64)> = (2..=14).map(|k| (1usize << k, (0.05 * (1u64 << k) as f64).max(1.0))).collect();
    assert!(grows_linearly(&totals));
    let converging: Vec<(usize, f64)> = (2..=14).map(|k| (1usize << k, 2.0 - 1.0 / (1u64 << k) as f64)).collect();
    assert!(!grows_linearly(&converging));
    assert!(!grows_linearly(&totals[..2]));
    let h = DistortionFunction::custom("floor", |x| if x > 0.0 { x.max(0.1) } else { 0.0 });
    let series = diagnose_existence(&h, &[20, 40, 80, 160]).unwrap();
    assert!(series.diverging && series.rows.iter().all(|r| r.core_empty && !r.anticore_empty));
}
