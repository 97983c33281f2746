//! Structural properties of distortion games and Choquet integrals.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refmeasure::choquet::{choquet_integral, evaluate_riskmetric, value_at_risk, RiskMetric};
use refmeasure::games::{build_distortion, build_family, check_invariance, classify_properties, conjugate_game, envelope, EnvelopeMode, Family};
use refmeasure::{DistortionFunction, Event, Game, ProbabilityCharge, Rational, SignedCharge, SimpleRandomVariable};

fn families() -> Vec<Family> {
    vec![
        Family::Entropic { alpha: 0.5 },
        Family::Entropic { alpha: 3.0 },
        Family::Es { beta: 0.3 },
        Family::Es { beta: 0.9 },
        Family::Var { gamma: Rational::new(1, 4) },
        Family::Var { gamma: Rational::new(5, 8) },
        Family::Rvar { gamma: Rational::new(1, 2) },
    ]
}

#[test]
fn builders_are_invariant() {
    let spaces = [ProbabilityCharge::uniform(6).unwrap(), ProbabilityCharge::from_rationals(&[Rational::new(1, 2), Rational::new(1, 4), Rational::new(1, 8), Rational::new(1, 8)]).unwrap()];
    for p in &spaces {
        for f in families() {
            let v = build_family(&f, p).unwrap();
            assert!(check_invariance(&v, p).unwrap().invariant, "{f:?}");
        }
        let v = build_distortion(&DistortionFunction::power(1.7), p).unwrap();
        assert!(check_invariance(&v, p).unwrap().invariant);
    }
}

#[test]
fn es_games_are_submodular_and_monotone() {
    for n in 1..=8 {
        let p = ProbabilityCharge::uniform(n).unwrap();
        for beta in [0.0, 0.25, 0.5, 0.8, 0.95] {
            let props = classify_properties(&build_family(&Family::Es { beta }, &p).unwrap()).unwrap();
            assert!(props.monotone.holds && props.submodular.holds, "n={n} beta={beta}");
        }
    }
}

/// On even grids a VaR game is superadditive exactly when `γ ≤ 1/2`. Odd
/// grids can hide the violation: two disjoint events above `1 − γ` may not
/// exist.
#[test]
fn var_superadditive_iff_small_level() {
    for n in [2, 4, 6, 8, 10] {
        let p = ProbabilityCharge::uniform(n).unwrap();
        for k in 1..16 {
            if n == 10 && k % 4 != 0 {
                continue;
            }
            let gamma = Rational::new(k, 16);
            let props = classify_properties(&build_family(&Family::Var { gamma }, &p).unwrap()).unwrap();
            assert_eq!(props.superadditive.holds, gamma <= Rational::new(1, 2), "n={n} gamma={gamma}");
            if !props.superadditive.holds {
                assert!(props.superadditive.witness.is_some());
            }
        }
    }
}

fn random_game(rng: &mut ChaCha8Rng, n: usize, superadditive: bool) -> Game {
    // a convex increasing function of a random positive charge is superadditive
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let e = rng.gen_range(1.0..3.0);
    Game::from_fn(n, move |a| {
        let m: f64 = a.atoms().map(|i| weights[i]).sum();
        if superadditive {
            m.powf(e)
        } else {
            -m.powf(e)
        }
    })
    .unwrap()
}

#[test]
fn conjugation_is_an_involution_and_swaps_additivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.gen_range(1..=8);
        let v = random_game(&mut rng, n, true);
        assert!(classify_properties(&v).unwrap().superadditive.holds);
        let dual = conjugate_game(&v);
        assert!(conjugate_game(&dual).approx_eq(&v, 1e-12));
        assert!(classify_properties(&dual).unwrap().subadditive.holds);
    }
}

#[test]
fn envelopes_have_the_expected_additivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let n = rng.gen_range(1..=8);
        let list: Vec<SignedCharge> = (0..rng.gen_range(1..5)).map(|_| SignedCharge::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()).collect();
        let lower = envelope(EnvelopeMode::Lower, &list).unwrap();
        let upper = envelope(EnvelopeMode::Upper, &list).unwrap();
        for a in Event::all(n) {
            for b in Event::all(n).filter(|b| b.is_disjoint(a)) {
                assert!(lower.value(a.union(b)) >= lower.value(a) + lower.value(b) - 1e-12);
                assert!(upper.value(a.union(b)) <= upper.value(a) + upper.value(b) + 1e-12);
            }
        }
    }
}

#[test]
fn choquet_of_indicator_is_game_value() {
    let p = ProbabilityCharge::uniform(10).unwrap();
    let v = build_family(&Family::Entropic { alpha: 1.3 }, &p).unwrap();
    for a in Event::all(10) {
        let x = SimpleRandomVariable::indicator(10, a);
        assert!((choquet_integral(&v, &x).unwrap() - v.value(a)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn choquet_homogeneous_and_translation_covariant(
        n in 1usize..=8,
        xs in prop::collection::vec(-5.0..5.0f64, 8),
        t in 0.01..10.0f64,
        c in -5.0..5.0f64,
        alpha in 0.1..4.0f64,
    ) {
        let p = ProbabilityCharge::uniform(n).unwrap();
        let v = build_family(&Family::Entropic { alpha }, &p).unwrap();
        let x = SimpleRandomVariable::new(xs[..n].to_vec()).unwrap();
        let base = choquet_integral(&v, &x).unwrap();
        let tol = 1e-9 * (1.0 + base.abs() * t + c.abs());
        prop_assert!((choquet_integral(&v, &x.scale(t)).unwrap() - t * base).abs() <= tol);
        prop_assert!((choquet_integral(&v, &x.shift(c)).unwrap() - (base + c * v.full_value())).abs() <= tol);
    }
}

#[test]
fn es_choquet_matches_quantile_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=8);
        let ws: Vec<i128> = (0..n).map(|_| rng.gen_range(1..5)).collect();
        let total: i128 = ws.iter().sum();
        let p = ProbabilityCharge::from_rationals(&ws.iter().map(|&w| Rational::new(w, total)).collect::<Vec<_>>()).unwrap();
        let beta = rng.gen_range(0.0..0.99);
        let x = SimpleRandomVariable::new((0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let v = build_family(&Family::Es { beta }, &p).unwrap();
        let a = choquet_integral(&v, &x).unwrap();
        let b = evaluate_riskmetric(&RiskMetric::Es { beta }, &p, &x).unwrap();
        assert!((a - b).abs() <= 1e-9, "beta={beta} {a} vs {b}");
    }
}

/// `rVaR_{1−γ}(𝟏_A) = 1 − VaR_γ(𝟏_{A^c})` on every event.
#[test]
fn var_rvar_duality_on_indicators() {
    let p = ProbabilityCharge::from_rationals(&[Rational::new(1, 8), Rational::new(1, 8), Rational::new(1, 4), Rational::new(1, 2)]).unwrap();
    for k in 1..8 {
        let gamma = Rational::new(k, 8);
        let rvar = build_family(&Family::Rvar { gamma: Rational::from(1) - gamma }, &p).unwrap();
        for a in Event::all(4) {
            let var_c = value_at_risk(&p, &SimpleRandomVariable::indicator(4, a.complement(4)), gamma).unwrap();
            assert_eq!(rvar.value(a), 1.0 - var_c, "gamma={gamma} A={a:?}");
        }
    }
}
