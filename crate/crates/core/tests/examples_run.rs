//! Every runnable example completes.

mod charge_lattice {
    include!("../examples/charge_lattice.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod choquet_riskmetrics {
    include!("../examples/choquet_riskmetrics.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod distortion_games {
    include!("../examples/distortion_games.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod elicit_parameters {
    include!("../examples/elicit_parameters.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod elicit_var {
    include!("../examples/elicit_var.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod linear_programs {
    include!("../examples/linear_programs.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod probability_spaces {
    include!("../examples/probability_spaces.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod refinement_convergence {
    include!("../examples/refinement_convergence.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod support_extrema {
    include!("../examples/support_extrema.rs");

    #[test]
    fn runs() {
        main();
    }
}
