mod support {
    pub mod props;
}

use support::props::SUITES;

const CASES: u32 = 1000;

fn suite(name: &str) {
    let (_, f) = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no suite {name}"));
    if let Err(e) = f(CASES) {
        panic!("{name}: {e}");
    }
}

macro_rules! suites {
    ($($test:ident => $name:literal,)*) => {
        $(#[test] fn $test() { suite($name); })*

        #[test]
        fn every_suite_is_wired() {
            let wired = [$($name),*];
            for (n, _) in SUITES {
                assert!(wired.contains(n), "suite {n} has no test");
            }
        }
    };
}

suites! {
    kron_associativity => "linalg: kron associativity",
    eig_trace => "linalg: eigen trace and reconstruction",
    sqrt_squares_back => "linalg: psd square root squares back",
    dagger_involution => "linalg: dagger involution",
    gates_unitary => "circuits: gates are unitary",
    runs_preserve_norm => "circuits: runs preserve norm",
    ghz_support => "circuits: ghz support",
    partial_trace_oracle => "density: partial trace oracle",
    trace_preservation => "density: trace preservation",
    composition => "density: composition",
    product_purity => "density: product purity",
    linearity => "density: linearity",
    fidelity_closed_form => "metrics: closed-form fidelity",
    fidelity_symmetry => "metrics: fidelity symmetry",
    unitary_invariance => "metrics: unitary invariance",
    distance_metric => "metrics: distance is a metric",
    phase_invariance => "masking: global phase invariance",
    ghz_masked => "masking: ghz masked for all angles",
    cross_term_linear => "masking: cross term linear in coefficients",
    tomography_exact_inverse => "tomography: exact inverse",
    projection_identity => "tomography: projection fixes physical states",
    sampling_repeats => "tomography: seeded sampling repeats",
}
