//! Randomized invariant suites shared by the property and acceptance targets.
//!
//! Each suite runs a deterministic proptest runner for the requested number
//! of cases and reports the first failure as a string.

use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use qmask::circuits::{
    build_ghz, build_psi0_bell, build_psi1_bell, gate_matrix, u3_matrix, Circuit, Gate, StateVector,
};
use qmask::density::{partial_trace, DensityMatrix};
use qmask::linalg::{c, dagger, hermitian_eig, kron, matrix_sqrt_psd, ComplexMatrix, C64};
use qmask::masking::{check_bipartite_masking, check_multipartite_reductions, MaskingInput};
use qmask::metrics::{element_distance, fidelity, fidelity_qubit_closed_form};
use qmask::tomography::{
    exact_distributions, project_to_physical, reconstruct_from_distributions, sample_counts,
};

pub type Suite = (&'static str, fn(u32) -> Result<(), String>);

pub const SUITES: &[Suite] = &[
    ("linalg: kron associativity", kron_associativity),
    ("linalg: eigen trace and reconstruction", eig_trace),
    ("linalg: psd square root squares back", sqrt_squares_back),
    ("linalg: dagger involution", dagger_involution),
    ("circuits: gates are unitary", gates_unitary),
    ("circuits: runs preserve norm", runs_preserve_norm),
    ("circuits: ghz support", ghz_support),
    ("density: partial trace oracle", partial_trace_oracle),
    ("density: trace preservation", trace_preservation),
    ("density: composition", composition),
    ("density: product purity", product_purity),
    ("density: linearity", linearity),
    ("metrics: closed-form fidelity", fidelity_closed_form),
    ("metrics: fidelity symmetry", fidelity_symmetry),
    ("metrics: unitary invariance", unitary_invariance),
    ("metrics: distance is a metric", distance_metric),
    ("masking: global phase invariance", phase_invariance),
    ("masking: ghz masked for all angles", ghz_masked),
    (
        "masking: cross term linear in coefficients",
        cross_term_linear,
    ),
    ("tomography: exact inverse", tomography_exact_inverse),
    (
        "tomography: projection fixes physical states",
        projection_identity,
    ),
    ("tomography: seeded sampling repeats", sampling_repeats),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn ok<T>(r: qmask::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), rows * cols).prop_map(move |v| {
        let data = v.into_iter().map(|(re, im)| c(re, im)).collect();
        ComplexMatrix::new(rows, cols, data).unwrap()
    })
}

fn hermitian(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    cmat(d, d).prop_map(|m| m.add(&m.dagger()).unwrap())
}

/// `A A† / Tr(A A†)`, full rank almost surely.
fn density(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    cmat(d, d)
        .prop_filter("degenerate", |a| a.frobenius_norm() > 1e-3)
        .prop_map(|a| {
            let p = a.matmul(&a.dagger()).unwrap();
            let t = p.trace().re;
            p.scale(c(1.0 / t, 0.0))
        })
}

fn pure(n_qubits: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n_qubits)
        .prop_filter("zero vector", |v| {
            v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3
        })
        .prop_map(|v| {
            let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            StateVector::new(v.into_iter().map(|(a, b)| c(a / norm, b / norm)).collect()).unwrap()
        })
}

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

fn unitary_1q() -> impl Strategy<Value = ComplexMatrix> {
    (angle(), angle(), angle(), angle())
        .prop_map(|(t, p, l, g)| u3_matrix(t, p, l).scale(C64::from_polar(1.0, g)))
}

fn dim_pow2() -> impl Strategy<Value = usize> {
    prop_oneof![Just(1usize), Just(2), Just(4), Just(8)]
}

/// Brute-force reduction: sums over every index pair that agrees on the
/// traced-out bits.
fn reduce_oracle(m: &ComplexMatrix, n: usize, keep: &[usize]) -> ComplexMatrix {
    let k = keep.len();
    let mut out = ComplexMatrix::zeros(1 << k, 1 << k);
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    let sub = |idx: usize| keep.iter().fold(0, |acc, &q| (acc << 1) | bit(idx, q));
    for r in 0..1 << n {
        for col in 0..1 << n {
            let traced_agree = (0..n)
                .filter(|q| !keep.contains(q))
                .all(|q| bit(r, q) == bit(col, q));
            if traced_agree {
                out[(sub(r), sub(col))] += m.get(r, col);
            }
        }
    }
    out
}

fn keep_sets(n: usize) -> Vec<Vec<usize>> {
    (1..(1usize << n) - 1)
        .map(|mask| (0..n).filter(|q| mask >> q & 1 == 1).collect())
        .collect()
}

fn kron_associativity(cases: u32) -> Result<(), String> {
    let dims = (1..=3usize, 1..=3usize);
    let s = (dims.clone(), dims.clone(), dims)
        .prop_flat_map(|((r1, c1), (r2, c2), (r3, c3))| (cmat(r1, c1), cmat(r2, c2), cmat(r3, c3)));
    run(cases, s, |(a, b, m)| {
        let left = kron(&kron(&a, &b), &m);
        let right = kron(&a, &kron(&b, &m));
        prop_assert!(ok(left.max_abs_diff(&right))? <= 1e-12);
        Ok(())
    })
}

fn eig_trace(cases: u32) -> Result<(), String> {
    run(cases, dim_pow2().prop_flat_map(hermitian), |m| {
        let e = ok(hermitian_eig(&m))?;
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - m.trace().re).abs() <= 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(ok(e.reconstruct().max_abs_diff(&m))? <= 1e-9);
        let vv = ok(e.vectors.dagger().matmul(&e.vectors))?;
        prop_assert!(ok(vv.max_abs_diff(&ComplexMatrix::identity(m.rows())))? <= 1e-10);
        Ok(())
    })
}

fn sqrt_squares_back(cases: u32) -> Result<(), String> {
    let s = dim_pow2().prop_flat_map(|d| cmat(d, d));
    run(cases, s, |a| {
        let p = ok(a.matmul(&a.dagger()))?;
        let r = ok(matrix_sqrt_psd(&p))?;
        let back = ok(r.matmul(&r))?;
        prop_assert!(ok(back.max_abs_diff(&p))? <= 1e-9 * p.max_abs().max(1.0));
        prop_assert!(r.is_hermitian(1e-9));
        Ok(())
    })
}

fn dagger_involution(cases: u32) -> Result<(), String> {
    let s = (1..=8usize, 1..=8usize).prop_flat_map(|(r, c)| cmat(r, c));
    run(cases, s, |m| {
        prop_assert_eq!(dagger(&dagger(&m)), m);
        Ok(())
    })
}

fn gate() -> impl Strategy<Value = Gate> {
    let q = 0..3usize;
    prop_oneof![
        q.clone().prop_map(Gate::h),
        q.clone().prop_map(Gate::x),
        q.clone().prop_map(Gate::s),
        q.clone().prop_map(Gate::sdg),
        (q.clone(), q.clone())
            .prop_filter("distinct", |(a, b)| a != b)
            .prop_map(|(a, b)| Gate::cnot(a, b)),
        (q, angle(), angle(), angle()).prop_map(|(q, t, p, l)| Gate::u3(q, t, p, l)),
    ]
}

fn gates_unitary(cases: u32) -> Result<(), String> {
    run(cases, gate(), |g| {
        let u = ok(gate_matrix(&g))?;
        let uu = ok(u.dagger().matmul(&u))?;
        prop_assert!(ok(uu.max_abs_diff(&ComplexMatrix::identity(u.rows())))? <= 1e-12);
        Ok(())
    })
}

fn runs_preserve_norm(cases: u32) -> Result<(), String> {
    let s = (pure(3), prop::collection::vec(gate(), 0..=20));
    run(cases, s, |(init, gates)| {
        let mut circuit = ok(Circuit::new(3))?;
        for g in gates {
            ok(circuit.push(g))?;
        }
        let out = ok(circuit.run_from(&init))?;
        prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-10);
        Ok(())
    })
}

fn ghz_support(cases: u32) -> Result<(), String> {
    let s = (1e-3..PI - 1e-3, angle(), angle());
    run(cases, s, |(t, p, l)| {
        let st = ok(ok(build_ghz(t, p, l))?.run())?;
        let nonzero = st.amplitudes().iter().filter(|a| a.norm() > 1e-12).count();
        prop_assert_eq!(nonzero, 2);
        Ok(())
    })
}

fn square_with_keep() -> impl Strategy<Value = (ComplexMatrix, usize, Vec<usize>)> {
    (2..=3usize).prop_flat_map(|n| {
        (
            cmat(1 << n, 1 << n),
            Just(n),
            prop::sample::select(keep_sets(n)),
        )
    })
}

fn partial_trace_oracle(cases: u32) -> Result<(), String> {
    run(cases, square_with_keep(), |(m, n, keep)| {
        let got = ok(partial_trace(&m, &keep))?;
        prop_assert!(ok(got.max_abs_diff(&reduce_oracle(&m, n, &keep)))? <= 1e-12);
        Ok(())
    })
}

fn trace_preservation(cases: u32) -> Result<(), String> {
    let s = (2..=3usize).prop_flat_map(|n| (hermitian(1 << n), prop::sample::select(keep_sets(n))));
    run(cases, s, |(m, keep)| {
        let t = ok(partial_trace(&m, &keep))?.trace();
        prop_assert!((t - m.trace()).norm() <= 1e-12);
        Ok(())
    })
}

fn composition(cases: u32) -> Result<(), String> {
    run(cases, cmat(8, 8), |m| {
        let two_steps = ok(partial_trace(&ok(partial_trace(&m, &[0, 1]))?, &[0]))?;
        let direct = ok(partial_trace(&m, &[0]))?;
        prop_assert!(ok(two_steps.max_abs_diff(&direct))? <= 1e-12);
        Ok(())
    })
}

fn product_purity(cases: u32) -> Result<(), String> {
    run(cases, (pure(1), pure(2)), |(a, b)| {
        let joint = kron(&a.to_matrix(), &b.to_matrix());
        let psi = ok(StateVector::new(joint.entries().to_vec()))?;
        let rho = ok(DensityMatrix::from_statevector(&psi))?;
        for keep in [vec![0], vec![1, 2]] {
            let r = ok(rho.reduce(&keep))?;
            prop_assert!((r.purity() - 1.0).abs() <= 1e-10);
            let e = ok(hermitian_eig(r.matrix()))?;
            prop_assert!(e.values[1..].iter().all(|l| l.abs() <= 1e-10));
        }
        Ok(())
    })
}

fn linearity(cases: u32) -> Result<(), String> {
    let s = (2..=3usize).prop_flat_map(|n| {
        (
            cmat(1 << n, 1 << n),
            cmat(1 << n, 1 << n),
            (-2.0..2.0f64, -2.0..2.0f64),
            prop::sample::select(keep_sets(n)),
        )
    });
    run(cases, s, |(m1, m2, (re, im), keep)| {
        let k = c(re, im);
        let lhs = ok(partial_trace(&ok(m1.add(&m2.scale(k)))?, &keep))?;
        let rhs = ok(ok(partial_trace(&m1, &keep))?.add(&ok(partial_trace(&m2, &keep))?.scale(k)))?;
        prop_assert!(ok(lhs.max_abs_diff(&rhs))? <= 1e-12);
        Ok(())
    })
}

fn det2(m: &ComplexMatrix) -> f64 {
    (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)).re
}

fn fidelity_closed_form(cases: u32) -> Result<(), String> {
    run(cases, (density(2), density(2)), |(a, b)| {
        let (da, db) = (
            ok(DensityMatrix::from_matrix(a.clone()))?,
            ok(DensityMatrix::from_matrix(b.clone()))?,
        );
        let f = ok(fidelity(&da, &db))?;
        let tr_ab = ok(a.matmul(&b))?.trace().re;
        let oracle = (tr_ab + 2.0 * (det2(&a) * det2(&b)).max(0.0).sqrt()).sqrt();
        prop_assert!((f - oracle).abs() <= 1e-8, "{} vs {}", f, oracle);
        prop_assert!((f - ok(fidelity_qubit_closed_form(&da, &db))?).abs() <= 1e-8);
        Ok(())
    })
}

fn fidelity_symmetry(cases: u32) -> Result<(), String> {
    let s = prop_oneof![Just(2usize), Just(4)].prop_flat_map(|d| (density(d), density(d)));
    run(cases, s, |(a, b)| {
        let (da, db) = (
            ok(DensityMatrix::from_matrix(a))?,
            ok(DensityMatrix::from_matrix(b))?,
        );
        let f = ok(fidelity(&da, &db))?;
        prop_assert!((f - ok(fidelity(&db, &da))?).abs() <= 1e-9);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&f));
        Ok(())
    })
}

fn unitary_invariance(cases: u32) -> Result<(), String> {
    run(
        cases,
        (density(2), density(2), unitary_1q()),
        |(a, b, u)| {
            let conj = |m: &ComplexMatrix| -> Result<DensityMatrix, TestCaseError> {
                let r = ok(ok(u.matmul(m))?.matmul(&u.dagger()))?;
                ok(DensityMatrix::from_matrix(r))
            };
            let before = ok(fidelity(
                &ok(DensityMatrix::from_matrix(a.clone()))?,
                &ok(DensityMatrix::from_matrix(b.clone()))?,
            ))?;
            let after = ok(fidelity(&conj(&a)?, &conj(&b)?))?;
            prop_assert!((before - after).abs() <= 1e-9);
            Ok(())
        },
    )
}

fn distance_metric(cases: u32) -> Result<(), String> {
    let s = (1..=4usize).prop_flat_map(|d| (cmat(d, d), cmat(d, d), cmat(d, d), any::<bool>()));
    run(cases, s, |(a, b, m, halve)| {
        let ab = ok(element_distance(&a, &b, halve))?;
        prop_assert_eq!(ab, ok(element_distance(&b, &a, halve))?);
        let am = ok(element_distance(&a, &m, halve))?;
        let mb = ok(element_distance(&m, &b, halve))?;
        prop_assert!(ab <= am + mb + 1e-12);
        prop_assert_eq!(ok(element_distance(&a, &a, halve))?, 0.0);
        Ok(())
    })
}

fn normalized_pair() -> impl Strategy<Value = (C64, C64)> {
    (0.0..PI / 2.0, angle(), angle())
        .prop_map(|(t, p1, p2)| (C64::from_polar(t.cos(), p1), C64::from_polar(t.sin(), p2)))
}

fn phase_invariance(cases: u32) -> Result<(), String> {
    let s = (normalized_pair(), angle(), angle());
    run(cases, s, |((a1, a2), g0, g1)| {
        let (p0, p1) = (ok(build_psi0_bell().run())?, ok(build_psi1_bell().run())?);
        let rotate = |s: &StateVector, g: f64| {
            StateVector::new(
                s.amplitudes()
                    .iter()
                    .map(|a| a * C64::from_polar(1.0, g))
                    .collect(),
            )
        };
        let base = ok(check_bipartite_masking(
            &ok(MaskingInput::new(p0.clone(), p1.clone(), a1, a2))?,
            1e-9,
        ))?;
        let input = ok(MaskingInput::new(
            ok(rotate(&p0, g0))?,
            ok(rotate(&p1, g1))?,
            a1,
            a2,
        ))?;
        let moved = ok(check_bipartite_masking(&input, 1e-9))?;
        prop_assert!((base.reduced_equal_a - moved.reduced_equal_a).abs() <= 1e-12);
        prop_assert!((base.reduced_equal_b - moved.reduced_equal_b).abs() <= 1e-12);
        Ok(())
    })
}

fn ghz_masked(cases: u32) -> Result<(), String> {
    run(cases, (0.0..PI, angle(), angle()), |(t, p, l)| {
        let st = ok(ok(build_ghz(t, p, l))?.run())?;
        let rep = ok(check_multipartite_reductions(&st, 1e-9))?;
        prop_assert!(
            rep.masked,
            "theta {} min fidelity {}",
            t,
            rep.min_fidelity()
        );
        Ok(())
    })
}

fn cross_term_linear(cases: u32) -> Result<(), String> {
    // Real coefficient pairs with small Re(α₁α₂*) so that doubling stays normalizable.
    let s = (0.01..0.2f64).prop_map(|x| {
        let a2 = |r: f64| ((1.0 - (1.0 - 4.0 * r * r).sqrt()) / 2.0).sqrt();
        (x, a2(x), a2(2.0 * x))
    });
    run(cases, s, |(x, b1, b2)| {
        let (p0, p1) = (ok(build_psi0_bell().run())?, ok(build_psi1_bell().run())?);
        let dev = |b: f64| -> Result<f64, TestCaseError> {
            let a = (1.0 - b * b).sqrt();
            let rep = ok(check_bipartite_masking(
                &ok(MaskingInput::new(
                    p0.clone(),
                    p1.clone(),
                    c(a, 0.0),
                    c(b, 0.0),
                ))?,
                1e-9,
            ))?;
            Ok(rep.cross_cancellation_b)
        };
        let (d1, d2) = (dev(b1)?, dev(b2)?);
        prop_assert!((d1 - x).abs() <= 1e-12, "{} vs {}", d1, x);
        prop_assert!((d2 - 2.0 * d1).abs() <= 1e-12);
        Ok(())
    })
}

fn tomography_exact_inverse(cases: u32) -> Result<(), String> {
    run(cases, (1..=2usize).prop_flat_map(pure), |s| {
        let r = ok(reconstruct_from_distributions(&ok(exact_distributions(
            &s,
        ))?))?;
        let truth = s.to_matrix().matmul(&s.to_matrix().dagger()).unwrap();
        prop_assert!(ok(r.raw_rho.max_abs_diff(&truth))? <= 1e-10);
        prop_assert!(ok(r.rho.matrix().max_abs_diff(&truth))? <= 1e-9);
        Ok(())
    })
}

fn projection_identity(cases: u32) -> Result<(), String> {
    let s = prop_oneof![Just(2usize), Just(4), Just(8)].prop_flat_map(density);
    run(cases, s, |m| {
        let p = ok(project_to_physical(&m))?;
        prop_assert!(ok(p.matrix().max_abs_diff(&m))? <= 1e-9);
        Ok(())
    })
}

fn sampling_repeats(cases: u32) -> Result<(), String> {
    run(
        cases,
        ((1..=3usize).prop_flat_map(pure), 1..2000u64, any::<u64>()),
        |(s, shots, seed)| {
            let a = ok(sample_counts(&s, shots, seed))?;
            let b = ok(sample_counts(&s, shots, seed))?;
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.counts().values().sum::<u64>(), shots);
            Ok(())
        },
    )
}
