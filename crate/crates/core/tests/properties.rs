mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use svetlichny_bound::eigen::symmetric_eigen;
use svetlichny_bound::optimizer::maximize_matrix;
use svetlichny_bound::svetlichny::tightness_certificate_with;
use svetlichny_bound::*;

fn unit_from(v: [f64; 3]) -> Option<UnitVector3> {
    UnitVector3::normalized(v).ok()
}

fn settings_strategy() -> impl Strategy<Value = MeasurementSettings> {
    let dir = prop::array::uniform3(-1.0f64..1.0)
        .prop_filter_map("degenerate direction", |v| {
            if v.iter().map(|x| x * x).sum::<f64>() > 1e-4 {
                unit_from(v)
            } else {
                None
            }
        });
    prop::array::uniform6(dir).prop_map(MeasurementSettings::from_array)
}

fn rand_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<f64> {
    (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn mat_vec(a: &[f64], rows: usize, cols: usize, y: &[f64]) -> Vec<f64> {
    (0..rows).map(|r| dot(&a[r * cols..(r + 1) * cols], y)).collect()
}

#[test]
fn bilinear_form_is_bounded_by_top_singular_value() {
    let mut rng = common::rng(1);
    for _ in 0..1000 {
        let rows = rng.random_range(1..=9);
        let cols = rng.random_range(1..=9);
        let a = rand_matrix(&mut rng, rows, cols);
        // AᵀA, cols × cols.
        let mut ata = vec![0.0; cols * cols];
        for i in 0..cols {
            for j in 0..cols {
                ata[i * cols + j] = (0..rows).map(|r| a[r * cols + i] * a[r * cols + j]).sum();
            }
        }
        let eig = symmetric_eigen(&ata, cols);
        let lambda_max = eig.values[0].max(0.0).sqrt();
        let oracle = common::power_sigma_max(&a, rows, cols);
        assert!((lambda_max - oracle).abs() <= 1e-6 * oracle.max(1.0), "{lambda_max} vs {oracle}");

        let x: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = dot(&x, &mat_vec(&a, rows, cols, &y)).abs();
        assert!(lhs <= lambda_max * norm(&x) * norm(&y) + 1e-10);

        // Equality at the top singular pair.
        let v = eig.vectors[0].clone();
        let av = mat_vec(&a, rows, cols, &v);
        if lambda_max > 1e-12 {
            let u: Vec<f64> = av.iter().map(|z| z / lambda_max).collect();
            let top = dot(&u, &av);
            assert!((top - lambda_max).abs() <= 1e-8, "{top} vs {lambda_max}");
        }
    }
}

#[test]
fn spectrum_matches_power_iteration_oracle() {
    let mut rng = common::rng(2);
    for _ in 0..100 {
        let rho = common::random_density(&mut rng);
        let m = unfold(&correlation_tensor(&rho).unwrap());
        let flat: Vec<f64> = m.entries.iter().flatten().copied().collect();
        let oracle = common::power_sigma_max(&flat, 3, 9);
        let sp = singular_spectrum(&m);
        assert!((sp.values[0] - oracle).abs() <= 1e-8, "{} vs {oracle}", sp.values[0]);
        let sq: f64 = sp.values.iter().map(|v| v * v).sum();
        assert!((sq - m.frobenius_sq()).abs() <= 1e-10);
    }
}

#[test]
fn transpose_has_same_singular_values() {
    let mut rng = common::rng(3);
    for _ in 0..200 {
        let rho = common::random_density(&mut rng);
        let m = unfold(&correlation_tensor(&rho).unwrap());
        let flat: Vec<f64> = m.entries.iter().flatten().copied().collect();
        // Mᵀ is 9×3; its Gram matrix MᵀM is 9×9.
        let mut mtm = vec![0.0; 81];
        for i in 0..9 {
            for j in 0..9 {
                mtm[i * 9 + j] = (0..3).map(|r| flat[r * 9 + i] * flat[r * 9 + j]).sum();
            }
        }
        let eig = symmetric_eigen(&mtm, 9);
        let sp = singular_spectrum(&m);
        // Compare squares: taking square roots of near-zero eigenvalues
        // would amplify rounding.
        for k in 0..3 {
            let sq = sp.values[k] * sp.values[k];
            assert!((eig.values[k] - sq).abs() <= 1e-10, "k={k}: {} vs {sq}", eig.values[k]);
        }
        for k in 3..9 {
            assert!(eig.values[k].abs() <= 1e-12);
        }
    }
}

#[test]
fn local_rotations_preserve_spectrum() {
    let mut rng = common::rng(4);
    for _ in 0..100 {
        let rho = common::random_density(&mut rng);
        let t = correlation_tensor(&rho).unwrap();
        let (ra, rb, rc) = (
            common::random_rotation(&mut rng),
            common::random_rotation(&mut rng),
            common::random_rotation(&mut rng),
        );
        let rotated = local_rotate(&t, &ra, &rb, &rc).unwrap();
        let before = singular_spectrum(&unfold(&t));
        let after = singular_spectrum(&unfold(&rotated));
        for k in 0..3 {
            assert!((before.values[k] - after.values[k]).abs() <= 1e-9);
        }
    }
}

#[test]
fn tensor_entries_are_bounded() {
    let mut rng = common::rng(5);
    for _ in 0..200 {
        let rho = common::random_density(&mut rng);
        let t = correlation_tensor(&rho).unwrap();
        assert!(t.max_abs() <= 1.0 + 1e-9);
    }
}

#[test]
fn tensor_matches_brute_force_traces() {
    let mut rng = common::rng(6);
    for _ in 0..20 {
        let rho = common::random_density(&mut rng);
        let t = correlation_tensor(&rho).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let op = kron3(&pauli(i + 1).unwrap(), &pauli(j + 1).unwrap(), &pauli(k + 1).unwrap()).unwrap();
                    let tr = common::trace_product(&op, &rho);
                    assert!((tr.re - t.get(i, j, k)).abs() <= 1e-12);
                    assert!(tr.im.abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn operator_and_bilinear_values_agree() {
    let mut rng = common::rng(7);
    for _ in 0..1000 {
        let rho = common::random_density(&mut rng);
        let s = MeasurementSettings::from_array(std::array::from_fn(|_| common::random_unit(&mut rng)));
        let m = unfold(&correlation_tensor(&rho).unwrap());
        let direct = svetlichny_value(&rho, &s).unwrap();
        let bilinear = bilinear_value(&m, &s);
        assert!((direct - bilinear).abs() <= 1e-10, "{direct} vs {bilinear}");
        let traced = common::trace_product(&build_operator(&s), &rho);
        assert!((traced.re - direct).abs() <= 1e-10);
    }
}

#[test]
fn optimizer_never_exceeds_bound() {
    let mut rng = common::rng(8);
    let cfg = OptimizerConfig::default();
    for _ in 0..200 {
        let rho = common::random_density(&mut rng);
        let q = quantum_bound(&rho).unwrap().q_bound;
        let best = maximize(&rho, &cfg).unwrap().best_value;
        assert!(best <= q + 1e-7, "{best} > {q}");
    }
}

#[test]
fn biseparable_states_respect_classical_bound() {
    let mut rng = common::rng(9);
    let cfg = OptimizerConfig::default();
    for pair in [(0, 1), (0, 2), (1, 2)] {
        for n in 0..50 {
            let rho = if n % 2 == 0 {
                common::bell_times_qubit(&mut rng, pair)
            } else {
                common::biseparable(&mut rng, pair)
            };
            let best = maximize(&rho, &cfg).unwrap().best_value;
            assert!(best <= 4.0 + 1e-6, "pair {pair:?}: {best}");
        }
    }
}

#[test]
fn bell_pair_with_qubit_reaches_classical_bound() {
    // λ₁ = 1 exactly for a Bell pair on A,B times a qubit on C.
    let mut rng = common::rng(10);
    let rho = common::bell_times_qubit(&mut rng, (0, 1));
    let report = quantum_bound(&rho).unwrap();
    assert!((report.q_bound - 4.0).abs() <= 1e-9);
    assert_eq!(report.classification, Classification::CertifiedNoViolation);
}

#[test]
fn settings_relabelings_preserve_value() {
    let mut rng = common::rng(11);
    for _ in 0..200 {
        let rho = common::random_density(&mut rng);
        let s = MeasurementSettings::from_array(std::array::from_fn(|_| common::random_unit(&mut rng)));
        let v = svetlichny_value(&rho, &s).unwrap();
        let with = |b: UnitVector3, bp: UnitVector3, c: UnitVector3, cp: UnitVector3, a: UnitVector3, ap: UnitVector3| {
            svetlichny_value(
                &rho,
                &MeasurementSettings {
                    a,
                    a_prime: ap,
                    b,
                    b_prime: bp,
                    c,
                    c_prime: cp,
                },
            )
            .unwrap()
        };
        // b ↔ b′ with c → −c′, c′ → c is the same operator with a′ and both c's negated.
        let swapped = with(s.b_prime, s.b, s.c_prime.neg(), s.c, s.a, s.a_prime);
        let relabeled = with(s.b, s.b_prime, s.c_prime.neg(), s.c.neg(), s.a, s.a_prime.neg());
        assert!((swapped - relabeled).abs() <= 1e-10, "{swapped} vs {relabeled}");
        // Swapping primed and unprimed settings on every party flips the sign.
        let all = with(s.b_prime, s.b, s.c_prime, s.c, s.a_prime, s.a);
        assert!((all + v).abs() <= 1e-10, "{all} vs {v}");
    }
}

#[test]
fn optimum_invariant_under_full_relabeling() {
    let mut rng = common::rng(12);
    for _ in 0..20 {
        let rho = common::random_density(&mut rng);
        let m = unfold(&correlation_tensor(&rho).unwrap());
        let res = maximize_matrix(&m, &OptimizerConfig::default()).unwrap();
        let s = res.best_settings;
        let relabeled = MeasurementSettings {
            a: s.a_prime,
            a_prime: s.a,
            b: s.b_prime,
            b_prime: s.b,
            c: s.c_prime,
            c_prime: s.c,
        };
        assert!((bilinear_value(&m, &relabeled).abs() - res.best_value).abs() <= 1e-10);
    }
}

#[test]
fn certificates_reproduce_their_value() {
    let mut rng = common::rng(13);
    let cfg = OptimizerConfig::default();
    let mut found = 0;
    let mut states: Vec<DensityMatrix> = (0..20).map(|_| common::random_density(&mut rng)).collect();
    states.push(pure_to_density(&PureState::ghz()).unwrap());
    for p in [0.3, 0.8, 1.0] {
        states.push(realize(&FamilySpec::new(FamilyKind::GhzWhiteNoise(GhzClassParams::ghz()), p).unwrap()).unwrap());
        states.push(realize(&FamilySpec::new(FamilyKind::GhzColorNoiseA, p).unwrap()).unwrap());
    }
    for rho in &states {
        if let Some(cert) = tightness_certificate_with(rho, 1e-6, &cfg).unwrap() {
            found += 1;
            let again = svetlichny_value(rho, &cert.settings).unwrap();
            assert!((again - cert.achieved).abs() <= 1e-12);
            let q = quantum_bound(rho).unwrap().q_bound;
            assert!(q - cert.achieved <= 1e-6);
            assert!((cert.residual - (q - cert.achieved)).abs() <= 1e-12);
        }
    }
    assert!(found >= 7);
}

#[test]
fn optimizer_is_seed_deterministic() {
    let mut rng = common::rng(14);
    let rho = common::random_density(&mut rng);
    let cfg = OptimizerConfig {
        seed: 99,
        ..OptimizerConfig::default()
    };
    let first = maximize(&rho, &cfg).unwrap();
    let second = maximize(&rho, &cfg).unwrap();
    assert_eq!(first, second);
    assert_eq!(first.best_value.to_bits(), second.best_value.to_bits());
}

#[test]
fn white_noise_scales_optimum_linearly() {
    let cfg = OptimizerConfig::default();
    let params = GhzClassParams::new(0.5, 1.1).unwrap();
    let at = |p: f64| {
        let rho = realize(&FamilySpec::new(FamilyKind::GhzWhiteNoise(params), p).unwrap()).unwrap();
        maximize(&rho, &cfg).unwrap().best_value
    };
    let full = at(1.0);
    for p in [0.1, 0.35, 0.6, 0.9] {
        assert!((at(p) - p * full).abs() <= 1e-6);
    }
}

#[test]
fn w_state_optimum_regression() {
    // Frozen from a 50-start run with max_iterations 5000; the bound 4λ₁ is
    // not tight here.
    const W_OPTIMUM: f64 = 4.354648431;
    let rho = pure_to_density(&PureState::w()).unwrap();
    let cfg = OptimizerConfig {
        max_iterations: 5000,
        ..OptimizerConfig::default()
    };
    let res = maximize(&rho, &cfg).unwrap();
    assert!((res.best_value - W_OPTIMUM).abs() <= 1e-7, "{}", res.best_value);
    let report = quantum_bound(&rho).unwrap();
    assert!(report.q_bound > res.best_value + 1.0);
    assert_eq!(report.classification, Classification::CertifiedViolation);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bilinear_value_bounded_by_four_lambda(amps in prop::array::uniform8((-1.0f64..1.0, -1.0f64..1.0)), s in settings_strategy()) {
        let amps = amps.map(|(re, im)| Complex64::new(re, im));
        prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let psi = PureState::new(common::normalize(amps)).unwrap();
        let rho = pure_to_density(&psi).unwrap();
        let m = unfold(&correlation_tensor(&rho).unwrap());
        let lambda1 = singular_spectrum(&m).lambda1();
        prop_assert!(bilinear_value(&m, &s).abs() <= 4.0 * lambda1 + 1e-10);
    }

    #[test]
    fn observables_square_to_identity(v in prop::array::uniform3(-1.0f64..1.0)) {
        prop_assume!(v.iter().map(|x| x * x).sum::<f64>() > 1e-6);
        let g = UnitVector3::normalized(v).unwrap();
        let o = observable(&g);
        prop_assert!((&o * &o).max_abs_diff(&ComplexMatrix::identity(2)) <= 1e-12);
    }

    #[test]
    fn seesaw_step_never_decreases(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let rho = common::random_density(&mut rng);
        let m = unfold(&correlation_tensor(&rho).unwrap());
        let mut s = MeasurementSettings::from_array(std::array::from_fn(|_| common::random_unit(&mut rng)));
        let mut value = bilinear_value(&m, &s);
        for _ in 0..20 {
            let (next, v) = seesaw_step(&m, &s);
            prop_assert!(v >= value - 1e-12);
            prop_assert!((bilinear_value(&m, &next) - v).abs() <= 1e-12);
            s = next;
            value = v;
        }
    }

    #[test]
    fn expectation_is_linear(seed in any::<u64>(), alpha in 0.0f64..1.0) {
        let mut rng = common::rng(seed);
        let r1 = common::random_density(&mut rng);
        let r2 = common::random_density(&mut rng);
        let op = build_operator(&MeasurementSettings::from_array(std::array::from_fn(|_| common::random_unit(&mut rng))));
        let mixed = r1.mix(&r2, alpha).unwrap();
        let lhs = expectation(&mixed, &op).unwrap();
        let rhs = alpha * expectation(&r1, &op).unwrap() + (1.0 - alpha) * expectation(&r2, &op).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }
}
