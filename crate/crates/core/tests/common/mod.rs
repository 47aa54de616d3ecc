#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use svetlichny_bound::{pure_to_density, ComplexMatrix, DensityMatrix, PureState, UnitVector3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn normalize<const N: usize>(mut v: [Complex64; N]) -> [Complex64; N] {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    v
}

/// Haar-random three-qubit pure state.
pub fn haar_pure(rng: &mut ChaCha8Rng) -> PureState {
    let amps: [Complex64; 8] = std::array::from_fn(|_| gaussian_c(rng));
    PureState::new(normalize(amps)).unwrap()
}

/// Mixture of 1–4 Haar-random pure states with random weights.
pub fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let count = rng.random_range(1..=4);
    let weights: Vec<f64> = (0..count).map(|_| rng.random::<f64>() + 1e-3).collect();
    let mut rho = pure_to_density(&haar_pure(rng)).unwrap();
    let mut acc = weights[0];
    for w in &weights[1..] {
        let next = pure_to_density(&haar_pure(rng)).unwrap();
        acc += w;
        // rho currently carries weight (acc - w) of the total.
        rho = next.mix(&rho, w / acc).unwrap();
    }
    rho
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> UnitVector3 {
    UnitVector3::normalized([
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ])
    .unwrap()
}

/// Random proper rotation from a normalized quaternion.
pub fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Pure two-qubit state on `pair` (party indices 0=A, 1=B, 2=C) times a
/// pure qubit on the remaining party.
pub fn biseparable(rng: &mut ChaCha8Rng, pair: (usize, usize)) -> DensityMatrix {
    let two: [Complex64; 4] = normalize(std::array::from_fn(|_| gaussian_c(rng)));
    let one: [Complex64; 2] = normalize(std::array::from_fn(|_| gaussian_c(rng)));
    product_state(&two, &one, pair)
}

/// Brute-force trace `tr(O ρ)` for 8×8 operators, independent of the
/// library's expectation routine.
pub fn trace_product(op: &ComplexMatrix, rho: &DensityMatrix) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..8 {
        for c in 0..8 {
            acc += op.get(r, c) * rho.matrix().get(c, r);
        }
    }
    acc
}

/// Maximally entangled pair on `pair` (a Bell state under a random local
/// unitary) times a random pure qubit on the remaining party.
pub fn bell_times_qubit(rng: &mut ChaCha8Rng, pair: (usize, usize)) -> DensityMatrix {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (alpha, beta) = (Complex64::new(q[0], q[1]) / n, Complex64::new(q[2], q[3]) / n);
    // Coefficient matrix U/√2 with U = [[α, −β*], [β, α*]].
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let two = [alpha * s, -beta.conj() * s, beta * s, alpha.conj() * s];
    let one: [Complex64; 2] = normalize(std::array::from_fn(|_| gaussian_c(rng)));
    product_state(&two, &one, pair)
}

fn product_state(two: &[Complex64; 4], one: &[Complex64; 2], pair: (usize, usize)) -> DensityMatrix {
    let lone = 3 - pair.0 - pair.1;
    let mut amps = [Complex64::new(0.0, 0.0); 8];
    for (idx, amp) in amps.iter_mut().enumerate() {
        let bit = |party: usize| (idx >> (2 - party)) & 1;
        *amp = two[2 * bit(pair.0) + bit(pair.1)] * one[bit(lone)];
    }
    pure_to_density(&PureState::new(amps).unwrap()).unwrap()
}

/// Largest singular value of a row-major `rows × cols` matrix by power
/// iteration on AᵀA.
pub fn power_sigma_max(a: &[f64], rows: usize, cols: usize) -> f64 {
    let mut v = vec![1.0; cols];
    for (i, x) in v.iter_mut().enumerate() {
        *x += 0.1 * i as f64;
    }
    let mut sigma = 0.0;
    for _ in 0..20_000 {
        let av: Vec<f64> = (0..rows).map(|r| (0..cols).map(|c| a[r * cols + c] * v[c]).sum()).collect();
        let mut w: Vec<f64> = (0..cols).map(|c| (0..rows).map(|r| a[r * cols + c] * av[r]).sum()).collect();
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        w.iter_mut().for_each(|x| *x /= n);
        let next = n.sqrt();
        let done = (next - sigma).abs() <= 1e-15 * next.max(1.0);
        sigma = next;
        v = w;
        if done {
            break;
        }
    }
    sigma
}

/// Runs the command-line entry point in process.
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("svbound").chain(args.iter().copied());
    let code = svetlichny_bound::cli::main_with_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
