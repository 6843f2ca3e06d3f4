use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use species_entanglement::ed::{
    apply_hamiltonian, energy_cross_check, ground_state, mode_weights_ed, momentum_entropy_ed,
    species_entropy_ed, GroundStateED, SpinHamiltonian,
};
use species_entanglement::entanglement::epsilon_finite;
use species_entanglement::modes::{build_grid, mode_spectrum, Parity};

const SIZES: [usize; 5] = [2, 4, 6, 8, 10];
const COUPLINGS: [f64; 6] = [-0.9, -0.5, -0.2, 0.2, 0.5, 0.9];

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn hamiltonian_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ham = SpinHamiltonian::from_ratio(4, 0.7).unwrap();
    for _ in 0..100 {
        let u = random_vec(&mut rng, 16);
        let v = random_vec(&mut rng, 16);
        let lhs = dot(&u, &apply_hamiltonian(&v, &ham).unwrap());
        let rhs = dot(&apply_hamiltonian(&u, &ham).unwrap(), &v);
        assert!((lhs - rhs).abs() <= 1e-12);
    }
}

#[test]
fn hamiltonian_preserves_spin_flip_parity() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in [3, 6, 9] {
        let ham = SpinHamiltonian::from_ratio(n, -1.3).unwrap();
        let v = random_vec(&mut rng, 1 << n);
        let hp = ham.apply(&ham.apply_parity(&v)).unwrap();
        let ph = ham.apply_parity(&ham.apply(&v).unwrap());
        let diff: f64 = hp
            .iter()
            .zip(&ph)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-12);
    }
}

fn check_ground_state(gs: &GroundStateED, ham: &SpinHamiltonian, rng: &mut ChaCha8Rng) {
    let total: f64 = gs.probabilities().iter().sum();
    assert!((total - 1.0).abs() <= 1e-12);
    let sign = match gs.parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    for (s, a) in gs.amplitudes.iter().enumerate() {
        if a.abs() > 1e-7 {
            assert_eq!(ham.parity_of(s), sign, "configuration {s:b}");
        }
    }
    for _ in 0..20 {
        let v = random_vec(rng, ham.dim());
        let rq = dot(&v, &ham.apply(&v).unwrap()) / dot(&v, &v);
        assert!(gs.energy <= rq + 1e-12);
    }
    assert!(gs.residual <= 1e-10);
}

#[test]
fn global_ground_state_is_even() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in SIZES {
        for x in COUPLINGS {
            let ham = SpinHamiltonian::from_ratio(n, x).unwrap();
            let gs = ground_state(&ham, None, 1e-10).unwrap();
            assert_eq!(gs.parity, Parity::Even, "n = {n}, x = {x}");
            assert!((gs.parity_expectation - 1.0).abs() <= 1e-9);
            check_ground_state(&gs, &ham, &mut rng);
        }
    }
}

#[test]
fn sector_projection_near_degeneracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let ham = SpinHamiltonian::from_ratio(8, 2.0).unwrap();
    let even = ground_state(&ham, Some(Parity::Even), 1e-10).unwrap();
    let odd = ground_state(&ham, Some(Parity::Odd), 1e-10).unwrap();
    check_ground_state(&even, &ham, &mut rng);
    check_ground_state(&odd, &ham, &mut rng);
    // ordered phase: the two sectors are split only by a finite-size tunnelling gap
    assert!((even.energy - odd.energy).abs() < 0.1);
    assert!(even.energy <= odd.energy);
    // the even sector still carries the product state
    let modes = epsilon_finite(2.0, 8, Parity::Even).unwrap().epsilon;
    assert!((momentum_entropy_ed(&even).unwrap() - modes).abs() <= 1e-9);
}

#[test]
fn mode_energy_matches_exact_energy() {
    for n in SIZES {
        for x in COUPLINGS {
            let d = energy_cross_check(x, n).unwrap();
            assert!(d <= 1e-9, "n = {n}, x = {x}: {d:e}");
        }
    }
    assert!(energy_cross_check(1.0, 2).unwrap() <= 1e-12);
    assert!(energy_cross_check(0.0, 8).unwrap() <= 1e-12);
}

#[test]
fn measured_pair_weights_match_mode_formula() {
    for n in SIZES {
        for x in COUPLINGS {
            let ham = SpinHamiltonian::from_ratio(n, x).unwrap();
            let gs = ground_state(&ham, None, 1e-11).unwrap();
            let measured = mode_weights_ed(&gs).unwrap();
            let formula = mode_spectrum(x, &build_grid(n, Parity::Even).unwrap()).unwrap();
            for ((q, p), m) in measured.iter().zip(formula.modes()) {
                assert!((q - m.q).abs() < 1e-15);
                assert!(
                    (p - m.p).abs() <= 1e-9,
                    "n = {n}, x = {x}, q = {q}: {p} vs {}",
                    m.p
                );
            }
            let eps = epsilon_finite(x, n, Parity::Even).unwrap().epsilon;
            assert!((momentum_entropy_ed(&gs).unwrap() - eps).abs() <= 1e-9);
        }
    }
}

#[test]
fn two_site_chain_matches_mode_sum_in_spin_basis() {
    for x in [0.2, 0.5, 1.0, -0.9, 3.0] {
        let ham = SpinHamiltonian::from_ratio(2, x).unwrap();
        let gs = ground_state(&ham, Some(Parity::Even), 1e-12).unwrap();
        let eps = epsilon_finite(x, 2, Parity::Even).unwrap().epsilon;
        assert!((species_entropy_ed(&gs) - eps).abs() <= 1e-10, "x = {x}");
    }
}

#[test]
fn spin_basis_entropy_exceeds_mode_sum_beyond_two_sites() {
    // one pair of momenta is one pair of sites only for n = 2; for longer
    // chains the σᶻ-basis distribution is not a product over momentum pairs
    for n in [4, 6, 8, 10] {
        for x in COUPLINGS {
            let ham = SpinHamiltonian::from_ratio(n, x).unwrap();
            let gs = ground_state(&ham, None, 1e-10).unwrap();
            let spin = species_entropy_ed(&gs);
            let modes = epsilon_finite(x, n, Parity::Even).unwrap().epsilon;
            assert!(spin > modes + 1e-4, "n = {n}, x = {x}: {spin} vs {modes}");
        }
    }
}

#[test]
fn translation_leaves_entropy_unchanged() {
    for (n, x) in [(6, 0.5), (8, -0.9), (10, 0.2)] {
        let ham = SpinHamiltonian::from_ratio(n, x).unwrap();
        let gs = ground_state(&ham, None, 1e-10).unwrap();
        let mask = (1usize << n) - 1;
        let mut rotated = vec![0.0; 1 << n];
        for (s, a) in gs.amplitudes.iter().enumerate() {
            let r = ((s << 1) | (s >> (n - 1))) & mask;
            rotated[r] = *a;
        }
        let shifted = GroundStateED {
            amplitudes: rotated,
            ..gs.clone()
        };
        assert!((species_entropy_ed(&shifted) - species_entropy_ed(&gs)).abs() <= 1e-12);
    }
}

#[test]
fn uncoupled_chains_are_unentangled() {
    for n in [2, 4, 8, 12] {
        let ham = SpinHamiltonian::from_ratio(n, 0.0).unwrap();
        let gs = ground_state(&ham, None, 1e-10).unwrap();
        assert!(species_entropy_ed(&gs) <= 1e-15);
        assert!((gs.energy + n as f64).abs() <= 1e-10);
    }
}

#[test]
fn ten_site_product_form_versus_full_state_near_criticality() {
    // finite-size curves of the mode sum and of the exact σᶻ distribution
    // part ways well before |x| = 1; record both at n = 10
    for x in [0.8, 0.95, 1.0, 1.05, 1.2] {
        let ham = SpinHamiltonian::from_ratio(10, x).unwrap();
        let gs = ground_state(&ham, Some(Parity::Even), 1e-10).unwrap();
        let spin = species_entropy_ed(&gs);
        let momentum = momentum_entropy_ed(&gs).unwrap();
        let modes = epsilon_finite(x, 10, Parity::Even).unwrap().epsilon;
        println!("x = {x}: modes {modes:.6}  ed(momentum) {momentum:.6}  ed(σᶻ) {spin:.6}");
        assert!((momentum - modes).abs() <= 1e-9);
        assert!(spin > modes);
    }
}
