use std::sync::Arc;

use nekhoroshev::lattice::ModeTable;
use nekhoroshev::weights::{check_a0, sample_sphere, WeightSpec, WeightedState};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn log_ultra_value_at_shifted_argument() {
    // ln(x + e^2) = 3
    let w = WeightSpec::log_ultra(2.0, 1.0, 2.0).unwrap();
    let x = 3f64.exp() - 2f64.exp();
    assert!((w.value(x).unwrap() - 9.0).abs() < 1e-12);
}

#[test]
fn subadditivity_for_both_classes() {
    for w in [
        WeightSpec::gevrey(0.25, 1.0).unwrap(),
        WeightSpec::gevrey(0.75, 1.0).unwrap(),
        WeightSpec::log_ultra(1.5, 1.0, 2.0).unwrap(),
        WeightSpec::log_ultra(3.0, 1.0, 2.0).unwrap(),
    ] {
        let rep = check_a0(&w, 2.0, 6, 2000, 4).unwrap();
        assert!(rep.passed, "{w:?}: {rep:?}");
    }
}

#[test]
fn triangle_inequality_and_tail_bound() {
    let table = Arc::new(ModeTable::new(1, 20, 2.0).unwrap());
    let w0 = WeightSpec::gevrey(0.5, 1.0).unwrap().with_s0(&table).unwrap();
    let w = w0.clone().with_scale(w0.s0 + 0.5);
    let support: Vec<u32> = (0..table.len() as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let u = sample_sphere(&table, &w, 0.1, &support, false, &mut rng).unwrap();
        let v = sample_sphere(&table, &w, 0.3, &support, true, &mut rng).unwrap();
        let sum = WeightedState {
            table: table.clone(),
            amps: u.amps.iter().zip(&v.amps).map(|(a, b)| a + b).collect(),
        };
        assert!(sum.norm_s(&w, w.s) <= u.norm_s(&w, w.s) + v.norm_s(&w, w.s) + 1e-15);
        for n in [2u32, 5, 10] {
            let tail = u.high_part(n).norm_s(&w, w.s0);
            let bound = u.norm_s(&w, w.s) * (-(w.s - w.s0) * w.f(n as f64)).exp();
            assert!(tail <= bound * (1.0 + 1e-12), "N = {n}: {tail} > {bound}");
        }
    }
}

#[test]
fn scaling_is_linear() {
    let table = Arc::new(ModeTable::new(2, 3, 2.0).unwrap());
    let w = WeightSpec::gevrey(0.5, 1.0).unwrap();
    let support: Vec<u32> = (0..table.len() as u32).collect();
    let u = sample_sphere(&table, &w, 1.0, &support, true, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let v = u.scaled(Complex64::new(0.0, -3.0));
    assert!((v.norm_s(&w, w.s) - 3.0).abs() < 1e-12);
}
