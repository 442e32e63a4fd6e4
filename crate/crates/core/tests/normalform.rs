mod common;

use std::sync::Arc;

use common::{desk_residual, desk_run};
use nekhoroshev::lattice::{BlockPartition, ModeTable};
use nekhoroshev::normalform::{
    birkhoff_iterate, solve_homological, BirkhoffConfig, Classifier, HamiltonianSpec, ResonanceClass,
};
use nekhoroshev::polyalg::{
    diagonal_quadratic, momentum_monomials, poisson, random_polynomial_with, Coeff,
    GaussianRational, RandomPolySpec, SparsePolynomial,
};
use nekhoroshev::spectrum::FrequencyModel;
use nekhoroshev::stability::{build_ledger, LedgerInputs};
use nekhoroshev::weights::WeightSpec;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn desk_normal_form_matches_flow_composition() {
    let (model, p, out) = desk_run(7);
    assert!(!out.generators.iter().all(|g| g.is_empty()));
    let low = desk_residual(&model, &p, &out, true, 11);
    let all = desk_residual(&model, &p, &out, false, 12);
    println!("low-state residual {low:.3e}, full-state residual {all:.3e}");
    assert!(low < 1e-8, "{low}");
    assert!(all < 1e-8, "{all}");
}

#[test]
fn zero_perturbation_is_trivial() {
    let model = FrequencyModel::conv_nls_free(1);
    let table = Arc::new(ModeTable::new(1, 3, 2.0).unwrap());
    let w = WeightSpec::gevrey(0.5, 2.0).unwrap().with_s0(&table).unwrap();
    let ledger = build_ledger(LedgerInputs::from_model(&model, &w, 1.0, 1.0)).unwrap();
    let cfg = BirkhoffConfig {
        n_cut: 3,
        d: 5,
        r: 1e-3,
        partition: BlockPartition::default(),
        weight: w,
        override_gate: true,
        check_floor: false,
        budget: 1_000_000,
    };
    let h = HamiltonianSpec {
        model,
        perturbation: SparsePolynomial::<Complex64>::zero(table),
    };
    let out = birkhoff_iterate(&h, &cfg, &ledger).unwrap();
    assert!(out.z().is_empty());
    assert!(out.generators.iter().all(|g| g.is_empty()));
    assert!(out.residual.is_empty() && out.r_high.is_empty());
}

#[test]
fn gate_is_enforced_unless_overridden() {
    let (model, p, _) = desk_run(1);
    let table = p.table().clone();
    let w = WeightSpec::gevrey(0.5, 2.0).unwrap().with_s0(&table).unwrap();
    let ledger = build_ledger(LedgerInputs::from_model(&model, &w, 1.0, 1e-3)).unwrap();
    let cfg = BirkhoffConfig {
        n_cut: 3,
        d: 5,
        r: 1e-3,
        partition: BlockPartition::default(),
        weight: w,
        override_gate: false,
        check_floor: true,
        budget: 1_000_000,
    };
    let h = HamiltonianSpec {
        model,
        perturbation: p,
    };
    let err = birkhoff_iterate(&h, &cfg, &ledger).unwrap_err();
    assert!(matches!(err, nekhoroshev::Error::Gate { .. }));
}

fn exact_random(table: &Arc<ModeTable>, seed: u64) -> SparsePolynomial<GaussianRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomPolySpec {
        degrees: 3..=5,
        support_radius: 4,
        density: 0.3,
        real: true,
        budget: 1_000_000,
    };
    random_polynomial_with(table, &spec, &mut rng, |rng| {
        let re = BigRational::new(BigInt::from(rng.gen_range(-20i64..=20)), BigInt::from(rng.gen_range(1i64..=9)));
        let im = BigRational::new(BigInt::from(rng.gen_range(-20i64..=20)), BigInt::from(rng.gen_range(1i64..=9)));
        GaussianRational::new(re, im)
    })
    .unwrap()
}

#[test]
fn homological_identity_exact() {
    let model = FrequencyModel::conv_nls_free(1);
    let table = Arc::new(ModeTable::new(1, 4, 2.0).unwrap());
    let cls = Classifier::new(&model, table.clone(), 4, BlockPartition::default()).unwrap();
    let h0 = diagonal_quadratic(&table, |id| GaussianRational::from_i64(table.norm_sq(id)));
    for seed in 0..5 {
        let p = exact_random(&table, seed);
        let sol = solve_homological(&p, &cls, None).unwrap();
        let id = poisson(&h0, &sol.g).unwrap().add(&p).sub(&sol.z);
        assert!(id.is_empty());
        assert!(sol.z.terms().all(|(m, _)| cls.classify_ids(m).is_resonant()));
        assert!(sol.g.terms().all(|(m, _)| cls.classify_ids(m).is_nonresonant()));
        assert!(sol.z.sup_coeff() <= p.sup_coeff());
    }
}

#[test]
fn classification_partitions_all_monomials() {
    let model = FrequencyModel::conv_nls_free(1);
    let table = Arc::new(ModeTable::new(1, 6, 2.0).unwrap());
    let cls = Classifier::new(&model, table.clone(), 3, BlockPartition::default()).unwrap();
    let mut counts = std::collections::BTreeMap::new();
    let mut total = 0;
    for d in 1..=5 {
        let monos = momentum_monomials(&table, d, |_| true, 10_000_000).unwrap();
        total += monos.len();
        for m in monos {
            let c = cls.classify_ids(&m);
            let high = m.iter().filter(|&&id| table.is_high(id, 3)).count();
            match c {
                ResonanceClass::R0 | ResonanceClass::NR0 => assert_eq!(high, 0),
                ResonanceClass::NR1 => assert_eq!(high, 1),
                ResonanceClass::NR21 | ResonanceClass::NR22 | ResonanceClass::R2 => assert_eq!(high, 2),
                ResonanceClass::High => assert!(high >= 3),
            }
            *counts.entry(c).or_insert(0usize) += 1;
        }
    }
    assert_eq!(counts.values().sum::<usize>(), total);
    assert_eq!(counts.len(), 7);
}

#[test]
fn paired_normal_part_commutes_with_actions() {
    let model = FrequencyModel::conv_nls_random(1, 4, 2.0, &mut ChaCha8Rng::seed_from_u64(3));
    let table = Arc::new(ModeTable::new(1, 4, 2.0).unwrap());
    let cls = Classifier::new(&model, table.clone(), 3, BlockPartition::default()).unwrap();
    let p = exact_random(&table, 9).to_c64();
    let (kept, _) = p.project_high_modes(3, 3).unwrap();
    let sol = solve_homological(&kept, &cls, None).unwrap();
    let z0 = sol.z.filter(|m| cls.classify_ids(m) == ResonanceClass::R0);
    assert!(!z0.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let c: Vec<f64> = (0..table.len() as u32)
        .map(|id| if table.is_high(id, 3) { 0.0 } else { rng.gen_range(-1.0..1.0) })
        .collect();
    let actions = diagonal_quadratic(&table, |id| Complex64::new(c[id as usize], 0.0));
    let br = poisson(&actions, &z0).unwrap();
    assert!(br.sup_coeff() == 0.0 || br.is_empty(), "{}", br.sup_coeff());
}

#[test]
fn chain_bounds_are_monotone_under_gate() {
    let (_, _, out) = desk_run(5);
    let l = &out.ledger;
    let r = 1e-80;
    assert!(l.ln_gate(r, 5, 3) < 0.0);
    let mut prev = f64::NEG_INFINITY;
    for k in 4..=5 {
        let b = l.ln_p_bound(r, k, 5, 3);
        assert!(b < prev || prev == f64::NEG_INFINITY);
        prev = b;
        assert!(l.ln_g_bound(r, k, 5, 3) <= (1.0 / (16.0 * std::f64::consts::E * 5.0)).ln());
    }
}
