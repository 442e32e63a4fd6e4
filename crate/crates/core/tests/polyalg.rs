mod common;

use std::sync::Arc;

use common::{exact_poly, random_state, to_table_order, vars_1d, OracleSystem};
use nekhoroshev::lattice::{ModeIndex, ModeTable, MultiIndex};
use nekhoroshev::polyalg::{diagonal_quadratic, poisson, Coeff, GaussianRational, SparsePolynomial};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table() -> Arc<ModeTable> {
    Arc::new(ModeTable::new(1, 3, 2.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn antisymmetry_degree_and_momentum(seed in any::<u64>(), da in 1usize..=4, db in 1usize..=4) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = exact_poly(&t, da..=da, 0.3, false, &mut rng);
        let q = exact_poly(&t, db..=db, 0.3, false, &mut rng);
        let pq = poisson(&p, &q).unwrap();
        prop_assert!(pq.add(&poisson(&q, &p).unwrap()).is_empty());
        for (m, _) in pq.terms() {
            prop_assert_eq!(m.len() + 2, da + db);
            prop_assert!(t.momentum(m).iter().all(|x| *x == 0));
        }
    }

    #[test]
    fn jacobi_in_floating_point(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = exact_poly(&t, 2..=3, 0.3, false, &mut rng).to_c64();
        let b = exact_poly(&t, 2..=3, 0.3, false, &mut rng).to_c64();
        let c = exact_poly(&t, 2..=3, 0.3, false, &mut rng).to_c64();
        let t1 = poisson(&a, &poisson(&b, &c).unwrap()).unwrap();
        let t2 = poisson(&b, &poisson(&c, &a).unwrap()).unwrap();
        let t3 = poisson(&c, &poisson(&a, &b).unwrap()).unwrap();
        let scale = t1.sup_coeff().max(t2.sup_coeff()).max(t3.sup_coeff()).max(1.0);
        prop_assert!(t1.add(&t2).add(&t3).sup_coeff() / scale < 1e-12);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = exact_poly(&t, 1..=4, 0.2, true, &mut rng).to_c64();
        let back = SparsePolynomial::<Complex64>::from_json(&p.to_json(), Some(t.clone())).unwrap();
        prop_assert_eq!(back, p);
    }
}

#[test]
fn bracket_matches_gradient_oracle() {
    let t = table();
    let sys = OracleSystem::new(vars_1d(3));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let p = exact_poly(&t, 2..=4, 0.3, false, &mut rng).to_c64();
        let q = exact_poly(&t, 2..=4, 0.3, false, &mut rng).to_c64();
        let pq = poisson(&p, &q).unwrap();
        let (op, oq) = (sys.poly(&p.to_json()), sys.poly(&q.to_json()));
        let u = random_state(sys.vars.len(), &mut rng);
        let want = sys.bracket_at(&op, &oq, &u);
        let got = pq.eval(&to_table_order(&sys, &t, &u));
        assert!((want - got).norm() <= 1e-12 * want.norm().max(1.0), "{want} vs {got}");
    }
}

#[test]
fn field_matches_finite_differences() {
    let t = table();
    let sys = OracleSystem::new(vars_1d(3));
    let mut p = SparsePolynomial::<Complex64>::zero(t.clone());
    p.add_multi(&MultiIndex::from_pairs_1d(&[(3, 1), (1, -1), (2, -1)]).unwrap(), Complex64::new(1.0, 0.0))
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = random_state(sys.vars.len(), &mut rng);
    let ut = to_table_order(&sys, &t, &u);
    let x = p.vector_field(&ut);
    let h = 1e-6;
    for id in 0..t.len() as u32 {
        // X_(j,s) = -s i dP/du_(j,-s)
        let partner = t.conj(id) as usize;
        let mut up = ut.clone();
        let mut um = ut.clone();
        up[partner] += h;
        um[partner] -= h;
        let d = (p.eval(&up) - p.eval(&um)) / (2.0 * h);
        let want = Complex64::new(0.0, -(t.sign(id) as f64)) * d;
        assert!((x[id as usize] - want).norm() < 1e-8, "{id}: {} vs {want}", x[id as usize]);
    }
}

#[test]
fn action_field_and_bracket() {
    let t = table();
    let j = [2];
    let mut a = SparsePolynomial::<GaussianRational>::zero(t.clone());
    a.add_multi(&MultiIndex::new(vec![ModeIndex::plus(&j), ModeIndex::minus(&j)]).unwrap(), GaussianRational::one())
        .unwrap();
    // X_(j,+) = -i u_(j,+)
    let mut u = vec![Complex64::new(0.0, 0.0); t.len()];
    let plus = t.id_of(&ModeIndex::plus(&j)).unwrap() as usize;
    let minus = t.id_of(&ModeIndex::minus(&j)).unwrap() as usize;
    u[plus] = Complex64::new(0.3, -0.2);
    u[minus] = Complex64::new(0.7, 0.1);
    let x = a.to_c64().vector_field(&u);
    assert!((x[plus] - Complex64::new(0.0, -1.0) * u[plus]).norm() < 1e-15);

    // {|u_0|^2, u_(0,+)} = i u_(0,+); the zero mode keeps the linear term momentum-free
    let zero = [0];
    let mut a0 = SparsePolynomial::<GaussianRational>::zero(t.clone());
    a0.add_multi(&MultiIndex::new(vec![ModeIndex::plus(&zero), ModeIndex::minus(&zero)]).unwrap(), GaussianRational::one())
        .unwrap();
    let mut lin = SparsePolynomial::<GaussianRational>::zero(t.clone());
    lin.add_multi(&MultiIndex::new(vec![ModeIndex::plus(&zero)]).unwrap(), GaussianRational::one())
        .unwrap();
    let br = poisson(&a0, &lin).unwrap();
    assert_eq!(br.len(), 1);
    let (m, c) = br.terms().next().unwrap();
    assert_eq!(t.multi_index(m), MultiIndex::new(vec![ModeIndex::plus(&zero)]).unwrap());
    assert_eq!(c.to_c64(), Complex64::new(0.0, 1.0));
}

#[test]
fn homological_identity_on_monomials() {
    // {H0, u^J} = i (sum sigma_l omega_{j_l}) u^J for H0 = sum j^2 |u_j|^2
    let t = table();
    let h0 = diagonal_quadratic(&t, |id| GaussianRational::from_i64(t.norm_sq(id)));
    for pairs in [
        vec![(3, 1), (1, -1), (2, -1)],
        vec![(1, 1), (1, 1), (2, -1), (0, -1)],
        vec![(3, 1), (-3, 1), (2, -1), (-2, -1)],
    ] {
        let m = MultiIndex::from_pairs_1d(&pairs).unwrap();
        let mut p = SparsePolynomial::<GaussianRational>::zero(t.clone());
        p.add_multi(&m, GaussianRational::one()).unwrap();
        let br = poisson(&h0, &p).unwrap();
        let omega: i64 = pairs.iter().map(|(j, s)| (*s as i64) * (*j as i64) * (*j as i64)).sum();
        let ids = t.ids_of(&m).unwrap();
        if omega == 0 {
            assert!(br.is_empty());
        } else {
            assert_eq!(br.len(), 1);
            let c = br.get(&ids).unwrap().to_c64();
            assert_eq!(c, Complex64::new(0.0, omega as f64));
        }
    }
}
