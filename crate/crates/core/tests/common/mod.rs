//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's evaluators, brackets or fields: polynomials
//! are read back from their JSON form and handled with plain vectors.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use nekhoroshev::lattice::{BlockPartition, ModeTable};
use nekhoroshev::normalform::{birkhoff_iterate, BirkhoffConfig, HamiltonianSpec, NormalFormOutput};
use nekhoroshev::polyalg::{random_polynomial, PolynomialJson, RandomPolySpec, SparsePolynomial};
use nekhoroshev::spectrum::FrequencyModel;
use nekhoroshev::stability::{build_ledger, LedgerInputs};
use nekhoroshev::weights::WeightSpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Var = (Vec<i32>, i32);

/// All variables `(j, sigma)` with `|j| <= k` in dimension one.
pub fn vars_1d(k: i32) -> Vec<Var> {
    let mut v = Vec::new();
    for j in -k..=k {
        v.push((vec![j], 1));
        v.push((vec![j], -1));
    }
    v
}

/// A polynomial as a flat list of (variable positions, coefficient).
#[derive(Clone, Debug)]
pub struct OraclePoly {
    pub terms: Vec<(Vec<usize>, Complex64)>,
}

pub struct OracleSystem {
    pub vars: Vec<Var>,
    pub index: BTreeMap<Var, usize>,
}

impl OracleSystem {
    pub fn new(vars: Vec<Var>) -> Self {
        let index = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        OracleSystem { vars, index }
    }

    pub fn poly(&self, json: &PolynomialJson) -> OraclePoly {
        OraclePoly {
            terms: json
                .terms
                .iter()
                .map(|(entries, re, im)| {
                    let pos = entries.iter().map(|(j, s)| self.index[&(j.clone(), *s)]).collect();
                    (pos, Complex64::new(*re, *im))
                })
                .collect(),
        }
    }

    /// `sum_j omega_j u_{(j,+)} u_{(j,-)}`.
    pub fn quadratic(&self, omega: impl Fn(&[i32]) -> f64) -> OraclePoly {
        let mut terms = Vec::new();
        for (i, (j, s)) in self.vars.iter().enumerate() {
            if *s == 1 {
                let k = self.index[&(j.clone(), -1)];
                terms.push((vec![i, k], Complex64::new(omega(j), 0.0)));
            }
        }
        OraclePoly { terms }
    }

    pub fn eval(&self, p: &OraclePoly, u: &[Complex64]) -> Complex64 {
        p.terms
            .iter()
            .map(|(pos, c)| pos.iter().fold(*c, |acc, &i| acc * u[i]))
            .sum()
    }

    /// `X_{(j,s)} = -s i dP/du_{(j,-s)}`, differentiating factor by factor.
    pub fn field(&self, p: &OraclePoly, u: &[Complex64]) -> Vec<Complex64> {
        let grad = self.gradient(p, u);
        let mut out = vec![Complex64::new(0.0, 0.0); self.vars.len()];
        for (i, (j, s)) in self.vars.iter().enumerate() {
            let partner = self.index[&(j.clone(), -s)];
            out[i] = Complex64::new(0.0, -(*s as f64)) * grad[partner];
        }
        out
    }

    /// `dP/du_v` for every variable `v`.
    pub fn gradient(&self, p: &OraclePoly, u: &[Complex64]) -> Vec<Complex64> {
        let mut grad = vec![Complex64::new(0.0, 0.0); self.vars.len()];
        for (pos, c) in &p.terms {
            for skip in 0..pos.len() {
                let mut v = *c;
                for (t, &i) in pos.iter().enumerate() {
                    if t != skip {
                        v *= u[i];
                    }
                }
                grad[pos[skip]] += v;
            }
        }
        grad
    }

    /// `{P,Q}(u) = -i sum sigma dP/du_{(j,sigma)} dQ/du_{(j,-sigma)}`.
    pub fn bracket_at(&self, p: &OraclePoly, q: &OraclePoly, u: &[Complex64]) -> Complex64 {
        let gp = self.gradient(p, u);
        let gq = self.gradient(q, u);
        let mut s = Complex64::new(0.0, 0.0);
        for (i, (j, sg)) in self.vars.iter().enumerate() {
            let k = self.index[&(j.clone(), -sg)];
            s += gp[i] * gq[k] * (*sg as f64);
        }
        s * Complex64::new(0.0, -1.0)
    }

    /// Time-one flow of `X_G` by classical RK4.
    pub fn flow(&self, g: &OraclePoly, u: &[Complex64], steps: usize) -> Vec<Complex64> {
        let h = 1.0 / steps as f64;
        let mut x = u.to_vec();
        let axpy = |x: &[Complex64], k: &[Complex64], a: f64| -> Vec<Complex64> {
            x.iter().zip(k).map(|(xi, ki)| xi + ki * a).collect()
        };
        for _ in 0..steps {
            let k1 = self.field(g, &x);
            let k2 = self.field(g, &axpy(&x, &k1, h / 2.0));
            let k3 = self.field(g, &axpy(&x, &k2, h / 2.0));
            let k4 = self.field(g, &axpy(&x, &k3, h));
            for i in 0..x.len() {
                x[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            }
        }
        x
    }
}

/// Taylor coefficients `c_0..c_{kmax}` of an analytic `f(lambda)` from its
/// values on the circle `|lambda| = rho`.
pub fn taylor_coefficients(f: impl Fn(Complex64) -> Complex64, rho: f64, m: usize, kmax: usize) -> Vec<Complex64> {
    let vals: Vec<Complex64> = (0..m)
        .map(|t| f(Complex64::from_polar(rho, 2.0 * std::f64::consts::PI * t as f64 / m as f64)))
        .collect();
    (0..=kmax)
        .map(|k| {
            let s: Complex64 = vals
                .iter()
                .enumerate()
                .map(|(t, v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * t) as f64 / m as f64))
                .sum();
            s / (m as f64 * rho.powi(k as i32))
        })
        .collect()
}

/// Desk instance: `d = 1`, random potential, `K_max = 4`, `N = 3`, `d = 5`, cubic `P` with `C_P = 1e-3`.
pub fn desk_run(seed: u64) -> (FrequencyModel, SparsePolynomial, NormalFormOutput) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = FrequencyModel::conv_nls_random(1, 4, 2.0, &mut rng);
    let table = Arc::new(ModeTable::new(1, 4, 2.0).unwrap());
    let spec = RandomPolySpec {
        degrees: 3..=3,
        support_radius: 4,
        density: 1.0,
        real: true,
        budget: 1_000_000,
    };
    let p = random_polynomial(&table, &spec, 1e-3, &mut rng).unwrap();
    let w = WeightSpec::gevrey(0.5, 2.0).unwrap().with_s0(&table).unwrap();
    let ledger = build_ledger(LedgerInputs::from_model(&model, &w, 1.0, 1e-3)).unwrap();
    let cfg = BirkhoffConfig {
        n_cut: 3,
        d: 5,
        r: 1e-3,
        partition: BlockPartition::default(),
        weight: w,
        override_gate: true,
        check_floor: true,
        budget: 1_000_000,
    };
    let h = HamiltonianSpec {
        model: model.clone(),
        perturbation: p.clone(),
    };
    let out = birkhoff_iterate(&h, &cfg, &ledger).unwrap();
    (model, p, out)
}

/// Largest Taylor coefficient of degree <= 5 of `H o T - (H0 + Z + R_>)` over
/// sampled states; `low_only` restricts the states to modes `|j| <= N`.
pub fn desk_residual(model: &FrequencyModel, p: &SparsePolynomial, out: &NormalFormOutput, low_only: bool, seed: u64) -> f64 {
    let sys = OracleSystem::new(vars_1d(4));
    let h0 = sys.quadratic(|j| model.omega(j));
    let pp = sys.poly(&p.to_json());
    let z = sys.poly(&out.z().to_json());
    let rh = sys.poly(&out.r_high.to_json());
    let gens: Vec<_> = out.generators.iter().map(|g| sys.poly(&g.to_json())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut u: Vec<Complex64> = sys
            .vars
            .iter()
            .map(|(j, _)| {
                if low_only && j[0].abs() > 3 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                }
            })
            .collect();
        let nrm = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= nrm);
        let f = |lam: Complex64| {
            let x: Vec<Complex64> = u.iter().map(|v| v * lam).collect();
            let mut y = x.clone();
            for g in gens.iter().rev() {
                y = sys.flow(g, &y, 24);
            }
            let lhs = sys.eval(&h0, &y) + sys.eval(&pp, &y);
            lhs - sys.eval(&h0, &x) - sys.eval(&z, &x) - sys.eval(&rh, &x)
        };
        let c = taylor_coefficients(f, 0.25, 16, 5);
        for ck in c {
            worst = worst.max(ck.norm());
        }
    }
    worst
}


/// Lower branch of `x e^x = y` on `y in (-1/e, 0)` by plain bisection.
pub fn lambert_oracle(y: f64) -> f64 {
    let g = |x: f64| x * x.exp() - y;
    let mut lo = -2.0;
    while g(lo) <= 0.0 {
        lo *= 2.0;
    }
    let mut hi = -1.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ln N` solving `d^p ln(dN) = N^theta / d`, by bisection in `ln N`.
pub fn gevrey_balance_oracle(theta: f64, p: u32, d: usize) -> f64 {
    let df = d as f64;
    let h = |l: f64| (theta * l).exp() / df - df.powi(p as i32) * (df.ln() + l);
    let (mut lo, mut hi) = (0.0, 1.0);
    while h(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Determinant by permutation expansion.
pub fn leibniz_det(a: &[Vec<f64>]) -> f64 {
    fn rec(a: &[Vec<f64>], row: usize, used: &mut Vec<bool>, sign: f64, acc: f64, out: &mut f64) {
        let n = a.len();
        if row == n {
            *out += sign * acc;
            return;
        }
        for col in 0..n {
            if used[col] {
                continue;
            }
            // sign flips with the number of unused columns to the left
            let inv = (0..col).filter(|&c| !used[c]).count();
            let s = if inv % 2 == 0 { sign } else { -sign };
            used[col] = true;
            rec(a, row + 1, used, s, acc * a[row][col], out);
            used[col] = false;
        }
    }
    let mut out = 0.0;
    rec(a, 0, &mut vec![false; a.len()], 1.0, 1.0, &mut out);
    out
}

/// `d^l/dm^l (x + m)^eta` at `m`.
pub fn power_derivative(x: f64, m: f64, eta: f64, l: usize) -> f64 {
    let falling: f64 = (0..l).map(|n| eta - n as f64).product();
    falling * (x + m).powf(eta - l as f64)
}

/// Reorders oracle amplitudes into the variable order of `table`.
pub fn to_table_order(sys: &OracleSystem, table: &ModeTable, u: &[Complex64]) -> Vec<Complex64> {
    (0..table.len() as u32)
        .map(|id| u[sys.index[&(table.j(id).to_vec(), table.sign(id))]])
        .collect()
}

/// Test state with entries uniform in the unit square.
pub fn random_state(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Exact random polynomial of the given degrees with small rational parts.
pub fn exact_poly(
    table: &Arc<ModeTable>,
    degrees: std::ops::RangeInclusive<usize>,
    density: f64,
    real: bool,
    rng: &mut ChaCha8Rng,
) -> SparsePolynomial<nekhoroshev::polyalg::GaussianRational> {
    use nekhoroshev::polyalg::{random_polynomial_with, GaussianRational};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    let spec = RandomPolySpec {
        degrees,
        support_radius: table.k_max(),
        density,
        real,
        budget: 1_000_000,
    };
    random_polynomial_with(table, &spec, rng, |rng| {
        let re = BigRational::new(BigInt::from(rng.gen_range(-20i64..=20)), BigInt::from(rng.gen_range(1i64..=9)));
        let im = BigRational::new(BigInt::from(rng.gen_range(-20i64..=20)), BigInt::from(rng.gen_range(1i64..=9)));
        GaussianRational::new(re, im)
    })
    .unwrap()
}
