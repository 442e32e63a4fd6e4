//! Galerkin-truncated split-step integration of the Schrödinger-type and beam
//! equations in Fourier variables, with weighted-norm instrumentation.
//!
//! The state is complexified: `u_{(j,+)}` and `u_{(j,-)}` evolve as independent
//! amplitudes, so reality of the data is an observable rather than a built-in.
//! The linear flow is applied exactly. The nonlinear substep is the implicit
//! midpoint rule for Schrödinger models and an exact kick for the beam.

mod grid;

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::ModeTable;
use crate::spectrum::{FrequencyModel, ModelKind};
use crate::stability::{predict_time, ConstantsLedger, PredictOptions};
use crate::weights::{sample_sphere_seeded, WeightSpec, WeightedState};

use grid::{smooth_size, Grid};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn default_stride() -> usize {
    1
}

fn default_n_split() -> u32 {
    4
}

fn default_max_phase() -> f64 {
    1e4
}

fn default_bracket() -> f64 {
    2.0
}

/// Simulation parameters.
///
/// `nonlinearity` holds `c_1, c_2, ...`. For Schrödinger models the equation is
/// `i psi_t = L psi + p(|psi|^2) psi` with `p(z) = sum_k c_k z^k`; for the beam
/// it is `psi_tt + (Delta_g^2 + m) psi + f(psi) = 0` with `f(x) = sum_k c_k x^{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: FrequencyModel,
    pub nonlinearity: Vec<f64>,
    /// Mode cutoff `|j| <= k`.
    pub k: u32,
    pub dt: f64,
    pub t_end: f64,
    pub weight: WeightSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    /// Cut `N` of the low/high split norms.
    #[serde(default = "default_n_split")]
    pub n_split: u32,
    #[serde(default)]
    pub escape_threshold: Option<f64>,
    /// Largest admitted `|dt| max omega_j`.
    #[serde(default = "default_max_phase")]
    pub max_phase: f64,
    #[serde(default = "default_bracket")]
    pub bracket_c: f64,
}

impl SimConfig {
    /// Cubic defocusing Schrödinger equation with Gevrey weight `theta = 1/2`, `s = 1`.
    pub fn cubic_nls(dim: usize, k: u32, dt: f64, t_end: f64) -> Self {
        SimConfig {
            model: FrequencyModel::conv_nls_free(dim),
            nonlinearity: vec![1.0],
            k,
            dt,
            t_end,
            weight: WeightSpec::gevrey(0.5, 1.0).expect("valid weight"),
            seed: 0,
            record_stride: 1,
            n_split: default_n_split(),
            escape_threshold: None,
            max_phase: default_max_phase(),
            bracket_c: default_bracket(),
        }
    }
}

/// Recorded observables of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norms_s: Vec<f64>,
    pub norms_l2: Vec<f64>,
    pub energy: Vec<f64>,
    pub norms_low: Vec<f64>,
    pub norms_high: Vec<f64>,
    pub mass: Vec<f64>,
    pub momentum: Vec<Vec<f64>>,
    pub reality: Vec<f64>,
    pub escape_time: Option<f64>,
    pub threshold: Option<f64>,
    pub steps: usize,
    /// Largest `||u(t)||_s` over every step, recorded or not.
    pub sup_norm_s: f64,
    pub final_state: WeightedState,
}

/// One CSV line of a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub norm_s: f64,
    pub norm_l2: f64,
    pub energy: f64,
    pub norm_low: f64,
    pub norm_high: f64,
}

/// Conservation summary of a run, relative to the first record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drifts {
    pub mass: f64,
    pub energy: f64,
    pub momentum: f64,
    pub reality: f64,
}

impl Trajectory {
    pub fn rows(&self) -> Vec<TrajectoryRow> {
        (0..self.times.len())
            .map(|i| TrajectoryRow {
                t: self.times[i],
                norm_s: self.norms_s[i],
                norm_l2: self.norms_l2[i],
                energy: self.energy[i],
                norm_low: self.norms_low[i],
                norm_high: self.norms_high[i],
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in self.rows() {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn drifts(&self) -> Drifts {
        let rel = |v: &[f64]| {
            let v0 = v[0];
            let scale = if v0 == 0.0 { 1.0 } else { v0.abs() };
            v.iter().map(|x| (x - v0).abs() / scale).fold(0.0, f64::max)
        };
        let p0 = &self.momentum[0];
        let mass0 = if self.mass[0] == 0.0 { 1.0 } else { self.mass[0] };
        let momentum = self
            .momentum
            .iter()
            .map(|p| p.iter().zip(p0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / mass0)
            .fold(0.0, f64::max);
        Drifts {
            mass: rel(&self.mass),
            energy: rel(&self.energy),
            momentum,
            reality: self.reality.iter().cloned().fold(0.0, f64::max),
        }
    }
}

/// Split-step integrator bound to one configuration.
pub struct Simulator {
    cfg: SimConfig,
    table: Arc<ModeTable>,
    omega: Vec<f64>,
    grid: Grid,
    /// Grid slot of `j` for `(j,+)` and of `-j` for `(j,-)`.
    slot: Vec<usize>,
    beam: Option<BeamData>,
}

struct BeamData {
    /// `1 / (sqrt(2) omega_j^{1/2})` per variable.
    scale: Vec<f64>,
    /// Id of `(-j, -sigma)`.
    partner: Vec<u32>,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        let dim = cfg.model.dim();
        if dim > 2 {
            return Err(Error::Domain(format!("simulator supports dimension <= 2, got {dim}")));
        }
        if !(cfg.dt.is_finite() && cfg.dt != 0.0) || !(cfg.t_end >= 0.0) || cfg.record_stride == 0 {
            return Err(Error::Domain("need dt != 0, t_end >= 0, record_stride >= 1".into()));
        }
        if cfg.nonlinearity.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("nonlinearity coefficients must be finite".into()));
        }
        let table = Arc::new(ModeTable::new(dim, cfg.k, cfg.bracket_c)?);
        let omega: Vec<f64> = (0..table.len() as u32).map(|id| cfg.model.omega(table.j(id))).collect();
        let max_w = omega.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        if cfg.dt.abs() * max_w > cfg.max_phase {
            return Err(Error::Precondition(format!(
                "dt * max omega = {:.3e} exceeds max_phase {:.3e}",
                cfg.dt.abs() * max_w,
                cfg.max_phase
            )));
        }
        let is_beam = matches!(cfg.model.kind(), ModelKind::Beam { .. });
        let order = cfg.nonlinearity.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1);
        let degree = if is_beam { order + 1 } else { 2 * order + 1 };
        let m = smooth_size((degree + 1) * cfg.k as usize + 1);
        let grid = Grid::new(dim, m);
        let slot = (0..table.len() as u32)
            .map(|id| {
                let j = table.j(id);
                if table.sign(id) == 1 {
                    grid.index(j)
                } else {
                    grid.index(&j.iter().map(|x| -x).collect::<Vec<_>>())
                }
            })
            .collect();
        let beam = if is_beam {
            if omega.iter().any(|w| !(*w > 0.0)) {
                return Err(Error::Domain("beam frequencies must be positive".into()));
            }
            let partner = (0..table.len() as u32)
                .map(|id| {
                    let mj: Vec<i32> = table.j(id).iter().map(|x| -x).collect();
                    let m = crate::lattice::ModeIndex::new(&mj, table.mode(id).sigma.flip());
                    table.id_of(&m).expect("table is symmetric")
                })
                .collect();
            let scale = omega.iter().map(|w| 1.0 / (2.0f64.sqrt() * w.sqrt())).collect();
            Some(BeamData { scale, partner })
        } else {
            None
        };
        Ok(Simulator {
            cfg,
            table,
            omega,
            grid,
            slot,
            beam,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn table(&self) -> &Arc<ModeTable> {
        &self.table
    }

    /// Points per axis of the collocation grid.
    pub fn grid_size(&self) -> usize {
        self.grid.m
    }

    /// Random initial data with `||u||_s = eps` on all modes.
    pub fn initial_state(&self, eps: f64, real: bool, seed: u64) -> Result<WeightedState> {
        let support: Vec<u32> = (0..self.table.len() as u32).collect();
        sample_sphere_seeded(&self.table, &self.cfg.weight, eps, &support, real, seed)
    }

    /// Exact flow of the diagonal linear field for time `t`.
    pub fn linear_flow(&self, u: &mut [Complex64], t: f64) {
        for (id, a) in u.iter_mut().enumerate() {
            let s = self.table.sign(id as u32) as f64;
            *a *= Complex64::from_polar(1.0, -s * self.omega[id] * t);
        }
    }

    fn p_of(&self, z: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for c in self.cfg.nonlinearity.iter().rev() {
            acc = (acc + c) * z;
        }
        acc
    }

    /// Primitive of `p` (Schrödinger) or of `f` (beam), vanishing at zero.
    fn primitive(&self, z: Complex64) -> Complex64 {
        let extra = if self.beam.is_some() { 1 } else { 0 };
        let mut acc = ZERO;
        let mut zp = z.powu(1 + extra as u32);
        for (k, c) in self.cfg.nonlinearity.iter().enumerate() {
            zp *= z;
            acc += zp * (c / (k + 1 + extra + 1) as f64);
        }
        acc
    }

    /// Grid values of `psi` and `psi^-` (Schrödinger) or of the displacement (beam).
    fn grid_fields(&self, u: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.grid.len();
        let mut a = vec![ZERO; n];
        let mut b = vec![ZERO; n];
        match &self.beam {
            None => {
                for (id, v) in u.iter().enumerate() {
                    if self.table.sign(id as u32) == 1 {
                        a[self.slot[id]] = *v;
                    } else {
                        b[self.slot[id]] = *v;
                    }
                }
                self.grid.to_grid(&mut a);
                self.grid.to_grid(&mut b);
            }
            Some(bd) => {
                for (id, v) in u.iter().enumerate() {
                    if self.table.sign(id as u32) == 1 {
                        a[self.slot[id]] = (v + u[bd.partner[id] as usize]) * bd.scale[id];
                    }
                }
                self.grid.to_grid(&mut a);
            }
        }
        (a, b)
    }

    /// Nonlinear part of the vector field.
    pub fn nonlinear_field(&self, u: &[Complex64]) -> Vec<Complex64> {
        let (mut a, mut b) = self.grid_fields(u);
        let mut out = vec![ZERO; u.len()];
        match &self.beam {
            None => {
                for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                    let pz = self.p_of(*x * *y);
                    *x *= pz;
                    *y *= pz;
                }
                self.grid.to_coeffs(&mut a);
                self.grid.to_coeffs(&mut b);
                for (id, o) in out.iter_mut().enumerate() {
                    *o = if self.table.sign(id as u32) == 1 {
                        Complex64::new(0.0, -1.0) * a[self.slot[id]]
                    } else {
                        Complex64::new(0.0, 1.0) * b[self.slot[id]]
                    };
                }
            }
            Some(bd) => {
                for x in a.iter_mut() {
                    *x = self.p_of(*x) * *x;
                }
                self.grid.to_coeffs(&mut a);
                // slot of (j,-) holds -j, where f_{-j} sits
                for (id, o) in out.iter_mut().enumerate() {
                    let s = self.table.sign(id as u32) as f64;
                    *o = Complex64::new(0.0, -s) * a[self.slot[id]] * bd.scale[id];
                }
            }
        }
        out
    }

    /// Nonlinear substep of length `dt`.
    pub fn nonlinear_flow(&self, u: &[Complex64], dt: f64) -> Result<Vec<Complex64>> {
        if self.beam.is_some() {
            // the field does not move the displacement, so the kick is exact
            let f = self.nonlinear_field(u);
            return Ok(u.iter().zip(&f).map(|(a, b)| a + b * dt).collect());
        }
        let scale = u.iter().fold(0.0f64, |m, a| m.max(a.norm()));
        if scale == 0.0 || self.cfg.nonlinearity.iter().all(|c| *c == 0.0) {
            return Ok(u.to_vec());
        }
        let f0 = self.nonlinear_field(u);
        let mut next: Vec<Complex64> = u.iter().zip(&f0).map(|(a, b)| a + b * dt).collect();
        let mut last = f64::INFINITY;
        for _ in 0..100 {
            let mid: Vec<Complex64> = u.iter().zip(&next).map(|(a, b)| (a + b) * 0.5).collect();
            let f = self.nonlinear_field(&mid);
            let cand: Vec<Complex64> = u.iter().zip(&f).map(|(a, b)| a + b * dt).collect();
            let diff = cand.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            next = cand;
            if diff <= 2.0 * f64::EPSILON * scale || (diff >= last && diff <= 1e3 * f64::EPSILON * scale) {
                return Ok(next);
            }
            last = diff;
        }
        Err(Error::Numerical(format!(
            "implicit midpoint did not converge (last update {last:.3e}); reduce dt or amplitude"
        )))
    }

    /// One Strang step; `dt` may be negative.
    pub fn step(&self, state: &WeightedState, dt: f64) -> Result<WeightedState> {
        let mut u = state.amps.clone();
        self.linear_flow(&mut u, 0.5 * dt);
        let mut u = self.nonlinear_flow(&u, dt)?;
        self.linear_flow(&mut u, 0.5 * dt);
        if u.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Numerical("non-finite amplitude after step".into()));
        }
        Ok(WeightedState {
            table: state.table.clone(),
            amps: u,
        })
    }

    /// `sum_j omega_j u_{(j,+)} u_{(j,-)} + avg P`.
    pub fn energy(&self, state: &WeightedState) -> f64 {
        let u = &state.amps;
        let mut quad = ZERO;
        for (id, v) in u.iter().enumerate() {
            if self.table.sign(id as u32) == 1 {
                quad += self.omega[id] * v * u[self.table.conj(id as u32) as usize];
            }
        }
        let (a, b) = self.grid_fields(u);
        let n = a.len() as f64;
        let nonlin: Complex64 = match &self.beam {
            None => a.iter().zip(&b).map(|(x, y)| self.primitive(x * y)).sum::<Complex64>() / n,
            Some(_) => a.iter().map(|x| self.primitive(*x)).sum::<Complex64>() / n,
        };
        (quad + nonlin).re
    }

    /// `sum_j u_{(j,+)} u_{(j,-)}`.
    pub fn mass(&self, state: &WeightedState) -> f64 {
        let u = &state.amps;
        (0..u.len() as u32)
            .filter(|&id| self.table.sign(id) == 1)
            .map(|id| (u[id as usize] * u[self.table.conj(id) as usize]).re)
            .sum()
    }

    /// `sum_j j u_{(j,+)} u_{(j,-)}`.
    pub fn momentum(&self, state: &WeightedState) -> Vec<f64> {
        let u = &state.amps;
        let mut p = vec![0.0; self.table.dim()];
        for id in 0..u.len() as u32 {
            if self.table.sign(id) == 1 {
                let a = (u[id as usize] * u[self.table.conj(id) as usize]).re;
                for (pi, ji) in p.iter_mut().zip(self.table.j(id)) {
                    *pi += *ji as f64 * a;
                }
            }
        }
        p
    }

    /// `|dt| sum_k |c_k| (2k+1) ||psi||_inf^{2k}`, the contraction factor of the
    /// implicit midpoint iteration (zero for the beam).
    pub fn contraction_estimate(&self, state: &WeightedState) -> f64 {
        if self.beam.is_some() {
            return 0.0;
        }
        let sup = state.amps.iter().map(|a| a.norm()).sum::<f64>() / 2.0;
        self.cfg.dt.abs()
            * self
                .cfg
                .nonlinearity
                .iter()
                .enumerate()
                .map(|(i, c)| c.abs() * (2 * i + 3) as f64 * sup.powi(2 * (i as i32 + 1)))
                .sum::<f64>()
    }

    pub fn run(&self, initial: &WeightedState) -> Result<Trajectory> {
        if *initial.table != *self.table {
            return Err(Error::Domain("initial state lives on a different table".into()));
        }
        if !(self.cfg.dt > 0.0) {
            return Err(Error::Domain("run needs dt > 0".into()));
        }
        let q = self.contraction_estimate(initial);
        if q > 0.5 {
            return Err(Error::Precondition(format!(
                "nonlinear step contraction estimate {q:.3e} > 1/2; reduce dt or amplitude"
            )));
        }
        let w = &self.cfg.weight;
        let n_steps = (self.cfg.t_end / self.cfg.dt - 1e-9).ceil().max(0.0) as usize;
        let mut traj = Trajectory {
            times: Vec::new(),
            norms_s: Vec::new(),
            norms_l2: Vec::new(),
            energy: Vec::new(),
            norms_low: Vec::new(),
            norms_high: Vec::new(),
            mass: Vec::new(),
            momentum: Vec::new(),
            reality: Vec::new(),
            escape_time: None,
            threshold: self.cfg.escape_threshold,
            steps: 0,
            sup_norm_s: initial.norm_s(w, w.s),
            final_state: initial.clone(),
        };
        let record = |traj: &mut Trajectory, t: f64, u: &WeightedState| {
            traj.times.push(t);
            traj.norms_s.push(u.norm_s(w, w.s));
            traj.norms_l2.push(u.norm_l2());
            traj.energy.push(self.energy(u));
            traj.norms_low.push(u.low_part(self.cfg.n_split).norm_s(w, w.s));
            traj.norms_high.push(u.high_part(self.cfg.n_split).norm_s(w, w.s));
            traj.mass.push(self.mass(u));
            traj.momentum.push(self.momentum(u));
            traj.reality.push(u.reality_defect());
        };
        record(&mut traj, 0.0, initial);
        let mut u = initial.clone();
        for i in 1..=n_steps {
            u = self.step(&u, self.cfg.dt)?;
            let t = i as f64 * self.cfg.dt;
            let ns = u.norm_s(w, w.s);
            traj.sup_norm_s = traj.sup_norm_s.max(ns);
            traj.steps = i;
            let escaped = self.cfg.escape_threshold.is_some_and(|th| ns > th);
            if escaped || i % self.cfg.record_stride == 0 || i == n_steps {
                record(&mut traj, t, &u);
            }
            if escaped {
                traj.escape_time = Some(t);
                break;
            }
        }
        traj.final_state = u;
        Ok(traj)
    }
}

/// Options of [`escape_experiment`].
#[derive(Clone, Debug)]
pub struct EscapeOptions {
    /// Escape when `||u||_s > factor * eps`.
    pub threshold_factor: f64,
    pub real: bool,
    /// Ledger and exponent `p` used to attach the predicted time.
    pub prediction: Option<(ConstantsLedger, u32)>,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        EscapeOptions {
            threshold_factor: 2.0,
            real: true,
            prediction: None,
        }
    }
}

/// One row of an escape table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeRow {
    pub eps: f64,
    pub threshold: f64,
    pub escape_time: Option<f64>,
    pub horizon: f64,
    pub sup_norm_ratio: f64,
    pub predicted_ln_t: Option<f64>,
    pub seed: u64,
}

/// Runs one trajectory per amplitude, from real random data on `||u||_s = eps`,
/// until `||u||_s` exceeds `factor * eps` or the horizon is reached.
pub fn escape_experiment(cfg: &SimConfig, eps_grid: &[f64], opts: &EscapeOptions) -> Result<Vec<EscapeRow>> {
    Simulator::new(cfg.clone())?;
    eps_grid
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            if !(eps >= 0.0) {
                return Err(Error::Domain(format!("amplitude must be nonnegative, got {eps}")));
            }
            let seed = cfg.seed.wrapping_add(i as u64);
            let threshold = opts.threshold_factor * eps;
            let mut c = cfg.clone();
            c.escape_threshold = Some(threshold);
            c.record_stride = usize::MAX;
            let run_sim = Simulator::new(c)?;
            let u0 = run_sim.initial_state(eps, opts.real, seed)?;
            let traj = run_sim.run(&u0)?;
            let predicted_ln_t = match (&opts.prediction, eps > 0.0) {
                (Some((ledger, p)), true) => predict_time(&cfg.weight, *p, eps, ledger, &PredictOptions::default())
                    .ok()
                    .map(|pr| pr.ln_t),
                _ => None,
            };
            Ok(EscapeRow {
                eps,
                threshold,
                escape_time: traj.escape_time,
                horizon: cfg.t_end,
                sup_norm_ratio: if eps > 0.0 { traj.sup_norm_s / eps } else { 0.0 },
                predicted_ln_t,
                seed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(k: u32, nl: Vec<f64>) -> Simulator {
        let mut c = SimConfig::cubic_nls(1, k, 0.01, 1.0);
        c.nonlinearity = nl;
        Simulator::new(c).unwrap()
    }

    #[test]
    fn linear_step_keeps_moduli() {
        let sim = small(8, vec![]);
        let u0 = sim.initial_state(0.1, false, 3).unwrap();
        let u1 = sim.step(&u0, 0.01).unwrap();
        for (a, b) in u0.amps.iter().zip(&u1.amps) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_is_alias_free() {
        assert!(small(32, vec![1.0]).grid_size() >= 129);
        assert!(small(8, vec![0.0, 1.0]).grid_size() >= 6 * 8 + 1);
    }

    #[test]
    fn field_matches_direct_convolution() {
        let sim = small(3, vec![1.0]);
        let u = sim.initial_state(0.5, false, 5).unwrap();
        let f = sim.nonlinear_field(&u.amps);
        let t = sim.table();
        // i du_{(j,+)}/dt = sum_{a - b + c = j} u_a^+ u_b^- u_c^+
        for id in 0..t.len() as u32 {
            if t.sign(id) != 1 {
                continue;
            }
            let j = t.j(id)[0];
            let mut acc = ZERO;
            for a in -3..=3i32 {
                for b in -3..=3i32 {
                    let c = j - a + b;
                    if c.abs() <= 3 {
                        let pa = t.id_of(&crate::lattice::ModeIndex::plus(&[a])).unwrap();
                        let mb = t.id_of(&crate::lattice::ModeIndex::minus(&[b])).unwrap();
                        let pc = t.id_of(&crate::lattice::ModeIndex::plus(&[c])).unwrap();
                        acc += u.amps[pa as usize] * u.amps[mb as usize] * u.amps[pc as usize];
                    }
                }
            }
            assert!((f[id as usize] - Complex64::new(0.0, -1.0) * acc).norm() < 1e-13);
        }
    }
}
