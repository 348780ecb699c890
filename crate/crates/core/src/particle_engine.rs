//! The mean-field N-particle model, empirical occupation measures and
//! Monte Carlo estimators.
//!
//! Randomness comes from ChaCha8 used as a counter-based generator: the
//! stream id is the run id and particle i at time t reads the 64-bit word
//! at position t*N + i, so every draw is addressed by (run, time, particle).

use std::io::Write;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::exact_num::{falling_factorial, rational_to_f64, Rational};
use crate::fk_model::{FiniteFKModel, ProductMeasure, ProductSpace, TensorFunction};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParticleTrajectory {
    pub n_particles: usize,
    pub seed: u64,
    pub run: u64,
    /// states[k][i] in 0..|E_k|
    pub states: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasures {
    pub eta_n: Vec<Vec<f64>>,
    /// gamma^N_k(1) = prod_{p<k} eta^N_p(G_p)
    pub gamma_normalizers: Vec<f64>,
}

fn rng_for(seed: u64, run: u64, time: usize, n_particles: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    // one u64 draw consumes two 32-bit words
    rng.set_word_pos(2 * (time as u128) * (n_particles as u128));
    rng
}

fn counts(states: &[usize], size: usize) -> Vec<usize> {
    let mut c = vec![0; size];
    for &s in states {
        c[s] += 1;
    }
    c
}

/// Cumulative distribution of Phi_k(m(x)), exact weights rounded once.
fn selection_mutation_cdf(model: &FiniteFKModel, k: usize, prev_counts: &[usize]) -> Vec<f64> {
    let g = model.potential(k - 1);
    let m = model.kernel(k);
    let mut w = vec![Rational::zero(); model.size(k)];
    for (x, &c) in prev_counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let gx = &g[x] * Rational::from_integer(BigInt::from(c));
        for (y, mxy) in m[x].iter().enumerate() {
            w[y] += &gx * mxy;
        }
    }
    cdf(&w)
}

fn cdf(w: &[Rational]) -> Vec<f64> {
    let total: Rational = w.iter().sum();
    let mut acc = Rational::zero();
    let mut out: Vec<f64> = w
        .iter()
        .map(|x| {
            acc += x;
            rational_to_f64(&(&acc / &total))
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

/// One run of the particle model, fully determined by (model, N, horizon, seed, run).
pub fn simulate_run(model: &FiniteFKModel, n_particles: usize, horizon: usize, seed: u64, run: u64) -> Result<ParticleTrajectory> {
    if n_particles == 0 {
        return domain("the particle model needs N >= 1");
    }
    if horizon > model.horizon() {
        return domain(format!("horizon {horizon} beyond model horizon {}", model.horizon()));
    }
    let mut states = Vec::with_capacity(horizon + 1);
    let c0 = cdf(model.eta0());
    let mut rng = rng_for(seed, run, 0, n_particles);
    states.push((0..n_particles).map(|_| draw(&c0, rng.gen::<f64>())).collect::<Vec<_>>());
    for k in 1..=horizon {
        let prev = counts(&states[k - 1], model.size(k - 1));
        let c = selection_mutation_cdf(model, k, &prev);
        let mut rng = rng_for(seed, run, k, n_particles);
        states.push((0..n_particles).map(|_| draw(&c, rng.gen::<f64>())).collect());
    }
    Ok(ParticleTrajectory { n_particles, seed, run, states })
}

pub fn simulate(model: &FiniteFKModel, n_particles: usize, horizon: usize, seed: u64) -> Result<ParticleTrajectory> {
    simulate_run(model, n_particles, horizon, seed, 0)
}

impl ParticleTrajectory {
    pub fn counts(&self, k: usize, size: usize) -> Vec<usize> {
        counts(&self.states[k], size)
    }

    pub fn empirical(&self, model: &FiniteFKModel) -> EmpiricalMeasures {
        let nf = self.n_particles as f64;
        let eta_n: Vec<Vec<f64>> = self
            .states
            .iter()
            .enumerate()
            .map(|(k, s)| counts(s, model.size(k)).into_iter().map(|c| c as f64 / nf).collect())
            .collect();
        let mut gamma_normalizers = vec![1.0];
        for k in 1..eta_n.len() {
            let z = dot_f(&eta_n[k - 1], &to_f64(model.potential(k - 1)));
            gamma_normalizers.push(gamma_normalizers[k - 1] * z);
        }
        EmpiricalMeasures { eta_n, gamma_normalizers }
    }
}

pub fn to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(rational_to_f64).collect()
}

fn dot_f(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OccupationMode {
    /// all maps [q] -> [N]
    Tensor,
    /// injections only
    Injective,
}

/// Exact q-fold occupation measure of the point configuration x over a space of `size` states.
pub fn occupation_tensor(x: &[usize], size: usize, q: usize, mode: OccupationMode) -> Result<ProductMeasure> {
    let n = x.len();
    if mode == OccupationMode::Injective && q > n {
        return domain(format!("q={q} exceeds N={n} for the injective occupation measure"));
    }
    if x.iter().any(|&s| s >= size) {
        return domain("state index outside the state space");
    }
    let c = counts(x, size);
    let space = ProductSpace::power(0, size, q);
    let denom = match mode {
        OccupationMode::Tensor => num_traits::pow(BigInt::from(n), q),
        OccupationMode::Injective => falling_factorial(n as u64, q as u64),
    };
    let atoms = space
        .points()?
        .map(|y| {
            let num: BigInt = match mode {
                OccupationMode::Tensor => y.iter().map(|&e| BigInt::from(c[e])).product(),
                OccupationMode::Injective => {
                    let m = counts(&y, size);
                    m.iter().zip(&c).map(|(&me, &ce)| falling_factorial(ce as u64, me as u64)).product()
                }
            };
            Rational::new(num, denom.clone())
        })
        .collect();
    Ok(ProductMeasure { space, atoms })
}

/// Kernels for U-statistics.
#[derive(Clone, Debug)]
pub enum UKernel {
    /// (f_1 (x) ... (x) f_q)_sym, evaluated through power sums
    SymProduct(Vec<Vec<f64>>),
    /// any symmetric tensor function, by occupancy enumeration
    Dense(TensorFunction),
}

/// Set partitions of [q] as block lists (restricted growth strings).
pub fn set_partitions(q: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, q: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == q {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, q, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, q, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(0, q, &mut Vec::new(), &mut out);
    out
}

/// (eta^N_n)^{(.)q}(F) on one trajectory.
pub fn u_statistic(traj: &ParticleTrajectory, n: usize, q: usize, kernel: &UKernel) -> Result<f64> {
    let big_n = traj.n_particles;
    if q > big_n {
        return domain(format!("q={q} exceeds N={big_n}"));
    }
    let x = &traj.states[n];
    let norm = rational_to_f64(&Rational::from_integer(falling_factorial(big_n as u64, q as u64)));
    match kernel {
        UKernel::SymProduct(fs) => {
            if fs.len() != q {
                return domain("need exactly q factor functions");
            }
            // inclusion-exclusion over set partitions turns power sums into injective sums
            let mut total = 0.0;
            for part in set_partitions(q) {
                let mut term = 1.0;
                for b in &part {
                    let sign = if b.len() % 2 == 1 { 1.0 } else { -1.0 };
                    let mobius = sign * (1..b.len()).product::<usize>() as f64;
                    let s: f64 = x.iter().map(|&xi| b.iter().map(|&i| fs[i][xi]).product::<f64>()).sum();
                    term *= mobius * s;
                }
                total += term;
            }
            Ok(total / norm)
        }
        UKernel::Dense(f) => {
            if f.space.ncoords() != q || !f.is_block_symmetric() {
                return domain("dense kernel must be a symmetric function of q coordinates");
            }
            let size = f.space.dims()[0];
            let c = counts(x, size);
            let mut total = 0.0;
            for (y, v) in f.space.points()?.zip(&f.values) {
                let m = counts(&y, size);
                let w: f64 = m.iter().zip(&c).map(|(&me, &ce)| (0..me).map(|j| (ce as f64) - j as f64).product::<f64>()).product();
                total += w * rational_to_f64(v);
            }
            Ok(total / norm)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub values: Vec<f64>,
}

impl Estimate {
    pub fn from_values(values: Vec<f64>) -> Self {
        let r = values.len() as f64;
        let mean = values.iter().sum::<f64>() / r;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0)
        } else {
            0.0
        };
        Estimate { mean, stderr: (var / r).sqrt(), values }
    }

    /// (mean - reference) / stderr; 0 when both the gap and the error vanish.
    pub fn z_score(&self, reference: f64) -> f64 {
        let gap = self.mean - reference;
        if self.stderr == 0.0 {
            if gap.abs() < 1e-12 { 0.0 } else { f64::INFINITY }
        } else {
            gap / self.stderr
        }
    }
}

/// Per-run statistic over `runs` independent runs, in run order.
pub fn run_many<F>(model: &FiniteFKModel, n_particles: usize, horizon: usize, runs: usize, seed: u64, stat: F) -> Result<Estimate>
where
    F: Fn(&ParticleTrajectory) -> Result<f64> + Sync,
{
    let values = (0..runs as u64)
        .into_par_iter()
        .map(|r| stat(&simulate_run(model, n_particles, horizon, seed, r)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_values(values))
}

/// gamma^N_n(f) averaged over runs.
pub fn estimate_gamma(model: &FiniteFKModel, n_particles: usize, n: usize, f: &[Rational], runs: usize, seed: u64) -> Result<Estimate> {
    let ff = to_f64(f);
    run_many(model, n_particles, n, runs, seed, |t| {
        let e = t.empirical(model);
        Ok(e.gamma_normalizers[n] * dot_f(&e.eta_n[n], &ff))
    })
}

fn require_homogeneous(model: &FiniteFKModel) -> Result<()> {
    if !model.is_homogeneous() {
        return domain("estimator needs a time-homogeneous model");
    }
    Ok(())
}

/// -(1/n) sum_{p<=n} log eta^N_p(G), averaged over runs.
pub fn estimate_lambda(model: &FiniteFKModel, n_particles: usize, n: usize, runs: usize, seed: u64) -> Result<Estimate> {
    require_homogeneous(model)?;
    if n == 0 {
        return domain("lambda estimator needs n >= 1");
    }
    let g = to_f64(model.potential(0));
    run_many(model, n_particles, n, runs, seed, |t| {
        let e = t.empirical(model);
        Ok(-(0..=n).map(|p| dot_f(&e.eta_n[p], &g).ln()).sum::<f64>() / n as f64)
    })
}

/// Mean of eta^N_p(G f) / eta^N_p(G) over the n+1 times p <= n, averaged over runs.
pub fn estimate_ground_state(model: &FiniteFKModel, n_particles: usize, n: usize, runs: usize, seed: u64, f: &[Rational]) -> Result<Estimate> {
    require_homogeneous(model)?;
    if n == 0 {
        return domain("ground state estimator needs n >= 1");
    }
    let g = to_f64(model.potential(0));
    let gf: Vec<f64> = g.iter().zip(to_f64(f)).map(|(a, b)| a * b).collect();
    run_many(model, n_particles, n, runs, seed, |t| {
        let e = t.empirical(model);
        Ok((0..=n).map(|p| dot_f(&e.eta_n[p], &gf) / dot_f(&e.eta_n[p], &g)).sum::<f64>() / (n + 1) as f64)
    })
}

/// Exact flow reference for the lambda estimator.
pub fn lambda_reference(model: &FiniteFKModel, n: usize) -> Result<f64> {
    let eta = model.flow_eta(n)?;
    Ok(-(0..=n).map(|p| rational_to_f64(&crate::fk_model::dot(&eta[p], model.potential(p))).ln()).sum::<f64>() / n as f64)
}

/// Exact flow reference for the ground state estimator.
pub fn ground_state_reference(model: &FiniteFKModel, n: usize, f: &[Rational]) -> Result<f64> {
    let eta = model.flow_eta(n)?;
    let mut acc = Rational::zero();
    for (p, e) in eta.iter().enumerate() {
        let g = model.potential(p);
        let gf: Vec<Rational> = g.iter().zip(f).map(|(a, b)| a * b).collect();
        acc += crate::fk_model::dot(e, &gf) / crate::fk_model::dot(e, g);
    }
    Ok(rational_to_f64(&acc) / (n + 1) as f64)
}

/// CSV rows run_id, quantity, value with 17 significant digits.
pub fn write_estimates_csv<W: Write>(w: &mut W, quantity: &str, values: &[f64]) -> std::io::Result<()> {
    writeln!(w, "run_id,quantity,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{i},{quantity},{}", format_f64(*v))?;
    }
    Ok(())
}

pub fn format_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_num::{rat, rint};
    use crate::fixtures;
    use crate::fk_model::identity;

    #[test]
    fn identity_kernel_freezes_single_particle() {
        let m = FiniteFKModel::homogeneous(vec![rat(1, 3), rat(2, 3)], identity(2), vec![rint(1), rat(1, 2)], 4).unwrap();
        let t = simulate(&m, 1, 4, 9).unwrap();
        assert!(t.states.iter().all(|s| s == &t.states[0]));
    }

    #[test]
    fn deterministic_in_seed() {
        let m = fixtures::ref2b();
        assert_eq!(simulate(&m, 50, 3, 7).unwrap(), simulate(&m, 50, 3, 7).unwrap());
        assert_ne!(simulate(&m, 50, 3, 7).unwrap(), simulate(&m, 50, 3, 8).unwrap());
        assert!(simulate(&m, 0, 3, 7).is_err());
    }

    #[test]
    fn occupation_examples() {
        let t = occupation_tensor(&[0, 1], 2, 2, OccupationMode::Tensor).unwrap();
        assert!(t.atoms.iter().all(|a| *a == rat(1, 4)));
        let i = occupation_tensor(&[0, 1], 2, 2, OccupationMode::Injective).unwrap();
        assert_eq!(i.atoms, vec![rint(0), rat(1, 2), rat(1, 2), rint(0)]);
        assert!(occupation_tensor(&[0], 2, 2, OccupationMode::Injective).is_err());
    }

    #[test]
    fn u_statistic_basics() {
        let m = fixtures::ref2b();
        let t = simulate(&m, 20, 2, 3).unwrap();
        let f = vec![0.5, -1.0, 2.0];
        let e = t.empirical(&m);
        let direct: f64 = e.eta_n[1].iter().zip(&f).map(|(a, b)| a * b).sum();
        let u = u_statistic(&t, 1, 1, &UKernel::SymProduct(vec![f.clone()])).unwrap();
        assert!((u - direct).abs() < 1e-12);
        let ones = UKernel::SymProduct(vec![vec![1.0; 3]; 3]);
        assert!((u_statistic(&t, 1, 3, &ones).unwrap() - 1.0).abs() < 1e-12);
        // power sums agree with occupancy enumeration
        let fs: Vec<Vec<Rational>> = vec![vec![rint(1), rint(-2), rat(1, 2)], vec![rint(3), rint(0), rint(-1)]];
        let dense = TensorFunction::product(1, &fs).unwrap().symmetrize().unwrap();
        let a = u_statistic(&t, 1, 2, &UKernel::Dense(dense)).unwrap();
        let b = u_statistic(&t, 1, 2, &UKernel::SymProduct(fs.iter().map(|f| to_f64(f)).collect())).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn trivial_estimators() {
        let flat = fixtures::ref2_flat(3);
        let l = estimate_lambda(&flat, 10, 3, 8, 1).unwrap();
        assert!(l.values.iter().all(|&v| v == 0.0));
        let ones = vec![rint(1), rint(1)];
        let g = estimate_ground_state(&fixtures::ref2(), 10, 3, 8, 1, &ones).unwrap();
        assert!(g.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(estimate_lambda(&fixtures::ref2b(), 10, 2, 4, 1).is_err());
    }

    #[test]
    fn csv_is_stable() {
        let mut a = Vec::new();
        write_estimates_csv(&mut a, "lambda", &[0.1, 2.0]).unwrap();
        assert_eq!(String::from_utf8(a).unwrap(), "run_id,quantity,value\n0,lambda,1.0000000000000001e-1\n1,lambda,2.0000000000000000e0\n");
    }
}
