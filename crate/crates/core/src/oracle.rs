//! Brute-force oracles. Nothing here goes through the expansion code: they
//! only use the model primitives, so agreement is a genuine cross-check.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{domain, resource, Result};
use crate::exact_num::{binomial, compositions, factorial, falling_factorial, pow_rat, Rational};
use crate::fk_model::{dot, mat_vec, FiniteFKModel, Matrix, PointIter, ProductSpace, TensorFunction};
use crate::forest_core::Jungle;

pub const CONFIG_CAP: usize = 10_000;
pub const BRUTE_CAP: usize = 1_000_000;

fn ri(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// All occupancy vectors over `size` cells summing to N.
pub fn occupancies(size: usize, n_particles: usize) -> Result<Vec<Vec<usize>>> {
    let count = binomial((n_particles + size - 1) as u64, (size - 1) as u64);
    if count > BigInt::from(CONFIG_CAP) {
        return resource(format!("{count} occupancy configurations exceed the cap {CONFIG_CAP}"));
    }
    Ok(compositions(n_particles, size))
}

fn multinomial_coefficient(c: &[usize]) -> BigInt {
    let n: usize = c.iter().sum();
    let mut coef = factorial(n as u64);
    for &ci in c {
        coef /= factorial(ci as u64);
    }
    coef
}

fn multinomial_pmf(c: &[usize], p: &[Rational]) -> Rational {
    let n: usize = c.iter().sum();
    let mut coef = factorial(n as u64);
    for &ci in c {
        coef /= factorial(ci as u64);
    }
    let mut out = Rational::from_integer(coef);
    for (&ci, pi) in c.iter().zip(p) {
        if ci > 0 {
            out *= pow_rat(pi, ci as i64);
        }
    }
    out
}

/// Phi_k(m(c)) for an occupancy c at time k-1.
fn phi(model: &FiniteFKModel, k: usize, c: &[usize]) -> Vec<Rational> {
    let g = model.potential(k - 1);
    let m = model.kernel(k);
    let mut w = vec![Rational::zero(); model.size(k)];
    for (x, &cx) in c.iter().enumerate() {
        if cx == 0 {
            continue;
        }
        let gx = &g[x] * ri(cx);
        for (y, mxy) in m[x].iter().enumerate() {
            w[y] += &gx * mxy;
        }
    }
    let total: Rational = w.iter().sum();
    w.into_iter().map(|v| v / &total).collect()
}

/// Per time k, the law of the occupancy vector of the N-particle model.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigDistribution {
    pub levels: Vec<Vec<(Vec<usize>, Rational)>>,
}

impl ConfigDistribution {
    pub fn total_mass(&self, k: usize) -> Rational {
        self.levels[k].iter().map(|(_, w)| w).sum()
    }

    pub fn probability(&self, k: usize, c: &[usize]) -> Rational {
        self.levels[k].iter().find(|(x, _)| x == c).map(|(_, w)| w.clone()).unwrap_or_else(Rational::zero)
    }
}

/// Propagates weighted occupancy laws: w_0 = law_0 * h_0, w_k = (w_{k-1} P_k) * h_k.
fn dp_run<H>(model: &FiniteFKModel, n_particles: usize, n: usize, h: H) -> Result<Vec<Vec<(Vec<usize>, Rational)>>>
where
    H: Fn(usize, &[usize]) -> Result<Rational>,
{
    if n_particles == 0 {
        return domain("the particle model needs N >= 1");
    }
    if n > model.horizon() {
        return domain(format!("time {n} beyond model horizon {}", model.horizon()));
    }
    let mut levels = Vec::with_capacity(n + 1);
    let mut cur = Vec::new();
    for c in occupancies(model.size(0), n_particles)? {
        let w = multinomial_pmf(&c, model.eta0()) * h(0, &c)?;
        cur.push((c, w));
    }
    levels.push(cur);
    for k in 1..=n {
        let targets = occupancies(model.size(k), n_particles)?;
        let coefs: Vec<BigInt> = targets.iter().map(|c2| multinomial_coefficient(c2)).collect();
        let mut next: Vec<Rational> = vec![Rational::zero(); targets.len()];
        for (c, w) in levels[k - 1].iter().filter(|(_, w)| !w.is_zero()) {
            // Phi over a common denominator: p_y = a_y / d
            let p = phi(model, k, c);
            let d = p.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            let powers: Vec<Vec<BigInt>> = p
                .iter()
                .map(|v| {
                    let a = v.numer() * (&d / v.denom());
                    let mut row = vec![BigInt::one()];
                    for j in 0..n_particles {
                        let next = &row[j] * &a;
                        row.push(next);
                    }
                    row
                })
                .collect();
            let scale = w / Rational::from_integer(num_traits::pow(d, n_particles));
            for (t, c2) in targets.iter().enumerate() {
                let mut term = coefs[t].clone();
                for (y, &cy) in c2.iter().enumerate() {
                    if cy > 0 {
                        term *= &powers[y][cy];
                    }
                }
                if !term.is_zero() {
                    next[t] += &scale * Rational::from_integer(term);
                }
            }
        }
        let mut out = Vec::with_capacity(targets.len());
        for (c2, w) in targets.into_iter().zip(next) {
            let w = if w.is_zero() { w } else { w * h(k, &c2)? };
            out.push((c2, w));
        }
        levels.push(out);
    }
    Ok(levels)
}

pub fn dp_distribution(model: &FiniteFKModel, n_particles: usize, n: usize) -> Result<ConfigDistribution> {
    Ok(ConfigDistribution { levels: dp_run(model, n_particles, n, |_, _| Ok(Rational::one()))? })
}

/// E[prod_k h_k(occupancy at k)] over times 0..=n.
pub fn dp_weighted<H>(model: &FiniteFKModel, n_particles: usize, n: usize, h: H) -> Result<Rational>
where
    H: Fn(usize, &[usize]) -> Result<Rational>,
{
    let levels = dp_run(model, n_particles, n, h)?;
    Ok(levels[n].iter().map(|(_, w)| w).sum())
}

/// For several F at time n, one DP run gives the pair
/// (E[m(c_n)^{(.)q}(F)], E[m(c_n)^{(x)q}(F)]), i.e. the P and P~ targets.
pub fn dp_law_expectations(model: &FiniteFKModel, n_particles: usize, n: usize, fs: &[TensorFunction]) -> Result<Vec<(Rational, Rational)>> {
    for f in fs {
        check_level_function(model, n, f)?;
    }
    let law = dp_distribution(model, n_particles, n)?;
    let mut out = vec![(Rational::zero(), Rational::zero()); fs.len()];
    for (c, w) in law.levels[n].iter().filter(|(_, w)| !w.is_zero()) {
        for ((inj, ten), f) in out.iter_mut().zip(fs) {
            *inj += w * injective_statistic(c, f)?;
            *ten += w * tensor_statistic(c, f)?;
        }
    }
    Ok(out)
}

fn empirical_mean(c: &[usize], f: &[Rational]) -> Rational {
    let n: usize = c.iter().sum();
    c.iter().zip(f).map(|(&ci, fi)| fi * ri(ci)).sum::<Rational>() / ri(n)
}

/// (m(c))^{(x)q}(F) for an occupancy c.
pub fn tensor_statistic(c: &[usize], f: &TensorFunction) -> Result<Rational> {
    let n: usize = c.iter().sum();
    let mut acc = Rational::zero();
    for (x, v) in f.space.points()?.zip(&f.values) {
        if v.is_zero() {
            continue;
        }
        let w: BigInt = x.iter().map(|&e| BigInt::from(c[e])).product();
        acc += v * Rational::from_integer(w);
    }
    Ok(acc / Rational::from_integer(num_traits::pow(BigInt::from(n), f.space.ncoords())))
}

/// (m(c))^{(.)q}(F): the average over injective maps [q] -> [N].
pub fn injective_statistic(c: &[usize], f: &TensorFunction) -> Result<Rational> {
    let n: usize = c.iter().sum();
    let q = f.space.ncoords();
    if q > n {
        return domain(format!("q={q} exceeds N={n}"));
    }
    let mut acc = Rational::zero();
    let mut m = vec![0usize; c.len()];
    for (x, v) in f.space.points()?.zip(&f.values) {
        if v.is_zero() {
            continue;
        }
        m.iter_mut().for_each(|e| *e = 0);
        for &e in &x {
            m[e] += 1;
        }
        let w: BigInt = m.iter().zip(c).map(|(&me, &ce)| falling_factorial(ce as u64, me as u64)).product();
        acc += v * Rational::from_integer(w);
    }
    Ok(acc / Rational::from_integer(falling_factorial(n as u64, q as u64)))
}

/// Expectations the DP can evaluate.
#[derive(Clone, Copy, Debug)]
pub enum DpTarget<'a> {
    /// E[gamma^N_n(f)]
    Gamma { n: usize, f: &'a [Rational] },
    /// E[(gamma^N_n)^{(x)q}(F)]
    Q { n: usize, f: &'a TensorFunction },
    /// E[(gamma^N_n)^{(.)q}(F)]
    GammaInjective { n: usize, f: &'a TensorFunction },
    /// E[(eta^N_n)^{(.)q}(F)], the law of q particles
    P { n: usize, f: &'a TensorFunction },
    /// E[(eta^N_n)^{(x)q}(F)]
    PTilde { n: usize, f: &'a TensorFunction },
    /// E[(gamma^N_0)^{(x)q_0} (x) ... (x) (gamma^N_n)^{(x)q_n}(F)]
    Qbar { q: &'a [usize], f: &'a TensorFunction },
    /// E[(1 - gamma^N_n(G_n)/gamma_n(G_n))^q]
    EMoment { n: usize, q: usize },
}

fn check_level_function(model: &FiniteFKModel, n: usize, f: &TensorFunction) -> Result<()> {
    if n > model.horizon() {
        return domain(format!("time {n} beyond model horizon {}", model.horizon()));
    }
    if f.space.dims().iter().any(|&d| d != model.size(n)) {
        return domain("F does not live on a power of E_n");
    }
    if !f.is_block_symmetric() {
        return domain("the DP oracle only handles symmetric F");
    }
    Ok(())
}

fn mean_potential(model: &FiniteFKModel, k: usize, c: &[usize]) -> Rational {
    empirical_mean(c, model.potential(k))
}

pub fn dp_expected(model: &FiniteFKModel, n_particles: usize, target: DpTarget) -> Result<Rational> {
    match target {
        DpTarget::Gamma { n, f } => dp_weighted(model, n_particles, n, |k, c| {
            Ok(if k < n { mean_potential(model, k, c) } else { empirical_mean(c, f) })
        }),
        DpTarget::Q { n, f } | DpTarget::GammaInjective { n, f } => {
            check_level_function(model, n, f)?;
            let q = f.space.ncoords() as i64;
            let injective = matches!(target, DpTarget::GammaInjective { .. });
            dp_weighted(model, n_particles, n, |k, c| {
                if k < n {
                    Ok(pow_rat(&mean_potential(model, k, c), q))
                } else if injective {
                    injective_statistic(c, f)
                } else {
                    tensor_statistic(c, f)
                }
            })
        }
        DpTarget::P { n, f } | DpTarget::PTilde { n, f } => {
            check_level_function(model, n, f)?;
            let injective = matches!(target, DpTarget::P { .. });
            dp_weighted(model, n_particles, n, |k, c| {
                if k < n {
                    Ok(Rational::one())
                } else if injective {
                    injective_statistic(c, f)
                } else {
                    tensor_statistic(c, f)
                }
            })
        }
        DpTarget::Qbar { q, f } => qbar_dp(model, n_particles, q, f),
        DpTarget::EMoment { n, q } => {
            let flow = model.flow_gamma(n)?;
            let target = dot(&flow.gammas[n], model.potential(n));
            // binomial expansion in powers of gamma^N_n(G_n) = prod_{p<=n} eta^N_p(G_p)
            let mut acc = Rational::zero();
            for j in 0..=q {
                let m = dp_weighted(model, n_particles, n, |k, c| Ok(pow_rat(&mean_potential(model, k, c), j as i64)))?;
                let sign = if j % 2 == 0 { Rational::one() } else { -Rational::one() };
                acc += sign * Rational::from_integer(binomial(q as u64, j as u64)) * m / pow_rat(&target, j as i64);
            }
            Ok(acc)
        }
    }
}

/// Path-space expectation: decompose F over the coordinates before the last
/// time block into indicator products, and run one DP per nonzero slice.
fn qbar_dp(model: &FiniteFKModel, n_particles: usize, q: &[usize], f: &TensorFunction) -> Result<Rational> {
    let n = q.len().checked_sub(1).ok_or_else(|| crate::FkError::Domain("empty q sequence".into()))?;
    let dims: Vec<usize> = q.iter().enumerate().flat_map(|(k, &qk)| std::iter::repeat(model.size(k)).take(qk)).collect();
    if n > model.horizon() {
        return domain(format!("time {n} beyond model horizon {}", model.horizon()));
    }
    if f.space.dims() != dims {
        return domain("F does not live on E_0^q0 x ... x E_n^qn");
    }
    if !f.is_block_symmetric() {
        return domain("the DP oracle only handles blockwise symmetric F");
    }
    let last = match (0..=n).rev().find(|&k| q[k] > 0) {
        Some(l) => l,
        None => return Ok(f.values[0].clone()),
    };
    // q'_p = number of coordinates at times after p
    let qprime: Vec<usize> = (0..=n).map(|p| q[p + 1..].iter().sum()).collect();
    let head: usize = q[..last].iter().sum();
    let tail_space = ProductSpace::power(last, model.size(last), q[last]);
    let tail_card = tail_space.cardinality()?;
    let mut total = Rational::zero();
    for (idx, y) in PointIter::new(dims[..head].to_vec()).enumerate() {
        let slice = &f.values[idx * tail_card..(idx + 1) * tail_card];
        if slice.iter().all(|v| v.is_zero()) {
            continue;
        }
        let tail = TensorFunction { space: tail_space.clone(), values: slice.to_vec(), symmetric: false };
        let starts: Vec<usize> = (0..=n).map(|k| q[..k].iter().sum()).collect();
        total += dp_weighted(model, n_particles, last, |k, c| {
            let nn: usize = c.iter().sum();
            let mut w = pow_rat(&mean_potential(model, k, c), qprime[k] as i64);
            if k < last {
                for &e in &y[starts[k]..starts[k] + q[k]] {
                    w *= Rational::new(BigInt::from(c[e]), BigInt::from(nn));
                }
            } else {
                w *= tensor_statistic(c, &tail)?;
            }
            Ok(w)
        })?;
    }
    Ok(total)
}

/// Literal sum over every map sequence a in ([q]^[q])^{n+1}, each Delta^a
/// evaluated by pulling F back through D_{a_n}, Q_n, ..., D_{a_0}.
pub fn brute_a_sum(model: &FiniteFKModel, n_particles: usize, n: usize, q: usize, f: &TensorFunction) -> Result<Rational> {
    Ok(brute_a_sums(model, &[n_particles], n, q, f)?.remove(0))
}

/// `brute_a_sum` for several N at once; each Delta^a(F) is computed a single time.
pub fn brute_a_sums(model: &FiniteFKModel, ns: &[usize], n: usize, q: usize, f: &TensorFunction) -> Result<Vec<Rational>> {
    if q == 0 || ns.iter().any(|&nn| q > nn) {
        return domain(format!("need 1 <= q <= N, got q={q}, N in {ns:?}"));
    }
    if n > model.horizon() {
        return domain(format!("time {n} beyond model horizon {}", model.horizon()));
    }
    let count = num_traits::pow(BigInt::from(q), q * (n + 1));
    if count > BigInt::from(BRUTE_CAP) {
        return resource(format!("{count} map sequences exceed the cap {BRUTE_CAP}"));
    }
    if f.space.dims() != vec![model.size(n); q] {
        return domain("F does not live on E_n^q");
    }
    let maps: Vec<Vec<usize>> = PointIter::new(vec![q; q]).collect();
    let images: Vec<u64> = maps
        .iter()
        .map(|a| {
            let mut img = a.clone();
            img.sort_unstable();
            img.dedup();
            img.len() as u64
        })
        .collect();
    let qmats: Vec<Matrix> = (1..=n).map(|k| model.q_matrix(k)).collect();
    let seqs: Vec<Vec<usize>> = PointIter::new(vec![maps.len(); n + 1]).collect();
    let partial: Vec<Vec<Rational>> = seqs
        .par_iter()
        .map(|seq| {
            let mut g = f.clone();
            for k in (0..=n).rev() {
                g = g.pull_map(&maps[seq[k]], ProductSpace::power(k, model.size(k), q))?;
                if k > 0 {
                    for c in 0..q {
                        g = g.pull_kernel(c, &qmats[k - 1])?;
                    }
                    g.space = ProductSpace::power(k - 1, model.size(k - 1), q);
                }
            }
            let mut v = Rational::zero();
            for (x, gx) in g.space.points()?.zip(&g.values) {
                let p: Rational = x.iter().map(|&e| model.eta0()[e].clone()).product();
                v += p * gx;
            }
            Ok(ns
                .iter()
                .map(|&nn| {
                    let w: Rational = seq
                        .iter()
                        .map(|&i| Rational::new(falling_factorial(nn as u64, images[i]), falling_factorial(q as u64, images[i])))
                        .product();
                    w * &v
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(ns
        .iter()
        .enumerate()
        .map(|(i, &nn)| partial.iter().map(|p| &p[i]).sum::<Rational>() / pow_rat(&ri(nn), (q * (n + 1)) as i64))
        .collect())
}

/// Number of colour-preserving level relabelings s with s(a) = a, by exhaustive search.
pub fn brute_stabilizer(j: &Jungle) -> Result<BigInt> {
    let profile = j.profile();
    let group: BigInt = profile.iter().map(|lc| factorial(lc.white as u64) * factorial(lc.black as u64)).product();
    if group > BigInt::from(BRUTE_CAP) {
        return resource(format!("group of order {group} exceeds the cap {BRUTE_CAP}"));
    }
    let perms: Vec<Vec<Vec<usize>>> = profile
        .iter()
        .map(|lc| {
            let mut out = Vec::new();
            for pw in crate::fk_model::permutations(lc.white) {
                for pb in crate::fk_model::permutations(lc.black) {
                    out.push(pw.iter().copied().chain(pb.iter().map(|&b| b + lc.white)).collect());
                }
            }
            out
        })
        .collect();
    fn rec(level: usize, prev: &[usize], j: &Jungle, perms: &[Vec<Vec<usize>>]) -> BigInt {
        if level == perms.len() {
            return BigInt::one();
        }
        let a = &j.maps()[level - 1];
        let w = j.profile()[level - 1].white;
        let mut count = BigInt::zero();
        for s in &perms[level] {
            // s fixes a_{level-1} iff a(s(i)) = s_prev(a(i)) on blacks
            if a.iter().enumerate().all(|(i, &ai)| a[s[i]] + w == prev[w + ai]) {
                count += rec(level + 1, s, j, perms);
            }
        }
        count
    }
    let mut total = BigInt::zero();
    for s0 in &perms[0] {
        total += rec(1, s0, j, &perms);
    }
    Ok(total)
}

/// Sum over pair partitions of [q] of prod C(i, j); zero for odd q.
pub fn gaussian_moment(c: &[Vec<Rational>]) -> Rational {
    fn rec(rest: &[usize], c: &[Vec<Rational>]) -> Rational {
        if rest.is_empty() {
            return Rational::one();
        }
        if rest.len() % 2 == 1 {
            return Rational::zero();
        }
        let i = rest[0];
        let mut acc = Rational::zero();
        for t in 1..rest.len() {
            let cij = &c[i][rest[t]];
            if cij.is_zero() {
                continue;
            }
            let remaining: Vec<usize> = rest[1..].iter().enumerate().filter(|&(s, _)| s + 1 != t).map(|(_, &v)| v).collect();
            acc += cij * rec(&remaining, c);
        }
        acc
    }
    let idx: Vec<usize> = (0..c.len()).collect();
    rec(&idx, c)
}

/// C(i, j) = sum_{k<=n} gamma_k(1) gamma_k(Q_{k,n} f_i . Q_{k,n} f_j).
pub fn wick_covariance(model: &FiniteFKModel, n: usize, fs: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let flow = model.flow_gamma(n)?;
    let mut c = vec![vec![Rational::zero(); fs.len()]; fs.len()];
    for k in 0..=n {
        let s = model.semigroup(k, n)?;
        let pushed: Vec<Vec<Rational>> = fs.iter().map(|f| mat_vec(&s, f)).collect();
        for i in 0..fs.len() {
            for jj in 0..fs.len() {
                let prod: Vec<Rational> = pushed[i].iter().zip(&pushed[jj]).map(|(a, b)| a * b).collect();
                c[i][jj] += &flow.normalizers[k] * dot(&flow.gammas[k], &prod);
            }
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_num::{rat, rint};
    use crate::fixtures;
    use crate::fk_model::vec_mat;
    use crate::forest_core::LevelCount;
    use crate::particle_engine::simulate_run;

    fn ff(f: &[Rational]) -> TensorFunction {
        TensorFunction::product(0, &[f.to_vec(), f.to_vec()]).unwrap()
    }

    #[test]
    fn single_particle_follows_kernel() {
        let m = fixtures::ref2b();
        let d = dp_distribution(&m, 1, 3).unwrap();
        let mut law = m.eta0().to_vec();
        for k in 1..=3 {
            law = vec_mat(&law, m.kernel(k));
            for (x, p) in law.iter().enumerate() {
                let mut c = vec![0; m.size(k)];
                c[x] = 1;
                assert_eq!(d.probability(k, &c), *p);
            }
        }
    }

    #[test]
    fn masses_and_unbiasedness() {
        let m = fixtures::ref2();
        let d = dp_distribution(&m, 3, 2).unwrap();
        for k in 0..=2 {
            assert_eq!(d.total_mass(k), rint(1));
        }
        let f = vec![rint(2), rat(-1, 3)];
        let flow = m.flow_gamma(2).unwrap();
        assert_eq!(dp_expected(&m, 3, DpTarget::Gamma { n: 2, f: &f }).unwrap(), dot(&flow.gammas[2], &f));
        // one-particle law through P
        let g = TensorFunction::product(2, &[f.clone()]).unwrap();
        let p = dp_expected(&m, 3, DpTarget::P { n: 2, f: &g }).unwrap();
        let dd = dp_distribution(&m, 3, 2).unwrap();
        let direct: Rational = dd.levels[2].iter().map(|(c, w)| w * empirical_mean(c, &f)).sum();
        assert_eq!(p, direct);
    }

    #[test]
    fn variance_of_initial_mean() {
        let m = fixtures::ref2();
        let f = vec![rint(1), rint(-1)];
        for n in 2..6 {
            assert_eq!(dp_expected(&m, n, DpTarget::Q { n: 0, f: &ff(&f) }).unwrap(), rat(1, n as i64));
            assert_eq!(brute_a_sum(&m, n, 0, 2, &ff(&f)).unwrap(), rat(1, n as i64));
            assert_eq!(dp_expected(&m, n, DpTarget::P { n: 0, f: &ff(&f) }).unwrap(), rint(0));
        }
        let nonsym = TensorFunction::product(0, &[f.clone(), vec![rint(1), rint(0)]]).unwrap();
        assert!(dp_expected(&m, 3, DpTarget::Q { n: 0, f: &nonsym }).is_err());
    }

    #[test]
    fn brute_and_dp_agree() {
        for m in [fixtures::ref2(), fixtures::ref2b()] {
            for n in 0..=2 {
                let d = m.size(n);
                let f = TensorFunction::from_fn(ProductSpace::power(n, d, 2), |x| {
                    rat((x[0] * x[1]) as i64 + 1, 1 + x[0] as i64 + x[1] as i64)
                })
                .unwrap();
                for big_n in 2..=3 {
                    let a = brute_a_sum(&m, big_n, n, 2, &f).unwrap();
                    let b = dp_expected(&m, big_n, DpTarget::Q { n, f: &f }).unwrap();
                    assert_eq!(a, b, "n={n} N={big_n}");
                }
            }
        }
    }

    #[test]
    fn qbar_single_time_matches_q() {
        let m = fixtures::ref2b();
        let f = TensorFunction::from_fn(ProductSpace::power(1, 3, 2), |x| rint((x[0] + x[1]) as i64)).unwrap();
        let a = dp_expected(&m, 3, DpTarget::Qbar { q: &[0, 2], f: &f }).unwrap();
        let b = dp_expected(&m, 3, DpTarget::Q { n: 1, f: &f }).unwrap();
        assert_eq!(a, b);
        let e1 = vec![rint(1), rint(0)];
        let one = TensorFunction::product(0, &[e1.clone()]).unwrap();
        assert_eq!(dp_expected(&m, 4, DpTarget::Qbar { q: &[1], f: &one }).unwrap(), rat(1, 3));
    }

    #[test]
    fn e_moment_first_vanishes() {
        let m = fixtures::ref2();
        for n in 0..=2 {
            assert_eq!(dp_expected(&m, 3, DpTarget::EMoment { n, q: 1 }).unwrap(), rint(0));
        }
    }

    #[test]
    fn stabilizer_examples() {
        let id = Jungle::identity(0, 2);
        assert_eq!(brute_stabilizer(&id).unwrap(), BigInt::from(2));
        let c = Jungle::plain(&[2, 2], vec![vec![0, 0]]).unwrap();
        assert_eq!(brute_stabilizer(&c).unwrap(), BigInt::from(2));
        let colored = Jungle::new(vec![LevelCount::black(2), LevelCount { white: 1, black: 1 }], vec![vec![0, 1]]).unwrap();
        assert_eq!(brute_stabilizer(&colored).unwrap(), BigInt::from(1));
    }

    #[test]
    fn gaussian_examples() {
        let c: Vec<Vec<Rational>> = (0..4).map(|i| (0..4).map(|j| rint((i + 1) * (j + 1) + (i * j) as i64)).collect()).collect();
        assert_eq!(gaussian_moment(&c[..2].iter().map(|r| r[..2].to_vec()).collect::<Vec<_>>()), c[0][1]);
        assert_eq!(gaussian_moment(&c[..3].iter().map(|r| r[..3].to_vec()).collect::<Vec<_>>()), rint(0));
        let want = &c[0][1] * &c[2][3] + &c[0][2] * &c[1][3] + &c[0][3] * &c[1][2];
        assert_eq!(gaussian_moment(&c), want);
        assert_eq!(gaussian_moment(&[]), rint(1));
    }

    #[test]
    fn monte_carlo_matches_configuration_law() {
        let m = fixtures::ref2();
        let d = dp_distribution(&m, 3, 2).unwrap();
        let runs = 4000;
        let mut hits = std::collections::BTreeMap::new();
        for r in 0..runs {
            let t = simulate_run(&m, 3, 2, 11, r).unwrap();
            *hits.entry(t.counts(2, 2)).or_insert(0usize) += 1;
        }
        for (c, p) in &d.levels[2] {
            let p = crate::exact_num::rational_to_f64(p);
            let freq = *hits.get(c).unwrap_or(&0) as f64 / runs as f64;
            let sd = (p * (1.0 - p) / runs as f64).sqrt();
            assert!((freq - p).abs() <= 4.0 * sd, "config {c:?}: {freq} vs {p}");
        }
    }
}
