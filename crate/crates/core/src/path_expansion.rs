//! Colored forests, path-space particle measures and their Laurent
//! expansions, the moment polynomials E_{q,n} and the derivatives of the
//! particle block laws P^N_{n+1,q}.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::exact_num::{big_to_rat, binomial, compositions, factorial, falling_factorial, pow_rat, rint, stirling_first, MultiIndex, Rational};
use crate::fk_model::{dot, FiniteFKModel, Matrix, ProductMeasure, ProductSpace, TensorFunction};
use crate::forest_core::{count_jungles, enumerate_profile, Forest, Jungle, LevelCount, Tree};

/// Functions on E_0^{q_0} x ... x E_n^{q_n}, one tensor block per time.
pub type PathTensorFunction = TensorFunction;

/// A time profile q = (q_0..q_n) with q'_m = sum_{m<k<=n} q_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeq {
    pub q: MultiIndex,
    pub q_prime: MultiIndex,
}

pub fn q_prime(q: &MultiIndex) -> Result<QSeq> {
    if q.len() == 0 {
        return domain("q must have at least one entry");
    }
    let q_prime = MultiIndex((0..q.len()).map(|m| q.0[m + 1..].iter().sum()).collect());
    Ok(QSeq { q: q.clone(), q_prime })
}

impl QSeq {
    pub fn new(q: &[usize]) -> Result<Self> {
        q_prime(&MultiIndex(q.to_vec()))
    }

    pub fn horizon(&self) -> usize {
        self.q.len() - 1
    }

    pub fn total(&self) -> usize {
        self.q.abs()
    }

    /// |q'| = sum_k (k+1) q_k.
    pub fn prime_total(&self) -> usize {
        self.q.0.iter().enumerate().map(|(k, &qk)| (k + 1) * qk).sum()
    }

    /// Domain sizes of the maps a_0..a_n: |q|, q'_0, ..., q'_{n-1}.
    pub fn domains(&self) -> Vec<usize> {
        std::iter::once(self.total()).chain(self.q_prime.0[..self.horizon()].iter().copied()).collect()
    }

    /// (q_k, q'_k) per level, led by the |q| roots.
    pub fn colored_profile(&self) -> Vec<LevelCount> {
        std::iter::once(LevelCount::black(self.total()))
            .chain(self.q.0.iter().zip(&self.q_prime.0).map(|(&w, &b)| LevelCount { white: w, black: b }))
            .collect()
    }

    pub fn path_space(&self, model: &FiniteFKModel) -> ProductSpace {
        ProductSpace::new(
            self.q.0.iter().enumerate().map(|(k, &qk)| crate::fk_model::Block { level: k, size: model.size(k), power: qk }).collect(),
        )
    }
}

fn check_qseq(model: &FiniteFKModel, q: &QSeq) -> Result<()> {
    if q.horizon() > model.horizon() {
        return domain(format!("q reaches time {} beyond model horizon {}", q.horizon(), model.horizon()));
    }
    if q.total() == 0 {
        return domain("q must have |q| >= 1");
    }
    Ok(())
}

/// Classes of colored jungles with profile q-bar, optionally with coalescence <= max_coal per map.
pub fn enumerate_colored_forests(q: &QSeq, max_coal: Option<&MultiIndex>) -> Result<Vec<Forest>> {
    if q.total() == 0 {
        return domain("q must have |q| >= 1");
    }
    enumerate_profile(&q.colored_profile(), max_coal)
}

pub fn count_colored_jungles(f: &Forest) -> Result<BigInt> {
    count_jungles(f)
}

/// eta_0^{(x)|q|} D_{0,a_0} Q_1 D_{1,a_1} ... Q_n D_{n,a_n} on the path space.
pub fn delta_colored(model: &FiniteFKModel, j: &Jungle, q: &QSeq) -> Result<ProductMeasure> {
    check_qseq(model, q)?;
    if j.profile() != q.colored_profile().as_slice() {
        return domain("colored jungle profile does not match q");
    }
    let mut frozen: Vec<crate::fk_model::Block> = Vec::new();
    let nfrozen = |fr: &Vec<crate::fk_model::Block>| fr.iter().map(|b| b.power).sum::<usize>();
    let mut m = ProductMeasure::tensor_power(0, model.eta0(), q.total())?;
    for (k, a) in j.maps().iter().enumerate() {
        let nf = nfrozen(&frozen);
        if k > 0 {
            let qk = model.q_matrix(k);
            for c in nf..m.space.ncoords() {
                m = m.push_kernel(c, &qk)?;
            }
        }
        let (qk, qpk) = (q.q.0[k], q.q_prime.0[k]);
        let map: Vec<usize> = (0..nf).chain(a.iter().map(|&v| nf + v)).collect();
        frozen.push(crate::fk_model::Block { level: k, size: model.size(k), power: qk });
        let mut blocks = frozen.clone();
        blocks.push(crate::fk_model::Block { level: k, size: model.size(k), power: qpk });
        m = m.push_map(&map, ProductSpace::new(blocks))?;
    }
    Ok(m)
}

/// Delta of a colored forest class, through a representative, block-symmetrized.
pub fn delta_colored_forest(model: &FiniteFKModel, f: &Forest, q: &QSeq) -> Result<ProductMeasure> {
    delta_colored(model, &f.to_jungle(q.horizon() + 2)?, q)?.symmetrize()
}

#[derive(Clone, Debug)]
pub struct ColoredTerm {
    pub forest: Forest,
    pub count: BigInt,
    /// |a_k| for each map
    pub images: Vec<usize>,
    pub delta: ProductMeasure,
}

/// The colored class sum for one q.
#[derive(Clone, Debug)]
pub struct ColoredSum {
    pub q: QSeq,
    /// when set, only forests of coalescence degree <= this are kept,
    /// so orders above it are incomplete
    pub max_degree: Option<usize>,
    pub terms: Vec<ColoredTerm>,
}

impl ColoredSum {
    pub fn new(model: &FiniteFKModel, q: &QSeq, max_degree: Option<usize>) -> Result<Self> {
        check_qseq(model, q)?;
        q.path_space(model).cardinality()?;
        let levels = q.horizon() + 2;
        let bound = max_degree.map(|d| MultiIndex::constant(levels - 1, d));
        let forests: Vec<Forest> = enumerate_colored_forests(q, bound.as_ref())?
            .into_iter()
            .filter(|f| max_degree.map_or(true, |d| f.coalescence(levels).abs() <= d))
            .collect();
        let terms = forests
            .into_par_iter()
            .map(|forest| {
                Ok(ColoredTerm {
                    count: count_jungles(&forest)?,
                    images: forest.parent_counts(levels).0,
                    delta: delta_colored(model, &forest.to_jungle(levels)?, q)?,
                    forest,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ColoredSum { q: q.clone(), max_degree, terms })
    }

    pub fn max_order(&self) -> usize {
        self.q.domains().iter().map(|&d| d.saturating_sub(1)).sum()
    }

    /// Coefficients of N^{-r} in #(f) prod_k (N)_{p_k} N^{-d_k} / (d_k)_{p_k}.
    fn order_weights(&self, t: &ColoredTerm) -> Result<Vec<Rational>> {
        let mut poly = vec![BigInt::one()];
        let mut denom = BigInt::one();
        for (&d, &p) in self.q.domains().iter().zip(&t.images) {
            let level: Vec<BigInt> = (0..=d).map(|r| if d - r <= p { stirling_first(p, d - r) } else { Ok(BigInt::zero()) }).collect::<Result<_>>()?;
            let mut next = vec![BigInt::zero(); poly.len() + d];
            for (i, a) in poly.iter().enumerate() {
                for (j, b) in level.iter().enumerate() {
                    next[i + j] += a * b;
                }
            }
            poly = next;
            denom *= falling_factorial(d as u64, p as u64);
        }
        let scale = Rational::new(t.count.clone(), denom);
        let mut out: Vec<Rational> = poly.into_iter().map(|c| big_to_rat(c) * &scale).collect();
        out.resize(self.max_order() + 1, Rational::zero());
        Ok(out)
    }

    /// d^k Qbar_{n,q}(F), k = 0..=max_order.
    pub fn laurent_values(&self, f: &PathTensorFunction) -> Result<Vec<Rational>> {
        require_block_symmetric(f)?;
        let mut out = vec![Rational::zero(); self.max_order() + 1];
        for t in &self.terms {
            let v = t.delta.integrate(f)?;
            if v.is_zero() {
                continue;
            }
            for (k, w) in self.order_weights(t)?.iter().enumerate() {
                out[k] += w * &v;
            }
        }
        Ok(out)
    }

    /// Qbar^N_{n,q}(F), exact.
    pub fn qbar(&self, n_particles: usize, f: &PathTensorFunction) -> Result<Rational> {
        require_block_symmetric(f)?;
        if self.max_degree.is_some() {
            return domain("a truncated class sum cannot give exact values");
        }
        if self.q.total() > n_particles {
            return domain(format!("|q|={} exceeds N={n_particles}", self.q.total()));
        }
        let nn = n_particles as u64;
        let mut acc = Rational::zero();
        for t in &self.terms {
            let mut w = big_to_rat(t.count.clone());
            for (&d, &p) in self.q.domains().iter().zip(&t.images) {
                w *= Rational::new(falling_factorial(nn, p as u64), falling_factorial(d as u64, p as u64));
            }
            acc += w * t.delta.integrate(f)?;
        }
        Ok(acc / pow_rat(&rint(n_particles as i64), self.q.prime_total() as i64))
    }
}

fn require_block_symmetric(f: &TensorFunction) -> Result<()> {
    if !f.is_block_symmetric() {
        return domain("F must be symmetric within each time block");
    }
    Ok(())
}

/// E[(gamma_0^N)^{(x)q_0} (x) ... (x) (gamma_n^N)^{(x)q_n}(F)].
pub fn qbar_exact(model: &FiniteFKModel, n_particles: usize, q: &QSeq, f: &PathTensorFunction) -> Result<Rational> {
    ColoredSum::new(model, q, None)?.qbar(n_particles, f)
}

/// d^k Qbar_{n,q}(F) from the forests of coalescence degree <= k.
pub fn dqbar(model: &FiniteFKModel, k: usize, q: &QSeq, f: &PathTensorFunction) -> Result<Rational> {
    let s = ColoredSum::new(model, q, Some(k))?;
    let v = s.laurent_values(f)?;
    Ok(v.get(k).cloned().unwrap_or_else(Rational::zero))
}

/// All orders d^0..d^max of Qbar_{n,q}(F).
pub fn dqbar_table(model: &FiniteFKModel, q: &QSeq, f: &PathTensorFunction) -> Result<Vec<Rational>> {
    ColoredSum::new(model, q, None)?.laurent_values(f)
}

/// Integrating out one coordinate of any time block against gamma_k gives 0.
pub fn in_b0_path(model: &FiniteFKModel, q: &QSeq, f: &PathTensorFunction) -> Result<bool> {
    let flow = model.flow_gamma(q.horizon())?;
    let mut start = 0;
    for (k, &qk) in q.q.0.iter().enumerate() {
        if qk > 0 {
            let row: Matrix = vec![flow.gammas[k].clone()];
            let g = f.pull_kernel(start + qk - 1, &row)?;
            if g.values.iter().any(|v| !v.is_zero()) {
                return Ok(false);
            }
        }
        start += qk;
    }
    Ok(true)
}

fn branch(blacks: usize) -> Tree {
    (0..blacks).fold(Tree::white_leaf(), |t, _| Tree::black(vec![t]))
}

/// T(k,l,m): one coalescence at map k, white leaves at times l and m.
pub fn colored_pair_tree(k: usize, l: usize, m: usize) -> Tree {
    let top = Tree::black(vec![branch(l - k), branch(m - k)]);
    (0..k).fold(top, |t, _| Tree::black(vec![t]))
}

/// One Wick forest with its weight q!/(2^delta(t) t!).
#[derive(Clone, Debug)]
pub struct WickForest {
    pub forest: Forest,
    /// (k, l, m, t_klm) for t_klm > 0
    pub pairs: Vec<(usize, usize, usize, usize)>,
    pub weight: Rational,
}

/// Every family t with whites q_l at each time, as forests prod (T_klm U_k)^t_klm.
pub fn wick_forests(q: &QSeq) -> Result<Vec<WickForest>> {
    let n = q.horizon();
    let mut triples = Vec::new();
    for k in 0..=n {
        for l in k..=n {
            for m in l..=n {
                triples.push((k, l, m));
            }
        }
    }
    fn rec(i: usize, triples: &[(usize, usize, usize)], left: &mut Vec<usize>, t: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == triples.len() {
            if left.iter().all(|&x| x == 0) {
                out.push(t.clone());
            }
            return;
        }
        let (_, l, m) = triples[i];
        let mut c = 0;
        loop {
            t.push(c);
            rec(i + 1, triples, left, t, out);
            t.pop();
            let ok = if l == m { left[l] >= 2 } else { left[l] >= 1 && left[m] >= 1 };
            if !ok {
                break;
            }
            if l == m {
                left[l] -= 2;
            } else {
                left[l] -= 1;
                left[m] -= 1;
            }
            c += 1;
        }
        if l == m {
            left[l] += 2 * c;
        } else {
            left[l] += c;
            left[m] += c;
        }
    }
    let mut families = Vec::new();
    rec(0, &triples, &mut q.q.0.clone(), &mut Vec::new(), &mut families);
    let qfact: BigInt = q.q.0.iter().map(|&x| factorial(x as u64)).product();
    let mut out = Vec::new();
    for t in families {
        let mut trees = Vec::new();
        let mut pairs = Vec::new();
        let mut denom = BigInt::one();
        for (&(k, l, m), &c) in triples.iter().zip(&t) {
            if c == 0 {
                continue;
            }
            for _ in 0..c {
                trees.push(colored_pair_tree(k, l, m));
                trees.push(Tree::chain(k));
            }
            pairs.push((k, l, m, c));
            denom *= factorial(c as u64);
            if l == m {
                denom *= num_traits::pow(BigInt::from(2), c);
            }
        }
        let forest = Forest::from_trees(trees);
        if forest.colored_profile(n + 2) != q.colored_profile() {
            return domain("internal: Wick forest does not match the colored profile");
        }
        out.push(WickForest { forest, pairs, weight: Rational::new(qfact.clone(), denom) });
    }
    Ok(out)
}

/// d^{|q|/2} Qbar(F) on B0 via the Wick forests; zero when |q| is odd.
pub fn dqbar_wick(model: &FiniteFKModel, q: &QSeq, f: &PathTensorFunction) -> Result<Rational> {
    check_qseq(model, q)?;
    require_block_symmetric(f)?;
    if !in_b0_path(model, q, f)? {
        return domain("F is not in B0: some coordinate does not integrate to zero against gamma");
    }
    if q.total() % 2 == 1 {
        return Ok(Rational::zero());
    }
    let mut acc = Rational::zero();
    for w in wick_forests(q)? {
        acc += &w.weight * delta_colored_forest(model, &w.forest, q)?.integrate(f)?;
    }
    Ok(acc)
}

/// Gbar_k = (eta_k(G_k) - G_k) / gamma_k(G_k), k = 0..=n.
pub fn gbar(model: &FiniteFKModel, n: usize) -> Result<Vec<Vec<Rational>>> {
    let flow = model.flow_gamma(n)?;
    Ok((0..=n)
        .map(|k| {
            let g = model.potential(k);
            let eta_g = dot(&flow.gammas[k], g) / &flow.normalizers[k];
            let gamma_g = dot(&flow.gammas[k], g);
            g.iter().map(|gx| (&eta_g - gx) / &gamma_g).collect()
        })
        .collect())
}

/// Both sides of 1 - gamma^m_n(G_n)/gamma_n(G_n) = sum_p gamma^m_p(Gbar_p) for any
/// sequence of probability vectors m_0..m_n standing in for the eta^N_p.
pub fn telescoping_identity(model: &FiniteFKModel, etas: &[Vec<Rational>]) -> Result<(Rational, Rational)> {
    let n = etas.len().checked_sub(1).ok_or_else(|| crate::FkError::Domain("need at least one measure".into()))?;
    let flow = model.flow_gamma(n)?;
    let gb = gbar(model, n)?;
    let mut norm = Rational::one();
    let mut rhs = Rational::zero();
    for (p, e) in etas.iter().enumerate() {
        rhs += &norm * dot(e, &gb[p]);
        norm *= dot(e, model.potential(p));
    }
    let lhs = Rational::one() - norm / dot(&flow.gammas[n], model.potential(n));
    Ok((lhs, rhs))
}

/// Gbar_n^{(x)p} as a path function.
pub fn gbar_tensor(model: &FiniteFKModel, p: &QSeq) -> Result<PathTensorFunction> {
    let gb = gbar(model, p.horizon())?;
    let mut f = TensorFunction::constant(ProductSpace::new(vec![]), Rational::one())?;
    for (k, &pk) in p.q.0.iter().enumerate() {
        if pk > 0 {
            f = f.tensor(&TensorFunction::product(k, &vec![gb[k].clone(); pk])?)?;
        }
    }
    f.marked_symmetric()
}

/// d^k E_{q,n} for k = 0..=(n+1)(q-1).
pub fn e_moments(model: &FiniteFKModel, n: usize, q: usize) -> Result<Vec<Rational>> {
    if q == 0 {
        return Ok(vec![Rational::one()]);
    }
    let top = (n + 1) * (q - 1);
    let qf = factorial(q as u64);
    let mut out = vec![Rational::zero(); top + 1];
    for p in compositions(q, n + 1) {
        let seq = QSeq::new(&p)?;
        let coef = Rational::new(qf.clone(), MultiIndex(p.clone()).factorial());
        let vals = dqbar_table(model, &seq, &gbar_tensor(model, &seq)?)?;
        for (k, v) in vals.iter().enumerate() {
            out[k] += &coef * v;
        }
    }
    Ok(out)
}

/// F-bar = (F - eta_{n+1}^{(x)q}(F)) / gamma_{n+1}(1)^q for F on E_{n+1}^q.
pub fn f_bar(model: &FiniteFKModel, n1: usize, f: &TensorFunction) -> Result<TensorFunction> {
    let flow = model.flow_gamma(n1)?;
    let q = f.space.ncoords();
    let eta = &flow.gammas[n1].iter().map(|g| g / &flow.normalizers[n1]).collect::<Vec<_>>();
    let mean = ProductMeasure::tensor_power(n1, eta, q)?.integrate(f)?;
    let scale = pow_rat(&flow.normalizers[n1], -(q as i64));
    Ok(TensorFunction {
        space: f.space.clone(),
        values: f.values.iter().map(|v| (v - &mean) * &scale).collect(),
        symmetric: f.symmetric,
    })
}

fn check_terminal(model: &FiniteFKModel, n: usize, f: &TensorFunction) -> Result<usize> {
    if n + 1 > model.horizon() {
        return domain(format!("time n+1 = {} beyond model horizon {}", n + 1, model.horizon()));
    }
    let q = f.space.ncoords();
    if q == 0 || f.space.dims() != vec![model.size(n + 1); q] {
        return domain("F must live on E_{n+1}^q with q >= 1");
    }
    require_block_symmetric(f)?;
    Ok(q)
}

/// S^{(p+q)}_n(F) = Gbar_0^{p_0} (x) ... (x) (Gbar_n^{p_n} (x) Q_{n+1}^{(x)q} F-bar)_sym.
pub fn s_operator(model: &FiniteFKModel, p: &MultiIndex, f: &TensorFunction) -> Result<PathTensorFunction> {
    let n = p.len().checked_sub(1).ok_or_else(|| crate::FkError::Domain("p must have n+1 entries".into()))?;
    let q = check_terminal(model, n, f)?;
    let gb = gbar(model, n)?;
    let qf = model.tensor_kernel_apply(n + 1, q, &f_bar(model, n + 1, f)?)?;
    let pn = p.0[n];
    let last_space = ProductSpace::power(n, model.size(n), pn + q);
    let last = TensorFunction::from_fn(last_space, |x| {
        let g: Rational = x[..pn].iter().map(|&e| gb[n][e].clone()).product();
        g * qf.at(&x[pn..])
    })?
    .symmetrize()?;
    let mut out = TensorFunction::constant(ProductSpace::new(vec![]), Rational::one())?;
    for k in 0..n {
        if p.0[k] > 0 {
            out = out.tensor(&TensorFunction::product(k, &vec![gb[k].clone(); p.0[k]])?)?;
        }
    }
    out.tensor(&last)?.marked_symmetric()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PMode {
    /// P^N = E[(eta^N_{n+1})^{(.)q}]
    Standard,
    /// E[(eta^N_{n+1})^{(x)q}]
    Tilde,
}

/// (q-1+|p|)! / ((q-1)! p!)
fn p_coefficient(q: usize, p: &[usize]) -> Rational {
    let l: usize = p.iter().sum();
    let num = factorial((q - 1 + l) as u64);
    let den = factorial((q - 1) as u64) * MultiIndex(p.to_vec()).factorial();
    Rational::new(num, den)
}

/// Terms of d^k P over |p| < len_bound: (p, coefficient, value).
pub fn p_derivative_terms(model: &FiniteFKModel, k: usize, n: usize, f: &TensorFunction, mode: PMode, len_bound: usize) -> Result<Vec<(Vec<usize>, Rational, Rational)>> {
    let q = check_terminal(model, n, f)?;
    let mut out = Vec::new();
    let fb = f_bar(model, n + 1, f)?;
    for l in 0..len_bound {
        for p in compositions(l, n + 1) {
            let coef = p_coefficient(q, &p);
            let val = match mode {
                PMode::Standard => {
                    let mut pq = p.clone();
                    pq[n] += q;
                    let seq = QSeq::new(&pq)?;
                    dqbar(model, k, &seq, &s_operator(model, &MultiIndex(p.clone()), f)?)?
                }
                PMode::Tilde => {
                    let mut pq = p.clone();
                    pq.push(q);
                    let seq = QSeq::new(&pq)?;
                    let g = gbar_tensor(model, &QSeq::new(&p)?)?;
                    dqbar(model, k, &seq, &g.tensor(&fb)?.marked_symmetric()?)?
                }
            };
            out.push((p, coef, val));
        }
    }
    Ok(out)
}

/// d^k P_{n+1,q}(F): eta_{n+1}^{(x)q}(F) at k = 0, the |p| < 2k sum otherwise.
pub fn p_derivatives(model: &FiniteFKModel, k: usize, n: usize, f: &TensorFunction, mode: PMode) -> Result<Rational> {
    let q = check_terminal(model, n, f)?;
    if k == 0 {
        let flow = model.flow_gamma(n + 1)?;
        let eta: Vec<Rational> = flow.gammas[n + 1].iter().map(|g| g / &flow.normalizers[n + 1]).collect();
        return ProductMeasure::tensor_power(n + 1, &eta, q)?.integrate(f);
    }
    Ok(p_derivative_terms(model, k, n, f, mode, 2 * k)?.into_iter().map(|(_, c, v)| c * v).sum())
}

/// The closed first-order formula: pair term plus the Gbar-pair term.
pub fn explicit_dp1(model: &FiniteFKModel, n: usize, f: &TensorFunction) -> Result<Rational> {
    let q = check_terminal(model, n, f)?;
    let flow = model.flow_gamma(n + 1)?;
    let gb = gbar(model, n)?;
    let fb = f_bar(model, n + 1, f)?;
    let qr = Rational::from_integer(BigInt::from(q));
    let mut pair = Rational::zero();
    let mut cross = Rational::zero();
    for k in 0..=n {
        let s = model.semigroup(k, n + 1)?;
        let mut h = fb.clone();
        for c in 0..q {
            h = h.pull_kernel(c, &s)?;
        }
        h.space = ProductSpace::power(k, model.size(k), q);
        let gk = &flow.gammas[k];
        let weight = |x: &[usize]| -> Rational { x.iter().map(|&e| gk[e].clone()).product() };
        if q >= 2 {
            let mut acc = Rational::zero();
            for x in ProductSpace::power(k, model.size(k), q - 1).points()? {
                let mut y = vec![x[0]];
                y.extend_from_slice(&x);
                acc += weight(&x) * h.at(&y);
            }
            pair += &flow.normalizers[k] * acc;
        }
        for m in k..=n {
            let qg = crate::fk_model::mat_vec(&model.semigroup(k, m)?, &gb[m]);
            let mut acc = Rational::zero();
            for x in h.space.points()? {
                acc += weight(&x) * &qg[x[0]] * h.at(&x);
            }
            cross += &flow.normalizers[k] * acc;
        }
    }
    let half = Rational::new(BigInt::from(q * q.saturating_sub(1)), BigInt::from(2));
    Ok(half * pair + &qr * &qr * cross)
}

/// Both sides of 1/(1-u)^{q+1} = sum_{k<=m} (q+k)_k u^k/k! + u^m sum_{1<=k<=q+1} C(q+1+m, k+m) (u/(1-u))^k.
pub fn geometric_identity(q: usize, m: usize, u: &Rational) -> Result<(Rational, Rational)> {
    if u.is_one() {
        return domain("u = 1 is excluded");
    }
    let one = Rational::one();
    let lhs = pow_rat(&(&one - u), -((q + 1) as i64));
    let mut rhs = Rational::zero();
    for k in 0..=m {
        let c = Rational::new(factorial((q + k) as u64), factorial(q as u64) * factorial(k as u64));
        rhs += c * pow_rat(u, k as i64);
    }
    let ratio = u / (&one - u);
    let mut tail = Rational::zero();
    for k in 1..=q + 1 {
        tail += Rational::from_integer(binomial((q + 1 + m) as u64, (k + m) as u64)) * pow_rat(&ratio, k as i64);
    }
    rhs += pow_rat(u, m as i64) * tail;
    Ok((lhs, rhs))
}
