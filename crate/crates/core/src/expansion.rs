//! Laurent expansion in 1/N of the particle block laws Q^N_{n,q}, indexed
//! by forests.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{domain, resource, Result};
use crate::exact_num::{
    big_to_rat, falling_factorial, factorial, pow_rat, rint, stirling_first, MultiIndex, Rational,
};
use crate::fk_model::{FiniteFKModel, PointIter, ProductMeasure, ProductSpace, TensorFunction};
use crate::forest_core::{
    constant_profile, count_jungles, enumerate_profile, Forest, Jungle,
};

/// Largest dense derivative measure an `ExpansionTable` will hold.
pub const TABLE_CAP: usize = 100_000;

/// Finite linear combination of maps [q] -> [q].
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedMapCombo {
    pub q: usize,
    pub terms: BTreeMap<Vec<usize>, Rational>,
}

impl WeightedMapCombo {
    pub fn zero(q: usize) -> Self {
        WeightedMapCombo { q, terms: BTreeMap::new() }
    }

    pub fn identity(q: usize) -> Self {
        let mut c = WeightedMapCombo::zero(q);
        c.terms.insert((0..q).collect(), Rational::one());
        c
    }

    pub fn is_empty(&self) -> bool {
        self.terms.values().all(|w| w.is_zero())
    }

    pub fn total_weight(&self) -> Rational {
        self.terms.values().sum()
    }

    /// D_a D_b = D_{a o b}, extended bilinearly.
    pub fn compose(&self, other: &WeightedMapCombo) -> Result<Self> {
        if self.q != other.q {
            return domain("composing combos of different arity");
        }
        let mut out = WeightedMapCombo::zero(self.q);
        for (a, wa) in &self.terms {
            for (b, wb) in &other.terms {
                let ab: Vec<usize> = b.iter().map(|&i| a[i]).collect();
                *out.terms.entry(ab).or_insert_with(Rational::zero) += wa * wb;
            }
        }
        out.terms.retain(|_, w| !w.is_zero());
        Ok(out)
    }

    /// sum_a w_a D_a F.
    pub fn apply(&self, f: &TensorFunction) -> Result<TensorFunction> {
        let mut acc = TensorFunction::constant(f.space.clone(), Rational::zero())?;
        for (a, w) in &self.terms {
            acc = acc.add(&crate::fk_model::selection_apply(a, f)?.scale(w))?;
        }
        acc.symmetric = false;
        Ok(acc)
    }

    /// m D_combo as a measure.
    pub fn push(&self, m: &ProductMeasure) -> Result<ProductMeasure> {
        let mut acc = ProductMeasure::zero(m.space.clone())?;
        for (a, w) in &self.terms {
            acc.add_assign_scaled(&m.push_map(a, m.space.clone())?, w)?;
        }
        Ok(acc)
    }
}

fn image_size(a: &[usize]) -> usize {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// All maps [q] -> [q] in lexicographic order.
pub fn all_maps(q: usize) -> impl Iterator<Item = Vec<usize>> {
    PointIter::new(vec![q; q])
}

/// L^N_q = N^{-q} sum_a ((N)_{|a|} / (q)_{|a|}) a.
pub fn l_operator(n_particles: usize, q: usize) -> Result<WeightedMapCombo> {
    if q == 0 || q > n_particles {
        return domain(format!("l_operator needs 1 <= q <= N, got q={q}, N={n_particles}"));
    }
    let nq = pow_rat(&rint(n_particles as i64), q as i64);
    let mut c = WeightedMapCombo::zero(q);
    for a in all_maps(q) {
        let p = image_size(&a) as u64;
        let w = Rational::new(falling_factorial(n_particles as u64, p), falling_factorial(q as u64, p)) / &nq;
        c.terms.insert(a, w);
    }
    Ok(c)
}

/// d^k L_q = sum_{q-k <= p <= q} s(p, q-k) (1/(q)_p) sum_{|a|=p} a.
pub fn dl_operator(k: usize, q: usize) -> Result<WeightedMapCombo> {
    let mut c = WeightedMapCombo::zero(q);
    if k >= q {
        return Ok(c);
    }
    for a in all_maps(q) {
        let p = image_size(&a);
        if p + k < q {
            continue;
        }
        let s = stirling_first(p, q - k)?;
        if s.is_zero() {
            continue;
        }
        c.terms.insert(a, Rational::new(s, falling_factorial(q as u64, p as u64)));
    }
    Ok(c)
}

fn check_horizon(model: &FiniteFKModel, n: usize) -> Result<()> {
    if n > model.horizon() {
        return domain(format!("time {n} beyond model horizon {}", model.horizon()));
    }
    Ok(())
}

/// Delta^a_{n,q} = eta_0^{(x)q} D_{a_0} Q_1^{(x)q} D_{a_1} ... Q_n^{(x)q} D_{a_n}, pushed forward.
pub fn delta_jungle(model: &FiniteFKModel, j: &Jungle, n: usize, q: usize) -> Result<ProductMeasure> {
    check_horizon(model, n)?;
    if j.profile() != constant_profile(n, q).as_slice() {
        return domain(format!("jungle profile does not match constant q={q} on {} levels", n + 2));
    }
    let mut m = ProductMeasure::tensor_power(0, model.eta0(), q)?;
    for (k, a) in j.maps().iter().enumerate() {
        if k > 0 {
            let qk = model.q_matrix(k);
            for c in 0..q {
                m = m.push_kernel(c, &qk)?;
            }
            m.space = ProductSpace::power(k, model.size(k), q);
        }
        m = m.push_map(a, ProductSpace::power(k, model.size(k), q))?;
    }
    Ok(m)
}

/// Delta^f for a forest class, through a representative jungle, symmetrized.
pub fn delta_measure(model: &FiniteFKModel, f: &Forest, n: usize, q: usize) -> Result<ProductMeasure> {
    let j = f.to_jungle(n + 2)?;
    delta_jungle(model, &j, n, q)?.symmetrize()
}

/// gamma_n^{(x)q}.
pub fn gamma_power(model: &FiniteFKModel, n: usize, q: usize) -> Result<ProductMeasure> {
    let g = model.flow_gamma(n)?;
    ProductMeasure::tensor_power(n, &g.gammas[n], q)
}

fn require_symmetric(f: &TensorFunction) -> Result<()> {
    if !f.is_block_symmetric() {
        return domain("F must be symmetric");
    }
    Ok(())
}

/// One forest class with its Delta measure and combinatorial weights.
#[derive(Clone, Debug)]
pub struct ForestTerm {
    pub forest: Forest,
    pub count: BigInt,
    /// |f|_k for k = 0..n
    pub parents: MultiIndex,
    pub delta: ProductMeasure,
}

/// The full class sum over F_{n,q} for one model.
#[derive(Clone, Debug)]
pub struct ForestSum {
    pub n: usize,
    pub q: usize,
    pub terms: Vec<ForestTerm>,
}

impl ForestSum {
    pub fn new(model: &FiniteFKModel, n: usize, q: usize, max_coal: Option<&MultiIndex>) -> Result<Self> {
        check_horizon(model, n)?;
        ProductSpace::power(n, model.size(n), q).cardinality()?;
        let forests = enumerate_profile(&constant_profile(n, q), max_coal)?;
        let terms = forests
            .into_par_iter()
            .map(|forest| {
                let delta = delta_jungle(model, &forest.to_jungle(n + 2)?, n, q)?;
                Ok(ForestTerm {
                    count: count_jungles(&forest)?,
                    parents: forest.parent_counts(n + 2),
                    delta,
                    forest,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ForestSum { n, q, terms })
    }

    fn space(&self) -> ProductSpace {
        self.terms[0].delta.space.clone()
    }

    /// Q^N_{n,q} as a measure (exact only against symmetric functions).
    pub fn q_measure(&self, n_particles: usize) -> Result<ProductMeasure> {
        if self.q > n_particles {
            return domain(format!("q={} exceeds N={n_particles}", self.q));
        }
        let norm = pow_rat(&rint(n_particles as i64), (self.q * (self.n + 1)) as i64);
        let qs = MultiIndex::constant(self.n + 1, self.q);
        let ns = MultiIndex::constant(self.n + 1, n_particles);
        let mut acc = ProductMeasure::zero(self.space())?;
        for t in &self.terms {
            let w = Rational::new(t.parents.falling_of(&ns)? * &t.count, t.parents.falling_of(&qs)?) / &norm;
            acc.add_assign_scaled(&t.delta, &w)?;
        }
        Ok(acc)
    }

    /// Coefficient of t^k in prod_levels sum_{r} s(p_level, q - r) t^r, per order k.
    fn order_weights(&self, t: &ForestTerm) -> Result<Vec<Rational>> {
        let q = self.q;
        let mut poly = vec![BigInt::one()];
        for &p in &t.parents.0 {
            let mut level = vec![BigInt::zero(); q];
            for (r, slot) in level.iter_mut().enumerate() {
                if q - r <= p {
                    *slot = stirling_first(p, q - r)?;
                }
            }
            let mut next = vec![BigInt::zero(); poly.len() + q - 1];
            for (i, a) in poly.iter().enumerate() {
                for (j, b) in level.iter().enumerate() {
                    next[i + j] += a * b;
                }
            }
            poly = next;
        }
        let qs = MultiIndex::constant(self.n + 1, q);
        let scale = Rational::new(t.count.clone(), t.parents.falling_of(&qs)?);
        Ok(poly.into_iter().map(|c| big_to_rat(c) * &scale).collect())
    }

    pub fn max_order(&self) -> usize {
        (self.q - 1) * (self.n + 1)
    }

    /// d^k Q_{n,q} for k = 0..=max_order as measures.
    pub fn laurent(&self) -> Result<ExpansionTable> {
        let mut orders = vec![ProductMeasure::zero(self.space())?; self.max_order() + 1];
        for t in &self.terms {
            for (k, w) in self.order_weights(t)?.iter().enumerate() {
                orders[k].add_assign_scaled(&t.delta, w)?;
            }
        }
        Ok(ExpansionTable { orders })
    }

    /// d^k Q_{n,q}(F) for k = 0..=max_order.
    pub fn laurent_values(&self, f: &TensorFunction) -> Result<Vec<Rational>> {
        require_symmetric(f)?;
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
}

/// Order k -> signed measure d^k Q.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionTable {
    pub orders: Vec<ProductMeasure>,
}

impl ExpansionTable {
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn evaluate(&self, f: &TensorFunction) -> Result<Vec<Rational>> {
        self.orders.iter().map(|m| m.integrate(f)).collect()
    }

    /// sum_k N^{-k} d^k.
    pub fn reconstruct(&self, n_particles: usize) -> Result<ProductMeasure> {
        let inv = Rational::new(BigInt::one(), BigInt::from(n_particles));
        let mut acc = ProductMeasure::zero(self.orders[0].space.clone())?;
        let mut w = Rational::one();
        for m in &self.orders {
            acc.add_assign_scaled(m, &w)?;
            w *= &inv;
        }
        Ok(acc)
    }
}

/// Exact Q^N_{n,q}(F) via the forest class sum.
pub fn q_exact(model: &FiniteFKModel, n_particles: usize, n: usize, q: usize, f: &TensorFunction) -> Result<Rational> {
    require_symmetric(f)?;
    if q > n_particles {
        return domain(format!("q={q} exceeds N={n_particles}"));
    }
    ForestSum::new(model, n, q, None)?.q_measure(n_particles)?.integrate(f)
}

/// d^k Q_{n,q}(F) for every order.
pub fn laurent_table(model: &FiniteFKModel, n: usize, q: usize, f: &TensorFunction) -> Result<Vec<Rational>> {
    ForestSum::new(model, n, q, None)?.laurent_values(f)
}

/// The derivative measures themselves, when small enough to hold.
pub fn laurent_measures(model: &FiniteFKModel, n: usize, q: usize) -> Result<ExpansionTable> {
    let size = ProductSpace::power(n, model.size(n), q).cardinality()?;
    if size > TABLE_CAP {
        return resource(format!("derivative measures with {size} atoms exceed {TABLE_CAP}"));
    }
    ForestSum::new(model, n, q, None)?.laurent()
}

/// Named forests of the low-order closed forms, as jungles on q^(n+2).
pub mod named {
    use super::*;

    fn base(n: usize, q: usize) -> Vec<Vec<usize>> {
        vec![(0..q).collect(); n + 1]
    }

    fn build(n: usize, q: usize, edits: &[(usize, Vec<(usize, usize)>)]) -> Jungle {
        let mut maps = base(n, q);
        for (level, changes) in edits {
            for &(i, v) in changes {
                maps[*level][i] = v;
            }
        }
        Jungle::plain(&vec![q; n + 2], maps).expect("named jungle is valid")
    }

    /// f_{1,k}: one pair coalescing at level k.
    pub fn f1(n: usize, q: usize, k: usize) -> Jungle {
        build(n, q, &[(k, vec![(1, 0)])])
    }

    /// f^1_{2,k}: one vertex with three children at level k.
    pub fn f2_triple(n: usize, q: usize, k: usize) -> Jungle {
        build(n, q, &[(k, vec![(1, 0), (2, 0)])])
    }

    /// f^2_{2,k}: two pairs coalescing at level k.
    pub fn f2_two_pairs(n: usize, q: usize, k: usize) -> Jungle {
        build(n, q, &[(k, vec![(1, 0), (3, 2)])])
    }

    /// f^1_{2,k,l}: one tree splitting at k, one branch splitting again at l.
    pub fn f2_nested(n: usize, q: usize, k: usize, l: usize) -> Jungle {
        build(n, q, &[(k, vec![(1, 0)]), (l, vec![(2, 1)])])
    }

    /// f^2_{2,k,l}: split at k, one branch stops at l while the other splits there.
    pub fn f2_stop_split(n: usize, q: usize, k: usize, l: usize) -> Jungle {
        build(n, q, &[(k, vec![(1, 0)]), (l, vec![(1, 0)])])
    }

    /// f^3_{2,k,l}: two trees, one pair coalescing at k and another at l.
    pub fn f2_two_trees(n: usize, q: usize, k: usize, l: usize) -> Jungle {
        build(n, q, &[(k, vec![(1, 0)]), (l, vec![(3, 2)])])
    }

    /// f^4_{2,k,l}: split at k with one branch stopping at l, plus a chain splitting at l.
    pub fn f2_stop_other(n: usize, q: usize, k: usize, l: usize) -> Jungle {
        build(n, q, &[(k, vec![(1, 0)]), (l, vec![(1, 2)])])
    }

    /// f_r = prod_k T_k^{r_k} U_k^{r_k}: pair j coalesces at level `levels[j]`.
    pub fn wick(n: usize, q: usize, levels: &[usize]) -> Jungle {
        let edits: Vec<(usize, Vec<(usize, usize)>)> =
            levels.iter().enumerate().map(|(j, &k)| (k, vec![(2 * j + 1, 2 * j)])).collect();
        build(n, q, &edits)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowOrder {
    pub d0: Rational,
    pub d1: Rational,
    pub d2: Option<Rational>,
}

/// The explicit first three orders (the second one needs q >= 4).
pub fn low_order_closed_form(model: &FiniteFKModel, n: usize, q: usize, f: &TensorFunction) -> Result<LowOrder> {
    require_symmetric(f)?;
    if q < 2 {
        return domain("the closed forms need q >= 2");
    }
    check_horizon(model, n)?;
    let d = |j: Jungle| -> Result<Rational> { delta_jungle(model, &j, n, q)?.integrate(f) };
    let gamma = gamma_power(model, n, q)?.integrate(f)?;
    let qq = rint(q as i64);
    let pairs = &qq * (&qq - rint(1)) / rint(2);
    let f1: Vec<Rational> = (0..=n).map(|k| d(named::f1(n, q, k))).collect::<Result<_>>()?;
    let d1 = &pairs * f1.iter().map(|v| v - &gamma).sum::<Rational>();
    let d2 = if q >= 4 {
        let triples = big_to_rat(factorial(q as u64)) / big_to_rat(factorial(q as u64 - 3) * 6);
        let mut same = Rational::zero();
        for k in 0..=n {
            same += d(named::f2_triple(n, q, k))?
                + rint(3) / rint(4) * (&qq - rint(3)) * d(named::f2_two_pairs(n, q, k))?
                - rint(3) / rint(2) * (&qq - rint(1)) * &f1[k]
                + (rint(3) * &qq - rint(1)) / rint(4) * &gamma;
        }
        let mut cross_a = Rational::zero();
        let mut cross_b = Rational::zero();
        for k in 0..=n {
            for l in k + 1..=n {
                cross_a += &gamma - (&f1[l] + &f1[k]);
                cross_b += d(named::f2_stop_split(n, q, k, l))?
                    + (&qq - rint(2)) * (d(named::f2_nested(n, q, k, l))? + d(named::f2_stop_other(n, q, k, l))?)
                    + (&qq - rint(2)) * (&qq - rint(3)) / rint(2) * d(named::f2_two_trees(n, q, k, l))?;
            }
        }
        Some(triples * same + &pairs * &pairs * cross_a + &pairs * cross_b)
    } else {
        None
    };
    Ok(LowOrder { d0: gamma, d1, d2 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TvRow {
    pub n_particles: usize,
    pub value: Rational,
    pub bound: Rational,
    pub within_bound: bool,
    /// value went up compared with the previous N
    pub increased: bool,
}

/// N * tv(Q^N - gamma^{(x)q}) against the bound (n+1) q (q-1).
pub fn tv_limit_check(model: &FiniteFKModel, n: usize, q: usize, ns: &[usize]) -> Result<Vec<TvRow>> {
    if model.levels().iter().enumerate().any(|(k, _)| model.potential(k).iter().any(|g| g > &Rational::one())) {
        return domain("the total variation bound assumes potentials bounded by 1");
    }
    let sum = ForestSum::new(model, n, q, None)?;
    let gamma = gamma_power(model, n, q)?;
    let bound = rint(((n + 1) * q * q.saturating_sub(1)) as i64);
    let mut rows: Vec<TvRow> = Vec::new();
    for &np in ns {
        // symmetrize so the measure is the one acting on symmetric functions
        let diff = sum.q_measure(np)?.symmetrize()?.sub(&gamma)?;
        let value = diff.tv_norm() * rint(np as i64);
        let increased = rows.last().map_or(false, |r| value > r.value);
        rows.push(TvRow { n_particles: np, within_bound: value <= bound, bound: bound.clone(), value, increased });
    }
    Ok(rows)
}

/// Exact check that integrating out one coordinate against gamma_n kills F.
pub fn in_b0(model: &FiniteFKModel, n: usize, f: &TensorFunction) -> Result<bool> {
    if !f.is_block_symmetric() {
        return Ok(false);
    }
    let q = f.space.ncoords();
    let g = model.flow_gamma(n)?;
    let col: Vec<Vec<Rational>> = g.gammas[n].iter().map(|x| vec![x.clone()]).collect();
    // integrate the last coordinate: kernel from a one-point space
    let row: Vec<Vec<Rational>> = vec![col.iter().map(|c| c[0].clone()).collect()];
    let reduced = f.pull_kernel(q - 1, &row)?;
    Ok(reduced.values.iter().all(|v| v.is_zero()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WickSlice {
    /// d^k Q(F) for k < q/2, straight from the forest expansion
    pub lower: Vec<Rational>,
    /// the pair-forest sum for d^{q/2}, for even q
    pub top: Option<Rational>,
}

/// Wick formula for F in B_0^sym.
pub fn wick_derivative(model: &FiniteFKModel, n: usize, q: usize, f: &TensorFunction) -> Result<WickSlice> {
    if !in_b0(model, n, f)? {
        return domain("F is not a centered symmetric function");
    }
    let half = q / 2;
    let max_coal = MultiIndex::constant(n + 1, half);
    let sum = ForestSum::new(model, n, q, Some(&max_coal))?;
    let mut lower = sum.laurent_values(f)?;
    lower.truncate((q + 1) / 2);
    let top = if q % 2 == 0 {
        let mut acc = Rational::zero();
        let qf = big_to_rat(factorial(q as u64)) / pow_rat(&rint(2), half as i64);
        // nondecreasing level assignments of the q/2 pairs
        for levels in PointIter::new(vec![n + 1; half]).filter(|v| v.windows(2).all(|w| w[0] <= w[1])) {
            let mut r = vec![0u64; n + 1];
            for &k in &levels {
                r[k] += 1;
            }
            let rf: BigInt = r.iter().map(|&x| factorial(x)).product();
            let v = delta_jungle(model, &named::wick(n, q, &levels), n, q)?.integrate(f)?;
            acc += &qf / big_to_rat(rf) * v;
        }
        Some(acc)
    } else {
        None
    };
    Ok(WickSlice { lower, top })
}
