//! Finite-state Feynman-Kac models, their exact flows, and dense signed
//! measures / functions on finite product spaces.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, FkError, Result};
use crate::exact_num::{format_rational, parse_rational, Rational};

pub type Matrix = Vec<Vec<Rational>>;

/// Hard cap on the number of atoms of any dense measure or function.
pub const ATOM_CAP: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteFKModel {
    levels: Vec<usize>,
    eta0: Vec<Rational>,
    /// kernels[k - 1] is M_k : E_{k-1} -> E_k
    kernels: Vec<Matrix>,
    potentials: Vec<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    levels: Vec<usize>,
    eta0: Vec<serde_json::Value>,
    kernels: Vec<Vec<Vec<serde_json::Value>>>,
    potentials: Vec<Vec<serde_json::Value>>,
}

fn value_to_rational(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) if n.is_i64() => parse_rational(&n.to_string()),
        other => Err(FkError::Parse(format!("expected rational string or integer, got {other}"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaFlow {
    /// gamma_k(1) for k = 0..=n
    pub normalizers: Vec<Rational>,
    /// unnormalized gamma_k = eta_k * gamma_k(1)
    pub gammas: Vec<Vec<Rational>>,
}

impl FiniteFKModel {
    pub fn new(
        levels: Vec<usize>,
        eta0: Vec<Rational>,
        kernels: Vec<Matrix>,
        potentials: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        if levels.is_empty() || levels.iter().any(|&s| s == 0) {
            return domain("level sizes must be a nonempty list of positive integers");
        }
        let n = levels.len() - 1;
        if kernels.len() != n {
            return domain(format!("expected {n} kernels, got {}", kernels.len()));
        }
        if potentials.len() != n + 1 {
            return domain(format!("expected {} potentials, got {}", n + 1, potentials.len()));
        }
        if eta0.len() != levels[0] {
            return domain("eta0 length differs from |E_0|");
        }
        if eta0.iter().any(|x| x.is_negative()) || eta0.iter().sum::<Rational>() != Rational::one() {
            return domain("eta0 must be a probability vector");
        }
        for (k, m) in kernels.iter().enumerate() {
            if m.len() != levels[k] || m.iter().any(|r| r.len() != levels[k + 1]) {
                return domain(format!("kernel M_{} has wrong shape", k + 1));
            }
            for row in m {
                if row.iter().any(|x| x.is_negative()) || row.iter().sum::<Rational>() != Rational::one() {
                    return domain(format!("kernel M_{} is not row-stochastic", k + 1));
                }
            }
        }
        for (k, g) in potentials.iter().enumerate() {
            if g.len() != levels[k] {
                return domain(format!("potential G_{k} has wrong length"));
            }
            if g.iter().any(|x| !x.is_positive()) {
                return domain(format!("potential G_{k} must be strictly positive"));
            }
        }
        Ok(FiniteFKModel { levels, eta0, kernels, potentials })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: ModelFile = serde_json::from_str(s).map_err(|e| FkError::Parse(e.to_string()))?;
        let conv = |v: &Vec<serde_json::Value>| v.iter().map(value_to_rational).collect::<Result<Vec<_>>>();
        let eta0 = conv(&raw.eta0)?;
        let kernels = raw
            .kernels
            .iter()
            .map(|m| m.iter().map(conv).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let potentials = raw.potentials.iter().map(conv).collect::<Result<Vec<_>>>()?;
        FiniteFKModel::new(raw.levels, eta0, kernels, potentials)
    }

    pub fn to_json_string(&self) -> String {
        let conv = |v: &Vec<Rational>| {
            v.iter().map(|x| serde_json::Value::String(format_rational(x))).collect::<Vec<_>>()
        };
        let file = ModelFile {
            levels: self.levels.clone(),
            eta0: conv(&self.eta0),
            kernels: self.kernels.iter().map(|m| m.iter().map(conv).collect()).collect(),
            potentials: self.potentials.iter().map(conv).collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    /// Time-homogeneous model with horizon n.
    pub fn homogeneous(eta0: Vec<Rational>, kernel: Matrix, potential: Vec<Rational>, n: usize) -> Result<Self> {
        let d = eta0.len();
        FiniteFKModel::new(vec![d; n + 1], eta0, vec![kernel; n], vec![potential; n + 1])
    }

    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn size(&self, k: usize) -> usize {
        self.levels[k]
    }

    pub fn eta0(&self) -> &[Rational] {
        &self.eta0
    }

    /// M_k for k >= 1.
    pub fn kernel(&self, k: usize) -> &Matrix {
        &self.kernels[k - 1]
    }

    pub fn potential(&self, k: usize) -> &[Rational] {
        &self.potentials[k]
    }

    pub fn is_homogeneous(&self) -> bool {
        self.levels.windows(2).all(|w| w[0] == w[1])
            && self.kernels.windows(2).all(|w| w[0] == w[1])
            && self.potentials.windows(2).all(|w| w[0] == w[1])
    }

    fn check_time(&self, n: usize) -> Result<()> {
        if n > self.horizon() {
            return domain(format!("time {n} beyond model horizon {}", self.horizon()));
        }
        Ok(())
    }

    /// Q_k(x, y) = G_{k-1}(x) M_k(x, y), for k >= 1.
    pub fn q_matrix(&self, k: usize) -> Matrix {
        let g = &self.potentials[k - 1];
        self.kernel(k)
            .iter()
            .zip(g)
            .map(|(row, gx)| row.iter().map(|m| m * gx).collect())
            .collect()
    }

    pub fn flow_eta(&self, n: usize) -> Result<Vec<Vec<Rational>>> {
        self.check_time(n)?;
        let mut out = vec![self.eta0.clone()];
        for k in 1..=n {
            let prev = &out[k - 1];
            let next = vec_mat(prev, &self.q_matrix(k));
            let z: Rational = next.iter().sum();
            out.push(next.into_iter().map(|x| x / &z).collect());
        }
        Ok(out)
    }

    pub fn flow_gamma(&self, n: usize) -> Result<GammaFlow> {
        let etas = self.flow_eta(n)?;
        let mut normalizers = vec![Rational::one()];
        for k in 1..=n {
            let z = dot(&etas[k - 1], &self.potentials[k - 1]);
            normalizers.push(&normalizers[k - 1] * z);
        }
        let gammas = etas
            .iter()
            .zip(&normalizers)
            .map(|(eta, z)| eta.iter().map(|x| x * z).collect())
            .collect();
        Ok(GammaFlow { normalizers, gammas })
    }

    /// Q_{p,n} = Q_{p+1} ... Q_n, identity when p = n.
    pub fn semigroup(&self, p: usize, n: usize) -> Result<Matrix> {
        self.check_time(n)?;
        if p > n {
            return domain(format!("semigroup needs p <= n, got p={p}, n={n}"));
        }
        let mut acc = identity(self.levels[p]);
        for k in p + 1..=n {
            acc = mat_mul(&acc, &self.q_matrix(k));
        }
        Ok(acc)
    }

    /// gamma_n computed by the absorbed chain on E_k + {cemetery}. Needs G <= 1.
    pub fn absorbed_gamma(&self, n: usize) -> Result<Vec<Rational>> {
        self.check_time(n)?;
        if self.potentials.iter().flatten().any(|g| g > &Rational::one()) {
            return domain("absorption interpretation needs potentials bounded by 1");
        }
        // law over E_k followed by the cemetery mass
        let mut law: Vec<Rational> = self.eta0.iter().cloned().chain([Rational::zero()]).collect();
        for k in 1..=n {
            let d = self.levels[k];
            let mut next = vec![Rational::zero(); d + 1];
            next[d] = law[law.len() - 1].clone();
            for (x, mass) in law[..law.len() - 1].iter().enumerate() {
                let survive = &self.potentials[k - 1][x];
                next[d] += mass * (Rational::one() - survive);
                for (y, m) in self.kernel(k)[x].iter().enumerate() {
                    next[y] += mass * survive * m;
                }
            }
            law = next;
        }
        law.pop();
        Ok(law)
    }

    /// Q_k^{(x)q} F for F on E_k^q.
    pub fn tensor_kernel_apply(&self, k: usize, q: usize, f: &TensorFunction) -> Result<TensorFunction> {
        if k == 0 || k > self.horizon() {
            return domain(format!("Q_{k} undefined"));
        }
        if f.space.dims() != vec![self.levels[k]; q] {
            return domain("function does not live on E_k^q");
        }
        let qk = self.q_matrix(k);
        let mut g = f.clone();
        for j in 0..q {
            g = g.pull_kernel(j, &qk)?;
        }
        g.space = ProductSpace::power(k - 1, self.levels[k - 1], q);
        Ok(g)
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vec_mat(v: &[Rational], m: &Matrix) -> Vec<Rational> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = vec![Rational::zero(); cols];
    for (x, row) in v.iter().zip(m) {
        if x.is_zero() {
            continue;
        }
        for (o, e) in out.iter_mut().zip(row) {
            *o += x * e;
        }
    }
    out
}

pub fn mat_vec(m: &Matrix, v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().map(|row| vec_mat(row, b)).collect()
}

pub fn identity(d: usize) -> Matrix {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

/// One tensor block: `power` coordinates living on E_level (|E_level| = size).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    pub level: usize,
    pub size: usize,
    pub power: usize,
}

/// Row-major product space, blocks ordered by time then slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductSpace {
    pub blocks: Vec<Block>,
}

impl ProductSpace {
    pub fn new(blocks: Vec<Block>) -> Self {
        ProductSpace { blocks: blocks.into_iter().filter(|b| b.power > 0).collect() }
    }

    pub fn power(level: usize, size: usize, power: usize) -> Self {
        ProductSpace::new(vec![Block { level, size, power }])
    }

    /// One block per coordinate, sizes as given.
    pub fn from_dims(dims: &[usize]) -> Self {
        ProductSpace::new(dims.iter().map(|&size| Block { level: 0, size, power: 1 }).collect())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().flat_map(|b| std::iter::repeat(b.size).take(b.power)).collect()
    }

    pub fn ncoords(&self) -> usize {
        self.blocks.iter().map(|b| b.power).sum()
    }

    pub fn cardinality(&self) -> Result<usize> {
        let mut n: usize = 1;
        for d in self.dims() {
            n = n.checked_mul(d).filter(|&n| n <= ATOM_CAP).ok_or_else(|| {
                FkError::Resource(format!("product space {:?} exceeds {ATOM_CAP} atoms", self.dims()))
            })?;
        }
        Ok(n)
    }

    /// Coordinate ranges of the blocks.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.power;
                start += b.power;
                r
            })
            .collect()
    }

    pub fn points(&self) -> Result<PointIter> {
        self.cardinality()?;
        Ok(PointIter::new(self.dims()))
    }

    pub fn index_of(&self, x: &[usize]) -> usize {
        let dims = self.dims();
        x.iter().zip(&dims).fold(0, |acc, (xi, d)| acc * d + xi)
    }
}

/// Row-major enumeration of a product of ranges.
pub struct PointIter {
    dims: Vec<usize>,
    cur: Vec<usize>,
    done: bool,
}

impl PointIter {
    pub fn new(dims: Vec<usize>) -> Self {
        let done = dims.iter().any(|&d| d == 0);
        PointIter { cur: vec![0; dims.len()], dims, done }
    }
}

impl Iterator for PointIter {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut i = self.dims.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.cur[i] += 1;
            if self.cur[i] < self.dims[i] {
                break;
            }
            self.cur[i] = 0;
        }
        Some(out)
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductMeasure {
    pub space: ProductSpace,
    pub atoms: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorFunction {
    pub space: ProductSpace,
    pub values: Vec<Rational>,
    pub symmetric: bool,
}

fn check_map(map: &[usize], ncoords: usize) -> Result<()> {
    if let Some(bad) = map.iter().find(|&&i| i >= ncoords) {
        return domain(format!("map value {bad} outside [{ncoords}]"));
    }
    Ok(())
}

impl ProductMeasure {
    pub fn zero(space: ProductSpace) -> Result<Self> {
        let n = space.cardinality()?;
        Ok(ProductMeasure { space, atoms: vec![Rational::zero(); n] })
    }

    pub fn from_vec(level: usize, v: &[Rational]) -> Self {
        ProductMeasure { space: ProductSpace::power(level, v.len(), 1), atoms: v.to_vec() }
    }

    pub fn dirac(space: ProductSpace, x: &[usize]) -> Result<Self> {
        let mut m = ProductMeasure::zero(space)?;
        let i = m.space.index_of(x);
        m.atoms[i] = Rational::one();
        Ok(m)
    }

    pub fn tensor_power(level: usize, v: &[Rational], q: usize) -> Result<Self> {
        let mut m = ProductMeasure { space: ProductSpace::new(vec![]), atoms: vec![Rational::one()] };
        for _ in 0..q {
            m = m.tensor(&ProductMeasure::from_vec(level, v))?;
        }
        if q > 0 {
            m.space = ProductSpace::power(level, v.len(), q);
        }
        Ok(m)
    }

    pub fn tensor(&self, other: &ProductMeasure) -> Result<Self> {
        let mut blocks = self.space.blocks.clone();
        blocks.extend(other.space.blocks.iter().cloned());
        let space = ProductSpace::new(blocks);
        space.cardinality()?;
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(a * b);
            }
        }
        Ok(ProductMeasure { space, atoms })
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.iter().sum()
    }

    pub fn integrate(&self, f: &TensorFunction) -> Result<Rational> {
        if self.space.dims() != f.space.dims() {
            return domain("measure and function live on different spaces");
        }
        Ok(dot(&self.atoms, &f.values))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        ProductMeasure { space: self.space.clone(), atoms: self.atoms.iter().map(|a| a * c).collect() }
    }

    pub fn add_assign_scaled(&mut self, other: &ProductMeasure, c: &Rational) -> Result<()> {
        if self.space.dims() != other.space.dims() {
            return domain("adding measures on different spaces");
        }
        if c.is_zero() {
            return Ok(());
        }
        for (a, b) in self.atoms.iter_mut().zip(&other.atoms) {
            if !b.is_zero() {
                *a += b * c;
            }
        }
        Ok(())
    }

    pub fn sub(&self, other: &ProductMeasure) -> Result<Self> {
        let mut out = self.clone();
        out.add_assign_scaled(other, &-Rational::one())?;
        Ok(out)
    }

    /// Image of the measure under x -> (x_{map[0]}, ..., x_{map[m-1]}), i.e. m D_map.
    pub fn push_map(&self, map: &[usize], target: ProductSpace) -> Result<Self> {
        let src_dims = self.space.dims();
        check_map(map, src_dims.len())?;
        let tdims = target.dims();
        if tdims.len() != map.len() || map.iter().zip(&tdims).any(|(&i, &d)| src_dims[i] != d) {
            return domain("pushforward target does not match the selection map");
        }
        let tstr = strides(&tdims);
        // contribution of source coordinate i to the target index
        let mut weight = vec![0usize; src_dims.len()];
        for (j, &i) in map.iter().enumerate() {
            weight[i] += tstr[j];
        }
        let mut out = ProductMeasure::zero(target)?;
        for (x, a) in PointIter::new(src_dims).zip(&self.atoms) {
            if a.is_zero() {
                continue;
            }
            let t: usize = x.iter().zip(&weight).map(|(xi, w)| xi * w).sum();
            out.atoms[t] += a;
        }
        Ok(out)
    }

    /// Apply the kernel K to coordinate j: (mK)(.., y, ..) = sum_x m(.., x, ..) K(x, y).
    pub fn push_kernel(&self, j: usize, k: &Matrix) -> Result<Self> {
        let dims = self.space.dims();
        if j >= dims.len() || k.len() != dims[j] {
            return domain("kernel does not act on this coordinate");
        }
        let cols = k[0].len();
        let mut ndims = dims.clone();
        ndims[j] = cols;
        let space = retarget(&self.space, j, cols);
        let mut out = ProductMeasure::zero(space)?;
        let nstr = strides(&ndims);
        for (x, a) in PointIter::new(dims).zip(&self.atoms) {
            if a.is_zero() {
                continue;
            }
            let base: usize = x.iter().enumerate().filter(|&(i, _)| i != j).map(|(i, xi)| xi * nstr[i]).sum();
            for (y, kxy) in k[x[j]].iter().enumerate() {
                if !kxy.is_zero() {
                    out.atoms[base + y * nstr[j]] += a * kxy;
                }
            }
        }
        Ok(out)
    }

    /// Average over all permutations inside each block.
    pub fn symmetrize(&self) -> Result<Self> {
        let f = TensorFunction { space: self.space.clone(), values: self.atoms.clone(), symmetric: false };
        let s = f.symmetrize()?;
        Ok(ProductMeasure { space: s.space, atoms: s.values })
    }

    pub fn tv_norm(&self) -> Rational {
        tv_norm(self)
    }
}

/// Total variation as the sum of absolute atom values.
pub fn tv_norm(m: &ProductMeasure) -> Rational {
    m.atoms.iter().map(|a| a.abs()).sum()
}

fn retarget(space: &ProductSpace, j: usize, size: usize) -> ProductSpace {
    let mut blocks = Vec::new();
    let mut pos = 0;
    for b in &space.blocks {
        if j >= pos && j < pos + b.power {
            let before = j - pos;
            let after = b.power - before - 1;
            blocks.push(Block { power: before, ..b.clone() });
            blocks.push(Block { level: b.level, size, power: 1 });
            blocks.push(Block { power: after, ..b.clone() });
        } else {
            blocks.push(b.clone());
        }
        pos += b.power;
    }
    ProductSpace::new(blocks)
}

impl TensorFunction {
    pub fn from_fn(space: ProductSpace, f: impl Fn(&[usize]) -> Rational) -> Result<Self> {
        let values = space.points()?.map(|x| f(&x)).collect();
        Ok(TensorFunction { space, values, symmetric: false })
    }

    pub fn constant(space: ProductSpace, c: Rational) -> Result<Self> {
        let n = space.cardinality()?;
        Ok(TensorFunction { space, values: vec![c; n], symmetric: true })
    }

    /// f_1 (x) ... (x) f_q on E_level^q.
    pub fn product(level: usize, fs: &[Vec<Rational>]) -> Result<Self> {
        let size = fs.first().map_or(1, |f| f.len());
        if fs.iter().any(|f| f.len() != size) {
            return domain("tensor factors must share one state space");
        }
        let space = ProductSpace::power(level, size, fs.len());
        TensorFunction::from_fn(space, |x| x.iter().zip(fs).map(|(&xi, f)| f[xi].clone()).product())
    }

    /// Tensor product over consecutive blocks.
    pub fn tensor(&self, other: &TensorFunction) -> Result<Self> {
        let mut blocks = self.space.blocks.clone();
        blocks.extend(other.space.blocks.iter().cloned());
        let space = ProductSpace::new(blocks);
        space.cardinality()?;
        let mut values = Vec::with_capacity(self.values.len() * other.values.len());
        for a in &self.values {
            for b in &other.values {
                values.push(a * b);
            }
        }
        Ok(TensorFunction { space, values, symmetric: false })
    }

    pub fn at(&self, x: &[usize]) -> &Rational {
        &self.values[self.space.index_of(x)]
    }

    /// (D_map F)(x) = F(x_{map[0]}, ..., x_{map[q-1]}) with x ranging over `domain_space`.
    pub fn pull_map(&self, map: &[usize], domain_space: ProductSpace) -> Result<Self> {
        let ddims = domain_space.dims();
        check_map(map, ddims.len())?;
        let fdims = self.space.dims();
        if fdims.len() != map.len() || map.iter().zip(&fdims).any(|(&i, &d)| ddims[i] != d) {
            return domain("selection map does not match the function's space");
        }
        let fstr = strides(&fdims);
        let mut weight = vec![0usize; ddims.len()];
        for (j, &i) in map.iter().enumerate() {
            weight[i] += fstr[j];
        }
        let values = domain_space
            .points()?
            .map(|x| {
                let t: usize = x.iter().zip(&weight).map(|(xi, w)| xi * w).sum();
                self.values[t].clone()
            })
            .collect();
        Ok(TensorFunction { space: domain_space, values, symmetric: false })
    }

    /// (K F)(.., x, ..) = sum_y K(x, y) F(.., y, ..) on coordinate j.
    pub fn pull_kernel(&self, j: usize, k: &Matrix) -> Result<Self> {
        let dims = self.space.dims();
        if j >= dims.len() || k.is_empty() || k[0].len() != dims[j] {
            return domain("kernel does not act on this coordinate");
        }
        let rows = k.len();
        let space = retarget(&self.space, j, rows);
        let str_old = strides(&dims);
        let values = space
            .points()?
            .map(|x| {
                let base: usize =
                    x.iter().enumerate().filter(|&(i, _)| i != j).map(|(i, xi)| xi * str_old[i]).sum();
                let mut acc = Rational::zero();
                for (y, kxy) in k[x[j]].iter().enumerate() {
                    if !kxy.is_zero() {
                        acc += kxy * &self.values[base + y * str_old[j]];
                    }
                }
                acc
            })
            .collect();
        Ok(TensorFunction { space, values, symmetric: false })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        TensorFunction {
            space: self.space.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            symmetric: self.symmetric,
        }
    }

    pub fn add(&self, other: &TensorFunction) -> Result<Self> {
        if self.space.dims() != other.space.dims() {
            return domain("adding functions on different spaces");
        }
        Ok(TensorFunction {
            space: self.space.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            symmetric: self.symmetric && other.symmetric,
        })
    }

    /// Average over permutations within each block.
    pub fn symmetrize(&self) -> Result<Self> {
        let mut cur = self.values.clone();
        let dims = self.space.dims();
        for range in self.space.block_ranges() {
            let perms = permutations(range.len());
            if perms.len() == 1 {
                continue;
            }
            let count = Rational::from_integer(perms.len().into());
            let str_ = strides(&dims);
            let mut next = vec![Rational::zero(); cur.len()];
            for (idx, x) in PointIter::new(dims.clone()).enumerate() {
                let mut acc = Rational::zero();
                for p in &perms {
                    let mut t = idx;
                    for (slot, &src) in p.iter().enumerate() {
                        let (ci, si) = (range.start + slot, range.start + src);
                        t = t + x[si] * str_[ci] - x[ci] * str_[ci];
                    }
                    acc += &cur[t];
                }
                next[idx] = acc / &count;
            }
            cur = next;
        }
        Ok(TensorFunction { space: self.space.clone(), values: cur, symmetric: true })
    }

    /// Exact check of invariance under transpositions within each block.
    pub fn is_block_symmetric(&self) -> bool {
        let dims = self.space.dims();
        let str_ = strides(&dims);
        for range in self.space.block_ranges() {
            for c in range.start..range.end.saturating_sub(1) {
                for (idx, x) in PointIter::new(dims.clone()).enumerate() {
                    let t = idx + x[c + 1] * str_[c] + x[c] * str_[c + 1] - x[c] * str_[c] - x[c + 1] * str_[c + 1];
                    if self.values[idx] != self.values[t] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Sets the flag after verifying it.
    pub fn marked_symmetric(mut self) -> Result<Self> {
        if !self.is_block_symmetric() {
            return domain("function is not symmetric within its tensor blocks");
        }
        self.symmetric = true;
        Ok(self)
    }
}

/// D_a F for a : [q] -> [q].
pub fn selection_apply(a: &[usize], f: &TensorFunction) -> Result<TensorFunction> {
    if a.len() != f.space.ncoords() {
        return domain("map length differs from the tensor order");
    }
    check_map(a, a.len())?;
    f.pull_map(a, f.space.clone())
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_num::{rat, rint};
    use crate::fixtures;

    #[test]
    fn ref2_flows() {
        let m = fixtures::ref2();
        let eta = m.flow_eta(1).unwrap();
        assert_eq!(eta[0], vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(eta[1], vec![rat(1, 2), rat(1, 2)]);
        let g = m.flow_gamma(2).unwrap();
        assert_eq!(g.normalizers, vec![rint(1), rat(3, 4), rat(9, 16)]);
        let q01 = m.semigroup(0, 1).unwrap();
        assert_eq!(q01, vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 4), rat(1, 4)]]);
        assert_eq!(m.semigroup(1, 1).unwrap(), identity(2));
        let ones = vec![rint(1), rint(1)];
        assert_eq!(dot(&vec_mat(m.eta0(), &q01), &ones), rat(3, 4));
    }

    #[test]
    fn tilted_kernel_flow() {
        let k = vec![vec![rat(2, 3), rat(1, 3)], vec![rat(1, 3), rat(2, 3)]];
        let m = FiniteFKModel::homogeneous(vec![rat(1, 2), rat(1, 2)], k, vec![rint(1), rat(1, 2)], 1).unwrap();
        assert_eq!(m.flow_eta(1).unwrap()[1], vec![rat(5, 9), rat(4, 9)]);
    }

    #[test]
    fn validation() {
        let bad = FiniteFKModel::homogeneous(vec![rat(1, 2), rat(1, 2)], identity(2), vec![rint(1), rint(0)], 1);
        assert!(matches!(bad, Err(FkError::Domain(_))));
        let bad = FiniteFKModel::homogeneous(vec![rat(1, 2), rat(1, 3)], identity(2), vec![rint(1), rint(1)], 1);
        assert!(bad.is_err());
        let s = fixtures::ref2b().to_json_string();
        assert_eq!(FiniteFKModel::from_json_str(&s).unwrap(), fixtures::ref2b());
        assert!(matches!(FiniteFKModel::from_json_str("{"), Err(FkError::Parse(_))));
    }

    #[test]
    fn tensor_kernel_examples() {
        let m = fixtures::ref2();
        let f = vec![rint(1), rint(-1)];
        let ff = TensorFunction::product(1, &[f.clone(), f.clone()]).unwrap();
        let g = m.tensor_kernel_apply(1, 2, &ff).unwrap();
        assert_eq!(g.at(&[0, 0]), &rint(0));
        let one = TensorFunction::constant(ProductSpace::power(1, 2, 2), rint(1)).unwrap();
        let g = m.tensor_kernel_apply(1, 2, &one).unwrap();
        assert_eq!(g.at(&[0, 1]), &rat(1, 2));
        assert_eq!(g.at(&[1, 1]), &rat(1, 4));
    }

    #[test]
    fn selection_examples() {
        let space = ProductSpace::power(0, 2, 2);
        let f = TensorFunction::from_fn(space, |x| rint((3 * x[0] + x[1]) as i64)).unwrap();
        assert_eq!(selection_apply(&[0, 1], &f).unwrap(), f);
        let d = selection_apply(&[0, 0], &f).unwrap();
        assert_eq!(d.at(&[1, 0]), &rint(4));
        assert!(selection_apply(&[0, 2], &f).is_err());
    }

    #[test]
    fn tv_examples() {
        let space = ProductSpace::power(0, 2, 1);
        let m = ProductMeasure::dirac(space.clone(), &[0]).unwrap().sub(&ProductMeasure::dirac(space.clone(), &[1]).unwrap()).unwrap();
        assert_eq!(tv_norm(&m), rint(2));
        assert_eq!(tv_norm(&ProductMeasure::zero(space).unwrap()), rint(0));
    }

    #[test]
    fn push_and_pull_are_adjoint() {
        let m = fixtures::ref2b();
        let q = m.q_matrix(1);
        let mu = ProductMeasure::tensor_power(0, m.eta0(), 2).unwrap();
        let space = ProductSpace::new(vec![Block { level: 1, size: 3, power: 1 }, Block { level: 0, size: 2, power: 1 }]);
        let f = TensorFunction::from_fn(space, |x| rat((x[0] * 5 + x[1] * 2 + 1) as i64, 7)).unwrap();
        let lhs = mu.push_kernel(0, &q).unwrap().integrate(&f).unwrap();
        let rhs = mu.integrate(&f.pull_kernel(0, &q).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn symmetrize_is_idempotent_and_symmetric() {
        let space = ProductSpace::power(0, 3, 3);
        let f = TensorFunction::from_fn(space, |x| rint((x[0] * 9 + x[1] * 3 + x[2]) as i64)).unwrap();
        assert!(!f.is_block_symmetric());
        let s = f.symmetrize().unwrap();
        assert!(s.is_block_symmetric());
        assert_eq!(s.symmetrize().unwrap().values, s.values);
    }
}
