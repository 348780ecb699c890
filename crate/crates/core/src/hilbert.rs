//! Truncated generating series counting forests by vertex profile and by
//! coalescence profile.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{domain, Result};
use crate::exact_num::MultiIndex;

/// Power series in x_0..x_{nx-1}, y_0..y_{ny-1}; x exponents capped at `max_degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    pub nx: usize,
    pub ny: usize,
    pub max_degree: usize,
    /// Optional cap on the total x degree.
    pub max_total: Option<usize>,
    coeffs: BTreeMap<Vec<usize>, BigInt>,
}

impl TruncatedSeries {
    pub fn one(nx: usize, ny: usize, max_degree: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![0; nx + ny], BigInt::one());
        TruncatedSeries { nx, ny, max_degree, max_total: None, coeffs }
    }

    fn fits(&self, e: &[usize]) -> bool {
        e[..self.nx].iter().all(|&d| d <= self.max_degree)
            && self.max_total.map_or(true, |t| e[..self.nx].iter().sum::<usize>() <= t)
    }

    /// Coefficient of x^px y^py; missing trailing entries are zero.
    pub fn coeff(&self, px: &[usize], py: &[usize]) -> BigInt {
        if px.len() > self.nx && px[self.nx..].iter().any(|&d| d > 0) {
            return BigInt::zero();
        }
        if py.len() > self.ny && py[self.ny..].iter().any(|&d| d > 0) {
            return BigInt::zero();
        }
        let mut key = vec![0; self.nx + self.ny];
        for (i, &d) in px.iter().take(self.nx).enumerate() {
            key[i] = d;
        }
        for (i, &d) in py.iter().take(self.ny).enumerate() {
            key[self.nx + i] = d;
        }
        self.coeffs.get(&key).cloned().unwrap_or_default()
    }

    /// Nonzero coefficients, keyed by (x exponents, y exponents).
    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &[usize], &BigInt)> {
        self.coeffs.iter().filter(|(_, c)| !c.is_zero()).map(move |(k, c)| (&k[..self.nx], &k[self.nx..], c))
    }

    /// Re-embed into more variables.
    fn widen(&self, nx: usize, ny: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let mut e = vec![0; nx + ny];
                e[..self.nx].copy_from_slice(&k[..self.nx]);
                e[nx..nx + self.ny].copy_from_slice(&k[self.nx..]);
                (e, c.clone())
            })
            .collect();
        TruncatedSeries { nx, ny, max_degree: self.max_degree, max_total: self.max_total, coeffs }
    }

    /// Multiply by (1 - u)^{-m} = sum_k C(m-1+k, k) u^k for the monomial u.
    fn mul_geometric_power(&mut self, u: &[usize], m: &BigInt) {
        if m.is_zero() || u.iter().all(|&d| d == 0) {
            return;
        }
        let mut out: BTreeMap<Vec<usize>, BigInt> = BTreeMap::new();
        for (e, c) in &self.coeffs {
            let mut cur = e.clone();
            let mut k: u64 = 0;
            // C(m-1+k, k) built incrementally
            let mut weight = BigInt::one();
            while self.fits(&cur) {
                *out.entry(cur.clone()).or_default() += c * &weight;
                k += 1;
                weight = weight * (m - 1 + BigInt::from(k)) / BigInt::from(k);
                for (x, d) in cur.iter_mut().zip(u) {
                    *x += d;
                }
            }
        }
        self.coeffs = out;
    }

    /// Substitute y = 1.
    pub fn specialize_y(&self) -> TruncatedSeries {
        let mut coeffs: BTreeMap<Vec<usize>, BigInt> = BTreeMap::new();
        for (k, c) in &self.coeffs {
            *coeffs.entry(k[..self.nx].to_vec()).or_default() += c;
        }
        TruncatedSeries { nx: self.nx, ny: 0, max_degree: self.max_degree, max_total: self.max_total, coeffs }
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let mut header: Vec<String> = (0..self.nx).map(|i| format!("x{i}")).collect();
        header.extend((0..self.ny).map(|i| format!("y{i}")));
        header.push("count".into());
        writeln!(w, "{}", header.join(","))?;
        for (k, c) in &self.coeffs {
            if c.is_zero() {
                continue;
            }
            let mut row: Vec<String> = k.iter().map(|d| d.to_string()).collect();
            row.push(c.to_string());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Profiles of exact height h (all entries positive) with entries <= d and sum <= total.
fn exact_height_profiles(h: usize, d: usize, total: Option<usize>) -> Vec<Vec<usize>> {
    let cap = total.unwrap_or(usize::MAX);
    let mut out = vec![vec![]];
    for _ in 0..=h {
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                let room = cap.saturating_sub(v.iter().sum());
                (1..=d.min(room)).map(move |x| {
                    let mut v = v.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

/// Hilbert series of forests of height <= n by vertex profile.
pub fn forest_hilbert(n: usize, d: usize) -> Result<TruncatedSeries> {
    forest_hilbert_capped(n, d, None)
}

/// As `forest_hilbert`, also dropping monomials of total x degree above `total`.
pub fn forest_hilbert_capped(n: usize, d: usize, total: Option<usize>) -> Result<TruncatedSeries> {
    if d == 0 {
        return domain("truncation degree must be at least 1");
    }
    let mut h = TruncatedSeries::one(1, 0, d);
    h.max_total = total;
    h.mul_geometric_power(&[1], &BigInt::one());
    for m in 1..=n {
        let prev = h.clone();
        h = h.widen(m + 1, 0);
        for p in exact_height_profiles(m - 1, d, total) {
            let count = prev.coeff(&p, &[]);
            let mut u = vec![1];
            u.extend(&p);
            h.mul_geometric_power(&u, &count);
        }
    }
    Ok(h)
}

/// Hilbert series of forests of height <= n by vertex and coalescence profile.
pub fn coalescent_hilbert(n: usize, d: usize) -> Result<TruncatedSeries> {
    coalescent_hilbert_capped(n, d, None)
}

/// As `coalescent_hilbert`, also dropping monomials of total x degree above `total`.
pub fn coalescent_hilbert_capped(n: usize, d: usize, total: Option<usize>) -> Result<TruncatedSeries> {
    if d == 0 {
        return domain("truncation degree must be at least 1");
    }
    let mut c = TruncatedSeries::one(1, 0, d);
    c.max_total = total;
    c.mul_geometric_power(&[1, 0], &BigInt::one());
    for m in 1..=n {
        let prev = c.clone();
        c = c.widen(m + 1, m);
        // coalescence sequences of forests by profile, read off the previous series
        let mut by_profile: BTreeMap<Vec<usize>, Vec<(Vec<usize>, BigInt)>> = BTreeMap::new();
        for (x, y, v) in prev.terms() {
            by_profile.entry(trim(x)).or_default().push((y.to_vec(), v.clone()));
        }
        for p in exact_height_profiles(m - 1, d, total) {
            let Some(ys) = by_profile.get(&p) else { continue };
            for (y, count) in ys.iter().cloned() {
                let mut u = vec![1];
                u.extend(&p);
                u.resize(m + 1, 0);
                u.push(p[0] - 1);
                u.extend(&y);
                u.resize(2 * m + 1, 0);
                c.mul_geometric_power(&u, &count);
            }
        }
    }
    Ok(c)
}

fn trim(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn in_v(p: &[usize]) -> bool {
    let t = trim(p);
    t.iter().all(|&x| x > 0)
}

/// |F_p| by the explicit recursion over child-profile compositions.
pub fn forest_count(p: &MultiIndex) -> Result<BigInt> {
    if !in_v(&p.0) {
        return domain(format!("{:?} is not a connected profile", p.0));
    }
    let mut memo = HashMap::new();
    Ok(count_rec(&trim(&p.0), &mut memo))
}

fn count_rec(p: &[usize], memo: &mut HashMap<Vec<usize>, BigInt>) -> BigInt {
    if p.len() <= 1 {
        return BigInt::one();
    }
    if let Some(v) = memo.get(p) {
        return v.clone();
    }
    let bp = &p[1..];
    // connected child profiles q <= B(p), including the empty one
    let mut cands: Vec<Vec<usize>> = vec![vec![]];
    for len in 1..=bp.len() {
        let mut acc = vec![vec![]];
        for &bound in &bp[..len] {
            acc = acc
                .into_iter()
                .flat_map(|v: Vec<usize>| {
                    (1..=bound).map(move |x| {
                        let mut v = v.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        cands.extend(acc);
    }
    let sizes: Vec<BigInt> = cands.iter().map(|q| count_rec(q, memo)).collect();
    let total = choose(&cands, &sizes, 0, bp.to_vec(), p[0]);
    memo.insert(p.to_vec(), total.clone());
    total
}

fn choose(cands: &[Vec<usize>], sizes: &[BigInt], i: usize, rem: Vec<usize>, trees: usize) -> BigInt {
    if i == cands.len() {
        return if trees == 0 && rem.iter().all(|&x| x == 0) { BigInt::one() } else { BigInt::zero() };
    }
    let q = &cands[i];
    let mut total = BigInt::zero();
    let mut rem_k = rem.clone();
    for k in 0..=trees {
        if k > 0 {
            let mut ok = true;
            for (r, &x) in rem_k.iter_mut().zip(q) {
                if *r < x {
                    ok = false;
                    break;
                }
                *r -= x;
            }
            if !ok {
                break;
            }
        }
        let ways = multichoose(&sizes[i], k);
        if !ways.is_zero() {
            total += ways * choose(cands, sizes, i + 1, rem_k.clone(), trees - k);
        }
    }
    total
}

// C(m - 1 + k, k)
fn multichoose(m: &BigInt, k: usize) -> BigInt {
    if k == 0 {
        return BigInt::one();
    }
    let mut acc = BigInt::one();
    for j in 1..=k {
        acc = acc * (m - 1 + BigInt::from(j)) / BigInt::from(j);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_series() {
        let h = forest_hilbert(0, 6).unwrap();
        for p in 0..=6 {
            assert_eq!(h.coeff(&[p], &[]), BigInt::one());
        }
        let c = coalescent_hilbert(0, 6).unwrap();
        for p in 0..=6 {
            assert_eq!(c.coeff(&[p], &[]), BigInt::one());
        }
    }

    #[test]
    fn small_coefficients() {
        let h1 = forest_hilbert(1, 4).unwrap();
        assert_eq!(h1.coeff(&[2, 2], &[]), BigInt::from(2));
        let h2 = forest_hilbert(2, 3).unwrap();
        assert_eq!(h2.coeff(&[1, 1, 1], &[]), BigInt::one());
        let c1 = coalescent_hilbert(1, 4).unwrap();
        assert_eq!(c1.coeff(&[2, 2], &[0]), BigInt::one());
        assert_eq!(c1.coeff(&[2, 2], &[1]), BigInt::one());
        assert_eq!(c1.coeff(&[1, 2], &[1]), BigInt::one());
    }

    #[test]
    fn counts() {
        assert_eq!(forest_count(&MultiIndex(vec![5])).unwrap(), BigInt::one());
        assert_eq!(forest_count(&MultiIndex(vec![2, 2])).unwrap(), BigInt::from(2));
        // a root over the two classes of profile (2, 2)
        assert_eq!(forest_count(&MultiIndex(vec![1, 2, 2])).unwrap(), BigInt::from(2));
        let brute = crate::forest_core::enumerate_profile_brute(
            &[1, 2, 2].map(crate::forest_core::LevelCount::black),
            None,
        )
        .unwrap();
        assert_eq!(brute.len(), 2);
        assert!(forest_count(&MultiIndex(vec![1, 0, 2])).is_err());
    }

    #[test]
    fn specialization_matches() {
        for n in 0..=2 {
            let h = forest_hilbert(n, 4).unwrap();
            let c = coalescent_hilbert(n, 4).unwrap().specialize_y();
            assert_eq!(h.coeffs, c.coeffs);
        }
    }
}
