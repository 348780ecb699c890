//! Trees, forests and jungles (map sequences between vertex levels).
//!
//! One representation covers both the plain and the colored setting: every
//! vertex is black or white, white vertices are leaves, and a jungle map
//! sends the vertices of level k+1 (whites first, then blacks) to the black
//! vertices of level k. Plain forests are the all-black case.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{domain, resource, FkError, Result};
use crate::exact_num::{factorial, MultiIndex};

pub const FOREST_CAP: usize = 2_000_000;
pub const JUNGLE_CAP: usize = 5_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tree {
    white: bool,
    children: Vec<Tree>,
    code: String,
}

impl Ord for Tree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.code.len().cmp(&other.code.len()).then_with(|| self.code.cmp(&other.code))
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Tree {
    pub fn white_leaf() -> Tree {
        Tree { white: true, children: vec![], code: "[]".into() }
    }

    pub fn black(mut children: Vec<Tree>) -> Tree {
        children.sort();
        let mut code = String::from("(");
        for c in &children {
            code.push_str(&c.code);
        }
        code.push(')');
        Tree { white: false, children, code }
    }

    /// Black chain with `height` edges below the root.
    pub fn chain(height: usize) -> Tree {
        (0..height).fold(Tree::black(vec![]), |t, _| Tree::black(vec![t]))
    }

    pub fn is_white(&self) -> bool {
        self.white
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn height(&self) -> usize {
        self.children.iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    /// B(T): the forest of subtrees hanging off the root.
    pub fn remove_root(&self) -> Forest {
        Forest::from_trees(self.children.clone())
    }

    fn add_profile(&self, depth: usize, acc: &mut Vec<LevelCount>) {
        if acc.len() <= depth {
            acc.resize(depth + 1, LevelCount::default());
        }
        if self.white {
            acc[depth].white += 1;
        } else {
            acc[depth].black += 1;
        }
        for c in &self.children {
            c.add_profile(depth + 1, acc);
        }
    }

    fn add_parents(&self, depth: usize, acc: &mut Vec<usize>) {
        if !self.children.is_empty() {
            if acc.len() <= depth {
                acc.resize(depth + 1, 0);
            }
            acc[depth] += 1;
        }
        for c in &self.children {
            c.add_parents(depth + 1, acc);
        }
    }
}

/// Number of white and black vertices on one level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelCount {
    pub white: usize,
    pub black: usize,
}

impl LevelCount {
    pub fn black(n: usize) -> Self {
        LevelCount { white: 0, black: n }
    }

    pub fn total(&self) -> usize {
        self.white + self.black
    }

    fn le(&self, o: &LevelCount) -> bool {
        self.white <= o.white && self.black <= o.black
    }
}

/// A multiset of trees in normal form: distinct trees ascending, with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Forest {
    trees: Vec<(Tree, usize)>,
    code: String,
}

impl Ord for Forest {
    fn cmp(&self, other: &Self) -> Ordering {
        self.code.cmp(&other.code)
    }
}

impl PartialOrd for Forest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

impl Forest {
    pub fn empty() -> Forest {
        Forest { trees: vec![], code: String::new() }
    }

    pub fn from_trees(mut trees: Vec<Tree>) -> Forest {
        trees.sort();
        let mut grouped: Vec<(Tree, usize)> = Vec::new();
        for t in trees {
            match grouped.last_mut() {
                Some((last, m)) if *last == t => *m += 1,
                _ => grouped.push((t, 1)),
            }
        }
        let mut code = String::new();
        for (t, m) in &grouped {
            for _ in 0..*m {
                code.push_str(&t.code);
            }
        }
        Forest { trees: grouped, code }
    }

    pub fn parse(s: &str) -> Result<Forest> {
        fn tree(b: &[u8], pos: &mut usize) -> Result<Tree> {
            match (b.get(*pos), b.get(*pos + 1)) {
                (Some(b'['), Some(b']')) => {
                    *pos += 2;
                    Ok(Tree::white_leaf())
                }
                (Some(b'('), _) => {
                    *pos += 1;
                    let mut kids = Vec::new();
                    while b.get(*pos) != Some(&b')') {
                        if *pos >= b.len() {
                            return Err(FkError::Parse("unbalanced forest encoding".into()));
                        }
                        kids.push(tree(b, pos)?);
                    }
                    *pos += 1;
                    Ok(Tree::black(kids))
                }
                _ => Err(FkError::Parse(format!("unexpected character at offset {pos}"))),
            }
        }
        let b = s.trim().as_bytes();
        let mut pos = 0;
        let mut trees = Vec::new();
        while pos < b.len() {
            trees.push(tree(b, &mut pos)?);
        }
        Ok(Forest::from_trees(trees))
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Distinct trees with multiplicities.
    pub fn components(&self) -> &[(Tree, usize)] {
        &self.trees
    }

    pub fn trees(&self) -> impl Iterator<Item = &Tree> {
        self.trees.iter().flat_map(|(t, m)| std::iter::repeat(t).take(*m))
    }

    /// Height of the tallest tree; -1 for the empty forest.
    pub fn height(&self) -> isize {
        self.trees.iter().map(|(t, _)| t.height() as isize).max().unwrap_or(-1)
    }

    /// B(f): remove every root.
    pub fn remove_roots(&self) -> Forest {
        Forest::from_trees(self.trees().flat_map(|t| t.children.iter().cloned()).collect())
    }

    pub fn union(&self, other: &Forest) -> Forest {
        Forest::from_trees(self.trees().chain(other.trees()).cloned().collect())
    }

    /// Colored vertex profile, padded to `levels` entries (at least the height + 1).
    pub fn colored_profile(&self, levels: usize) -> Vec<LevelCount> {
        let mut acc = vec![LevelCount::default(); levels];
        for t in self.trees() {
            t.add_profile(0, &mut acc);
        }
        acc
    }

    /// v(f) padded to `levels` entries.
    pub fn profile(&self, levels: usize) -> MultiIndex {
        MultiIndex(self.colored_profile(levels).iter().map(|c| c.total()).collect())
    }

    fn levels(&self) -> usize {
        (self.height() + 1) as usize
    }

    /// |f|_k: number of vertices at level k with at least one child, k = 0..levels-2.
    pub fn parent_counts(&self, levels: usize) -> MultiIndex {
        let mut acc = vec![0; levels.saturating_sub(1)];
        for t in self.trees() {
            t.add_parents(0, &mut acc);
        }
        acc.truncate(levels.saturating_sub(1));
        acc.resize(levels.saturating_sub(1), 0);
        MultiIndex(acc)
    }

    /// c(f) = B(v(f)) - |f| over `levels` levels.
    pub fn coalescence(&self, levels: usize) -> MultiIndex {
        let v = self.profile(levels);
        let par = self.parent_counts(levels);
        MultiIndex((0..levels.saturating_sub(1)).map(|k| v.0[k + 1] - par.0[k]).collect())
    }

    /// A jungle in the class of this forest, on `levels` levels.
    pub fn to_jungle(&self, levels: usize) -> Result<Jungle> {
        if self.levels() > levels {
            return domain(format!("forest of height {} does not fit in {levels} levels", self.height()));
        }
        let mut level: Vec<&Tree> = self.trees().collect();
        level.sort_by_key(|t| !t.white);
        let mut profile = vec![count_colors(&level)];
        let mut maps = Vec::new();
        for _ in 1..levels {
            let blacks: Vec<&Tree> = level.iter().copied().filter(|t| !t.white).collect();
            let mut next: Vec<(&Tree, usize)> = Vec::new();
            for (bi, t) in blacks.iter().enumerate() {
                next.extend(t.children.iter().map(|c| (c, bi)));
            }
            // whites first, keeping the relative order inside each color
            next.sort_by_key(|(t, _)| !t.white);
            maps.push(next.iter().map(|&(_, p)| p).collect());
            level = next.into_iter().map(|(t, _)| t).collect();
            profile.push(count_colors(&level));
        }
        Jungle::new(profile, maps)
    }
}

fn count_colors(level: &[&Tree]) -> LevelCount {
    let white = level.iter().filter(|t| t.white).count();
    LevelCount { white, black: level.len() - white }
}

/// Map sequence a_0..a_n, a_k from level k+1 into the blacks of level k.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Jungle {
    profile: Vec<LevelCount>,
    maps: Vec<Vec<usize>>,
}

impl Jungle {
    pub fn new(profile: Vec<LevelCount>, maps: Vec<Vec<usize>>) -> Result<Jungle> {
        if profile.is_empty() || maps.len() + 1 != profile.len() {
            return domain("a jungle on L levels needs L-1 maps");
        }
        for (k, a) in maps.iter().enumerate() {
            if a.len() != profile[k + 1].total() {
                return domain(format!("map a_{k} has length {} but level {} has {} vertices", a.len(), k + 1, profile[k + 1].total()));
            }
            if a.iter().any(|&i| i >= profile[k].black) {
                return domain(format!("map a_{k} leaves the black vertices of level {k}"));
            }
        }
        Ok(Jungle { profile, maps })
    }

    /// All-black jungle on the given vertex counts.
    pub fn plain(profile: &[usize], maps: Vec<Vec<usize>>) -> Result<Jungle> {
        Jungle::new(profile.iter().map(|&p| LevelCount::black(p)).collect(), maps)
    }

    /// Identity maps on the constant profile q with n+2 levels.
    pub fn identity(n: usize, q: usize) -> Jungle {
        Jungle::plain(&vec![q; n + 2], vec![(0..q).collect(); n + 1]).expect("identity jungle is valid")
    }

    pub fn profile(&self) -> &[LevelCount] {
        &self.profile
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    /// |a_k| for each map.
    pub fn image_sizes(&self) -> MultiIndex {
        MultiIndex(
            self.maps
                .iter()
                .map(|a| {
                    let mut seen = a.clone();
                    seen.sort_unstable();
                    seen.dedup();
                    seen.len()
                })
                .collect(),
        )
    }

    /// Coalescence sequence k -> p_{k+1} - |a_k|.
    pub fn coalescence(&self) -> MultiIndex {
        let sizes = self.image_sizes();
        MultiIndex((0..self.maps.len()).map(|k| self.profile[k + 1].total() - sizes.0[k]).collect())
    }

    /// Relabel the vertices of `level` by the permutation `s` (within each color).
    pub fn act(&self, level: usize, s: &[usize]) -> Jungle {
        let mut maps = self.maps.clone();
        let lc = self.profile[level];
        // s permutes whites (0..w) and blacks (w..w+b) of `level` in place
        if level > 0 {
            let old = &self.maps[level - 1];
            let mut new = old.clone();
            for (i, &v) in old.iter().enumerate() {
                new[s[i]] = v;
            }
            maps[level - 1] = new;
        }
        if level < self.maps.len() {
            for v in maps[level].iter_mut() {
                *v = s[lc.white + *v] - lc.white;
            }
        }
        Jungle { profile: self.profile.clone(), maps }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coalescence {
    pub sequence: MultiIndex,
    pub degree: usize,
}

pub fn coalescence_of_jungle(j: &Jungle) -> Coalescence {
    let sequence = j.coalescence();
    Coalescence { degree: sequence.abs(), sequence }
}

pub fn coalescence_of_forest(f: &Forest, levels: usize) -> Coalescence {
    let sequence = f.coalescence(levels);
    Coalescence { degree: sequence.abs(), sequence }
}

/// Underlying non-planar forest of a jungle.
pub fn canonical_forest(j: &Jungle) -> Forest {
    let top = j.profile.len() - 1;
    let mut below: Vec<Tree> = (0..j.profile[top].total())
        .map(|i| if i < j.profile[top].white { Tree::white_leaf() } else { Tree::black(vec![]) })
        .collect();
    for k in (0..top).rev() {
        let lc = j.profile[k];
        let mut kids: Vec<Vec<Tree>> = vec![Vec::new(); lc.black];
        for (t, &parent) in below.into_iter().zip(&j.maps[k]) {
            kids[parent].push(t);
        }
        below = (0..lc.white).map(|_| Tree::white_leaf()).chain(kids.into_iter().map(Tree::black)).collect();
    }
    Forest::from_trees(below)
}

/// p! for a colored profile: product of white and black factorials.
pub fn profile_factorial(profile: &[LevelCount]) -> BigInt {
    profile.iter().map(|c| factorial(c.white as u64) * factorial(c.black as u64)).product()
}

/// prod_{i >= -1} s(B^i f)!, computed level by level.
pub fn symmetry_factorial_product(f: &Forest) -> BigInt {
    let mut acc: BigInt = f.trees.iter().map(|(_, m)| factorial(*m as u64)).product();
    let mut cur = f.clone();
    while !cur.is_empty() {
        for (t, m) in &cur.trees {
            let s: BigInt = t.remove_root().trees.iter().map(|(_, k)| factorial(*k as u64)).product();
            acc *= num_traits::pow(s, *m);
        }
        cur = cur.remove_roots();
    }
    acc
}

/// #(f) = p! / prod s(B^i f)!, the number of jungles in the class of f.
pub fn count_jungles(f: &Forest) -> Result<BigInt> {
    if f.is_empty() {
        return domain("count_jungles needs a nonempty forest");
    }
    let p = profile_factorial(&f.colored_profile(f.levels()));
    Ok(p / symmetry_factorial_product(f))
}

/// |Stab(f)| via |Stab(prod T_i^{m_i})| = prod m_i! |Stab(B T_i)|^{m_i}.
pub fn stabilizer_order(f: &Forest) -> Result<BigInt> {
    if f.is_empty() {
        return domain("stabilizer_order needs a nonempty forest");
    }
    Ok(stab_rec(f))
}

fn stab_rec(f: &Forest) -> BigInt {
    let mut acc = BigInt::one();
    for (t, m) in &f.trees {
        acc *= factorial(*m as u64) * num_traits::pow(stab_rec(&t.remove_root()), *m);
    }
    acc
}

/// Number of jungles with the given profile.
pub fn jungle_space_size(profile: &[LevelCount]) -> BigInt {
    (0..profile.len() - 1)
        .map(|k| num_traits::pow(BigInt::from(profile[k].black), profile[k + 1].total()))
        .product()
}

/// Every jungle of a profile, in lexicographic order of the concatenated maps.
pub fn all_jungles(profile: &[LevelCount]) -> Result<Vec<Jungle>> {
    if jungle_space_size(profile) > BigInt::from(JUNGLE_CAP) {
        return resource(format!("more than {JUNGLE_CAP} jungles"));
    }
    let lens: Vec<usize> = profile[1..].iter().map(|c| c.total()).collect();
    let mut radix = Vec::new();
    for (k, &len) in lens.iter().enumerate() {
        radix.extend(std::iter::repeat(profile[k].black).take(len));
    }
    if radix.iter().any(|&r| r == 0) {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    for digits in crate::fk_model::PointIter::new(radix) {
        let mut maps = Vec::with_capacity(lens.len());
        let mut pos = 0;
        for &len in &lens {
            maps.push(digits[pos..pos + len].to_vec());
            pos += len;
        }
        out.push(Jungle { profile: profile.to_vec(), maps });
    }
    Ok(out)
}

/// Plain profile q at each of n+2 levels.
pub fn constant_profile(n: usize, q: usize) -> Vec<LevelCount> {
    vec![LevelCount::black(q); n + 2]
}

fn within(c: &MultiIndex, max: Option<&MultiIndex>) -> bool {
    max.map_or(true, |r| c.0.iter().zip(&r.0).all(|(a, b)| a <= b))
}

/// Forest classes of a profile by brute canonicalization, sorted.
pub fn enumerate_profile_brute(profile: &[LevelCount], max_coal: Option<&MultiIndex>) -> Result<Vec<Forest>> {
    let mut seen: BTreeMap<String, Forest> = BTreeMap::new();
    for j in all_jungles(profile)? {
        if !within(&j.coalescence(), max_coal) {
            continue;
        }
        let f = canonical_forest(&j);
        seen.entry(f.code.clone()).or_insert(f);
    }
    Ok(seen.into_values().collect())
}

/// Forest classes of a profile by recursive construction, sorted.
pub fn enumerate_profile(profile: &[LevelCount], max_coal: Option<&MultiIndex>) -> Result<Vec<Forest>> {
    if let Some(r) = max_coal {
        if r.len() + 1 != profile.len() {
            return domain("coalescence bound must have one entry per map");
        }
    }
    let mut e = Enumerator::default();
    let mut out: Vec<Forest> = e
        .forests(&trim(profile))?
        .into_iter()
        .filter(|f| within(&f.coalescence(profile.len()), max_coal))
        .collect();
    out.sort();
    Ok(out)
}

/// Classes of F_{n,q}, optionally restricted to coalescence sequences <= max_coal.
pub fn enumerate_forests(n: usize, q: usize, max_coal: Option<&MultiIndex>) -> Result<Vec<Forest>> {
    if q == 0 {
        return domain("enumerate_forests needs q >= 1");
    }
    enumerate_profile(&constant_profile(n, q), max_coal)
}

fn trim(p: &[LevelCount]) -> Vec<LevelCount> {
    let mut v = p.to_vec();
    while v.last().map_or(false, |c| c.total() == 0) {
        v.pop();
    }
    v
}

#[derive(Default)]
struct Enumerator {
    forests: HashMap<Vec<LevelCount>, Vec<Forest>>,
    trees: HashMap<Vec<LevelCount>, Vec<Tree>>,
    /// forests and trees held across all memo entries
    stored: usize,
}

impl Enumerator {
    fn trees(&mut self, t: &[LevelCount]) -> Result<Vec<Tree>> {
        if let Some(v) = self.trees.get(t) {
            return Ok(v.clone());
        }
        let out = if t[0] == (LevelCount { white: 1, black: 0 }) {
            if t.len() == 1 { vec![Tree::white_leaf()] } else { vec![] }
        } else {
            self.forests(&t[1..])?.into_iter().map(|f| Tree::black(f.trees().cloned().collect())).collect()
        };
        self.stored += out.len();
        if self.stored > FOREST_CAP {
            return resource(format!("more than {FOREST_CAP} forests"));
        }
        self.trees.insert(t.to_vec(), out.clone());
        Ok(out)
    }

    fn forests(&mut self, p: &[LevelCount]) -> Result<Vec<Forest>> {
        if p.is_empty() {
            return Ok(vec![Forest::empty()]);
        }
        if let Some(v) = self.forests.get(p) {
            return Ok(v.clone());
        }
        // every tree whose profile fits under p, tagged with that profile
        let mut cands: Vec<(Tree, Vec<LevelCount>)> = Vec::new();
        let roots = [LevelCount { white: 1, black: 0 }, LevelCount { white: 0, black: 1 }];
        for root in roots {
            if !root.le(&p[0]) {
                continue;
            }
            for rest in sub_profiles(&p[1..])? {
                let mut t = vec![root];
                t.extend(rest);
                let t = trim(&t);
                for tree in self.trees(&t)? {
                    cands.push((tree, t.clone()));
                }
            }
        }
        cands.sort_by(|a, b| a.0.cmp(&b.0));
        cands.dedup_by(|a, b| a.0 == b.0);
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        pick(&cands, 0, p.to_vec(), &mut chosen, &mut out, FOREST_CAP - self.stored)?;
        self.stored += out.len();
        self.forests.insert(p.to_vec(), out.clone());
        Ok(out)
    }
}

fn sub_profiles(p: &[LevelCount]) -> Result<Vec<Vec<LevelCount>>> {
    let size = p.iter().try_fold(1usize, |acc, c| acc.checked_mul((c.white + 1) * (c.black + 1)));
    if size.map_or(true, |s| s > FOREST_CAP) {
        return resource(format!("more than {FOREST_CAP} candidate sub-profiles"));
    }
    let mut out = vec![vec![]];
    for c in p {
        let mut next = Vec::new();
        for v in &out {
            for w in 0..=c.white {
                for b in 0..=c.black {
                    let mut v = v.clone();
                    v.push(LevelCount { white: w, black: b });
                    next.push(v);
                }
            }
        }
        out = next;
    }
    Ok(out)
}

fn pick(
    cands: &[(Tree, Vec<LevelCount>)],
    start: usize,
    remaining: Vec<LevelCount>,
    chosen: &mut Vec<Tree>,
    out: &mut Vec<Forest>,
    cap: usize,
) -> Result<()> {
    if remaining.iter().all(|c| c.total() == 0) {
        out.push(Forest::from_trees(chosen.clone()));
        if out.len() > cap {
            return resource(format!("more than {FOREST_CAP} forests"));
        }
        return Ok(());
    }
    if remaining[0].total() == 0 {
        return Ok(());
    }
    for i in start..cands.len() {
        let (t, tp) = &cands[i];
        if tp.iter().zip(&remaining).all(|(a, b)| a.le(b)) && tp.len() <= remaining.len() {
            let mut rest = remaining.clone();
            for (r, a) in rest.iter_mut().zip(tp) {
                r.white -= a.white;
                r.black -= a.black;
            }
            chosen.push(t.clone());
            pick(cands, i, rest, chosen, out, cap)?;
            chosen.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_jungle_gives_chains() {
        let f = canonical_forest(&Jungle::identity(1, 2));
        assert_eq!(f.code(), "((()))((()))");
        assert_eq!(f.components(), &[(Tree::chain(2), 2)]);
        assert_eq!(coalescence_of_jungle(&Jungle::identity(1, 2)).degree, 0);
    }

    #[test]
    fn constant_maps_share_a_class() {
        let a = Jungle::plain(&[2, 2], vec![vec![0, 0]]).unwrap();
        let b = Jungle::plain(&[2, 2], vec![vec![1, 1]]).unwrap();
        assert_eq!(canonical_forest(&a), canonical_forest(&b));
        let c = coalescence_of_jungle(&a);
        assert_eq!((c.sequence, c.degree), (MultiIndex(vec![1]), 1));
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_forests(0, 2, None).unwrap().len(), 2);
        assert_eq!(enumerate_forests(1, 2, None).unwrap().len(), 4);
        for n in 0..=5 {
            assert_eq!(enumerate_forests(n, 1, None).unwrap().len(), 1);
        }
        let jungles = all_jungles(&constant_profile(1, 2)).unwrap();
        assert_eq!(jungles.len(), 16);
        let brute = enumerate_profile_brute(&constant_profile(1, 2), None).unwrap();
        assert_eq!(brute, enumerate_forests(1, 2, None).unwrap());
    }

    #[test]
    fn jungle_counts() {
        for f in enumerate_forests(1, 2, None).unwrap() {
            assert_eq!(count_jungles(&f).unwrap(), BigInt::from(4));
        }
        let two_chains = canonical_forest(&Jungle::identity(0, 2));
        assert_eq!(count_jungles(&two_chains).unwrap(), BigInt::from(2));
        assert_eq!(stabilizer_order(&two_chains).unwrap(), BigInt::from(2));
        let fork = canonical_forest(&Jungle::plain(&[2, 2], vec![vec![0, 0]]).unwrap());
        assert_eq!(stabilizer_order(&fork).unwrap(), BigInt::from(2));
        assert_eq!(count_jungles(&canonical_forest(&Jungle::identity(3, 1))).unwrap(), BigInt::from(1));
        let roots = Forest::from_trees(vec![Tree::chain(0); 4]);
        assert_eq!(stabilizer_order(&roots).unwrap(), BigInt::from(24));
    }

    #[test]
    fn coal_coal_class() {
        let j = Jungle::plain(&[2, 2, 2], vec![vec![0, 0], vec![0, 0]]).unwrap();
        let f = canonical_forest(&j);
        assert_eq!(f.coalescence(3), MultiIndex(vec![1, 1]));
        assert_eq!(coalescence_of_forest(&f, 3).degree, 2);
    }

    #[test]
    fn parse_roundtrip_and_representatives() {
        for f in enumerate_forests(2, 3, None).unwrap() {
            assert_eq!(Forest::parse(f.code()).unwrap(), f);
            let j = f.to_jungle(4).unwrap();
            assert_eq!(canonical_forest(&j), f);
        }
        assert!(Forest::parse("(()").is_err());
    }

    #[test]
    fn colored_leaves() {
        let f = Forest::parse("([][])").unwrap();
        let prof = f.colored_profile(2);
        assert_eq!(prof[1], LevelCount { white: 2, black: 0 });
        let j = f.to_jungle(2).unwrap();
        assert_eq!(canonical_forest(&j), f);
    }
}
