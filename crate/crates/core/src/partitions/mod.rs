//! Partitions of `{0, …, mq-1}` arranged in `m` rows of length `q`.
//!
//! Element `e` lies in row `e / q`. The API is 0-based throughout; the
//! canonical text form is 1-based.

mod densities;

use serde::Serialize;

pub use densities::{cumulant_density, for_each_permutation, product_density, MAX_DENSITY_ORDER};

use crate::error::{Error, Result};

/// Largest ground set `mq` accepted by the enumerators.
pub const MAX_GROUND_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PartitionClass {
    /// Π: at most one element of each row per block.
    All,
    /// Π_{≥2}: additionally every block has at least two elements.
    MinBlockTwo,
    /// Π̃: additionally σ* has a single block.
    Connected,
    /// Π̃_{≥2}
    ConnectedMinBlockTwo,
}

impl PartitionClass {
    fn needs_min_two(self) -> bool {
        matches!(
            self,
            PartitionClass::MinBlockTwo | PartitionClass::ConnectedMinBlockTwo
        )
    }

    fn needs_connected(self) -> bool {
        matches!(
            self,
            PartitionClass::Connected | PartitionClass::ConnectedMinBlockTwo
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    m: usize,
    q: usize,
    /// Restricted growth string: block ids in order of first appearance.
    membership: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// From a block-id per element; ids are relabeled to canonical order.
    pub fn from_membership(m: usize, q: usize, membership: &[usize]) -> Result<Self> {
        if membership.len() != m * q {
            return Err(Error::precondition("membership length must equal m·q"));
        }
        let mut relabel: Vec<Option<usize>> =
            vec![None; membership.iter().copied().max().map_or(0, |x| x + 1)];
        let mut next = 0;
        let canonical: Vec<usize> = membership
            .iter()
            .map(|&b| {
                *relabel[b].get_or_insert_with(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        let mut blocks = vec![Vec::new(); next];
        for (e, &b) in canonical.iter().enumerate() {
            blocks[b].push(e);
        }
        Ok(Partition {
            m,
            q,
            membership: canonical,
            blocks,
        })
    }

    pub fn from_blocks(m: usize, q: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let n = m * q;
        let mut membership = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::precondition("blocks must be non-empty"));
            }
            for &e in block {
                if e >= n || membership[e] != usize::MAX {
                    return Err(Error::precondition(
                        "blocks must be disjoint subsets of 0..mq",
                    ));
                }
                membership[e] = b;
            }
        }
        if membership.contains(&usize::MAX) {
            return Err(Error::precondition("blocks must cover 0..mq"));
        }
        Partition::from_membership(m, q, &membership)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blocks ordered by smallest element, elements ascending.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, element: usize) -> usize {
        self.membership[element]
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn row_of(&self, element: usize) -> usize {
        element / self.q
    }

    /// True when no block holds two elements of one row.
    pub fn respects_rows(&self) -> bool {
        self.blocks.iter().all(|b| {
            let mut mask = 0u64;
            b.iter().all(|&e| {
                let bit = 1u64 << self.row_of(e);
                let fresh = mask & bit == 0;
                mask |= bit;
                fresh
            })
        })
    }

    fn row_masks(&self) -> Vec<u64> {
        self.blocks
            .iter()
            .map(|b| b.iter().fold(0u64, |acc, &e| acc | 1 << self.row_of(e)))
            .collect()
    }

    /// 1-based block list, e.g. `{1,3},{2,4}`.
    pub fn to_canonical_string(&self) -> String {
        self.blocks
            .iter()
            .map(|b| {
                let inner: Vec<String> = b.iter().map(|e| (e + 1).to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Packed restricted growth string, 4 bits per element.
    pub fn code(&self) -> u64 {
        self.membership
            .iter()
            .fold(0u64, |acc, &b| acc << 4 | b as u64)
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let blocks: Vec<Vec<usize>> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|e| e + 1).collect())
            .collect();
        blocks.serialize(s)
    }
}

fn guard(m: usize, q: usize) -> Result<()> {
    if m == 0 || q == 0 {
        return Err(Error::precondition("m and q must be positive"));
    }
    if m * q > MAX_GROUND_SIZE {
        return Err(Error::Guard(format!(
            "m·q = {} exceeds the enumeration limit {MAX_GROUND_SIZE}",
            m * q
        )));
    }
    Ok(())
}

/// Rows merged through shared blocks form one class of σ*; returns the
/// number of classes.
fn row_components(m: usize, masks: &[u64]) -> usize {
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &mask in masks {
        let first = mask.trailing_zeros() as usize;
        let mut rest = mask & (mask - 1);
        while rest != 0 {
            let r = rest.trailing_zeros() as usize;
            let (a, b) = (find(&mut parent, first), find(&mut parent, r));
            parent[a] = b;
            rest &= rest - 1;
        }
    }
    (0..m).filter(|&r| find(&mut parent, r) == r).count()
}

struct Enumerator<'a, F: FnMut(&Partition)> {
    m: usize,
    q: usize,
    class: PartitionClass,
    membership: Vec<usize>,
    masks: Vec<u64>,
    sizes: Vec<usize>,
    visit: &'a mut F,
}

impl<F: FnMut(&Partition)> Enumerator<'_, F> {
    fn place(&mut self, e: usize) {
        let n = self.m * self.q;
        if e == n {
            if self.class.needs_min_two() && self.sizes.iter().any(|&s| s < 2) {
                return;
            }
            if self.class.needs_connected() && row_components(self.m, &self.masks) != 1 {
                return;
            }
            let p = Partition::from_membership(self.m, self.q, &self.membership).expect("valid");
            (self.visit)(&p);
            return;
        }
        if self.class.needs_min_two() {
            let singletons = self.sizes.iter().filter(|&&s| s == 1).count();
            if singletons > n - e {
                return;
            }
        }
        let bit = 1u64 << (e / self.q);
        for b in 0..self.masks.len() {
            if self.masks[b] & bit == 0 {
                self.masks[b] |= bit;
                self.sizes[b] += 1;
                self.membership[e] = b;
                self.place(e + 1);
                self.masks[b] &= !bit;
                self.sizes[b] -= 1;
            }
        }
        self.membership[e] = self.masks.len();
        self.masks.push(bit);
        self.sizes.push(1);
        self.place(e + 1);
        self.masks.pop();
        self.sizes.pop();
    }
}

/// Visit every partition of the class in lexicographic order of restricted
/// growth strings.
pub fn for_each_pim<F: FnMut(&Partition)>(
    m: usize,
    q: usize,
    class: PartitionClass,
    mut visit: F,
) -> Result<()> {
    guard(m, q)?;
    let mut en = Enumerator {
        m,
        q,
        class,
        membership: vec![0; m * q],
        masks: Vec::new(),
        sizes: Vec::new(),
        visit: &mut visit,
    };
    en.place(0);
    Ok(())
}

pub fn enumerate_pim(m: usize, q: usize, class: PartitionClass) -> Result<Vec<Partition>> {
    let mut out = Vec::new();
    for_each_pim(m, q, class, |p| out.push(p.clone()))?;
    Ok(out)
}

pub fn count_pim(m: usize, q: usize, class: PartitionClass) -> Result<u64> {
    let mut n = 0u64;
    for_each_pim(m, q, class, |_| n += 1)?;
    Ok(n)
}

/// Every set partition of `0..n` as a restricted growth string, in
/// lexicographic order.
pub fn for_each_set_partition<F: FnMut(&[usize])>(n: usize, mut visit: F) {
    fn rec<F: FnMut(&[usize])>(rgs: &mut Vec<usize>, n: usize, max: usize, visit: &mut F) {
        if rgs.len() == n {
            visit(rgs);
            return;
        }
        let limit = if rgs.is_empty() { 0 } else { max + 1 };
        for b in 0..=limit {
            rgs.push(b);
            rec(rgs, n, max.max(b), visit);
            rgs.pop();
        }
    }
    if n == 0 {
        visit(&[]);
        return;
    }
    rec(&mut Vec::with_capacity(n), n, 0, &mut visit);
}

/// σ*: rows `k, ℓ` share a class iff a chain of blocks links them. Classes
/// are sorted by smallest row.
pub fn sigma_star(sigma: &Partition) -> Vec<Vec<usize>> {
    let m = sigma.m();
    let mut label: Vec<usize> = (0..m).collect();
    // Merge by repeated relabeling; m ≤ 16 so this is cheap.
    let masks = sigma.row_masks();
    let mut changed = true;
    while changed {
        changed = false;
        for &mask in &masks {
            let rows: Vec<usize> = (0..m).filter(|r| mask >> r & 1 == 1).collect();
            let min = rows.iter().map(|&r| label[r]).min().unwrap();
            for &r in &rows {
                if label[r] != min {
                    let old = label[r];
                    for l in label.iter_mut() {
                        if *l == old {
                            *l = min;
                        }
                    }
                    changed = true;
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<Option<usize>> = vec![None; m];
    for r in 0..m {
        match seen[label[r]] {
            Some(c) => classes[c].push(r),
            None => {
                seen[label[r]] = Some(classes.len());
                classes.push(vec![r]);
            }
        }
    }
    classes
}

/// True iff the graph on rows, σ-blocks and ρ-classes (rows joined to the
/// blocks they meet, blocks joined to their ρ-class) is connected.
///
/// `rho` partitions the block indices `0..|σ|`.
pub fn is_indecomposable(sigma: &Partition, rho: &[Vec<usize>]) -> Result<bool> {
    let nb = sigma.len();
    let mut class_of = vec![usize::MAX; nb];
    for (c, class) in rho.iter().enumerate() {
        for &b in class {
            if b >= nb || class_of[b] != usize::MAX {
                return Err(Error::precondition(
                    "rho must partition the block indices of sigma",
                ));
            }
            class_of[b] = c;
        }
    }
    if class_of.contains(&usize::MAX) {
        return Err(Error::precondition("rho must cover every block of sigma"));
    }
    let masks = sigma.row_masks();
    let mut merged: Vec<u64> = vec![0; rho.len()];
    for (b, &mask) in masks.iter().enumerate() {
        merged[class_of[b]] |= mask;
    }
    Ok(row_components(sigma.m(), &merged) == 1)
}

/// `(⊗f)_σ`: the product `∏_ℓ f(row ℓ's arguments)` with every slot of
/// block `j` reading argument `j`.
pub fn collapse_tensor<'a, T, F>(f: F, sigma: &'a Partition) -> impl Fn(&[T]) -> f64 + 'a
where
    T: Clone + 'a,
    F: Fn(&[T]) -> f64 + 'a,
{
    move |args: &[T]| {
        assert_eq!(
            args.len(),
            sigma.len(),
            "collapsed function takes |σ| arguments"
        );
        let q = sigma.q();
        let mut row: Vec<T> = Vec::with_capacity(q);
        let mut prod = 1.0;
        for l in 0..sigma.m() {
            row.clear();
            row.extend((0..q).map(|j| args[sigma.block_of(l * q + j)].clone()));
            prod *= f(&row);
        }
        prod
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionCountReport {
    pub m: usize,
    pub q: usize,
    pub connected_min_two: u64,
    pub all: u64,
    /// `q^{qm}(m!)^q`
    pub bound: u128,
    pub holds: bool,
}

/// Counts `|Π̃^m_{≥2}(q)| ≤ |Π^m(q)| ≤ q^{qm}(m!)^q`.
pub fn partition_count_bound_check(m: usize, q: usize) -> Result<PartitionCountReport> {
    let connected_min_two = count_pim(m, q, PartitionClass::ConnectedMinBlockTwo)?;
    let all = count_pim(m, q, PartitionClass::All)?;
    let m_fact: u128 = (1..=m as u128).product();
    let bound = (q as u128).pow((q * m) as u32) * m_fact.pow(q as u32);
    Ok(PartitionCountReport {
        m,
        q,
        connected_min_two,
        all,
        bound,
        holds: connected_min_two <= all && (all as u128) <= bound,
    })
}
