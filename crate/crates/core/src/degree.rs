//! Degree vectors in N^k and Z^k, plus finite lattice boxes.
//!
//! Everything downstream is graded by these: morphism degrees, enumeration
//! bounds, skew-product offsets, and Bratteli levels.

use std::fmt;

/// Element of N^k. Componentwise partial order; `meet`/`join` are the lattice
/// operations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeVec(pub Vec<u32>);

/// Element of Z^k, used for skew-product offsets and potentials.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVec(pub Vec<i64>);

impl DegreeVec {
    pub fn zero(k: usize) -> Self {
        DegreeVec(vec![0; k])
    }

    /// The vector (1, 1, ..., 1).
    pub fn ones(k: usize) -> Self {
        DegreeVec(vec![1; k])
    }

    /// Standard basis vector e_c (colors are 0-based internally).
    pub fn unit(k: usize, c: usize) -> Self {
        let mut v = vec![0; k];
        v[c] = 1;
        DegreeVec(v)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Componentwise n <= m.
    pub fn le(&self, other: &Self) -> bool {
        debug_assert_eq!(self.k(), other.k());
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &Self) -> Self {
        DegreeVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference; None when not `other.le(self)`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if other.le(self) {
            Some(DegreeVec(
                self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
            ))
        } else {
            None
        }
    }

    pub fn meet(&self, other: &Self) -> Self {
        DegreeVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.min(b))
                .collect(),
        )
    }

    pub fn join(&self, other: &Self) -> Self {
        DegreeVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn to_int(&self) -> IntVec {
        IntVec(self.0.iter().map(|&x| x as i64).collect())
    }

    /// All n in N^k with n <= self, in lexicographic order.
    pub fn iter_below(&self) -> Vec<DegreeVec> {
        let mut out = vec![DegreeVec::zero(self.k())];
        for c in 0..self.k() {
            let mut next = Vec::with_capacity(out.len() * (self.0[c] as usize + 1));
            for base in &out {
                for val in 0..=self.0[c] {
                    let mut v = base.0.clone();
                    v[c] = val;
                    next.push(DegreeVec(v));
                }
            }
            out = next;
        }
        out.sort();
        out
    }
}

impl IntVec {
    pub fn zero(k: usize) -> Self {
        IntVec(vec![0; k])
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        IntVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        IntVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Self {
        IntVec(self.0.iter().map(|a| -a).collect())
    }

    pub fn le(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise max(x, 0) as a degree vector.
    pub fn positive_part(&self) -> DegreeVec {
        DegreeVec(self.0.iter().map(|&x| x.max(0) as u32).collect())
    }

    /// Componentwise max(-x, 0) as a degree vector.
    pub fn negative_part(&self) -> DegreeVec {
        DegreeVec(self.0.iter().map(|&x| (-x).max(0) as u32).collect())
    }

    pub fn to_degree(&self) -> Option<DegreeVec> {
        if self.0.iter().all(|&x| x >= 0) {
            Some(DegreeVec(self.0.iter().map(|&x| x as u32).collect()))
        } else {
            None
        }
    }
}

impl fmt::Debug for DegreeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", join_nums(&self.0))
    }
}

impl fmt::Display for DegreeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", join_nums(&self.0))
    }
}

impl fmt::Debug for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", join_nums(&self.0))
    }
}

impl fmt::Display for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", join_nums(&self.0))
    }
}

fn join_nums<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Finite box {n in Z^k : lo <= n <= hi}, the window for skew products.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBox {
    pub lo: IntVec,
    pub hi: IntVec,
}

impl LatticeBox {
    pub fn new(lo: IntVec, hi: IntVec) -> Option<Self> {
        if lo.k() == hi.k() && lo.le(&hi) {
            Some(LatticeBox { lo, hi })
        } else {
            None
        }
    }

    pub fn k(&self) -> usize {
        self.lo.k()
    }

    pub fn contains(&self, n: &IntVec) -> bool {
        self.lo.le(n) && n.le(&self.hi)
    }

    /// Componentwise extent hi - lo, as a degree vector.
    pub fn extent(&self) -> DegreeVec {
        self.hi.sub(&self.lo).to_degree().expect("lo <= hi")
    }

    /// All points of the box in lexicographic order.
    pub fn points(&self) -> Vec<IntVec> {
        let mut out = vec![Vec::new()];
        for c in 0..self.k() {
            let mut next = Vec::new();
            for base in &out {
                for val in self.lo.0[c]..=self.hi.0[c] {
                    let mut v = base.clone();
                    v.push(val);
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(IntVec).collect()
    }
}
