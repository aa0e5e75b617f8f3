//! Integer matrix normal forms and finitely presented abelian groups.
//!
//! Everything here is exact: Smith normal form over i128 with the four
//! change-of-basis matrices tracked, presentations Z^n / (relation lattice)
//! with canonical class coordinates, and a solver for linear systems over
//! the rationals mod 1 that produces an integer certificate when the system
//! is inconsistent.

use crate::phase::{rat_mod1, Rat};
use num_traits::Zero;
use std::fmt;

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<i128>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i128>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        IntMat {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(l, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[i128]) -> Vec<i128> {
        assert_eq!(self.cols, x.len(), "shape mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == IntMat::identity(self.rows)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let (x, y) = (self.get(a, j), self.get(b, j));
            self.set(a, j, y);
            self.set(b, j, x);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let (x, y) = (self.get(i, a), self.get(i, b));
            self.set(i, a, y);
            self.set(i, b, x);
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self.get(a, j);
            self.set(a, j, v);
        }
    }

    /// row[a] += c * row[b]
    fn add_row(&mut self, a: usize, b: usize, c: i128) {
        for j in 0..self.cols {
            let v = self.get(a, j) + c * self.get(b, j);
            self.set(a, j, v);
        }
    }

    /// col[a] += c * col[b]
    fn add_col(&mut self, a: usize, b: usize, c: i128) {
        for i in 0..self.rows {
            let v = self.get(i, a) + c * self.get(i, b);
            self.set(i, a, v);
        }
    }
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Smith decomposition u·a·v = d with d diagonal, entries nonnegative and
/// each dividing the next. All four transforms are unimodular and tracked
/// together with their inverses.
pub struct Smith {
    pub d: IntMat,
    pub u: IntMat,
    pub v: IntMat,
    pub u_inv: IntMat,
    pub v_inv: IntMat,
}

impl Smith {
    /// Diagonal entries, including zeros.
    pub fn diagonal(&self) -> Vec<i128> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d.get(i, i))
            .collect()
    }
}

pub fn smith_normal_form(a: &IntMat) -> Smith {
    let mut d = a.clone();
    let (m, n) = (d.rows, d.cols);
    let mut u = IntMat::identity(m);
    let mut u_inv = IntMat::identity(m);
    let mut v = IntMat::identity(n);
    let mut v_inv = IntMat::identity(n);

    // Row ops hit u on the left and u_inv with the inverse op on the right;
    // column ops hit v on the right and v_inv with the inverse on the left.
    macro_rules! row_swap {
        ($a:expr, $b:expr) => {{
            d.swap_rows($a, $b);
            u.swap_rows($a, $b);
            u_inv.swap_cols($a, $b);
        }};
    }
    macro_rules! col_swap {
        ($a:expr, $b:expr) => {{
            d.swap_cols($a, $b);
            v.swap_cols($a, $b);
            v_inv.swap_rows($a, $b);
        }};
    }
    macro_rules! row_add {
        ($a:expr, $b:expr, $c:expr) => {{
            d.add_row($a, $b, $c);
            u.add_row($a, $b, $c);
            u_inv.add_col($b, $a, -$c);
        }};
    }
    macro_rules! col_add {
        ($a:expr, $b:expr, $c:expr) => {{
            d.add_col($a, $b, $c);
            v.add_col($a, $b, $c);
            v_inv.add_row($b, $a, -$c);
        }};
    }

    let mut t = 0;
    while t < m.min(n) {
        // Find the entry of least nonzero magnitude in the submatrix.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                let x = d.get(i, j);
                if x != 0 && pivot.map_or(true, |(pi, pj)| x.abs() < d.get(pi, pj).abs()) {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        row_swap!(t, pi);
        col_swap!(t, pj);

        'reduce: loop {
            // Clear the pivot column by Euclidean steps.
            for i in (t + 1)..m {
                let x = d.get(i, t);
                if x != 0 {
                    let q = x / d.get(t, t);
                    row_add!(i, t, -q);
                    if d.get(i, t) != 0 {
                        row_swap!(t, i);
                    }
                    continue 'reduce;
                }
            }
            // Clear the pivot row.
            for j in (t + 1)..n {
                let x = d.get(t, j);
                if x != 0 {
                    let q = x / d.get(t, t);
                    col_add!(j, t, -q);
                    if d.get(t, j) != 0 {
                        col_swap!(t, j);
                    }
                    continue 'reduce;
                }
            }
            // The pivot must divide every remaining entry; fold in any row
            // that violates this and re-reduce.
            let p = d.get(t, t);
            for i in (t + 1)..m {
                for j in (t + 1)..n {
                    if d.get(i, j) % p != 0 {
                        row_add!(t, i, 1);
                        continue 'reduce;
                    }
                }
            }
            break;
        }
        if d.get(t, t) < 0 {
            d.negate_row(t);
            u.negate_row(t);
            for i in 0..m {
                let x = -u_inv.get(i, t);
                u_inv.set(i, t, x);
            }
        }
        t += 1;
    }

    debug_assert!(u.mul(a).mul(&v) == d, "u·a·v != d");
    debug_assert!(u.mul(&u_inv).is_identity());
    debug_assert!(v.mul(&v_inv).is_identity());

    Smith {
        d,
        u,
        v,
        u_inv,
        v_inv,
    }
}

/// Z^n modulo the lattice spanned by relation vectors. Class coordinates are
/// canonical: torsion entries reduced into [0, d) and free entries exact.
pub struct FPAbelianGroup {
    n_gens: usize,
    smith: Smith,
    rank: usize,
    torsion: Vec<i128>,
    /// Indices on the Smith diagonal with d > 1 (torsion coordinates).
    torsion_idx: Vec<usize>,
}

/// Canonical coordinates of a group element: one entry per torsion divisor
/// (reduced mod that divisor) and one per free Z summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassVector {
    pub torsion: Vec<i128>,
    pub free: Vec<i128>,
}

impl ClassVector {
    pub fn is_zero(&self) -> bool {
        self.torsion.iter().all(|x| *x == 0) && self.free.iter().all(|x| *x == 0)
    }
}

impl fmt::Display for ClassVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .torsion
            .iter()
            .map(|x| x.to_string())
            .chain(self.free.iter().map(|x| x.to_string()))
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FPAbelianGroup {
    /// Each relation is a length-`n_gens` integer vector declared to be zero.
    pub fn from_relations(n_gens: usize, relations: &[Vec<i128>]) -> Self {
        // Relations become columns: the group is the cokernel of this map.
        let mut mat = IntMat::zeros(n_gens, relations.len().max(1));
        for (j, rel) in relations.iter().enumerate() {
            assert_eq!(rel.len(), n_gens, "relation length mismatch");
            for (i, &x) in rel.iter().enumerate() {
                mat.set(i, j, x);
            }
        }
        let smith = smith_normal_form(&mat);
        let diag = smith.diagonal();
        let rank = diag.iter().filter(|&&x| x != 0).count();
        let torsion_idx: Vec<usize> = (0..rank).filter(|&i| diag[i] > 1).collect();
        let torsion: Vec<i128> = torsion_idx.iter().map(|&i| diag[i]).collect();
        FPAbelianGroup {
            n_gens,
            smith,
            rank,
            torsion,
            torsion_idx,
        }
    }

    pub fn n_generators(&self) -> usize {
        self.n_gens
    }

    /// Torsion divisors (each > 1, dividing the next) and the free rank.
    pub fn invariants(&self) -> (&[i128], usize) {
        (&self.torsion, self.n_gens - self.rank)
    }

    /// Canonical coordinates of the class of x (given in generator
    /// coordinates).
    pub fn class_of(&self, x: &[i128]) -> ClassVector {
        assert_eq!(x.len(), self.n_gens, "element length mismatch");
        let y = self.smith.u.mul_vec(x);
        let torsion = self
            .torsion_idx
            .iter()
            .zip(self.torsion.iter())
            .map(|(&i, &d)| y[i].rem_euclid(d))
            .collect();
        let free = y[self.rank..].to_vec();
        ClassVector { torsion, free }
    }

    pub fn classes_equal(&self, x: &[i128], z: &[i128]) -> bool {
        self.class_of(x) == self.class_of(z)
    }
}

/// Result of solving `coeffs · x ≡ rhs (mod 1)` for rational x.
pub enum Mod1Solution {
    /// A particular solution (not unique).
    Solvable { x: Vec<Rat> },
    /// The integer combination of the rows that vanishes yet pairs with the
    /// right-hand side to a non-integer: Σ combination[i]·coeffs[i] = 0 but
    /// Σ combination[i]·rhs[i] = value ∉ Z.
    Inconsistent { combination: Vec<i128>, value: Rat },
}

pub fn solve_mod1(coeffs: &IntMat, rhs: &[Rat]) -> Mod1Solution {
    assert_eq!(coeffs.rows, rhs.len(), "rhs length mismatch");
    let s = smith_normal_form(coeffs);
    let m = coeffs.rows;
    let n = coeffs.cols;
    // With x = v·z the system becomes d·z ≡ u·rhs (mod 1).
    let ut: Vec<Rat> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| Rat::from_integer(s.u.get(i, j) as i64) * rhs[j])
                .sum()
        })
        .collect();
    let diag = s.diagonal();
    let mut z = vec![Rat::zero(); n];
    for i in 0..m {
        let d = if i < diag.len() { diag[i] } else { 0 };
        if d == 0 {
            if !rat_mod1(ut[i]).is_zero() {
                let combination: Vec<i128> = (0..m).map(|j| s.u.get(i, j)).collect();
                return Mod1Solution::Inconsistent {
                    combination,
                    value: rat_mod1(ut[i]),
                };
            }
        } else {
            z[i] = ut[i] / Rat::from_integer(d as i64);
        }
    }
    let x: Vec<Rat> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Rat::from_integer(s.v.get(i, j) as i64) * z[j])
                .sum()
        })
        .collect();
    Mod1Solution::Solvable { x }
}
