//! Explicit finite groupoids with counting Haar system, and circle-valued
//! 2-cocycles on them.
//!
//! Elements are indexed 0..n with a partial composition table defined exactly
//! on pairs (x, y) with s(x) = r(y). Every structural law (associativity,
//! range/source compatibility, inverses, unit behavior) is checked
//! exhaustively at construction, which is affordable at the sizes this crate
//! targets.

use crate::degree::DegreeVec;
use crate::graph::{GraphError, KGraph};
use crate::phase::{rat_mod1, CircleValue, Rat};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroupoidError {
    #[error("malformed groupoid: {detail}")]
    Malformed { detail: String },
    #[error("elements {left} and {right} do not compose")]
    NotComposable { left: String, right: String },
    #[error("unknown element {name}")]
    UnknownElement { name: String },
    #[error("cocycle table invalid: {detail}")]
    CocycleInvalid { detail: String },
    #[error("parameter {t} is not a grid point")]
    OffGrid { t: Rat },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A finite groupoid: a small category with inverses, all tables explicit.
#[derive(Debug)]
pub struct FiniteGroupoid {
    names: Vec<String>,
    range: Vec<u32>,
    source: Vec<u32>,
    inverse: Vec<u32>,
    compose: BTreeMap<(u32, u32), u32>,
    units: Vec<u32>,
}

impl FiniteGroupoid {
    /// Build and exhaustively validate a groupoid from its tables.
    /// Units are derived as the common image of the range and source maps.
    pub fn new(
        names: Vec<String>,
        range: Vec<u32>,
        source: Vec<u32>,
        inverse: Vec<u32>,
        compose: BTreeMap<(u32, u32), u32>,
    ) -> Result<Self, GroupoidError> {
        let n = names.len();
        let fail = |detail: String| Err(GroupoidError::Malformed { detail });
        if range.len() != n || source.len() != n || inverse.len() != n {
            return fail(format!(
                "table lengths {}/{}/{} do not match {} elements",
                range.len(),
                source.len(),
                inverse.len(),
                n
            ));
        }
        {
            let mut seen = BTreeSet::new();
            for name in &names {
                if !seen.insert(name) {
                    return fail(format!("duplicate element name {name}"));
                }
            }
        }
        let idx_ok = |i: u32| (i as usize) < n;
        if !range.iter().chain(&source).chain(&inverse).all(|&i| idx_ok(i)) {
            return fail("table entry out of range".into());
        }
        let units: Vec<u32> = (0..n as u32)
            .filter(|&u| range[u as usize] == u || source[u as usize] == u)
            .collect();
        let g = FiniteGroupoid {
            names,
            range,
            source,
            inverse,
            compose,
            units,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), GroupoidError> {
        let n = self.len() as u32;
        let fail = |detail: String| Err(GroupoidError::Malformed { detail });
        for &u in &self.units {
            let i = u as usize;
            if self.range[i] != u || self.source[i] != u || self.inverse[i] != u {
                return fail(format!("unit {} is not its own range/source/inverse", self.names[i]));
            }
        }
        for x in 0..n {
            let i = x as usize;
            let (r, s) = (self.range[i], self.source[i]);
            if !self.is_unit(r) || !self.is_unit(s) {
                return fail(format!("range or source of {} is not a unit", self.names[i]));
            }
            let xi = self.inverse[i];
            if self.inverse[xi as usize] != x {
                return fail(format!("inversion is not involutive at {}", self.names[i]));
            }
            if self.range[xi as usize] != s || self.source[xi as usize] != r {
                return fail(format!("inverse of {} swaps range and source incorrectly", self.names[i]));
            }
        }
        // Composition is total on composable pairs and nowhere else.
        for x in 0..n {
            for y in 0..n {
                let composable = self.source[x as usize] == self.range[y as usize];
                match self.compose.get(&(x, y)) {
                    None if composable => {
                        return fail(format!(
                            "missing product {} · {}",
                            self.names[x as usize], self.names[y as usize]
                        ));
                    }
                    Some(&z) if !composable => {
                        return fail(format!(
                            "product {} · {} = {} declared on a non-composable pair",
                            self.names[x as usize], self.names[y as usize], self.names[z as usize]
                        ));
                    }
                    Some(&z) => {
                        if !(z < n)
                            || self.range[z as usize] != self.range[x as usize]
                            || self.source[z as usize] != self.source[y as usize]
                        {
                            return fail(format!(
                                "product {} · {} breaks range/source compatibility",
                                self.names[x as usize], self.names[y as usize]
                            ));
                        }
                    }
                    None => {}
                }
            }
        }
        for x in 0..n {
            let i = x as usize;
            let (r, s, xi) = (self.range[i], self.source[i], self.inverse[i]);
            if self.compose[&(r, x)] != x || self.compose[&(x, s)] != x {
                return fail(format!("units do not act trivially on {}", self.names[i]));
            }
            if self.compose[&(x, xi)] != r || self.compose[&(xi, x)] != s {
                return fail(format!("{} · inverse is not the range unit", self.names[i]));
            }
        }
        for (&(x, y), &xy) in &self.compose {
            for z in 0..n {
                if self.source[y as usize] != self.range[z as usize] {
                    continue;
                }
                let yz = self.compose[&(y, z)];
                if self.compose[&(xy, z)] != self.compose[&(x, yz)] {
                    return fail(format!(
                        "associativity fails on ({}, {}, {})",
                        self.names[x as usize], self.names[y as usize], self.names[z as usize]
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, x: u32) -> &str {
        &self.names[x as usize]
    }

    pub fn index_of(&self, name: &str) -> Result<u32, GroupoidError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as u32)
            .ok_or_else(|| GroupoidError::UnknownElement { name: name.into() })
    }

    pub fn units(&self) -> &[u32] {
        &self.units
    }

    pub fn is_unit(&self, x: u32) -> bool {
        self.range[x as usize] == x && self.source[x as usize] == x
    }

    pub fn range(&self, x: u32) -> u32 {
        self.range[x as usize]
    }

    pub fn source(&self, x: u32) -> u32 {
        self.source[x as usize]
    }

    pub fn inverse(&self, x: u32) -> u32 {
        self.inverse[x as usize]
    }

    pub fn compose(&self, x: u32, y: u32) -> Result<u32, GroupoidError> {
        self.compose.get(&(x, y)).copied().ok_or_else(|| {
            GroupoidError::NotComposable {
                left: self.names[x as usize].clone(),
                right: self.names[y as usize].clone(),
            }
        })
    }

    pub fn composable(&self, x: u32, y: u32) -> bool {
        self.source[x as usize] == self.range[y as usize]
    }

    pub fn composable_pairs(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.compose.iter().map(|(&(x, y), &z)| (x, y, z))
    }

    /// G^u: elements whose range is u (the fiber the counting measure lives on).
    pub fn range_fiber(&self, u: u32) -> Vec<u32> {
        (0..self.len() as u32).filter(|&x| self.range(x) == u).collect()
    }

    /// G_u: elements whose source is u.
    pub fn source_fiber(&self, u: u32) -> Vec<u32> {
        (0..self.len() as u32).filter(|&x| self.source(x) == u).collect()
    }

    /// The groupoid of n×n matrix units: elements e(i,j), composition
    /// e(i,j)·e(j,k) = e(i,k).
    pub fn matrix_units(n: u32) -> Self {
        let idx = |i: u32, j: u32| i * n + j;
        let mut names = Vec::new();
        let mut range = Vec::new();
        let mut source = Vec::new();
        let mut inverse = Vec::new();
        for i in 0..n {
            for j in 0..n {
                names.push(format!("e({i},{j})"));
                range.push(idx(i, i));
                source.push(idx(j, j));
                inverse.push(idx(j, i));
            }
        }
        let mut compose = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    compose.insert((idx(i, j), idx(j, k)), idx(i, k));
                }
            }
        }
        Self::new(names, range, source, inverse, compose)
            .expect("matrix unit groupoid is well formed")
    }

    /// The product of cyclic groups Z/n_1 × ... × Z/n_k as a one-unit
    /// groupoid. Element index encodes the tuple with the last coordinate
    /// varying fastest; names are the tuples.
    pub fn product_of_cyclics(orders: &[u32]) -> Self {
        assert!(!orders.is_empty() && orders.iter().all(|&n| n > 0));
        let total: u32 = orders.iter().product();
        let decode = |mut i: u32| -> Vec<u32> {
            let mut t = vec![0; orders.len()];
            for (pos, &n) in orders.iter().enumerate().rev() {
                t[pos] = i % n;
                i /= n;
            }
            t
        };
        let encode = |t: &[u32]| -> u32 {
            t.iter().zip(orders).fold(0, |acc, (&a, &n)| acc * n + a)
        };
        let mut names = Vec::new();
        let mut inverse = Vec::new();
        for i in 0..total {
            let t = decode(i);
            names.push(format!(
                "({})",
                t.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
            ));
            let neg: Vec<u32> = t.iter().zip(orders).map(|(&a, &n)| (n - a) % n).collect();
            inverse.push(encode(&neg));
        }
        let mut compose = BTreeMap::new();
        for i in 0..total {
            let a = decode(i);
            for j in 0..total {
                let b = decode(j);
                let sum: Vec<u32> =
                    a.iter().zip(&b).zip(orders).map(|((&x, &y), &n)| (x + y) % n).collect();
                compose.insert((i, j), encode(&sum));
            }
        }
        Self::new(names, vec![0; total as usize], vec![0; total as usize], inverse, compose)
            .expect("finite abelian group is well formed")
    }

    /// Decode an element of a `product_of_cyclics` groupoid back to its tuple.
    pub fn cyclic_tuple(&self, x: u32, orders: &[u32]) -> Vec<u32> {
        let mut i = x;
        let mut t = vec![0; orders.len()];
        for (pos, &n) in orders.iter().enumerate().rev() {
            t[pos] = i % n;
            i /= n;
        }
        t
    }

    /// The relation "same source" on morphisms of degree <= depth: elements
    /// are pairs (mu, nu) sharing a source, composing along matching middle
    /// legs. This is the finite shadow of cylinder-set combinatorics at the
    /// given depth.
    pub fn from_kgraph_pairs(graph: &KGraph, depth: &DegreeVec) -> Result<Self, GroupoidError> {
        let mut members = Vec::new();
        for v in 0..graph.skeleton().vertex_count() as u32 {
            let with_source: Vec<_> = graph
                .morphisms_with_source(v)
                .into_iter()
                .filter(|m| m.degree().le(depth))
                .collect();
            for mu in &with_source {
                for nu in &with_source {
                    members.push((mu.clone(), nu.clone()));
                }
            }
        }
        members.sort();
        let key_of = |m: &crate::graph::Morphism| (m.degree().clone(), m.range(), m.word().to_vec());
        let index: BTreeMap<_, _> = members
            .iter()
            .enumerate()
            .map(|(i, (mu, nu))| ((key_of(mu), key_of(nu)), i as u32))
            .collect();
        let mut names = Vec::new();
        let mut range = Vec::new();
        let mut source = Vec::new();
        let mut inverse = Vec::new();
        for (mu, nu) in &members {
            names.push(format!(
                "[{}|{}]",
                graph.display_morphism(mu),
                graph.display_morphism(nu)
            ));
            range.push(index[&(key_of(mu), key_of(mu))]);
            source.push(index[&(key_of(nu), key_of(nu))]);
            inverse.push(index[&(key_of(nu), key_of(mu))]);
        }
        let mut compose = BTreeMap::new();
        for (i, (mu, nu)) in members.iter().enumerate() {
            for (j, (mu2, rho)) in members.iter().enumerate() {
                if nu == mu2 {
                    compose.insert(
                        (i as u32, j as u32),
                        index[&(key_of(mu), key_of(rho))],
                    );
                }
            }
        }
        Self::new(names, range, source, inverse, compose)
    }

    /// The index of the pair (mu, nu) in a `from_kgraph_pairs` groupoid,
    /// looked up by display name.
    pub fn pair_index(
        &self,
        graph: &KGraph,
        mu: &crate::graph::Morphism,
        nu: &crate::graph::Morphism,
    ) -> Result<u32, GroupoidError> {
        self.index_of(&format!(
            "[{}|{}]",
            graph.display_morphism(mu),
            graph.display_morphism(nu)
        ))
    }
}

/// A circle-valued 2-cocycle on a finite groupoid, tabulated on the
/// composable pairs.
#[derive(Debug, Clone)]
pub struct GroupoidCocycle {
    groupoid: Arc<FiniteGroupoid>,
    table: BTreeMap<(u32, u32), CircleValue>,
}

impl GroupoidCocycle {
    /// Checked constructor: the table must cover exactly the composable
    /// pairs, equal one whenever either factor is a unit, and satisfy
    /// ω(x,y)·ω(xy,z) = ω(x,yz)·ω(y,z) on every composable triple.
    pub fn new(
        groupoid: Arc<FiniteGroupoid>,
        table: BTreeMap<(u32, u32), CircleValue>,
    ) -> Result<Self, GroupoidError> {
        let c = GroupoidCocycle { groupoid, table };
        c.verify()?;
        Ok(c)
    }

    /// Unchecked constructor for negative controls and corrupted tables.
    pub fn new_unchecked(
        groupoid: Arc<FiniteGroupoid>,
        table: BTreeMap<(u32, u32), CircleValue>,
    ) -> Self {
        GroupoidCocycle { groupoid, table }
    }

    pub fn trivial(groupoid: Arc<FiniteGroupoid>) -> Self {
        let table = groupoid
            .composable_pairs()
            .map(|(x, y, _)| ((x, y), CircleValue::one()))
            .collect();
        GroupoidCocycle { groupoid, table }
    }

    /// The coboundary of a pointwise phase β with β = 1 on units:
    /// ω(x,y) = β(x)·β(y)·β(xy)^{-1}. Always a normalized cocycle.
    pub fn coboundary(
        groupoid: Arc<FiniteGroupoid>,
        beta: &[CircleValue],
    ) -> Result<Self, GroupoidError> {
        if beta.len() != groupoid.len() {
            return Err(GroupoidError::CocycleInvalid {
                detail: format!(
                    "phase table has {} entries for {} elements",
                    beta.len(),
                    groupoid.len()
                ),
            });
        }
        for &u in groupoid.units() {
            if !beta[u as usize].is_one() {
                return Err(GroupoidError::CocycleInvalid {
                    detail: format!("phase is not 1 at unit {}", groupoid.name(u)),
                });
            }
        }
        let table = groupoid
            .composable_pairs()
            .map(|(x, y, xy)| {
                let v = beta[x as usize]
                    .mul(beta[y as usize])
                    .mul(beta[xy as usize].conj());
                ((x, y), v)
            })
            .collect();
        Ok(GroupoidCocycle { groupoid, table })
    }

    /// ω(a,b) = e^{2πi Σ θ_{ij} a_i b_j} on a `product_of_cyclics` groupoid.
    /// Well-definedness requires θ_{ij}·n_i and θ_{ij}·n_j integral.
    pub fn cyclic_bicharacter(
        groupoid: Arc<FiniteGroupoid>,
        orders: &[u32],
        theta: &[Vec<Rat>],
    ) -> Result<Self, GroupoidError> {
        let total: u32 = orders.iter().product();
        if groupoid.len() != total as usize {
            return Err(GroupoidError::CocycleInvalid {
                detail: "groupoid size does not match the cyclic orders".into(),
            });
        }
        let k = orders.len();
        if theta.len() != k || theta.iter().any(|row| row.len() != k) {
            return Err(GroupoidError::CocycleInvalid {
                detail: format!("phase matrix is not {k}x{k}"),
            });
        }
        for (i, row) in theta.iter().enumerate() {
            for (j, q) in row.iter().enumerate() {
                let wi = *q * Rat::from_integer(orders[i] as i64);
                let wj = *q * Rat::from_integer(orders[j] as i64);
                if !wi.is_integer() || !wj.is_integer() {
                    return Err(GroupoidError::CocycleInvalid {
                        detail: format!("entry θ[{i}][{j}] = {q} is not well defined mod the orders"),
                    });
                }
            }
        }
        let table = groupoid
            .composable_pairs()
            .map(|(x, y, _)| {
                let a = groupoid.cyclic_tuple(x, orders);
                let b = groupoid.cyclic_tuple(y, orders);
                let mut angle = Rat::zero();
                for i in 0..k {
                    for j in 0..k {
                        angle += theta[i][j] * Rat::from_integer((a[i] as i64) * (b[j] as i64));
                    }
                }
                ((x, y), CircleValue::Exact(rat_mod1(angle)))
            })
            .collect();
        Self::new(groupoid, table)
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    pub fn eval(&self, x: u32, y: u32) -> Result<CircleValue, GroupoidError> {
        self.table.get(&(x, y)).copied().ok_or_else(|| {
            GroupoidError::NotComposable {
                left: self.groupoid.name(x).into(),
                right: self.groupoid.name(y).into(),
            }
        })
    }

    /// Exhaustive coverage, unit normalization, and cocycle identity check.
    pub fn verify(&self) -> Result<(), GroupoidError> {
        let g = &self.groupoid;
        for (x, y, _) in g.composable_pairs() {
            if !self.table.contains_key(&(x, y)) {
                return Err(GroupoidError::CocycleInvalid {
                    detail: format!("no value on composable pair ({}, {})", g.name(x), g.name(y)),
                });
            }
        }
        for (&(x, y), v) in &self.table {
            if !g.composable(x, y) {
                return Err(GroupoidError::CocycleInvalid {
                    detail: format!("value on non-composable pair ({}, {})", g.name(x), g.name(y)),
                });
            }
            if (g.is_unit(x) || g.is_unit(y)) && !v.is_one() {
                return Err(GroupoidError::CocycleInvalid {
                    detail: format!("not normalized at ({}, {})", g.name(x), g.name(y)),
                });
            }
        }
        for (x, y, xy) in g.composable_pairs() {
            for z in 0..g.len() as u32 {
                if !g.composable(y, z) {
                    continue;
                }
                let yz = g.compose(y, z)?;
                let lhs = self.eval(x, y)?.mul(self.eval(xy, z)?);
                let rhs = self.eval(x, yz)?.mul(self.eval(y, z)?);
                if !lhs.approx_eq(rhs, crate::phase::APPROX_TOL) {
                    return Err(GroupoidError::CocycleInvalid {
                        detail: format!(
                            "cocycle identity fails on ({}, {}, {})",
                            g.name(x),
                            g.name(y),
                            g.name(z)
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A one-parameter family of cocycles over [0,1], evaluated at grid points.
#[derive(Debug, Clone)]
pub enum CocycleFamily {
    /// ω_t = ω for all t.
    Constant(Arc<GroupoidCocycle>),
    /// ω_t = ω_0 · e^{2πi t σ} for a real additive cocycle σ vanishing on
    /// unit pairs.
    Exponential {
        base: Arc<GroupoidCocycle>,
        rate: BTreeMap<(u32, u32), Rat>,
    },
}

impl CocycleFamily {
    pub fn constant(base: Arc<GroupoidCocycle>) -> Self {
        CocycleFamily::Constant(base)
    }

    /// Validates that σ is an additive cocycle (σ(x,y)+σ(xy,z) =
    /// σ(x,yz)+σ(y,z)) vanishing when either factor is a unit, so every
    /// slice of the family satisfies the multiplicative identity.
    pub fn exponential(
        base: Arc<GroupoidCocycle>,
        rate: BTreeMap<(u32, u32), Rat>,
    ) -> Result<Self, GroupoidError> {
        let g = base.groupoid().clone();
        for (x, y, _) in g.composable_pairs() {
            if !rate.contains_key(&(x, y)) {
                return Err(GroupoidError::CocycleInvalid {
                    detail: format!("rate missing on pair ({}, {})", g.name(x), g.name(y)),
                });
            }
        }
        for (&(x, y), q) in &rate {
            if !g.composable(x, y) {
                return Err(GroupoidError::CocycleInvalid {
                    detail: format!("rate on non-composable pair ({}, {})", g.name(x), g.name(y)),
                });
            }
            if (g.is_unit(x) || g.is_unit(y)) && !q.is_zero() {
                return Err(GroupoidError::CocycleInvalid {
                    detail: format!("rate does not vanish at ({}, {})", g.name(x), g.name(y)),
                });
            }
        }
        for (x, y, xy) in g.composable_pairs() {
            for z in 0..g.len() as u32 {
                if !g.composable(y, z) {
                    continue;
                }
                let yz = g.compose(y, z)?;
                if rate[&(x, y)] + rate[&(xy, z)] != rate[&(x, yz)] + rate[&(y, z)] {
                    return Err(GroupoidError::CocycleInvalid {
                        detail: format!(
                            "additive identity fails on ({}, {}, {})",
                            g.name(x),
                            g.name(y),
                            g.name(z)
                        ),
                    });
                }
            }
        }
        Ok(CocycleFamily::Exponential { base, rate })
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        match self {
            CocycleFamily::Constant(c) => c.groupoid(),
            CocycleFamily::Exponential { base, .. } => base.groupoid(),
        }
    }

    pub fn at(&self, t: Rat) -> GroupoidCocycle {
        match self {
            CocycleFamily::Constant(c) => (**c).clone(),
            CocycleFamily::Exponential { base, rate } => {
                let table = base
                    .groupoid()
                    .composable_pairs()
                    .map(|(x, y, _)| {
                        let twist = CircleValue::from_angle(rat_mod1(t * rate[&(x, y)]));
                        ((x, y), base.eval(x, y).expect("validated table").mul(twist))
                    })
                    .collect();
                GroupoidCocycle {
                    groupoid: base.groupoid().clone(),
                    table,
                }
            }
        }
    }
}
