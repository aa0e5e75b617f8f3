//! The twisted convolution *-algebra of a finite groupoid with counting
//! Haar system, plus its [0,1]-bundle version: grid-sampled functions on
//! G × [0,1], fiber evaluation, the scalar module action, and I-norm
//! continuity scans.

use crate::finite_groupoid::{CocycleFamily, FiniteGroupoid, GroupoidCocycle, GroupoidError};
use crate::phase::{Rat, RealValue, APPROX_TOL};
use crate::scalar::Coef;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConvolutionError {
    #[error("functions live on different groupoids")]
    GroupoidMismatch,
    #[error("bundle grids differ: {detail}")]
    GridMismatch { detail: String },
    #[error("malformed grid: {detail}")]
    MalformedGrid { detail: String },
    #[error("parameter {t} is not a grid point")]
    OffGrid { t: Rat },
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

/// A finitely supported complex function on a finite groupoid.
#[derive(Debug, Clone)]
pub struct CcFunction {
    groupoid: Arc<FiniteGroupoid>,
    values: BTreeMap<u32, Coef>,
}

impl CcFunction {
    pub fn zero(groupoid: Arc<FiniteGroupoid>) -> Self {
        CcFunction {
            groupoid,
            values: BTreeMap::new(),
        }
    }

    pub fn delta(groupoid: Arc<FiniteGroupoid>, x: u32) -> Self {
        Self::scaled_delta(groupoid, x, Coef::one())
    }

    pub fn scaled_delta(groupoid: Arc<FiniteGroupoid>, x: u32, coef: Coef) -> Self {
        let mut f = Self::zero(groupoid);
        f.set(x, coef);
        f
    }

    pub fn from_entries(
        groupoid: Arc<FiniteGroupoid>,
        entries: impl IntoIterator<Item = (u32, Coef)>,
    ) -> Self {
        let mut f = Self::zero(groupoid);
        for (x, c) in entries {
            f.set(x, f.value(x).add(&c));
        }
        f
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    pub fn value(&self, x: u32) -> Coef {
        self.values.get(&x).cloned().unwrap_or_else(Coef::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.values.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, &Coef)> + '_ {
        self.values.iter().map(|(&x, c)| (x, c))
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    fn set(&mut self, x: u32, c: Coef) {
        if c.is_zero() {
            self.values.remove(&x);
        } else {
            self.values.insert(x, c);
        }
    }

    pub fn add(&self, other: &CcFunction) -> Result<CcFunction, ConvolutionError> {
        if !Arc::ptr_eq(&self.groupoid, &other.groupoid) {
            return Err(ConvolutionError::GroupoidMismatch);
        }
        let mut out = self.clone();
        for (x, c) in &other.values {
            out.set(*x, out.value(*x).add(c));
        }
        Ok(out)
    }

    pub fn sub(&self, other: &CcFunction) -> Result<CcFunction, ConvolutionError> {
        self.add(&other.scale(&Coef::from_rat(-Rat::one())))
    }

    pub fn scale(&self, c: &Coef) -> CcFunction {
        let mut out = CcFunction::zero(self.groupoid.clone());
        for (x, v) in &self.values {
            out.set(*x, v.mul(c));
        }
        out
    }

    pub fn approx_eq(&self, other: &CcFunction, tol: f64) -> bool {
        if !Arc::ptr_eq(&self.groupoid, &other.groupoid) {
            return false;
        }
        let keys: BTreeSet<u32> = self.support().chain(other.support()).collect();
        keys.iter()
            .all(|&x| self.value(x).approx_eq(&other.value(x), tol))
    }
}

/// f *_ω g (a) = Σ_{b: s(b)=s(a)} f(ab) g(b^{-1}) ω(ab, b^{-1}), realized as
/// the equivalent sum over factorizations a = xy of f(x) g(y) ω(x,y).
pub fn convolve(
    f: &CcFunction,
    g: &CcFunction,
    omega: &GroupoidCocycle,
) -> Result<CcFunction, ConvolutionError> {
    if !Arc::ptr_eq(f.groupoid(), g.groupoid()) || !Arc::ptr_eq(f.groupoid(), omega.groupoid()) {
        return Err(ConvolutionError::GroupoidMismatch);
    }
    let gd = f.groupoid().clone();
    let mut out = CcFunction::zero(gd.clone());
    for (x, fx) in &f.values {
        for (y, gy) in &g.values {
            if !gd.composable(*x, *y) {
                continue;
            }
            let a = gd.compose(*x, *y)?;
            let term = fx.mul(gy).mul_phase(omega.eval(*x, *y)?);
            out.set(a, out.value(a).add(&term));
        }
    }
    Ok(out)
}

/// f^*(a) = conj(f(a^{-1})) · conj(ω(a, a^{-1})).
pub fn involution(
    f: &CcFunction,
    omega: &GroupoidCocycle,
) -> Result<CcFunction, ConvolutionError> {
    if !Arc::ptr_eq(f.groupoid(), omega.groupoid()) {
        return Err(ConvolutionError::GroupoidMismatch);
    }
    let gd = f.groupoid().clone();
    let mut out = CcFunction::zero(gd.clone());
    for (x, v) in &f.values {
        let a = gd.inverse(*x);
        out.set(a, v.conj().mul_phase(omega.eval(a, *x)?.conj()));
    }
    Ok(out)
}

/// ‖f‖_I = max( max_u Σ_{r(a)=u} |f(a)|, max_u Σ_{s(a)=u} |f(a)| ).
/// Exact whenever every modulus is; otherwise computed in f64.
pub fn i_norm(f: &CcFunction) -> RealValue {
    let gd = f.groupoid();
    let moduli: BTreeMap<u32, RealValue> =
        f.values.iter().map(|(&x, c)| (x, c.modulus())).collect();
    let all_exact = moduli.values().all(|m| matches!(m, RealValue::Exact(_)));
    let mut range_sums: BTreeMap<u32, RealValue> = BTreeMap::new();
    let mut source_sums: BTreeMap<u32, RealValue> = BTreeMap::new();
    let seed = || {
        if all_exact {
            RealValue::Exact(Rat::zero())
        } else {
            RealValue::Approx(0.0)
        }
    };
    for (&x, m) in &moduli {
        let m = if all_exact { *m } else { m.to_approx() };
        let r = range_sums.entry(gd.range(x)).or_insert_with(seed);
        *r = r.add(m);
        let s = source_sums.entry(gd.source(x)).or_insert_with(seed);
        *s = s.add(m);
    }
    let mut best = if all_exact {
        RealValue::Exact(Rat::zero())
    } else {
        RealValue::Approx(0.0)
    };
    for v in range_sums.values().chain(source_sums.values()) {
        if v.to_f64() > best.to_f64() {
            best = *v;
        }
    }
    best
}

/// A function on G × [0,1] sampled on a finite grid containing 0 and 1:
/// one finitely supported slice per grid point.
#[derive(Debug, Clone)]
pub struct GridBundleFunction {
    groupoid: Arc<FiniteGroupoid>,
    grid: Vec<Rat>,
    slices: Vec<CcFunction>,
}

impl GridBundleFunction {
    pub fn new(
        groupoid: Arc<FiniteGroupoid>,
        grid: Vec<Rat>,
        slices: Vec<CcFunction>,
    ) -> Result<Self, ConvolutionError> {
        if grid.len() < 2 || grid[0] != Rat::zero() || *grid.last().unwrap() != Rat::one() {
            return Err(ConvolutionError::MalformedGrid {
                detail: "grid must contain 0 and 1".into(),
            });
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConvolutionError::MalformedGrid {
                detail: "grid must be strictly increasing".into(),
            });
        }
        if slices.len() != grid.len() {
            return Err(ConvolutionError::GridMismatch {
                detail: format!("{} slices for {} grid points", slices.len(), grid.len()),
            });
        }
        if slices.iter().any(|s| !Arc::ptr_eq(s.groupoid(), &groupoid)) {
            return Err(ConvolutionError::GroupoidMismatch);
        }
        Ok(GridBundleFunction {
            groupoid,
            grid,
            slices,
        })
    }

    /// Build a bundle by sampling a closure at every grid point.
    pub fn sample(
        groupoid: Arc<FiniteGroupoid>,
        grid: Vec<Rat>,
        mut slice_at: impl FnMut(Rat) -> CcFunction,
    ) -> Result<Self, ConvolutionError> {
        let slices = grid.iter().map(|&t| slice_at(t)).collect();
        Self::new(groupoid, grid, slices)
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    pub fn grid(&self) -> &[Rat] {
        &self.grid
    }

    pub fn slices(&self) -> &[CcFunction] {
        &self.slices
    }

    fn grid_index(&self, t: Rat) -> Result<usize, ConvolutionError> {
        self.grid
            .iter()
            .position(|&s| s == t)
            .ok_or(ConvolutionError::OffGrid { t })
    }

    /// Evaluation at a fiber: q_t(F) = F(·, t).
    pub fn q_t(&self, t: Rat) -> Result<CcFunction, ConvolutionError> {
        Ok(self.slices[self.grid_index(t)?].clone())
    }

    fn same_grid(&self, other: &GridBundleFunction) -> Result<(), ConvolutionError> {
        if self.grid != other.grid {
            return Err(ConvolutionError::GridMismatch {
                detail: "operands sample different grids".into(),
            });
        }
        Ok(())
    }

    /// Slice-wise convolution against the cocycle family: the product in
    /// C_c(G × [0,1]), where (G×[0,1])^(2) = G^(2) × [0,1].
    pub fn convolve(
        &self,
        other: &GridBundleFunction,
        family: &CocycleFamily,
    ) -> Result<GridBundleFunction, ConvolutionError> {
        self.same_grid(other)?;
        let mut slices = Vec::with_capacity(self.grid.len());
        for (i, &t) in self.grid.iter().enumerate() {
            let omega_t = family.at(t);
            slices.push(convolve(&self.slices[i], &other.slices[i], &omega_t)?);
        }
        GridBundleFunction::new(self.groupoid.clone(), self.grid.clone(), slices)
    }

    pub fn involution(
        &self,
        family: &CocycleFamily,
    ) -> Result<GridBundleFunction, ConvolutionError> {
        let mut slices = Vec::with_capacity(self.grid.len());
        for (i, &t) in self.grid.iter().enumerate() {
            slices.push(involution(&self.slices[i], &family.at(t))?);
        }
        GridBundleFunction::new(self.groupoid.clone(), self.grid.clone(), slices)
    }

    pub fn add(&self, other: &GridBundleFunction) -> Result<GridBundleFunction, ConvolutionError> {
        self.same_grid(other)?;
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        GridBundleFunction::new(self.groupoid.clone(), self.grid.clone(), slices)
    }

    /// ‖F‖_I = max_t ‖q_t(F)‖_I, the bundle I-norm for the slice-wise Haar
    /// system.
    pub fn i_norm(&self) -> RealValue {
        let mut best = RealValue::Exact(Rat::zero());
        for s in &self.slices {
            let n = i_norm(s);
            if n.to_f64() > best.to_f64() {
                best = n;
            }
        }
        best
    }
}

/// (F·φ)(a, t) = F(a, t)·φ(t): the C([0,1]) module action, one scalar per
/// grid point.
pub fn module_action(
    phi: &[Coef],
    f: &GridBundleFunction,
) -> Result<GridBundleFunction, ConvolutionError> {
    if phi.len() != f.grid().len() {
        return Err(ConvolutionError::GridMismatch {
            detail: format!(
                "{} scalar samples for {} grid points",
                phi.len(),
                f.grid().len()
            ),
        });
    }
    let slices = f
        .slices
        .iter()
        .zip(phi)
        .map(|(s, c)| s.scale(c))
        .collect();
    GridBundleFunction::new(f.groupoid().clone(), f.grid().to_vec(), slices)
}

/// One point of an I-norm continuity scan.
#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub t: Rat,
    pub norm: RealValue,
}

/// The sampled I-norm curve of a bundle, with the largest adjacent jump
/// checked against the Lipschitz-style modulus
/// |‖q_s‖_I − ‖q_t‖_I| <= K · max_a |F(a,s) − F(a,t)|,
/// K = the largest number of support points in any single range or source
/// fiber.
#[derive(Debug, Clone)]
pub struct ScanReport {
    pub curve: Vec<ScanPoint>,
    pub max_jump: f64,
    pub fiber_bound: u32,
    pub continuity_certified: bool,
}

pub fn i_norm_scan(f: &GridBundleFunction) -> ScanReport {
    let gd = f.groupoid();
    let union_support: BTreeSet<u32> = f.slices().iter().flat_map(|s| s.support()).collect();
    let mut fiber_bound = 0u32;
    for &u in gd.units() {
        let in_range = gd
            .range_fiber(u)
            .into_iter()
            .filter(|x| union_support.contains(x))
            .count() as u32;
        let in_source = gd
            .source_fiber(u)
            .into_iter()
            .filter(|x| union_support.contains(x))
            .count() as u32;
        fiber_bound = fiber_bound.max(in_range).max(in_source);
    }
    let curve: Vec<ScanPoint> = f
        .grid()
        .iter()
        .zip(f.slices())
        .map(|(&t, s)| ScanPoint { t, norm: i_norm(s) })
        .collect();
    let mut max_jump = 0.0f64;
    let mut certified = true;
    for i in 1..curve.len() {
        let jump = (curve[i].norm.to_f64() - curve[i - 1].norm.to_f64()).abs();
        max_jump = max_jump.max(jump);
        let mut variation = 0.0f64;
        for &x in &union_support {
            let d = f.slices()[i]
                .value(x)
                .to_complex()
                - f.slices()[i - 1].value(x).to_complex();
            variation = variation.max(d.norm());
        }
        if jump > fiber_bound as f64 * variation + APPROX_TOL {
            certified = false;
        }
    }
    ScanReport {
        curve,
        max_jump,
        fiber_bound,
        continuity_certified: certified,
    }
}
