//! Circle-valued and real-valued 2-cocycles on a k-graph.
//!
//! A 2-cocycle assigns a circle value to every composable pair subject to
//! c(λ,μν)c(μ,ν) = c(λμ,ν)c(λ,μ) and c(λ,s(λ)) = c(r(λ),λ) = 1. Cocycles are
//! closed-form rules (trivial, degree bicharacter, coboundary, pullback,
//! products, exponentials of real cocycles) plus bounded explicit tables;
//! `verify_cocycle` brute-forces the identity on every composable triple up
//! to a degree bound. `is_cohomologous` decides, on a bounded domain, whether
//! two exact cocycles differ by a coboundary, returning either the potential
//! or an integer certificate of inconsistency.

use crate::abelian::{solve_mod1, IntMat, Mod1Solution};
use crate::degree::DegreeVec;
use crate::graph::{GraphError, KGraph, Morphism};
use crate::phase::{rat_mod1, CircleValue, Rat, RealValue, APPROX_TOL};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CocycleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("pair outside table domain: {detail}")]
    TableDomainExceeded { detail: String },
    #[error("bad normalization: {detail}")]
    BadNormalization { detail: String },
    #[error("operation requires exact-mode values throughout")]
    ApproximateModeUnsupported,
    #[error("cocycles live on different graphs")]
    GraphMismatch,
    #[error("t = {0} is not a grid point")]
    OffGrid(Rat),
    #[error("t = {0} is outside [0, 1]")]
    OutOfRange(Rat),
    #[error("{0}")]
    Invalid(String),
}

/// A circle-valued function on morphisms, used as a coboundary potential.
/// Identities always evaluate to 1.
#[derive(Clone)]
pub enum MorphismPhase {
    /// b(λ) = e^{2πi q·d(λ)}; multiplicative, so its coboundary is trivial.
    DegreeLinear { q: Vec<Rat> },
    /// Explicit values on non-identity morphisms.
    Table { map: Arc<BTreeMap<Morphism, CircleValue>> },
}

impl MorphismPhase {
    pub fn eval(&self, m: &Morphism) -> Result<CircleValue, CocycleError> {
        match self {
            MorphismPhase::DegreeLinear { q } => {
                if m.is_identity() {
                    return Ok(CircleValue::one());
                }
                let angle: Rat = q
                    .iter()
                    .zip(m.degree().0.iter())
                    .map(|(qi, &di)| *qi * Rat::from_integer(di as i64))
                    .sum();
                Ok(CircleValue::from_angle(angle))
            }
            MorphismPhase::Table { map } => {
                if m.is_identity() {
                    return Ok(unit_matching(map.values()));
                }
                map.get(m)
                    .copied()
                    .ok_or_else(|| CocycleError::TableDomainExceeded {
                        detail: format!("no phase stored for morphism {:?}", m),
                    })
            }
        }
    }
}

/// Unit in the arithmetic mode of a table: identities must evaluate in the
/// same mode as the stored entries or products downstream would mix modes.
fn unit_matching<'a, I: IntoIterator<Item = &'a CircleValue>>(values: I) -> CircleValue {
    match values.into_iter().next() {
        Some(v) if !v.is_exact() => CircleValue::one().to_approx(),
        _ => CircleValue::one(),
    }
}

/// A color- and endpoint-preserving projection between graphs (for example a
/// skew product onto its base), given by vertex and edge index maps.
pub struct GraphProjection {
    domain: Arc<KGraph>,
    base: Arc<KGraph>,
    vertex_map: Vec<u32>,
    edge_map: Vec<u32>,
}

impl GraphProjection {
    pub fn new(
        domain: Arc<KGraph>,
        base: Arc<KGraph>,
        vertex_map: Vec<u32>,
        edge_map: Vec<u32>,
    ) -> Result<Self, CocycleError> {
        if vertex_map.len() != domain.skeleton().vertex_count()
            || edge_map.len() != domain.skeleton().edge_count()
        {
            return Err(CocycleError::Invalid(
                "projection maps do not cover the domain".into(),
            ));
        }
        for (e, &be) in edge_map.iter().enumerate() {
            let de = domain.skeleton().edge(e as u32);
            if be as usize >= base.skeleton().edge_count() {
                return Err(CocycleError::Invalid(format!(
                    "edge {:?} maps outside the base",
                    de.id
                )));
            }
            let b = base.skeleton().edge(be);
            if b.color != de.color
                || b.range != vertex_map[de.range as usize]
                || b.source != vertex_map[de.source as usize]
            {
                return Err(CocycleError::Invalid(format!(
                    "projection is not functorial on edge {:?}",
                    de.id
                )));
            }
        }
        Ok(GraphProjection {
            domain,
            base,
            vertex_map,
            edge_map,
        })
    }

    pub fn domain(&self) -> &Arc<KGraph> {
        &self.domain
    }

    pub fn base(&self) -> &Arc<KGraph> {
        &self.base
    }

    pub fn project(&self, m: &Morphism) -> Result<Morphism, GraphError> {
        let word: Vec<u32> = m
            .word()
            .iter()
            .map(|&e| self.edge_map[e as usize])
            .collect();
        self.base
            .morphism_from_word(self.vertex_map[m.range() as usize], word)
    }
}

#[derive(Clone)]
pub enum CocycleRule {
    Trivial,
    /// c(λ,μ) = e^{2πi·d(λ)ᵀΘd(μ)} for a rational k×k matrix Θ.
    Bicharacter { theta: Vec<Vec<Rat>> },
    /// c(μ,ν) = b(μ)b(ν)b(μν)^{-1}.
    Coboundary { b: MorphismPhase },
    /// Explicit values on composable non-identity pairs.
    Table {
        entries: Arc<BTreeMap<(Morphism, Morphism), CircleValue>>,
    },
    /// (c∘φ)(λ,μ) = c(φλ, φμ) along a projection φ.
    Pullback {
        base: Arc<Cocycle2>,
        projection: Arc<GraphProjection>,
    },
    Product(Arc<Cocycle2>, Arc<Cocycle2>),
    Conjugate(Arc<Cocycle2>),
    /// c(λ,μ) = e^{2πi·scale·σ(λ,μ)} for a real cocycle σ.
    Exponential { sigma: Arc<RealCocycle2>, scale: Rat },
}

/// A T-valued 2-cocycle rule attached to a graph.
#[derive(Clone)]
pub struct Cocycle2 {
    graph: Arc<KGraph>,
    rule: CocycleRule,
}

impl Cocycle2 {
    pub fn trivial(graph: Arc<KGraph>) -> Self {
        Cocycle2 {
            graph,
            rule: CocycleRule::Trivial,
        }
    }

    pub fn bicharacter(graph: Arc<KGraph>, theta: Vec<Vec<Rat>>) -> Result<Self, CocycleError> {
        let k = graph.k();
        if theta.len() != k || theta.iter().any(|row| row.len() != k) {
            return Err(CocycleError::Invalid(format!(
                "bicharacter matrix must be {}x{}",
                k, k
            )));
        }
        Ok(Cocycle2 {
            graph,
            rule: CocycleRule::Bicharacter { theta },
        })
    }

    /// The rotation cocycle on a 2-graph: c((m,n),(j,k)) = e^{2πiθnj}.
    pub fn rotation(graph: Arc<KGraph>, theta: Rat) -> Result<Self, CocycleError> {
        if graph.k() != 2 {
            return Err(CocycleError::Invalid(
                "rotation cocycle needs a 2-graph".into(),
            ));
        }
        let z = Rat::zero();
        Cocycle2::bicharacter(graph, vec![vec![z, z], vec![theta, z]])
    }

    /// The coboundary δb. Checked: b must be 1 on every vertex, and the
    /// cocycle identity is verified up to the graph bound.
    pub fn coboundary(graph: Arc<KGraph>, b: MorphismPhase) -> Result<Self, CocycleError> {
        if let MorphismPhase::Table { map } = &b {
            for (m, val) in map.iter() {
                if m.is_identity() && !val.is_one() {
                    return Err(CocycleError::BadNormalization {
                        detail: format!(
                            "b is {} on the vertex {}",
                            val,
                            graph.skeleton().vertex_name(m.range())
                        ),
                    });
                }
            }
        }
        let c = Cocycle2 {
            graph: graph.clone(),
            rule: CocycleRule::Coboundary { b },
        };
        let report = verify_cocycle(&c, &graph.bound().clone())?;
        if !report.passed() {
            return Err(CocycleError::Invalid(format!(
                "coboundary failed its own verification:\n{}",
                report
            )));
        }
        Ok(c)
    }

    pub fn table(
        graph: Arc<KGraph>,
        entries: BTreeMap<(Morphism, Morphism), CircleValue>,
    ) -> Self {
        Cocycle2 {
            graph,
            rule: CocycleRule::Table {
                entries: Arc::new(entries),
            },
        }
    }

    pub fn pullback(base: Arc<Cocycle2>, projection: Arc<GraphProjection>) -> Result<Self, CocycleError> {
        if !Arc::ptr_eq(&base.graph, projection.base()) {
            return Err(CocycleError::GraphMismatch);
        }
        Ok(Cocycle2 {
            graph: projection.domain().clone(),
            rule: CocycleRule::Pullback { base, projection },
        })
    }

    pub fn product(a: Cocycle2, b: Cocycle2) -> Result<Self, CocycleError> {
        if !Arc::ptr_eq(&a.graph, &b.graph) {
            return Err(CocycleError::GraphMismatch);
        }
        Ok(Cocycle2 {
            graph: a.graph.clone(),
            rule: CocycleRule::Product(Arc::new(a), Arc::new(b)),
        })
    }

    pub fn conjugate(a: Cocycle2) -> Self {
        Cocycle2 {
            graph: a.graph.clone(),
            rule: CocycleRule::Conjugate(Arc::new(a)),
        }
    }

    pub fn exponential(sigma: Arc<RealCocycle2>, scale: Rat) -> Self {
        Cocycle2 {
            graph: sigma.graph.clone(),
            rule: CocycleRule::Exponential { sigma, scale },
        }
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        &self.graph
    }

    pub fn rule(&self) -> &CocycleRule {
        &self.rule
    }

    pub fn eval(&self, lambda: &Morphism, mu: &Morphism) -> Result<CircleValue, CocycleError> {
        if lambda.source() != mu.range() {
            return Err(GraphError::NotComposable {
                left_source: self
                    .graph
                    .skeleton()
                    .vertex_name(lambda.source())
                    .to_string(),
                right_range: self.graph.skeleton().vertex_name(mu.range()).to_string(),
            }
            .into());
        }
        match &self.rule {
            CocycleRule::Trivial => Ok(CircleValue::one()),
            CocycleRule::Bicharacter { theta } => {
                let mut angle = Rat::zero();
                for (i, row) in theta.iter().enumerate() {
                    let di = Rat::from_integer(lambda.degree().0[i] as i64);
                    if di.is_zero() {
                        continue;
                    }
                    for (j, t) in row.iter().enumerate() {
                        let dj = Rat::from_integer(mu.degree().0[j] as i64);
                        angle += di * *t * dj;
                    }
                }
                Ok(CircleValue::from_angle(angle))
            }
            CocycleRule::Coboundary { b } => {
                let prod = self.graph.compose(lambda, mu)?;
                Ok(b.eval(lambda)?.mul(b.eval(mu)?).mul(b.eval(&prod)?.conj()))
            }
            CocycleRule::Table { entries } => {
                if lambda.is_identity() || mu.is_identity() {
                    return Ok(unit_matching(entries.values()));
                }
                entries
                    .get(&(lambda.clone(), mu.clone()))
                    .copied()
                    .ok_or_else(|| CocycleError::TableDomainExceeded {
                        detail: format!(
                            "no entry for ({}, {})",
                            self.graph.display_morphism(lambda),
                            self.graph.display_morphism(mu)
                        ),
                    })
            }
            CocycleRule::Pullback { base, projection } => {
                let pl = projection.project(lambda)?;
                let pm = projection.project(mu)?;
                base.eval(&pl, &pm)
            }
            CocycleRule::Product(a, b) => Ok(a.eval(lambda, mu)?.mul(b.eval(lambda, mu)?)),
            CocycleRule::Conjugate(a) => Ok(a.eval(lambda, mu)?.conj()),
            CocycleRule::Exponential { sigma, scale } => {
                Ok(sigma.eval(lambda, mu)?.scale(*scale).exp_turn())
            }
        }
    }

    /// Materialize this cocycle as an explicit table on all composable
    /// non-identity pairs with total degree <= bound.
    pub fn tabulate(&self, bound: &DegreeVec) -> Result<Cocycle2, CocycleError> {
        let mut entries = BTreeMap::new();
        for (lambda, mu) in composable_pairs(&self.graph, bound)? {
            if lambda.is_identity() || mu.is_identity() {
                continue;
            }
            let v = self.eval(&lambda, &mu)?;
            entries.insert((lambda, mu), v);
        }
        Ok(Cocycle2::table(self.graph.clone(), entries))
    }
}

/// All composable pairs (λ, μ) with d(λ)+d(μ) <= bound, identities included.
fn composable_pairs(
    graph: &Arc<KGraph>,
    bound: &DegreeVec,
) -> Result<Vec<(Morphism, Morphism)>, CocycleError> {
    if !bound.le(graph.bound()) {
        return Err(GraphError::BoundExceeded {
            requested: bound.clone(),
            bound: graph.bound().clone(),
        }
        .into());
    }
    let mut out = Vec::new();
    for n1 in bound.iter_below() {
        let rest = bound.checked_sub(&n1).unwrap();
        for v in 0..graph.skeleton().vertex_count() as u32 {
            for lambda in graph.lambda_set(v, &n1)? {
                for n2 in rest.iter_below() {
                    for mu in graph.lambda_set(lambda.source(), &n2)? {
                        out.push((lambda.clone(), mu.clone()));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug)]
pub struct CocycleViolation {
    pub lambda: String,
    pub mu: String,
    pub nu: String,
    pub lhs: CircleValue,
    pub rhs: CircleValue,
}

/// Verdict of brute-forcing the cocycle identity and normalization up to a
/// bound.
#[derive(Debug)]
pub struct CocycleReport {
    pub bound: DegreeVec,
    pub normalization: Vec<String>,
    pub identity: Vec<CocycleViolation>,
    pub triples_checked: u64,
    pub morphisms_checked: u64,
}

impl CocycleReport {
    pub fn passed(&self) -> bool {
        self.normalization.is_empty() && self.identity.is_empty()
    }
}

impl fmt::Display for CocycleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "cocycle check at bound {}: {} ({} triples, {} morphisms)",
            self.bound,
            if self.passed() { "pass" } else { "FAIL" },
            self.triples_checked,
            self.morphisms_checked
        )?;
        for n in &self.normalization {
            writeln!(f, "  [normalization] {}", n)?;
        }
        for v in &self.identity {
            writeln!(
                f,
                "  [identity] (λ,μ,ν)=({},{},{}): c(λ,μν)c(μ,ν) = {} but c(λμ,ν)c(λ,μ) = {}",
                v.lambda, v.mu, v.nu, v.lhs, v.rhs
            )?;
        }
        Ok(())
    }
}

pub fn verify_cocycle(c: &Cocycle2, bound: &DegreeVec) -> Result<CocycleReport, CocycleError> {
    let graph = c.graph();
    if !bound.le(graph.bound()) {
        return Err(GraphError::BoundExceeded {
            requested: bound.clone(),
            bound: graph.bound().clone(),
        }
        .into());
    }
    let mut report = CocycleReport {
        bound: bound.clone(),
        normalization: Vec::new(),
        identity: Vec::new(),
        triples_checked: 0,
        morphisms_checked: 0,
    };
    for n in bound.iter_below() {
        for v in 0..graph.skeleton().vertex_count() as u32 {
            for lambda in graph.lambda_set(v, &n)? {
                report.morphisms_checked += 1;
                let left = c.eval(&graph.identity(lambda.range()), lambda)?;
                let right = c.eval(lambda, &graph.identity(lambda.source()))?;
                if !left.is_one() || !right.is_one() {
                    report.normalization.push(format!(
                        "λ = {}: c(r(λ),λ) = {}, c(λ,s(λ)) = {}",
                        graph.display_morphism(lambda),
                        left,
                        right
                    ));
                }
            }
        }
    }
    for (lambda, mu) in composable_pairs(graph, bound)? {
        let left_total = lambda.degree().add(mu.degree());
        let rest = bound.checked_sub(&left_total).unwrap();
        let lambda_mu = graph.compose(&lambda, &mu)?;
        for n3 in rest.iter_below() {
            for nu in graph.lambda_set(mu.source(), &n3)? {
                report.triples_checked += 1;
                let mu_nu = graph.compose(&mu, nu)?;
                let lhs = c.eval(&lambda, &mu_nu)?.mul(c.eval(&mu, nu)?);
                let rhs = c.eval(&lambda_mu, nu)?.mul(c.eval(&lambda, &mu)?);
                if !lhs.approx_eq(rhs, APPROX_TOL) {
                    report.identity.push(CocycleViolation {
                        lambda: graph.display_morphism(&lambda),
                        mu: graph.display_morphism(&mu),
                        nu: graph.display_morphism(nu),
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// An R-valued 2-cocycle: same shape as the circle case but angles add
/// without mod-1 reduction.
pub struct RealCocycle2 {
    graph: Arc<KGraph>,
    rule: RealRule,
}

pub enum RealRule {
    Zero,
    /// σ(λ,μ) = d(λ)ᵀΘd(μ) as a real number.
    Bilinear { theta: Vec<Vec<Rat>> },
    Table {
        entries: Arc<BTreeMap<(Morphism, Morphism), RealValue>>,
    },
    /// (σ∘φ)(λ,μ) = σ(φλ, φμ) along a projection φ.
    Pullback {
        base: Arc<RealCocycle2>,
        projection: Arc<GraphProjection>,
    },
}

impl RealCocycle2 {
    pub fn zero(graph: Arc<KGraph>) -> Self {
        RealCocycle2 {
            graph,
            rule: RealRule::Zero,
        }
    }

    pub fn bilinear(graph: Arc<KGraph>, theta: Vec<Vec<Rat>>) -> Result<Self, CocycleError> {
        let k = graph.k();
        if theta.len() != k || theta.iter().any(|row| row.len() != k) {
            return Err(CocycleError::Invalid(format!(
                "bilinear matrix must be {}x{}",
                k, k
            )));
        }
        Ok(RealCocycle2 {
            graph,
            rule: RealRule::Bilinear { theta },
        })
    }

    /// The real rotation cocycle σ((m,n),(j,k)) = θnj.
    pub fn rotation(graph: Arc<KGraph>, theta: Rat) -> Result<Self, CocycleError> {
        if graph.k() != 2 {
            return Err(CocycleError::Invalid(
                "rotation cocycle needs a 2-graph".into(),
            ));
        }
        let z = Rat::zero();
        RealCocycle2::bilinear(graph, vec![vec![z, z], vec![theta, z]])
    }

    pub fn table(
        graph: Arc<KGraph>,
        entries: BTreeMap<(Morphism, Morphism), RealValue>,
    ) -> Self {
        RealCocycle2 {
            graph,
            rule: RealRule::Table {
                entries: Arc::new(entries),
            },
        }
    }

    pub fn pullback(
        base: Arc<RealCocycle2>,
        projection: Arc<GraphProjection>,
    ) -> Result<Self, CocycleError> {
        if !Arc::ptr_eq(base.graph(), projection.base()) {
            return Err(CocycleError::GraphMismatch);
        }
        Ok(RealCocycle2 {
            graph: projection.domain().clone(),
            rule: RealRule::Pullback { base, projection },
        })
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        &self.graph
    }

    pub fn eval(&self, lambda: &Morphism, mu: &Morphism) -> Result<RealValue, CocycleError> {
        if lambda.source() != mu.range() {
            return Err(GraphError::NotComposable {
                left_source: self
                    .graph
                    .skeleton()
                    .vertex_name(lambda.source())
                    .to_string(),
                right_range: self.graph.skeleton().vertex_name(mu.range()).to_string(),
            }
            .into());
        }
        match &self.rule {
            RealRule::Zero => Ok(RealValue::zero()),
            RealRule::Bilinear { theta } => {
                let mut total = Rat::zero();
                for (i, row) in theta.iter().enumerate() {
                    let di = Rat::from_integer(lambda.degree().0[i] as i64);
                    if di.is_zero() {
                        continue;
                    }
                    for (j, t) in row.iter().enumerate() {
                        let dj = Rat::from_integer(mu.degree().0[j] as i64);
                        total += di * *t * dj;
                    }
                }
                Ok(RealValue::Exact(total))
            }
            RealRule::Table { entries } => {
                if lambda.is_identity() || mu.is_identity() {
                    return Ok(RealValue::zero());
                }
                entries
                    .get(&(lambda.clone(), mu.clone()))
                    .copied()
                    .ok_or_else(|| CocycleError::TableDomainExceeded {
                        detail: format!(
                            "no entry for ({}, {})",
                            self.graph.display_morphism(lambda),
                            self.graph.display_morphism(mu)
                        ),
                    })
            }
            RealRule::Pullback { base, projection } => {
                base.eval(&projection.project(lambda)?, &projection.project(mu)?)
            }
        }
    }
}

/// Brute-force the additive cocycle identity σ(λ,μν)+σ(μ,ν) = σ(λμ,ν)+σ(λ,μ)
/// up to a bound. Violations are returned as display strings.
pub fn verify_real_cocycle(
    sigma: &RealCocycle2,
    bound: &DegreeVec,
) -> Result<Vec<String>, CocycleError> {
    let graph = sigma.graph();
    let mut violations = Vec::new();
    for (lambda, mu) in composable_pairs(graph, bound)? {
        let left_total = lambda.degree().add(mu.degree());
        let rest = bound.checked_sub(&left_total).unwrap();
        let lambda_mu = graph.compose(&lambda, &mu)?;
        for n3 in rest.iter_below() {
            for nu in graph.lambda_set(mu.source(), &n3)? {
                let mu_nu = graph.compose(&mu, nu)?;
                let lhs = sigma.eval(&lambda, &mu_nu)?.add(sigma.eval(&mu, nu)?);
                let rhs = sigma.eval(&lambda_mu, nu)?.add(sigma.eval(&lambda, &mu)?);
                let diff = lhs.add(rhs.neg()).to_f64().abs();
                let exact_ok = match (lhs, rhs) {
                    (RealValue::Exact(a), RealValue::Exact(b)) => a == b,
                    _ => diff <= APPROX_TOL,
                };
                if !exact_ok {
                    violations.push(format!(
                        "(λ,μ,ν)=({},{},{}): {} vs {}",
                        graph.display_morphism(&lambda),
                        graph.display_morphism(&mu),
                        graph.display_morphism(nu),
                        lhs,
                        rhs
                    ));
                }
            }
        }
    }
    Ok(violations)
}

/// Outcome of the bounded cohomologousness decision.
pub enum CohomologyVerdict {
    /// c̃ = δb·c on the bound, with the b that was solved for.
    Cohomologous { b: MorphismPhase },
    Inconsistent(CohomologyObstruction),
}

/// An integer combination of pair constraints whose left-hand sides cancel
/// while the angles sum to something non-integral: no b can exist.
pub struct CohomologyObstruction {
    /// (μ display, ν display, integer coefficient), nonzero coefficients only.
    pub terms: Vec<(String, String, i128)>,
    /// The non-integral angle sum, reduced mod 1.
    pub angle: Rat,
}

impl fmt::Display for CohomologyObstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .terms
            .iter()
            .map(|(m, n, c)| format!("{}·[{} , {}]", c, m, n))
            .collect();
        write!(
            f,
            "constraint cycle {} has angle sum {} ∉ Z",
            terms.join(" + "),
            self.angle
        )
    }
}

/// Decide whether c̃ = δb·c for some b on all composable pairs with total
/// degree <= bound. Exact-mode cocycles only.
pub fn is_cohomologous(
    c: &Cocycle2,
    c_tilde: &Cocycle2,
    bound: &DegreeVec,
) -> Result<CohomologyVerdict, CocycleError> {
    if !Arc::ptr_eq(c.graph(), c_tilde.graph()) {
        return Err(CocycleError::GraphMismatch);
    }
    let graph = c.graph();

    // Unknowns: one angle per non-identity morphism up to the bound.
    let mut var_index: BTreeMap<Morphism, usize> = BTreeMap::new();
    for m in graph.all_morphisms() {
        if m.degree().le(bound) && !m.is_identity() {
            let next = var_index.len();
            var_index.entry(m).or_insert(next);
        }
    }

    let mut rows: Vec<Vec<i128>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    let mut labels: Vec<(String, String)> = Vec::new();
    for (mu, nu) in composable_pairs(graph, bound)? {
        if mu.is_identity() || nu.is_identity() {
            continue;
        }
        let prod = graph.compose(&mu, &nu)?;
        let mut row = vec![0i128; var_index.len()];
        row[var_index[&mu]] += 1;
        row[var_index[&nu]] += 1;
        row[var_index[&prod]] -= 1;
        let a = angle_of(c_tilde.eval(&mu, &nu)?)?;
        let b = angle_of(c.eval(&mu, &nu)?)?;
        rows.push(row);
        rhs.push(rat_mod1(a - b));
        labels.push((graph.display_morphism(&mu), graph.display_morphism(&nu)));
    }

    let coeffs = IntMat::from_rows(&rows);
    match solve_mod1(&coeffs, &rhs) {
        Mod1Solution::Solvable { x } => {
            let mut map = BTreeMap::new();
            for (m, &i) in &var_index {
                map.insert(m.clone(), CircleValue::from_angle(x[i]));
            }
            Ok(CohomologyVerdict::Cohomologous {
                b: MorphismPhase::Table { map: Arc::new(map) },
            })
        }
        Mod1Solution::Inconsistent { combination, value } => {
            let terms = combination
                .iter()
                .enumerate()
                .filter(|(_, &cf)| cf != 0)
                .map(|(i, &cf)| (labels[i].0.clone(), labels[i].1.clone(), cf))
                .collect();
            Ok(CohomologyVerdict::Inconsistent(CohomologyObstruction {
                terms,
                angle: value,
            }))
        }
    }
}

fn angle_of(v: CircleValue) -> Result<Rat, CocycleError> {
    match v {
        CircleValue::Exact(q) => Ok(q),
        CircleValue::Approx(_) => Err(CocycleError::ApproximateModeUnsupported),
    }
}

/// A path of cocycles t ∈ [0,1] ↦ c_t.
pub struct CocycleHomotopy {
    c0: Cocycle2,
    path: HomotopyPath,
}

pub enum HomotopyPath {
    /// c_t = c₀·e^{2πi t σ}.
    Exponential { sigma: Arc<RealCocycle2> },
    /// Finitely many sampled cocycles with a declared Lipschitz modulus:
    /// |angle(c_s) − angle(c_t)| <= modulus·|s − t| on every pair.
    SampledGrid {
        samples: Vec<(Rat, Cocycle2)>,
        modulus: Rat,
    },
}

impl CocycleHomotopy {
    pub fn exponential(c0: Cocycle2, sigma: Arc<RealCocycle2>) -> Result<Self, CocycleError> {
        if !Arc::ptr_eq(c0.graph(), sigma.graph()) {
            return Err(CocycleError::GraphMismatch);
        }
        Ok(CocycleHomotopy {
            c0,
            path: HomotopyPath::Exponential { sigma },
        })
    }

    /// Samples must be sorted, within [0,1], and start at t = 0; the t = 0
    /// sample is the base cocycle.
    pub fn sampled(samples: Vec<(Rat, Cocycle2)>, modulus: Rat) -> Result<Self, CocycleError> {
        let Some(first) = samples.first() else {
            return Err(CocycleError::Invalid("empty sample grid".into()));
        };
        if !first.0.is_zero() {
            return Err(CocycleError::Invalid("grid must start at t = 0".into()));
        }
        for w in samples.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(CocycleError::Invalid("grid not strictly increasing".into()));
            }
            if !Arc::ptr_eq(w[0].1.graph(), w[1].1.graph()) {
                return Err(CocycleError::GraphMismatch);
            }
        }
        let last = samples.last().unwrap().0;
        if last > Rat::from_integer(1) {
            return Err(CocycleError::OutOfRange(last));
        }
        let c0 = samples[0].1.clone();
        Ok(CocycleHomotopy {
            c0,
            path: HomotopyPath::SampledGrid { samples, modulus },
        })
    }

    pub fn base(&self) -> &Cocycle2 {
        &self.c0
    }

    pub fn path(&self) -> &HomotopyPath {
        &self.path
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        self.c0.graph()
    }

    /// Grid points where this homotopy is known exactly: everything for
    /// Exponential, the declared samples for SampledGrid.
    pub fn sample_points(&self, requested: &[Rat]) -> Result<Vec<Rat>, CocycleError> {
        match &self.path {
            HomotopyPath::Exponential { .. } => Ok(requested.to_vec()),
            HomotopyPath::SampledGrid { samples, .. } => {
                Ok(samples.iter().map(|(t, _)| *t).collect())
            }
        }
    }
}

pub fn homotopy_eval(h: &CocycleHomotopy, t: Rat) -> Result<Cocycle2, CocycleError> {
    if t < Rat::zero() || t > Rat::from_integer(1) {
        return Err(CocycleError::OutOfRange(t));
    }
    match &h.path {
        HomotopyPath::Exponential { sigma } => {
            if t.is_zero() {
                return Ok(h.c0.clone());
            }
            Cocycle2::product(h.c0.clone(), Cocycle2::exponential(sigma.clone(), t))
        }
        HomotopyPath::SampledGrid { samples, .. } => samples
            .iter()
            .find(|(s, _)| *s == t)
            .map(|(_, c)| c.clone())
            .ok_or(CocycleError::OffGrid(t)),
    }
}

/// For a sampled-grid homotopy, check the declared modulus pairwise on
/// adjacent grid points over all composable pairs up to the bound. Returns
/// violation descriptions.
pub fn verify_grid_modulus(
    h: &CocycleHomotopy,
    bound: &DegreeVec,
) -> Result<Vec<String>, CocycleError> {
    let HomotopyPath::SampledGrid { samples, modulus } = &h.path else {
        return Ok(Vec::new());
    };
    let graph = h.graph();
    let mut violations = Vec::new();
    for w in samples.windows(2) {
        let ((t0, ca), (t1, cb)) = (&w[0], &w[1]);
        let dt = *t1 - *t0;
        for (lambda, mu) in composable_pairs(graph, bound)? {
            let a = ca.eval(&lambda, &mu)?;
            let b = cb.eval(&lambda, &mu)?;
            // Circle distance between the two values, as an angle in [0,1/2].
            let gap = match (a, b) {
                (CircleValue::Exact(x), CircleValue::Exact(y)) => {
                    let d = rat_mod1(x - y);
                    d.min(Rat::from_integer(1) - d)
                }
                _ => {
                    let d = (a.angle_f64() - b.angle_f64()).rem_euclid(1.0);
                    let d = d.min(1.0 - d);
                    Rat::approximate_float(d).unwrap_or_else(Rat::zero)
                }
            };
            if gap > *modulus * dt {
                violations.push(format!(
                    "pair ({},{}) jumps {} over [{},{}], exceeding modulus {}",
                    graph.display_morphism(&lambda),
                    graph.display_morphism(&mu),
                    gap,
                    t0,
                    t1,
                    modulus
                ));
            }
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{n2, two_per_color};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d(v: &[u32]) -> DegreeVec {
        DegreeVec(v.to_vec())
    }

    fn n2_arc(bound: (u32, u32)) -> Arc<KGraph> {
        Arc::new(n2(bound))
    }

    #[test]
    fn rotation_values_match_bicharacter_formula() {
        let g = n2_arc((3, 3));
        let c = Cocycle2::rotation(g.clone(), Rat::new(1, 3)).unwrap();
        let e = g.morphism_from_edge_ids(&["e"]).unwrap();
        let f = g.morphism_from_edge_ids(&["f"]).unwrap();
        // c((0,1),(1,0)) = e^{2πiθ·1·1}
        assert_eq!(c.eval(&f, &e).unwrap(), CircleValue::from_angle(Rat::new(1, 3)));
        // c((1,0),(0,1)) = 1
        assert_eq!(c.eval(&e, &f).unwrap(), CircleValue::one());
        // Unit normalization.
        assert!(c.eval(&e, &g.identity(0)).unwrap().is_one());
        assert!(c.eval(&g.identity(0), &e).unwrap().is_one());
    }

    #[test]
    fn rotation_passes_verification() {
        let g = n2_arc((3, 3));
        for theta in [Rat::new(1, 3), Rat::new(1, 4)] {
            let c = Cocycle2::rotation(g.clone(), theta).unwrap();
            let report = verify_cocycle(&c, &d(&[3, 3])).unwrap();
            assert!(report.passed(), "{}", report);
            assert!(report.triples_checked > 0);
        }
    }

    #[test]
    fn trivial_cocycle_verifies_on_branching_graph() {
        let g = Arc::new(two_per_color((2, 2)));
        let c = Cocycle2::trivial(g);
        let report = verify_cocycle(&c, &d(&[2, 2])).unwrap();
        assert!(report.passed(), "{}", report);
    }

    #[test]
    fn corrupted_table_entry_is_detected_with_witnesses() {
        let g = n2_arc((3, 3));
        let c = Cocycle2::rotation(g.clone(), Rat::new(1, 4)).unwrap();
        let table = c.tabulate(&d(&[2, 2])).unwrap();
        let report = verify_cocycle(&table, &d(&[2, 2])).unwrap();
        assert!(report.passed(), "{}", report);

        let CocycleRule::Table { entries } = table.rule() else {
            panic!("tabulate must produce a table")
        };
        let mut corrupted = (**entries).clone();
        let e = g.morphism_from_edge_ids(&["e"]).unwrap();
        let f = g.morphism_from_edge_ids(&["f"]).unwrap();
        let key = (f.clone(), e.clone());
        let old = corrupted[&key];
        corrupted.insert(key, old.mul(CircleValue::from_angle(Rat::new(1, 5))));
        let bad = Cocycle2::table(g.clone(), corrupted);
        let report = verify_cocycle(&bad, &d(&[2, 2])).unwrap();
        assert!(!report.passed());
        // Every flagged triple must involve the corrupted pair somewhere.
        let (fe, ee) = ("f".to_string(), "e".to_string());
        for v in &report.identity {
            let touches = (v.mu == fe && v.nu == ee)
                || (v.lambda == fe && v.mu == ee)
                || v.lambda == fe
                || v.mu == fe;
            assert!(touches, "violation does not involve the corrupted entry");
        }
    }

    #[test]
    fn degree_linear_coboundary_is_trivial() {
        let g = n2_arc((3, 3));
        let b = MorphismPhase::DegreeLinear {
            q: vec![Rat::new(1, 5), Rat::new(2, 7)],
        };
        let c = Cocycle2::coboundary(g.clone(), b).unwrap();
        for (lambda, mu) in composable_pairs(&g, &d(&[2, 2])).unwrap() {
            assert!(c.eval(&lambda, &mu).unwrap().is_one());
        }
    }

    fn random_phase_table(g: &Arc<KGraph>, seed: u64) -> MorphismPhase {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut map = BTreeMap::new();
        for m in g.all_morphisms() {
            if m.is_identity() {
                continue;
            }
            let q = rng.gen_range(1..=8i64);
            let p = rng.gen_range(0..q);
            map.insert(m, CircleValue::from_angle(Rat::new(p, q)));
        }
        MorphismPhase::Table { map: Arc::new(map) }
    }

    #[test]
    fn random_coboundaries_are_valid_cocycles() {
        let g = n2_arc((2, 2));
        for seed in 0..5 {
            let b = random_phase_table(&g, seed);
            // The constructor itself verifies up to the graph bound.
            let c = Cocycle2::coboundary(g.clone(), b).unwrap();
            assert!(verify_cocycle(&c, &d(&[2, 2])).unwrap().passed());
        }
    }

    #[test]
    fn vertex_phase_must_be_one() {
        let g = n2_arc((2, 2));
        let mut map = BTreeMap::new();
        map.insert(g.identity(0), CircleValue::from_angle(Rat::new(1, 3)));
        let b = MorphismPhase::Table { map: Arc::new(map) };
        assert!(matches!(
            Cocycle2::coboundary(g, b),
            Err(CocycleError::BadNormalization { .. })
        ));
    }

    #[test]
    fn cocycle_is_cohomologous_to_itself() {
        let g = n2_arc((2, 2));
        let c = Cocycle2::rotation(g.clone(), Rat::new(1, 3)).unwrap();
        match is_cohomologous(&c, &c, &d(&[2, 2])).unwrap() {
            CohomologyVerdict::Cohomologous { b } => {
                // δb must be trivial on the bound.
                let db = Cocycle2::coboundary(g.clone(), b).unwrap();
                for (mu, nu) in composable_pairs(&g, &d(&[2, 2])).unwrap() {
                    assert!(db.eval(&mu, &nu).unwrap().is_one());
                }
            }
            CohomologyVerdict::Inconsistent(w) => panic!("unexpected obstruction: {}", w),
        }
    }

    #[test]
    fn solver_recovers_a_coboundary_shift() {
        let g = n2_arc((2, 2));
        let c = Cocycle2::rotation(g.clone(), Rat::new(1, 4)).unwrap();
        let b0 = random_phase_table(&g, 42);
        let db0 = Cocycle2::coboundary(g.clone(), b0).unwrap();
        let c_tilde = Cocycle2::product(c.clone(), db0).unwrap();
        match is_cohomologous(&c, &c_tilde, &d(&[2, 2])).unwrap() {
            CohomologyVerdict::Cohomologous { b } => {
                // Soundness: δb·c must reproduce c̃ exactly on the bound.
                let db = Cocycle2::coboundary(g.clone(), b).unwrap();
                let rebuilt = Cocycle2::product(c.clone(), db).unwrap();
                for (mu, nu) in composable_pairs(&g, &d(&[2, 2])).unwrap() {
                    assert_eq!(
                        rebuilt.eval(&mu, &nu).unwrap(),
                        c_tilde.eval(&mu, &nu).unwrap()
                    );
                }
            }
            CohomologyVerdict::Inconsistent(w) => panic!("unexpected obstruction: {}", w),
        }
    }

    #[test]
    fn half_turn_shift_is_obstructed() {
        let g = n2_arc((2, 2));
        let c = Cocycle2::rotation(g.clone(), Rat::new(1, 3)).unwrap();
        let c_shift = Cocycle2::rotation(g.clone(), Rat::new(1, 3) + Rat::new(1, 2)).unwrap();
        match is_cohomologous(&c, &c_shift, &d(&[2, 2])).unwrap() {
            CohomologyVerdict::Cohomologous { .. } => panic!("θ and θ+1/2 must differ"),
            CohomologyVerdict::Inconsistent(w) => {
                assert!(!w.angle.is_zero());
                assert!(!w.terms.is_empty());
            }
        }
    }

    #[test]
    fn exponential_homotopy_interpolates_rotation() {
        let g = n2_arc((3, 3));
        let theta = Rat::new(1, 3);
        let sigma = Arc::new(RealCocycle2::rotation(g.clone(), theta).unwrap());
        let h = CocycleHomotopy::exponential(Cocycle2::trivial(g.clone()), sigma).unwrap();
        let e = g.morphism_from_edge_ids(&["e"]).unwrap();
        let f = g.morphism_from_edge_ids(&["f"]).unwrap();

        let c1 = homotopy_eval(&h, Rat::from_integer(1)).unwrap();
        assert_eq!(c1.eval(&f, &e).unwrap(), CircleValue::from_angle(theta));

        let c_half = homotopy_eval(&h, Rat::new(1, 2)).unwrap();
        assert_eq!(
            c_half.eval(&f, &e).unwrap(),
            CircleValue::from_angle(Rat::new(1, 6))
        );

        let c0 = homotopy_eval(&h, Rat::zero()).unwrap();
        assert!(c0.eval(&f, &e).unwrap().is_one());

        // Every slice on a coarse grid is a valid cocycle.
        for t in [Rat::zero(), Rat::new(1, 2), Rat::from_integer(1)] {
            let ct = homotopy_eval(&h, t).unwrap();
            assert!(verify_cocycle(&ct, &d(&[2, 2])).unwrap().passed());
        }

        assert!(matches!(
            homotopy_eval(&h, Rat::new(3, 2)),
            Err(CocycleError::OutOfRange(_))
        ));
    }

    #[test]
    fn sampled_grid_requires_grid_points() {
        let g = n2_arc((2, 2));
        let samples = vec![
            (Rat::zero(), Cocycle2::trivial(g.clone())),
            (Rat::new(1, 2), Cocycle2::rotation(g.clone(), Rat::new(1, 6)).unwrap()),
            (Rat::from_integer(1), Cocycle2::rotation(g.clone(), Rat::new(1, 3)).unwrap()),
        ];
        let h = CocycleHomotopy::sampled(samples, Rat::new(2, 3)).unwrap();
        assert!(homotopy_eval(&h, Rat::new(1, 2)).is_ok());
        assert!(matches!(
            homotopy_eval(&h, Rat::new(1, 3)),
            Err(CocycleError::OffGrid(_))
        ));
        // Declared modulus 2/3 covers the rotation steps on this grid.
        let violations = verify_grid_modulus(&h, &d(&[2, 2])).unwrap();
        assert!(violations.is_empty(), "{:?}", violations);
        // An unreasonably tight modulus is caught.
        let samples = vec![
            (Rat::zero(), Cocycle2::trivial(g.clone())),
            (Rat::from_integer(1), Cocycle2::rotation(g.clone(), Rat::new(1, 3)).unwrap()),
        ];
        let tight = CocycleHomotopy::sampled(samples, Rat::new(1, 100)).unwrap();
        assert!(!verify_grid_modulus(&tight, &d(&[2, 2])).unwrap().is_empty());
    }

    #[test]
    fn real_rotation_cocycle_satisfies_additive_identity() {
        let g = n2_arc((3, 3));
        let sigma = RealCocycle2::rotation(g, Rat::new(1, 3)).unwrap();
        let violations = verify_real_cocycle(&sigma, &d(&[2, 2])).unwrap();
        assert!(violations.is_empty(), "{:?}", violations);
    }

    #[test]
    fn pullback_through_identity_projection_is_transparent() {
        let g = n2_arc((3, 3));
        let proj = GraphProjection::new(
            g.clone(),
            g.clone(),
            (0..g.skeleton().vertex_count() as u32).collect(),
            (0..g.skeleton().edge_count() as u32).collect(),
        )
        .unwrap();
        let c = Arc::new(Cocycle2::rotation(g.clone(), Rat::new(1, 3)).unwrap());
        let pulled = Cocycle2::pullback(c.clone(), Arc::new(proj)).unwrap();
        let e = g.morphism_from_edge_ids(&["e"]).unwrap();
        let f = g.morphism_from_edge_ids(&["f"]).unwrap();
        assert_eq!(pulled.eval(&f, &e).unwrap(), c.eval(&f, &e).unwrap());
    }
}
