//! Level algebras, phase-twisted connecting maps, the κ intertwiner
//! recursion, Bratteli diagrams, and truncated K_0 presentations for graphs
//! whose degree functor is a potential coboundary (d = δb).
//!
//! A level algebra at b-level n is the span of matrix units e_{λμ} over
//! pairs of enumerated morphisms with a common source vertex v satisfying
//! b(v) = n, one matrix block per such vertex. Connecting maps send e_{λμ}
//! to phase-weighted sums over common extensions, and the diagonal κ-phase
//! unitaries intertwine the twisted and untwisted systems.

use crate::abelian::FPAbelianGroup;
use crate::cocycle::{homotopy_eval, Cocycle2, CocycleError, CocycleHomotopy};
use crate::degree::{DegreeVec, IntVec};
use crate::graph::{GraphError, KGraph, Morphism};
use crate::phase::{CircleValue, Rat};
use crate::scalar::Coef;
use crate::skew::{DegreePotential, SkewError, SkewProduct};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AfError {
    #[error("the degree functor is not the coboundary of the given potential")]
    NotCoboundaryDegree,
    #[error("window escape: {detail}")]
    WindowEscape { detail: String },
    #[error("level mismatch: {detail}")]
    LevelMismatch { detail: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Skew(#[from] SkewError),
}

/// (block index, row label index, column label index) within a LevelAlgebra.
pub type MatrixUnitId = (u32, u32, u32);

/// The finite-dimensional algebra spanned by matrix units e_{λμ} over
/// morphisms λ, μ sharing a source vertex at the given potential level.
pub struct LevelAlgebra {
    graph: Arc<KGraph>,
    level: IntVec,
    summands: Vec<u32>,
    labels: Vec<Vec<Morphism>>,
    index: Vec<BTreeMap<Morphism, u32>>,
}

impl std::fmt::Debug for LevelAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LevelAlgebra")
            .field("level", &self.level)
            .field("summands", &self.summands)
            .field("label_counts", &self.label_counts())
            .finish()
    }
}

impl LevelAlgebra {
    pub fn new(
        graph: Arc<KGraph>,
        potential: &DegreePotential,
        level: IntVec,
    ) -> Result<Self, AfError> {
        if !potential.verify(&graph) {
            return Err(AfError::NotCoboundaryDegree);
        }
        let summands: Vec<u32> = (0..graph.skeleton().vertex_count() as u32)
            .filter(|&v| potential.b[v as usize] == level)
            .collect();
        let mut labels = Vec::with_capacity(summands.len());
        let mut index = Vec::with_capacity(summands.len());
        for &v in &summands {
            let ms = graph.morphisms_with_source(v);
            let idx: BTreeMap<Morphism, u32> = ms
                .iter()
                .enumerate()
                .map(|(i, m)| (m.clone(), i as u32))
                .collect();
            labels.push(ms);
            index.push(idx);
        }
        Ok(LevelAlgebra {
            graph,
            level,
            summands,
            labels,
            index,
        })
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        &self.graph
    }

    pub fn level(&self) -> &IntVec {
        &self.level
    }

    pub fn summands(&self) -> &[u32] {
        &self.summands
    }

    /// Number of matrix-unit row/column labels in each block; these are the
    /// truncated label-set sizes every report should surface.
    pub fn label_counts(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.len()).collect()
    }

    pub fn label(&self, block: u32, i: u32) -> &Morphism {
        &self.labels[block as usize][i as usize]
    }

    pub fn find_label(&self, block: u32, m: &Morphism) -> Option<u32> {
        self.index[block as usize].get(m).copied()
    }

    pub fn units(&self) -> impl Iterator<Item = MatrixUnitId> + '_ {
        (0..self.labels.len() as u32).flat_map(move |b| {
            let n = self.labels[b as usize].len() as u32;
            (0..n).flat_map(move |i| (0..n).map(move |j| (b, i, j)))
        })
    }

    pub fn unit_count(&self) -> usize {
        self.labels.iter().map(|l| l.len() * l.len()).sum()
    }

    pub fn unit_name(&self, u: MatrixUnitId) -> String {
        let (b, i, j) = u;
        format!(
            "e[{}|{}]",
            self.graph.display_morphism(self.label(b, i)),
            self.graph.display_morphism(self.label(b, j))
        )
    }

    /// Construction is deterministic, so two instances over the same graph
    /// with the same level and summands index their matrix units
    /// identically and their maps compose.
    pub fn same_shape(&self, other: &LevelAlgebra) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph)
            && self.level == other.level
            && self.summands == other.summands
    }
}

/// A linear map between level algebras sending each matrix unit to a finite
/// phase-weighted combination of target matrix units.
#[derive(Debug, Clone)]
pub struct PhaseMatrixUnitMap {
    from: Arc<LevelAlgebra>,
    to: Arc<LevelAlgebra>,
    action: BTreeMap<MatrixUnitId, Vec<(MatrixUnitId, Coef)>>,
}

impl PhaseMatrixUnitMap {
    pub fn new(
        from: Arc<LevelAlgebra>,
        to: Arc<LevelAlgebra>,
        action: BTreeMap<MatrixUnitId, Vec<(MatrixUnitId, Coef)>>,
    ) -> Self {
        PhaseMatrixUnitMap { from, to, action }
    }

    pub fn identity(a: Arc<LevelAlgebra>) -> Self {
        let action = a
            .units()
            .map(|u| (u, vec![(u, Coef::one())]))
            .collect();
        PhaseMatrixUnitMap {
            from: a.clone(),
            to: a,
            action,
        }
    }

    pub fn from_algebra(&self) -> &Arc<LevelAlgebra> {
        &self.from
    }

    pub fn to_algebra(&self) -> &Arc<LevelAlgebra> {
        &self.to
    }

    pub fn apply(&self, u: MatrixUnitId) -> &[(MatrixUnitId, Coef)] {
        self.action.get(&u).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Composite: apply `self`, then `next`.
    pub fn then(&self, next: &PhaseMatrixUnitMap) -> Result<PhaseMatrixUnitMap, AfError> {
        if !self.to.same_shape(&next.from) {
            return Err(AfError::LevelMismatch {
                detail: "composite maps must share the middle level algebra".into(),
            });
        }
        let mut action = BTreeMap::new();
        for (&u, targets) in &self.action {
            let mut acc: BTreeMap<MatrixUnitId, Coef> = BTreeMap::new();
            for (v, z) in targets {
                for (w, y) in next.apply(*v) {
                    let entry = acc.entry(*w).or_insert_with(Coef::zero);
                    *entry = entry.add(&z.mul(y));
                }
            }
            action.insert(
                u,
                acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            );
        }
        Ok(PhaseMatrixUnitMap {
            from: self.from.clone(),
            to: next.to.clone(),
            action,
        })
    }

    fn collapsed(&self, u: MatrixUnitId) -> BTreeMap<MatrixUnitId, Coef> {
        let mut acc: BTreeMap<MatrixUnitId, Coef> = BTreeMap::new();
        for (v, z) in self.apply(u) {
            let entry = acc.entry(*v).or_insert_with(Coef::zero);
            *entry = entry.add(z);
        }
        acc.retain(|_, c| !c.is_zero());
        acc
    }

    /// The first source unit on which the two maps disagree, with both
    /// images rendered, if any.
    pub fn first_difference(&self, other: &PhaseMatrixUnitMap, tol: f64) -> Option<String> {
        for u in self.from.units() {
            let a = self.collapsed(u);
            let b = other.collapsed(u);
            let keys: Vec<MatrixUnitId> = a.keys().chain(b.keys()).copied().collect();
            for k in keys {
                let (x, y) = (
                    a.get(&k).cloned().unwrap_or_else(Coef::zero),
                    b.get(&k).cloned().unwrap_or_else(Coef::zero),
                );
                if !x.approx_eq(&y, tol) {
                    return Some(format!(
                        "{} -> {}: {} vs {}",
                        self.from.unit_name(u),
                        self.to.unit_name(k),
                        x,
                        y
                    ));
                }
            }
        }
        None
    }

    pub fn approx_eq(&self, other: &PhaseMatrixUnitMap, tol: f64) -> bool {
        self.from.same_shape(&other.from)
            && self.to.same_shape(&other.to)
            && self.first_difference(other, tol).is_none()
    }

    /// Check multiplicativity on generators: the image of e_{λμ}·e_{μν}
    /// equals the product of the images, for every label triple in every
    /// block. Returns violation descriptions.
    pub fn multiplicativity_violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (b, labels) in self.from.labels.iter().enumerate() {
            let n = labels.len() as u32;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let lhs = self.product_of_images((b as u32, i, j), (b as u32, j, k));
                        let rhs = self.collapsed((b as u32, i, k));
                        if !coef_maps_eq(&lhs, &rhs, tol) {
                            out.push(format!(
                                "{}·{} does not map to the image of {}",
                                self.from.unit_name((b as u32, i, j)),
                                self.from.unit_name((b as u32, j, k)),
                                self.from.unit_name((b as u32, i, k))
                            ));
                        }
                    }
                }
            }
        }
        out
    }

    /// Multiply the images of two source units inside the target algebra
    /// using the matrix-unit product rule e_{ab}e_{cd} = δ_{bc} e_{ad}.
    fn product_of_images(
        &self,
        u1: MatrixUnitId,
        u2: MatrixUnitId,
    ) -> BTreeMap<MatrixUnitId, Coef> {
        let mut acc: BTreeMap<MatrixUnitId, Coef> = BTreeMap::new();
        for ((b1, i1, j1), z1) in self.apply(u1) {
            for ((b2, i2, j2), z2) in self.apply(u2) {
                if b1 == b2 && j1 == i2 {
                    let key = (*b1, *i1, *j2);
                    let entry = acc.entry(key).or_insert_with(Coef::zero);
                    *entry = entry.add(&z1.mul(z2));
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        acc
    }
}

fn coef_maps_eq(
    a: &BTreeMap<MatrixUnitId, Coef>,
    b: &BTreeMap<MatrixUnitId, Coef>,
    tol: f64,
) -> bool {
    let keys: Vec<MatrixUnitId> = a.keys().chain(b.keys()).copied().collect();
    keys.iter().all(|k| {
        a.get(k)
            .cloned()
            .unwrap_or_else(Coef::zero)
            .approx_eq(&b.get(k).cloned().unwrap_or_else(Coef::zero), tol)
    })
}

/// The κ phase of a morphism: 1 unless d(λ) ≥ (1,…,1), else κ(μ)·c(μ,α)
/// where λ = μα is the unique splitting with d(α) = (1,…,1). Each step
/// strips one diagonal degree, so the recursion terminates.
pub fn kappa(c: &Cocycle2, lambda: &Morphism) -> Result<CircleValue, AfError> {
    let graph = c.graph();
    let ones = DegreeVec::ones(graph.k());
    let mut acc = CircleValue::one();
    let mut lam = lambda.clone();
    while ones.le(lam.degree()) {
        let head_degree = lam
            .degree()
            .checked_sub(&ones)
            .expect("componentwise bound just checked");
        let (mu, alpha) = graph.factorize(&lam, &head_degree)?;
        acc = acc.mul(c.eval(&mu, &alpha)?);
        lam = mu;
    }
    Ok(acc)
}

fn diag_level(k: usize, h: i64) -> IntVec {
    IntVec(vec![h; k])
}

/// The twisted connecting map φ^c between potential levels:
/// e_{λμ} ↦ Σ_α c(λ,α)·conj(c(μ,α))·e_{λα,μα}, the sum over morphisms α
/// with range s(λ) whose source sits at the target level.
pub fn connecting_map(
    c: &Cocycle2,
    potential: &DegreePotential,
    from_level: &IntVec,
    to_level: &IntVec,
) -> Result<PhaseMatrixUnitMap, AfError> {
    let graph = c.graph().clone();
    let delta = to_level
        .sub(from_level)
        .to_degree()
        .ok_or_else(|| AfError::LevelMismatch {
            detail: format!(
                "target level {:?} is not above source level {:?}",
                to_level.0, from_level.0
            ),
        })?;
    let from = Arc::new(LevelAlgebra::new(
        graph.clone(),
        potential,
        from_level.clone(),
    )?);
    let to = Arc::new(LevelAlgebra::new(graph.clone(), potential, to_level.clone())?);
    let mut action = BTreeMap::new();
    for (b, &v) in from.summands.iter().enumerate() {
        let extensions: Vec<Morphism> = graph.lambda_set(v, &delta)?.to_vec();
        let n = from.labels[b].len() as u32;
        for i in 0..n {
            for j in 0..n {
                let (lam, mu) = (from.label(b as u32, i), from.label(b as u32, j));
                let mut targets = Vec::with_capacity(extensions.len());
                for alpha in &extensions {
                    if !lam.degree().add(&delta).le(graph.bound())
                        || !mu.degree().add(&delta).le(graph.bound())
                    {
                        return Err(AfError::WindowEscape {
                            detail: format!(
                                "extending {} past the enumeration bound {}",
                                graph.display_morphism(lam),
                                graph.bound()
                            ),
                        });
                    }
                    let la = graph.compose(lam, alpha)?;
                    let ma = graph.compose(mu, alpha)?;
                    let w = alpha.source();
                    let tb = to
                        .summands
                        .iter()
                        .position(|&x| x == w)
                        .ok_or_else(|| AfError::LevelMismatch {
                            detail: format!(
                                "extension source {} is not at the target level",
                                graph.skeleton().vertex_name(w)
                            ),
                        })? as u32;
                    let ti = to.find_label(tb, &la).expect("composite enumerated");
                    let tj = to.find_label(tb, &ma).expect("composite enumerated");
                    let phase = c.eval(lam, alpha)?.mul(c.eval(mu, alpha)?.conj());
                    targets.push(((tb, ti, tj), Coef::from_phase(phase)));
                }
                action.insert((b as u32, i, j), targets);
            }
        }
    }
    Ok(PhaseMatrixUnitMap::new(from, to, action))
}

/// Ad U at a level: the diagonal phase map e_{λμ} ↦ κ(λ)·conj(κ(μ))·e_{λμ}.
pub fn ad_u(
    c: &Cocycle2,
    potential: &DegreePotential,
    level: &IntVec,
) -> Result<PhaseMatrixUnitMap, AfError> {
    let graph = c.graph().clone();
    let a = Arc::new(LevelAlgebra::new(graph, potential, level.clone())?);
    let mut action = BTreeMap::new();
    for (b, labels) in a.labels.iter().enumerate() {
        let phases: Vec<CircleValue> = labels
            .iter()
            .map(|m| kappa(c, m))
            .collect::<Result<_, _>>()?;
        let n = labels.len() as u32;
        for i in 0..n {
            for j in 0..n {
                let phase = phases[i as usize].mul(phases[j as usize].conj());
                action.insert(
                    (b as u32, i, j),
                    vec![((b as u32, i, j), Coef::from_phase(phase))],
                );
            }
        }
    }
    Ok(PhaseMatrixUnitMap {
        from: a.clone(),
        to: a,
        action,
    })
}

/// The level-algebra map induced by translating a skew product by m:
/// e_{λμ} ↦ e_{λ·m, μ·m} with coefficient 1.
pub fn translation_map(
    sp: &SkewProduct,
    potential: &DegreePotential,
    from_level: &IntVec,
    m: &IntVec,
) -> Result<PhaseMatrixUnitMap, AfError> {
    let graph = sp.graph().clone();
    let from = Arc::new(LevelAlgebra::new(
        graph.clone(),
        potential,
        from_level.clone(),
    )?);
    let to = Arc::new(LevelAlgebra::new(
        graph,
        potential,
        from_level.add(m),
    )?);
    let mut action = BTreeMap::new();
    for (b, labels) in from.labels.iter().enumerate() {
        let moved: Vec<Morphism> = labels
            .iter()
            .map(|lam| sp.translate(lam, m))
            .collect::<Result<_, _>>()?;
        let n = labels.len() as u32;
        for i in 0..n {
            for j in 0..n {
                let w = moved[i as usize].source();
                let tb = to
                    .summands
                    .iter()
                    .position(|&x| x == w)
                    .ok_or_else(|| AfError::LevelMismatch {
                        detail: "translated source left the expected level".into(),
                    })? as u32;
                let ti = to
                    .find_label(tb, &moved[i as usize])
                    .expect("translated label enumerated");
                let tj = to
                    .find_label(tb, &moved[j as usize])
                    .expect("translated label enumerated");
                action.insert(
                    (b as u32, i, j),
                    vec![((tb, ti, tj), Coef::one())],
                );
            }
        }
    }
    Ok(PhaseMatrixUnitMap::new(from, to, action))
}

/// Result of checking φ^c_{(h+1)·1, h·1} ∘ Ad U_{h·1} against
/// Ad U_{(h+1)·1} ∘ φ_{(h+1)·1, h·1} (the untwisted map on the right leg).
#[derive(Debug)]
pub struct IntertwiningReport {
    pub level: i64,
    pub units_checked: usize,
    pub from_label_counts: Vec<usize>,
    pub to_label_counts: Vec<usize>,
    pub violations: Vec<String>,
}

impl IntertwiningReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_intertwining(
    c: &Cocycle2,
    potential: &DegreePotential,
    h: i64,
) -> Result<IntertwiningReport, AfError> {
    let k = c.graph().k();
    let (lo, hi) = (diag_level(k, h), diag_level(k, h + 1));
    let trivial = Cocycle2::trivial(c.graph().clone());
    let twisted = connecting_map(c, potential, &lo, &hi)?;
    let plain = connecting_map(&trivial, potential, &lo, &hi)?;
    let lhs = ad_u(c, potential, &lo)?.then(&twisted)?;
    let rhs = plain.then(&ad_u(c, potential, &hi)?)?;
    let mut violations = Vec::new();
    if let Some(witness) = lhs.first_difference(&rhs, crate::phase::APPROX_TOL) {
        violations.push(witness);
    }
    Ok(IntertwiningReport {
        level: h,
        units_checked: twisted.from_algebra().unit_count(),
        from_label_counts: twisted.from_algebra().label_counts(),
        to_label_counts: twisted.to_algebra().label_counts(),
        violations,
    })
}

/// Bratteli data of the diagonal-level inductive system: vertex sets at
/// levels h·1 for h = 0..=H and the degree-1 multiplicity matrices between
/// consecutive levels. Cocycles do not enter: twisted and untwisted systems
/// share this datum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BratteliDatum {
    pub truncation: usize,
    /// Vertex names per level (levels 0..=H).
    pub levels: Vec<Vec<String>>,
    /// matrices[h][w][v] = #{α of degree 1 with range levels[h][v], source
    /// levels[h+1][w]}.
    pub matrices: Vec<Vec<Vec<u64>>>,
    /// (vertex name, level, position) for every vertex sitting at a diagonal
    /// level: the basis vector whose K_0 class is distinguished.
    pub distinguished: Vec<(String, usize, usize)>,
}

pub fn bratteli(
    graph: &Arc<KGraph>,
    potential: &DegreePotential,
    truncation: usize,
) -> Result<BratteliDatum, AfError> {
    if !potential.verify(graph) {
        return Err(AfError::NotCoboundaryDegree);
    }
    let k = graph.k();
    let ones = DegreeVec::ones(k);
    let mut level_vertices: Vec<Vec<u32>> = Vec::with_capacity(truncation + 1);
    for h in 0..=truncation {
        let level = diag_level(k, h as i64);
        let vs: Vec<u32> = (0..graph.skeleton().vertex_count() as u32)
            .filter(|&v| potential.b[v as usize] == level)
            .collect();
        if vs.is_empty() {
            return Err(AfError::WindowEscape {
                detail: format!("no vertices at level {h}·1; enlarge the window"),
            });
        }
        level_vertices.push(vs);
    }
    let mut matrices = Vec::with_capacity(truncation);
    for h in 0..truncation {
        let (cols, rows) = (&level_vertices[h], &level_vertices[h + 1]);
        let mut m = vec![vec![0u64; cols.len()]; rows.len()];
        for (vi, &v) in cols.iter().enumerate() {
            for alpha in graph.lambda_set(v, &ones)? {
                let w = alpha.source();
                if let Some(wi) = rows.iter().position(|&x| x == w) {
                    m[wi][vi] += 1;
                } else {
                    return Err(AfError::LevelMismatch {
                        detail: format!(
                            "degree-1 extension lands at {}, which is off the diagonal levels",
                            graph.skeleton().vertex_name(w)
                        ),
                    });
                }
            }
        }
        matrices.push(m);
    }
    let levels: Vec<Vec<String>> = level_vertices
        .iter()
        .map(|vs| {
            vs.iter()
                .map(|&v| graph.skeleton().vertex_name(v).to_string())
                .collect()
        })
        .collect();
    let distinguished = level_vertices
        .iter()
        .enumerate()
        .flat_map(|(h, vs)| {
            vs.iter().enumerate().map(move |(pos, &v)| (v, h, pos))
        })
        .map(|(v, h, pos)| (graph.skeleton().vertex_name(v).to_string(), h, pos))
        .collect();
    Ok(BratteliDatum {
        truncation,
        levels,
        matrices,
        distinguished,
    })
}

impl BratteliDatum {
    /// DOT rendering: one rank per level, edge labels carry multiplicities.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph bratteli {\n  rankdir=BT;\n  node [shape=box];\n");
        for (h, names) in self.levels.iter().enumerate() {
            let _ = write!(s, "  {{ rank=same;");
            for name in names {
                let _ = write!(s, " \"L{h}:{name}\";");
            }
            s.push_str(" }\n");
        }
        for (h, m) in self.matrices.iter().enumerate() {
            for (w, row) in m.iter().enumerate() {
                for (v, &mult) in row.iter().enumerate() {
                    if mult > 0 {
                        let _ = writeln!(
                            s,
                            "  \"L{}:{}\" -> \"L{}:{}\" [label=\"{}\"];",
                            h,
                            self.levels[h][v],
                            h + 1,
                            self.levels[h + 1][w],
                            mult
                        );
                    }
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// A truncated K_0 presentation: generators are the level vertices, one
/// relation per non-top vertex identifying it with its weighted image one
/// level up. Classes are reported in Smith-canonical coordinates with free
/// coordinates sign-normalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K0Report {
    pub truncation: usize,
    /// Nontrivial invariant factors (torsion orders).
    pub torsion: Vec<i128>,
    pub free_rank: usize,
    /// (vertex name, level, canonical class coordinates: torsion then free).
    pub classes: Vec<(String, usize, Vec<i128>)>,
}

pub fn k0_truncated(datum: &BratteliDatum) -> K0Report {
    let offsets: Vec<usize> = datum
        .levels
        .iter()
        .scan(0usize, |acc, names| {
            let start = *acc;
            *acc += names.len();
            Some(start)
        })
        .collect();
    let n_gens: usize = datum.levels.iter().map(|v| v.len()).sum();
    let mut relations = Vec::new();
    for (h, m) in datum.matrices.iter().enumerate() {
        for v in 0..datum.levels[h].len() {
            let mut rel = vec![0i128; n_gens];
            rel[offsets[h] + v] = 1;
            for (w, row) in m.iter().enumerate() {
                rel[offsets[h + 1] + w] -= row[v] as i128;
            }
            relations.push(rel);
        }
    }
    let group = FPAbelianGroup::from_relations(n_gens, &relations);
    let (torsion, free_rank) = group.invariants();
    let torsion = torsion
        .iter()
        .copied()
        .filter(|&d| d != 1)
        .collect::<Vec<_>>();
    let mut raw: Vec<(String, usize, Vec<i128>, Vec<i128>)> = Vec::new();
    for (name, h, pos) in &datum.distinguished {
        let mut x = vec![0i128; n_gens];
        x[offsets[*h] + pos] = 1;
        let class = group.class_of(&x);
        let t: Vec<i128> = class
            .torsion
            .iter()
            .zip(group.invariants().0)
            .filter(|(_, &d)| d != 1)
            .map(|(&c, _)| c)
            .collect();
        raw.push((name.clone(), *h, t, class.free));
    }
    // Sign-normalize each free coordinate: the first distinguished class
    // with a nonzero entry there gets a positive one.
    for j in 0..free_rank {
        if let Some(lead) = raw.iter().map(|(_, _, _, f)| f[j]).find(|&x| x != 0) {
            if lead < 0 {
                for (_, _, _, f) in raw.iter_mut() {
                    f[j] = -f[j];
                }
            }
        }
    }
    let classes = raw
        .into_iter()
        .map(|(name, h, mut t, f)| {
            t.extend(f);
            (name, h, t)
        })
        .collect();
    K0Report {
        truncation: datum.truncation,
        torsion,
        free_rank,
        classes,
    }
}

/// Check that the H-truncated diagram and classes are a consistent shadow of
/// the (H+1)-truncated ones: levels and matrices agree as prefixes, and every
/// relation of the smaller presentation still collapses in the bigger group.
pub fn truncation_consistent(small: &BratteliDatum, big: &BratteliDatum) -> bool {
    if small.truncation > big.truncation {
        return false;
    }
    let h = small.truncation;
    if big.levels[..=h] != small.levels[..] || big.matrices[..h] != small.matrices[..] {
        return false;
    }
    let big_offsets: Vec<usize> = big
        .levels
        .iter()
        .scan(0usize, |acc, names| {
            let start = *acc;
            *acc += names.len();
            Some(start)
        })
        .collect();
    let n_big: usize = big.levels.iter().map(|v| v.len()).sum();
    let mut big_rels = Vec::new();
    for (lev, m) in big.matrices.iter().enumerate() {
        for v in 0..big.levels[lev].len() {
            let mut rel = vec![0i128; n_big];
            rel[big_offsets[lev] + v] = 1;
            for (w, row) in m.iter().enumerate() {
                rel[big_offsets[lev + 1] + w] -= row[v] as i128;
            }
            big_rels.push(rel);
        }
    }
    let big_group = FPAbelianGroup::from_relations(n_big, &big_rels);
    // Small relations, embedded by the level-preserving generator inclusion,
    // must vanish in the big group.
    for (lev, m) in small.matrices.iter().enumerate() {
        for v in 0..small.levels[lev].len() {
            let mut rel = vec![0i128; n_big];
            rel[big_offsets[lev] + v] = 1;
            for (w, row) in m.iter().enumerate() {
                rel[big_offsets[lev + 1] + w] -= row[v] as i128;
            }
            if !big_group.class_of(&rel).is_zero() {
                return false;
            }
        }
    }
    true
}

/// Per-grid-point invariance data for a cocycle homotopy: the intertwining
/// verdicts, the (cocycle-independent) Bratteli datum and K_0 report
/// recomputed at each t, and the κ_t tables that generate the fiberwise
/// phase maps on cylinder indicators.
#[derive(Debug)]
pub struct HomotopyInvarianceReport {
    pub truncation: usize,
    pub grid: Vec<Rat>,
    pub datum: BratteliDatum,
    pub k0: K0Report,
    pub intertwining_violations: Vec<String>,
    /// kappa_tables[t][h] = (morphism label, κ_t) for each level-h·1 label.
    pub kappa_tables: Vec<Vec<Vec<(String, CircleValue)>>>,
    pub identical_across_grid: bool,
}

impl HomotopyInvarianceReport {
    pub fn passed(&self) -> bool {
        self.intertwining_violations.is_empty() && self.identical_across_grid
    }
}

pub fn homotopy_invariance_report(
    potential: &DegreePotential,
    truncation: usize,
    homotopy: &CocycleHomotopy,
    grid: &[Rat],
) -> Result<HomotopyInvarianceReport, AfError> {
    let graph = homotopy.graph().clone();
    let datum = bratteli(&graph, potential, truncation)?;
    let k0 = k0_truncated(&datum);
    let mut violations = Vec::new();
    let mut kappa_tables = Vec::with_capacity(grid.len());
    let mut identical = true;
    for &t in grid {
        let c_t = homotopy_eval(homotopy, t)?;
        for h in 0..truncation as i64 {
            let report = verify_intertwining(&c_t, potential, h)?;
            for v in report.violations {
                violations.push(format!("t={t}, level {h}: {v}"));
            }
        }
        let datum_t = bratteli(&graph, potential, truncation)?;
        if datum_t != datum || k0_truncated(&datum_t) != k0 {
            identical = false;
        }
        let mut levels_table = Vec::with_capacity(truncation + 1);
        for h in 0..=truncation as i64 {
            let algebra = LevelAlgebra::new(graph.clone(), potential, diag_level(graph.k(), h))?;
            let mut table = Vec::new();
            for labels in &algebra.labels {
                for m in labels {
                    table.push((graph.display_morphism(m), kappa(&c_t, m)?));
                }
            }
            levels_table.push(table);
        }
        kappa_tables.push(levels_table);
    }
    Ok(HomotopyInvarianceReport {
        truncation,
        grid: grid.to_vec(),
        datum,
        k0,
        intertwining_violations: violations,
        kappa_tables,
        identical_across_grid: identical,
    })
}
