//! Skew products Λ×_d Z^k over a finite window, and the degree-coboundary
//! solver.
//!
//! The skew product has vertices (v, n) and morphisms (λ, n) with structure
//! maps r(λ,n) = (r(λ),n), s(λ,n) = (s(λ),n+d(λ)) and composition
//! (λ,n)(μ,n+d(λ)) = (λμ,n). Z^k is restricted to a finite box; generators
//! whose endpoints leave the box simply do not exist, and the clipped
//! boundary shows up as flagged source-free violations in validation.
//!
//! On any graph, `solve_degree_coboundary` looks for a vertex potential b
//! with d(λ) = b(s(λ)) − b(r(λ)); it succeeds exactly when every skeleton
//! cycle has zero signed degree, and otherwise returns such a cycle.

use crate::cocycle::{
    Cocycle2, CocycleError, CocycleHomotopy, GraphProjection, HomotopyPath, RealCocycle2,
};
use crate::degree::{DegreeVec, IntVec, LatticeBox};
use crate::graph::{EdgeDecl, GraphError, KGraph, Morphism, Skeleton};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SkewError {
    #[error("window and base graph have different ranks")]
    RankMismatch,
    #[error("base graph bound {base_bound} cannot cover the window extent {extent}")]
    BaseBoundTooSmall {
        base_bound: DegreeVec,
        extent: DegreeVec,
    },
    #[error("translation leaves the window: {detail}")]
    WindowEscape { detail: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn point_name(n: &IntVec) -> String {
    n.0.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// A windowed skew product, remembering how its vertices and edges sit over
/// the base.
pub struct SkewProduct {
    base: Arc<KGraph>,
    window: LatticeBox,
    graph: Arc<KGraph>,
    projection: Arc<GraphProjection>,
    /// skew vertex index -> (base vertex index, offset)
    vertex_data: Vec<(u32, IntVec)>,
    vertex_lookup: BTreeMap<(u32, IntVec), u32>,
    /// (base edge index, offset) -> skew edge index
    edge_lookup: BTreeMap<(u32, IntVec), u32>,
}

pub fn skew(base: Arc<KGraph>, window: LatticeBox) -> Result<SkewProduct, SkewError> {
    let k = base.k();
    if window.k() != k {
        return Err(SkewError::RankMismatch);
    }
    let extent = window.extent();
    if !extent.le(base.bound()) {
        return Err(SkewError::BaseBoundTooSmall {
            base_bound: base.bound().clone(),
            extent,
        });
    }
    let points = window.points();
    let sk = base.skeleton();

    let vertex_name =
        |v: u32, n: &IntVec| format!("{}@{}", sk.vertex_name(v), point_name(n));
    let edge_name = |e: u32, n: &IntVec| format!("{}@{}", sk.edge(e).id, point_name(n));

    let mut vertices = Vec::new();
    let mut name_to_data: BTreeMap<String, (u32, IntVec)> = BTreeMap::new();
    for v in 0..sk.vertex_count() as u32 {
        for n in &points {
            let name = vertex_name(v, n);
            name_to_data.insert(name.clone(), (v, n.clone()));
            vertices.push(name);
        }
    }

    let mut edges = Vec::new();
    let mut edge_name_to_data: BTreeMap<String, (u32, IntVec)> = BTreeMap::new();
    for e in 0..sk.edge_count() as u32 {
        let edge = sk.edge(e);
        let d = DegreeVec::unit(k, edge.color).to_int();
        for n in &points {
            let far = n.add(&d);
            if window.contains(&far) {
                let id = edge_name(e, n);
                edge_name_to_data.insert(id.clone(), (e, n.clone()));
                edges.push(EdgeDecl {
                    id,
                    color: edge.color + 1,
                    source: vertex_name(edge.source, &far),
                    range: vertex_name(edge.range, n),
                });
            }
        }
    }

    let mut squares = Vec::new();
    for sq in sk.squares() {
        let e = sk.edge(sq.lhs.0);
        let fp = sk.edge(sq.rhs.0);
        let de = DegreeVec::unit(k, e.color).to_int();
        let dfp = DegreeVec::unit(k, fp.color).to_int();
        let corner = de.add(&dfp);
        for n in &points {
            if window.contains(&n.add(&corner)) {
                squares.push((
                    (edge_name(sq.lhs.0, n), edge_name(sq.lhs.1, &n.add(&de))),
                    (edge_name(sq.rhs.0, n), edge_name(sq.rhs.1, &n.add(&dfp))),
                ));
            }
        }
    }

    let skeleton = Skeleton::new(k, vertices, edges, squares)?;
    let graph = Arc::new(KGraph::new(skeleton, window.extent())?);

    let vcount = graph.skeleton().vertex_count();
    let mut vertex_data = Vec::with_capacity(vcount);
    let mut vertex_lookup = BTreeMap::new();
    for i in 0..vcount as u32 {
        let data = name_to_data[graph.skeleton().vertex_name(i)].clone();
        vertex_lookup.insert(data.clone(), i);
        vertex_data.push(data);
    }
    let ecount = graph.skeleton().edge_count();
    let mut base_edges = Vec::with_capacity(ecount);
    let mut edge_lookup = BTreeMap::new();
    for i in 0..ecount as u32 {
        let data = edge_name_to_data[&graph.skeleton().edge(i).id].clone();
        base_edges.push(data.0);
        edge_lookup.insert(data, i);
    }

    let projection = Arc::new(GraphProjection::new(
        graph.clone(),
        base.clone(),
        vertex_data.iter().map(|(v, _)| *v).collect(),
        base_edges,
    )
    .map_err(|e| GraphError::MalformedSkeleton {
        detail: format!("skew projection is not functorial: {}", e),
    })?);

    Ok(SkewProduct {
        base,
        window,
        graph,
        projection,
        vertex_data,
        vertex_lookup,
        edge_lookup,
    })
}

impl SkewProduct {
    pub fn base(&self) -> &Arc<KGraph> {
        &self.base
    }

    pub fn window(&self) -> &LatticeBox {
        &self.window
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        &self.graph
    }

    pub fn projection(&self) -> &Arc<GraphProjection> {
        &self.projection
    }

    /// The (base vertex, offset) pair of a skew vertex.
    pub fn vertex_info(&self, v: u32) -> &(u32, IntVec) {
        &self.vertex_data[v as usize]
    }

    pub fn vertex_at(&self, base_vertex: u32, n: &IntVec) -> Result<u32, SkewError> {
        self.vertex_lookup
            .get(&(base_vertex, n.clone()))
            .copied()
            .ok_or_else(|| SkewError::WindowEscape {
                detail: format!(
                    "vertex {}@{} is outside the window",
                    self.base.skeleton().vertex_name(base_vertex),
                    point_name(n)
                ),
            })
    }

    /// Lift a base morphism to start at offset n: the generator (λ, n).
    pub fn lift(&self, lambda: &Morphism, n: &IntVec) -> Result<Morphism, SkewError> {
        let mut offset = n.clone();
        let mut word = Vec::with_capacity(lambda.word().len());
        for &e in lambda.word() {
            let idx = self.edge_lookup.get(&(e, offset.clone())).copied().ok_or_else(|| {
                SkewError::WindowEscape {
                    detail: format!(
                        "edge {}@{} is outside the window",
                        self.base.skeleton().edge(e).id,
                        point_name(&offset)
                    ),
                }
            })?;
            let color = self.base.skeleton().edge(e).color;
            offset = offset.add(&DegreeVec::unit(self.base.k(), color).to_int());
            word.push(idx);
        }
        let range = self.vertex_at(lambda.range(), n)?;
        Ok(self.graph.morphism_from_word(range, word)?)
    }

    /// The base morphism and starting offset of a skew morphism.
    pub fn project(&self, m: &Morphism) -> Result<(Morphism, IntVec), SkewError> {
        let base_m = self.projection.project(m).map_err(SkewError::Graph)?;
        let (_, offset) = &self.vertex_data[m.range() as usize];
        Ok((base_m, offset.clone()))
    }

    /// Move a generator by m in the Z^k direction: (λ, n) ↦ (λ, n+m).
    pub fn translate(&self, gen: &Morphism, m: &IntVec) -> Result<Morphism, SkewError> {
        let (base_m, offset) = self.project(gen)?;
        self.lift(&base_m, &offset.add(m))
    }

    pub fn pullback_cocycle(&self, c: Arc<Cocycle2>) -> Result<Cocycle2, CocycleError> {
        Cocycle2::pullback(c, self.projection.clone())
    }

    pub fn pullback_real(&self, sigma: Arc<RealCocycle2>) -> Result<RealCocycle2, CocycleError> {
        RealCocycle2::pullback(sigma, self.projection.clone())
    }

    /// Pull a homotopy of cocycles back slice by slice.
    pub fn pullback_homotopy(&self, h: &CocycleHomotopy) -> Result<CocycleHomotopy, CocycleError> {
        let c0 = self.pullback_cocycle(Arc::new(h.base().clone()))?;
        match h.path() {
            HomotopyPath::Exponential { sigma } => {
                let pulled = Arc::new(self.pullback_real(sigma.clone())?);
                CocycleHomotopy::exponential(c0, pulled)
            }
            HomotopyPath::SampledGrid { samples, modulus } => {
                let mut pulled = Vec::with_capacity(samples.len());
                for (t, c) in samples {
                    pulled.push((*t, self.pullback_cocycle(Arc::new(c.clone()))?));
                }
                CocycleHomotopy::sampled(pulled, *modulus)
            }
        }
    }
}

/// A vertex potential with δb = d: b(s(λ)) − b(r(λ)) = d(λ) for every
/// generator.
#[derive(Clone, Debug)]
pub struct DegreePotential {
    /// Indexed by vertex.
    pub b: Vec<IntVec>,
}

impl DegreePotential {
    /// Check δb = d on every edge of the skeleton.
    pub fn verify(&self, g: &KGraph) -> bool {
        let sk = g.skeleton();
        (0..sk.edge_count() as u32).all(|e| {
            let edge = sk.edge(e);
            let d = DegreeVec::unit(g.k(), edge.color).to_int();
            self.b[edge.source as usize].sub(&self.b[edge.range as usize]) == d
        })
    }
}

/// A closed walk with nonzero signed degree, certifying that no potential
/// exists. Signs: +1 traverses the edge range→source, −1 the reverse.
#[derive(Debug)]
pub struct DegreeObstruction {
    pub cycle: Vec<(String, i8)>,
    pub degree_sum: IntVec,
}

impl fmt::Display for DegreeObstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let steps: Vec<String> = self
            .cycle
            .iter()
            .map(|(id, sign)| {
                if *sign > 0 {
                    id.clone()
                } else {
                    format!("{}⁻¹", id)
                }
            })
            .collect();
        write!(
            f,
            "cycle [{}] has signed degree {} ≠ 0",
            steps.join(", "),
            self.degree_sum
        )
    }
}

pub enum DegreeCoboundary {
    Potential(DegreePotential),
    Obstruction(DegreeObstruction),
}

/// Solve d = δb by a spanning-forest sweep. Roots are the least vertex index
/// of each component and get b = 0; an inconsistent non-tree edge yields the
/// offending cycle.
pub fn solve_degree_coboundary(g: &KGraph) -> DegreeCoboundary {
    let sk = g.skeleton();
    let k = g.k();
    let vcount = sk.vertex_count();
    let mut b: Vec<Option<IntVec>> = vec![None; vcount];
    // parent[v] = (edge, sign) used to reach v in the forest.
    let mut parent: Vec<Option<(u32, i8)>> = vec![None; vcount];

    // Undirected adjacency: (edge, sign, other endpoint).
    let mut adj: Vec<Vec<(u32, i8, u32)>> = vec![Vec::new(); vcount];
    for e in 0..sk.edge_count() as u32 {
        let edge = sk.edge(e);
        adj[edge.range as usize].push((e, 1, edge.source));
        adj[edge.source as usize].push((e, -1, edge.range));
    }

    let edge_degree = |e: u32| DegreeVec::unit(k, sk.edge(e).color).to_int();

    for root in 0..vcount {
        if b[root].is_some() {
            continue;
        }
        b[root] = Some(IntVec::zero(k));
        let mut queue = std::collections::VecDeque::from([root as u32]);
        while let Some(v) = queue.pop_front() {
            let bv = b[v as usize].clone().unwrap();
            for &(e, sign, w) in &adj[v as usize] {
                let d = edge_degree(e);
                let step = if sign > 0 { d } else { d.neg() };
                let bw = bv.add(&step);
                match &b[w as usize] {
                    None => {
                        b[w as usize] = Some(bw);
                        parent[w as usize] = Some((e, sign));
                        queue.push_back(w);
                    }
                    Some(existing) => {
                        if *existing != bw {
                            // Close the cycle: the edge (v,w) plus the tree
                            // paths from v and w back to their meeting point.
                            return DegreeCoboundary::Obstruction(build_cycle_witness(
                                g, &parent, v, w, e, sign,
                            ));
                        }
                    }
                }
            }
        }
    }

    DegreeCoboundary::Potential(DegreePotential {
        b: b.into_iter().map(|x| x.unwrap()).collect(),
    })
}

fn build_cycle_witness(
    g: &KGraph,
    parent: &[Option<(u32, i8)>],
    v: u32,
    w: u32,
    e: u32,
    sign: i8,
) -> DegreeObstruction {
    let sk = g.skeleton();
    let k = g.k();
    // Tree paths from v and w to the root, as (edge, sign) traversed
    // root-ward. Trim the common suffix so the walk closes at the meet point.
    let path_to_root = |mut x: u32| {
        let mut path = Vec::new();
        let mut nodes = vec![x];
        while let Some((pe, psign)) = parent[x as usize] {
            path.push((pe, psign));
            let edge = sk.edge(pe);
            x = if psign > 0 { edge.range } else { edge.source };
            nodes.push(x);
        }
        (path, nodes)
    };
    let (pv, nv) = path_to_root(v);
    let (pw, nw) = path_to_root(w);
    let mut shared = 0;
    while shared < pv.len()
        && shared < pw.len()
        && nv[nv.len() - 1 - shared] == nw[nw.len() - 1 - shared]
        && pv[pv.len() - 1 - shared] == pw[pw.len() - 1 - shared]
    {
        shared += 1;
    }

    // Walk w → meet (root-ward), then meet → v (leaf-ward, reversed), then
    // the closing edge v → w.
    let mut cycle: Vec<(u32, i8)> = Vec::new();
    for &(pe, psign) in pw[..pw.len() - shared].iter() {
        cycle.push((pe, -psign));
    }
    for &(pe, psign) in pv[..pv.len() - shared].iter().rev() {
        cycle.push((pe, psign));
    }
    cycle.push((e, sign));

    let mut degree_sum = IntVec::zero(k);
    for &(ce, csign) in &cycle {
        let d = DegreeVec::unit(k, sk.edge(ce).color).to_int();
        degree_sum = degree_sum.add(&if csign > 0 { d } else { d.neg() });
    }
    debug_assert!(!degree_sum.is_zero(), "witness cycle must obstruct");
    DegreeObstruction {
        cycle: cycle
            .into_iter()
            .map(|(ce, s)| (sk.edge(ce).id.clone(), s))
            .collect(),
        degree_sum,
    }
}
