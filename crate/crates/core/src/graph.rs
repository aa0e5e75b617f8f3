//! Finitely presented k-graphs.
//!
//! A presentation is a k-colored directed multigraph (the 1-skeleton) together
//! with factorization squares: identifications between the two-edge paths
//! e∘f (colors i then j, i != j) and f'∘e' (colors j then i). Morphisms are
//! color-nondecreasing edge words; a word is rewritten into normal form by
//! swapping adjacent out-of-order pairs through squares. Words are read from
//! range to source, so `word[0]` is the edge at the range end and composition
//! concatenates words.
//!
//! All enumeration is capped by an explicit degree bound fixed at
//! construction; requests beyond it fail with `BoundExceeded` instead of
//! silently truncating.

use crate::degree::DegreeVec;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use thiserror::Error;

/// Hard cap on the number of enumerated morphisms, to keep accidental huge
/// bounds from exhausting memory.
const MAX_ENUMERATION: usize = 1 << 21;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("malformed skeleton: {detail}")]
    MalformedSkeleton { detail: String },
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("not composable: left factor has source {left_source:?}, right factor has range {right_range:?}")]
    NotComposable {
        left_source: String,
        right_range: String,
    },
    #[error("degree mismatch: {detail}")]
    DegreeMismatch { detail: String },
    #[error("degree {requested} exceeds enumeration bound {bound}")]
    BoundExceeded {
        requested: DegreeVec,
        bound: DegreeVec,
    },
    #[error("no factorization square identifies the path {first:?}∘{second:?}")]
    MissingSquare { first: String, second: String },
    #[error("more than one factorization square identifies the path {first:?}∘{second:?}")]
    AmbiguousSquare { first: String, second: String },
}

/// One edge of the 1-skeleton. `color` is 0-based internally; the input and
/// display convention is 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub color: usize,
    pub range: u32,
    pub source: u32,
}

/// A factorization square: the path `lhs.0∘lhs.1` (colors i then j) equals
/// `rhs.0∘rhs.1` (colors j then i). Stored by edge index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Square {
    pub lhs: (u32, u32),
    pub rhs: (u32, u32),
}

/// Validated 1-skeleton: vertices and edges exist and colors are in range.
/// Square shape (colors, endpoints) is deliberately *not* enforced here; it is
/// reported by `validate_presentation` so broken presentations can be
/// examined rather than rejected outright.
#[derive(Clone, Debug)]
pub struct Skeleton {
    k: usize,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    squares: Vec<Square>,
    /// [vertex][color] -> edge indices with that range, sorted.
    out_by_range: Vec<Vec<Vec<u32>>>,
}

/// Edge declaration as it appears in input documents: 1-based color,
/// endpoint names.
#[derive(Clone, Debug)]
pub struct EdgeDecl {
    pub id: String,
    pub color: usize,
    pub source: String,
    pub range: String,
}

impl Skeleton {
    pub fn new(
        k: usize,
        vertex_names: Vec<String>,
        edge_decls: Vec<EdgeDecl>,
        square_decls: Vec<((String, String), (String, String))>,
    ) -> Result<Self, GraphError> {
        if k == 0 {
            return Err(GraphError::MalformedSkeleton {
                detail: "k must be at least 1".into(),
            });
        }
        let mut vertices = vertex_names;
        vertices.sort();
        if vertices.is_empty() {
            return Err(GraphError::MalformedSkeleton {
                detail: "no vertices".into(),
            });
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(GraphError::MalformedSkeleton {
                detail: "duplicate vertex name".into(),
            });
        }
        let vertex_index: HashMap<&str, u32> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i as u32))
            .collect();

        let mut decls = edge_decls;
        decls.sort_by(|a, b| a.id.cmp(&b.id));
        if decls.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(GraphError::MalformedSkeleton {
                detail: "duplicate edge id".into(),
            });
        }
        let mut edges = Vec::with_capacity(decls.len());
        for d in decls {
            if d.color == 0 || d.color > k {
                return Err(GraphError::MalformedSkeleton {
                    detail: format!("edge {:?} has color {} outside 1..={}", d.id, d.color, k),
                });
            }
            let range = *vertex_index.get(d.range.as_str()).ok_or_else(|| {
                GraphError::MalformedSkeleton {
                    detail: format!("edge {:?} has unknown range vertex {:?}", d.id, d.range),
                }
            })?;
            let source = *vertex_index.get(d.source.as_str()).ok_or_else(|| {
                GraphError::MalformedSkeleton {
                    detail: format!("edge {:?} has unknown source vertex {:?}", d.id, d.source),
                }
            })?;
            edges.push(Edge {
                id: d.id,
                color: d.color - 1,
                range,
                source,
            });
        }
        let edge_index: HashMap<&str, u32> = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i as u32))
            .collect();

        let mut squares = Vec::with_capacity(square_decls.len());
        for ((a, b), (c, d)) in square_decls {
            let resolve = |id: &String| {
                edge_index
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| GraphError::MalformedSkeleton {
                        detail: format!("square references unknown edge {:?}", id),
                    })
            };
            squares.push(Square {
                lhs: (resolve(&a)?, resolve(&b)?),
                rhs: (resolve(&c)?, resolve(&d)?),
            });
        }

        let mut out_by_range = vec![vec![Vec::new(); k]; vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            out_by_range[e.range as usize][e.color].push(i as u32);
        }

        Ok(Skeleton {
            k,
            vertices,
            edges,
            squares,
            out_by_range,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_name(&self, v: u32) -> &str {
        &self.vertices[v as usize]
    }

    pub fn vertex_index(&self, name: &str) -> Result<u32, GraphError> {
        self.vertices
            .binary_search_by(|x| x.as_str().cmp(name))
            .map(|i| i as u32)
            .map_err(|_| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: u32) -> &Edge {
        &self.edges[e as usize]
    }

    pub fn edge_index(&self, id: &str) -> Result<u32, GraphError> {
        self.edges
            .binary_search_by(|x| x.id.as_str().cmp(id))
            .map(|i| i as u32)
            .map_err(|_| GraphError::UnknownEdge(id.to_string()))
    }

    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    /// Edges with range `v` and the given 0-based color, sorted by index.
    pub fn edges_from(&self, v: u32, color: usize) -> &[u32] {
        &self.out_by_range[v as usize][color]
    }

    /// Is a square's shape coherent: distinct colors, mirrored on the other
    /// side, and matching endpoints? Returns a human-readable defect if not.
    fn square_shape_defect(&self, sq: &Square) -> Option<String> {
        let (e, f) = (self.edge(sq.lhs.0), self.edge(sq.lhs.1));
        let (fp, ep) = (self.edge(sq.rhs.0), self.edge(sq.rhs.1));
        if e.color == f.color {
            return Some(format!(
                "path {:?}∘{:?} uses a single color {}",
                e.id,
                f.id,
                e.color + 1
            ));
        }
        if e.source != f.range {
            return Some(format!("path {:?}∘{:?} is not composable", e.id, f.id));
        }
        if fp.source != ep.range {
            return Some(format!("path {:?}∘{:?} is not composable", fp.id, ep.id));
        }
        if fp.color != f.color || ep.color != e.color {
            return Some(format!(
                "sides {:?}∘{:?} and {:?}∘{:?} do not swap the same colors",
                e.id, f.id, fp.id, ep.id
            ));
        }
        if e.range != fp.range || f.source != ep.source {
            return Some(format!(
                "sides {:?}∘{:?} and {:?}∘{:?} have mismatched endpoints",
                e.id, f.id, fp.id, ep.id
            ));
        }
        None
    }
}

/// A morphism in normal form: the range vertex plus a color-nondecreasing
/// composable edge word. The empty word is the identity at `range`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    range: u32,
    word: Vec<u32>,
    degree: DegreeVec,
    source: u32,
}

impl Morphism {
    pub fn range(&self) -> u32 {
        self.range
    }

    pub fn source(&self) -> u32 {
        self.source
    }

    pub fn degree(&self) -> &DegreeVec {
        &self.degree
    }

    pub fn word(&self) -> &[u32] {
        &self.word
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }
}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m[r={} w={:?} d={}]", self.range, self.word, self.degree)
    }
}

/// A k-graph presentation with a fixed enumeration bound. All morphism sets
/// vΛ^n for n <= bound are materialized at construction, so lookups stay
/// immutable and deterministic afterwards.
pub struct KGraph {
    skeleton: Skeleton,
    bound: DegreeVec,
    /// Swap table from well-formed squares, both directions.
    swaps: HashMap<(u32, u32), Vec<(u32, u32)>>,
    /// (range vertex, degree) -> sorted normal-form words.
    by_range: BTreeMap<(u32, DegreeVec), Vec<Morphism>>,
    /// (source vertex, degree) -> sorted morphisms.
    by_source: BTreeMap<(u32, DegreeVec), Vec<Morphism>>,
}

impl KGraph {
    pub fn new(skeleton: Skeleton, bound: DegreeVec) -> Result<Self, GraphError> {
        if bound.k() != skeleton.k() {
            return Err(GraphError::DegreeMismatch {
                detail: format!(
                    "bound has {} coordinates but the skeleton has k={}",
                    bound.k(),
                    skeleton.k()
                ),
            });
        }
        let mut swaps: HashMap<(u32, u32), Vec<(u32, u32)>> = HashMap::new();
        for sq in &skeleton.squares {
            if skeleton.square_shape_defect(sq).is_some() {
                continue;
            }
            swaps.entry(sq.lhs).or_default().push(sq.rhs);
            swaps.entry(sq.rhs).or_default().push(sq.lhs);
        }

        let mut graph = KGraph {
            skeleton,
            bound,
            swaps,
            by_range: BTreeMap::new(),
            by_source: BTreeMap::new(),
        };
        graph.enumerate_all()?;
        Ok(graph)
    }

    fn enumerate_all(&mut self) -> Result<(), GraphError> {
        let degrees = self.bound.iter_below();
        let mut total = 0usize;
        for v in 0..self.skeleton.vertex_count() as u32 {
            for n in &degrees {
                let words = self.sorted_words(v, n);
                total += words.len();
                if total > MAX_ENUMERATION {
                    return Err(GraphError::BoundExceeded {
                        requested: self.bound.clone(),
                        bound: self.bound.clone(),
                    });
                }
                let morphisms: Vec<Morphism> = words
                    .into_iter()
                    .map(|w| self.morphism_from_sorted_word(v, w))
                    .collect();
                for m in &morphisms {
                    self.by_source
                        .entry((m.source, n.clone()))
                        .or_default()
                        .push(m.clone());
                }
                self.by_range.insert((v, n.clone()), morphisms);
            }
        }
        for list in self.by_source.values_mut() {
            list.sort();
        }
        Ok(())
    }

    /// All color-sorted composable words with the given range and degree, in
    /// lexicographic order on edge indices.
    fn sorted_words(&self, v: u32, n: &DegreeVec) -> Vec<Vec<u32>> {
        let mut words = vec![(Vec::new(), v)];
        for c in 0..self.skeleton.k() {
            for _ in 0..n.0[c] {
                let mut next = Vec::new();
                for (word, tip) in &words {
                    for &e in self.skeleton.edges_from(*tip, c) {
                        let mut w = word.clone();
                        w.push(e);
                        next.push((w, self.skeleton.edge(e).source));
                    }
                }
                words = next;
            }
        }
        let mut out: Vec<Vec<u32>> = words.into_iter().map(|(w, _)| w).collect();
        out.sort();
        out
    }

    fn morphism_from_sorted_word(&self, range: u32, word: Vec<u32>) -> Morphism {
        let source = word
            .last()
            .map(|&e| self.skeleton.edge(e).source)
            .unwrap_or(range);
        let mut degree = DegreeVec::zero(self.skeleton.k());
        for &e in &word {
            degree.0[self.skeleton.edge(e).color] += 1;
        }
        Morphism {
            range,
            word,
            degree,
            source,
        }
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn k(&self) -> usize {
        self.skeleton.k()
    }

    pub fn bound(&self) -> &DegreeVec {
        &self.bound
    }

    pub fn identity(&self, v: u32) -> Morphism {
        Morphism {
            range: v,
            word: Vec::new(),
            degree: DegreeVec::zero(self.skeleton.k()),
            source: v,
        }
    }

    /// vΛ^n: morphisms with range `v` and degree `n`, in normal-form order.
    pub fn lambda_set(&self, v: u32, n: &DegreeVec) -> Result<&[Morphism], GraphError> {
        if !n.le(&self.bound) {
            return Err(GraphError::BoundExceeded {
                requested: n.clone(),
                bound: self.bound.clone(),
            });
        }
        Ok(self
            .by_range
            .get(&(v, n.clone()))
            .map(|v| v.as_slice())
            .unwrap_or(&[]))
    }

    /// Morphisms with source `v` and degree `n`.
    pub fn source_set(&self, v: u32, n: &DegreeVec) -> Result<&[Morphism], GraphError> {
        if !n.le(&self.bound) {
            return Err(GraphError::BoundExceeded {
                requested: n.clone(),
                bound: self.bound.clone(),
            });
        }
        Ok(self
            .by_source
            .get(&(v, n.clone()))
            .map(|v| v.as_slice())
            .unwrap_or(&[]))
    }

    /// All enumerated morphisms with source `v`, ordered by (degree, word).
    pub fn morphisms_with_source(&self, v: u32) -> Vec<Morphism> {
        let mut out = Vec::new();
        for n in self.bound.iter_below() {
            if let Some(list) = self.by_source.get(&(v, n)) {
                out.extend(list.iter().cloned());
            }
        }
        out.sort_by(|a, b| (a.degree(), &a.word).cmp(&(b.degree(), &b.word)));
        out
    }

    /// All enumerated morphisms of every degree <= bound, ordered by
    /// (degree, range, word).
    pub fn all_morphisms(&self) -> Vec<Morphism> {
        let mut out = Vec::new();
        for n in self.bound.iter_below() {
            for v in 0..self.skeleton.vertex_count() as u32 {
                if let Some(list) = self.by_range.get(&(v, n.clone())) {
                    out.extend(list.iter().cloned());
                }
            }
        }
        out
    }

    fn lookup_swap(&self, a: u32, b: u32) -> Result<(u32, u32), GraphError> {
        match self.swaps.get(&(a, b)).map(|v| v.as_slice()) {
            Some([unique]) => Ok(*unique),
            Some(_) => Err(GraphError::AmbiguousSquare {
                first: self.skeleton.edge(a).id.clone(),
                second: self.skeleton.edge(b).id.clone(),
            }),
            None => Err(GraphError::MissingSquare {
                first: self.skeleton.edge(a).id.clone(),
                second: self.skeleton.edge(b).id.clone(),
            }),
        }
    }

    /// Rewrite a composable word into color-nondecreasing normal form by
    /// swapping the leftmost descending pair until sorted.
    fn normalize_word(&self, mut word: Vec<u32>) -> Result<Vec<u32>, GraphError> {
        loop {
            let mut swapped = false;
            for i in 0..word.len().saturating_sub(1) {
                let (a, b) = (word[i], word[i + 1]);
                if self.skeleton.edge(a).color > self.skeleton.edge(b).color {
                    let (x, y) = self.lookup_swap(a, b)?;
                    word[i] = x;
                    word[i + 1] = y;
                    swapped = true;
                    break;
                }
            }
            if !swapped {
                return Ok(word);
            }
        }
    }

    /// Build a morphism from a composable chain of edge indices starting at
    /// `range` (an empty word gives the identity). The word is normalized.
    pub fn morphism_from_word(&self, range: u32, word: Vec<u32>) -> Result<Morphism, GraphError> {
        if range as usize >= self.skeleton.vertex_count() {
            return Err(GraphError::UnknownVertex(format!("#{}", range)));
        }
        let mut tip = range;
        for &e in &word {
            if e as usize >= self.skeleton.edge_count() {
                return Err(GraphError::UnknownEdge(format!("#{}", e)));
            }
            let edge = self.skeleton.edge(e);
            if edge.range != tip {
                return Err(GraphError::NotComposable {
                    left_source: self.skeleton.vertex_name(tip).to_string(),
                    right_range: self.skeleton.vertex_name(edge.range).to_string(),
                });
            }
            tip = edge.source;
        }
        let word = self.normalize_word(word)?;
        let m = self.morphism_from_sorted_word(range, word);
        if !m.degree.le(&self.bound) {
            return Err(GraphError::BoundExceeded {
                requested: m.degree.clone(),
                bound: self.bound.clone(),
            });
        }
        Ok(m)
    }

    /// Build a morphism from edge ids forming a composable chain (read range
    /// to source). The word is normalized.
    pub fn morphism_from_edge_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<Morphism, GraphError> {
        if ids.is_empty() {
            return Err(GraphError::DegreeMismatch {
                detail: "empty edge word; use an explicit identity".into(),
            });
        }
        let mut word = Vec::with_capacity(ids.len());
        for id in ids {
            word.push(self.skeleton.edge_index(id.as_ref())?);
        }
        let range = self.skeleton.edge(word[0]).range;
        self.morphism_from_word(range, word)
    }

    /// Composition λμ, defined when s(λ) = r(μ).
    pub fn compose(&self, lambda: &Morphism, mu: &Morphism) -> Result<Morphism, GraphError> {
        if lambda.source != mu.range {
            return Err(GraphError::NotComposable {
                left_source: self.skeleton.vertex_name(lambda.source).to_string(),
                right_range: self.skeleton.vertex_name(mu.range).to_string(),
            });
        }
        let degree = lambda.degree.add(&mu.degree);
        if !degree.le(&self.bound) {
            return Err(GraphError::BoundExceeded {
                requested: degree,
                bound: self.bound.clone(),
            });
        }
        let mut word = lambda.word.clone();
        word.extend_from_slice(&mu.word);
        let word = self.normalize_word(word)?;
        Ok(self.morphism_from_sorted_word(lambda.range, word))
    }

    /// The unique factorization λ = μν with d(μ) = m. Returns (μ, ν).
    pub fn factorize(
        &self,
        lambda: &Morphism,
        m: &DegreeVec,
    ) -> Result<(Morphism, Morphism), GraphError> {
        if m.k() != self.skeleton.k() || !m.le(&lambda.degree) {
            return Err(GraphError::DegreeMismatch {
                detail: format!(
                    "cannot split degree {} off a morphism of degree {}",
                    m, lambda.degree
                ),
            });
        }
        let mut remaining = lambda.word.clone();
        let mut prefix = Vec::new();
        let mut want = m.clone();
        while !want.is_zero() {
            let c = (0..want.k()).find(|&c| want.0[c] > 0).unwrap();
            let pos = remaining
                .iter()
                .position(|&e| self.skeleton.edge(e).color == c)
                .expect("degree accounting guarantees an edge of this color");
            // Bubble the edge to the front; everything before it has a
            // strictly smaller color, so each swap crosses distinct colors.
            for i in (1..=pos).rev() {
                let (x, y) = self.lookup_swap(remaining[i - 1], remaining[i])?;
                remaining[i - 1] = x;
                remaining[i] = y;
            }
            prefix.push(remaining.remove(0));
            want.0[c] -= 1;
        }
        let mu = self.morphism_from_sorted_word(lambda.range, prefix);
        let nu = self.morphism_from_sorted_word(mu.source, remaining);
        debug_assert_eq!(mu.degree, *m);
        Ok((mu, nu))
    }

    /// Render a morphism with edge ids, e.g. "e·f" or "id(v)".
    pub fn display_morphism(&self, m: &Morphism) -> String {
        if m.is_identity() {
            format!("id({})", self.skeleton.vertex_name(m.range))
        } else {
            m.word
                .iter()
                .map(|&e| self.skeleton.edge(e).id.clone())
                .collect::<Vec<_>>()
                .join("·")
        }
    }

    pub fn validate_presentation(&self) -> PresentationReport {
        let mut report = PresentationReport {
            bound: self.bound.clone(),
            square_shape: Vec::new(),
            square_pairing: Vec::new(),
            confluence: Vec::new(),
            factorization: Vec::new(),
            no_source: Vec::new(),
            vertex_fanout: Vec::new(),
        };

        for (i, sq) in self.skeleton.squares.iter().enumerate() {
            if let Some(defect) = self.skeleton.square_shape_defect(sq) {
                report
                    .square_shape
                    .push(format!("square #{}: {}", i, defect));
            }
        }

        // Completeness and uniqueness: every composable two-edge path with
        // distinct colors must appear in exactly one well-formed square.
        let mut side_counts: HashMap<(u32, u32), usize> = HashMap::new();
        for sq in &self.skeleton.squares {
            if self.skeleton.square_shape_defect(sq).is_none() {
                *side_counts.entry(sq.lhs).or_insert(0) += 1;
                *side_counts.entry(sq.rhs).or_insert(0) += 1;
            }
        }
        for a in 0..self.skeleton.edge_count() as u32 {
            for b in 0..self.skeleton.edge_count() as u32 {
                let (ea, eb) = (self.skeleton.edge(a), self.skeleton.edge(b));
                if ea.color == eb.color || ea.source != eb.range {
                    continue;
                }
                let count = side_counts.get(&(a, b)).copied().unwrap_or(0);
                if count != 1 {
                    report.square_pairing.push(PairingViolation {
                        first: ea.id.clone(),
                        second: eb.id.clone(),
                        count,
                    });
                }
            }
        }

        // Local confluence: every composable strictly color-descending triple
        // must rewrite to a unique normal form regardless of swap order. For
        // k = 2 there are no such triples and square uniqueness suffices.
        if self.skeleton.k() >= 3 {
            for a in 0..self.skeleton.edge_count() as u32 {
                for b in 0..self.skeleton.edge_count() as u32 {
                    for c in 0..self.skeleton.edge_count() as u32 {
                        let (ea, eb, ec) =
                            (self.skeleton.edge(a), self.skeleton.edge(b), self.skeleton.edge(c));
                        if !(ea.color > eb.color && eb.color > ec.color) {
                            continue;
                        }
                        if ea.source != eb.range || eb.source != ec.range {
                            continue;
                        }
                        match self.all_normal_forms(vec![a, b, c]) {
                            Ok(nfs) if nfs.len() == 1 => {}
                            Ok(nfs) => report.confluence.push(ConfluenceViolation {
                                word: vec![ea.id.clone(), eb.id.clone(), ec.id.clone()],
                                normal_forms: nfs
                                    .into_iter()
                                    .map(|w| {
                                        w.iter()
                                            .map(|&e| self.skeleton.edge(e).id.clone())
                                            .collect()
                                    })
                                    .collect(),
                            }),
                            Err(e) => report
                                .factorization
                                .push(format!("rewriting [{},{},{}] failed: {}", ea.id, eb.id, ec.id, e)),
                        }
                    }
                }
            }
        }

        // Factorization uniqueness up to the bound, by counting: composition
        // vΛ^m × s(·)Λ^n -> vΛ^(m+n) must hit every morphism exactly once.
        for n in self.bound.iter_below() {
            for m in n.iter_below() {
                let rest = n.checked_sub(&m).unwrap();
                if m.is_zero() || rest.is_zero() {
                    continue;
                }
                for v in 0..self.skeleton.vertex_count() as u32 {
                    let mut hits: BTreeMap<Morphism, usize> = BTreeMap::new();
                    let heads = self.lambda_set(v, &m).unwrap().to_vec();
                    for mu in heads {
                        let tails = self.lambda_set(mu.source(), &rest).unwrap().to_vec();
                        for nu in tails {
                            match self.compose(&mu, &nu) {
                                Ok(lambda) => *hits.entry(lambda).or_insert(0) += 1,
                                Err(e) => report.factorization.push(format!(
                                    "composing {}∘{} failed: {}",
                                    self.display_morphism(&mu),
                                    self.display_morphism(&nu),
                                    e
                                )),
                            }
                        }
                    }
                    for lambda in self.lambda_set(v, &n).unwrap() {
                        let count = hits.get(lambda).copied().unwrap_or(0);
                        if count != 1 {
                            report.factorization.push(format!(
                                "morphism {} of degree {} has {} factorizations at split {}",
                                self.display_morphism(lambda),
                                n,
                                count,
                                m
                            ));
                        }
                    }
                }
            }
        }

        // Sources and row-finiteness at the bound. Every vertex must receive
        // an edge of every color; fanout counts witness row-finiteness.
        for v in 0..self.skeleton.vertex_count() as u32 {
            for c in 0..self.skeleton.k() {
                if self.skeleton.edges_from(v, c).is_empty() {
                    report
                        .no_source
                        .push((self.skeleton.vertex_name(v).to_string(), c + 1));
                }
            }
            let fanout = self
                .bound
                .iter_below()
                .into_iter()
                .map(|n| self.lambda_set(v, &n).unwrap().len() as u64)
                .max()
                .unwrap_or(0);
            report
                .vertex_fanout
                .push((self.skeleton.vertex_name(v).to_string(), fanout));
        }

        report
    }

    /// Exhaust all descending-swap rewrite sequences from `word` and collect
    /// the distinct normal forms reached.
    fn all_normal_forms(&self, word: Vec<u32>) -> Result<Vec<Vec<u32>>, GraphError> {
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        let mut stack = vec![word];
        let mut normal: HashSet<Vec<u32>> = HashSet::new();
        while let Some(w) = stack.pop() {
            if !seen.insert(w.clone()) {
                continue;
            }
            let mut any = false;
            for i in 0..w.len().saturating_sub(1) {
                let (a, b) = (w[i], w[i + 1]);
                if self.skeleton.edge(a).color > self.skeleton.edge(b).color {
                    any = true;
                    let (x, y) = self.lookup_swap(a, b)?;
                    let mut next = w.clone();
                    next[i] = x;
                    next[i + 1] = y;
                    stack.push(next);
                }
            }
            if !any {
                normal.insert(w);
            }
        }
        let mut out: Vec<Vec<u32>> = normal.into_iter().collect();
        out.sort();
        Ok(out)
    }
}

/// Outcome of checking a presentation at a bound. `passed` means no
/// violations of any kind.
#[derive(Debug)]
pub struct PresentationReport {
    pub bound: DegreeVec,
    pub square_shape: Vec<String>,
    pub square_pairing: Vec<PairingViolation>,
    pub confluence: Vec<ConfluenceViolation>,
    pub factorization: Vec<String>,
    /// Vertices lacking an incoming edge of a color (1-based).
    pub no_source: Vec<(String, usize)>,
    /// Max |vΛ^n| over n <= bound, witnessing row-finiteness.
    pub vertex_fanout: Vec<(String, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingViolation {
    pub first: String,
    pub second: String,
    /// How many squares contain this path as a side (must be exactly 1).
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfluenceViolation {
    pub word: Vec<String>,
    pub normal_forms: Vec<Vec<String>>,
}

impl PresentationReport {
    /// Presentation coherence: squares are well-shaped, complete, unique,
    /// confluent, and factorization counts check out. Source-freeness is a
    /// separate verdict because finite windows legitimately clip it.
    pub fn passed(&self) -> bool {
        self.square_shape.is_empty()
            && self.square_pairing.is_empty()
            && self.confluence.is_empty()
            && self.factorization.is_empty()
    }

    pub fn source_free(&self) -> bool {
        self.no_source.is_empty()
    }
}

impl fmt::Display for PresentationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "presentation check at bound {}: {}",
            self.bound,
            if self.passed() { "pass" } else { "FAIL" }
        )?;
        for s in &self.square_shape {
            writeln!(f, "  [square-shape] {}", s)?;
        }
        for p in &self.square_pairing {
            writeln!(
                f,
                "  [square-pairing] path {}∘{} appears in {} squares (want 1)",
                p.first, p.second, p.count
            )?;
        }
        for c in &self.confluence {
            writeln!(
                f,
                "  [confluence] word [{}] has {} normal forms: {:?}",
                c.word.join(","),
                c.normal_forms.len(),
                c.normal_forms
            )?;
        }
        for s in &self.factorization {
            writeln!(f, "  [factorization] {}", s)?;
        }
        for (v, c) in &self.no_source {
            writeln!(
                f,
                "  [source-flagged] vertex {} receives no color-{} edge",
                v, c
            )?;
        }
        for (v, n) in &self.vertex_fanout {
            writeln!(f, "  [fanout] vertex {}: max |vΛ^n| = {}", v, n)?;
        }
        Ok(())
    }
}

/// Validate a presentation at a bound, constructing the graph first.
pub fn validate_presentation(
    skeleton: Skeleton,
    bound: DegreeVec,
) -> Result<PresentationReport, GraphError> {
    Ok(KGraph::new(skeleton, bound)?.validate_presentation())
}

/// The lattice category on objects {m in N^k : m <= window}, with a unique
/// morphism (m, n) for every pair m <= n. Degrees are d(m, n) = n - m.
pub fn omega_k(k: usize, window: &DegreeVec) -> Result<KGraph, GraphError> {
    let points = window.iter_below();
    let name = |p: &DegreeVec| {
        p.0.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let vertices: Vec<String> = points.iter().map(|p| name(p)).collect();
    let mut edges = Vec::new();
    let edge_id = |c: usize, p: &DegreeVec| format!("c{}@{}", c + 1, name(p));
    for p in &points {
        for c in 0..k {
            let q = p.add(&DegreeVec::unit(k, c));
            if q.le(window) {
                edges.push(EdgeDecl {
                    id: edge_id(c, p),
                    color: c + 1,
                    source: name(&q),
                    range: name(p),
                });
            }
        }
    }
    let mut squares = Vec::new();
    for p in &points {
        for i in 0..k {
            for j in (i + 1)..k {
                let pi = p.add(&DegreeVec::unit(k, i));
                let pj = p.add(&DegreeVec::unit(k, j));
                let pij = pi.add(&DegreeVec::unit(k, j));
                if pij.le(window) {
                    squares.push((
                        (edge_id(i, p), edge_id(j, &pi)),
                        (edge_id(j, p), edge_id(i, &pj)),
                    ));
                }
            }
        }
    }
    let skeleton = Skeleton::new(k, vertices, edges, squares)?;
    KGraph::new(skeleton, window.clone())
}
