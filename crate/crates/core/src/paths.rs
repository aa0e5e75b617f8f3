//! Finite approximations of infinite paths.
//!
//! An infinite path x assigns to every box [m, n] in N^k a morphism x(m,n)
//! compatibly with factorization. Here a path is stored as one trunk
//! morphism x(0, N); every segment is recovered by factoring the trunk, so
//! all segment identities hold by construction. Asking past the trunk is an
//! `InsufficientDepth` error, never a silent guess.
//!
//! Trunks grow by a deterministic staircase: repeatedly append the
//! lexicographically least edge of the least color whose coordinate of the
//! trunk degree is minimal. Extension is therefore a single edge stream per
//! starting trunk, and extending in stages agrees with extending directly.

use crate::cocycle::CocycleError;
use crate::degree::DegreeVec;
use crate::graph::{GraphError, KGraph, Morphism};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PathError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error("operation needs depth {needed} but only {available} is stored")]
    InsufficientDepth { needed: String, available: String },
    #[error("no color-{color} edge leaves vertex {vertex}; cannot extend")]
    NoExtension { vertex: String, color: usize },
    #[error("paths live on different graphs")]
    GraphMismatch,
    #[error("lag does not match the certificate: {detail}")]
    LagMismatch { detail: String },
    #[error("certificate fails on the stored overlap: {detail}")]
    CertificateInvalid { detail: String },
    #[error("elements are not composable: {detail}")]
    NotComposable { detail: String },
    #[error("certificate meet is not itself a certificate: {detail}")]
    MeetClosureFailure { detail: String },
    #[error("refinement displays disagree: {detail}")]
    RefinementInconsistent { detail: String },
}

/// A finite prefix of an infinite path, extendable on demand.
#[derive(Clone)]
pub struct InfPathApprox {
    graph: Arc<KGraph>,
    trunk: Morphism,
}

impl std::fmt::Debug for InfPathApprox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "InfPathApprox({} to depth {})",
            self.graph.display_morphism(&self.trunk),
            self.trunk.degree()
        )
    }
}

impl InfPathApprox {
    pub fn new(graph: Arc<KGraph>, trunk: Morphism) -> Self {
        InfPathApprox { graph, trunk }
    }

    /// The zero-depth path based at a vertex.
    pub fn from_vertex(graph: Arc<KGraph>, v: u32) -> Self {
        let trunk = graph.identity(v);
        InfPathApprox { graph, trunk }
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        &self.graph
    }

    pub fn trunk(&self) -> &Morphism {
        &self.trunk
    }

    /// The stored depth N of the prefix x(0, N).
    pub fn depth(&self) -> &DegreeVec {
        self.trunk.degree()
    }

    /// x(0), the base vertex.
    pub fn base(&self) -> u32 {
        self.trunk.range()
    }

    fn need(&self, n: &DegreeVec) -> Result<(), PathError> {
        if n.le(self.depth()) {
            Ok(())
        } else {
            Err(PathError::InsufficientDepth {
                needed: n.to_string(),
                available: self.depth().to_string(),
            })
        }
    }

    /// The segment x(from, to) for from <= to <= depth.
    pub fn segment(&self, from: &DegreeVec, to: &DegreeVec) -> Result<Morphism, PathError> {
        self.need(to)?;
        if !from.le(to) {
            return Err(GraphError::DegreeMismatch {
                detail: format!("segment endpoints {} and {} are not ordered", from, to),
            }
            .into());
        }
        let (prefix, _) = self.graph.factorize(&self.trunk, to)?;
        let (_, seg) = self.graph.factorize(&prefix, from)?;
        Ok(seg)
    }

    /// The vertex x(n).
    pub fn vertex_at(&self, n: &DegreeVec) -> Result<u32, PathError> {
        Ok(self.segment(n, n)?.range())
    }

    /// σ^n x, the path with (σ^n x)(a, b) = x(a+n, b+n).
    pub fn shift(&self, n: &DegreeVec) -> Result<InfPathApprox, PathError> {
        self.need(n)?;
        let (_, tail) = self.graph.factorize(&self.trunk, n)?;
        Ok(InfPathApprox {
            graph: self.graph.clone(),
            trunk: tail,
        })
    }

    /// Grow the trunk along the deterministic staircase until its degree
    /// dominates `target`. Never shrinks; may overshoot by the balancing.
    pub fn extend_to(&self, target: &DegreeVec) -> Result<InfPathApprox, PathError> {
        if target.k() != self.graph.k() {
            return Err(PathError::GraphMismatch);
        }
        let mut trunk = self.trunk.clone();
        while !target.le(trunk.degree()) {
            let d = trunk.degree();
            let color = (0..self.graph.k())
                .min_by_key(|&c| d.0[c])
                .expect("k >= 1");
            let v = trunk.source();
            let next = self
                .graph
                .skeleton()
                .edges_from(v, color)
                .first()
                .copied()
                .ok_or_else(|| PathError::NoExtension {
                    vertex: self.graph.skeleton().vertex_name(v).to_string(),
                    color: color + 1,
                })?;
            let step = self.graph.morphism_from_word(v, vec![next])?;
            trunk = self.graph.compose(&trunk, &step)?;
        }
        Ok(InfPathApprox {
            graph: self.graph.clone(),
            trunk,
        })
    }

    /// Whether the two stored prefixes agree on their common box.
    pub fn agrees_with(&self, other: &InfPathApprox) -> Result<bool, PathError> {
        if !Arc::ptr_eq(&self.graph, &other.graph) {
            return Err(PathError::GraphMismatch);
        }
        let overlap = self.depth().meet(other.depth());
        let zero = DegreeVec::zero(self.graph.k());
        Ok(self.segment(&zero, &overlap)? == other.segment(&zero, &overlap)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{n2, two_per_color};

    fn d(v: &[u32]) -> DegreeVec {
        DegreeVec(v.to_vec())
    }

    #[test]
    fn staircase_extension_reaches_any_target() {
        let g = Arc::new(n2((6, 6)));
        let x = InfPathApprox::from_vertex(g, 0);
        let x = x.extend_to(&d(&[2, 5])).unwrap();
        assert!(d(&[2, 5]).le(x.depth()));
        // Balancing overshoots at most to the join of stairs.
        assert!(x.depth().le(&d(&[5, 5])));
    }

    #[test]
    fn staged_extension_matches_direct() {
        let g = Arc::new(two_per_color((6, 6)));
        let x = InfPathApprox::from_vertex(g, 0);
        let staged = x
            .extend_to(&d(&[1, 2]))
            .unwrap()
            .extend_to(&d(&[3, 3]))
            .unwrap();
        let direct = x.extend_to(&d(&[3, 3])).unwrap();
        assert_eq!(staged.trunk(), direct.trunk());
    }

    #[test]
    fn segments_compose_like_factorizations() {
        let g = Arc::new(two_per_color((5, 5)));
        let x = InfPathApprox::from_vertex(g.clone(), 0).extend_to(&d(&[3, 3])).unwrap();
        let a = d(&[1, 1]);
        let b = d(&[2, 3]);
        let zero = d(&[0, 0]);
        let left = x.segment(&zero, &a).unwrap();
        let right = x.segment(&a, &b).unwrap();
        assert_eq!(g.compose(&left, &right).unwrap(), x.segment(&zero, &b).unwrap());
    }

    #[test]
    fn shift_reindexes_segments() {
        let g = Arc::new(two_per_color((5, 5)));
        let x = InfPathApprox::from_vertex(g, 0).extend_to(&d(&[4, 4])).unwrap();
        let p = d(&[1, 2]);
        let shifted = x.shift(&p).unwrap();
        let a = d(&[1, 0]);
        let b = d(&[2, 2]);
        assert_eq!(
            shifted.segment(&a, &b).unwrap(),
            x.segment(&a.add(&p), &b.add(&p)).unwrap()
        );
        assert_eq!(shifted.base(), x.vertex_at(&p).unwrap());
    }

    #[test]
    fn operations_never_guess_past_the_trunk() {
        let g = Arc::new(n2((4, 4)));
        let x = InfPathApprox::from_vertex(g, 0).extend_to(&d(&[1, 1])).unwrap();
        let err = x.segment(&d(&[0, 0]), &d(&[4, 4])).unwrap_err();
        assert!(matches!(err, PathError::InsufficientDepth { .. }));
    }

    #[test]
    fn clipped_windows_block_extension() {
        let g = Arc::new(crate::graph::omega_k(1, &DegreeVec(vec![2])).unwrap());
        let x = InfPathApprox::from_vertex(g, 0);
        let err = x.extend_to(&d(&[3])).unwrap_err();
        match err {
            PathError::NoExtension { vertex, color } => {
                assert_eq!(vertex, "2");
                assert_eq!(color, 1);
            }
            other => panic!("expected NoExtension, got {}", other),
        }
    }
}
