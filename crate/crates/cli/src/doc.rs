//! JSON input documents: the schema and the builders that turn document
//! sections into live library objects.
//!
//! Anything that fails here is an input error (malformed document, unknown
//! name, ill-typed section) and exits with code 2. Failures that occur while
//! a check runs belong in the command report instead.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use kgraphs::cocycle::{Cocycle2, CocycleHomotopy, CocycleRule, MorphismPhase, RealCocycle2};
use kgraphs::convolution::CcFunction;
use kgraphs::finite_groupoid::{FiniteGroupoid, GroupoidCocycle};
use kgraphs::phase::{parse_rat, CircleValue};
use kgraphs::scalar::Coef;
use kgraphs::skew::SkewProduct;
use kgraphs::{DegreeVec, EdgeDecl, IntVec, KGraph, LatticeBox, Morphism, Rat, Skeleton};

use crate::CliError;

pub fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Arithmetic mode for phase literals. Exact mode insists on rationals;
/// float mode additionally accepts decimal angles.
#[derive(Clone, Copy)]
pub struct Mode {
    pub float: bool,
}

impl Mode {
    pub fn label(self) -> &'static str {
        if self.float {
            "float"
        } else {
            "exact"
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub graph: Option<GraphSpec>,
    pub window: Option<WindowSpec>,
    pub cocycle: Option<CocycleSpec>,
    pub other_cocycle: Option<CocycleSpec>,
    pub homotopy: Option<HomotopySpec>,
    pub groupoid: Option<GroupoidSpec>,
    pub groupoid_cocycle: Option<GroupoidCocycleSpec>,
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
    pub bundle: Option<BundleSpec>,
    /// Lag vectors for path-groupoid commands; defaults to {-1,0,1}^k.
    pub lags: Option<Vec<Vec<i64>>>,
    /// Range vertex for the truncated infinite path; defaults to the first.
    pub base_vertex: Option<String>,
}

impl Document {
    pub fn load(path: &Path) -> Result<Document, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| input_err(format!("cannot parse {}: {e}", path.display())))
    }

    pub fn need_graph(&self) -> Result<&GraphSpec, CliError> {
        self.graph
            .as_ref()
            .ok_or_else(|| input_err("document has no \"graph\" section"))
    }

    pub fn need_cocycle(&self) -> Result<&CocycleSpec, CliError> {
        self.cocycle
            .as_ref()
            .ok_or_else(|| input_err("document has no \"cocycle\" section"))
    }

    pub fn need_other_cocycle(&self) -> Result<&CocycleSpec, CliError> {
        self.other_cocycle
            .as_ref()
            .ok_or_else(|| input_err("document has no \"other_cocycle\" section"))
    }

    pub fn need_homotopy(&self) -> Result<&HomotopySpec, CliError> {
        self.homotopy
            .as_ref()
            .ok_or_else(|| input_err("document has no \"homotopy\" section"))
    }

    pub fn need_groupoid(&self) -> Result<&GroupoidSpec, CliError> {
        self.groupoid
            .as_ref()
            .ok_or_else(|| input_err("document has no \"groupoid\" section"))
    }

    pub fn need_groupoid_cocycle(&self) -> Result<&GroupoidCocycleSpec, CliError> {
        self.groupoid_cocycle
            .as_ref()
            .ok_or_else(|| input_err("document has no \"groupoid_cocycle\" section"))
    }

    pub fn need_bundle(&self) -> Result<&BundleSpec, CliError> {
        self.bundle
            .as_ref()
            .ok_or_else(|| input_err("document has no \"bundle\" section"))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub k: usize,
    pub bound: Vec<u32>,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    /// Commuting squares as pairs of two-edge paths, outer edge first.
    #[serde(default)]
    pub squares: Vec<((String, String), (String, String))>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    /// 1-based color.
    pub color: usize,
    pub src: String,
    pub dst: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CocycleSpec {
    Trivial,
    Bicharacter {
        theta: Vec<Vec<String>>,
    },
    Rotation {
        theta: String,
    },
    Coboundary {
        b: PhaseMapSpec,
    },
    /// Materialize `base` as an explicit table up to `bound`, then multiply
    /// the listed entries by extra phases. Deliberately unchecked: this is
    /// how broken tables are fed to check-cocycle.
    Table {
        base: Box<CocycleSpec>,
        bound: Vec<u32>,
        #[serde(default)]
        corrupt: Vec<CorruptSpec>,
    },
    Product {
        left: Box<CocycleSpec>,
        right: Box<CocycleSpec>,
    },
    Conjugate {
        of: Box<CocycleSpec>,
    },
    /// Pull the inner cocycle back from the base graph along the skew
    /// product projection. Requires a window in scope.
    Pullback {
        of: Box<CocycleSpec>,
    },
    Exponential {
        sigma: RealCocycleSpec,
        scale: String,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptSpec {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub multiply_angle: String,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhaseMapSpec {
    DegreeLinear { q: Vec<String> },
    Table { phases: Vec<PhaseEntry> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseEntry {
    /// Edge-id word naming a morphism.
    pub word: Vec<String>,
    pub angle: String,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RealCocycleSpec {
    Zero,
    Bilinear { theta: Vec<Vec<String>> },
    Rotation { theta: String },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HomotopySpec {
    /// t -> base * exp(2 pi i t sigma); base defaults to trivial.
    Exponential {
        base: Option<Box<CocycleSpec>>,
        sigma: RealCocycleSpec,
    },
    /// Explicit samples at listed grid points, with a declared modulus.
    Sampled {
        samples: Vec<SampleSpec>,
        modulus: String,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub t: String,
    pub cocycle: CocycleSpec,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupoidSpec {
    MatrixUnits { n: u32 },
    CyclicProduct { orders: Vec<u32> },
    /// Pairs of equal-source paths of the given depth on the document graph.
    PathPairs { depth: Vec<u32> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupoidCocycleSpec {
    Trivial,
    /// Needs a cyclic-product groupoid.
    Bicharacter {
        theta: Vec<Vec<String>>,
    },
    Coboundary {
        beta: Vec<BetaEntry>,
    },
    /// Tabulate `base` on all composable pairs, then multiply the listed
    /// entries by extra phases. Unchecked by construction.
    Table {
        base: Box<GroupoidCocycleSpec>,
        #[serde(default)]
        corrupt: Vec<PairCorruptSpec>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaEntry {
    pub at: String,
    pub angle: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCorruptSpec {
    pub left: String,
    pub right: String,
    pub multiply_angle: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub name: String,
    pub entries: Vec<FnEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnEntry {
    pub at: String,
    #[serde(default = "one_str")]
    pub value: String,
    #[serde(default = "zero_str")]
    pub angle: String,
}

fn one_str() -> String {
    "1".into()
}

fn zero_str() -> String {
    "0".into()
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BundleSpec {
    /// Straight-line bundle (1-t) from + t to between two named functions.
    Interpolate { from: String, to: String },
}

pub fn parse_rat_str(s: &str) -> Result<Rat, CliError> {
    parse_rat(s).ok_or_else(|| input_err(format!("expected a rational \"p/q\", got \"{s}\"")))
}

pub fn parse_angle(s: &str, mode: Mode) -> Result<CircleValue, CliError> {
    if let Some(q) = parse_rat(s) {
        return Ok(CircleValue::from_angle(q));
    }
    if mode.float {
        if let Ok(x) = s.parse::<f64>() {
            return Ok(CircleValue::from_angle_f64(x));
        }
        return Err(input_err(format!("cannot parse angle \"{s}\"")));
    }
    Err(input_err(format!(
        "angle \"{s}\" is not rational; decimals need --float"
    )))
}

fn parse_theta(theta: &[Vec<String>]) -> Result<Vec<Vec<Rat>>, CliError> {
    theta
        .iter()
        .map(|row| row.iter().map(|s| parse_rat_str(s)).collect())
        .collect()
}

fn parse_coef(value: &str, angle: &str, mode: Mode) -> Result<Coef, CliError> {
    let v = parse_rat_str(value)?;
    let a = parse_angle(angle, mode)?;
    Ok(Coef::from_rat(v).mul(&Coef::from_phase(a)))
}

pub fn build_graph(
    spec: &GraphSpec,
    bound_override: Option<DegreeVec>,
) -> Result<Arc<KGraph>, CliError> {
    let decls: Vec<EdgeDecl> = spec
        .edges
        .iter()
        .map(|e| EdgeDecl {
            id: e.id.clone(),
            color: e.color,
            source: e.src.clone(),
            range: e.dst.clone(),
        })
        .collect();
    let skeleton = Skeleton::new(spec.k, spec.vertices.clone(), decls, spec.squares.clone())
        .map_err(|e| input_err(e.to_string()))?;
    let bound = bound_override.unwrap_or_else(|| DegreeVec(spec.bound.clone()));
    Ok(Arc::new(
        KGraph::new(skeleton, bound).map_err(|e| input_err(e.to_string()))?,
    ))
}

pub fn build_window(spec: &WindowSpec) -> Result<LatticeBox, CliError> {
    LatticeBox::new(IntVec(spec.lo.clone()), IntVec(spec.hi.clone()))
        .ok_or_else(|| input_err("window is empty or has mismatched ranks"))
}

fn word(graph: &Arc<KGraph>, ids: &[String]) -> Result<Morphism, CliError> {
    graph
        .morphism_from_edge_ids(ids)
        .map_err(|e| input_err(e.to_string()))
}

pub fn build_cocycle(
    spec: &CocycleSpec,
    graph: &Arc<KGraph>,
    sp: Option<&SkewProduct>,
    mode: Mode,
) -> Result<Cocycle2, CliError> {
    match spec {
        CocycleSpec::Trivial => Ok(Cocycle2::trivial(graph.clone())),
        CocycleSpec::Bicharacter { theta } => {
            Cocycle2::bicharacter(graph.clone(), parse_theta(theta)?)
                .map_err(|e| input_err(e.to_string()))
        }
        CocycleSpec::Rotation { theta } => {
            Cocycle2::rotation(graph.clone(), parse_rat_str(theta)?)
                .map_err(|e| input_err(e.to_string()))
        }
        CocycleSpec::Coboundary { b } => {
            Cocycle2::coboundary(graph.clone(), build_phase_map(b, graph, mode)?)
                .map_err(|e| input_err(e.to_string()))
        }
        CocycleSpec::Table {
            base,
            bound,
            corrupt,
        } => {
            let base_c = build_cocycle(base, graph, sp, mode)?;
            let tab = base_c
                .tabulate(&DegreeVec(bound.clone()))
                .map_err(|e| input_err(e.to_string()))?;
            let mut entries = match tab.rule() {
                CocycleRule::Table { entries } => (**entries).clone(),
                _ => unreachable!("tabulate returns a table"),
            };
            // One approximate phase forces the whole table approximate: the
            // library refuses mixed exact/approx arithmetic.
            let mut approx = false;
            let mut bumps = Vec::with_capacity(corrupt.len());
            for c in corrupt {
                let key = (word(graph, &c.left)?, word(graph, &c.right)?);
                if !entries.contains_key(&key) {
                    return Err(input_err(format!(
                        "corrupt target ([{}], [{}]) is not a table entry",
                        c.left.join(","),
                        c.right.join(",")
                    )));
                }
                let angle = parse_angle(&c.multiply_angle, mode)?;
                approx = approx || matches!(angle, CircleValue::Approx(_));
                bumps.push((key, angle));
            }
            if approx {
                for v in entries.values_mut() {
                    *v = v.to_approx();
                }
            }
            for (key, angle) in bumps {
                let v = entries[&key];
                let angle = if approx { angle.to_approx() } else { angle };
                entries.insert(key, v.mul(angle));
            }
            Ok(Cocycle2::table(graph.clone(), entries))
        }
        CocycleSpec::Product { left, right } => Cocycle2::product(
            build_cocycle(left, graph, sp, mode)?,
            build_cocycle(right, graph, sp, mode)?,
        )
        .map_err(|e| input_err(e.to_string())),
        CocycleSpec::Conjugate { of } => {
            Ok(Cocycle2::conjugate(build_cocycle(of, graph, sp, mode)?))
        }
        CocycleSpec::Pullback { of } => {
            let sp = sp.ok_or_else(|| {
                input_err("pullback cocycle needs a window (skew product) in scope")
            })?;
            let inner = build_cocycle(of, sp.base(), None, mode)?;
            sp.pullback_cocycle(Arc::new(inner))
                .map_err(|e| input_err(e.to_string()))
        }
        CocycleSpec::Exponential { sigma, scale } => Ok(Cocycle2::exponential(
            Arc::new(build_real_cocycle(sigma, graph)?),
            parse_rat_str(scale)?,
        )),
    }
}

fn build_phase_map(
    spec: &PhaseMapSpec,
    graph: &Arc<KGraph>,
    mode: Mode,
) -> Result<MorphismPhase, CliError> {
    match spec {
        PhaseMapSpec::DegreeLinear { q } => Ok(MorphismPhase::DegreeLinear {
            q: q.iter().map(|s| parse_rat_str(s)).collect::<Result<_, _>>()?,
        }),
        PhaseMapSpec::Table { phases } => {
            let mut map = BTreeMap::new();
            for p in phases {
                map.insert(word(graph, &p.word)?, parse_angle(&p.angle, mode)?);
            }
            Ok(MorphismPhase::Table { map: Arc::new(map) })
        }
    }
}

pub fn build_real_cocycle(
    spec: &RealCocycleSpec,
    graph: &Arc<KGraph>,
) -> Result<RealCocycle2, CliError> {
    match spec {
        RealCocycleSpec::Zero => Ok(RealCocycle2::zero(graph.clone())),
        RealCocycleSpec::Bilinear { theta } => {
            RealCocycle2::bilinear(graph.clone(), parse_theta(theta)?)
                .map_err(|e| input_err(e.to_string()))
        }
        RealCocycleSpec::Rotation { theta } => {
            RealCocycle2::rotation(graph.clone(), parse_rat_str(theta)?)
                .map_err(|e| input_err(e.to_string()))
        }
    }
}

/// Build a homotopy on the base graph; callers pull it back when a skew
/// product is in play.
pub fn build_homotopy(
    spec: &HomotopySpec,
    graph: &Arc<KGraph>,
    mode: Mode,
) -> Result<CocycleHomotopy, CliError> {
    match spec {
        HomotopySpec::Exponential { base, sigma } => {
            let c0 = match base {
                Some(b) => build_cocycle(b, graph, None, mode)?,
                None => Cocycle2::trivial(graph.clone()),
            };
            CocycleHomotopy::exponential(c0, Arc::new(build_real_cocycle(sigma, graph)?))
                .map_err(|e| input_err(e.to_string()))
        }
        HomotopySpec::Sampled { samples, modulus } => {
            let mut pts = Vec::with_capacity(samples.len());
            for s in samples {
                pts.push((parse_rat_str(&s.t)?, build_cocycle(&s.cocycle, graph, None, mode)?));
            }
            CocycleHomotopy::sampled(pts, parse_rat_str(modulus)?)
                .map_err(|e| input_err(e.to_string()))
        }
    }
}

pub fn build_groupoid(
    spec: &GroupoidSpec,
    graph: Option<&Arc<KGraph>>,
) -> Result<(Arc<FiniteGroupoid>, Option<Vec<u32>>), CliError> {
    match spec {
        GroupoidSpec::MatrixUnits { n } => {
            Ok((Arc::new(FiniteGroupoid::matrix_units(*n)), None))
        }
        GroupoidSpec::CyclicProduct { orders } => Ok((
            Arc::new(FiniteGroupoid::product_of_cyclics(orders)),
            Some(orders.clone()),
        )),
        GroupoidSpec::PathPairs { depth } => {
            let g = graph
                .ok_or_else(|| input_err("path-pairs groupoid needs a \"graph\" section"))?;
            let gd = FiniteGroupoid::from_kgraph_pairs(g, &DegreeVec(depth.clone()))
                .map_err(|e| input_err(e.to_string()))?;
            Ok((Arc::new(gd), None))
        }
    }
}

pub fn build_groupoid_cocycle(
    spec: &GroupoidCocycleSpec,
    gd: &Arc<FiniteGroupoid>,
    orders: Option<&[u32]>,
    mode: Mode,
) -> Result<GroupoidCocycle, CliError> {
    match spec {
        GroupoidCocycleSpec::Trivial => Ok(GroupoidCocycle::trivial(gd.clone())),
        GroupoidCocycleSpec::Bicharacter { theta } => {
            let orders = orders.ok_or_else(|| {
                input_err("bicharacter groupoid cocycle needs a cyclic-product groupoid")
            })?;
            GroupoidCocycle::cyclic_bicharacter(gd.clone(), orders, &parse_theta(theta)?)
                .map_err(|e| input_err(e.to_string()))
        }
        GroupoidCocycleSpec::Coboundary { beta } => {
            let mut phases = vec![CircleValue::from_angle(Rat::from_integer(0)); gd.len()];
            for e in beta {
                let idx = element(gd, &e.at)?;
                phases[idx as usize] = parse_angle(&e.angle, mode)?;
            }
            GroupoidCocycle::coboundary(gd.clone(), &phases).map_err(|e| input_err(e.to_string()))
        }
        GroupoidCocycleSpec::Table { base, corrupt } => {
            let base_c = build_groupoid_cocycle(base, gd, orders, mode)?;
            let mut table = BTreeMap::new();
            for (x, y, _) in gd.composable_pairs() {
                let v = base_c.eval(x, y).map_err(|e| input_err(e.to_string()))?;
                table.insert((x, y), v);
            }
            // Same promotion rule as the k-graph table above.
            let mut approx = false;
            let mut bumps = Vec::with_capacity(corrupt.len());
            for c in corrupt {
                let key = (element(gd, &c.left)?, element(gd, &c.right)?);
                if !table.contains_key(&key) {
                    return Err(input_err(format!(
                        "corrupt target ({}, {}) is not composable",
                        c.left, c.right
                    )));
                }
                let angle = parse_angle(&c.multiply_angle, mode)?;
                approx = approx || matches!(angle, CircleValue::Approx(_));
                bumps.push((key, angle));
            }
            if approx {
                for v in table.values_mut() {
                    *v = v.to_approx();
                }
            }
            for (key, angle) in bumps {
                let v = table[&key];
                let angle = if approx { angle.to_approx() } else { angle };
                table.insert(key, v.mul(angle));
            }
            Ok(GroupoidCocycle::new_unchecked(gd.clone(), table))
        }
    }
}

fn element(gd: &FiniteGroupoid, name: &str) -> Result<u32, CliError> {
    gd.index_of(name)
        .map_err(|_| input_err(format!("no groupoid element named \"{name}\"")))
}

pub fn build_functions(
    specs: &[FunctionSpec],
    gd: &Arc<FiniteGroupoid>,
    mode: Mode,
) -> Result<Vec<(String, CcFunction)>, CliError> {
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut entries = Vec::with_capacity(spec.entries.len());
        for e in &spec.entries {
            entries.push((element(gd, &e.at)?, parse_coef(&e.value, &e.angle, mode)?));
        }
        out.push((spec.name.clone(), CcFunction::from_entries(gd.clone(), entries)));
    }
    Ok(out)
}

pub fn find_function<'a>(
    funcs: &'a [(String, CcFunction)],
    name: &str,
) -> Result<&'a CcFunction, CliError> {
    funcs
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, f)| f)
        .ok_or_else(|| input_err(format!("no function named \"{name}\"")))
}
