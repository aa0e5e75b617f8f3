//! One function per subcommand. Each returns an `Outcome`: a verdict, the
//! parameters that were actually used, a JSON report body, and any problems
//! hit while the check ran.
//!
//! Input errors (bad documents, unknown names, unusable flags) surface as
//! `CliError` and exit 2. Violations and boundary failures discovered during
//! a check (insufficient depth, exceeded bounds, failed identities) land in
//! `problems` or the report body and exit 1.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};

use kgraphs::af::{bratteli, homotopy_invariance_report, k0_truncated, BratteliDatum, K0Report};
use kgraphs::cocycle::{is_cohomologous, verify_cocycle, CohomologyVerdict, MorphismPhase};
use kgraphs::convolution::{convolve, i_norm, i_norm_scan, involution, GridBundleFunction};
use kgraphs::path_groupoid::{sigma_c, GroupoidElem};
use kgraphs::paths::InfPathApprox;
use kgraphs::phase::APPROX_TOL;
use kgraphs::scalar::Coef;
use kgraphs::skew::{skew, solve_degree_coboundary, DegreeCoboundary, DegreePotential, SkewProduct};
use kgraphs::{CircleValue, DegreeVec, IntVec, KGraph, LatticeBox, Rat};

use crate::doc::{
    build_cocycle, build_functions, build_graph, build_groupoid, build_groupoid_cocycle,
    build_homotopy, find_function, input_err, BundleSpec, Document, Mode,
};
use crate::render::fmt_coef;
use crate::CliError;

pub struct Ctx<'a> {
    pub doc: &'a Document,
    pub bound: Option<DegreeVec>,
    pub depth: Option<DegreeVec>,
    pub window: Option<LatticeBox>,
    pub grid: Option<usize>,
    pub levels: Option<usize>,
    pub mode: Mode,
}

pub struct Outcome {
    pub passed: bool,
    pub parameters: Vec<(&'static str, String)>,
    pub report: Value,
    pub problems: Vec<String>,
    pub dot: Option<String>,
}

impl Outcome {
    fn new(passed: bool, report: Value) -> Self {
        Outcome {
            passed,
            parameters: Vec::new(),
            report,
            problems: Vec::new(),
            dot: None,
        }
    }
}

fn fmt_window(w: &LatticeBox) -> String {
    w.lo.0
        .iter()
        .zip(&w.hi.0)
        .map(|(lo, hi)| format!("{lo}..{hi}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn uniform_grid(n: usize) -> Result<Vec<Rat>, CliError> {
    if n < 2 {
        return Err(input_err("--grid needs at least 2 points"));
    }
    Ok((0..n).map(|i| Rat::new(i as i64, (n - 1) as i64)).collect())
}

fn graph_of(ctx: &Ctx) -> Result<Arc<KGraph>, CliError> {
    build_graph(ctx.doc.need_graph()?, None)
}

fn skew_of(ctx: &Ctx, graph: &Arc<KGraph>) -> Result<Option<SkewProduct>, CliError> {
    match &ctx.window {
        Some(w) => Ok(Some(
            skew(graph.clone(), w.clone()).map_err(|e| input_err(e.to_string()))?,
        )),
        None => Ok(None),
    }
}

fn need_skew(ctx: &Ctx, graph: &Arc<KGraph>) -> Result<SkewProduct, CliError> {
    skew_of(ctx, graph)?.ok_or_else(|| {
        input_err("this command needs a window (--window or a \"window\" section)")
    })
}

/// Solve for the degree potential on a graph; an obstruction is a report
/// problem rather than an input error.
fn potential_of(graph: &KGraph) -> Result<DegreePotential, String> {
    match solve_degree_coboundary(graph) {
        DegreeCoboundary::Potential(p) => Ok(p),
        DegreeCoboundary::Obstruction(o) => Err(format!("no degree potential: {o}")),
    }
}

pub fn validate(ctx: &Ctx) -> Result<Outcome, CliError> {
    let g = build_graph(ctx.doc.need_graph()?, ctx.bound.clone())?;
    let rep = g.validate_presentation();
    let report = json!({
        "bound": rep.bound.to_string(),
        "source-free": rep.source_free(),
        "square-shape": rep.square_shape,
        "square-pairing": rep.square_pairing.iter().map(|p| {
            format!("path {}*{} sits in {} squares (want 1)", p.first, p.second, p.count)
        }).collect::<Vec<_>>(),
        "confluence": rep.confluence.iter().map(|c| {
            format!("word [{}] has {} normal forms", c.word.join(" "), c.normal_forms.len())
        }).collect::<Vec<_>>(),
        "factorization": rep.factorization,
        "source-flagged": rep.no_source.iter().map(|(v, c)| {
            format!("vertex {v} receives no color-{c} edge")
        }).collect::<Vec<_>>(),
        "fanout": rep.vertex_fanout.iter().map(|(v, n)| {
            format!("{v}: {n}")
        }).collect::<Vec<_>>(),
    });
    let mut out = Outcome::new(rep.passed(), report);
    out.parameters.push(("bound", g.bound().to_string()));
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}

pub fn check_cocycle(ctx: &Ctx) -> Result<Outcome, CliError> {
    let g = graph_of(ctx)?;
    let sp = skew_of(ctx, &g)?;
    let c = build_cocycle(ctx.doc.need_cocycle()?, &g, sp.as_ref(), ctx.mode)?;
    let bound = ctx
        .bound
        .clone()
        .unwrap_or_else(|| c.graph().bound().clone());
    let mut out = match verify_cocycle(&c, &bound) {
        Ok(rep) => {
            let report = json!({
                "morphisms-checked": rep.morphisms_checked,
                "triples-checked": rep.triples_checked,
                "normalization": rep.normalization,
                "identity-violations": rep.identity.iter().map(|v| {
                    format!("({}, {}, {}): lhs {} rhs {}", v.lambda, v.mu, v.nu, v.lhs, v.rhs)
                }).collect::<Vec<_>>(),
            });
            Outcome::new(rep.passed(), report)
        }
        Err(e) => {
            let mut out = Outcome::new(false, json!({}));
            out.problems.push(e.to_string());
            out
        }
    };
    out.parameters.push(("bound", bound.to_string()));
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}

fn phase_map_value(b: &MorphismPhase, graph: &KGraph) -> Value {
    match b {
        MorphismPhase::DegreeLinear { q } => json!({
            "kind": "degree-linear",
            "q": q.iter().map(|r| kgraphs::phase::format_rat(r)).collect::<Vec<_>>(),
        }),
        MorphismPhase::Table { map } => json!({
            "kind": "table",
            "phases": map.iter().map(|(m, v)| {
                json!({"morphism": graph.display_morphism(m), "value": v.to_string()})
            }).collect::<Vec<_>>(),
        }),
    }
}

pub fn cohomologous(ctx: &Ctx) -> Result<Outcome, CliError> {
    let g = graph_of(ctx)?;
    let sp = skew_of(ctx, &g)?;
    let c = build_cocycle(ctx.doc.need_cocycle()?, &g, sp.as_ref(), ctx.mode)?;
    let c2 = build_cocycle(ctx.doc.need_other_cocycle()?, &g, sp.as_ref(), ctx.mode)?;
    let bound = ctx
        .bound
        .clone()
        .unwrap_or_else(|| c.graph().bound().clone());
    let mut out = match is_cohomologous(&c, &c2, &bound) {
        Ok(CohomologyVerdict::Cohomologous { b }) => Outcome::new(
            true,
            json!({"verdict": "cohomologous", "potential": phase_map_value(&b, c.graph())}),
        ),
        Ok(CohomologyVerdict::Inconsistent(obs)) => Outcome::new(
            false,
            json!({"verdict": "inconsistent", "witness": obs.to_string()}),
        ),
        Err(e) => {
            let mut out = Outcome::new(false, json!({}));
            out.problems.push(e.to_string());
            out
        }
    };
    out.parameters.push(("bound", bound.to_string()));
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}

pub fn skew_cmd(ctx: &Ctx) -> Result<Outcome, CliError> {
    let g = graph_of(ctx)?;
    let sp = need_skew(ctx, &g)?;
    let sk = sp.graph().skeleton();
    let rep = sp.graph().validate_presentation();
    let vertices: Vec<String> = (0..sk.vertex_count() as u32)
        .map(|v| sk.vertex_name(v).to_string())
        .collect();
    let report = json!({
        "base-bound": g.bound().to_string(),
        "vertex-count": sk.vertex_count(),
        "edge-count": sk.edge_count(),
        "vertices": vertices,
        "presentation-passed": rep.passed(),
        "source-flagged": rep.no_source.len(),
    });
    let mut out = Outcome::new(rep.passed(), report);
    out.parameters
        .push(("window", fmt_window(ctx.window.as_ref().unwrap())));
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}

pub fn solve_db(ctx: &Ctx) -> Result<Outcome, CliError> {
    let g = graph_of(ctx)?;
    let sp = skew_of(ctx, &g)?;
    let target = sp.as_ref().map(|s| s.graph()).unwrap_or(&g);
    let mut out = match solve_degree_coboundary(target) {
        DegreeCoboundary::Potential(p) => {
            let sk = target.skeleton();
            let rows: Vec<Value> = p
                .b
                .iter()
                .enumerate()
                .map(|(v, b)| json!({"vertex": sk.vertex_name(v as u32), "b": b.to_string()}))
                .collect();
            let verified = p.verify(target);
            let mut out = Outcome::new(
                verified,
                json!({"solved": true, "verified": verified, "potential": rows}),
            );
            if !verified {
                out.problems
                    .push("solved potential fails verification".into());
            }
            out
        }
        DegreeCoboundary::Obstruction(o) => {
            let cycle: Vec<String> = o
                .cycle
                .iter()
                .map(|(id, s)| format!("{id}^{s:+}"))
                .collect();
            Outcome::new(
                false,
                json!({
                    "solved": false,
                    "cycle": cycle,
                    "degree-sum": o.degree_sum.to_string(),
                    "witness": o.to_string(),
                }),
            )
        }
    };
    out.parameters.push((
        "target",
        if sp.is_some() { "skew".into() } else { "base".into() },
    ));
    if let Some(w) = &ctx.window {
        out.parameters.push(("window", fmt_window(w)));
    }
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}

fn elem_for(
    cache: &mut BTreeMap<IntVec, GroupoidElem>,
    x: &InfPathApprox,
    lag: &IntVec,
) -> Result<GroupoidElem, String> {
    if let Some(e) = cache.get(lag) {
        return Ok(e.clone());
    }
    let e = GroupoidElem::self_lag(x, lag.clone()).map_err(|e| e.to_string())?;
    cache.insert(lag.clone(), e.clone());
    Ok(e)
}

#[allow(clippy::too_many_arguments)]
fn sigma_for(
    memo: &mut BTreeMap<(IntVec, IntVec), CircleValue>,
    cache: &mut BTreeMap<IntVec, GroupoidElem>,
    c: &kgraphs::cocycle::Cocycle2,
    x: &InfPathApprox,
    a: &IntVec,
    b: &IntVec,
) -> Result<CircleValue, String> {
    let key = (a.clone(), b.clone());
    if let Some(v) = memo.get(&key) {
        return Ok(*v);
    }
    let ea = elem_for(cache, x, a)?;
    let eb = elem_for(cache, x, b)?;
    let v = sigma_c(c, &ea, &eb).map_err(|e| e.to_string())?;
    memo.insert(key, v);
    Ok(v)
}

fn default_lags(k: usize) -> Vec<IntVec> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for prefix in &out {
            for d in [-1i64, 0, 1] {
                let mut p = prefix.clone();
                p.push(d);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(IntVec).collect()
}

pub fn sigma_c_cmd(ctx: &Ctx) -> Result<Outcome, CliError> {
    let g = graph_of(ctx)?;
    let sp = skew_of(ctx, &g)?;
    let c = build_cocycle(ctx.doc.need_cocycle()?, &g, sp.as_ref(), ctx.mode)?;
    let target = c.graph().clone();
    let k = target.k();
    let v0 = match &ctx.doc.base_vertex {
        Some(name) => target
            .skeleton()
            .vertex_index(name)
            .map_err(|_| input_err(format!("no vertex named \"{name}\"")))?,
        None => 0,
    };
    let depth = ctx.depth.clone().unwrap_or_else(|| target.bound().clone());
    let lags: Vec<IntVec> = match &ctx.doc.lags {
        Some(ls) => {
            let mut lags = Vec::with_capacity(ls.len());
            for l in ls {
                if l.len() != k {
                    return Err(input_err(format!(
                        "lag ({}) has rank {}, graph has rank {k}",
                        l.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                        l.len()
                    )));
                }
                lags.push(IntVec(l.clone()));
            }
            lags.sort();
            lags.dedup();
            lags
        }
        None => default_lags(k),
    };

    let tol = if ctx.mode.float { APPROX_TOL } else { 0.0 };
    let mut problems = Vec::new();
    let mut values = Vec::new();
    let mut violations = Vec::new();
    let mut triples = 0u64;

    match InfPathApprox::from_vertex(target.clone(), v0).extend_to(&depth) {
        Err(e) => problems.push(e.to_string()),
        Ok(x) => {
            let mut memo = BTreeMap::new();
            let mut cache = BTreeMap::new();
            'pairs: for a in &lags {
                for b in &lags {
                    match sigma_for(&mut memo, &mut cache, &c, &x, a, b) {
                        Ok(v) => values.push(json!({
                            "left": a.to_string(),
                            "right": b.to_string(),
                            "value": v.to_string(),
                        })),
                        Err(e) => {
                            problems.push(e);
                            break 'pairs;
                        }
                    }
                }
            }
            if problems.is_empty() {
                'triples: for a in &lags {
                    for b in &lags {
                        for cc in &lags {
                            let ab = a.add(b);
                            let bc = b.add(cc);
                            let step = (|| -> Result<(CircleValue, CircleValue), String> {
                                let lhs = sigma_for(&mut memo, &mut cache, &c, &x, a, b)?
                                    .mul(sigma_for(&mut memo, &mut cache, &c, &x, &ab, cc)?);
                                let rhs = sigma_for(&mut memo, &mut cache, &c, &x, a, &bc)?
                                    .mul(sigma_for(&mut memo, &mut cache, &c, &x, b, cc)?);
                                Ok((lhs, rhs))
                            })();
                            match step {
                                Ok((lhs, rhs)) => {
                                    triples += 1;
                                    if !lhs.approx_eq(rhs, tol) {
                                        violations.push(format!(
                                            "lags {a}, {b}, {cc}: lhs {lhs} rhs {rhs}"
                                        ));
                                    }
                                }
                                Err(e) => {
                                    problems.push(e);
                                    break 'triples;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let passed = problems.is_empty() && violations.is_empty();
    let report = json!({
        "base-vertex": target.skeleton().vertex_name(v0),
        "lags": lags.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "values": values,
        "identity-violations": violations,
        "triples-checked": triples,
    });
    let mut out = Outcome::new(passed, report);
    out.problems = problems;
    out.parameters.push(("depth", depth.to_string()));
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}

fn groupoid_parts(
    ctx: &Ctx,
) -> Result<
    (
        Arc<kgraphs::finite_groupoid::FiniteGroupoid>,
        Option<Vec<u32>>,
    ),
    CliError,
> {
    let graph = match &ctx.doc.graph {
        Some(spec) => Some(build_graph(spec, None)?),
        None => None,
    };
    build_groupoid(ctx.doc.need_groupoid()?, graph.as_ref())
}

fn entries_value(gd: &kgraphs::finite_groupoid::FiniteGroupoid, f: &kgraphs::convolution::CcFunction) -> Vec<Value> {
    f.entries()
        .map(|(x, c)| json!({"at": gd.name(x), "value": fmt_coef(c)}))
        .collect()
}

pub fn convolve_cmd(ctx: &Ctx) -> Result<Outcome, CliError> {
    let (gd, orders) = groupoid_parts(ctx)?;
    let omega = build_groupoid_cocycle(
        ctx.doc.need_groupoid_cocycle()?,
        &gd,
        orders.as_deref(),
        ctx.mode,
    )?;
    let funcs = build_functions(&ctx.doc.functions, &gd, ctx.mode)?;
    if funcs.len() < 2 {
        return Err(input_err("convolve needs at least two functions"));
    }
    let (fname, f) = &funcs[0];
    let (gname, g) = &funcs[1];

    let mut out = if let Err(e) = omega.verify() {
        let mut out = Outcome::new(false, json!({"cocycle-check": "fail"}));
        out.problems.push(e.to_string());
        out
    } else {
        match (convolve(f, g, &omega), involution(f, &omega)) {
            (Ok(product), Ok(f_star)) => {
                let report = json!({
                    "cocycle-check": "pass",
                    "left": fname,
                    "right": gname,
                    "product": entries_value(&gd, &product),
                    "left-involution": entries_value(&gd, &f_star),
                    "norms": {
                        "left": i_norm(f).to_string(),
                        "right": i_norm(g).to_string(),
                        "product": i_norm(&product).to_string(),
                    },
                });
                Outcome::new(true, report)
            }
            (r1, r2) => {
                let mut out = Outcome::new(false, json!({"cocycle-check": "pass"}));
                for r in [r1.err(), r2.err()].into_iter().flatten() {
                    out.problems.push(r.to_string());
                }
                out
            }
        }
    };
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}

pub fn i_norm_scan_cmd(ctx: &Ctx) -> Result<Outcome, CliError> {
    let (gd, _) = groupoid_parts(ctx)?;
    let funcs = build_functions(&ctx.doc.functions, &gd, ctx.mode)?;
    let BundleSpec::Interpolate { from, to } = ctx.doc.need_bundle()?;
    let f0 = find_function(&funcs, from)?.clone();
    let f1 = find_function(&funcs, to)?.clone();
    let n = ctx.grid.unwrap_or(11);
    let grid = uniform_grid(n)?;
    let one = Rat::from_integer(1);
    let bundle = GridBundleFunction::sample(gd.clone(), grid, |t| {
        f0.scale(&Coef::from_rat(one - t))
            .add(&f1.scale(&Coef::from_rat(t)))
            .expect("slices share the groupoid")
    })
    .map_err(|e| input_err(e.to_string()))?;
    let rep = i_norm_scan(&bundle);
    let report = json!({
        "curve": rep.curve.iter().map(|p| {
            json!({"t": kgraphs::phase::format_rat(&p.t), "norm": p.norm.to_string()})
        }).collect::<Vec<_>>(),
        "fiber-bound": rep.fiber_bound,
        "max-jump": format!("{:e}", rep.max_jump),
        "certified": rep.continuity_certified,
    });
    let mut out = Outcome::new(rep.continuity_certified, report);
    out.parameters.push(("grid", n.to_string()));
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}

fn datum_value(datum: &BratteliDatum) -> Value {
    json!({
        "truncation": datum.truncation,
        "levels": datum.levels,
        "matrices": datum.matrices,
        "distinguished": datum.distinguished.iter().map(|(name, level, pos)| {
            format!("{name} level {level} pos {pos}")
        }).collect::<Vec<_>>(),
    })
}

fn k0_value(rep: &K0Report) -> Value {
    json!({
        "torsion": rep.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "free-rank": rep.free_rank,
        "classes": rep.classes.iter().map(|(name, level, coords)| {
            json!({
                "vertex": name,
                "level": level,
                "class": coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
    })
}

fn skew_and_potential(
    ctx: &Ctx,
) -> Result<(Arc<KGraph>, SkewProduct, Result<DegreePotential, String>), CliError> {
    let g = graph_of(ctx)?;
    let sp = need_skew(ctx, &g)?;
    let pot = potential_of(sp.graph());
    Ok((g, sp, pot))
}

pub fn bratteli_cmd(ctx: &Ctx) -> Result<Outcome, CliError> {
    let (_, sp, pot) = skew_and_potential(ctx)?;
    let levels = ctx.levels.unwrap_or(3);
    let mut out = match pot {
        Err(p) => {
            let mut out = Outcome::new(false, json!({}));
            out.problems.push(p);
            out
        }
        Ok(pot) => match bratteli(sp.graph(), &pot, levels) {
            Ok(datum) => {
                let mut out = Outcome::new(true, datum_value(&datum));
                out.dot = Some(datum.to_dot());
                out
            }
            Err(e) => {
                let mut out = Outcome::new(false, json!({}));
                out.problems.push(e.to_string());
                out
            }
        },
    };
    out.parameters.push(("levels", levels.to_string()));
    out.parameters
        .push(("window", fmt_window(ctx.window.as_ref().unwrap())));
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}

pub fn k0_cmd(ctx: &Ctx) -> Result<Outcome, CliError> {
    let (_, sp, pot) = skew_and_potential(ctx)?;
    let levels = ctx.levels.unwrap_or(3);
    let mut out = match pot {
        Err(p) => {
            let mut out = Outcome::new(false, json!({}));
            out.problems.push(p);
            out
        }
        Ok(pot) => match bratteli(sp.graph(), &pot, levels) {
            Ok(datum) => {
                let rep = k0_truncated(&datum);
                let mut body = k0_value(&rep);
                body["truncation"] = json!(rep.truncation);
                body["levels"] = json!(datum.levels);
                Outcome::new(true, body)
            }
            Err(e) => {
                let mut out = Outcome::new(false, json!({}));
                out.problems.push(e.to_string());
                out
            }
        },
    };
    out.parameters.push(("levels", levels.to_string()));
    out.parameters
        .push(("window", fmt_window(ctx.window.as_ref().unwrap())));
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}

pub fn homotopy_report(ctx: &Ctx) -> Result<Outcome, CliError> {
    let (g, sp, pot) = skew_and_potential(ctx)?;
    let hom_base = build_homotopy(ctx.doc.need_homotopy()?, &g, ctx.mode)?;
    let hom = sp
        .pullback_homotopy(&hom_base)
        .map_err(|e| input_err(e.to_string()))?;
    let levels = ctx.levels.unwrap_or(3);
    let n = ctx.grid.unwrap_or(11);
    let grid = hom
        .sample_points(&uniform_grid(n)?)
        .map_err(|e| input_err(e.to_string()))?;

    let mut out = match pot {
        Err(p) => {
            let mut out = Outcome::new(false, json!({}));
            out.problems.push(p);
            out
        }
        Ok(pot) => match homotopy_invariance_report(&pot, levels, &hom, &grid) {
            Ok(rep) => {
                let kappa_final: Vec<Value> = rep
                    .kappa_tables
                    .last()
                    .map(|tables| {
                        tables
                            .iter()
                            .enumerate()
                            .map(|(h, rows)| {
                                json!({
                                    "level": h,
                                    "phases": rows.iter().map(|(label, v)| {
                                        format!("{label} -> {v}")
                                    }).collect::<Vec<_>>(),
                                })
                            })
                            .collect()
                    })
                    .unwrap_or_default();
                let report = json!({
                    "truncation": rep.truncation,
                    "grid": rep.grid.iter().map(kgraphs::phase::format_rat).collect::<Vec<_>>(),
                    "identical-across-grid": rep.identical_across_grid,
                    "intertwining-violations": rep.intertwining_violations,
                    "levels": rep.datum.levels,
                    "matrices": rep.datum.matrices,
                    "k0": k0_value(&rep.k0),
                    "kappa-final": kappa_final,
                });
                Outcome::new(rep.passed(), report)
            }
            Err(e) => {
                let mut out = Outcome::new(false, json!({}));
                out.problems.push(e.to_string());
                out
            }
        },
    };
    out.parameters.push(("levels", levels.to_string()));
    out.parameters.push(("grid", n.to_string()));
    out.parameters
        .push(("window", fmt_window(ctx.window.as_ref().unwrap())));
    out.parameters.push(("mode", ctx.mode.label().into()));
    Ok(out)
}
