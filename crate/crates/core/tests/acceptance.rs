//! End-to-end acceptance gate. Each test exercises one pipeline at desk
//! scale and prints a single PASS/FAIL line; failures carry the first
//! offending witness. Exact-mode checks compare structurally with zero
//! tolerance, float-mode checks use FLOAT_TOL.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kgraphs::af::{
    ad_u, bratteli, connecting_map, homotopy_invariance_report, k0_truncated, kappa,
    verify_intertwining, LevelAlgebra, PhaseMatrixUnitMap,
};
use kgraphs::cocycle::{
    homotopy_eval, verify_cocycle, Cocycle2, CocycleHomotopy, MorphismPhase, RealCocycle2,
};
use kgraphs::convolution::{convolve, i_norm, i_norm_scan, involution, CcFunction, GridBundleFunction};
use kgraphs::degree::{DegreeVec, IntVec, LatticeBox};
use kgraphs::finite_groupoid::{FiniteGroupoid, GroupoidCocycle};
use kgraphs::fixtures;
use kgraphs::graph::KGraph;
use kgraphs::path_groupoid::{sigma_c, GroupoidElem};
use kgraphs::paths::InfPathApprox;
use kgraphs::phase::{CircleValue, Rat, RealValue};
use kgraphs::scalar::Coef;
use kgraphs::skew::{skew, solve_degree_coboundary, DegreeCoboundary, DegreePotential, SkewProduct};

/// Float-mode tolerance. Exact-mode checks do not use it.
const FLOAT_TOL: f64 = 1e-12;

fn report(number: u32, name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("acceptance {number:02} {name}: PASS");
    } else {
        println!("acceptance {number:02} {name}: FAIL");
        for f in &failures {
            println!("  {f}");
        }
        panic!(
            "acceptance {number:02} {name}: {} check(s) failed, first: {}",
            failures.len(),
            failures[0]
        );
    }
}

fn dv(parts: &[u32]) -> DegreeVec {
    DegreeVec(parts.to_vec())
}

fn iv(parts: &[i64]) -> IntVec {
    IntVec(parts.to_vec())
}

fn rat_f64(q: Rat) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn tenths() -> Vec<Rat> {
    (0..=10).map(|i| Rat::new(i, 10)).collect()
}

/// The plane graph skewed over the lattice box [0,e]^2, with the degree
/// potential normalized at the window origin.
fn plane_skew(extent: i64) -> (SkewProduct, DegreePotential) {
    let base = Arc::new(fixtures::n2((extent as u32, extent as u32)));
    let window = LatticeBox::new(iv(&[0, 0]), iv(&[extent, extent])).unwrap();
    let sp = skew(base, window).unwrap();
    let potential = match solve_degree_coboundary(sp.graph()) {
        DegreeCoboundary::Potential(p) => p,
        DegreeCoboundary::Obstruction(o) => panic!("unexpected obstruction: {o}"),
    };
    (sp, potential)
}

/// The two-loop graph skewed over [0,e], same normalization.
fn loops_skew(extent: i64) -> (SkewProduct, DegreePotential) {
    let base = Arc::new(fixtures::two_loops(extent as u32));
    let window = LatticeBox::new(iv(&[0]), iv(&[extent])).unwrap();
    let sp = skew(base, window).unwrap();
    let potential = match solve_degree_coboundary(sp.graph()) {
        DegreeCoboundary::Potential(p) => p,
        DegreeCoboundary::Obstruction(o) => panic!("unexpected obstruction: {o}"),
    };
    (sp, potential)
}

#[test]
fn acceptance_01_cocycle_identity_suite() {
    let mut failures = Vec::new();
    let bound = dv(&[3, 3]);

    // Rotation cocycles at two angles: zero violations, all values exact.
    for theta in [Rat::new(1, 3), Rat::new(1, 4)] {
        let g = Arc::new(fixtures::n2((3, 3)));
        let c = Cocycle2::rotation(g, theta).unwrap();
        let rep = verify_cocycle(&c, &bound).unwrap();
        if !rep.passed() || rep.triples_checked == 0 {
            failures.push(format!(
                "rotation theta={theta}: {} normalization, {} identity violations over {} triples",
                rep.normalization.len(),
                rep.identity.len(),
                rep.triples_checked
            ));
        }
    }

    // Twenty random coboundary potentials, split over the two bundled
    // 2-graph presentations. Coboundaries are cocycles by construction,
    // so the verifier must stay silent.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for trial in 0..20u32 {
        let g: Arc<KGraph> = if trial % 2 == 0 {
            Arc::new(fixtures::n2((3, 3)))
        } else {
            Arc::new(fixtures::two_per_color((3, 3)))
        };
        let mut map = BTreeMap::new();
        for m in g.all_morphisms() {
            if m.is_identity() {
                continue;
            }
            map.insert(m, CircleValue::from_angle(Rat::new(rng.gen_range(0..24), 24)));
        }
        let b = MorphismPhase::Table { map: Arc::new(map) };
        let c = Cocycle2::coboundary(g, b).unwrap();
        let rep = verify_cocycle(&c, &bound).unwrap();
        if !rep.passed() {
            failures.push(format!(
                "coboundary trial {trial}: {} identity violations",
                rep.identity.len()
            ));
        }
    }

    // Negative control: materialize the rotation cocycle as an explicit
    // table, corrupt exactly one entry, and demand a violation. The
    // uncorrupted table must still pass.
    let g = Arc::new(fixtures::n2((3, 3)));
    let c = Cocycle2::rotation(g.clone(), Rat::new(1, 3)).unwrap();
    let all = g.all_morphisms();
    let mut entries = BTreeMap::new();
    for lam in &all {
        for mu in &all {
            if lam.source() != mu.range() || !lam.degree().add(mu.degree()).le(&bound) {
                continue;
            }
            entries.insert((lam.clone(), mu.clone()), c.eval(lam, mu).unwrap());
        }
    }
    let honest = Cocycle2::table(g.clone(), entries.clone());
    let rep = verify_cocycle(&honest, &bound).unwrap();
    if !rep.passed() {
        failures.push(format!(
            "uncorrupted table: {} unexpected violations",
            rep.identity.len()
        ));
    }
    let key = entries
        .keys()
        .find(|(l, m)| *l.degree() == dv(&[1, 0]) && *m.degree() == dv(&[0, 1]))
        .cloned()
        .unwrap();
    let bumped = entries[&key].mul(CircleValue::from_angle(Rat::new(1, 7)));
    entries.insert(key, bumped);
    let corrupted = Cocycle2::table(g, entries);
    let rep = verify_cocycle(&corrupted, &bound).unwrap();
    if rep.identity.is_empty() {
        failures.push("corrupted table entry was not detected".into());
    }

    report(1, "cocycle-identity-suite", failures);
}

#[test]
fn acceptance_02_factorization_oracle() {
    let mut failures = Vec::new();
    for (name, g) in [
        ("one-loop-pair", fixtures::n2((3, 3))),
        ("two-per-color", fixtures::two_per_color((3, 3))),
    ] {
        let all = g.all_morphisms();
        // Brute force over every composable pair: the recorded split must
        // be recovered by factorize, and recomposition is the identity.
        let mut counts: BTreeMap<(kgraphs::Morphism, DegreeVec), u32> = BTreeMap::new();
        for mu in &all {
            for nu in &all {
                if mu.source() != nu.range() || !mu.degree().add(nu.degree()).le(g.bound()) {
                    continue;
                }
                let lam = g.compose(mu, nu).unwrap();
                *counts.entry((lam.clone(), mu.degree().clone())).or_insert(0) += 1;
                let (mu2, nu2) = g.factorize(&lam, mu.degree()).unwrap();
                if &mu2 != mu || &nu2 != nu {
                    failures.push(format!(
                        "{name}: factorize({}, {}) did not return the composed pair",
                        g.display_morphism(&lam),
                        mu.degree()
                    ));
                }
            }
        }
        // Uniqueness: every (morphism, split) arises from exactly one pair.
        for ((lam, m), count) in &counts {
            if *count != 1 {
                failures.push(format!(
                    "{name}: {} admits {count} factorizations at split {m}",
                    g.display_morphism(lam)
                ));
            }
        }
        // Coverage: every morphism splits at every degree below its own,
        // and composing the parts returns the original morphism.
        for lam in &all {
            for m in lam.degree().iter_below() {
                if counts.get(&(lam.clone(), m.clone())) != Some(&1) {
                    failures.push(format!(
                        "{name}: no unique factorization of {} at {m}",
                        g.display_morphism(lam)
                    ));
                }
                let (mu, nu) = g.factorize(lam, &m).unwrap();
                if &g.compose(&mu, &nu).unwrap() != lam {
                    failures.push(format!(
                        "{name}: recomposition of {} at {m} is not the identity",
                        g.display_morphism(lam)
                    ));
                }
            }
        }
    }
    report(2, "factorization-oracle", failures);
}

#[test]
fn acceptance_03_path_cocycle_suite() {
    let mut failures = Vec::new();
    for theta in [Rat::new(1, 3), Rat::new(1, 4)] {
        let g = Arc::new(fixtures::n2((16, 16)));
        let c = Cocycle2::rotation(g.clone(), theta).unwrap();
        // The plane graph has a single boundary path; the depth-(3,3)
        // approximation pins it down and deeper windows are refinements
        // of the same point, used only to certify composite lags.
        let shallow = InfPathApprox::from_vertex(g.clone(), 0)
            .extend_to(&dv(&[3, 3]))
            .unwrap();
        let x = shallow.extend_to(&dv(&[14, 14])).unwrap();

        let mut lags = Vec::new();
        for i in -2i64..=2 {
            for j in -2i64..=2 {
                lags.push(iv(&[i, j]));
            }
        }
        let mut memo: BTreeMap<(IntVec, IntVec), CircleValue> = BTreeMap::new();
        let mut sigma = |la: &IntVec, lb: &IntVec, failures: &mut Vec<String>| -> CircleValue {
            if let Some(v) = memo.get(&(la.clone(), lb.clone())) {
                return *v;
            }
            let a = GroupoidElem::self_lag(&x, la.clone()).unwrap();
            let b = GroupoidElem::self_lag(&x, lb.clone()).unwrap();
            let v = sigma_c(&c, &a, &b).unwrap();
            if !v.is_exact() {
                failures.push(format!("sigma at lags {la}, {lb} left exact mode"));
            }
            memo.insert((la.clone(), lb.clone()), v);
            v
        };

        // Groupoid cocycle identity over all lag triples, exact equality.
        for la in &lags {
            for lb in &lags {
                for lc in &lags {
                    let ab = la.add(lb);
                    let bc = lb.add(lc);
                    let lhs = sigma(la, lb, &mut failures).mul(sigma(&ab, lc, &mut failures));
                    let rhs = sigma(la, &bc, &mut failures).mul(sigma(lb, lc, &mut failures));
                    if lhs != rhs {
                        failures.push(format!(
                            "theta={theta}: identity fails at lags {la}, {lb}, {lc}: {lhs} vs {rhs}"
                        ));
                    }
                }
            }
        }

        // Hand values, computed from the depth-(3,3) approximation itself.
        let a3 = GroupoidElem::self_lag(&shallow, iv(&[0, 1])).unwrap();
        let b3 = GroupoidElem::self_lag(&shallow, iv(&[1, 0])).unwrap();
        let forward = sigma_c(&c, &a3, &b3).unwrap();
        if forward != CircleValue::from_angle(theta) {
            failures.push(format!(
                "theta={theta}: sigma((x,(0,1),x),(x,(1,0),x)) = {forward}, expected e({theta})"
            ));
        }
        let reversed = sigma_c(&c, &b3, &a3).unwrap();
        if reversed != CircleValue::one() {
            failures.push(format!(
                "theta={theta}: reversed order gave {reversed}, expected 1"
            ));
        }

        // Tail swaps: a different window depth and a fattened certificate
        // present the same groupoid elements, so values must not move.
        let x_alt = InfPathApprox::from_vertex(g.clone(), 0)
            .extend_to(&dv(&[10, 10]))
            .unwrap();
        let ones = DegreeVec::ones(2);
        for la in &lags {
            for lb in &lags {
                let expected = sigma(la, lb, &mut failures);
                let a_alt = GroupoidElem::self_lag(&x_alt, la.clone()).unwrap();
                let b_alt = GroupoidElem::self_lag(&x_alt, lb.clone()).unwrap();
                let got = sigma_c(&c, &a_alt, &b_alt).unwrap();
                if got != expected {
                    failures.push(format!(
                        "theta={theta}: depth swap changed sigma at {la}, {lb}"
                    ));
                }
                let fat = |l: &IntVec| {
                    GroupoidElem::new(
                        x.clone(),
                        l.clone(),
                        x.clone(),
                        (l.positive_part().add(&ones), l.negative_part().add(&ones)),
                    )
                    .unwrap()
                };
                let got = sigma_c(&c, &fat(la), &fat(lb)).unwrap();
                if got != expected {
                    failures.push(format!(
                        "theta={theta}: certificate swap changed sigma at {la}, {lb}"
                    ));
                }
            }
        }
    }
    report(3, "path-cocycle-suite", failures);
}

fn random_slice(gd: &Arc<FiniteGroupoid>, rng: &mut ChaCha8Rng, phased: bool) -> CcFunction {
    let mut entries = Vec::new();
    for x in 0..gd.len() as u32 {
        if !rng.gen_bool(0.8) {
            continue;
        }
        let q = Rat::new(rng.gen_range(-6..=6), rng.gen_range(1..=4));
        let c = if phased {
            Coef::phased_rat(q, Rat::new(rng.gen_range(0..24), 24))
        } else {
            Coef::from_rat(q)
        };
        entries.push((x, c));
    }
    CcFunction::from_entries(gd.clone(), entries)
}

fn exact_norm(v: RealValue, label: &str, failures: &mut Vec<String>) -> Rat {
    match v {
        RealValue::Exact(q) => q,
        RealValue::Approx(x) => {
            failures.push(format!("{label}: norm left exact mode ({x})"));
            Rat::zero()
        }
    }
}

/// Associativity, involutivity, anti-multiplicativity, and the I-norm
/// inequalities for one triple of slices. Algebra laws always compare
/// structurally; norms compare as exact rationals when `exact_norms`.
fn convolution_laws(
    omega: &GroupoidCocycle,
    f: &CcFunction,
    g: &CcFunction,
    h: &CcFunction,
    exact_norms: bool,
    label: &str,
    failures: &mut Vec<String>,
) {
    let fg = convolve(f, g, omega).unwrap();
    let gh = convolve(g, h, omega).unwrap();
    let assoc_l = convolve(&fg, h, omega).unwrap();
    let assoc_r = convolve(f, &gh, omega).unwrap();
    if !assoc_l.approx_eq(&assoc_r, 0.0) {
        failures.push(format!("{label}: associativity fails"));
    }
    let f_star = involution(f, omega).unwrap();
    if !involution(&f_star, omega).unwrap().approx_eq(f, 0.0) {
        failures.push(format!("{label}: involution is not involutive"));
    }
    let anti_l = involution(&fg, omega).unwrap();
    let anti_r = convolve(&involution(g, omega).unwrap(), &f_star, omega).unwrap();
    if !anti_l.approx_eq(&anti_r, 0.0) {
        failures.push(format!("{label}: anti-multiplicativity fails"));
    }
    if exact_norms {
        let nf = exact_norm(i_norm(f), label, failures);
        let ng = exact_norm(i_norm(g), label, failures);
        let nfg = exact_norm(i_norm(&fg), label, failures);
        if nfg > nf * ng {
            failures.push(format!("{label}: submultiplicativity fails ({nfg} > {nf}*{ng})"));
        }
        if exact_norm(i_norm(&f_star), label, failures) != nf {
            failures.push(format!("{label}: involution changed the norm"));
        }
        let nsum = exact_norm(i_norm(&f.add(g).unwrap()), label, failures);
        if nsum > nf + ng {
            failures.push(format!("{label}: triangle inequality fails"));
        }
    } else {
        let (nf, ng) = (i_norm(f).to_f64(), i_norm(g).to_f64());
        if i_norm(&fg).to_f64() > nf * ng + FLOAT_TOL {
            failures.push(format!("{label}: submultiplicativity fails in float mode"));
        }
        if (i_norm(&f_star).to_f64() - nf).abs() > FLOAT_TOL {
            failures.push(format!("{label}: involution changed the norm in float mode"));
        }
        if i_norm(&f.add(g).unwrap()).to_f64() > nf + ng + FLOAT_TOL {
            failures.push(format!("{label}: triangle inequality fails in float mode"));
        }
    }
}

#[test]
fn acceptance_04_twisted_convolution_suite() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);

    // Klein four-group with its sign bicharacter: every value is a real
    // sign, so the whole suite including the norms runs exactly.
    let klein = Arc::new(FiniteGroupoid::product_of_cyclics(&[2, 2]));
    let theta = vec![vec![Rat::zero(), Rat::new(1, 2)], vec![Rat::zero(), Rat::zero()]];
    let omega_klein = GroupoidCocycle::cyclic_bicharacter(klein.clone(), &[2, 2], &theta).unwrap();
    omega_klein.verify().unwrap();
    for trial in 0..5 {
        let f = random_slice(&klein, &mut rng, false);
        let g = random_slice(&klein, &mut rng, false);
        let h = random_slice(&klein, &mut rng, false);
        convolution_laws(
            &omega_klein,
            &f,
            &g,
            &h,
            true,
            &format!("klein trial {trial}"),
            &mut failures,
        );
    }

    // 3x3 matrix-unit groupoid with a random exact cocycle. Sign-valued
    // potentials keep the norm checks exact; a second regime with random
    // 24th-root phases re-checks the algebra laws structurally and the
    // norms in float mode.
    let m3 = Arc::new(FiniteGroupoid::matrix_units(3));
    for trial in 0..5 {
        let mut beta = vec![CircleValue::one(); m3.len()];
        for x in 0..m3.len() as u32 {
            if !m3.is_unit(x) {
                beta[x as usize] = CircleValue::from_angle(Rat::new(rng.gen_range(0..2), 2));
            }
        }
        let omega = GroupoidCocycle::coboundary(m3.clone(), &beta).unwrap();
        omega.verify().unwrap();
        let f = random_slice(&m3, &mut rng, false);
        let g = random_slice(&m3, &mut rng, false);
        let h = random_slice(&m3, &mut rng, false);
        convolution_laws(
            &omega,
            &f,
            &g,
            &h,
            true,
            &format!("matrix-unit sign trial {trial}"),
            &mut failures,
        );
    }
    for trial in 0..5 {
        let mut beta = vec![CircleValue::one(); m3.len()];
        for x in 0..m3.len() as u32 {
            if !m3.is_unit(x) {
                beta[x as usize] = CircleValue::from_angle(Rat::new(rng.gen_range(0..24), 24));
            }
        }
        let omega = GroupoidCocycle::coboundary(m3.clone(), &beta).unwrap();
        omega.verify().unwrap();
        let f = random_slice(&m3, &mut rng, true);
        let g = random_slice(&m3, &mut rng, true);
        let h = random_slice(&m3, &mut rng, true);
        convolution_laws(
            &omega,
            &f,
            &g,
            &h,
            false,
            &format!("matrix-unit phase trial {trial}"),
            &mut failures,
        );
    }

    // Negative control: one corrupted table entry must break associativity
    // on delta functions, and the honest table must not.
    let mut table: BTreeMap<(u32, u32), CircleValue> = BTreeMap::new();
    for (x, y, _) in klein.composable_pairs() {
        table.insert((x, y), omega_klein.eval(x, y).unwrap());
    }
    let key = *table
        .keys()
        .find(|(x, y)| !klein.is_unit(*x) && !klein.is_unit(*y))
        .unwrap();
    let bumped = table[&key].mul(CircleValue::from_angle(Rat::new(1, 7)));
    table.insert(key, bumped);
    let corrupted = GroupoidCocycle::new_unchecked(klein.clone(), table);
    let assoc_failures = |omega: &GroupoidCocycle| -> u32 {
        let mut broken = 0;
        for x in 0..klein.len() as u32 {
            for y in 0..klein.len() as u32 {
                for z in 0..klein.len() as u32 {
                    if !klein.composable(x, y) || !klein.composable(y, z) {
                        continue;
                    }
                    let dx = CcFunction::delta(klein.clone(), x);
                    let dy = CcFunction::delta(klein.clone(), y);
                    let dz = CcFunction::delta(klein.clone(), z);
                    let l = convolve(&convolve(&dx, &dy, omega).unwrap(), &dz, omega).unwrap();
                    let r = convolve(&dx, &convolve(&dy, &dz, omega).unwrap(), omega).unwrap();
                    if !l.approx_eq(&r, 0.0) {
                        broken += 1;
                    }
                }
            }
        }
        broken
    };
    if assoc_failures(&corrupted) == 0 {
        failures.push("corrupted cocycle table kept associativity".into());
    }
    if assoc_failures(&omega_klein) != 0 {
        failures.push("honest cocycle table broke associativity".into());
    }

    report(4, "twisted-convolution-suite", failures);
}

#[test]
fn acceptance_05_norm_continuity_scan() {
    let mut failures = Vec::new();
    let gd = Arc::new(FiniteGroupoid::matrix_units(3));

    // F(a,t) = t * delta at a unit, on the 11-point grid: the norm curve
    // is exactly (t, t) and the scan certifies continuity.
    let e = gd.units()[0];
    let grid = tenths();
    let bundle = GridBundleFunction::sample(gd.clone(), grid.clone(), |t| {
        CcFunction::scaled_delta(gd.clone(), e, Coef::from_rat(t))
    })
    .unwrap();
    let scan = i_norm_scan(&bundle);
    if scan.curve.len() != 11 {
        failures.push(format!("expected 11 scan points, got {}", scan.curve.len()));
    }
    for (i, point) in scan.curve.iter().enumerate() {
        let want = grid[i];
        let exact = matches!(point.norm, RealValue::Exact(q) if q == want);
        if point.t != want || !exact {
            failures.push(format!(
                "scan point {i}: (t, norm) = ({}, {:?}), expected ({want}, {want}) exactly",
                point.t, point.norm
            ));
        }
    }
    if !scan.continuity_certified {
        failures.push("linear delta bundle was not certified continuous".into());
    }

    // Random interpolation bundles: slices (1-t)A + tB have slice Lipschitz
    // constant L = sup |B - A|, so adjacent norm jumps obey K*L*dt up to
    // float tolerance, K the scan's fiber support bound.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    for trial in 0..5 {
        let a = random_slice(&gd, &mut rng, true);
        let b = random_slice(&gd, &mut rng, true);
        let mut grid = vec![Rat::zero(), Rat::one()];
        for _ in 0..4 {
            grid.push(Rat::new(rng.gen_range(1..30), 30));
        }
        grid.sort();
        grid.dedup();
        let bundle = GridBundleFunction::sample(gd.clone(), grid.clone(), |t| {
            a.scale(&Coef::from_rat(Rat::one() - t))
                .add(&b.scale(&Coef::from_rat(t)))
                .unwrap()
        })
        .unwrap();
        let diff = b.sub(&a).unwrap();
        let lipschitz = diff
            .support()
            .map(|x| diff.value(x).modulus().to_f64())
            .fold(0.0f64, f64::max);
        let scan = i_norm_scan(&bundle);
        if !scan.continuity_certified {
            failures.push(format!("trial {trial}: scan refused to certify continuity"));
        }
        for w in scan.curve.windows(2) {
            let jump = (w[1].norm.to_f64() - w[0].norm.to_f64()).abs();
            let dt = rat_f64(w[1].t - w[0].t);
            let allowed = scan.fiber_bound as f64 * lipschitz * dt + FLOAT_TOL;
            if jump > allowed {
                failures.push(format!(
                    "trial {trial}: jump {jump} at t={} exceeds {allowed}",
                    w[1].t
                ));
            }
        }
    }

    report(5, "norm-continuity-scan", failures);
}

#[test]
fn acceptance_06_intertwining_identity() {
    let mut failures = Vec::new();
    let (sp, potential) = plane_skew(3);
    let base = sp.base().clone();
    let path = CocycleHomotopy::exponential(
        Cocycle2::trivial(base.clone()),
        Arc::new(RealCocycle2::rotation(base, Rat::new(1, 3)).unwrap()),
    )
    .unwrap();
    let pulled = sp.pullback_homotopy(&path).unwrap();

    for t in tenths() {
        let c_t = homotopy_eval(&pulled, t).unwrap();
        for h in 0..3i64 {
            let rep = verify_intertwining(&c_t, &potential, h).unwrap();
            if !rep.passed() {
                failures.push(format!(
                    "t={t} level {h}: {}",
                    rep.violations.join("; ")
                ));
            }
        }
    }

    // Perturbing a single conjugation phase must break the identity; the
    // honest diagonal passes against the same connecting maps.
    let c_1 = homotopy_eval(&pulled, Rat::one()).unwrap();
    let (lo, hi) = (iv(&[1, 1]), iv(&[2, 2]));
    let twisted = connecting_map(&c_1, &potential, &lo, &hi).unwrap();
    let plain = connecting_map(&Cocycle2::trivial(sp.graph().clone()), &potential, &lo, &hi).unwrap();
    let rhs = plain.then(&ad_u(&c_1, &potential, &hi).unwrap()).unwrap();
    let a = Arc::new(LevelAlgebra::new(sp.graph().clone(), &potential, lo.clone()).unwrap());
    let honest: Vec<CircleValue> = (0..a.label_counts()[0] as u32)
        .map(|i| kappa(&c_1, a.label(0, i)).unwrap())
        .collect();
    let mut bad = honest.clone();
    bad[1] = bad[1].mul(CircleValue::from_angle(Rat::new(1, 7)));
    let action = a
        .units()
        .map(|(b, i, j)| {
            let phase = bad[i as usize].mul(bad[j as usize].conj());
            ((b, i, j), vec![((b, i, j), Coef::from_phase(phase))])
        })
        .collect();
    let bad_lo = PhaseMatrixUnitMap::new(a.clone(), a, action);
    if bad_lo
        .then(&twisted)
        .unwrap()
        .first_difference(&rhs, FLOAT_TOL)
        .is_none()
    {
        failures.push("perturbed conjugation phase went undetected".into());
    }
    if ad_u(&c_1, &potential, &lo)
        .unwrap()
        .then(&twisted)
        .unwrap()
        .first_difference(&rhs, FLOAT_TOL)
        .is_some()
    {
        failures.push("honest conjugation phases failed against the same maps".into());
    }

    report(6, "intertwining-identity", failures);
}

#[test]
fn acceptance_07_k0_homotopy_invariance() {
    let mut failures = Vec::new();
    let grid = tenths();

    // Plane fixture: exponential path from the trivial cocycle to the
    // pulled-back rotation.
    let (sp_a, pot_a) = plane_skew(3);
    let base_a = sp_a.base().clone();
    let path_a = CocycleHomotopy::exponential(
        Cocycle2::trivial(base_a.clone()),
        Arc::new(RealCocycle2::rotation(base_a, Rat::new(1, 3)).unwrap()),
    )
    .unwrap();
    let pulled_a = sp_a.pullback_homotopy(&path_a).unwrap();
    let report_a = homotopy_invariance_report(&pot_a, 3, &pulled_a, &grid).unwrap();
    if !report_a.passed() {
        failures.push(format!(
            "plane fixture: {}",
            report_a.intertwining_violations.join("; ")
        ));
    }
    if !report_a.k0.torsion.is_empty() || report_a.k0.free_rank != 1 {
        failures.push(format!(
            "plane fixture: invariant factors are not a single copy of Z: torsion {:?}, free rank {}",
            report_a.k0.torsion, report_a.k0.free_rank
        ));
    }
    if !report_a.k0.classes.iter().all(|(_, _, c)| c == &vec![1i128]) {
        failures.push(format!(
            "plane fixture: vertex classes moved: {:?}",
            report_a.k0.classes
        ));
    }
    let origin_a = report_a.k0.classes.iter().find(|(_, h, _)| *h == 0);
    if origin_a.map(|(_, _, c)| c.as_slice()) != Some(&[1i128][..]) {
        failures.push(format!("plane fixture: origin class is {origin_a:?}, expected [1]"));
    }

    // Two-loop fixture: a sampled path of coboundary cocycles, one checked
    // coboundary per grid point with deterministic per-morphism rates.
    let (sp_b, pot_b) = loops_skew(3);
    let graph_b = sp_b.graph().clone();
    let non_identity: Vec<kgraphs::Morphism> = graph_b
        .all_morphisms()
        .into_iter()
        .filter(|m| !m.is_identity())
        .collect();
    let samples: Vec<(Rat, Cocycle2)> = grid
        .iter()
        .map(|&t| {
            let mut map = BTreeMap::new();
            for (idx, m) in non_identity.iter().enumerate() {
                let rate = Rat::new((idx % 8 + 1) as i64, 8);
                map.insert(m.clone(), CircleValue::from_angle(t * rate));
            }
            let b = MorphismPhase::Table { map: Arc::new(map) };
            (t, Cocycle2::coboundary(graph_b.clone(), b).unwrap())
        })
        .collect();
    let path_b = CocycleHomotopy::sampled(samples, Rat::one()).unwrap();
    let report_b = homotopy_invariance_report(&pot_b, 3, &path_b, &grid).unwrap();
    if !report_b.passed() {
        failures.push(format!(
            "two-loop fixture: {}",
            report_b.intertwining_violations.join("; ")
        ));
    }
    if !report_b.k0.torsion.is_empty() || report_b.k0.free_rank != 1 {
        failures.push(format!(
            "two-loop fixture: invariant factors are not a single copy of Z: torsion {:?}, free rank {}",
            report_b.k0.torsion, report_b.k0.free_rank
        ));
    }
    let ladder: Vec<i128> = report_b.k0.classes.iter().map(|(_, _, c)| c[0]).collect();
    if ladder != vec![8, 4, 2, 1] {
        failures.push(format!(
            "two-loop fixture: class ladder {ladder:?}, expected [8, 4, 2, 1]"
        ));
    }
    let origin_b = report_b.k0.classes.iter().find(|(_, h, _)| *h == 0);
    if origin_b.map(|(_, _, c)| c.as_slice()) != Some(&[8i128][..]) {
        failures.push(format!("two-loop fixture: origin class is {origin_b:?}, expected [8]"));
    }

    // Byte-identical invariance data across the grid: recompute the level
    // structure and K_0 at every t and compare serialized forms.
    for (label, sp, pot) in [("plane", &sp_a, &pot_a), ("two-loop", &sp_b, &pot_b)] {
        let baseline = {
            let d = bratteli(sp.graph(), pot, 3).unwrap();
            let k = k0_truncated(&d);
            format!("{d:?}|{k:?}").into_bytes()
        };
        for &t in &grid {
            let d = bratteli(sp.graph(), pot, 3).unwrap();
            let k = k0_truncated(&d);
            if format!("{d:?}|{k:?}").into_bytes() != baseline {
                failures.push(format!("{label} fixture: data at t={t} differ from t=0"));
            }
        }
    }

    report(7, "k0-homotopy-invariance", failures);
}

#[test]
fn acceptance_08_degree_obstruction() {
    let mut failures = Vec::new();

    // Every bundled skew product admits the normalized potential b(v,n) = n.
    let fixtures_list: Vec<(&str, SkewProduct)> = vec![
        ("plane", plane_skew(3).0),
        (
            "two-per-color",
            skew(
                Arc::new(fixtures::two_per_color((3, 3))),
                LatticeBox::new(iv(&[0, 0]), iv(&[3, 3])).unwrap(),
            )
            .unwrap(),
        ),
        ("two-loop", loops_skew(3).0),
    ];
    for (name, sp) in &fixtures_list {
        match solve_degree_coboundary(sp.graph()) {
            DegreeCoboundary::Potential(p) => {
                if !p.verify(sp.graph()) {
                    failures.push(format!("{name}: returned potential does not verify"));
                }
                for v in 0..sp.graph().skeleton().vertex_count() as u32 {
                    let (_, offset) = sp.vertex_info(v);
                    if &p.b[v as usize] != offset {
                        failures.push(format!(
                            "{name}: b at vertex {v} is {} instead of the window offset {}",
                            p.b[v as usize], offset
                        ));
                    }
                }
            }
            DegreeCoboundary::Obstruction(o) => {
                failures.push(format!("{name}: unexpected obstruction {o}"));
            }
        }
    }

    // The plane graph itself carries loops of nonzero degree, so the solver
    // must return a cycle witness whose signed degree sum is nonzero.
    let g = fixtures::n2((3, 3));
    match solve_degree_coboundary(&g) {
        DegreeCoboundary::Potential(_) => {
            failures.push("loop graph unexpectedly admits a degree potential".into());
        }
        DegreeCoboundary::Obstruction(o) => {
            if o.cycle.is_empty() || o.degree_sum.is_zero() {
                failures.push(format!("degenerate obstruction witness: {o}"));
            }
            // Recompute the witness sum from the edge degrees.
            let mut sum = iv(&[0, 0]);
            for (edge, dir) in &o.cycle {
                let d = match edge.as_str() {
                    "e" => iv(&[1, 0]),
                    "f" => iv(&[0, 1]),
                    other => {
                        failures.push(format!("witness uses unknown edge {other}"));
                        iv(&[0, 0])
                    }
                };
                sum = if *dir >= 0 { sum.add(&d) } else { sum.sub(&d) };
            }
            if sum != o.degree_sum {
                failures.push(format!(
                    "witness sum {sum} does not match reported degree sum {}",
                    o.degree_sum
                ));
            }
        }
    }

    report(8, "degree-obstruction", failures);
}

#[test]
fn acceptance_09_translation_phase_mismatch() {
    let mut failures = Vec::new();
    let (sp, potential) = plane_skew(3);
    let c = sp
        .pullback_cocycle(Arc::new(
            Cocycle2::rotation(sp.base().clone(), Rat::new(1, 3)).unwrap(),
        ))
        .unwrap();
    let trivial = Cocycle2::trivial(sp.graph().clone());

    // Follow the window translation by one step of the second generator:
    // conjugate first and then include, or include plainly and then
    // conjugate at the target level. The two routes must disagree.
    let (lo, hi) = (iv(&[1, 1]), iv(&[1, 2]));
    let conjugate_then_include = ad_u(&c, &potential, &lo)
        .unwrap()
        .then(&connecting_map(&c, &potential, &lo, &hi).unwrap())
        .unwrap();
    let include_then_conjugate = connecting_map(&trivial, &potential, &lo, &hi)
        .unwrap()
        .then(&ad_u(&c, &potential, &hi).unwrap())
        .unwrap();
    let Some(witness) = conjugate_then_include.first_difference(&include_then_conjugate, 0.0)
    else {
        failures.push("the conjugation phases commute with the translation step".into());
        report(9, "translation-phase-mismatch", failures);
        return;
    };
    if witness.is_empty() {
        failures.push("empty mismatch witness".into());
    }

    // Pin the phases on one matrix unit: the route through the twisted
    // inclusion keeps coefficient 1, the plain route picks up e(1/3).
    let a_lo = conjugate_then_include.from_algebra().clone();
    let labels = a_lo.label_counts()[0] as u32;
    let i_diag = (0..labels)
        .find(|&i| *a_lo.label(0, i).degree() == dv(&[1, 1]))
        .unwrap();
    let i_id = (0..labels).find(|&i| a_lo.label(0, i).is_identity()).unwrap();
    let u = (0u32, i_diag, i_id);
    let im_twisted = conjugate_then_include.apply(u);
    let im_plain = include_then_conjugate.apply(u);
    if im_twisted.len() != 1 || im_plain.len() != 1 || im_twisted[0].0 != im_plain[0].0 {
        failures.push(format!(
            "images of {} are not comparable single units",
            a_lo.unit_name(u)
        ));
    } else {
        if im_twisted[0].1 != Coef::one() {
            failures.push(format!(
                "twisted route coefficient {:?}, expected 1",
                im_twisted[0].1
            ));
        }
        let expected = Coef::from_phase(CircleValue::from_angle(Rat::new(1, 3)));
        if im_plain[0].1 != expected {
            failures.push(format!(
                "plain route coefficient {:?}, expected e(1/3)",
                im_plain[0].1
            ));
        }
        if im_twisted[0].1 == im_plain[0].1 {
            failures.push("routes agree on the pinned unit".into());
        }
    }

    // Root cause, stated directly on the conjugation phases: extending the
    // diagonal label by the second generator multiplies kappa by e(1/3),
    // while the twisted inclusion coefficient stays 1.
    let m_diag = a_lo.label(0, i_diag).clone();
    if !kappa(&c, &m_diag).unwrap().is_one() {
        failures.push("kappa at the diagonal label is not 1".into());
    }
    let a_hi = include_then_conjugate.to_algebra().clone();
    let tall = (0..a_hi.label_counts()[0] as u32)
        .find(|&i| *a_hi.label(0, i).degree() == dv(&[1, 2]))
        .unwrap();
    let k_tall = kappa(&c, a_hi.label(0, tall)).unwrap();
    if k_tall != CircleValue::from_angle(Rat::new(1, 3)) {
        failures.push(format!("kappa at the extended label is {k_tall}, expected e(1/3)"));
    }

    report(9, "translation-phase-mismatch", failures);
}
