//! Acceptance criteria 1-11. Prints one line per criterion and exits
//! nonzero if any fails. Thresholds are pinned below.

mod oracle;

use std::collections::{BTreeSet, HashMap};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sepcoset_lab::boundary_pairs::f4_split;
use sepcoset_lab::cber::{tail_equivalent, EvPeriodicSeq};
use sepcoset_lab::cli::verify::{entrance_groups, inclusion_violation, penetrated_cosets, second_entrance_groups};
use sepcoset_lab::group_model::{builtin_free_cyclic, builtin_free_product, CosetRef, GroupElement, GroupModel};
use sepcoset_lab::rays::{
    align_same_limit, concat_point, phi_prefix_element, pigeonhole_k, ray_sep_cosets, RayScheme,
};
use sepcoset_lab::relative_graph::{
    estimate_c, ConstantsReport, ExplorationBudget, Explorer, ExtNat, Fraction, NgonSpec, PathRec,
};
use sepcoset_lab::separating_cosets::{all_geodesics_penetrate, cosets, sep_cosets, triple_split};
use sepcoset_lab::y_graph::YGraph;

use oracle::{Kind, Region, UNREACHED};

const SEED: u64 = 7;
const RADIUS: usize = 8;
const PAIR_RADIUS: usize = 6;
const GEODESIC_CAP: usize = 4096;
const EXTRA_SOURCES: usize = 24;
const Y_SOURCES: usize = 4;
const POLYGONS: usize = 10_000;
const POLYGON_SIZES: [usize; 4] = [2, 3, 4, 5];
const POLYGON_VERTEX_RADIUS: usize = 3;
const TARGET_RADIUS_4: usize = 7;
const TRIPLE_RADIUS: usize = 5;
const RAY_SCHEME: &str = "period=[h:ab^3, x:a]";
const RAY_SCHEME_SHIFTED: &str = "base=a^-1 prefix=[x:a] period=[h:ab^3, x:a]";
const RAY_D: u64 = 5;
const RAY_DEPTHS: [usize; 8] = [2, 4, 6, 8, 10, 12, 14, 16];
const CONCAT_POINTS: usize = 50;
const CONCAT_RADIUS: usize = 5;
const PHI_STABLE_TARGETS: usize = 100;
const PHI_H_BUDGET: usize = 6;
const K_THRESHOLDS_FP: [u64; 5] = [1, 2, 4, 8, 16];
const K_FC_T: u64 = 8;
const K_FC_EXPECTED: u64 = 81;
const F4_MIN_TRIPLES: usize = 200;
const F4_ELEMENT_TRIPLES: usize = 150;
const F4_WINDOW: usize = 6;
const F4_MAX_REST: usize = 4;
const TAIL_PAIRS: usize = 10_000;
const TAIL_TRIPLES: usize = 1_000;

struct Outcome {
    pass: bool,
    summary: String,
}

type Check = std::result::Result<Outcome, String>;

fn outcome(pass: bool, summary: String) -> Check {
    Ok(Outcome { pass, summary })
}

fn lib<T>(r: sepcoset_lab::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

/// One model with the oracle region and its library counterpart.
struct Setup {
    kind: Kind,
    name: &'static str,
    model: Arc<GroupModel>,
    region: Region,
    gaps: Vec<Option<u32>>,
    lib_of: Vec<GroupElement>,
    id_of: HashMap<GroupElement, u32>,
    ball: Arc<Explorer>,
}

impl Setup {
    fn new(kind: Kind) -> Setup {
        let (name, model) = match kind {
            Kind::FreeCyclic => ("free_cyclic", builtin_free_cyclic()),
            Kind::FreeProduct => ("free_product", builtin_free_product()),
        };
        let model = Arc::new(model);
        let region = Region::ball(kind, RADIUS, RADIUS);
        let gaps = oracle::gap_table(&region);
        let lib_of: Vec<GroupElement> = region
            .verts
            .iter()
            .map(|w| model.parse_element(&oracle::to_text(kind, w)).expect("oracle words parse"))
            .collect();
        let id_of = lib_of.iter().enumerate().map(|(i, g)| (g.clone(), i as u32)).collect();
        let ball = Arc::new(Explorer::new(model.clone(), ExplorationBudget::ball(RADIUS, RADIUS)));
        Setup {
            kind,
            name,
            model,
            region,
            gaps,
            lib_of,
            id_of,
            ball,
        }
    }

    fn ids(&self, r: usize) -> Vec<u32> {
        oracle::ball(self.kind, r).iter().map(|w| self.region.id(w)).collect()
    }

    fn vertex_ids(&self, p: &PathRec) -> Option<Vec<u32>> {
        p.vertices(&self.model).iter().map(|v| self.id_of.get(v).copied()).collect()
    }

    /// `d̂` between two points of one coset, from the oracle's admissible search.
    fn oracle_gap(&self, family: u8, u: &GroupElement, v: &GroupElement) -> Option<u32> {
        let (Some(&a), Some(&b)) = (self.id_of.get(u), self.id_of.get(v)) else {
            return None;
        };
        let k = self.kind;
        let q = oracle::mul(k, &oracle::inv(k, &self.region.verts[a as usize]), &self.region.verts[b as usize]);
        if q.is_empty() {
            return Some(0);
        }
        self.region
            .labels
            .iter()
            .position(|l| l.h.map(|h| h.0) == Some(family) && l.elem == q)
            .and_then(|i| self.gaps[i])
    }
}

fn ext(d: u32) -> ExtNat {
    if d == UNREACHED {
        ExtNat::InfinityAtBudget
    } else {
        ExtNat::Finite(d as u64)
    }
}

// Criterion 1 and the first half of criterion 7 share one scan over targets.
struct PairScan {
    pairs: usize,
    distance_bad: Vec<String>,
    geodesic_bad: Vec<String>,
    geodesic_sets: usize,
    y_pairs: usize,
    y_bad: Vec<String>,
    lexmin_bad: Vec<String>,
    lexmin_targets: usize,
}

fn pair_scan(s: &Setup, d: u64, in_y: &[bool]) -> std::result::Result<PairScan, String> {
    let r = &s.region;
    let e = &*s.ball;
    let yg = lib(YGraph::new(s.ball.clone(), d))?;
    let targets = s.ids(PAIR_RADIUS);
    let mut pick = rng(1);
    let one = r.id(&[]);
    let mut sources = vec![one];
    while sources.len() < 1 + EXTRA_SOURCES {
        let f = targets[pick.gen_range(0..targets.len())];
        if !sources.contains(&f) {
            sources.push(f);
        }
    }
    let from: Vec<Vec<u32>> = sources.iter().map(|&f| r.dist_from(f)).collect();
    let y_from: Vec<Vec<u32>> = sources[..Y_SOURCES]
        .iter()
        .map(|&f| oracle::y_distances(r, in_y, f))
        .collect();
    let mut scan = PairScan {
        pairs: 0,
        distance_bad: Vec::new(),
        geodesic_bad: Vec::new(),
        geodesic_sets: 0,
        y_pairs: 0,
        y_bad: Vec::new(),
        lexmin_bad: Vec::new(),
        lexmin_targets: 0,
    };
    let fmt = |i: u32| oracle::to_text(s.kind, &r.verts[i as usize]);
    for &t in &targets {
        let to_t = r.dist_from(t);
        let g = &s.lib_of[t as usize];
        for (si, &f) in sources.iter().enumerate() {
            scan.pairs += 1;
            let fe = &s.lib_of[f as usize];
            if lib(e.rel_distance_at(fe, g))? != ext(from[si][t as usize]) {
                scan.distance_bad.push(format!("({}, {})", fmt(f), fmt(t)));
            }
            let want = r.geodesics(f, t, &to_t, GEODESIC_CAP);
            let got = lib(e.all_geodesics(fe, g))?;
            scan.geodesic_sets += 1;
            let same = match want {
                None => got.overflow,
                Some(mut paths) => {
                    !got.overflow && {
                        paths.sort();
                        let b: Option<Vec<Vec<u32>>> = got.paths.iter().map(|p| s.vertex_ids(p)).collect();
                        b.map(|mut b| {
                            b.sort();
                            b
                        }) == Some(paths)
                    }
                }
            };
            if !same {
                scan.geodesic_bad.push(format!("({}, {})", fmt(f), fmt(t)));
            }
            if si < Y_SOURCES {
                scan.y_pairs += 1;
                if lib(yg.y_distance(fe, g))? != ext(y_from[si][t as usize]) {
                    scan.y_bad.push(format!("({}, {})", fmt(f), fmt(t)));
                }
            }
        }
        scan.lexmin_targets += 1;
        let phi = lib(phi_prefix_element(e, g))?;
        let verts = s.vertex_ids(&PathRec::new(GroupElement::identity(), phi.labels));
        if verts != Some(r.lex_min(one, t, &to_t)) {
            scan.lexmin_bad.push(fmt(t));
        }
    }
    Ok(scan)
}

fn first(v: &[String]) -> String {
    v.first().cloned().unwrap_or_default()
}

fn criterion_1(scans: &[(&Setup, u64, &PairScan)]) -> Check {
    let mut pass = true;
    let mut parts = Vec::new();
    for (s, d, sc) in scans {
        let bad = sc.distance_bad.len() + sc.geodesic_bad.len() + sc.y_bad.len();
        pass &= bad == 0;
        parts.push(format!(
            "{} D={d}: {} distance pairs, {} geodesic sets, {} y pairs, {bad} discrepancies{}",
            s.name,
            sc.pairs,
            sc.geodesic_sets,
            sc.y_pairs,
            if bad > 0 {
                format!(
                    " (distance {}, geodesics {}, y {})",
                    first(&sc.distance_bad),
                    first(&sc.geodesic_bad),
                    first(&sc.y_bad)
                )
            } else {
                String::new()
            }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_2(s: &Setup, d: u64, counts: &[usize], in_y: &[bool]) -> std::result::Result<(bool, String), String> {
    let yg = lib(YGraph::new(s.ball.clone(), d))?;
    let one = GroupElement::identity();
    let y_one = oracle::y_distances(&s.region, in_y, s.region.id(&[]));
    let (mut stable, mut skipped, mut failed, mut mismatch) = (0usize, 0usize, 0usize, 0usize);
    let mut witness = String::new();
    for t in s.ids(RADIUS) {
        let g = &s.lib_of[t as usize];
        let q = match yg.qi_gap(&one, g) {
            Ok(q) => q,
            Err(err) if err.is_partiality() => {
                skipped += 1;
                continue;
            }
            Err(err) => return Err(err.to_string()),
        };
        if q.sep_count != counts[t as usize] || q.d_y != ext(y_one[t as usize]) {
            mismatch += 1;
            if witness.is_empty() {
                witness = format!("oracle mismatch at {}", s.model.format_element(g));
            }
        }
        if !q.stable {
            skipped += 1;
            continue;
        }
        stable += 1;
        if !(q.lower_ok && q.upper_ok) {
            failed += 1;
            if witness.is_empty() {
                witness = format!("violation at {}", s.model.format_element(g));
            }
        }
    }
    let pass = failed == 0 && mismatch == 0 && stable > 0;
    Ok((
        pass,
        format!(
            "{} D={d}: {stable} stable pairs, {skipped} unstable, {failed} violations, {mismatch} oracle mismatches{}",
            s.name,
            if witness.is_empty() { String::new() } else { format!(" ({witness})") }
        ),
    ))
}

fn criterion_3(s: &Setup) -> std::result::Result<(bool, String, Fraction), String> {
    let spec = NgonSpec {
        sizes: POLYGON_SIZES.to_vec(),
        count: POLYGONS,
        vertex_radius: POLYGON_VERTEX_RADIUS,
        seed: SEED,
    };
    let est = lib(estimate_c(&s.ball, &spec))?;
    let mut pass = est.samples >= POLYGONS && est.violations == 0;
    let mut extra = String::new();
    if s.kind == Kind::FreeProduct {
        pass &= est.isolated_distinct == 0 && est.c_hat == Fraction::ZERO;
    }
    // The worst component's gap, recomputed by the oracle.
    if let Some(w) = &est.worst {
        let a = lib(s.model.parse_element(&w.entrance))?;
        let b = lib(s.model.parse_element(&w.exit))?;
        let family = (0..s.model.num_families() as u8)
            .find(|&f| s.model.subgroup_membership(&s.model.left_quotient(&a, &b), f).is_some());
        let og = family.and_then(|f| s.oracle_gap(f, &a, &b));
        let agree = og.map(|v| v as u64) == Some(w.gap);
        pass &= agree;
        extra = format!(", worst gap {} (oracle {:?})", w.gap, og);
    }
    Ok((
        pass,
        format!(
            "{}: C={} from {} polygons, {} violations, {} isolated components with distinct endpoints{extra}",
            s.name, est.c_hat, est.samples, est.violations, est.isolated_distinct
        ),
        est.c_hat,
    ))
}

fn spread_violations<'a>(
    s: &Setup,
    groups: impl Iterator<Item = (&'a CosetRef, &'a BTreeSet<GroupElement>)>,
    c: Fraction,
    k: u64,
    pairs: &mut usize,
    mismatch: &mut usize,
) -> Vec<String> {
    let mut bad = Vec::new();
    for (coset, pts) in groups {
        let pts: Vec<&GroupElement> = pts.iter().collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                *pairs += 1;
                let v = s.ball.relative_metric(coset.family, pts[i], pts[j]);
                if let Some(o) = s.oracle_gap(coset.family, pts[i], pts[j]) {
                    if v != ExtNat::Finite(o as u64) {
                        *mismatch += 1;
                    }
                }
                let ok = matches!(v, ExtNat::Finite(v) if c.bounds(v, k));
                if !ok {
                    bad.push(format!(
                        "{} vs {} gap {v}",
                        s.model.format_element(pts[i]),
                        s.model.format_element(pts[j])
                    ));
                }
            }
        }
    }
    bad
}

fn criterion_4(s: &Setup, c: Fraction) -> std::result::Result<(bool, String), String> {
    let one = GroupElement::identity();
    let mut paths = Vec::new();
    let mut overflow = 0;
    for t in s.ids(TARGET_RADIUS_4) {
        let list = lib(s.ball.all_geodesics(&one, &s.lib_of[t as usize]))?;
        if list.overflow {
            overflow += 1;
            continue;
        }
        paths.extend(list.paths);
    }
    let m = &*s.model;
    let (mut pairs3, mut pairs4, mut mismatch) = (0, 0, 0);
    let g3 = entrance_groups(m, &paths);
    let bad3 = spread_violations(s, g3.iter(), c, 3, &mut pairs3, &mut mismatch);
    let g4 = second_entrance_groups(m, &paths);
    let bad4 = spread_violations(s, g4.iter().map(|((_, c1), v)| (c1, v)), c, 4, &mut pairs4, &mut mismatch);
    let pass = bad3.is_empty() && bad4.is_empty() && mismatch == 0 && overflow == 0;
    Ok((
        pass,
        format!(
            "{} C={c}: {} geodesics, 3C on {pairs3} entrance pairs ({} over), 4C on {pairs4} ({} over), {mismatch} oracle mismatches, {overflow} capped targets{}",
            s.name,
            paths.len(),
            bad3.len(),
            bad4.len(),
            bad3.first().or(bad4.first()).map(|w| format!(" ({w})")).unwrap_or_default()
        ),
    ))
}

fn criterion_5(s: &Setup, d: u64) -> std::result::Result<(bool, String), String> {
    let e = &*s.ball;
    let r = &s.region;
    let one = GroupElement::identity();
    let one_id = r.id(&[]);
    let from_one = r.dist_from(one_id);
    let ids = s.ids(TRIPLE_RADIUS);
    let mut s_lists = Vec::new();
    let mut pen = Vec::new();
    let mut dags = Vec::new();
    let (mut s_mismatch, mut order_bad, mut nonempty) = (0usize, 0usize, 0usize);
    for &t in &ids {
        let g = &s.lib_of[t as usize];
        let recs = lib(sep_cosets(e, &one, g, d))?;
        let want = oracle::sep_cosets(r, &s.gaps, &from_one, &r.dist_from(t), one_id, d);
        let agree = recs.len() == want.len()
            && recs.iter().zip(&want).all(|(a, b)| {
                a.coset.family == b.family
                    && a.distance == b.distance as u64
                    && s.model.coset_contains(&a.coset, &s.lib_of[b.entrance as usize])
            });
        if !agree {
            s_mismatch += 1;
        }
        let list = cosets(&recs);
        if !list.is_empty() {
            nonempty += 1;
        }
        let geos = lib(e.all_geodesics(&one, g))?;
        if geos.overflow
            || !geos.paths.iter().all(|p| {
                let seen: Vec<CosetRef> =
                    p.components(&s.model).into_iter().map(|c| c.coset).filter(|c| list.contains(c)).collect();
                seen == list
            })
        {
            order_bad += 1;
        }
        let dag = lib(e.geodesic_dag(&one, g))?;
        pen.push(penetrated_cosets(e, &dag));
        dags.push(dag);
        s_lists.push(list);
    }
    // Two segments: every coset of S(1, g) is penetrated by all geodesics of
    // one of 1 -> m and m -> g.
    let (mut two_inst, mut two_bad) = (0usize, Vec::new());
    for (mi, &m) in ids.iter().enumerate() {
        let me = &s.lib_of[m as usize];
        for (gi, &t) in ids.iter().enumerate() {
            two_inst += 1;
            if s_lists[gi].is_empty() {
                continue;
            }
            let second = lib(e.geodesic_dag(me, &s.lib_of[t as usize]))?;
            for c in &s_lists[gi] {
                if !all_geodesics_penetrate(e, &dags[mi], c) && !all_geodesics_penetrate(e, &second, c) {
                    two_bad.push(format!("m={} g={}", s.model.format_element(me), s.model.format_element(&s.lib_of[t as usize])));
                    break;
                }
            }
        }
    }
    let mut incl_bad = Vec::new();
    for xi in 0..ids.len() {
        for yi in 0..ids.len() {
            if inclusion_violation(&s_lists[xi], &s_lists[yi], &pen[yi]).is_some() {
                incl_bad.push(format!(
                    "x={} y={}",
                    s.model.format_element(&s.lib_of[ids[xi] as usize]),
                    s.model.format_element(&s.lib_of[ids[yi] as usize])
                ));
            }
        }
    }
    let pass = s_mismatch == 0 && order_bad == 0 && two_bad.is_empty() && incl_bad.is_empty();
    Ok((
        pass,
        format!(
            "{} D={d}: {} targets ({nonempty} with S nonempty, {s_mismatch} oracle mismatches), order {order_bad} bad, two-segment {} bad of {two_inst}, inclusion {} bad of {}{}",
            s.name,
            ids.len(),
            two_bad.len(),
            incl_bad.len(),
            ids.len() * ids.len(),
            two_bad.first().or(incl_bad.first()).map(|w| format!(" ({w})")).unwrap_or_default()
        ),
    ))
}

/// Points along free-cyclic rays, where S is nonempty at small D.
fn criterion_5_rays(s: &Setup, d: u64) -> std::result::Result<(bool, String), String> {
    let m = &*s.model;
    let tube = Explorer::new(s.model.clone(), ExplorationBudget::tube(3, 2 * (d as usize / 2 + 1) + 2));
    let one = GroupElement::identity();
    let k = d / 2 + 1;
    let schemes = [
        format!("period=[h:ab^{k}, x:a]"),
        format!("period=[x:a^-1, h:ab^-{k}]"),
        format!("period=[x:b^-1, h:ab^-{k}]"),
    ];
    let near = m.ball_elements(2);
    let (mut inst, mut bad, mut skipped) = (0usize, Vec::new(), 0usize);
    for src in &schemes {
        let sch = lib(RayScheme::parse(m, src))?;
        let depth = 2 * sch.period_len() + 1;
        let x = sch.vertex(m, depth);
        let sx = cosets(&lib(sep_cosets(&tube, &one, &x, d))?);
        for j in 0..=depth {
            let v = sch.vertex(m, j);
            for u in &near {
                let y = m.mul(&v, u);
                let run = || -> sepcoset_lab::Result<bool> {
                    let sy = cosets(&sep_cosets(&tube, &one, &y, d)?);
                    let pen = penetrated_cosets(&tube, &tube.geodesic_dag(&one, &y)?);
                    if inclusion_violation(&sx, &sy, &pen).is_some() {
                        return Ok(false);
                    }
                    let a = tube.geodesic_dag(&one, &y)?;
                    let b = tube.geodesic_dag(&y, &x)?;
                    Ok(sx
                        .iter()
                        .all(|c| all_geodesics_penetrate(&tube, &a, c) || all_geodesics_penetrate(&tube, &b, c)))
                };
                match run() {
                    Ok(true) => inst += 1,
                    Ok(false) => {
                        inst += 1;
                        bad.push(format!("x={} y={}", m.format_element(&x), m.format_element(&y)));
                    }
                    Err(e) if e.is_partiality() => skipped += 1,
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
    }
    Ok((
        bad.is_empty() && inst > 0,
        format!(
            "free_cyclic rays D={d}: {inst} (x, y) pairs, {} bad, {skipped} skipped{}",
            bad.len(),
            bad.first().map(|w| format!(" ({w})")).unwrap_or_default()
        ),
    ))
}

fn criterion_6(fc: &Setup, c: Fraction) -> Check {
    let m = &*fc.model;
    let tube = Explorer::new(fc.model.clone(), ExplorationBudget::tube(3, 8));
    let s1 = lib(RayScheme::parse(m, RAY_SCHEME))?;
    let s2 = lib(RayScheme::parse(m, RAY_SCHEME_SHIFTED))?;
    let mut counts = Vec::new();
    for &n in &RAY_DEPTHS {
        counts.push(lib(ray_sep_cosets(&tube, &s1, n, RAY_D))?.len());
    }
    // One new coset per period: depth n has n/2 cosets.
    let expected: Vec<usize> = RAY_DEPTHS.iter().map(|n| n / s1.period_len()).collect();
    let grows = counts == expected;
    let depth = *RAY_DEPTHS.last().unwrap();
    let aligned = lib(align_same_limit(&tube, &s1, &s2, RAY_D, depth))?;
    let max_gap = aligned
        .iter()
        .flat_map(|a| [a.entrance_gap, a.exit_gap])
        .map(|g| g.finite())
        .try_fold(0u64, |acc, v| v.map(|v| acc.max(v)));
    let gaps_ok = max_gap.is_some_and(|g| c.bounds(g, 4));
    let pool = m.ball_elements(CONCAT_RADIUS);
    let mut pick = rng(6);
    let mut settled = 0;
    let mut worst_k = 0;
    for _ in 0..CONCAT_POINTS {
        let x = &pool[pick.gen_range(0..pool.len())];
        if let Ok(cp) = concat_point(&tube, x, &s1) {
            settled += 1;
            worst_k = worst_k.max(cp.k);
        }
    }
    outcome(
        grows && gaps_ok && settled == CONCAT_POINTS,
        format!(
            "counts {counts:?} over depths 2-16 (expected {expected:?}); {} aligned cosets, max gap {} vs 4C={}; concat_point settled on {settled}/{CONCAT_POINTS} points (largest join depth {worst_k}, window {})",
            aligned.len(),
            max_gap.map(|g| g.to_string()).unwrap_or("unbounded".into()),
            c.ceil_times(4),
            2 * s1.period_len()
        ),
    )
}

fn criterion_7_stable(s: &Setup) -> std::result::Result<(bool, String), String> {
    let small = Explorer::new(s.model.clone(), ExplorationBudget::ball(PAIR_RADIUS, PHI_H_BUDGET));
    let big = Explorer::new(s.model.clone(), ExplorationBudget::ball(PAIR_RADIUS + 2, PHI_H_BUDGET));
    let pool = s.model.ball_elements(PAIR_RADIUS);
    let mut pick = rng(7);
    let mut changed = Vec::new();
    for _ in 0..PHI_STABLE_TARGETS {
        let g = &pool[pick.gen_range(0..pool.len())];
        let a = lib(phi_prefix_element(&small, g))?;
        let b = lib(phi_prefix_element(&big, g))?;
        if a.certified() != b.certified() {
            changed.push(s.model.format_element(g));
        }
    }
    Ok((
        changed.is_empty(),
        format!(
            "{}: {} of {PHI_STABLE_TARGETS} prefixes changed from R={PAIR_RADIUS} to R={}{}",
            s.name,
            changed.len(),
            PAIR_RADIUS + 2,
            changed.first().map(|w| format!(" ({w})")).unwrap_or_default()
        ),
    ))
}

fn criterion_8(fp: &Setup, fc: &Setup) -> Check {
    let mut fp_ks = Vec::new();
    for t in K_THRESHOLDS_FP {
        fp_ks.push(lib(pigeonhole_k(&fp.ball, t))?.k);
    }
    let fc_k = lib(pigeonhole_k(&fc.ball, K_FC_T))?.k;
    // Oracle: subgroup elements within d̂ ≤ t, plus the identity, squared.
    let within = fc
        .region
        .labels
        .iter()
        .zip(&fc.gaps)
        .filter(|(l, g)| l.h.is_some() && g.is_some_and(|g| g as u64 <= K_FC_T))
        .count() as u64;
    let oracle_k = (within + 1) * (within + 1);
    outcome(
        fp_ks.iter().all(|&k| k == 1) && fc_k == oracle_k && oracle_k == K_FC_EXPECTED,
        format!(
            "free_product K={fp_ks:?} at t={K_THRESHOLDS_FP:?}; free_cyclic K({K_FC_T})={fc_k}, oracle {oracle_k}"
        ),
    )
}

fn criterion_9(s: &Setup, c: Fraction) -> std::result::Result<(bool, String), String> {
    let m = &*s.model;
    let d = c.ceil_times(11).max(1);
    let pool = m.ball_elements(PAIR_RADIUS);
    let mut pick = rng(9);
    let (mut triples, mut worst, mut bad, mut skipped, mut nonempty) = (0usize, 0usize, Vec::new(), 0usize, 0usize);
    for _ in 0..F4_ELEMENT_TRIPLES {
        let [f, g, z] = [0; 3].map(|_| pool[pick.gen_range(0..pool.len())].clone());
        match triple_split(&s.ball, &f, &g, &z, d, Some(c)) {
            Ok(split) => {
                triples += 1;
                let all = split.first.len() + split.second.len() + split.rest.len();
                nonempty += (all > 0) as usize;
                worst = worst.max(split.rest.len());
                if split.rest.len() > F4_MAX_REST {
                    bad.push(format!("f={} g={} z={}", m.format_element(&f), m.format_element(&g), m.format_element(&z)));
                }
            }
            Err(e) if e.is_partiality() => skipped += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    let (sources, tube): (Vec<String>, Explorer) = match s.kind {
        Kind::FreeProduct => (
            ["period=[a, b]", "period=[b, a]", "period=[a^2, b^3]", "period=[b^2, a]", "base=a prefix=[b] period=[a, b^2]", "period=[a^2, b]"]
                .map(String::from)
                .to_vec(),
            Explorer::new(s.model.clone(), ExplorationBudget::tube(3, 3)),
        ),
        Kind::FreeCyclic => {
            let k = d / 2 + 1;
            (
                vec![
                    format!("period=[h:ab^{k}, x:a]"),
                    format!("period=[x:a^-1, h:ab^-{k}]"),
                    format!("period=[x:b^-1, h:ab^-{k}]"),
                    format!("period=[h:ab^{k}, x:b]"),
                    format!("period=[x:a, h:ab^{k}]"),
                ],
                Explorer::new(s.model.clone(), ExplorationBudget::tube(3, 2 * k as usize + 2)),
            )
        }
    };
    let schemes: Vec<RayScheme> = sources.iter().map(|src| RayScheme::parse(m, src)).collect::<sepcoset_lab::Result<_>>().map_err(|e| e.to_string())?;
    let mut scheme_triples = 0;
    for (i, xi) in schemes.iter().enumerate() {
        for (j, eta) in schemes.iter().enumerate() {
            for (k, zeta) in schemes.iter().enumerate() {
                if i == j || j == k || i == k {
                    continue;
                }
                match f4_split(&tube, xi, eta, zeta, F4_WINDOW, d, Some(c)) {
                    Ok(split) => {
                        triples += 1;
                        scheme_triples += 1;
                        let all = split.first.len() + split.second.len() + split.rest.len();
                        nonempty += (all > 0) as usize;
                        worst = worst.max(split.rest.len());
                        if split.rest.len() > F4_MAX_REST {
                            bad.push(format!("{} | {} | {}", xi.describe(m), eta.describe(m), zeta.describe(m)));
                        }
                    }
                    Err(e) if e.is_partiality() => skipped += 1,
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
    }
    Ok((
        bad.is_empty() && triples >= F4_MIN_TRIPLES,
        format!(
            "{} D={d}: {triples} triples ({scheme_triples} scheme triples at window {F4_WINDOW}, {nonempty} with S nonempty), largest |F| {worst}, {} over {F4_MAX_REST}, {skipped} skipped{}",
            s.name,
            bad.len(),
            bad.first().map(|w| format!(" ({w})")).unwrap_or_default()
        ),
    ))
}

fn random_seq(r: &mut ChaCha8Rng) -> EvPeriodicSeq {
    let pre = (0..r.gen_range(0..5)).map(|_| r.gen_range(0..3)).collect();
    let per = (0..r.gen_range(1..4)).map(|_| r.gen_range(0..3)).collect();
    EvPeriodicSeq::new(pre, per).expect("nonempty period")
}

/// A sequence sharing a tail with `a` half of the time.
fn related_seq(r: &mut ChaCha8Rng, a: &EvPeriodicSeq) -> EvPeriodicSeq {
    if r.gen_bool(0.5) {
        return random_seq(r);
    }
    let skip = r.gen_range(0..a.preperiod().len() + a.period().len() + 1);
    let p = a.period().len();
    let start = skip.max(a.preperiod().len());
    let mut pre: Vec<u64> = (0..r.gen_range(0..4)).map(|_| r.gen_range(0..3)).collect();
    pre.extend((skip..start).map(|i| a.at(i)));
    let per = (start..start + p).map(|i| a.at(i)).collect();
    EvPeriodicSeq::new(pre, per).expect("nonempty period")
}

fn parts(a: &EvPeriodicSeq) -> (Vec<u64>, Vec<u64>) {
    (a.preperiod().to_vec(), a.period().to_vec())
}

fn criterion_10() -> Check {
    let mut r = rng(10);
    let (mut agree, mut equivalent, mut witness_bad) = (0usize, 0usize, 0usize);
    for _ in 0..TAIL_PAIRS {
        let a = random_seq(&mut r);
        let b = related_seq(&mut r, &a);
        let got = tail_equivalent(&a, &b);
        let want = oracle::tails_meet(&parts(&a), &parts(&b));
        if got.is_some() == want {
            agree += 1;
        }
        if let Some((n, m)) = got {
            equivalent += 1;
            if a.shift(n) != b.shift(m) {
                witness_bad += 1;
            }
        }
    }
    let mut laws_bad = 0;
    for _ in 0..TAIL_TRIPLES {
        let a = random_seq(&mut r);
        let b = related_seq(&mut r, &a);
        let c = related_seq(&mut r, &b);
        let te = |x: &EvPeriodicSeq, y: &EvPeriodicSeq| tail_equivalent(x, y).is_some();
        let ok = te(&a, &a)
            && te(&a, &b) == te(&b, &a)
            && te(&b, &c) == te(&c, &b)
            && (!(te(&a, &b) && te(&b, &c)) || te(&a, &c));
        if !ok {
            laws_bad += 1;
        }
    }
    outcome(
        agree == TAIL_PAIRS && witness_bad == 0 && laws_bad == 0,
        format!(
            "{agree}/{TAIL_PAIRS} pairs agree with brute force ({equivalent} equivalent, {witness_bad} bad witnesses); laws fail on {laws_bad}/{TAIL_TRIPLES} triples"
        ),
    )
}

fn criterion_11() -> Check {
    let bin = env!("CARGO_BIN_EXE_sepcoset");
    let configs: [(&str, &str); 2] = [("free_product", "1"), ("free_cyclic", "5")];
    let mut pass = true;
    let mut parts = Vec::new();
    for (model, d) in configs {
        let run = || {
            Command::new(bin)
                .args(["verify", "all", "--model", model, "--radius", "6", "--D", d, "--seed", "7"])
                .env_remove("SEPCOSET_CACHE_DIR")
                .output()
                .map_err(|e| e.to_string())
        };
        let a = run()?;
        let b = run()?;
        let same = a.stdout == b.stdout && !a.stdout.is_empty();
        pass &= same && a.status.success() && b.status.success();
        parts.push(format!(
            "{model} radius 6 D={d} seed 7: {} bytes, identical={same}, exit codes {:?}/{:?}",
            a.stdout.len(),
            a.status.code(),
            b.status.code()
        ));
    }
    outcome(pass, format!("two runs of `verify all` each; {}", parts.join("; ")))
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(u8, Check, f64)> = Vec::new();
    let mut timed = |n: u8, f: &mut dyn FnMut() -> Check| {
        let t = Instant::now();
        let r = f();
        results.push((n, r, t.elapsed().as_secs_f64()));
    };

    let fp = Setup::new(Kind::FreeProduct);
    let fc = Setup::new(Kind::FreeCyclic);

    // Oracle Y-sets and separating-coset counts over the whole ball.
    let fp_counts = oracle::sep_counts(&fp.region, &fp.gaps, 1);
    let fc5 = oracle::sep_counts(&fc.region, &fc.gaps, 5);
    let fc12 = oracle::sep_counts(&fc.region, &fc.gaps, 12);
    let y_of = |c: &[usize]| c.iter().map(|&n| n == 0).collect::<Vec<bool>>();

    let mut scans = Vec::new();
    timed(1, &mut || {
        let a = pair_scan(&fp, 1, &y_of(&fp_counts))?;
        let b = pair_scan(&fc, 5, &y_of(&fc5))?;
        scans.push(a);
        scans.push(b);
        criterion_1(&[(&fp, 1, &scans[0]), (&fc, 5, &scans[1])])
    });

    timed(2, &mut || {
        let mut pass = true;
        let mut parts = Vec::new();
        for (s, d, counts) in [(&fp, 1, &fp_counts), (&fc, 5, &fc5), (&fc, 12, &fc12)] {
            let (p, line) = criterion_2(s, d, counts, &y_of(counts))?;
            pass &= p;
            parts.push(line);
        }
        outcome(pass, parts.join("; "))
    });

    let mut c_hats = [Fraction::ZERO; 2];
    timed(3, &mut || {
        let (p1, l1, c1) = criterion_3(&fp)?;
        let (p2, l2, c2) = criterion_3(&fc)?;
        c_hats = [c1, c2];
        outcome(p1 && p2, format!("{l1}; {l2}"))
    });
    let [c_fp, c_fc] = c_hats;

    timed(4, &mut || {
        let (p1, l1) = criterion_4(&fp, c_fp)?;
        let (p2, l2) = criterion_4(&fc, c_fc)?;
        outcome(p1 && p2, format!("{l1}; {l2}"))
    });

    timed(5, &mut || {
        let d_fp = ConstantsReport::auto_d(c_fp);
        let d_fc = ConstantsReport::auto_d(c_fc);
        let (p1, l1) = criterion_5(&fp, d_fp)?;
        let (p2, l2) = criterion_5(&fc, d_fc)?;
        let (p3, l3) = criterion_5_rays(&fc, RAY_D)?;
        outcome(p1 && p2 && p3, format!("{l1}; {l2}; {l3}"))
    });

    timed(6, &mut || criterion_6(&fc, c_fc));

    timed(7, &mut || {
        let mut pass = true;
        let mut parts = Vec::new();
        for (s, sc) in [(&fp, scans.first()), (&fc, scans.get(1))] {
            let sc = sc.ok_or("criterion 1 did not complete")?;
            pass &= sc.lexmin_bad.is_empty();
            parts.push(format!(
                "{}: lex-min matches the oracle on {}/{} targets{}",
                s.name,
                sc.lexmin_targets - sc.lexmin_bad.len(),
                sc.lexmin_targets,
                sc.lexmin_bad.first().map(|w| format!(" (first miss {w})")).unwrap_or_default()
            ));
            let (p, l) = criterion_7_stable(s)?;
            pass &= p;
            parts.push(l);
        }
        outcome(pass, parts.join("; "))
    });

    timed(8, &mut || criterion_8(&fp, &fc));

    timed(9, &mut || {
        let (p1, l1) = criterion_9(&fp, c_fp)?;
        let (p2, l2) = criterion_9(&fc, c_fc)?;
        outcome(p1 && p2, format!("{l1}; {l2}"))
    });

    timed(10, &mut criterion_10);
    timed(11, &mut criterion_11);

    let mut failed = 0;
    for (n, r, secs) in &results {
        match r {
            Ok(o) => {
                let tag = if o.pass { "PASS" } else { "FAIL" };
                failed += !o.pass as usize;
                println!("criterion {n} {tag}: {} [{secs:.1}s]", o.summary);
            }
            Err(e) => {
                failed += 1;
                println!("criterion {n} FAIL: error: {e} [{secs:.1}s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
