//! Property suites behind `sepcoset verify`.
//!
//! Every property runs a deterministic set of instances drawn from the
//! configured ball. An instance that fails at the base budget is recomputed
//! at the widened budget; it only counts as a failure when the widened run
//! agrees. Instances that cannot be decided at either budget are skipped.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::boundary_pairs::{central_window, dichotomy_check, f4_split, pair_window};
use crate::cber::{tail_equivalent, EvPeriodicSeq};
use crate::error::{LabError, Result};
use crate::group_model::{CosetRef, GroupElement, GroupModel, Letter, Membership};
use crate::rays::{
    concat_point, phi_prefix_element, phi_prefix_scheme, phi_prefix_scheme_measured, ray_sep_cosets,
    ray_truncation, RayScheme,
};
use crate::relative_graph::{
    estimate_c, sample_points, visual_metric_chain, CEstimate, ExplorationBudget, ExtNat, Explorer,
    Fraction, GeoDag, NgonSpec, PathRec,
};
use crate::separating_cosets::{all_geodesics_penetrate, cosets, sep_cosets, triple_split};
use crate::y_graph::YGraph;

pub const SCHEMA: &str = "sepcoset-lab/1";

/// Inputs of a verification run.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub model: Arc<GroupModel>,
    pub model_label: String,
    pub d: u64,
    /// Ball budget; its radius bounds every sampled element.
    pub budget: ExplorationBudget,
    pub seed: u64,
    /// Instances per sampled property.
    pub samples: usize,
    /// Polygons used for the `Ĉ` estimate.
    pub polygons: usize,
    /// Overrides the estimate when set.
    pub c_hat: Option<Fraction>,
}

/// Shared state for one run: explorers, the Y-graph and the `Ĉ` estimate.
pub struct Ctx {
    pub cfg: VerifyConfig,
    pub ball: Arc<Explorer>,
    tube: OnceLock<Explorer>,
    y: OnceLock<Result<YGraph>>,
    c_est: OnceLock<Result<CEstimate>>,
}

impl Ctx {
    pub fn new(cfg: VerifyConfig) -> Ctx {
        let ball = Arc::new(Explorer::new(cfg.model.clone(), cfg.budget));
        Ctx::with_explorer(cfg, ball)
    }

    /// Uses an explorer whose ball graph may already be loaded.
    pub fn with_explorer(cfg: VerifyConfig, ball: Arc<Explorer>) -> Ctx {
        Ctx {
            cfg,
            ball,
            tube: OnceLock::new(),
            y: OnceLock::new(),
            c_est: OnceLock::new(),
        }
    }

    pub fn model(&self) -> &GroupModel {
        &self.cfg.model
    }

    pub fn radius(&self) -> usize {
        self.cfg.budget.x_radius
    }

    pub fn y(&self) -> Result<&YGraph> {
        self.y
            .get_or_init(|| YGraph::new(self.ball.clone(), self.cfg.d))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn c_estimate(&self) -> Result<&CEstimate> {
        self.c_est
            .get_or_init(|| {
                let spec = NgonSpec {
                    sizes: vec![2, 3, 4, 5],
                    count: self.cfg.polygons,
                    vertex_radius: (self.radius() / 2).max(1),
                    seed: self.cfg.seed,
                };
                estimate_c(&self.ball, &spec)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn c_hat(&self) -> Result<Fraction> {
        match self.cfg.c_hat {
            Some(c) => Ok(c),
            None => Ok(self.c_estimate()?.c_hat),
        }
    }

    /// Tube explorer for ray and window checks.
    pub fn tube(&self) -> &Explorer {
        self.tube.get_or_init(|| {
            let l = if self.model().is_free_product() {
                3
            } else {
                2 * self.power() + 2
            };
            Explorer::new(
                self.cfg.model.clone(),
                ExplorationBudget::tube(3, l).with_cap(self.cfg.budget.geodesic_cap),
            )
        })
    }

    /// The smallest `k` with `W^k` essential for `D`, since `d̂(1, W^k) = 2k`.
    pub fn power(&self) -> usize {
        (self.cfg.d / 2 + 1) as usize
    }

    /// Documented schemes: three directions branching at the base.
    pub fn schemes(&self) -> Result<Vec<RayScheme>> {
        let k = self.power();
        let src: Vec<String> = if self.model().is_free_product() {
            vec!["period=[a, b]".into(), "period=[b, a]".into(), "period=[a^2, b^3]".into()]
        } else {
            vec![
                format!("period=[h:ab^{k}, x:a]"),
                format!("period=[x:a^-1, h:ab^-{k}]"),
                format!("period=[x:b^-1, h:ab^-{k}]"),
            ]
        };
        src.iter().map(|s| RayScheme::parse(self.model(), s)).collect()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        r.set_stream(stream);
        r
    }

    /// At most `n` elements of `ball(r)`, in shortlex order.
    fn elems(&self, r: usize, n: usize, stream: u64) -> Vec<GroupElement> {
        let pool = self.model().ball_elements(r);
        if pool.len() <= n {
            return pool;
        }
        let mut idx = sample(&mut self.rng(stream), pool.len(), n).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| pool[i].clone()).collect()
    }

    fn fmt(&self, g: &GroupElement) -> String {
        self.model().format_element(g)
    }

    fn fmt_coset(&self, c: &CosetRef) -> String {
        format!("{}:{}", c.family, self.fmt(&c.rep))
    }
}

/// Instance bookkeeping for one property.
#[derive(Debug, Default)]
pub struct Tally {
    pub instances: u64,
    pub skipped: u64,
    pub failures: u64,
    pub witness: Option<Value>,
    pub note: Option<String>,
    pub inconclusive: bool,
}

impl Tally {
    fn fail(&mut self, w: Value) {
        self.instances += 1;
        self.failures += 1;
        if self.witness.is_none() {
            self.witness = Some(w);
        }
    }

    fn check(&mut self, ok: bool, w: impl FnOnce() -> Value) {
        if ok {
            self.instances += 1;
        } else {
            self.fail(w());
        }
    }

    /// Runs `f` at the base budget and, on failure, at the widened budget.
    fn confirm(
        &mut self,
        e: &Explorer,
        f: impl Fn(&Explorer) -> Result<bool>,
        w: impl FnOnce() -> Value,
    ) -> Result<()> {
        match f(e) {
            Ok(true) => {
                self.instances += 1;
                return Ok(());
            }
            Ok(false) => {}
            Err(err) if err.is_partiality() => {
                self.skipped += 1;
                return Ok(());
            }
            Err(err) => return Err(err),
        }
        match f(e.wider()) {
            Ok(false) => self.fail(w()),
            Ok(true) => self.skipped += 1,
            Err(err) if err.is_partiality() => self.skipped += 1,
            Err(err) => return Err(err),
        }
        Ok(())
    }

    fn not_applicable(note: String) -> Tally {
        Tally {
            note: Some(note),
            ..Tally::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub statement: &'static str,
    pub instances: u64,
    pub skipped: u64,
    pub failures: u64,
    pub status: Status,
    pub note: Option<String>,
    pub worst: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub model: String,
    pub model_label: String,
    pub d: u64,
    pub budget: ExplorationBudget,
    pub seed: u64,
    pub samples: usize,
    pub polygons: usize,
    pub c_hat: Option<Fraction>,
    pub selection: Vec<String>,
    pub properties: Vec<PropertyResult>,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

impl VerifyReport {
    /// 0 when everything passed, 1 on any failure, 3 when something was
    /// inconclusive.
    pub fn exit_code(&self) -> i32 {
        if self.failed > 0 {
            1
        } else if self.inconclusive > 0 {
            3
        } else {
            0
        }
    }
}

type Check = fn(&Ctx) -> Result<Tally>;

pub struct Property {
    pub suite: &'static str,
    pub name: &'static str,
    pub statement: &'static str,
    check: Check,
}

macro_rules! prop {
    ($suite:literal, $name:literal, $statement:literal, $check:path) => {
        Property {
            suite: $suite,
            name: $name,
            statement: $statement,
            check: $check,
        }
    };
}

pub const SUITES: &[&str] = &[
    "group_model",
    "relative_graph",
    "separating_cosets",
    "y_graph",
    "rays",
    "boundary_pairs",
    "cber",
];

pub const PROPERTIES: &[Property] = &[
    prop!("group_model", "normal_form", "normalize(u++v) = normalize(u)*normalize(v) and u*u^-1 = 1", gm_normal_form),
    prop!("group_model", "coset_congruence", "coset_canonical(g) = coset_canonical(gh) for h in H", gm_coset_congruence),
    prop!("group_model", "h_enumerate_complete", "h_enumerate(B) = H ∩ ball(B) minus 1", gm_h_enumerate),
    prop!("relative_graph", "metric_axioms", "d is symmetric, positive off the diagonal and satisfies the triangle inequality", rg_metric_axioms),
    prop!("relative_graph", "left_invariance", "d(hf, hg) = d(f, g)", rg_left_invariance),
    prop!("relative_graph", "single_penetration", "a geodesic has at most one component per coset", rg_single_penetration),
    prop!("relative_graph", "monotone_budget", "distances do not increase with the budget", rg_monotone),
    prop!("relative_graph", "visual_metric", "the chain metric lies between (1-2e')w and w", rg_visual),
    prop!("separating_cosets", "symmetry", "S(g, f) is S(f, g) reversed", sc_symmetry),
    prop!("separating_cosets", "equivariance", "S(hf, hg) = h S(f, g)", sc_equivariance),
    prop!("separating_cosets", "order", "every geodesic penetrates the records in order", sc_order),
    prop!("separating_cosets", "two_segment", "every broken geodesic f-m-g penetrates each coset of S(f, g)", sc_two_segment),
    prop!("separating_cosets", "inclusion", "a geodesic o-y through C_i of S(o, x) has C_j in S(o, y) for j < i", sc_inclusion),
    prop!("separating_cosets", "subpath_inclusion", "S of a geodesic subpath is contained in S of the path", sc_subpath),
    prop!("separating_cosets", "coset_distance", "d(p_out(C0), p_in(C1)) = d(C0, C1)", sc_coset_distance),
    prop!("separating_cosets", "entrance_3c", "entrances of geodesics from o into one coset lie within 3C", sc_entrance_3c),
    prop!("separating_cosets", "entrance_4c", "after a common coset C0, entrances into C1 lie within 4C", sc_entrance_4c),
    prop!("separating_cosets", "triple_split", "S(f, g) minus S(f, z) and S(z, g) has at most four cosets", sc_triple_split),
    prop!("y_graph", "x_in_y", "every X generator lies in Y", yg_x_in_y),
    prop!("y_graph", "symmetric", "y in Y iff y^-1 in Y", yg_symmetric),
    prop!("y_graph", "dy_le_dx", "d_Y <= d_X", yg_dy_le_dx),
    prop!("y_graph", "qi", "(d_Y - 1)/2 <= |S| <= 3 d_Y on stable pairs", yg_qi),
    prop!("y_graph", "subpath_diameter", "d_Y(1, y) <= 1 gives d_Y(1, z) <= 1 on geodesics to y", yg_subpath),
    prop!("rays", "monotone", "S(x0, x_{n-1}) is contained in S(x0, x_n)", ry_monotone),
    prop!("rays", "exactly_once", "a ray truncation penetrates each of its cosets exactly once", ry_once),
    prop!("rays", "entrance_distance", "ray entrances realize the distance to the coset", ry_entrance),
    prop!("rays", "phi_idempotent", "certified prefixes survive the widened budget", ry_phi_idempotent),
    prop!("rays", "phi_injective", "distinct directions give distinct prefixes", ry_phi_injective),
    prop!("rays", "lexmin", "phi of an element is the least geodesic label sequence", ry_lexmin),
    prop!("rays", "concat_point", "n - d(y_n, x) settles within two periods", ry_concat),
    prop!("boundary_pairs", "window_stability", "window n records are a sublist of window n+p", bp_stability),
    prop!("boundary_pairs", "symmetry", "the window of (eta, xi) is the reversed window of (xi, eta)", bp_symmetry),
    prop!("boundary_pairs", "well_defined", "central and endpoint windows agree away from the ends", bp_well_defined),
    prop!("boundary_pairs", "penetrate_next", "a ray toward eta through C_i continues through C_{i+1}", bp_penetrate_next),
    prop!("boundary_pairs", "dichotomy", "each window coset is crossed by every geodesic on one side", bp_dichotomy),
    prop!("boundary_pairs", "f4", "window splits leave at most four cosets", bp_f4),
    prop!("cber", "brute_force", "the decision agrees with a bounded search", cb_brute),
    prop!("cber", "laws", "tail equivalence is reflexive, symmetric and transitive", cb_laws),
    prop!("cber", "shift", "dropping a prefix keeps the class", cb_shift),
];

/// Runs the selected suites or properties (`all` selects everything).
pub fn run_verify(ctx: &Ctx, selection: &[String]) -> Result<VerifyReport> {
    let everything = selection.is_empty() || selection.iter().any(|s| s == "all");
    for s in selection {
        if s != "all" && !SUITES.contains(&s.as_str()) && !PROPERTIES.iter().any(|p| p.name == s) {
            return Err(LabError::Input(format!("unknown suite or property '{s}'")));
        }
    }
    let chosen = PROPERTIES
        .iter()
        .filter(|p| everything || selection.iter().any(|s| s == p.suite || s == p.name));
    let mut properties = Vec::new();
    for p in chosen {
        let (status, tally, note) = match (p.check)(ctx) {
            Ok(t) if t.failures > 0 => (Status::Fail, t, None),
            Ok(t) if t.inconclusive => (Status::Inconclusive, t, None),
            Ok(t) => (Status::Pass, t, None),
            Err(LabError::TheoremViolation(m)) => (Status::Fail, Tally::default(), Some(m)),
            Err(err) => (Status::Inconclusive, Tally::default(), Some(err.to_string())),
        };
        properties.push(PropertyResult {
            suite: p.suite,
            name: p.name,
            statement: p.statement,
            instances: tally.instances,
            skipped: tally.skipped,
            failures: tally.failures,
            status,
            note: note.or(tally.note),
            worst: tally.witness,
        });
    }
    let count = |s: Status| properties.iter().filter(|p| p.status == s).count();
    Ok(VerifyReport {
        schema: SCHEMA,
        model: ctx.model().describe(),
        model_label: ctx.cfg.model_label.clone(),
        d: ctx.cfg.d,
        budget: ctx.cfg.budget,
        seed: ctx.cfg.seed,
        samples: ctx.cfg.samples,
        polygons: ctx.cfg.polygons,
        c_hat: ctx.c_hat().ok(),
        selection: selection.to_vec(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        inconclusive: count(Status::Inconclusive),
        properties,
    })
}

// group_model

fn gm_normal_form(cx: &Ctx) -> Result<Tally> {
    let m = cx.model();
    let mut letters = m.ball_generators();
    for f in 0..m.num_families() as u8 {
        for elem in m.h_enumerate(f, cx.radius()) {
            letters.push(Letter::H { family: f, elem });
        }
    }
    let mut rng = cx.rng(11);
    let word = |rng: &mut ChaCha8Rng| -> Vec<Letter> {
        let n = rng.gen_range(0..8);
        (0..n).map(|_| letters[rng.gen_range(0..letters.len())]).collect()
    };
    let mut t = Tally::default();
    for _ in 0..cx.cfg.samples {
        let u = word(&mut rng);
        let v = word(&mut rng);
        let uv: Vec<Letter> = u.iter().chain(&v).copied().collect();
        let lhs = m.normalize(&uv)?;
        let rhs = m.mul(&m.normalize(&u)?, &m.normalize(&v)?);
        let w = || json!({"u": m.format_labels(&u), "v": m.format_labels(&v)});
        t.check(lhs == rhs, w);
        let back: Vec<Letter> = u
            .iter()
            .copied()
            .chain(u.iter().rev().map(|l| m.invert_letter(l)))
            .collect();
        t.check(m.normalize(&back)?.is_identity(), || json!({"u": m.format_labels(&u)}));
    }
    Ok(t)
}

fn gm_coset_congruence(cx: &Ctx) -> Result<Tally> {
    let m = cx.model();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius(), cx.cfg.samples, 12) {
        for f in 0..m.num_families() as u8 {
            let c = m.coset_canonical(&g, f);
            for elem in m.h_enumerate(f, cx.radius()) {
                let gh = m.mul_letter(&g, &Letter::H { family: f, elem });
                t.check(m.coset_canonical(&gh, f) == c, || {
                    json!({"g": cx.fmt(&g), "family": f, "h": m.format_letter(&Letter::H { family: f, elem })})
                });
            }
        }
    }
    Ok(t)
}

fn gm_h_enumerate(cx: &Ctx) -> Result<Tally> {
    let m = cx.model();
    let mut t = Tally::default();
    let ball = m.ball_elements(cx.radius());
    for b in 0..=cx.radius() {
        for f in 0..m.num_families() as u8 {
            let listed: BTreeSet<GroupElement> = m
                .h_enumerate(f, b)
                .into_iter()
                .map(|elem| m.letter_element(&Letter::H { family: f, elem }))
                .collect();
            let brute: BTreeSet<GroupElement> = ball
                .iter()
                .filter(|g| m.x_length(g) <= b)
                .filter(|g| matches!(m.subgroup_membership(g, f), Some(Membership::Element(_))))
                .cloned()
                .collect();
            t.check(listed == brute, || json!({"family": f, "budget": b}));
        }
    }
    Ok(t)
}

// relative_graph

fn rg_metric_axioms(cx: &Ctx) -> Result<Tally> {
    let m = cx.model();
    let pool = m.ball_elements(cx.radius() / 2);
    let mut rng = cx.rng(21);
    let mut t = Tally::default();
    for _ in 0..cx.cfg.samples {
        let p: Vec<GroupElement> = (0..3).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let (f, g, h) = (&p[0], &p[1], &p[2]);
        t.confirm(
            &cx.ball,
            |e| {
                let (Some(fg), Some(gf), Some(gh), Some(fh)) = (
                    e.rel_distance_at(f, g)?.finite(),
                    e.rel_distance_at(g, f)?.finite(),
                    e.rel_distance_at(g, h)?.finite(),
                    e.rel_distance_at(f, h)?.finite(),
                ) else {
                    return Err(LabError::Partiality("distance beyond the budget".into()));
                };
                Ok(fg == gf && fh <= fg + gh && (fg == 0) == (f == g))
            },
            || json!({"f": cx.fmt(f), "g": cx.fmt(g), "h": cx.fmt(h)}),
        )?;
    }
    Ok(t)
}

fn rg_left_invariance(cx: &Ctx) -> Result<Tally> {
    let m = cx.model();
    let pool = m.ball_elements(cx.radius() / 2);
    let mut rng = cx.rng(22);
    let mut t = Tally::default();
    for _ in 0..cx.cfg.samples {
        let p: Vec<GroupElement> = (0..3).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let (h, f, g) = (&p[0], &p[1], &p[2]);
        let (hf, hg) = (m.mul(h, f), m.mul(h, g));
        t.confirm(
            &cx.ball,
            |e| Ok(e.rel_distance_at(&hf, &hg)? == e.rel_distance_at(f, g)?),
            || json!({"h": cx.fmt(h), "f": cx.fmt(f), "g": cx.fmt(g)}),
        )?;
    }
    Ok(t)
}

fn distinct_components(m: &GroupModel, p: &PathRec) -> bool {
    let comps = p.components(m);
    let set: BTreeSet<&CosetRef> = comps.iter().map(|c| &c.coset).collect();
    set.len() == comps.len()
}

fn rg_single_penetration(cx: &Ctx) -> Result<Tally> {
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius() - 1, cx.cfg.samples, 23) {
        t.confirm(
            &cx.ball,
            |e| {
                let list = e.all_geodesics(&one, &g)?;
                if list.overflow {
                    return Err(LabError::Partiality("geodesic cap reached".into()));
                }
                Ok(list.paths.iter().all(|p| distinct_components(e.model(), p)))
            },
            || json!({"f": "1", "g": cx.fmt(&g)}),
        )?;
    }
    Ok(t)
}

fn ext_le(a: ExtNat, b: ExtNat) -> bool {
    match (a, b) {
        (ExtNat::Finite(x), ExtNat::Finite(y)) => x <= y,
        (ExtNat::Finite(_), _) => true,
        (_, ExtNat::Finite(_)) => false,
        _ => true,
    }
}

fn rg_monotone(cx: &Ctx) -> Result<Tally> {
    let e = &*cx.ball;
    let m = cx.model();
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius(), cx.cfg.samples, 24) {
        let here = e.rel_distance_at(&one, &g)?;
        let wide = e.wider().rel_distance_at(&one, &g)?;
        t.check(ext_le(wide, here), || json!({"f": "1", "g": cx.fmt(&g)}));
    }
    for f in 0..m.num_families() as u8 {
        for elem in m.h_enumerate(f, cx.radius()) {
            let here = e.gap(f, elem);
            let wide = e.wider().gap(f, elem);
            t.check(ext_le(wide, here), || {
                json!({"h": m.format_letter(&Letter::H { family: f, elem })})
            });
        }
    }
    Ok(t)
}

fn rg_visual(cx: &Ctx) -> Result<Tally> {
    let pts = sample_points(cx.model(), cx.radius() / 2, 12, cx.cfg.seed);
    let one = GroupElement::identity();
    let mut t = Tally::default();
    let mut eps = 0.2;
    for _ in 0..8 {
        match visual_metric_chain(&*cx.ball, &pts, eps, &one) {
            Ok(v) => {
                t.check(v.lower_bound_holds && v.upper_bound_holds, || {
                    json!({"epsilon": eps, "points": pts.iter().map(|p| cx.fmt(p)).collect::<Vec<_>>()})
                });
                return Ok(t);
            }
            Err(LabError::Precondition(_)) => eps /= 2.0,
            Err(err) => return Err(err),
        }
    }
    Err(LabError::Precondition("no admissible epsilon found".into()))
}

// separating_cosets

fn coset_list(e: &Explorer, f: &GroupElement, g: &GroupElement, d: u64) -> Result<Vec<CosetRef>> {
    Ok(cosets(&sep_cosets(e, f, g, d)?))
}

fn sc_symmetry(cx: &Ctx) -> Result<Tally> {
    let d = cx.cfg.d;
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius() - 2, cx.cfg.samples, 31) {
        t.confirm(
            &cx.ball,
            |e| {
                let mut back = coset_list(e, &g, &one, d)?;
                back.reverse();
                Ok(coset_list(e, &one, &g, d)? == back)
            },
            || json!({"f": "1", "g": cx.fmt(&g), "D": d}),
        )?;
    }
    Ok(t)
}

fn sc_equivariance(cx: &Ctx) -> Result<Tally> {
    let m = cx.model();
    let d = cx.cfg.d;
    let pool = m.ball_elements(cx.radius() / 2);
    let mut rng = cx.rng(32);
    let mut t = Tally::default();
    for _ in 0..cx.cfg.samples {
        let p: Vec<GroupElement> = (0..3).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let (h, f, g) = (&p[0], &p[1], &p[2]);
        let (hf, hg) = (m.mul(h, f), m.mul(h, g));
        t.confirm(
            &cx.ball,
            |e| {
                let moved: Vec<CosetRef> = coset_list(e, f, g, d)?
                    .into_iter()
                    .map(|c| m.coset_canonical(&m.mul(h, &c.rep), c.family))
                    .collect();
                Ok(coset_list(e, &hf, &hg, d)? == moved)
            },
            || json!({"h": cx.fmt(h), "f": cx.fmt(f), "g": cx.fmt(g), "D": d}),
        )?;
    }
    Ok(t)
}

fn sc_order(cx: &Ctx) -> Result<Tally> {
    let d = cx.cfg.d;
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius() - 2, cx.cfg.samples, 33) {
        t.confirm(
            &cx.ball,
            |e| {
                let recs = coset_list(e, &one, &g, d)?;
                let list = e.all_geodesics(&one, &g)?;
                if list.overflow {
                    return Err(LabError::Partiality("geodesic cap reached".into()));
                }
                Ok(list.paths.iter().all(|p| {
                    let seen: Vec<CosetRef> = p
                        .components(e.model())
                        .into_iter()
                        .map(|c| c.coset)
                        .filter(|c| recs.contains(c))
                        .collect();
                    seen == recs
                }))
            },
            || json!({"f": "1", "g": cx.fmt(&g), "D": d}),
        )?;
    }
    Ok(t)
}

/// The first coset of `S(o, g)` avoided by some broken geodesic `o → m → g`.
pub fn two_segment_violation(
    e: &Explorer,
    o: &GroupElement,
    m: &GroupElement,
    g: &GroupElement,
    d: u64,
) -> Result<Option<CosetRef>> {
    let recs = coset_list(e, o, g, d)?;
    if recs.is_empty() {
        return Ok(None);
    }
    let first = e.geodesic_dag(o, m)?;
    let second = e.geodesic_dag(m, g)?;
    for c in recs {
        if !all_geodesics_penetrate(e, &first, &c) && !all_geodesics_penetrate(e, &second, &c) {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

fn sc_two_segment(cx: &Ctx) -> Result<Tally> {
    let d = cx.cfg.d;
    let one = GroupElement::identity();
    let pool = cx.model().ball_elements(cx.radius() - 2);
    let mut rng = cx.rng(34);
    let mut t = Tally::default();
    for g in cx.elems(cx.radius() - 2, cx.cfg.samples, 35) {
        let m = pool[rng.gen_range(0..pool.len())].clone();
        t.confirm(
            &cx.ball,
            |e| Ok(two_segment_violation(e, &one, &m, &g, d)?.is_none()),
            || json!({"o": "1", "m": cx.fmt(&m), "g": cx.fmt(&g), "D": d}),
        )?;
    }
    Ok(t)
}

/// Cosets met by an H-edge of some geodesic in `dag`.
pub fn penetrated_cosets(e: &Explorer, dag: &GeoDag) -> BTreeSet<CosetRef> {
    dag.edges()
        .filter_map(|(v, edge)| {
            dag.h_elem(edge.label)
                .map(|(f, _)| e.model().coset_canonical(dag.graph.vertex(v), f))
        })
        .collect()
}

/// `(i, j)` with `C_i` of `S(o, x)` penetrated toward `y` but `C_j ∉ S(o, y)`.
pub fn inclusion_violation(
    sx: &[CosetRef],
    sy: &[CosetRef],
    penetrated_y: &BTreeSet<CosetRef>,
) -> Option<(usize, usize)> {
    for (i, c) in sx.iter().enumerate() {
        if penetrated_y.contains(c) {
            if let Some(j) = (0..i).find(|&j| !sy.contains(&sx[j])) {
                return Some((i, j));
            }
        }
    }
    None
}

fn sc_inclusion(cx: &Ctx) -> Result<Tally> {
    let e = &*cx.ball;
    let d = cx.cfg.d;
    let one = GroupElement::identity();
    let n = ((cx.cfg.samples as f64).sqrt() as usize * 4).max(8);
    let pts = cx.elems(cx.radius() - 2, n, 36);
    let mut data = Vec::new();
    for y in &pts {
        let dag = e.geodesic_dag(&one, y)?;
        data.push((coset_list(e, &one, y, d)?, penetrated_cosets(e, &dag)));
    }
    let mut t = Tally::default();
    for (xi, x) in pts.iter().enumerate() {
        if data[xi].0.len() < 2 {
            continue;
        }
        for (yi, y) in pts.iter().enumerate() {
            let bad = inclusion_violation(&data[xi].0, &data[yi].0, &data[yi].1);
            if bad.is_none() {
                t.instances += 1;
                continue;
            }
            t.confirm(
                e,
                |ex| inclusion_holds(ex, x, y, d),
                || json!({"o": "1", "x": cx.fmt(x), "y": cx.fmt(y), "D": d}),
            )?;
        }
    }
    // Points far along the rays, where S(1, x) has several cosets.
    let m = cx.model();
    let near = m.ball_elements(2);
    for sch in cx.schemes()? {
        let depth = 2 * sch.period_len() + 1;
        let x = sch.vertex(m, depth);
        for j in 0..=depth {
            let v = sch.vertex(m, j);
            for u in &near {
                let y = m.mul(&v, u);
                t.confirm(
                    cx.tube(),
                    |ex| inclusion_holds(ex, &x, &y, d),
                    || json!({"o": "1", "x": cx.fmt(&x), "y": cx.fmt(&y), "D": d}),
                )?;
            }
        }
    }
    Ok(t)
}

fn inclusion_holds(e: &Explorer, x: &GroupElement, y: &GroupElement, d: u64) -> Result<bool> {
    let one = GroupElement::identity();
    let sx = coset_list(e, &one, x, d)?;
    let sy = coset_list(e, &one, y, d)?;
    let pen = penetrated_cosets(e, &e.geodesic_dag(&one, y)?);
    Ok(inclusion_violation(&sx, &sy, &pen).is_none())
}

fn sc_subpath(cx: &Ctx) -> Result<Tally> {
    let d = cx.cfg.d;
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius() - 2, (cx.cfg.samples / 4).max(4), 37) {
        t.confirm(
            &cx.ball,
            |e| {
                let m = e.model();
                let whole: BTreeSet<CosetRef> = coset_list(e, &one, &g, d)?.into_iter().collect();
                let list = e.all_geodesics(&one, &g)?;
                for p in list.paths.iter().take(8) {
                    let v = p.vertices(m);
                    for i in 0..v.len() {
                        for j in i + 1..v.len() {
                            if !coset_list(e, &v[i], &v[j], d)?.iter().all(|c| whole.contains(c)) {
                                return Ok(false);
                            }
                        }
                    }
                }
                Ok(true)
            },
            || json!({"f": "1", "g": cx.fmt(&g), "D": d}),
        )?;
    }
    Ok(t)
}

/// Elements of a coset inside the ball of `e`.
fn coset_points(e: &Explorer, c: &CosetRef) -> Vec<GroupElement> {
    let m = e.model();
    let graph = e.ball_graph();
    let mut out = vec![c.rep.clone()];
    for elem in m.h_enumerate(c.family, 2 * e.budget().x_radius) {
        out.push(m.mul_letter(&c.rep, &Letter::H { family: c.family, elem }));
    }
    out.retain(|g| graph.id(g).is_some());
    out
}

fn sc_coset_distance(cx: &Ctx) -> Result<Tally> {
    let d = cx.cfg.d;
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius() - 2, (cx.cfg.samples / 4).max(4), 38) {
        t.confirm(
            &cx.ball,
            |e| {
                let m = e.model();
                let recs = coset_list(e, &one, &g, d)?;
                if recs.len() < 2 {
                    return Ok(true);
                }
                let dag = e.geodesic_dag(&one, &g)?;
                let p = PathRec::new(one.clone(), dag.letters(&dag.lex_min()));
                let comps = p.components(m);
                for w in recs.windows(2) {
                    let out0 = &comps.iter().find(|c| c.coset == w[0]).expect("order checked").exit;
                    let in1 = &comps.iter().find(|c| c.coset == w[1]).expect("order checked").entrance;
                    let along = e.dist(out0, in1)?;
                    let mut best = u64::MAX;
                    for u in coset_points(e, &w[0]) {
                        for v in coset_points(e, &w[1]) {
                            best = best.min(e.dist(&u, &v)?);
                        }
                    }
                    if along != best {
                        return Ok(false);
                    }
                }
                Ok(true)
            },
            || json!({"f": "1", "g": cx.fmt(&g), "D": d}),
        )?;
    }
    Ok(t)
}

/// A pair within one group whose `d̂` exceeds `k·Ĉ`.
fn spread_within<'a>(
    e: &Explorer,
    groups: impl Iterator<Item = (&'a CosetRef, &'a BTreeSet<GroupElement>)>,
    c: Fraction,
    k: u64,
) -> Option<(CosetRef, GroupElement, GroupElement, ExtNat)> {
    for (coset, pts) in groups {
        let pts: Vec<&GroupElement> = pts.iter().collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let v = e.relative_metric(coset.family, pts[i], pts[j]);
                let ok = match v {
                    ExtNat::Finite(v) => c.bounds(v, k),
                    ExtNat::InfinityAtBudget => true,
                    ExtNat::ProvenInfinite => false,
                };
                if !ok {
                    return Some((coset.clone(), pts[i].clone(), pts[j].clone(), v));
                }
            }
        }
    }
    None
}

/// Geodesics from `o` to each target, with overflowing targets dropped.
fn geodesic_fan(e: &Explorer, o: &GroupElement, targets: &[GroupElement]) -> Result<Vec<PathRec>> {
    let mut out = Vec::new();
    for g in targets {
        match e.all_geodesics(o, g) {
            Ok(list) if !list.overflow => out.extend(list.paths),
            Ok(_) => {}
            Err(err) if err.is_partiality() => {}
            Err(err) => return Err(err),
        }
    }
    Ok(out)
}

/// Entrance vertices per coset over geodesics from `o`.
pub fn entrance_groups(m: &GroupModel, paths: &[PathRec]) -> BTreeMap<CosetRef, BTreeSet<GroupElement>> {
    let mut groups: BTreeMap<CosetRef, BTreeSet<GroupElement>> = BTreeMap::new();
    for p in paths {
        for c in p.components(m) {
            groups.entry(c.coset).or_default().insert(c.entrance);
        }
    }
    groups
}

/// Entrances into `C1` over geodesics from `o` that penetrate `C0` first,
/// keyed by `C1` and grouped per `C0`.
pub fn second_entrance_groups(
    m: &GroupModel,
    paths: &[PathRec],
) -> BTreeMap<(CosetRef, CosetRef), BTreeSet<GroupElement>> {
    let mut groups: BTreeMap<(CosetRef, CosetRef), BTreeSet<GroupElement>> = BTreeMap::new();
    for p in paths {
        let comps = p.components(m);
        for i in 0..comps.len() {
            for j in i + 1..comps.len() {
                groups
                    .entry((comps[i].coset.clone(), comps[j].coset.clone()))
                    .or_default()
                    .insert(comps[j].entrance.clone());
            }
        }
    }
    groups
}

fn coset_bound_check(cx: &Ctx, k: u64, stream: u64, second: bool) -> Result<Tally> {
    let c = cx.c_hat()?;
    let e = &*cx.ball;
    let m = cx.model();
    let mut t = Tally::default();
    let targets = cx.elems(cx.radius() - 1, cx.cfg.samples, stream);
    for o in m.ball_elements(1) {
        let paths = geodesic_fan(e, &o, &targets)?;
        let found = if second {
            let groups = second_entrance_groups(m, &paths);
            t.instances += groups.values().map(|s| s.len() as u64).sum::<u64>();
            spread_within(e, groups.iter().map(|((_, c1), v)| (c1, v)), c, k)
        } else {
            let groups = entrance_groups(m, &paths);
            t.instances += groups.values().map(|s| s.len() as u64).sum::<u64>();
            spread_within(e, groups.iter(), c, k)
        };
        if let Some((coset, a, b, v)) = found {
            t.fail(json!({
                "o": cx.fmt(&o),
                "coset": cx.fmt_coset(&coset),
                "p_in": cx.fmt(&a),
                "q_in": cx.fmt(&b),
                "gap": v,
                "C": c,
            }));
        }
    }
    Ok(t)
}

fn sc_entrance_3c(cx: &Ctx) -> Result<Tally> {
    coset_bound_check(cx, 3, 39, false)
}

fn sc_entrance_4c(cx: &Ctx) -> Result<Tally> {
    coset_bound_check(cx, 4, 40, true)
}

fn sc_triple_split(cx: &Ctx) -> Result<Tally> {
    let c = cx.c_hat()?;
    let d = cx.cfg.d;
    if d * c.den < 11 * c.num {
        return Ok(Tally::not_applicable(format!("D={d} is below 11C with C={c}")));
    }
    let pool = cx.model().ball_elements(cx.radius() / 2);
    let mut rng = cx.rng(41);
    let mut t = Tally::default();
    for _ in 0..cx.cfg.samples {
        let p: Vec<GroupElement> = (0..3).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        match triple_split(&cx.ball, &p[0], &p[1], &p[2], d, Some(c)) {
            Ok(_) => t.instances += 1,
            Err(LabError::TheoremViolation(msg)) => t.fail(json!({
                "f": cx.fmt(&p[0]), "g": cx.fmt(&p[1]), "z": cx.fmt(&p[2]), "D": d, "detail": msg,
            })),
            Err(err) if err.is_partiality() => t.skipped += 1,
            Err(err) => return Err(err),
        }
    }
    Ok(t)
}

// y_graph

fn yg_x_in_y(cx: &Ctx) -> Result<Tally> {
    let y = cx.y()?;
    let m = cx.model();
    let mut t = Tally::default();
    for l in m.ball_generators().iter().filter(|l| !l.is_h()) {
        let g = m.letter_element(l);
        t.check(y.y_member(&g)?, || json!({"x": m.format_letter(l), "D": cx.cfg.d}));
    }
    Ok(t)
}

fn yg_symmetric(cx: &Ctx) -> Result<Tally> {
    let m = cx.model();
    let d = cx.cfg.d;
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius() - 2, cx.cfg.samples, 51) {
        let gi = m.inv(&g);
        t.confirm(
            &cx.ball,
            |e| Ok(sep_cosets(e, &one, &g, d)?.is_empty() == sep_cosets(e, &one, &gi, d)?.is_empty()),
            || json!({"y": cx.fmt(&g), "D": d}),
        )?;
    }
    Ok(t)
}

fn yg_dy_le_dx(cx: &Ctx) -> Result<Tally> {
    let y = cx.y()?;
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius(), cx.cfg.samples, 52) {
        let dy = y.y_distance(&one, &g)?;
        let dx = cx.ball.rel_distance_at(&one, &g)?;
        t.check(ext_le(dy, dx), || json!({"f": "1", "g": cx.fmt(&g), "D": cx.cfg.d}));
    }
    Ok(t)
}

fn yg_qi(cx: &Ctx) -> Result<Tally> {
    let y = cx.y()?;
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius(), cx.cfg.samples, 53) {
        let q = match y.qi_gap(&one, &g) {
            Ok(q) => q,
            Err(err) if err.is_partiality() => {
                t.skipped += 1;
                continue;
            }
            Err(err) => return Err(err),
        };
        if !q.stable {
            t.skipped += 1;
            continue;
        }
        t.check(q.lower_ok && q.upper_ok, || {
            json!({"f": "1", "g": cx.fmt(&g), "D": cx.cfg.d, "sep_count": q.sep_count, "d_y": q.d_y})
        });
    }
    Ok(t)
}

fn yg_subpath(cx: &Ctx) -> Result<Tally> {
    let y = cx.y()?;
    let e = &*cx.ball;
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius() - 1, cx.cfg.samples, 54) {
        if !matches!(y.y_distance(&one, &g)?, ExtNat::Finite(v) if v <= 1) {
            continue;
        }
        let dag = e.geodesic_dag(&one, &g)?;
        for &v in dag.vertices() {
            let z = dag.graph.vertex(v);
            let ok = matches!(y.y_distance(&one, z)?, ExtNat::Finite(v) if v <= 1);
            t.check(ok, || json!({"y": cx.fmt(&g), "z": cx.fmt(z), "D": cx.cfg.d}));
        }
    }
    Ok(t)
}

// rays

/// Depth covering four periods of a scheme.
fn ray_depth(s: &RayScheme) -> usize {
    s.prefix.len() + 4 * s.period_len()
}

fn for_schemes(
    cx: &Ctx,
    mut f: impl FnMut(&RayScheme, &mut Tally) -> Result<()>,
) -> Result<Tally> {
    let mut t = Tally::default();
    for s in cx.schemes()? {
        match f(&s, &mut t) {
            Ok(()) => {}
            Err(err) if err.is_partiality() => {
                t.skipped += 1;
                t.inconclusive = true;
                t.note.get_or_insert_with(|| format!("{}: {err}", s.describe(cx.model())));
            }
            Err(err) => return Err(err),
        }
    }
    Ok(t)
}

fn ry_monotone(cx: &Ctx) -> Result<Tally> {
    let e = cx.tube();
    let d = cx.cfg.d;
    for_schemes(cx, |s, t| {
        let mut prev: Vec<CosetRef> = Vec::new();
        for n in 1..=ray_depth(s) {
            let now = cosets(&ray_sep_cosets(e, s, n, d)?);
            t.check(prev.iter().all(|c| now.contains(c)), || {
                json!({"scheme": s.describe(cx.model()), "depth": n, "D": d})
            });
            prev = now;
        }
        Ok(())
    })
}

fn ry_once(cx: &Ctx) -> Result<Tally> {
    let e = cx.tube();
    let d = cx.cfg.d;
    for_schemes(cx, |s, t| {
        let n = ray_depth(s);
        let path = ray_truncation(e, s, n)?;
        let comps = path.components(cx.model());
        for c in cosets(&ray_sep_cosets(e, s, n, d)?) {
            let hits = comps.iter().filter(|x| x.coset == c).count();
            t.check(hits == 1, || {
                json!({"scheme": s.describe(cx.model()), "depth": n, "coset": cx.fmt_coset(&c), "D": d})
            });
        }
        Ok(())
    })
}

fn ry_entrance(cx: &Ctx) -> Result<Tally> {
    let e = cx.tube();
    let d = cx.cfg.d;
    let m = cx.model();
    for_schemes(cx, |s, t| {
        let n = ray_depth(s);
        let path = ray_truncation(e, s, n)?;
        let comps = path.components(m);
        for r in ray_sep_cosets(e, s, n, d)? {
            let Some(c) = comps.iter().find(|c| c.coset == r.coset) else {
                continue;
            };
            let along = c.start as u64;
            let mut best = u64::MAX;
            let mut pts = vec![r.coset.rep.clone()];
            for elem in m.h_enumerate(r.coset.family, e.budget().h_budget) {
                pts.push(m.mul_letter(&r.coset.rep, &Letter::H { family: r.coset.family, elem }));
            }
            for u in &pts {
                match e.dist(&s.base, u) {
                    Ok(v) => best = best.min(v),
                    Err(err) if err.is_partiality() => {}
                    Err(err) => return Err(err),
                }
            }
            t.check(along == r.distance && along == best, || {
                json!({"scheme": s.describe(m), "coset": cx.fmt_coset(&r.coset), "D": d})
            });
        }
        Ok(())
    })
}

fn ry_phi_idempotent(cx: &Ctx) -> Result<Tally> {
    let e = cx.tube();
    let d = cx.cfg.d;
    for_schemes(cx, |s, t| {
        let p = phi_prefix_scheme_measured(e, s, ray_depth(s), d)?;
        t.check(p.stable, || json!({"scheme": s.describe(cx.model()), "D": d}));
        Ok(())
    })
}

fn ry_phi_injective(cx: &Ctx) -> Result<Tally> {
    let e = cx.tube();
    let d = cx.cfg.d;
    let m = cx.model();
    let schemes = cx.schemes()?;
    let mut t = Tally::default();
    let mut prefixes = Vec::new();
    for s in &schemes {
        match phi_prefix_scheme(e, s, ray_depth(s), d) {
            Ok(p) => prefixes.push(Some(p)),
            Err(err) if err.is_partiality() => {
                t.skipped += 1;
                prefixes.push(None);
            }
            Err(err) => return Err(err),
        }
    }
    for i in 0..schemes.len() {
        for j in i + 1..schemes.len() {
            let (Some(a), Some(b)) = (&prefixes[i], &prefixes[j]) else {
                continue;
            };
            let n = a.certified_len.min(b.certified_len);
            t.check(n == 0 || a.labels[..n] != b.labels[..n], || {
                json!({"xi": schemes[i].describe(m), "eta": schemes[j].describe(m), "D": d})
            });
        }
    }
    Ok(t)
}

fn ry_lexmin(cx: &Ctx) -> Result<Tally> {
    let m = cx.model();
    let one = GroupElement::identity();
    let mut t = Tally::default();
    for g in cx.elems(cx.radius() - 2, cx.cfg.samples, 61) {
        t.confirm(
            &cx.ball,
            |e| {
                let phi = phi_prefix_element(e, &g)?;
                let list = e.all_geodesics(&one, &g)?;
                if list.overflow {
                    return Err(LabError::Partiality("geodesic cap reached".into()));
                }
                let min = list
                    .paths
                    .iter()
                    .map(|p| p.labels.clone())
                    .min_by(|a, b| m.labels_cmp(a, b))
                    .unwrap_or_default();
                Ok(phi.labels == min)
            },
            || json!({"target": cx.fmt(&g)}),
        )?;
    }
    Ok(t)
}

fn ry_concat(cx: &Ctx) -> Result<Tally> {
    let e = cx.tube();
    let xs = cx.elems(cx.radius().min(5), (cx.cfg.samples / 10).max(5), 62);
    for_schemes(cx, |s, t| {
        for x in &xs {
            match concat_point(e, x, s) {
                Ok(c) => t.check(c.k <= 8 * (s.prefix.len() + s.period_len()), || json!({})),
                Err(LabError::WidenWindow(msg)) => {
                    t.skipped += 1;
                    t.inconclusive = true;
                    t.note.get_or_insert(format!("x = {}: {msg}", cx.fmt(x)));
                }
                Err(err) => return Err(err),
            }
        }
        Ok(())
    })
}

// boundary_pairs

/// Ordered pairs of distinct documented schemes whose rays branch at the base.
fn branching_pairs(cx: &Ctx) -> Result<Vec<(RayScheme, RayScheme)>> {
    let s = cx.schemes()?;
    let m = cx.model();
    let mut out = Vec::new();
    for i in 0..s.len() {
        for j in 0..s.len() {
            if i == j {
                continue;
            }
            let back = m.invert_letter(&s[i].label(0));
            let first = s[j].label(0);
            let merges = back.family().is_some() && back.family() == first.family();
            if back != m.invert_letter(&first) && !merges {
                out.push((s[i].clone(), s[j].clone()));
            }
        }
    }
    Ok(out)
}

fn window_n(s: &RayScheme) -> usize {
    2 * s.period_len()
}

fn for_pairs(
    cx: &Ctx,
    mut f: impl FnMut(&RayScheme, &RayScheme, &mut Tally) -> Result<()>,
) -> Result<Tally> {
    let mut t = Tally::default();
    for (xi, eta) in branching_pairs(cx)? {
        match f(&xi, &eta, &mut t) {
            Ok(()) => {}
            Err(err) if err.is_partiality() => {
                t.skipped += 1;
                t.inconclusive = true;
                t.note.get_or_insert_with(|| {
                    format!("({}, {}): {err}", xi.describe(cx.model()), eta.describe(cx.model()))
                });
            }
            Err(err) => return Err(err),
        }
    }
    Ok(t)
}

fn pair_json(cx: &Ctx, xi: &RayScheme, eta: &RayScheme, n: usize) -> Value {
    json!({"xi": xi.describe(cx.model()), "eta": eta.describe(cx.model()), "n": n, "D": cx.cfg.d})
}

fn is_sublist(a: &[CosetRef], b: &[CosetRef]) -> bool {
    let mut it = b.iter();
    a.iter().all(|x| it.any(|y| y == x))
}

fn bp_stability(cx: &Ctx) -> Result<Tally> {
    let e = cx.tube();
    for_pairs(cx, |xi, eta, t| {
        let n = window_n(xi).max(window_n(eta)) / 2;
        let p = xi.period_len().max(eta.period_len());
        let a = central_window(e, xi, eta, n, cx.cfg.d)?.cosets();
        let b = central_window(e, xi, eta, n + p, cx.cfg.d)?.cosets();
        t.check(is_sublist(&a, &b), || pair_json(cx, xi, eta, n));
        Ok(())
    })
}

fn bp_symmetry(cx: &Ctx) -> Result<Tally> {
    let e = cx.tube();
    for_pairs(cx, |xi, eta, t| {
        let n = window_n(xi).max(window_n(eta));
        let a = central_window(e, xi, eta, n, cx.cfg.d)?.cosets();
        let mut b = central_window(e, eta, xi, n, cx.cfg.d)?.cosets();
        b.reverse();
        t.check(a == b, || pair_json(cx, xi, eta, n));
        Ok(())
    })
}

fn bp_well_defined(cx: &Ctx) -> Result<Tally> {
    let e = cx.tube();
    for_pairs(cx, |xi, eta, t| {
        let n = window_n(xi).max(window_n(eta));
        let w = central_window(e, xi, eta, n, cx.cfg.d)?;
        let all = cosets(&pair_window(e, xi, eta, n, cx.cfg.d)?);
        let len = w.path.len() as u64;
        let margin = xi.period_len().max(eta.period_len()) as u64;
        let inner = |recs: &[crate::separating_cosets::SepCosetRecord]| -> Vec<CosetRef> {
            recs.iter()
                .filter(|r| r.distance >= margin && r.distance + margin <= len)
                .map(|r| r.coset.clone())
                .collect()
        };
        let central = inner(&w.records);
        let endpoint: Vec<CosetRef> = all.into_iter().filter(|c| central.contains(c)).collect();
        t.check(central == endpoint, || pair_json(cx, xi, eta, n));
        Ok(())
    })
}

fn bp_penetrate_next(cx: &Ctx) -> Result<Tally> {
    let c = cx.c_hat()?;
    let d = cx.cfg.d;
    if d * c.den < 4 * c.num {
        return Ok(Tally::not_applicable(format!("D={d} is below 4C with C={c}")));
    }
    let e = cx.tube();
    let m = cx.model();
    for_pairs(cx, |xi, eta, t| {
        let n = window_n(xi).max(window_n(eta));
        let w = central_window(e, xi, eta, n, d)?;
        let window = w.cosets();
        let ray = ray_truncation(e, eta, 2 * n)?;
        let comps = ray.components(m);
        for i in 0..window.len().saturating_sub(1) {
            let Some(pos) = comps.iter().position(|c| c.coset == window[i]) else {
                continue;
            };
            let later = comps[pos + 1..].iter().any(|c| c.coset == window[i + 1]);
            t.check(later, || pair_json(cx, xi, eta, n));
        }
        Ok(())
    })
}

fn bp_dichotomy(cx: &Ctx) -> Result<Tally> {
    let c = cx.c_hat()?;
    let d = cx.cfg.d;
    if d * c.den < 6 * c.num {
        return Ok(Tally::not_applicable(format!("D={d} is below 6C with C={c}")));
    }
    let e = cx.tube();
    let schemes = cx.schemes()?;
    for_pairs(cx, |xi, eta, t| {
        let n = window_n(xi).max(window_n(eta));
        let Some(zeta) = schemes.iter().find(|z| *z != xi && *z != eta) else {
            return Ok(());
        };
        for b in cosets(&pair_window(e, xi, eta, n, d)?) {
            match dichotomy_check(e, xi, eta, zeta, &b, n, d, Some(c)) {
                Ok(_) => t.instances += 1,
                Err(LabError::TheoremViolation(msg)) => {
                    let mut w = pair_json(cx, xi, eta, n);
                    w["zeta"] = json!(zeta.describe(cx.model()));
                    w["coset"] = json!(cx.fmt_coset(&b));
                    w["detail"] = json!(msg);
                    t.fail(w);
                }
                Err(err) => return Err(err),
            }
        }
        Ok(())
    })
}

fn bp_f4(cx: &Ctx) -> Result<Tally> {
    let c = cx.c_hat()?;
    let d = cx.cfg.d;
    if d * c.den < 11 * c.num {
        return Ok(Tally::not_applicable(format!("D={d} is below 11C with C={c}")));
    }
    let e = cx.tube();
    let s = cx.schemes()?;
    let mut t = Tally::default();
    for i in 0..s.len() {
        for j in 0..s.len() {
            for k in 0..s.len() {
                if i == j || j == k || i == k {
                    continue;
                }
                let n = window_n(&s[i]);
                match f4_split(e, &s[i], &s[j], &s[k], n, d, Some(c)) {
                    Ok(_) => t.instances += 1,
                    Err(LabError::TheoremViolation(msg)) => t.fail(json!({
                        "xi": s[i].describe(cx.model()),
                        "eta": s[j].describe(cx.model()),
                        "zeta": s[k].describe(cx.model()),
                        "n": n, "D": d, "detail": msg,
                    })),
                    Err(err) if err.is_partiality() => {
                        t.skipped += 1;
                        t.inconclusive = true;
                        t.note.get_or_insert(err.to_string());
                    }
                    Err(err) => return Err(err),
                }
            }
        }
    }
    Ok(t)
}

// cber

fn random_seq(rng: &mut ChaCha8Rng) -> EvPeriodicSeq {
    let pre: Vec<u64> = (0..rng.gen_range(0..5)).map(|_| rng.gen_range(0..3)).collect();
    let per: Vec<u64> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..3)).collect();
    EvPeriodicSeq::new(pre, per).expect("nonempty period")
}

/// Bounded search over all starting offsets with a comparison window
/// longer than both preperiods and periods.
pub fn brute_tail_equivalent(a: &EvPeriodicSeq, b: &EvPeriodicSeq) -> bool {
    let (pa, pb) = (a.preperiod().len(), b.preperiod().len());
    let (qa, qb) = (a.period().len(), b.period().len());
    let len = pa + pb + qa * qb + qa + qb;
    (0..=pa + qa).any(|n| (0..=pb + qb).any(|m| (0..len).all(|i| a.at(n + i) == b.at(m + i))))
}

fn cb_brute(cx: &Ctx) -> Result<Tally> {
    let mut rng = cx.rng(71);
    let mut t = Tally::default();
    for _ in 0..cx.cfg.samples * 10 {
        let (a, b) = (random_seq(&mut rng), random_seq(&mut rng));
        t.check(tail_equivalent(&a, &b).is_some() == brute_tail_equivalent(&a, &b), || {
            json!({"w0": a.to_string(), "w1": b.to_string()})
        });
    }
    Ok(t)
}

fn cb_laws(cx: &Ctx) -> Result<Tally> {
    let mut rng = cx.rng(72);
    let mut t = Tally::default();
    for _ in 0..cx.cfg.samples {
        let (a, b, c) = (random_seq(&mut rng), random_seq(&mut rng), random_seq(&mut rng));
        let w = || json!({"w0": a.to_string(), "w1": b.to_string(), "w2": c.to_string()});
        let ab = tail_equivalent(&a, &b).is_some();
        let bc = tail_equivalent(&b, &c).is_some();
        let ok = tail_equivalent(&a, &a).is_some()
            && ab == tail_equivalent(&b, &a).is_some()
            && (!(ab && bc) || tail_equivalent(&a, &c).is_some());
        t.check(ok, w);
    }
    Ok(t)
}

fn cb_shift(cx: &Ctx) -> Result<Tally> {
    let mut rng = cx.rng(73);
    let mut t = Tally::default();
    for _ in 0..cx.cfg.samples {
        let a = random_seq(&mut rng);
        let k = rng.gen_range(0..10);
        t.check(tail_equivalent(&a, &a.shift(k)).is_some(), || {
            json!({"w0": a.to_string(), "k": k})
        });
    }
    Ok(t)
}
