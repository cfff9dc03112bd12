//! Eventually periodic geodesic rays, their separating cosets, the lex-min
//! map `Φ` at finite depth, and the pigeonhole constant `K`.

use std::fmt;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::group_model::{CosetRef, GroupElement, GroupModel, Letter, SubgroupElement};
use crate::relative_graph::{ExtNat, Explorer, Measured, PathRec};
use crate::separating_cosets::{cosets, sep_cosets_of_dag, SepCosetRecord};
use crate::y_graph::YGraph;

/// A ray given by a base vertex, a finite prefix and a repeated period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayScheme {
    pub base: GroupElement,
    pub prefix: Vec<Letter>,
    pub period: Vec<Letter>,
}

impl RayScheme {
    pub fn new(base: GroupElement, prefix: Vec<Letter>, period: Vec<Letter>) -> Result<RayScheme> {
        if period.is_empty() {
            return Err(LabError::Input("a ray scheme needs a nonempty period".into()));
        }
        Ok(RayScheme {
            base,
            prefix,
            period,
        })
    }

    /// Parses `base=1 prefix=[] period=[h:ab^3, x:a]`. Missing `base` means
    /// the identity, missing `prefix` means empty.
    pub fn parse(model: &GroupModel, src: &str) -> Result<RayScheme> {
        let mut base = GroupElement::identity();
        let mut prefix = Vec::new();
        let mut period = None;
        let mut rest = src.trim();
        while !rest.is_empty() {
            let (key, after) = rest
                .split_once('=')
                .ok_or_else(|| LabError::Input(format!("expected key=value in '{src}'")))?;
            let after = after.trim_start();
            let (value, tail) = if after.starts_with('[') {
                let end = after
                    .find(']')
                    .ok_or_else(|| LabError::Input(format!("unclosed list in '{src}'")))?;
                (&after[..=end], &after[end + 1..])
            } else {
                match after.find(char::is_whitespace) {
                    Some(i) => (&after[..i], &after[i..]),
                    None => (after, ""),
                }
            };
            match key.trim() {
                "base" => base = model.parse_element(value)?,
                "prefix" => prefix = model.parse_letter_list(value)?,
                "period" => period = Some(model.parse_letter_list(value)?),
                other => return Err(LabError::Input(format!("unknown scheme key '{other}'"))),
            }
            rest = tail.trim_start();
        }
        let period = period.ok_or_else(|| LabError::Input(format!("no period in '{src}'")))?;
        RayScheme::new(base, prefix, period)
    }

    pub fn describe(&self, model: &GroupModel) -> String {
        format!(
            "base={} prefix=[{}] period=[{}]",
            model.format_element(&self.base),
            model.format_labels(&self.prefix).join(", "),
            model.format_labels(&self.period).join(", ")
        )
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    /// Label `i` (0-based).
    pub fn label(&self, i: usize) -> Letter {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn labels(&self, n: usize) -> Vec<Letter> {
        (0..n).map(|i| self.label(i)).collect()
    }

    /// The first `n` edges as an unchecked path.
    pub fn path(&self, n: usize) -> PathRec {
        PathRec::new(self.base.clone(), self.labels(n))
    }

    pub fn vertex(&self, model: &GroupModel, n: usize) -> GroupElement {
        self.path(n).end(model)
    }

    pub fn vertices(&self, model: &GroupModel, n: usize) -> Vec<GroupElement> {
        self.path(n).vertices(model)
    }

    /// The ray `g·γ`.
    pub fn translate(&self, model: &GroupModel, g: &GroupElement) -> RayScheme {
        RayScheme {
            base: model.mul(g, &self.base),
            prefix: self.prefix.clone(),
            period: self.period.clone(),
        }
    }

    /// The ray starting at vertex `k`.
    pub fn shifted(&self, model: &GroupModel, k: usize) -> RayScheme {
        let prefix = (k..self.prefix.len().max(k)).map(|i| self.label(i)).collect();
        let start = self.prefix.len().max(k);
        let off = (start - self.prefix.len()) % self.period.len();
        let period = (0..self.period.len())
            .map(|i| self.period[(off + i) % self.period.len()])
            .collect();
        RayScheme {
            base: self.vertex(model, k),
            prefix,
            period,
        }
    }
}

/// The first `n` edges, certified geodesic. On failure the error names the
/// least depth whose truncation is not geodesic.
pub fn ray_truncation(e: &Explorer, s: &RayScheme, n: usize) -> Result<PathRec> {
    let model = e.model();
    let mut path = s.path(n);
    if e.dist(&s.base, &path.end(model))? == n as u64 {
        path.geodesic = true;
        return Ok(path);
    }
    let verts = path.vertices(model);
    for (j, v) in verts.iter().enumerate().skip(1) {
        let d = e.dist(&s.base, v)?;
        if d != j as u64 {
            return Err(LabError::SchemeRejected {
                depth: j,
                detail: format!(
                    "{}: distance to vertex {j} is {d}",
                    s.describe(model)
                ),
            });
        }
    }
    unreachable!("the full truncation failed, so some prefix fails")
}

/// `S(x₀, x_depth; D)` for the scheme's ray.
pub fn ray_sep_cosets(e: &Explorer, s: &RayScheme, depth: usize, d: u64) -> Result<Vec<SepCosetRecord>> {
    let path = ray_truncation(e, s, depth)?;
    if depth == 0 {
        return Ok(Vec::new());
    }
    let dag = e.geodesic_dag(&s.base, &path.end(e.model()))?;
    sep_cosets_of_dag(e, &dag, d)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Diverging,
    NotDivergingAtTestedDepths,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Diverging => "diverging",
            Verdict::NotDivergingAtTestedDepths => "not diverging at tested depths",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub depth: usize,
    pub sep_count: usize,
    pub d_y: ExtNat,
    /// Both quasi-isometry inequalities hold between the two columns.
    pub qi_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub verdict: Verdict,
}

/// Tabulates `|S(x₀,x_n;D)|` and `d_Y(x₀,x_n)` at the given depths.
///
/// "Diverging" needs both columns strictly increasing. A constant `|S|`
/// column gives "not diverging at tested depths", which is not a disproof.
pub fn convergence_check(
    e: &Explorer,
    y: &YGraph,
    s: &RayScheme,
    depths: &[usize],
) -> Result<ConvergenceReport> {
    if depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Input("depths must increase".into()));
    }
    let mut rows = Vec::new();
    for &n in depths {
        let recs = ray_sep_cosets(e, s, n, y.d())?;
        let end = s.vertex(e.model(), n);
        let d_y = y.y_distance_in(e, &s.base, &end)?;
        let k = recs.len() as u64;
        let qi_ok = match d_y {
            ExtNat::Finite(v) => v <= 2 * k + 1 && k <= 3 * v,
            _ => false,
        };
        rows.push(ConvergenceRow {
            depth: n,
            sep_count: recs.len(),
            d_y,
            qi_ok,
        });
    }
    let increasing = |f: &dyn Fn(&ConvergenceRow) -> Option<u64>| {
        rows.windows(2).all(|w| match (f(&w[0]), f(&w[1])) {
            (Some(a), Some(b)) => a < b,
            _ => false,
        })
    };
    let verdict = if rows.len() < 2 {
        Verdict::Inconclusive
    } else if increasing(&|r| Some(r.sep_count as u64)) && increasing(&|r| r.d_y.finite()) {
        Verdict::Diverging
    } else if rows.iter().all(|r| r.sep_count == rows[0].sep_count) {
        Verdict::NotDivergingAtTestedDepths
    } else {
        Verdict::Inconclusive
    };
    Ok(ConvergenceReport { rows, verdict })
}

/// Where a geodesic from `x` joins the ray for good.
#[derive(Clone, Debug, Serialize)]
pub struct ConcatPoint {
    pub k: usize,
    /// `f(n) = n − d(y_n, x)` for `n = 0..`.
    pub f: Vec<i64>,
    /// Lex-min geodesic from `x` to `y_k`.
    pub geodesic: Vec<Letter>,
}

/// Least `k` with `f(n) = n − d(y_n, x)` constant on `[k, k + 2p]`.
///
/// `f` is non-decreasing and bounded along a geodesic ray, so the search
/// runs over `k ≤ 8p`.
pub fn concat_point(e: &Explorer, x: &GroupElement, s: &RayScheme) -> Result<ConcatPoint> {
    let model = e.model();
    let p = s.period_len() + s.prefix.len();
    let window = 2 * s.period_len();
    let max_k = 8 * p;
    ray_truncation(e, s, max_k + window)?;
    let verts = s.vertices(model, max_k + window);
    let mut f: Vec<i64> = Vec::new();
    for k in 0..=max_k {
        while f.len() <= k + window {
            let n = f.len();
            f.push(n as i64 - e.dist(&verts[n], x)? as i64);
        }
        if f[k..=k + window].iter().all(|&v| v == f[k]) {
            let dag = e.geodesic_dag(x, &verts[k])?;
            let geodesic = dag.letters(&dag.lex_min());
            f.truncate(k + window + 1);
            return Ok(ConcatPoint { k, f, geodesic });
        }
    }
    Err(LabError::WidenWindow(format!(
        "f(n) = n - d(y_n, x) did not settle for k <= {max_k}"
    )))
}

/// A certified prefix of `Φ` for a target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiPrefix {
    pub target: String,
    /// Lex-min geodesic labels from the identity to the target vertex.
    pub labels: Vec<Letter>,
    /// Length of the prefix that no deeper exploration can change.
    pub certified_len: usize,
}

impl PhiPrefix {
    pub fn certified(&self) -> &[Letter] {
        &self.labels[..self.certified_len]
    }
}

/// `Φ` at an element: the lex-min geodesic from 1.
pub fn phi_prefix_element(e: &Explorer, g: &GroupElement) -> Result<PhiPrefix> {
    let dag = e.geodesic_dag(&GroupElement::identity(), g)?;
    let labels = dag.letters(&dag.lex_min());
    Ok(PhiPrefix {
        target: e.model().format_element(g),
        certified_len: labels.len(),
        labels,
    })
}

/// `Φ` of the scheme's direction, read at the scheme vertex `depth`.
///
/// Let `C₁ ≺ … ≺ C_k` be `S(1, x_depth; D)` and `m = d(1, C_k)`. Every ray
/// from 1 to the limit enters `C_k` at distance `m`, and every geodesic to
/// such an entrance extends to such a ray. So the first `m` letters of the
/// lex-min geodesic to `x_depth` are the first `m` letters of `Φ`.
pub fn phi_prefix_scheme(e: &Explorer, s: &RayScheme, depth: usize, d: u64) -> Result<PhiPrefix> {
    let model = e.model();
    let one = GroupElement::identity();
    let join = concat_point(e, &one, s)?;
    if depth < join.k + s.period_len() {
        return Err(LabError::WidenWindow(format!(
            "depth {depth} is below the join point {} plus a period",
            join.k
        )));
    }
    let xk = s.vertex(model, join.k);
    let x = s.vertex(model, depth);
    let dk = e.dist(&one, &xk)?;
    if e.dist(&one, &x)? != dk + (depth - join.k) as u64 {
        return Err(LabError::WidenWindow(format!(
            "the geodesic from 1 does not follow the ray up to depth {depth}"
        )));
    }
    let dag = e.geodesic_dag(&one, &x)?;
    let recs = sep_cosets_of_dag(e, &dag, d)?;
    Ok(PhiPrefix {
        target: format!("{} @ {depth}", s.describe(model)),
        labels: dag.letters(&dag.lex_min()),
        certified_len: recs.last().map(|r| r.distance as usize).unwrap_or(0),
    })
}

/// `phi_prefix_scheme` with a stability flag: the certified prefix must
/// survive the widened budget.
pub fn phi_prefix_scheme_measured(
    e: &Explorer,
    s: &RayScheme,
    depth: usize,
    d: u64,
) -> Result<Measured<PhiPrefix>> {
    let value = phi_prefix_scheme(e, s, depth, d)?;
    let stable = match phi_prefix_scheme(e.wider(), s, depth, d) {
        Ok(w) => {
            let n = value.certified_len.min(w.certified_len);
            w.labels[..n] == value.labels[..n]
        }
        Err(_) => false,
    };
    Ok(Measured {
        value,
        stable,
        budget: e.budget(),
    })
}

/// A coset shared by two same-limit rays, with the `d̂` gaps between their
/// entrances and between their exits.
#[derive(Clone, Debug, Serialize)]
pub struct AlignedCoset {
    #[serde(skip)]
    pub coset: CosetRef,
    pub coset_rep: String,
    pub entrance_gap: ExtNat,
    pub exit_gap: ExtNat,
}

/// First `(i, j)` with equal vertices followed by equal labels for
/// `run` steps.
pub(crate) fn tail_meet(
    model: &GroupModel,
    a: &RayScheme,
    b: &RayScheme,
    window: usize,
    run: usize,
) -> Option<(usize, usize)> {
    let va = a.vertices(model, window);
    let vb = b.vertices(model, window);
    for (i, x) in va.iter().enumerate() {
        for (j, y) in vb.iter().enumerate() {
            if x == y && (0..run).all(|t| a.label(i + t) == b.label(j + t)) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Common separating cosets of two rays with a shared tail, with the gaps
/// between their entrance and exit vertices on the two rays.
pub fn align_same_limit(
    e: &Explorer,
    s1: &RayScheme,
    s2: &RayScheme,
    d: u64,
    depth: usize,
) -> Result<Vec<AlignedCoset>> {
    let model = e.model();
    let run = s1.period_len().max(s2.period_len());
    if tail_meet(model, s1, s2, depth, run).is_none() {
        return Err(LabError::Precondition(format!(
            "the rays share no tail within depth {depth}"
        )));
    }
    let r1 = ray_sep_cosets(e, s1, depth, d)?;
    let r2 = cosets(&ray_sep_cosets(e, s2, depth, d)?);
    let p1 = s1.path(depth);
    let p2 = s2.path(depth);
    let c1 = p1.components(model);
    let c2 = p2.components(model);
    let mut out = Vec::new();
    for rec in r1.iter().filter(|r| r2.contains(&r.coset)) {
        let find = |cs: &[crate::relative_graph::Component]| {
            cs.iter()
                .find(|c| c.family == rec.coset.family && c.coset == rec.coset)
                .cloned()
                .ok_or_else(|| {
                    LabError::TheoremViolation(format!(
                        "a ray misses its separating coset {}",
                        model.format_element(&rec.coset.rep)
                    ))
                })
        };
        let (a, b) = (find(&c1)?, find(&c2)?);
        out.push(AlignedCoset {
            coset: rec.coset.clone(),
            coset_rep: model.format_element(&rec.coset.rep),
            entrance_gap: e.relative_metric(rec.coset.family, &a.entrance, &b.entrance),
            exit_gap: e.relative_metric(rec.coset.family, &a.exit, &b.exit),
        });
    }
    if out.is_empty() {
        return Err(LabError::WidenWindow(format!(
            "no common separating coset within depth {depth}"
        )));
    }
    Ok(out)
}

/// `K = (max_λ |{h ∈ H_λ : d̂_λ(1,h) ≤ t}|)²`, with the count including 1.
#[derive(Clone, Debug, Serialize)]
pub struct PigeonholeReport {
    pub threshold: u64,
    pub per_family: Vec<u64>,
    pub k: u64,
}

pub fn pigeonhole_k(e: &Explorer, t: u64) -> Result<PigeonholeReport> {
    let model = e.model();
    let mut per_family = Vec::new();
    for family in 0..model.num_families() as u8 {
        let mut count = 1u64;
        if model.is_free_product() {
            // Closed form; the budgeted admissible search must agree.
            for h in model.h_enumerate(family, 1) {
                if let ExtNat::Finite(v) = e.admissible_distance(family, h) {
                    if v <= t {
                        return Err(LabError::TheoremViolation(format!(
                            "admissible path of length {v} inside a free factor"
                        )));
                    }
                }
            }
        } else {
            for k in 1i32.. {
                let lb = model
                    .relative_metric_lower_bound(&SubgroupElement::Power(k))
                    .expect("cyclic bound");
                if lb > t {
                    break;
                }
                for elem in [SubgroupElement::Power(k), SubgroupElement::Power(-k)] {
                    match e.gap(family, elem) {
                        ExtNat::Finite(v) if v <= t => count += 1,
                        _ => {
                            if model.relative_metric_lower_bound(&elem).unwrap_or(0) <= t {
                                return Err(LabError::WidenWindow(format!(
                                    "cannot certify d(1, {}) against t={t} at {}",
                                    model.format_letter(&Letter::H { family, elem }),
                                    e.budget()
                                )));
                            }
                        }
                    }
                }
            }
        }
        per_family.push(count);
    }
    let m = per_family.iter().copied().max().unwrap_or(1);
    Ok(PigeonholeReport {
        threshold: t,
        per_family,
        k: m * m,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::group_model::{builtin_free_cyclic, builtin_free_product};
    use crate::relative_graph::ExplorationBudget;

    fn tube_fc() -> Explorer {
        Explorer::new(Arc::new(builtin_free_cyclic()), ExplorationBudget::tube(3, 8))
    }

    fn tube_fp() -> Explorer {
        Explorer::new(Arc::new(builtin_free_product()), ExplorationBudget::tube(3, 3))
    }

    fn scheme(e: &Explorer, s: &str) -> RayScheme {
        RayScheme::parse(e.model(), s).unwrap()
    }

    #[test]
    fn parsing_and_shifts() {
        let e = tube_fc();
        let s = scheme(&e, "base=1 prefix=[x:a] period=[h:ab^3, x:a]");
        assert_eq!(s.label(0), Letter::x(0));
        assert_eq!(s.label(1), Letter::power(3));
        assert_eq!(s.label(4), Letter::x(0));
        let t = s.shifted(e.model(), 2);
        assert_eq!(t.base, e.model().parse_element("a(ab)^3").unwrap());
        assert_eq!(t.labels(3), s.labels(5)[2..].to_vec());
        assert!(RayScheme::parse(e.model(), "period=[]").is_err());
        assert!(RayScheme::parse(e.model(), "bogus=1 period=[a]").is_err());
    }

    #[test]
    fn truncations() {
        let e = tube_fc();
        let s = scheme(&e, "period=[h:ab^3, x:a]");
        let p = ray_truncation(&e, &s, 4).unwrap();
        assert!(p.geodesic);
        assert_eq!(p.len(), 4);
        assert!(ray_truncation(&e, &s, 0).unwrap().is_empty());
        let back = scheme(&e, "period=[x:a, x:a^-1]");
        match ray_truncation(&e, &back, 6) {
            Err(LabError::SchemeRejected { depth, .. }) => assert_eq!(depth, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn separating_cosets_along_rays() {
        let e = tube_fc();
        let s = scheme(&e, "period=[h:ab^3, x:a]");
        let r = ray_sep_cosets(&e, &s, 4, 5).unwrap();
        let reps: Vec<String> = r.iter().map(|x| e.model().format_element(&x.coset.rep)).collect();
        assert_eq!(reps, vec!["1", "abababa"]);
        assert!(r.iter().all(|x| x.gap == ExtNat::Finite(6)));
        assert!(ray_sep_cosets(&e, &s, 0, 5).unwrap().is_empty());
        let f = tube_fp();
        let s = scheme(&f, "period=[a, b]");
        assert_eq!(ray_sep_cosets(&f, &s, 6, 1).unwrap().len(), 6);
    }

    #[test]
    fn concatenation_points() {
        let e = tube_fc();
        let s = scheme(&e, "period=[h:ab^3, x:a]");
        let x = s.vertex(e.model(), 5);
        assert!(concat_point(&e, &x, &s).unwrap().k <= 5);
        let x = e.model().parse_element("a^-1").unwrap();
        assert_eq!(concat_point(&e, &x, &s).unwrap().k, 0);
        let f = tube_fp();
        let s = scheme(&f, "period=[b, a]");
        let c = concat_point(&f, &f.model().parse_element("a").unwrap(), &s).unwrap();
        assert_eq!(c.k, 0);
        assert!(c.f.iter().all(|&v| v == -1));
    }

    #[test]
    fn phi_of_elements() {
        let e = Explorer::new(Arc::new(builtin_free_cyclic()), ExplorationBudget::ball(8, 8));
        let one = GroupElement::identity();
        assert!(phi_prefix_element(&e, &one).unwrap().labels.is_empty());
        let w4 = e.model().parse_element("(ab)^4").unwrap();
        assert_eq!(phi_prefix_element(&e, &w4).unwrap().labels, vec![Letter::power(4)]);
        let f = Explorer::new(Arc::new(builtin_free_product()), ExplorationBudget::ball(5, 5));
        let p = phi_prefix_element(&f, &f.model().parse_element("aba").unwrap()).unwrap();
        assert_eq!(f.model().format_labels(&p.labels), vec!["h:a", "h:b", "h:a"]);
    }

    #[test]
    fn phi_of_schemes() {
        let e = tube_fc();
        let s = scheme(&e, "period=[h:ab^3, x:a]");
        let p = phi_prefix_scheme_measured(&e, &s, 8, 5).unwrap();
        assert!(p.stable);
        assert_eq!(p.value.certified_len, 6);
        assert_eq!(p.value.certified(), &s.labels(6)[..]);
    }

    #[test]
    fn same_limit_alignment() {
        let e = tube_fc();
        let s1 = scheme(&e, "period=[h:ab^3, x:a]");
        let s2 = scheme(&e, "base=a^-1 prefix=[x:a] period=[h:ab^3, x:a]");
        let al = align_same_limit(&e, &s1, &s2, 5, 8).unwrap();
        assert!(!al.is_empty());
        assert!(al.iter().all(|a| a.entrance_gap == ExtNat::Finite(0) && a.exit_gap == ExtNat::Finite(0)));
        let s3 = s1.shifted(e.model(), 2);
        let al = align_same_limit(&e, &s1, &s3, 5, 8).unwrap();
        assert!(al.iter().all(|a| a.entrance_gap == ExtNat::Finite(0)));
        let s4 = scheme(&e, "prefix=[h:ab^4, x:b^-1] period=[h:ab^3, x:a]");
        let al = align_same_limit(&e, &s1, &s4, 5, 8).unwrap();
        assert_eq!(al[0].entrance_gap, ExtNat::Finite(0));
        assert_eq!(al[0].exit_gap, ExtNat::Finite(2));
    }

    #[test]
    fn pigeonhole_constants() {
        let e = Explorer::new(Arc::new(builtin_free_cyclic()), ExplorationBudget::ball(8, 8));
        assert_eq!(pigeonhole_k(&e, 0).unwrap().k, 1);
        assert_eq!(pigeonhole_k(&e, 8).unwrap().k, 81);
        let small = Explorer::new(Arc::new(builtin_free_cyclic()), ExplorationBudget::ball(4, 4));
        assert!(matches!(pigeonhole_k(&small, 8), Err(LabError::WidenWindow(_))));
        let f = Explorer::new(Arc::new(builtin_free_product()), ExplorationBudget::ball(5, 5));
        assert_eq!(pigeonhole_k(&f, 100).unwrap().k, 1);
    }
}
