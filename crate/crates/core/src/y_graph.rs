//! The set `Y = {y : S(1, y; D) = ∅}` and the Cayley graph `Γ(G, Y ⊔ H)`.
//!
//! `Y` is infinite, so Y-edges are limited to letters of X-length at most
//! `y_radius` (the radius of the explorer's ball). H-edges are decided
//! exactly. Distances are BFS distances over the vertices of a region graph.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, OnceLock};

use parking_lot::Mutex;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::group_model::{GroupElement, GroupModel};
use crate::relative_graph::{ExplorationBudget, ExtNat, Explorer, LocalGraph, Measured, RegionKind, UNREACHED};
use crate::separating_cosets::{essential_gap, sep_cosets_measured};

/// Lazily materialized `Y ∩ ball` with Y-graph distances.
pub struct YGraph {
    explorer: Arc<Explorer>,
    d: u64,
    y_radius: usize,
    memo: Mutex<HashMap<GroupElement, bool>>,
    letters: OnceLock<(Vec<GroupElement>, HashSet<GroupElement>)>,
    sources: Mutex<HashMap<(ExplorationBudget, GroupElement), Arc<Vec<u32>>>>,
}

impl std::fmt::Debug for YGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "YGraph(D={}, y_radius={}, {:?})", self.d, self.y_radius, self.explorer)
    }
}

/// Both sides of the quasi-isometry inequality for one pair.
#[derive(Clone, Debug, Serialize)]
pub struct QiCheck {
    pub sep_count: usize,
    pub d_y: ExtNat,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub stable: bool,
}

/// Hausdorff distance in `d_Y` between X⊔H- and Y⊔H-geodesics.
#[derive(Clone, Debug, Serialize)]
pub struct HausdorffReport {
    pub gap: u32,
    pub x_length: u32,
    pub y_length: u32,
    pub estimate: bool,
}

/// Result of an acylindricity scan.
#[derive(Clone, Debug, Serialize)]
pub struct AcylindricityReport {
    pub epsilon: u32,
    pub min_separation: u64,
    pub pairs_used: usize,
    pub max_count: usize,
    pub witness: Option<(String, String)>,
    pub estimate: bool,
}

impl YGraph {
    /// `explorer` must use a ball region; its radius is the Y-letter radius.
    pub fn new(explorer: Arc<Explorer>, d: u64) -> Result<YGraph> {
        if explorer.budget().region != RegionKind::Ball {
            return Err(LabError::Input("the Y-graph needs a ball explorer".into()));
        }
        let y_radius = explorer.budget().x_radius;
        Ok(YGraph {
            explorer,
            d,
            y_radius,
            memo: Mutex::new(HashMap::new()),
            letters: OnceLock::new(),
            sources: Mutex::new(HashMap::new()),
        })
    }

    pub fn explorer(&self) -> &Explorer {
        &self.explorer
    }

    pub fn model(&self) -> &GroupModel {
        self.explorer.model()
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn y_radius(&self) -> usize {
        self.y_radius
    }

    /// Whether `S(1, y; D) = ∅`.
    pub fn y_member(&self, y: &GroupElement) -> Result<bool> {
        if y.is_identity() {
            return Ok(true);
        }
        let cached = self.memo.lock().get(y).copied();
        if let Some(v) = cached {
            return Ok(v);
        }
        let v = empty_sep_set(&self.explorer, y, self.d)?;
        self.memo.lock().insert(y.clone(), v);
        Ok(v)
    }

    /// `y_member` with a stability flag from the widened budget.
    pub fn y_member_measured(&self, y: &GroupElement) -> Result<Measured<bool>> {
        let value = self.y_member(y)?;
        let stable = y.is_identity()
            || empty_sep_set(self.explorer.wider(), y, self.d).map(|w| w == value).unwrap_or(false);
        Ok(Measured {
            value,
            stable,
            budget: self.explorer.budget(),
        })
    }

    /// `Y ∩ ball(y_radius)` including the identity, in shortlex order.
    pub fn members(&self) -> Result<Vec<GroupElement>> {
        let mut out = vec![GroupElement::identity()];
        out.extend(self.y_letters()?.0.iter().cloned());
        Ok(out)
    }

    fn y_letters(&self) -> Result<&(Vec<GroupElement>, HashSet<GroupElement>)> {
        if let Some(l) = self.letters.get() {
            return Ok(l);
        }
        let mut list = Vec::new();
        for y in self.model().ball_elements(self.y_radius).into_iter().skip(1) {
            if self.y_member(&y)? {
                list.push(y);
            }
        }
        let set = list.iter().cloned().collect();
        Ok(self.letters.get_or_init(|| (list, set)))
    }

    /// Whether `u` and `v` span an edge of the Y-graph.
    pub fn adjacent(&self, u: &GroupElement, v: &GroupElement) -> Result<bool> {
        let q = self.model().left_quotient(u, v);
        if q.is_identity() {
            return Ok(false);
        }
        if self.model().family_of(&q).is_some() {
            return Ok(true);
        }
        Ok(self.model().x_length(&q) <= self.y_radius && self.y_letters()?.1.contains(&q))
    }

    /// Generators usable inside `graph` from `src`: Y-letters and every
    /// H-element short enough to join two region vertices.
    fn generators(&self, graph: &LocalGraph, src: &GroupElement) -> Result<Vec<GroupElement>> {
        let model = self.model();
        let reach = graph
            .vertices()
            .iter()
            .map(|w| model.x_length(&model.left_quotient(src, w)))
            .max()
            .unwrap_or(0);
        let mut gens = self.y_letters()?.0.clone();
        for f in 0..model.num_families() as u8 {
            for h in model.h_enumerate(f, 2 * reach) {
                let el = model.letter_element(&crate::group_model::Letter::H { family: f, elem: h });
                if !self.y_letters()?.1.contains(&el) {
                    gens.push(el);
                }
            }
        }
        Ok(gens)
    }

    /// Level BFS over the vertices of `graph`, stopping once `target` is
    /// settled. Each level either pushes generators from the frontier or
    /// pulls unvisited vertices, whichever is cheaper.
    fn bfs(&self, graph: &LocalGraph, src: u32, target: Option<u32>) -> Result<Vec<u32>> {
        let n = graph.len();
        let gens = self.generators(graph, graph.vertex(src))?;
        let mut dist = vec![UNREACHED; n];
        dist[src as usize] = 0;
        let mut frontier = vec![src];
        let mut unvisited = n - 1;
        let mut level = 0;
        while !frontier.is_empty() && unvisited > 0 {
            if let Some(t) = target {
                if dist[t as usize] != UNREACHED {
                    break;
                }
            }
            level += 1;
            let push_cost = frontier.len() * gens.len();
            let pull_cost = unvisited * frontier.len().min(gens.len());
            let mut next = Vec::new();
            if push_cost <= pull_cost {
                for &v in &frontier {
                    for s in &gens {
                        let w = self.model().mul(graph.vertex(v), s);
                        if let Some(id) = graph.id(&w) {
                            if dist[id as usize] == UNREACHED {
                                dist[id as usize] = level;
                                next.push(id);
                            }
                        }
                    }
                }
            } else {
                let in_frontier: HashSet<u32> = frontier.iter().copied().collect();
                for u in 0..n as u32 {
                    if dist[u as usize] != UNREACHED {
                        continue;
                    }
                    let uv = graph.vertex(u);
                    let hit = if frontier.len() <= gens.len() {
                        let mut hit = false;
                        for &v in &frontier {
                            if self.adjacent(graph.vertex(v), uv)? {
                                hit = true;
                                break;
                            }
                        }
                        hit
                    } else {
                        gens.iter().any(|s| {
                            graph
                                .id(&self.model().mul(uv, s))
                                .is_some_and(|w| in_frontier.contains(&w))
                        })
                    };
                    if hit {
                        next.push(u);
                    }
                }
                for &u in &next {
                    dist[u as usize] = level;
                }
            }
            unvisited -= next.len();
            frontier = next;
        }
        Ok(dist)
    }

    /// Y-distances from `f` to every vertex of the explorer's ball, cached.
    fn distances_from(&self, region: &Explorer, f: &GroupElement) -> Result<(Arc<LocalGraph>, Arc<Vec<u32>>)> {
        let loc = region.locate(f, f)?;
        let key = (region.budget(), f.clone());
        let cached = self.sources.lock().get(&key).cloned();
        if let Some(d) = cached {
            return Ok((loc.graph, d));
        }
        let d = Arc::new(self.bfs(&loc.graph, loc.src, None)?);
        let mut s = self.sources.lock();
        if s.len() > 64 {
            s.clear();
        }
        s.insert(key, d.clone());
        Ok((loc.graph, d))
    }

    /// `d_{Y∪H}(f, g)` over the vertices of `region`.
    pub fn y_distance_in(&self, region: &Explorer, f: &GroupElement, g: &GroupElement) -> Result<ExtNat> {
        if f == g {
            return Ok(ExtNat::Finite(0));
        }
        if self.adjacent(f, g)? {
            return Ok(ExtNat::Finite(1));
        }
        let d = if region.budget().region == RegionKind::Ball {
            let (graph, dist) = self.distances_from(region, f)?;
            let id = graph.id(g).ok_or_else(|| LabError::OutOfRange {
                word: self.model().format_element(g),
                region: graph.region.clone(),
            })?;
            dist[id as usize]
        } else {
            let loc = region.locate(f, g)?;
            self.bfs(&loc.graph, loc.src, Some(loc.dst))?[loc.dst as usize]
        };
        Ok(if d == UNREACHED {
            ExtNat::InfinityAtBudget
        } else {
            ExtNat::Finite(d as u64)
        })
    }

    /// `d_{Y∪H}(f, g)` inside the explorer's ball.
    pub fn y_distance(&self, f: &GroupElement, g: &GroupElement) -> Result<ExtNat> {
        self.y_distance_in(&self.explorer, f, g)
    }

    /// `d_{Y∪H}(f, g)` with stability. Values up to 2 cannot drop further,
    /// since 0 and 1 are decided without the region; larger values are
    /// recomputed over the widened region.
    pub fn y_distance_measured(&self, f: &GroupElement, g: &GroupElement) -> Result<Measured<ExtNat>> {
        let value = self.y_distance(f, g)?;
        let stable = match value {
            ExtNat::Finite(v) if v <= 2 => true,
            _ => {
                let wide = self.explorer.wider();
                let d = if wide.budget().region == RegionKind::Ball {
                    let (graph, dist) = self.distances_from(wide, f)?;
                    graph.id(g).map(|id| dist[id as usize]).unwrap_or(UNREACHED)
                } else {
                    let loc = wide.locate(f, g)?;
                    self.bfs(&loc.graph, loc.src, Some(loc.dst))?[loc.dst as usize]
                };
                d != UNREACHED && value.finite() == Some(d as u64)
            }
        };
        Ok(Measured {
            value,
            stable,
            budget: self.explorer.budget(),
        })
    }

    /// `½(d_Y(f,g) − 1) ≤ |S(f,g;D)| ≤ 3·d_Y(f,g)`.
    pub fn qi_gap(&self, f: &GroupElement, g: &GroupElement) -> Result<QiCheck> {
        let s = sep_cosets_measured(&self.explorer, f, g, self.d)?;
        let dy = self.y_distance_measured(f, g)?;
        let n = s.value.len() as u64;
        let (lower_ok, upper_ok) = match dy.value {
            ExtNat::Finite(v) => (v <= 2 * n + 1, n <= 3 * v),
            _ => (false, false),
        };
        Ok(QiCheck {
            sep_count: s.value.len(),
            d_y: dy.value,
            lower_ok,
            upper_ok,
            stable: s.stable && dy.stable && dy.value.finite().is_some(),
        })
    }

    /// Whether `d_Y(u, w) ≤ t`.
    fn within(&self, u: &GroupElement, w: &GroupElement, t: u32) -> Result<bool> {
        match t {
            0 => Ok(u == w),
            1 => Ok(u == w || self.adjacent(u, w)?),
            _ => match self.y_distance(u, w)? {
                ExtNat::Finite(v) => Ok(v <= t as u64),
                _ => Ok(false),
            },
        }
    }

    /// Largest Hausdorff distance in `d_Y` between an X⊔H-geodesic and a
    /// Y⊔H-geodesic from `f` to `g`, over all such pairs in the ball.
    pub fn hausdorff_gap(&self, f: &GroupElement, g: &GroupElement) -> Result<HausdorffReport> {
        let e = &*self.explorer;
        let xdag = e.geodesic_dag(f, g)?;
        if f == g {
            return Ok(HausdorffReport {
                gap: 0,
                x_length: 0,
                y_length: 0,
                estimate: true,
            });
        }
        let (graph, from_f) = self.distances_from(e, f)?;
        let (_, from_g) = self.distances_from(e, g)?;
        let gf = graph.id(g).expect("located");
        let n = from_f[gf as usize];
        if n == UNREACHED {
            return Err(LabError::Partiality("endpoints not Y-connected in the ball".into()));
        }
        // Layers of the Y-geodesic DAG.
        let mut layers: Vec<Vec<u32>> = vec![Vec::new(); n as usize + 1];
        for v in 0..graph.len() as u32 {
            let (a, b) = (from_f[v as usize], from_g[v as usize]);
            if a != UNREACHED && b != UNREACHED && a + b == n {
                layers[a as usize].push(v);
            }
        }
        let mut y_edges: Vec<Vec<(u32, u32)>> = Vec::new();
        for w in layers.windows(2) {
            let mut es = Vec::new();
            for &a in &w[0] {
                for &b in &w[1] {
                    if self.adjacent(graph.vertex(a), graph.vertex(b))? {
                        es.push((a, b));
                    }
                }
            }
            y_edges.push(es);
        }
        let xverts: Vec<GroupElement> = xdag
            .vertices()
            .iter()
            .map(|&v| xdag.graph.vertex(v).clone())
            .collect();
        let mut gap = 0;
        for t in 1.. {
            // Some Y-geodesic avoids the (t−1)-neighborhood of an X-vertex?
            let mut exceeded = false;
            for u in &xverts {
                let mut reach: HashSet<u32> = HashSet::new();
                if !self.within(u, graph.vertex(layers[0][0]), t - 1)? {
                    reach.insert(layers[0][0]);
                }
                for es in &y_edges {
                    for &(a, b) in es {
                        if reach.contains(&a) && !reach.contains(&b) && !self.within(u, graph.vertex(b), t - 1)? {
                            reach.insert(b);
                        }
                    }
                }
                if reach.contains(&gf) {
                    exceeded = true;
                    break;
                }
            }
            // Some X-geodesic avoids the (t−1)-neighborhood of a Y-vertex?
            if !exceeded {
                for layer in &layers {
                    for &w in layer {
                        let wv = graph.vertex(w);
                        let mut bad = HashMap::new();
                        for (i, u) in xverts.iter().enumerate() {
                            bad.insert(xdag.vertices()[i], self.within(u, wv, t - 1)?);
                        }
                        if xdag.has_path_avoiding(|v, edge| !bad[&v] && !bad[&edge.to]) && !bad[&xdag.source] {
                            exceeded = true;
                            break;
                        }
                    }
                    if exceeded {
                        break;
                    }
                }
            }
            if !exceeded {
                break;
            }
            gap = t;
        }
        Ok(HausdorffReport {
            gap,
            x_length: xdag.length(),
            y_length: n,
            estimate: true,
        })
    }

    /// `max |{g ∈ ball(g_radius) : d_Y(x, gx) ≤ ε, d_Y(y, gy) ≤ ε}|` over
    /// pairs with `d_Y(x, y) ≥ min_separation`.
    pub fn acylindricity_probe(
        &self,
        epsilon: u32,
        min_separation: u64,
        g_radius: usize,
        pairs: &[(GroupElement, GroupElement)],
    ) -> Result<AcylindricityReport> {
        let model = self.model();
        let ball = model.ball_elements(g_radius);
        let mut report = AcylindricityReport {
            epsilon,
            min_separation,
            pairs_used: 0,
            max_count: 0,
            witness: None,
            estimate: true,
        };
        for (x, y) in pairs {
            match self.y_distance(x, y)? {
                ExtNat::Finite(v) if v >= min_separation => {}
                _ => continue,
            }
            report.pairs_used += 1;
            let mut count = 0;
            for g in &ball {
                let gx = model.mul(g, x);
                let gy = model.mul(g, y);
                if self.within(x, &gx, epsilon)? && self.within(y, &gy, epsilon)? {
                    count += 1;
                }
            }
            if count > report.max_count {
                report.max_count = count;
                report.witness = Some((model.format_element(x), model.format_element(y)));
            }
        }
        Ok(report)
    }
}

/// Whether no geodesic from 1 to `y` has an essential H-edge.
fn empty_sep_set(e: &Explorer, y: &GroupElement, d: u64) -> Result<bool> {
    let dag = e.geodesic_dag(&GroupElement::identity(), y)?;
    for (v, edge) in dag.edges() {
        if let Some((family, _)) = dag.h_elem(edge.label) {
            if essential_gap(e, family, dag.graph.vertex(v), dag.graph.vertex(edge.to), d)?.is_some() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_model::{builtin_free_cyclic, builtin_free_product};

    fn fc(r: usize, d: u64) -> YGraph {
        YGraph::new(
            Arc::new(Explorer::new(Arc::new(builtin_free_cyclic()), ExplorationBudget::ball(r, r))),
            d,
        )
        .unwrap()
    }

    fn fp(r: usize) -> YGraph {
        YGraph::new(
            Arc::new(Explorer::new(Arc::new(builtin_free_product()), ExplorationBudget::ball(r, r))),
            1,
        )
        .unwrap()
    }

    fn el(y: &YGraph, s: &str) -> GroupElement {
        y.model().parse_element(s).unwrap()
    }

    #[test]
    fn membership() {
        let y = fc(7, 5);
        assert!(y.y_member(&GroupElement::identity()).unwrap());
        assert!(y.y_member(&el(&y, "(ab)^2")).unwrap());
        assert!(!y.y_member(&el(&y, "(ab)^3")).unwrap());
        assert!(y.y_member(&el(&y, "a")).unwrap());
        assert!(y.y_member_measured(&el(&y, "b^2a")).unwrap().stable);
    }

    #[test]
    fn free_product_y_is_trivial() {
        let y = fp(4);
        assert_eq!(y.members().unwrap().len(), 1);
        let one = GroupElement::identity();
        assert_eq!(y.y_distance(&one, &el(&y, "aba")).unwrap(), ExtNat::Finite(3));
        let q = y.qi_gap(&one, &el(&y, "aba")).unwrap();
        assert_eq!((q.sep_count, q.d_y), (3, ExtNat::Finite(3)));
        assert!(q.lower_ok && q.upper_ok && q.stable);
    }

    #[test]
    fn distances() {
        let y = fc(6, 5);
        let one = GroupElement::identity();
        let m = y.model();
        let w6 = m.pow(&el(&y, "ab"), 6);
        assert_eq!(y.y_distance(&one, &w6).unwrap(), ExtNat::Finite(1));
        let g = el(&y, "ab^2");
        assert_eq!(y.y_distance(&g, &g).unwrap(), ExtNat::Finite(0));
        let q = y.qi_gap(&one, &el(&y, "(ab)^3")).unwrap();
        assert_eq!((q.sep_count, q.d_y), (1, ExtNat::Finite(1)));
        assert!(q.lower_ok && q.upper_ok);
        let q = y.qi_gap(&g, &g).unwrap();
        assert_eq!((q.sep_count, q.d_y), (0, ExtNat::Finite(0)));
    }

    #[test]
    fn hausdorff_samples() {
        let y = fp(5);
        let one = GroupElement::identity();
        assert_eq!(y.hausdorff_gap(&one, &el(&y, "ab^2a")).unwrap().gap, 0);
        assert_eq!(y.hausdorff_gap(&one, &one).unwrap().gap, 0);
        let y = fc(7, 5);
        assert!(y.hausdorff_gap(&one, &el(&y, "b(ab)^3")).unwrap().gap <= 2);
    }

    #[test]
    fn acylindricity_samples() {
        let y = fp(5);
        let one = GroupElement::identity();
        let r = y.acylindricity_probe(0, 0, 3, &[(one.clone(), one.clone())]).unwrap();
        assert_eq!(r.max_count, 1);
        assert_eq!(y.acylindricity_probe(1, 3, 3, &[]).unwrap().max_count, 0);
        let pairs: Vec<_> = y
            .model()
            .ball_elements(3)
            .into_iter()
            .map(|g| (one.clone(), g))
            .collect();
        let r = y.acylindricity_probe(1, 3, 3, &pairs).unwrap();
        assert!(r.max_count <= 8, "{r:?}");
    }
}
