//! Finite regions of the relative Cayley graph as index-based graphs.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use rand::Rng;

use crate::error::{LabError, Result};
use crate::group_model::{lcp, GroupElement, GroupModel, Letter, SubgroupElement};

pub const UNREACHED: u32 = u32::MAX;

/// The budgeted alphabet `X ⊔ H_L`, sorted in the alphabet order so that
/// label ids compare like letters.
#[derive(Debug)]
pub struct Alphabet {
    pub letters: Vec<Letter>,
    pub inverse: Vec<u16>,
    pub elements: Vec<GroupElement>,
}

impl Alphabet {
    pub fn new(model: &GroupModel, h_budget: usize) -> Alphabet {
        let mut letters: Vec<Letter> = (0..model.free_rank())
            .flat_map(|g| [Letter::x(g), Letter::x_inv(g)])
            .collect();
        for f in 0..model.num_families() as u8 {
            for e in model.h_enumerate(f, h_budget) {
                letters.push(Letter::H { family: f, elem: e });
            }
        }
        letters.sort_by(|a, b| model.letter_cmp(a, b));
        let inverse = letters
            .iter()
            .map(|l| {
                let li = model.invert_letter(l);
                letters.iter().position(|m| *m == li).expect("alphabet closed under inverse") as u16
            })
            .collect();
        let elements = letters.iter().map(|l| model.letter_element(l)).collect();
        Alphabet {
            letters,
            inverse,
            elements,
        }
    }

    pub fn id_of(&self, l: &Letter) -> Option<u16> {
        self.letters.iter().position(|m| m == l).map(|i| i as u16)
    }
}

/// Vertex set of an exploration.
#[derive(Clone, Debug)]
pub enum Region {
    /// `x_length(v) ≤ radius`.
    Ball { radius: usize },
    /// X-distance from `v` to the X-geodesic between the anchors `≤ radius`.
    Tube {
        anchor: GroupElement,
        anchor_inv: GroupElement,
        target: GroupElement,
        radius: usize,
    },
}

impl Region {
    pub fn tube(model: &GroupModel, f: &GroupElement, g: &GroupElement, radius: usize) -> Region {
        Region::Tube {
            anchor: f.clone(),
            anchor_inv: model.inv(f),
            target: model.left_quotient(f, g),
            radius,
        }
    }

    pub fn contains(&self, model: &GroupModel, v: &GroupElement) -> bool {
        match self {
            Region::Ball { radius } => model.x_length(v) <= *radius,
            Region::Tube {
                anchor_inv,
                target,
                radius,
                ..
            } => {
                let u = model.mul(anchor_inv, v);
                model.x_length(&u) - lcp(&u, target) <= *radius
            }
        }
    }

    pub fn describe(&self, model: &GroupModel) -> String {
        match self {
            Region::Ball { radius } => format!("ball radius {radius}"),
            Region::Tube {
                anchor,
                target,
                radius,
                ..
            } => format!(
                "tube radius {radius} around [{}, {}]",
                model.format_element(anchor),
                model.format_element(&model.mul(anchor, target))
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub to: u32,
    pub label: u16,
}

/// A finite induced subgraph of `Γ(G, X ⊔ H_L)`.
#[derive(Debug)]
pub struct LocalGraph {
    pub alphabet: Arc<Alphabet>,
    vertices: Vec<GroupElement>,
    index: HashMap<GroupElement, u32>,
    offsets: Vec<u32>,
    edges: Vec<Edge>,
    pub region: String,
}

impl LocalGraph {
    /// Floods the region from `seeds`; every seed must lie in the region.
    pub fn build(
        model: &GroupModel,
        alphabet: Arc<Alphabet>,
        region: &Region,
        seeds: &[GroupElement],
    ) -> Result<LocalGraph> {
        let desc = region.describe(model);
        let mut vertices: Vec<GroupElement> = Vec::new();
        let mut index: HashMap<GroupElement, u32> = HashMap::new();
        for s in seeds {
            if !region.contains(model, s) {
                return Err(LabError::OutOfRange {
                    word: model.format_element(s),
                    region: desc,
                });
            }
            if !index.contains_key(s) {
                index.insert(s.clone(), vertices.len() as u32);
                vertices.push(s.clone());
            }
        }
        let mut adj: Vec<Vec<Edge>> = Vec::new();
        let mut next = 0;
        while next < vertices.len() {
            let v = vertices[next].clone();
            let mut out = Vec::new();
            for (label, l) in alphabet.letters.iter().enumerate() {
                let w = model.mul_letter(&v, l);
                let id = match index.get(&w) {
                    Some(&id) => id,
                    None => {
                        if !region.contains(model, &w) {
                            continue;
                        }
                        let id = vertices.len() as u32;
                        index.insert(w.clone(), id);
                        vertices.push(w);
                        id
                    }
                };
                out.push(Edge {
                    to: id,
                    label: label as u16,
                });
            }
            adj.push(out);
            next += 1;
        }
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut edges = Vec::new();
        offsets.push(0);
        for out in adj {
            edges.extend(out);
            offsets.push(edges.len() as u32);
        }
        Ok(LocalGraph {
            alphabet,
            vertices,
            index,
            offsets,
            edges,
            region: desc,
        })
    }

    /// Assembles a graph from vertices and per-vertex out-edges.
    pub fn from_parts(
        alphabet: Arc<Alphabet>,
        vertices: Vec<GroupElement>,
        adj: Vec<Vec<Edge>>,
        region: String,
    ) -> Result<LocalGraph> {
        if adj.len() != vertices.len() {
            return Err(LabError::Load("adjacency and vertex counts differ".into()));
        }
        let index: HashMap<GroupElement, u32> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();
        if index.len() != vertices.len() {
            return Err(LabError::Load("duplicate vertex".into()));
        }
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut edges = Vec::new();
        offsets.push(0);
        for out in adj {
            for e in &out {
                if e.to as usize >= vertices.len() || e.label as usize >= alphabet.letters.len() {
                    return Err(LabError::Load("edge out of range".into()));
                }
            }
            edges.extend(out);
            offsets.push(edges.len() as u32);
        }
        Ok(LocalGraph {
            alphabet,
            vertices,
            index,
            offsets,
            edges,
            region,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: u32) -> &GroupElement {
        &self.vertices[i as usize]
    }

    pub fn vertices(&self) -> &[GroupElement] {
        &self.vertices
    }

    pub fn id(&self, g: &GroupElement) -> Option<u32> {
        self.index.get(g).copied()
    }

    pub fn out(&self, v: u32) -> &[Edge] {
        &self.edges[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    pub fn letter(&self, label: u16) -> Letter {
        self.alphabet.letters[label as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn bfs(&self, src: u32) -> Vec<u32> {
        self.bfs_filtered(src, |_, _| true)
    }

    /// BFS using only edges accepted by `allow(source, edge)`.
    pub fn bfs_filtered(&self, src: u32, allow: impl Fn(u32, &Edge) -> bool) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.len()];
        let mut queue = VecDeque::new();
        dist[src as usize] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            let d = dist[v as usize] + 1;
            for e in self.out(v) {
                if dist[e.to as usize] == UNREACHED && allow(v, e) {
                    dist[e.to as usize] = d;
                    queue.push_back(e.to);
                }
            }
        }
        dist
    }

    /// The geodesic DAG from `src` (with distances `dist`) to `targets`:
    /// the backward closure of the targets along distance-decreasing edges.
    pub fn dag(self: &Arc<Self>, src: u32, dist: Arc<Vec<u32>>, targets: &[u32]) -> GeoDag {
        let mut out: HashMap<u32, Vec<Edge>> = HashMap::new();
        let mut seen: HashSet<u32> = targets.iter().copied().collect();
        let mut stack: Vec<u32> = targets.to_vec();
        while let Some(w) = stack.pop() {
            let dw = dist[w as usize];
            if dw == 0 || dw == UNREACHED {
                continue;
            }
            for e in self.out(w) {
                if dist[e.to as usize] + 1 == dw {
                    out.entry(e.to).or_default().push(Edge {
                        to: w,
                        label: self.alphabet.inverse[e.label as usize],
                    });
                    if seen.insert(e.to) {
                        stack.push(e.to);
                    }
                }
            }
        }
        for list in out.values_mut() {
            list.sort_by_key(|e| (e.label, e.to));
        }
        let mut vertices: Vec<u32> = seen.into_iter().collect();
        vertices.sort_by_key(|&v| (dist[v as usize], v));
        GeoDag {
            graph: self.clone(),
            source: src,
            targets: targets.to_vec(),
            dist,
            out,
            vertices,
        }
    }
}

/// All geodesics from a source to a target set inside a [`LocalGraph`].
#[derive(Clone, Debug)]
pub struct GeoDag {
    pub graph: Arc<LocalGraph>,
    pub source: u32,
    pub targets: Vec<u32>,
    pub dist: Arc<Vec<u32>>,
    out: HashMap<u32, Vec<Edge>>,
    vertices: Vec<u32>,
}

impl GeoDag {
    pub fn length(&self) -> u32 {
        self.targets
            .first()
            .map(|&t| self.dist[t as usize])
            .unwrap_or(0)
    }

    pub fn out(&self, v: u32) -> &[Edge] {
        self.out.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// DAG vertices ordered by distance from the source.
    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn depth(&self, v: u32) -> u32 {
        self.dist[v as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, Edge)> + '_ {
        self.vertices
            .iter()
            .flat_map(move |&v| self.out(v).iter().map(move |e| (v, *e)))
    }

    pub fn is_target(&self, v: u32) -> bool {
        self.targets.contains(&v)
    }

    /// Label sequences of geodesics in lexicographic order, up to `cap`.
    /// The flag is set when more paths exist.
    pub fn paths(&self, cap: usize) -> (Vec<Vec<u16>>, bool) {
        let mut found = Vec::new();
        let mut overflow = false;
        let mut stack: Vec<u16> = Vec::new();
        self.walk(self.source, &mut stack, &mut found, cap, &mut overflow);
        (found, overflow)
    }

    fn walk(
        &self,
        v: u32,
        stack: &mut Vec<u16>,
        found: &mut Vec<Vec<u16>>,
        cap: usize,
        overflow: &mut bool,
    ) {
        if *overflow {
            return;
        }
        if self.is_target(v) {
            if found.len() == cap {
                *overflow = true;
            } else {
                found.push(stack.clone());
            }
            return;
        }
        for e in self.out(v) {
            stack.push(e.label);
            self.walk(e.to, stack, found, cap, overflow);
            stack.pop();
        }
    }

    /// Lexicographically least geodesic, chosen greedily letter by letter.
    pub fn lex_min(&self) -> Vec<u16> {
        let mut v = self.source;
        let mut labels = Vec::new();
        while !self.is_target(v) {
            let e = self.out(v)[0];
            labels.push(e.label);
            v = e.to;
        }
        labels
    }

    /// A geodesic picked by uniform choices among outgoing DAG edges.
    pub fn random_path<R: Rng>(&self, rng: &mut R) -> Vec<u16> {
        let mut v = self.source;
        let mut labels = Vec::new();
        while !self.is_target(v) {
            let out = self.out(v);
            let e = out[rng.gen_range(0..out.len())];
            labels.push(e.label);
            v = e.to;
        }
        labels
    }

    /// Whether some geodesic avoids every edge rejected by `keep`.
    pub fn has_path_avoiding(&self, keep: impl Fn(u32, &Edge) -> bool) -> bool {
        let mut reach: HashSet<u32> = HashSet::new();
        reach.insert(self.source);
        for &v in &self.vertices {
            if !reach.contains(&v) {
                continue;
            }
            if self.is_target(v) {
                return true;
            }
            for e in self.out(v) {
                if keep(v, e) {
                    reach.insert(e.to);
                }
            }
        }
        false
    }

    /// Number of geodesics (saturating).
    pub fn count(&self) -> u64 {
        let mut ways: HashMap<u32, u64> = HashMap::new();
        ways.insert(self.source, 1);
        let mut total = 0u64;
        for &v in &self.vertices {
            let w = *ways.get(&v).unwrap_or(&0);
            if self.is_target(v) {
                total = total.saturating_add(w);
                continue;
            }
            for e in self.out(v) {
                let slot = ways.entry(e.to).or_insert(0);
                *slot = slot.saturating_add(w);
            }
        }
        total
    }

    pub fn letters(&self, labels: &[u16]) -> Vec<Letter> {
        labels.iter().map(|&l| self.graph.letter(l)).collect()
    }

    pub fn h_elem(&self, label: u16) -> Option<(u8, SubgroupElement)> {
        match self.graph.letter(label) {
            Letter::H { family, elem } => Some((family, elem)),
            Letter::X { .. } => None,
        }
    }
}
