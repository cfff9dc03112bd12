//! Brute-force reference implementations shared by the acceptance tests.
//!
//! Nothing here calls into the library: words, multiplication, the region
//! graph, BFS, geodesic enumeration, the relative metric, separating cosets
//! and the Y-set are all recomputed from scratch. Conversion to library
//! elements goes through the textual word syntax only.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

/// The two reference groups: `F(a,b)` with `H = ⟨ab⟩`, and `Z/3 * Z/5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    FreeCyclic,
    FreeProduct,
}

/// A normal-form word. Free group letters are `±1` (a) and `±2` (b).
/// Free product syllables are `(family, exponent)` packed as
/// `10·family + exponent`.
pub type Word = Vec<i8>;

#[derive(Clone, Debug)]
pub struct Label {
    pub elem: Word,
    /// `(family, k)` for subgroup letters: the power of `ab`, or the
    /// exponent in the finite factor.
    pub h: Option<(u8, i32)>,
    /// Position in the alphabet order.
    pub token: u32,
}

pub const UNREACHED: u32 = u32::MAX;

pub struct Region {
    pub kind: Kind,
    pub radius: usize,
    pub h_budget: usize,
    pub labels: Vec<Label>,
    pub verts: Vec<Word>,
    pub index: HashMap<Word, u32>,
    pub adj: Vec<Vec<(u32, u16)>>,
}

pub fn order(family: u8) -> i8 {
    if family == 0 {
        3
    } else {
        5
    }
}

pub fn mul(kind: Kind, u: &[i8], v: &[i8]) -> Word {
    let mut out: Word = u.to_vec();
    for &x in v {
        push(kind, &mut out, x);
    }
    out
}

fn push(kind: Kind, w: &mut Word, x: i8) {
    match kind {
        Kind::FreeCyclic => {
            if w.last() == Some(&-x) {
                w.pop();
            } else {
                w.push(x);
            }
        }
        Kind::FreeProduct => {
            let fam = (x / 10) as u8;
            match w.last() {
                Some(&y) if (y / 10) as u8 == fam => {
                    w.pop();
                    let e = (y % 10 + x % 10) % order(fam);
                    if e != 0 {
                        w.push(10 * fam as i8 + e);
                    }
                }
                _ => w.push(x),
            }
        }
    }
}

pub fn inv(kind: Kind, u: &[i8]) -> Word {
    u.iter()
        .rev()
        .map(|&x| match kind {
            Kind::FreeCyclic => -x,
            Kind::FreeProduct => {
                let fam = x / 10;
                10 * fam + (order(fam as u8) - x % 10)
            }
        })
        .collect()
}

/// `ab` raised to `k`.
pub fn w_power(k: i32) -> Word {
    let unit: [i8; 2] = if k > 0 { [1, 2] } else { [-2, -1] };
    (0..k.unsigned_abs()).flat_map(|_| unit).collect()
}

/// `Some(k)` when `u = (ab)^k` (including `k = 0`).
pub fn h_power(u: &[i8]) -> Option<i32> {
    if u.len() % 2 != 0 {
        return None;
    }
    let k = (u.len() / 2) as i32;
    if *u == w_power(k)[..] {
        Some(k)
    } else if *u == w_power(-k)[..] {
        Some(-k)
    } else {
        None
    }
}

/// Membership of `u` in `H_family`, as the exponent.
pub fn h_member(kind: Kind, u: &[i8], family: u8) -> Option<i32> {
    match kind {
        Kind::FreeCyclic => h_power(u),
        Kind::FreeProduct => match u {
            [] => Some(0),
            [x] if (x / 10) as u8 == family => Some((x % 10) as i32),
            _ => None,
        },
    }
}

pub fn same_coset(kind: Kind, family: u8, u: &[i8], v: &[i8]) -> bool {
    h_member(kind, &mul(kind, &inv(kind, u), v), family).is_some()
}

pub fn to_text(kind: Kind, u: &[i8]) -> String {
    if u.is_empty() {
        return "1".into();
    }
    u.iter()
        .map(|&x| match kind {
            Kind::FreeCyclic => match x {
                1 => "a".to_string(),
                -1 => "a^-1".to_string(),
                2 => "b".to_string(),
                _ => "b^-1".to_string(),
            },
            Kind::FreeProduct => {
                let name = if x / 10 == 0 { "a" } else { "b" };
                match x % 10 {
                    1 => name.to_string(),
                    e => format!("{name}^{e}"),
                }
            }
        })
        .collect()
}

/// Alphabet in the documented order: X letters by (generator, + before −),
/// then subgroup letters by (family, shortlex of the spelled-out word).
pub fn alphabet(kind: Kind, h_budget: usize) -> Vec<Label> {
    let mut out = Vec::new();
    match kind {
        Kind::FreeCyclic => {
            for x in [1i8, -1, 2, -2] {
                out.push(Label {
                    elem: vec![x],
                    h: None,
                    token: 0,
                });
            }
            let mut hs: Vec<i32> = (1..=(h_budget / 2) as i32).flat_map(|k| [k, -k]).collect();
            let rank = |x: i8| [1i8, -1, 2, -2].iter().position(|&y| y == x).unwrap();
            hs.sort_by(|&p, &q| {
                let (a, b) = (w_power(p), w_power(q));
                a.len()
                    .cmp(&b.len())
                    .then_with(|| a.iter().map(|&x| rank(x)).cmp(b.iter().map(|&x| rank(x))))
            });
            for k in hs {
                out.push(Label {
                    elem: w_power(k),
                    h: Some((0, k)),
                    token: 0,
                });
            }
        }
        Kind::FreeProduct => {
            for fam in 0..2u8 {
                for e in 1..order(fam) {
                    out.push(Label {
                        elem: vec![10 * fam as i8 + e],
                        h: Some((fam, e as i32)),
                        token: 0,
                    });
                }
            }
        }
    }
    for (i, l) in out.iter_mut().enumerate() {
        l.token = i as u32;
    }
    out
}

pub fn xlen(u: &[i8]) -> usize {
    u.len()
}

/// All normal forms of length at most `r`, by breadth-first growth.
pub fn ball(kind: Kind, r: usize) -> Vec<Word> {
    let gens: Vec<i8> = match kind {
        Kind::FreeCyclic => vec![1, -1, 2, -2],
        Kind::FreeProduct => vec![1, 2, 11, 12, 13, 14],
    };
    let mut seen: HashSet<Word> = HashSet::new();
    let mut out = vec![Vec::new()];
    seen.insert(Vec::new());
    let mut layer = vec![Vec::new()];
    for _ in 0..r {
        let mut next = Vec::new();
        for w in &layer {
            for &g in &gens {
                let v = mul(kind, w, &[g]);
                if v.len() == w.len() + 1 && seen.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

impl Region {
    /// The induced subgraph on the ball of `radius` with subgroup letters
    /// of X-length at most `h_budget`.
    pub fn ball(kind: Kind, radius: usize, h_budget: usize) -> Region {
        let labels = alphabet(kind, h_budget);
        let verts = ball(kind, radius);
        let index: HashMap<Word, u32> = verts.iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect();
        let adj = verts
            .iter()
            .map(|v| {
                labels
                    .iter()
                    .enumerate()
                    .filter_map(|(li, l)| index.get(&mul(kind, v, &l.elem)).map(|&t| (t, li as u16)))
                    .collect()
            })
            .collect();
        Region {
            kind,
            radius,
            h_budget,
            labels,
            verts,
            index,
            adj,
        }
    }

    pub fn id(&self, w: &[i8]) -> u32 {
        self.index[w]
    }

    pub fn bfs(&self, src: u32, allow: impl Fn(u32, u16) -> bool) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.verts.len()];
        dist[src as usize] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            for &(v, l) in &self.adj[u as usize] {
                if dist[v as usize] == UNREACHED && allow(u, l) {
                    dist[v as usize] = dist[u as usize] + 1;
                    q.push_back(v);
                }
            }
        }
        dist
    }

    pub fn dist_from(&self, src: u32) -> Vec<u32> {
        self.bfs(src, |_, _| true)
    }

    /// `d̂(1, h)`: BFS from 1 without the subgroup edges leaving `H_family`.
    pub fn admissible(&self, family: u8, h: &[i8]) -> Option<u32> {
        let kind = self.kind;
        let one = self.id(&[]);
        let dist = self.bfs(one, |u, l| {
            self.labels[l as usize].h.map(|(f, _)| f) != Some(family)
                || h_member(kind, &self.verts[u as usize], family).is_none()
        });
        self.index.get(h).and_then(|&t| match dist[t as usize] {
            UNREACHED => None,
            d => Some(d),
        })
    }

    /// Every geodesic from `s` to `t` as a vertex sequence, or `None` past `cap`.
    pub fn geodesics(&self, s: u32, t: u32, to_t: &[u32], cap: usize) -> Option<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        let mut stack = vec![s];
        if !self.walk(&mut stack, t, to_t, cap, &mut out) {
            return None;
        }
        Some(out)
    }

    fn walk(&self, stack: &mut Vec<u32>, t: u32, to_t: &[u32], cap: usize, out: &mut Vec<Vec<u32>>) -> bool {
        let u = *stack.last().unwrap();
        if u == t {
            out.push(stack.clone());
            return out.len() <= cap;
        }
        for &(v, _) in &self.adj[u as usize] {
            if to_t[v as usize] != UNREACHED && to_t[v as usize] + 1 == to_t[u as usize] {
                stack.push(v);
                let ok = self.walk(stack, t, to_t, cap, out);
                stack.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    pub fn label_between(&self, u: u32, v: u32) -> u16 {
        self.adj[u as usize].iter().find(|&&(w, _)| w == v).unwrap().1
    }

    /// Lex-min geodesic by alphabet tokens.
    pub fn lex_min(&self, s: u32, t: u32, to_t: &[u32]) -> Vec<u32> {
        let mut path = vec![s];
        let mut u = s;
        while u != t {
            let next = self.adj[u as usize]
                .iter()
                .filter(|&&(v, _)| to_t[v as usize] != UNREACHED && to_t[v as usize] + 1 == to_t[u as usize])
                .min_by_key(|&&(_, l)| self.labels[l as usize].token)
                .unwrap();
            u = next.0;
            path.push(u);
        }
        path
    }
}

/// A separating coset: family, entrance vertex and distance from the source.
#[derive(Clone, Debug)]
pub struct OracleCoset {
    pub family: u8,
    pub entrance: u32,
    pub distance: u32,
}

/// Gap table: `d̂(1, h)` per subgroup label, `None` for unreachable.
pub fn gap_table(r: &Region) -> Vec<Option<u32>> {
    r.labels
        .iter()
        .map(|l| match l.h {
            None => Some(0),
            Some((f, _)) => r.admissible(f, &l.elem),
        })
        .collect()
}

/// `S(s, t; D)` from the geodesic DAG: subgroup edges on some geodesic whose
/// gap exceeds `D`, one entry per coset, ordered by distance from `s`.
pub fn sep_cosets(
    r: &Region,
    gaps: &[Option<u32>],
    from_s: &[u32],
    to_t: &[u32],
    s: u32,
    d: u64,
) -> Vec<OracleCoset> {
    let total = to_t[s as usize];
    let mut out: Vec<OracleCoset> = Vec::new();
    if total == UNREACHED {
        return out;
    }
    for u in 0..r.verts.len() as u32 {
        let (a, b) = (from_s[u as usize], to_t[u as usize]);
        if a == UNREACHED || b == UNREACHED || a + b != total {
            continue;
        }
        for &(v, l) in &r.adj[u as usize] {
            if to_t[v as usize] == UNREACHED || to_t[v as usize] + 1 != b {
                continue;
            }
            let Some((f, _)) = r.labels[l as usize].h else {
                continue;
            };
            let essential = match gaps[l as usize] {
                None => true,
                Some(g) => g as u64 > d,
            };
            if !essential {
                continue;
            }
            let dup = out
                .iter()
                .any(|c| c.family == f && same_coset(r.kind, f, &r.verts[c.entrance as usize], &r.verts[u as usize]));
            if !dup {
                out.push(OracleCoset {
                    family: f,
                    entrance: u,
                    distance: a,
                });
            }
        }
    }
    out.sort_by_key(|c| c.distance);
    out
}

/// `|S(1, y; D)|` for every region vertex `y`.
pub fn sep_counts(r: &Region, gaps: &[Option<u32>], d: u64) -> Vec<usize> {
    let one = r.id(&[]);
    let from_one = r.dist_from(one);
    (0..r.verts.len() as u32)
        .map(|y| {
            let to_y = r.dist_from(y);
            sep_cosets(r, gaps, &from_one, &to_y, one, d).len()
        })
        .collect()
}

fn in_some_subgroup(kind: Kind, q: &[i8]) -> bool {
    !q.is_empty() && (0..2u8).any(|f| h_member(kind, q, f).is_some())
}

/// `d_{Y∪H}` from `src` over the region. Y-letters are `Y ∩ region`; every
/// nontrivial subgroup element is a letter.
pub fn y_distances(r: &Region, in_y: &[bool], src: u32) -> Vec<u32> {
    let kind = r.kind;
    let n = r.verts.len();
    let mut letters: Vec<Word> = (0..n).filter(|&i| in_y[i] && !r.verts[i].is_empty()).map(|i| r.verts[i].clone()).collect();
    let span = 2 * r.radius as i32;
    match kind {
        Kind::FreeCyclic => letters.extend((1..=span).flat_map(|k| [w_power(k), w_power(-k)])),
        Kind::FreeProduct => letters.extend([vec![1], vec![2], vec![11], vec![12], vec![13], vec![14]]),
    }
    letters.sort();
    letters.dedup();
    let is_letter = |q: &Word| in_some_subgroup(kind, q) || r.index.get(q).is_some_and(|&i| in_y[i as usize]);
    let mut dist = vec![UNREACHED; n];
    dist[src as usize] = 0;
    let mut frontier = vec![src as usize];
    let mut unvisited = n - 1;
    let mut level = 0;
    while !frontier.is_empty() && unvisited > 0 {
        level += 1;
        let mut next = Vec::new();
        if letters.len() <= unvisited {
            for &u in &frontier {
                for y in &letters {
                    if let Some(&v) = r.index.get(&mul(kind, &r.verts[u], y)) {
                        if dist[v as usize] == UNREACHED {
                            dist[v as usize] = level;
                            next.push(v as usize);
                        }
                    }
                }
            }
        } else {
            for v in 0..n {
                if dist[v] == UNREACHED
                    && frontier
                        .iter()
                        .any(|&u| is_letter(&mul(kind, &inv(kind, &r.verts[u]), &r.verts[v])))
                {
                    next.push(v);
                }
            }
            for &v in &next {
                dist[v] = level;
            }
        }
        unvisited -= next.len();
        frontier = next;
    }
    dist
}

/// Bounded search for a common tail of two eventually periodic sequences.
pub fn tails_meet(a: &(Vec<u64>, Vec<u64>), b: &(Vec<u64>, Vec<u64>)) -> bool {
    let at = |s: &(Vec<u64>, Vec<u64>), i: usize| {
        if i < s.0.len() {
            s.0[i]
        } else {
            s.1[(i - s.0.len()) % s.1.len()]
        }
    };
    let span = a.0.len() + b.0.len() + 2 * a.1.len() * b.1.len() + 2;
    (0..=a.0.len() + a.1.len()).any(|n| (0..=b.0.len() + b.1.len()).any(|m| (0..span).all(|i| at(a, n + i) == at(b, m + i))))
}
