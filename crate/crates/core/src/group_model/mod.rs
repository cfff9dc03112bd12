//! Words, normal forms and the two built-in group models.
//!
//! A [`GroupModel`] is either a free product of finite factors with a free
//! group (the factors form the hyperbolically embedded family) or a free group
//! with the single cyclic subgroup generated by a relator word `W`.
//! Elements are stored as normal-form words, so equality is structural.

mod finite;
mod text;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use finite::FiniteGroup;
pub use text::{builtin_free_cyclic, builtin_free_product, load_model_spec};

use crate::error::{LabError, Result};

/// A nontrivial element of some `H_λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubgroupElement {
    /// Index into a finite factor's table (never 0, the identity).
    Finite(u16),
    /// Exponent `k != 0` of the relator `W`.
    Power(i32),
}

/// A letter of the alphabet `X ⊔ H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    X { gen: u8, inv: bool },
    H { family: u8, elem: SubgroupElement },
}

impl Letter {
    pub fn x(gen: u8) -> Letter {
        Letter::X { gen, inv: false }
    }

    pub fn x_inv(gen: u8) -> Letter {
        Letter::X { gen, inv: true }
    }

    pub fn power(k: i32) -> Letter {
        Letter::H {
            family: 0,
            elem: SubgroupElement::Power(k),
        }
    }

    pub fn factor(family: u8, index: u16) -> Letter {
        Letter::H {
            family,
            elem: SubgroupElement::Finite(index),
        }
    }

    pub fn family(&self) -> Option<u8> {
        match self {
            Letter::H { family, .. } => Some(*family),
            Letter::X { .. } => None,
        }
    }

    pub fn is_h(&self) -> bool {
        matches!(self, Letter::H { .. })
    }
}

/// A group element as its normal-form word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(Vec<Letter>);

// Letter has no derived order on purpose (the alphabet order is model
// dependent), but GroupElement needs one for use as a BTreeMap key.
impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    /// Structural order used only for container keys. Use
    /// [`GroupModel::letter_cmp`] for the alphabet order.
    fn cmp(&self, other: &Self) -> Ordering {
        fn raw(l: &Letter) -> (u8, u8, i64) {
            match *l {
                Letter::X { gen, inv } => (0, gen, inv as i64),
                Letter::H { family, elem } => match elem {
                    SubgroupElement::Finite(i) => (1, family, i as i64),
                    SubgroupElement::Power(k) => (1, family, k as i64),
                },
            }
        }
        raw(self).cmp(&raw(other))
    }
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn num_letters(&self) -> usize {
        self.0.len()
    }
}

/// Result of [`GroupModel::subgroup_membership`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Identity,
    Element(SubgroupElement),
}

/// A left coset `g·H_λ`, identified by its shortlex-minimal representative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetRef {
    pub family: u8,
    pub rep: GroupElement,
}

#[derive(Clone, Debug)]
pub enum ModelKind {
    FreeProduct {
        factors: Vec<FiniteGroup>,
        free_rank: u8,
    },
    FreeCyclic {
        rank: u8,
        relator: Vec<Letter>,
    },
}

/// An exact model of `G` together with its family `{H_λ}`.
#[derive(Clone, Debug)]
pub struct GroupModel {
    kind: ModelKind,
    relator_inv: Vec<Letter>,
    /// Whether `W` precedes `W⁻¹` in the shortlex order.
    positive_first: bool,
    axis_overlap: usize,
}

fn x_key(l: &Letter) -> u32 {
    match *l {
        Letter::X { gen, inv } => 2 * gen as u32 + inv as u32,
        Letter::H { .. } => unreachable!("x_key on an H-letter"),
    }
}

fn invert_letter_raw(l: &Letter, factors: &[FiniteGroup]) -> Letter {
    match *l {
        Letter::X { gen, inv } => Letter::X { gen, inv: !inv },
        Letter::H { family, elem } => Letter::H {
            family,
            elem: match elem {
                SubgroupElement::Finite(i) => {
                    SubgroupElement::Finite(factors[family as usize].inv(i))
                }
                SubgroupElement::Power(k) => SubgroupElement::Power(-k),
            },
        },
    }
}

impl GroupModel {
    /// Free product of the given finite factors with a free group of rank
    /// `free_rank`.
    pub fn free_product(factors: Vec<FiniteGroup>, free_rank: u8) -> Result<Self> {
        if factors.is_empty() {
            return Err(LabError::Load("free product needs at least one factor".into()));
        }
        if factors.len() + free_rank as usize > 26 {
            return Err(LabError::Load("at most 26 named generators are supported".into()));
        }
        Ok(GroupModel {
            kind: ModelKind::FreeProduct { factors, free_rank },
            relator_inv: Vec::new(),
            positive_first: true,
            axis_overlap: 0,
        })
    }

    /// Free group of rank `rank` with the cyclic subgroup `⟨W⟩`.
    pub fn free_cyclic(rank: u8, relator: Vec<Letter>) -> Result<Self> {
        if rank == 0 || rank > 26 {
            return Err(LabError::Load(format!("unsupported rank {rank}")));
        }
        if relator.is_empty() {
            return Err(LabError::Load("relator must be nonempty".into()));
        }
        for l in &relator {
            match *l {
                Letter::X { gen, .. } if gen < rank => {}
                _ => return Err(LabError::Load("relator uses an invalid letter".into())),
            }
        }
        let n = relator.len();
        for i in 0..n {
            let next = relator[(i + 1) % n];
            if invert_letter_raw(&relator[i], &[]) == next {
                return Err(LabError::Load("relator is not cyclically reduced".into()));
            }
        }
        for d in 1..n {
            if n % d == 0 && (0..n).all(|i| relator[i] == relator[i % d]) {
                return Err(LabError::Load("relator is a proper power".into()));
            }
        }
        let relator_inv: Vec<Letter> = relator
            .iter()
            .rev()
            .map(|l| invert_letter_raw(l, &[]))
            .collect();
        let positive_first = relator
            .iter()
            .map(x_key)
            .cmp(relator_inv.iter().map(x_key))
            == Ordering::Less;
        let axis_overlap = axis_overlap(&relator, &relator_inv);
        Ok(GroupModel {
            kind: ModelKind::FreeCyclic { rank, relator },
            relator_inv,
            positive_first,
            axis_overlap,
        })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn is_free_product(&self) -> bool {
        matches!(self.kind, ModelKind::FreeProduct { .. })
    }

    /// Whether `d̂_λ(f,g) = ∞` for `f ≠ g` is declared in closed form.
    pub fn declares_infinite_relative_metric(&self) -> bool {
        self.is_free_product()
    }

    pub fn free_rank(&self) -> u8 {
        match self.kind {
            ModelKind::FreeProduct { free_rank, .. } => free_rank,
            ModelKind::FreeCyclic { rank, .. } => rank,
        }
    }

    pub fn num_families(&self) -> usize {
        match &self.kind {
            ModelKind::FreeProduct { factors, .. } => factors.len(),
            ModelKind::FreeCyclic { .. } => 1,
        }
    }

    pub fn factors(&self) -> &[FiniteGroup] {
        match &self.kind {
            ModelKind::FreeProduct { factors, .. } => factors,
            ModelKind::FreeCyclic { .. } => &[],
        }
    }

    pub fn relator(&self) -> &[Letter] {
        match &self.kind {
            ModelKind::FreeCyclic { relator, .. } => relator,
            ModelKind::FreeProduct { .. } => &[],
        }
    }

    /// Longest edge segment shared by the axis of `W` and a distinct translate.
    pub fn axis_overlap(&self) -> usize {
        self.axis_overlap
    }

    /// Checks that a letter is valid for this model.
    pub fn check_letter(&self, l: &Letter) -> Result<()> {
        let ok = match (&self.kind, *l) {
            (_, Letter::X { gen, .. }) => gen < self.free_rank(),
            (ModelKind::FreeProduct { factors, .. }, Letter::H { family, elem }) => {
                match (factors.get(family as usize), elem) {
                    (Some(f), SubgroupElement::Finite(i)) => i != 0 && (i as usize) < f.order(),
                    _ => false,
                }
            }
            (ModelKind::FreeCyclic { .. }, Letter::H { family, elem }) => {
                family == 0 && matches!(elem, SubgroupElement::Power(k) if k != 0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::Input(format!("malformed letter {l:?} for this model")))
        }
    }

    pub fn invert_letter(&self, l: &Letter) -> Letter {
        invert_letter_raw(l, self.factors())
    }

    fn push_letter(&self, stack: &mut Vec<Letter>, l: Letter) {
        match l {
            Letter::X { .. } => {
                if stack.last() == Some(&self.invert_letter(&l)) {
                    stack.pop();
                } else {
                    stack.push(l);
                }
            }
            Letter::H {
                family,
                elem: SubgroupElement::Finite(i),
            } => {
                if let Some(Letter::H {
                    family: f2,
                    elem: SubgroupElement::Finite(j),
                }) = stack.last().copied()
                {
                    if f2 == family {
                        let t = self.factors()[family as usize].mul(j, i);
                        stack.pop();
                        if t != 0 {
                            stack.push(Letter::factor(family, t));
                        }
                        return;
                    }
                }
                stack.push(l);
            }
            Letter::H {
                elem: SubgroupElement::Power(k),
                ..
            } => {
                let block = if k > 0 {
                    self.relator().to_vec()
                } else {
                    self.relator_inv.clone()
                };
                for _ in 0..k.unsigned_abs() {
                    for &x in &block {
                        self.push_letter(stack, x);
                    }
                }
            }
        }
    }

    /// Normal form of the product of `raw`.
    pub fn normalize(&self, raw: &[Letter]) -> Result<GroupElement> {
        let mut stack = Vec::with_capacity(raw.len());
        for l in raw {
            self.check_letter(l)?;
            self.push_letter(&mut stack, *l);
        }
        Ok(GroupElement(stack))
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let mut stack = Vec::with_capacity(g.0.len() + h.0.len());
        stack.extend_from_slice(&g.0);
        for &l in &h.0 {
            self.push_letter(&mut stack, l);
        }
        GroupElement(stack)
    }

    /// `g · l` for a letter assumed valid.
    pub fn mul_letter(&self, g: &GroupElement, l: &Letter) -> GroupElement {
        let mut stack = Vec::with_capacity(g.0.len() + 2);
        stack.extend_from_slice(&g.0);
        self.push_letter(&mut stack, *l);
        GroupElement(stack)
    }

    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        GroupElement(g.0.iter().rev().map(|l| self.invert_letter(l)).collect())
    }

    /// `g⁻¹ · h`.
    pub fn left_quotient(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let p = lcp(g, h);
        let mut out: Vec<Letter> = g.0[p..].iter().rev().map(|l| self.invert_letter(l)).collect();
        for &l in &h.0[p..] {
            self.push_letter(&mut out, l);
        }
        GroupElement(out)
    }

    pub fn letter_element(&self, l: &Letter) -> GroupElement {
        let mut stack = Vec::new();
        self.push_letter(&mut stack, *l);
        GroupElement(stack)
    }

    pub fn pow(&self, g: &GroupElement, k: i64) -> GroupElement {
        let base = if k < 0 { self.inv(g) } else { g.clone() };
        let mut acc = GroupElement::identity();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        acc
    }

    /// Length of the X-expansion (each finite-factor letter counts once).
    pub fn x_length(&self, g: &GroupElement) -> usize {
        g.0.len()
    }

    /// X-length of a single letter used as an edge label.
    pub fn letter_x_length(&self, l: &Letter) -> usize {
        match *l {
            Letter::H {
                elem: SubgroupElement::Power(k),
                ..
            } => k.unsigned_abs() as usize * self.relator().len(),
            _ => 1,
        }
    }

    /// Position of a letter in the alphabet order, as a sortable key.
    pub fn letter_key(&self, l: &Letter) -> (u8, u32, u32) {
        match *l {
            Letter::X { .. } => (0, x_key(l), 0),
            Letter::H {
                family,
                elem: SubgroupElement::Finite(i),
            } => (1, family as u32, i as u32),
            Letter::H {
                family,
                elem: SubgroupElement::Power(k),
            } => {
                let first = (k > 0) == self.positive_first;
                (1, family as u32, 2 * (k.unsigned_abs() - 1) + (!first) as u32)
            }
        }
    }

    /// The alphabet order: X-letters by (id, + < −), then H-letters by
    /// (λ, shortlex of expansion).
    pub fn letter_cmp(&self, a: &Letter, b: &Letter) -> Ordering {
        self.letter_key(a).cmp(&self.letter_key(b))
    }

    /// Order-preserving injection of the alphabet into the naturals.
    pub fn letter_token(&self, l: &Letter) -> u64 {
        let x_count = 2 * self.free_rank() as u64;
        match self.letter_key(l) {
            (0, k, _) => k as u64,
            (_, family, r) => {
                let offset: u64 = self.factors()[..family as usize]
                    .iter()
                    .map(|f| f.order() as u64 - 1)
                    .sum();
                match &self.kind {
                    ModelKind::FreeProduct { .. } => x_count + offset + r as u64 - 1,
                    ModelKind::FreeCyclic { .. } => x_count + r as u64,
                }
            }
        }
    }

    /// Shortlex comparison of X-expansions of normal forms.
    pub fn shortlex_cmp(&self, a: &GroupElement, b: &GroupElement) -> Ordering {
        a.0.len().cmp(&b.0.len()).then_with(|| {
            a.0.iter()
                .map(|l| self.letter_key(l))
                .cmp(b.0.iter().map(|l| self.letter_key(l)))
        })
    }

    /// Lexicographic comparison of label sequences in the alphabet order.
    pub fn labels_cmp(&self, a: &[Letter], b: &[Letter]) -> Ordering {
        a.iter()
            .map(|l| self.letter_key(l))
            .cmp(b.iter().map(|l| self.letter_key(l)))
    }

    /// Decides whether `g ∈ H_λ`.
    pub fn subgroup_membership(&self, g: &GroupElement, family: u8) -> Option<Membership> {
        if g.is_identity() {
            return Some(Membership::Identity);
        }
        match &self.kind {
            ModelKind::FreeProduct { .. } => match g.0.as_slice() {
                [Letter::H { family: f, elem }] if *f == family => {
                    Some(Membership::Element(*elem))
                }
                _ => None,
            },
            ModelKind::FreeCyclic { relator, .. } => {
                if family != 0 {
                    return None;
                }
                let n = relator.len();
                let len = g.0.len();
                if len % n != 0 {
                    return None;
                }
                let k = (len / n) as i32;
                if g.0.chunks(n).all(|c| c == relator.as_slice()) {
                    Some(Membership::Element(SubgroupElement::Power(k)))
                } else if g.0.chunks(n).all(|c| c == self.relator_inv.as_slice()) {
                    Some(Membership::Element(SubgroupElement::Power(-k)))
                } else {
                    None
                }
            }
        }
    }

    /// The family containing `g`, if `g` is a nontrivial element of some `H_λ`.
    pub fn family_of(&self, g: &GroupElement) -> Option<(u8, SubgroupElement)> {
        (0..self.num_families() as u8).find_map(|f| match self.subgroup_membership(g, f) {
            Some(Membership::Element(e)) => Some((f, e)),
            _ => None,
        })
    }

    /// Canonical representative of `g·H_λ`.
    pub fn coset_canonical(&self, g: &GroupElement, family: u8) -> CosetRef {
        let rep = match &self.kind {
            ModelKind::FreeProduct { .. } => match g.0.last() {
                Some(Letter::H { family: f, .. }) if *f == family => {
                    GroupElement(g.0[..g.0.len() - 1].to_vec())
                }
                _ => g.clone(),
            },
            ModelKind::FreeCyclic { relator, .. } => {
                let bound = (2 * g.0.len() / relator.len() + 2) as i32;
                let mut best = g.clone();
                // Walk outward in both directions; each step is one block.
                for dir in [1, -1] {
                    let mut cur = g.clone();
                    for _ in 0..bound {
                        cur = self.mul_letter(&cur, &Letter::power(dir));
                        if self.shortlex_cmp(&cur, &best) == Ordering::Less {
                            best = cur.clone();
                        }
                    }
                }
                best
            }
        };
        CosetRef { family, rep }
    }

    pub fn coset_contains(&self, c: &CosetRef, v: &GroupElement) -> bool {
        self.subgroup_membership(&self.left_quotient(&c.rep, v), c.family)
            .is_some()
    }

    /// All `h ∈ H_λ∖{1}` with X-length at most `budget`, in shortlex order.
    pub fn h_enumerate(&self, family: u8, budget: usize) -> Vec<SubgroupElement> {
        let mut out: Vec<Letter> = match &self.kind {
            ModelKind::FreeProduct { factors, .. } => {
                if budget == 0 {
                    return Vec::new();
                }
                (1..factors[family as usize].order() as u16)
                    .map(|i| Letter::factor(family, i))
                    .collect()
            }
            ModelKind::FreeCyclic { relator, .. } => {
                let kmax = (budget / relator.len()) as i32;
                (1..=kmax).flat_map(|k| [Letter::power(k), Letter::power(-k)]).collect()
            }
        };
        out.sort_by(|a, b| self.letter_cmp(a, b));
        out.into_iter()
            .map(|l| match l {
                Letter::H { elem, .. } => elem,
                Letter::X { .. } => unreachable!(),
            })
            .collect()
    }

    /// The generating letters of the X-ball (X-letters, plus the finite
    /// factor letters, which have X-length one).
    pub fn ball_generators(&self) -> Vec<Letter> {
        let mut out: Vec<Letter> = (0..self.free_rank())
            .flat_map(|g| [Letter::x(g), Letter::x_inv(g)])
            .collect();
        for f in 0..self.num_families() as u8 {
            if self.is_free_product() {
                for e in self.h_enumerate(f, 1) {
                    out.push(Letter::H { family: f, elem: e });
                }
            }
        }
        out.sort_by(|a, b| self.letter_cmp(a, b));
        out
    }

    /// All elements of X-length at most `r`, in shortlex order.
    pub fn ball_elements(&self, r: usize) -> Vec<GroupElement> {
        let gens = self.ball_generators();
        let mut out = vec![GroupElement::identity()];
        let mut layer = vec![GroupElement::identity()];
        for _ in 0..r {
            let mut next = Vec::new();
            for g in &layer {
                for l in &gens {
                    let h = self.mul_letter(g, l);
                    if h.0.len() == g.0.len() + 1 {
                        next.push(h);
                    }
                }
            }
            next.sort_by(|a, b| self.shortlex_cmp(a, b));
            next.dedup();
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    /// Lower bound for `d̂(1, h)` certified by the tree argument: every axis
    /// edge between 1 and `h` must be crossed, and an admissible edge crosses
    /// at most `max(1, overlap)` of them. Infinite for free products.
    pub fn relative_metric_lower_bound(&self, elem: &SubgroupElement) -> Option<u64> {
        match (&self.kind, elem) {
            (ModelKind::FreeCyclic { relator, .. }, SubgroupElement::Power(k)) => {
                let total = k.unsigned_abs() as u64 * relator.len() as u64;
                let per = self.axis_overlap.max(1) as u64;
                Some(total.div_ceil(per))
            }
            _ => None,
        }
    }
}

/// Length of the longest common prefix of two words, in letters.
pub fn lcp(a: &GroupElement, b: &GroupElement) -> usize {
    a.0.iter().zip(b.0.iter()).take_while(|(x, y)| x == y).count()
}

/// Longest segment shared by the axis of `W` and a translate `g·axis ≠ axis`.
///
/// A shared segment reads the same word `u` on both lines. Either `u` occurs in
/// `W^∞` at two phases that differ mod `|W|`, or `u` occurs in both `W^∞` and
/// `(W⁻¹)^∞` (opposite orientation).
fn axis_overlap(w: &[Letter], w_inv: &[Letter]) -> usize {
    let n = w.len();
    let read = |word: &[Letter], start: usize, len: usize| -> Vec<Letter> {
        (0..len).map(|i| word[(start + i) % n]).collect()
    };
    let mut best = 0;
    for len in 1..=2 * n + 1 {
        let mut found = false;
        'outer: for i in 0..n {
            let u = read(w, i, len);
            for j in 0..n {
                if j != i && read(w, j, len) == u {
                    found = true;
                    break 'outer;
                }
                if read(w_inv, j, len) == u {
                    found = true;
                    break 'outer;
                }
            }
        }
        if found {
            best = len;
        } else {
            break;
        }
    }
    best
}
