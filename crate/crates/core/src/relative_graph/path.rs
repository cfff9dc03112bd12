//! Paths, their H-components, and component classification in polygons.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::group_model::{CosetRef, GroupElement, GroupModel, Letter};

/// A path given by its base vertex and label sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathRec {
    pub base: GroupElement,
    pub labels: Vec<Letter>,
    /// Set when the producer checked `len == rel_distance(endpoints)`.
    pub geodesic: bool,
}

impl PathRec {
    pub fn new(base: GroupElement, labels: Vec<Letter>) -> PathRec {
        PathRec {
            base,
            labels,
            geodesic: false,
        }
    }

    pub fn empty(base: GroupElement) -> PathRec {
        PathRec {
            base,
            labels: Vec::new(),
            geodesic: true,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `v₀ = base, vᵢ = vᵢ₋₁·labelᵢ`.
    pub fn vertices(&self, model: &GroupModel) -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(self.labels.len() + 1);
        let mut v = self.base.clone();
        out.push(v.clone());
        for l in &self.labels {
            v = model.mul_letter(&v, l);
            out.push(v.clone());
        }
        out
    }

    pub fn end(&self, model: &GroupModel) -> GroupElement {
        self.labels
            .iter()
            .fold(self.base.clone(), |v, l| model.mul_letter(&v, l))
    }

    /// The same path traversed backwards.
    pub fn reversed(&self, model: &GroupModel) -> PathRec {
        PathRec {
            base: self.end(model),
            labels: self
                .labels
                .iter()
                .rev()
                .map(|l| model.invert_letter(l))
                .collect(),
            geodesic: self.geodesic,
        }
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn concat(&self, model: &GroupModel, other: &PathRec) -> Result<PathRec> {
        if self.end(model) != other.base {
            return Err(LabError::Input("paths do not meet".into()));
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(PathRec::new(self.base.clone(), labels))
    }

    /// Maximal `H_λ`-subpaths, in traversal order.
    pub fn components(&self, model: &GroupModel) -> Vec<Component> {
        let verts = self.vertices(model);
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.labels.len() {
            let Some(f) = self.labels[i].family() else {
                i += 1;
                continue;
            };
            let mut j = i + 1;
            while j < self.labels.len() && self.labels[j].family() == Some(f) {
                j += 1;
            }
            out.push(Component {
                family: f,
                coset: model.coset_canonical(&verts[i], f),
                entrance: verts[i].clone(),
                exit: verts[j].clone(),
                start: i,
                end: j,
            });
            i = j;
        }
        out
    }
}

/// A maximal `H_λ`-subpath covering edges `start..end` of its path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub family: u8,
    #[serde(skip)]
    pub coset: CosetRef,
    #[serde(skip)]
    pub entrance: GroupElement,
    #[serde(skip)]
    pub exit: GroupElement,
    pub start: usize,
    pub end: usize,
}

/// A component of a closed polygon, with its isolation status.
#[derive(Clone, Debug)]
pub struct PolygonComponent {
    pub component: Component,
    pub isolated: bool,
}

/// Components of the closed path formed by `sides` (each side starts where
/// the previous ends, the last ends at the first base). A component may
/// wrap around the base vertex. A component is isolated when no other
/// component of the polygon lies in the same coset.
pub fn polygon_components(model: &GroupModel, sides: &[PathRec]) -> Result<Vec<PolygonComponent>> {
    if sides.is_empty() {
        return Ok(Vec::new());
    }
    let mut cycle = PathRec::new(sides[0].base.clone(), Vec::new());
    for s in sides {
        cycle = cycle.concat(model, s)?;
    }
    if cycle.end(model) != cycle.base {
        return Err(LabError::Input("polygon is not closed".into()));
    }
    let n = cycle.labels.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // Rotate so the cycle starts at an edge that begins a component or an
    // X-edge; a cycle made of one family only is a single component.
    let fam = |i: usize| cycle.labels[i % n].family();
    let start = (0..n).find(|&i| fam(i).is_none() || fam(i) != fam(i + n - 1));
    let comps = match start {
        None => {
            let f = fam(0).expect("nonempty");
            vec![Component {
                family: f,
                coset: model.coset_canonical(&cycle.base, f),
                entrance: cycle.base.clone(),
                exit: cycle.base.clone(),
                start: 0,
                end: n,
            }]
        }
        Some(s) => {
            let verts = cycle.vertices(model);
            let rotated = PathRec::new(
                verts[s].clone(),
                (0..n).map(|i| cycle.labels[(s + i) % n]).collect(),
            );
            rotated
                .components(model)
                .into_iter()
                .map(|mut c| {
                    c.start = (c.start + s) % n;
                    c.end = (c.end + s - 1) % n + 1;
                    c
                })
                .collect()
        }
    };
    Ok(comps
        .iter()
        .enumerate()
        .map(|(i, c)| PolygonComponent {
            component: c.clone(),
            isolated: !comps
                .iter()
                .enumerate()
                .any(|(j, d)| j != i && d.family == c.family && d.coset == c.coset),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_model::{builtin_free_cyclic, builtin_free_product};

    #[test]
    fn free_product_components() {
        let m = builtin_free_product();
        let p = PathRec::new(
            GroupElement::identity(),
            m.parse_letter_list("[a, b, a]").unwrap(),
        );
        let cs = p.components(&m);
        let reps: Vec<String> = cs.iter().map(|c| m.format_element(&c.coset.rep)).collect();
        assert_eq!(reps, vec!["1", "a", "ab"]);
        assert_eq!(cs.iter().map(|c| c.family).collect::<Vec<_>>(), vec![0, 1, 0]);
    }

    #[test]
    fn x_paths_have_no_components() {
        let m = builtin_free_cyclic();
        let p = PathRec::new(
            GroupElement::identity(),
            m.parse_letter_list("[x:a, x:b]").unwrap(),
        );
        assert!(p.components(&m).is_empty());
    }

    #[test]
    fn consecutive_h_edges_merge() {
        let m = builtin_free_cyclic();
        let p = PathRec::new(
            GroupElement::identity(),
            m.parse_letter_list("[h:ab^2, h:ab^-1]").unwrap(),
        );
        let cs = p.components(&m);
        assert_eq!(cs.len(), 1);
        assert_eq!((cs[0].start, cs[0].end), (0, 2));
        assert!(cs[0].coset.rep.is_identity());
    }

    #[test]
    fn polygon_wraps_components() {
        let m = builtin_free_cyclic();
        let one = GroupElement::identity();
        let w2 = m.parse_element("(ab)^2").unwrap();
        let w3 = m.parse_element("(ab)^3").unwrap();
        // 1 -> W² -> W³ -> 1, every edge in H: a single wrapped component.
        let sides = vec![
            PathRec::new(one.clone(), vec![Letter::power(2)]),
            PathRec::new(w2, vec![Letter::power(1)]),
            PathRec::new(w3, vec![Letter::power(-3)]),
        ];
        let cs = polygon_components(&m, &sides).unwrap();
        assert_eq!(cs.len(), 1);
        // Triangle 1 -> a -> ab -> 1 with sides x:a, x:b, h:ab^-1.
        let a = m.parse_element("a").unwrap();
        let sides = vec![
            PathRec::new(one.clone(), vec![Letter::x(0)]),
            PathRec::new(a, vec![Letter::x(1)]),
            PathRec::new(m.parse_element("ab").unwrap(), vec![Letter::power(-1)]),
        ];
        let cs = polygon_components(&m, &sides).unwrap();
        assert_eq!(cs.len(), 1);
        assert!(cs[0].isolated);
        assert_eq!(cs[0].component.entrance, m.parse_element("ab").unwrap());
        assert_eq!(cs[0].component.exit, one);
    }
}
