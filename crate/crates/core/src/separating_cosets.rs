//! Separating cosets `S(f, g; D)`, their linear order, and triple splits.
//!
//! A coset is `(f, g; D)`-separating when some geodesic from `f` to `g`
//! essentially penetrates it. In a geodesic every component is a single
//! H-edge (two consecutive edges of one coset would merge into one), so the
//! union over all geodesics is read off the H-edges of the geodesic DAG
//! without enumerating paths.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::group_model::{CosetRef, GroupElement, GroupModel, Membership};
use crate::relative_graph::{
    ExtNat, Explorer, Fraction, GeoDag, Measured, PathRec,
};

/// One witnessing component: entrance, exit and `d̂` gap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub entrance: GroupElement,
    pub exit: GroupElement,
    pub gap: ExtNat,
}

/// A separating coset with its penetration data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SepCosetRecord {
    pub coset: CosetRef,
    /// Entrance and exit of the first witness in label order.
    pub entrance: GroupElement,
    pub exit: GroupElement,
    pub gap: ExtNat,
    /// `d(f, coset)`, realized by every entrance.
    pub distance: u64,
    /// Index in the `≺` order.
    pub position: usize,
    /// Every essential witness found, in label order.
    pub witnesses: Vec<Witness>,
}

/// Serializable view of a record.
#[derive(Clone, Debug, Serialize)]
pub struct SepCosetView {
    pub position: usize,
    pub family: u8,
    pub coset: String,
    pub entrance: String,
    pub exit: String,
    pub gap: ExtNat,
    pub distance: u64,
    pub witnesses: usize,
}

impl SepCosetRecord {
    pub fn view(&self, model: &GroupModel) -> SepCosetView {
        SepCosetView {
            position: self.position,
            family: self.coset.family,
            coset: model.format_element(&self.coset.rep),
            entrance: model.format_element(&self.entrance),
            exit: model.format_element(&self.exit),
            gap: self.gap,
            distance: self.distance,
            witnesses: self.witnesses.len(),
        }
    }
}

/// The gap `d̂_λ(a, b)` if it certifiably exceeds `d`.
///
/// `None` means "not essential". A gap that cannot be decided at the budget
/// is a partiality error rather than a guess.
pub fn essential_gap(
    e: &Explorer,
    family: u8,
    a: &GroupElement,
    b: &GroupElement,
    d: u64,
) -> Result<Option<ExtNat>> {
    let model = e.model();
    match model.subgroup_membership(&model.left_quotient(a, b), family) {
        None => Err(LabError::Input(format!(
            "{} and {} are not in a common coset",
            model.format_element(a),
            model.format_element(b)
        ))),
        Some(Membership::Identity) => Ok(None),
        Some(Membership::Element(h)) => {
            if e.is_essential(family, h, d)? {
                Ok(Some(e.gap(family, h)))
            } else {
                Ok(None)
            }
        }
    }
}

/// Separating cosets read off a geodesic DAG (single or multiple targets).
pub fn sep_cosets_of_dag(e: &Explorer, dag: &GeoDag, d: u64) -> Result<Vec<SepCosetRecord>> {
    let model = e.model();
    let g = &dag.graph;
    let mut by_coset: HashMap<CosetRef, SepCosetRecord> = HashMap::new();
    let mut order: Vec<CosetRef> = Vec::new();
    for &v in dag.vertices() {
        for edge in dag.out(v) {
            let Some((family, _)) = dag.h_elem(edge.label) else {
                continue;
            };
            let (a, b) = (g.vertex(v), g.vertex(edge.to));
            if dag
                .out(edge.to)
                .iter()
                .any(|next| dag.h_elem(next.label).map(|(f, _)| f) == Some(family))
            {
                return Err(LabError::Partiality(format!(
                    "geodesic through {} uses two edges of one coset; the H-letter budget is too small",
                    model.format_element(b)
                )));
            }
            let Some(gap) = essential_gap(e, family, a, b, d)? else {
                continue;
            };
            let coset = model.coset_canonical(a, family);
            let w = Witness {
                entrance: a.clone(),
                exit: b.clone(),
                gap,
            };
            let depth = dag.depth(v) as u64;
            match by_coset.get_mut(&coset) {
                Some(rec) => {
                    if rec.distance != depth {
                        return Err(LabError::TheoremViolation(format!(
                            "coset {} entered at distances {} and {depth}",
                            model.format_element(&coset.rep),
                            rec.distance
                        )));
                    }
                    rec.witnesses.push(w);
                }
                None => {
                    order.push(coset.clone());
                    by_coset.insert(
                        coset.clone(),
                        SepCosetRecord {
                            coset,
                            entrance: a.clone(),
                            exit: b.clone(),
                            gap,
                            distance: depth,
                            position: 0,
                            witnesses: vec![w],
                        },
                    );
                }
            }
        }
    }
    let mut out: Vec<SepCosetRecord> = order
        .into_iter()
        .map(|c| by_coset.remove(&c).expect("recorded"))
        .collect();
    out.sort_by_key(|r| r.distance);
    for w in out.windows(2) {
        if w[0].distance == w[1].distance {
            return Err(LabError::TheoremViolation(format!(
                "cosets {} and {} tie at distance {}",
                model.format_element(&w[0].coset.rep),
                model.format_element(&w[1].coset.rep),
                w[0].distance
            )));
        }
    }
    for (i, r) in out.iter_mut().enumerate() {
        r.position = i;
    }
    Ok(out)
}

/// `S(f, g; D)` in the `≺` order.
pub fn sep_cosets(e: &Explorer, f: &GroupElement, g: &GroupElement, d: u64) -> Result<Vec<SepCosetRecord>> {
    if f == g {
        return Ok(Vec::new());
    }
    sep_cosets_of_dag(e, &e.geodesic_dag(f, g)?, d)
}

/// `S(f, g; D)` with a stability flag from the widened budget.
pub fn sep_cosets_measured(
    e: &Explorer,
    f: &GroupElement,
    g: &GroupElement,
    d: u64,
) -> Result<Measured<Vec<SepCosetRecord>>> {
    let value = sep_cosets(e, f, g, d)?;
    let wide = sep_cosets(e.wider(), f, g, d);
    let stable = match wide {
        Ok(w) => cosets(&w) == cosets(&value),
        Err(_) => false,
    };
    Ok(Measured {
        value,
        stable,
        budget: e.budget(),
    })
}

/// The coset references of a record list, in order.
pub fn cosets(records: &[SepCosetRecord]) -> Vec<CosetRef> {
    records.iter().map(|r| r.coset.clone()).collect()
}

/// Components of `p` that essentially penetrate their coset, in traversal
/// order. Positions are indices along `p`.
pub fn essential_penetrations(e: &Explorer, p: &PathRec, d: u64) -> Result<Vec<SepCosetRecord>> {
    let verts = p.vertices(e.model());
    let mut out = Vec::new();
    for c in p.components(e.model()) {
        if let Some(gap) = essential_gap(e, c.family, &c.entrance, &c.exit, d)? {
            out.push(SepCosetRecord {
                coset: c.coset,
                entrance: c.entrance.clone(),
                exit: c.exit.clone(),
                gap,
                distance: c.start as u64,
                position: out.len(),
                witnesses: vec![Witness {
                    entrance: c.entrance,
                    exit: c.exit,
                    gap,
                }],
            });
        }
    }
    debug_assert!(out.iter().all(|r| verts[r.distance as usize] == r.entrance));
    Ok(out)
}

/// Whether every geodesic of `dag` penetrates `coset`.
pub fn all_geodesics_penetrate(e: &Explorer, dag: &GeoDag, coset: &CosetRef) -> bool {
    let model = e.model();
    let g = &dag.graph;
    !dag.has_path_avoiding(|v, edge| {
        !(g.letter(edge.label).family() == Some(coset.family)
            && model.coset_contains(coset, g.vertex(v)))
    })
}

/// The partition `S(f,g) = S′ ⊔ S″ ⊔ F`.
#[derive(Clone, Debug)]
pub struct TripleSplit {
    pub first: Vec<SepCosetRecord>,
    pub second: Vec<SepCosetRecord>,
    pub rest: Vec<SepCosetRecord>,
}

/// Splits `S(f, g; D)` into cosets of `S(f, z; D)`, cosets of `S(z, g; D)`
/// and a remainder of at most four. With `c_hat` given, `D ≥ 11·Ĉ` is
/// required.
pub fn triple_split(
    e: &Explorer,
    f: &GroupElement,
    g: &GroupElement,
    z: &GroupElement,
    d: u64,
    c_hat: Option<Fraction>,
) -> Result<TripleSplit> {
    if let Some(c) = c_hat {
        if d * c.den < 11 * c.num {
            return Err(LabError::Precondition(format!(
                "D={d} is below 11*C with C={c}"
            )));
        }
    }
    let all = sep_cosets(e, f, g, d)?;
    let left = cosets(&sep_cosets(e, f, z, d)?);
    let right = cosets(&sep_cosets(e, z, g, d)?);
    partition(e.model(), all, &left, &right)
}

pub(crate) fn partition(
    model: &GroupModel,
    all: Vec<SepCosetRecord>,
    left: &[CosetRef],
    right: &[CosetRef],
) -> Result<TripleSplit> {
    let mut split = TripleSplit {
        first: Vec::new(),
        second: Vec::new(),
        rest: Vec::new(),
    };
    for r in all {
        if left.contains(&r.coset) {
            split.first.push(r);
        } else if right.contains(&r.coset) {
            split.second.push(r);
        } else {
            split.rest.push(r);
        }
    }
    if split.rest.len() > 4 {
        return Err(LabError::TheoremViolation(format!(
            "{} cosets fall in neither side: {}",
            split.rest.len(),
            split
                .rest
                .iter()
                .map(|r| model.format_element(&r.coset.rep))
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    Ok(split)
}
