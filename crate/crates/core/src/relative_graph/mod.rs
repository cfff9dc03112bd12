//! Budgeted exploration of the relative Cayley graph `Γ(G, X ⊔ H)`.
//!
//! The graph is locally infinite, so every query runs inside a finite region
//! with a bound `L` on the X-length of H-letters used as edges. Two region
//! shapes exist:
//!
//! * [`RegionKind::Ball`]: vertices of X-length at most `R`, shared by all
//!   queries of an [`Explorer`].
//! * [`RegionKind::Tube`]: vertices within X-distance `R` of the X-geodesic
//!   between the two query endpoints, built per query. Rays and windows need
//!   this, since their endpoints leave any ball of desk-scale radius.
//!
//! A value is *stable* when recomputing at `(R+2, L+2)` gives the same answer.

mod cache;
mod constants;
mod explore;
mod hyperbolic;
mod path;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use parking_lot::Mutex;
use serde::{Serialize, Serializer};

pub use cache::{read_ball_cache, write_ball_cache, BALL_CACHE_VERSION};
pub use constants::{estimate_c, CEstimate, ConstantsReport, Fraction, NgonSpec, PolygonWitness};
pub use explore::{Alphabet, Edge, GeoDag, LocalGraph, Region, UNREACHED};
pub use hyperbolic::{
    delta_estimate, gromov_product, sample_points, visual_metric_chain, DeltaEstimate, HalfInt,
    Metric, VisualChain,
};
pub use path::{polygon_components, Component, PathRec, PolygonComponent};

use crate::error::{LabError, Result};
use crate::group_model::{GroupElement, GroupModel, Letter, Membership, SubgroupElement};

/// Naturals extended by two kinds of infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtNat {
    Finite(u64),
    /// Not reached inside the budgeted region.
    InfinityAtBudget,
    /// Infinite by a closed-form fact of the model.
    ProvenInfinite,
}

impl ExtNat {
    pub fn finite(&self) -> Option<u64> {
        match self {
            ExtNat::Finite(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        !matches!(self, ExtNat::Finite(_))
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Finite(v) => write!(f, "{v}"),
            ExtNat::InfinityAtBudget => write!(f, "inf@budget"),
            ExtNat::ProvenInfinite => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtNat::Finite(v) => s.serialize_u64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Ball,
    Tube,
}

/// Exploration limits; every numeric result carries the budget behind it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ExplorationBudget {
    pub x_radius: usize,
    pub h_budget: usize,
    pub geodesic_cap: usize,
    pub region: RegionKind,
}

impl ExplorationBudget {
    pub fn ball(x_radius: usize, h_budget: usize) -> Self {
        ExplorationBudget {
            x_radius,
            h_budget,
            geodesic_cap: 4096,
            region: RegionKind::Ball,
        }
    }

    pub fn tube(x_radius: usize, h_budget: usize) -> Self {
        ExplorationBudget {
            x_radius,
            h_budget,
            geodesic_cap: 4096,
            region: RegionKind::Tube,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.geodesic_cap = cap;
        self
    }

    /// The budget used for stability certificates.
    pub fn widened(&self) -> Self {
        ExplorationBudget {
            x_radius: self.x_radius + 2,
            h_budget: self.h_budget + 2,
            ..*self
        }
    }
}

impl fmt::Display for ExplorationBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.region {
            RegionKind::Ball => "ball",
            RegionKind::Tube => "tube",
        };
        write!(
            f,
            "{kind} R={} L={} cap={}",
            self.x_radius, self.h_budget, self.geodesic_cap
        )
    }
}

/// A value together with its stability flag and budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Measured<T> {
    pub value: T,
    pub stable: bool,
    pub budget: ExplorationBudget,
}

/// Endpoints of a query located inside a local graph.
#[derive(Clone, Debug)]
pub struct Located {
    pub graph: Arc<LocalGraph>,
    pub src: u32,
    pub dst: u32,
}

/// Geodesics between two vertices, in lexicographic label order.
#[derive(Clone, Debug)]
pub struct GeodesicList {
    pub paths: Vec<PathRec>,
    pub overflow: bool,
    pub length: u64,
}

const TUBE_CACHE_LIMIT: usize = 512;
const TREE_CACHE_WORDS: usize = 40_000_000;

/// Budgeted explorer over one model. Caches are internal and never change
/// reported values.
pub struct Explorer {
    model: Arc<GroupModel>,
    budget: ExplorationBudget,
    alphabet: Arc<Alphabet>,
    ball: OnceLock<Arc<LocalGraph>>,
    tubes: Mutex<HashMap<(GroupElement, GroupElement), Arc<LocalGraph>>>,
    trees: Mutex<HashMap<u32, Arc<Vec<u32>>>>,
    gaps: Mutex<HashMap<(u8, SubgroupElement), ExtNat>>,
    wider: OnceLock<Box<Explorer>>,
}

impl fmt::Debug for Explorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Explorer({}, {})", self.model.describe(), self.budget)
    }
}

impl Explorer {
    pub fn new(model: Arc<GroupModel>, budget: ExplorationBudget) -> Explorer {
        let alphabet = Arc::new(Alphabet::new(&model, budget.h_budget));
        Explorer {
            model,
            budget,
            alphabet,
            ball: OnceLock::new(),
            tubes: Mutex::new(HashMap::new()),
            trees: Mutex::new(HashMap::new()),
            gaps: Mutex::new(HashMap::new()),
            wider: OnceLock::new(),
        }
    }

    /// Uses a ball graph loaded from a cache file.
    pub fn with_ball(model: Arc<GroupModel>, budget: ExplorationBudget, ball: LocalGraph) -> Explorer {
        let e = Explorer::new(model, budget);
        let _ = e.ball.set(Arc::new(ball));
        e
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn model_arc(&self) -> Arc<GroupModel> {
        self.model.clone()
    }

    pub fn budget(&self) -> ExplorationBudget {
        self.budget
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    /// The explorer at the widened budget.
    pub fn wider(&self) -> &Explorer {
        self.wider
            .get_or_init(|| Box::new(Explorer::new(self.model.clone(), self.budget.widened())))
    }

    /// An explorer at another budget over the same model.
    pub fn at(&self, budget: ExplorationBudget) -> Explorer {
        Explorer::new(self.model.clone(), budget)
    }

    /// The ball of radius `R` around the identity.
    pub fn ball_graph(&self) -> Arc<LocalGraph> {
        self.ball
            .get_or_init(|| {
                Arc::new(
                    LocalGraph::build(
                        &self.model,
                        self.alphabet.clone(),
                        &Region::Ball {
                            radius: self.budget.x_radius,
                        },
                        &[GroupElement::identity()],
                    )
                    .expect("identity lies in every ball"),
                )
            })
            .clone()
    }

    /// The region graph for a query between `f` and `g`.
    pub fn locate(&self, f: &GroupElement, g: &GroupElement) -> Result<Located> {
        let graph = match self.budget.region {
            RegionKind::Ball => self.ball_graph(),
            RegionKind::Tube => {
                let key = (f.clone(), g.clone());
                let cached = self.tubes.lock().get(&key).cloned();
                if let Some(gr) = cached {
                    gr
                } else {
                    let region = Region::tube(&self.model, f, g, self.budget.x_radius);
                    let gr = Arc::new(LocalGraph::build(
                        &self.model,
                        self.alphabet.clone(),
                        &region,
                        &[f.clone(), g.clone()],
                    )?);
                    let mut tubes = self.tubes.lock();
                    if tubes.len() >= TUBE_CACHE_LIMIT {
                        tubes.clear();
                    }
                    tubes.insert(key, gr.clone());
                    gr
                }
            }
        };
        let find = |v: &GroupElement| {
            graph.id(v).ok_or_else(|| LabError::OutOfRange {
                word: self.model.format_element(v),
                region: graph.region.clone(),
            })
        };
        let src = find(f)?;
        let dst = find(g)?;
        Ok(Located { graph, src, dst })
    }

    /// BFS distances from `loc.src` over `loc.graph`.
    pub fn distances(&self, loc: &Located) -> Arc<Vec<u32>> {
        if self.budget.region == RegionKind::Tube {
            return Arc::new(loc.graph.bfs(loc.src));
        }
        let cached = self.trees.lock().get(&loc.src).cloned();
        if let Some(t) = cached {
            return t;
        }
        let t = Arc::new(loc.graph.bfs(loc.src));
        let mut trees = self.trees.lock();
        if (trees.len() + 1) * loc.graph.len() > TREE_CACHE_WORDS {
            trees.clear();
        }
        trees.insert(loc.src, t.clone());
        t
    }

    /// Neighbors of `g` inside the region, in alphabet order.
    pub fn neighbors(&self, g: &GroupElement) -> Result<Vec<(Letter, GroupElement)>> {
        let loc = self.locate(g, g)?;
        Ok(loc
            .graph
            .out(loc.src)
            .iter()
            .map(|e| (loc.graph.letter(e.label), loc.graph.vertex(e.to).clone()))
            .collect())
    }

    /// `d_{X∪H}(f, g)` at this budget.
    pub fn rel_distance_at(&self, f: &GroupElement, g: &GroupElement) -> Result<ExtNat> {
        let loc = self.locate(f, g)?;
        let d = self.distances(&loc)[loc.dst as usize];
        Ok(if d == UNREACHED {
            ExtNat::InfinityAtBudget
        } else {
            ExtNat::Finite(d as u64)
        })
    }

    /// `d_{X∪H}(f, g)` with its stability flag.
    pub fn rel_distance(&self, f: &GroupElement, g: &GroupElement) -> Result<Measured<ExtNat>> {
        let value = self.rel_distance_at(f, g)?;
        let stable = self.wider().rel_distance_at(f, g)? == value;
        Ok(Measured {
            value,
            stable,
            budget: self.budget,
        })
    }

    /// Finite distance or a partiality error.
    pub fn dist(&self, f: &GroupElement, g: &GroupElement) -> Result<u64> {
        match self.rel_distance_at(f, g)? {
            ExtNat::Finite(v) => Ok(v),
            _ => Err(LabError::Partiality(format!(
                "{} and {} are not connected at {}",
                self.model.format_element(f),
                self.model.format_element(g),
                self.budget
            ))),
        }
    }

    /// All geodesics from `f` to `g` as a DAG.
    pub fn geodesic_dag(&self, f: &GroupElement, g: &GroupElement) -> Result<GeoDag> {
        let loc = self.locate(f, g)?;
        let dist = self.distances(&loc);
        if dist[loc.dst as usize] == UNREACHED {
            return Err(LabError::Partiality(format!(
                "{} is unreachable from {} at {}",
                self.model.format_element(g),
                self.model.format_element(f),
                self.budget
            )));
        }
        Ok(loc.graph.dag(loc.src, dist, &[loc.dst]))
    }

    /// Every geodesic inside the region, up to the cap.
    pub fn all_geodesics(&self, f: &GroupElement, g: &GroupElement) -> Result<GeodesicList> {
        let dag = self.geodesic_dag(f, g)?;
        let (paths, overflow) = dag.paths(self.budget.geodesic_cap);
        Ok(GeodesicList {
            length: dag.length() as u64,
            overflow,
            paths: paths
                .into_iter()
                .map(|p| PathRec {
                    base: f.clone(),
                    labels: dag.letters(&p),
                    geodesic: true,
                })
                .collect(),
        })
    }

    /// Checks `len(p) = d(p₋, p₊)` and sets the geodesic flag.
    pub fn certify_geodesic(&self, p: &PathRec) -> Result<PathRec> {
        let end = p.end(&self.model);
        let d = self.rel_distance_at(&p.base, &end)?;
        let mut out = p.clone();
        out.geodesic = d == ExtNat::Finite(p.len() as u64);
        Ok(out)
    }

    /// Admissible BFS for `d̂_λ(1, h)`: edges labelled by `H_λ` may not start
    /// inside `H_λ` itself.
    pub fn admissible_distance(&self, family: u8, elem: SubgroupElement) -> ExtNat {
        let h = self.model.letter_element(&Letter::H { family, elem });
        let one = GroupElement::identity();
        let loc = match self.locate(&one, &h) {
            Ok(l) => l,
            Err(_) => return ExtNat::InfinityAtBudget,
        };
        let graph = &loc.graph;
        let model = &self.model;
        let dist = graph.bfs_filtered(loc.src, |v, e| {
            graph.letter(e.label).family() != Some(family)
                || model.subgroup_membership(graph.vertex(v), family).is_none()
        });
        match dist[loc.dst as usize] {
            UNREACHED => ExtNat::InfinityAtBudget,
            d => ExtNat::Finite(d as u64),
        }
    }

    /// `d̂_λ(1, h)`, memoized. Free products return the declared closed form.
    pub fn gap(&self, family: u8, elem: SubgroupElement) -> ExtNat {
        if self.model.declares_infinite_relative_metric() {
            return ExtNat::ProvenInfinite;
        }
        let cached = self.gaps.lock().get(&(family, elem)).copied();
        if let Some(v) = cached {
            return v;
        }
        let v = self.admissible_distance(family, elem);
        self.gaps.lock().insert((family, elem), v);
        v
    }

    /// `d̂_λ(f, g)`; `ProvenInfinite` when `f⁻¹g ∉ H_λ`.
    pub fn relative_metric(&self, family: u8, f: &GroupElement, g: &GroupElement) -> ExtNat {
        match self
            .model
            .subgroup_membership(&self.model.left_quotient(f, g), family)
        {
            None => ExtNat::ProvenInfinite,
            Some(Membership::Identity) => ExtNat::Finite(0),
            Some(Membership::Element(e)) => self.gap(family, e),
        }
    }

    /// `d̂_λ(f, g)` with its stability flag.
    pub fn relative_metric_measured(
        &self,
        family: u8,
        f: &GroupElement,
        g: &GroupElement,
    ) -> Measured<ExtNat> {
        let value = self.relative_metric(family, f, g);
        Measured {
            value,
            stable: self.wider().relative_metric(family, f, g) == value,
            budget: self.budget,
        }
    }

    /// Certified test of `d̂_λ(1, h) > d`.
    ///
    /// A budget value `≤ d` is a real admissible path, so it certifies "no".
    /// "Yes" needs either the closed form or the tree lower bound.
    pub fn is_essential(&self, family: u8, elem: SubgroupElement, d: u64) -> Result<bool> {
        let g = self.gap(family, elem);
        match g {
            ExtNat::ProvenInfinite => return Ok(true),
            ExtNat::Finite(v) if v <= d => return Ok(false),
            _ => {}
        }
        match self.model.relative_metric_lower_bound(&elem) {
            Some(lb) if lb > d => Ok(true),
            _ => Err(LabError::Partiality(format!(
                "gap {g} of {} cannot be certified against D={d} at {}",
                self.model.format_letter(&Letter::H { family, elem }),
                self.budget
            ))),
        }
    }
}
