//! Sampling estimate of the isolated-component constant `C`.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::{polygon_components, ExplorationBudget, ExtNat, Explorer, HalfInt, PathRec};
use crate::error::{LabError, Result};
use crate::group_model::GroupElement;

/// A nonnegative fraction compared exactly.
#[derive(Clone, Copy, Debug)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };

    pub fn new(num: u64, den: u64) -> Fraction {
        Fraction { num, den }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `⌈self⌉`.
    pub fn ceil(&self) -> u64 {
        self.num.div_ceil(self.den)
    }

    /// `⌈k · self⌉`.
    pub fn ceil_times(&self, k: u64) -> u64 {
        (k * self.num).div_ceil(self.den)
    }

    /// Whether `v ≤ k · self`.
    pub fn bounds(&self, v: u64, k: u64) -> bool {
        v * self.den <= k * self.num
    }
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Fraction {}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num % self.den == 0 {
            write!(f, "{}", self.num / self.den)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Sampler configuration for geodesic n-gons.
#[derive(Clone, Debug, Serialize)]
pub struct NgonSpec {
    /// Polygon sizes drawn uniformly from this list (each in 2..=6).
    pub sizes: Vec<usize>,
    pub count: usize,
    /// Polygon vertices are drawn from the X-ball of this radius.
    pub vertex_radius: usize,
    pub seed: u64,
}

/// A sampled polygon with its worst isolated component.
#[derive(Clone, Debug, Serialize)]
pub struct PolygonWitness {
    pub vertices: Vec<String>,
    pub sides: Vec<Vec<String>>,
    pub entrance: String,
    pub exit: String,
    pub gap: u64,
}

/// Result of [`estimate_c`].
#[derive(Clone, Debug, Serialize)]
pub struct CEstimate {
    pub c_hat: Fraction,
    pub samples: usize,
    /// Isolated components whose endpoints differ.
    pub isolated_distinct: usize,
    /// Per polygon size: the largest observed `d̂/n`.
    pub per_size: Vec<(usize, Fraction)>,
    /// Components whose `d̂` exceeds `n·Ĉ` for the final `Ĉ`.
    pub violations: usize,
    pub worst: Option<PolygonWitness>,
    pub seed: u64,
    pub budget: ExplorationBudget,
}

struct Observation {
    n: usize,
    gap: u64,
    witness: Option<PolygonWitness>,
}

/// Per-sample RNG stream: one seed, one stream per sample index.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_polygon(
    e: &Explorer,
    spec: &NgonSpec,
    pool: &[GroupElement],
    index: usize,
) -> Result<Vec<Observation>> {
    let model = e.model();
    let mut rng = stream_rng(spec.seed, index as u64);
    let n = spec.sizes[rng.gen_range(0..spec.sizes.len())];
    let verts: Vec<GroupElement> = (0..n).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
    let mut sides = Vec::with_capacity(n);
    for i in 0..n {
        let (p, q) = (&verts[i], &verts[(i + 1) % n]);
        let dag = e.geodesic_dag(p, q)?;
        let labels = dag.random_path(&mut rng);
        sides.push(PathRec {
            base: p.clone(),
            labels: dag.letters(&labels),
            geodesic: true,
        });
    }
    let comps = polygon_components(model, &sides)?;
    let mut out = Vec::new();
    for pc in comps.iter().filter(|c| c.isolated) {
        let c = &pc.component;
        if c.entrance == c.exit {
            out.push(Observation {
                n,
                gap: 0,
                witness: None,
            });
            continue;
        }
        let gap = match e.relative_metric(c.family, &c.entrance, &c.exit) {
            ExtNat::Finite(v) => v,
            other => {
                let kind = if other == ExtNat::ProvenInfinite {
                    LabError::TheoremViolation
                } else {
                    LabError::Partiality
                };
                return Err(kind(format!(
                    "isolated component {} -> {} with gap {other} in polygon [{}]",
                    model.format_element(&c.entrance),
                    model.format_element(&c.exit),
                    verts
                        .iter()
                        .map(|v| model.format_element(v))
                        .collect::<Vec<_>>()
                        .join(", ")
                )));
            }
        };
        out.push(Observation {
            n,
            gap,
            witness: Some(PolygonWitness {
                vertices: verts.iter().map(|v| model.format_element(v)).collect(),
                sides: sides.iter().map(|s| model.format_labels(&s.labels)).collect(),
                entrance: model.format_element(&c.entrance),
                exit: model.format_element(&c.exit),
                gap,
            }),
        });
    }
    Ok(out)
}

/// `Ĉ = max d̂(a₋, a₊)/n` over isolated components of sampled geodesic
/// n-gons. Deterministic for a fixed seed regardless of thread count.
pub fn estimate_c(e: &Explorer, spec: &NgonSpec) -> Result<CEstimate> {
    if spec.sizes.is_empty() || spec.sizes.iter().any(|&n| !(2..=6).contains(&n)) {
        return Err(LabError::Input("polygon sizes must lie in 2..=6".into()));
    }
    let pool = e.model().ball_elements(spec.vertex_radius);
    let results: Vec<Result<Vec<Observation>>> = (0..spec.count)
        .into_par_iter()
        .map(|i| sample_polygon(e, spec, &pool, i))
        .collect();
    let mut c_hat = Fraction::ZERO;
    let mut worst = None;
    let mut isolated_distinct = 0;
    let mut per_size: Vec<(usize, Fraction)> = Vec::new();
    let mut all = Vec::new();
    for r in results {
        for obs in r? {
            if obs.gap > 0 {
                isolated_distinct += 1;
            }
            let f = Fraction::new(obs.gap, obs.n as u64);
            match per_size.iter_mut().find(|(n, _)| *n == obs.n) {
                Some((_, best)) => *best = (*best).max(f),
                None => per_size.push((obs.n, f)),
            }
            if f > c_hat {
                c_hat = f;
                worst = obs.witness.clone();
            }
            all.push((obs.n, obs.gap));
        }
    }
    per_size.sort_by_key(|(n, _)| *n);
    let violations = all
        .iter()
        .filter(|(n, gap)| !c_hat.bounds(*gap, *n as u64))
        .count();
    Ok(CEstimate {
        c_hat,
        samples: spec.count,
        isolated_distinct,
        per_size,
        violations,
        worst,
        seed: spec.seed,
        budget: e.budget(),
    })
}

/// The constants used by the property suites, with how each was obtained.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub c_hat: Fraction,
    pub c_samples: usize,
    pub c_seed: u64,
    pub d: u64,
    pub d_auto: bool,
    pub delta_x: HalfInt,
    pub delta_y: Option<HalfInt>,
    pub m_x: Option<u64>,
    pub k: Option<u64>,
    pub budget: ExplorationBudget,
    pub label: &'static str,
}

impl ConstantsReport {
    /// The default `D = 3·⌈Ĉ⌉ + 1`.
    pub fn auto_d(c_hat: Fraction) -> u64 {
        3 * c_hat.ceil() + 1
    }
}
