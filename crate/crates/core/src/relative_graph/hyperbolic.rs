//! Gromov products, four-point δ estimates and visual-metric chains over
//! finite point sets.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use super::Explorer;
use crate::error::{LabError, Result};
use crate::group_model::{GroupElement, GroupModel};

/// A distance oracle on group elements.
pub trait Metric: Sync {
    fn distance(&self, a: &GroupElement, b: &GroupElement) -> Result<u64>;
}

impl Metric for Explorer {
    fn distance(&self, a: &GroupElement, b: &GroupElement) -> Result<u64> {
        self.dist(a, b)
    }
}

/// An exact half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub fn from_twice(t: i64) -> HalfInt {
        HalfInt(t)
    }

    pub fn as_f64(&self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}", self.as_f64())
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

/// `(x, y)_o = ½(d(x,o) + d(y,o) − d(x,y))`.
pub fn gromov_product(
    metric: &dyn Metric,
    x: &GroupElement,
    y: &GroupElement,
    o: &GroupElement,
) -> Result<HalfInt> {
    let dxo = metric.distance(x, o)? as i64;
    let dyo = metric.distance(y, o)? as i64;
    let dxy = metric.distance(x, y)? as i64;
    Ok(HalfInt(dxo + dyo - dxy))
}

fn distance_matrix(metric: &dyn Metric, points: &[GroupElement]) -> Result<Vec<Vec<i64>>> {
    let n = points.len();
    let mut d = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = metric.distance(&points[i], &points[j])? as i64;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    Ok(d)
}

/// Result of a four-point scan.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaEstimate {
    pub delta: HalfInt,
    pub points: usize,
    pub quadruples: u64,
    /// Indices `(w, x, y, z)` into the point list realizing the maximum.
    pub witness: Option<[usize; 4]>,
}

/// Max over all quadruples of `min{(x,y)_w, (y,z)_w} − (x,z)_w`.
pub fn delta_estimate(metric: &dyn Metric, points: &[GroupElement]) -> Result<DeltaEstimate> {
    let d = distance_matrix(metric, points)?;
    let n = points.len();
    let mut best = HalfInt(0);
    let mut witness = None;
    let mut count = 0u64;
    let gp = |x: usize, y: usize, w: usize| d[x][w] + d[y][w] - d[x][y];
    for w in 0..n {
        for x in 0..n {
            for y in 0..n {
                let xy = gp(x, y, w);
                for z in 0..n {
                    count += 1;
                    let defect = xy.min(gp(y, z, w)) - gp(x, z, w);
                    if defect > best.0 {
                        best = HalfInt(defect);
                        witness = Some([w, x, y, z]);
                    }
                }
            }
        }
    }
    Ok(DeltaEstimate {
        delta: best,
        points: n,
        quadruples: count,
        witness,
    })
}

/// `count` distinct elements of the X-ball of radius `radius`, always
/// including the identity, chosen reproducibly from `seed`.
pub fn sample_points(model: &GroupModel, radius: usize, count: usize, seed: u64) -> Vec<GroupElement> {
    let mut all = model.ball_elements(radius);
    if count >= all.len() {
        return all;
    }
    let one = all.remove(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    all.shuffle(&mut rng);
    let mut out = vec![one];
    out.extend(all.into_iter().take(count.saturating_sub(1)));
    out
}

/// Chain-infimum construction of a visual metric on a finite point set.
#[derive(Clone, Debug, Serialize)]
pub struct VisualChain {
    pub epsilon: f64,
    /// `ε′ = e^{εδ̂} − 1`.
    pub epsilon_prime: f64,
    /// Four-point constant of the set relative to the base point.
    pub delta: HalfInt,
    pub d: Vec<Vec<f64>>,
    pub lower_bound_holds: bool,
    pub upper_bound_holds: bool,
}

pub fn visual_metric_chain(
    metric: &dyn Metric,
    points: &[GroupElement],
    epsilon: f64,
    o: &GroupElement,
) -> Result<VisualChain> {
    let n = points.len();
    let mut gp = vec![vec![0i64; n]; n];
    let dist_o: Vec<i64> = points
        .iter()
        .map(|p| metric.distance(p, o).map(|v| v as i64))
        .collect::<Result<_>>()?;
    let d = distance_matrix(metric, points)?;
    for i in 0..n {
        for j in 0..n {
            gp[i][j] = dist_o[i] + dist_o[j] - d[i][j];
        }
    }
    let mut delta = 0i64;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                delta = delta.max(gp[x][y].min(gp[y][z]) - gp[x][z]);
            }
        }
    }
    let delta = HalfInt(delta);
    if (epsilon * delta.as_f64()).exp() > std::f64::consts::SQRT_2 {
        return Err(LabError::Precondition(format!(
            "epsilon {epsilon} too large for delta {delta}: need epsilon <= {:.6}",
            std::f64::consts::SQRT_2.ln() / delta.as_f64()
        )));
    }
    let eps_prime = (epsilon * delta.as_f64()).exp() - 1.0;
    let w: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if points[i] == points[j] {
                        0.0
                    } else {
                        (-epsilon * gp[i][j] as f64 / 2.0).exp()
                    }
                })
                .collect()
        })
        .collect();
    let mut dm = w.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dm[i][k] + dm[k][j];
                if via < dm[i][j] {
                    dm[i][j] = via;
                }
            }
        }
    }
    let tol = 1e-12;
    let mut lower = true;
    let mut upper = true;
    for i in 0..n {
        for j in 0..n {
            if points[i] == points[j] {
                continue;
            }
            upper &= dm[i][j] <= w[i][j] + tol;
            lower &= (1.0 - 2.0 * eps_prime) * w[i][j] <= dm[i][j] + tol;
        }
    }
    Ok(VisualChain {
        epsilon,
        epsilon_prime: eps_prime,
        delta,
        d: dm,
        lower_bound_holds: lower,
        upper_bound_holds: upper,
    })
}
