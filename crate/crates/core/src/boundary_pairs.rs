//! Bi-infinite geodesics between two ray directions, seen through finite
//! windows: `S(ξ,η;D)`, the penetration dichotomy, splicing and the
//! three-way split.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::group_model::{CosetRef, Letter};
use crate::rays::{ray_truncation, RayScheme};
use crate::relative_graph::{Explorer, Fraction, GeoDag, PathRec};
use crate::separating_cosets::{
    all_geodesics_penetrate, cosets, partition, sep_cosets_of_dag, SepCosetRecord, TripleSplit,
};

/// The segment `x₋ₙ → xₙ` of a bi-infinite geodesic from `ξ` to `η`.
#[derive(Clone, Debug)]
pub struct BiInfiniteWindow {
    pub xi: RayScheme,
    pub eta: RayScheme,
    pub n: usize,
    /// Central path, geodesic-checked, from the depth-`n` vertex of `ξ`.
    pub path: PathRec,
    pub records: Vec<SepCosetRecord>,
}

impl BiInfiniteWindow {
    pub fn cosets(&self) -> Vec<CosetRef> {
        cosets(&self.records)
    }
}

/// The window obtained by running `ξ` backwards into the shared base and
/// then following `η`.
pub fn central_window(
    e: &Explorer,
    xi: &RayScheme,
    eta: &RayScheme,
    n: usize,
    d: u64,
) -> Result<BiInfiniteWindow> {
    let model = e.model();
    if xi.base != eta.base {
        return Err(LabError::Precondition(format!(
            "schemes start at {} and {}; a central window needs a shared base",
            model.format_element(&xi.base),
            model.format_element(&eta.base)
        )));
    }
    let empty = |path| BiInfiniteWindow {
        xi: xi.clone(),
        eta: eta.clone(),
        n,
        path,
        records: Vec::new(),
    };
    if n == 0 || xi == eta {
        return Ok(empty(PathRec::empty(xi.base.clone())));
    }
    let minus = ray_truncation(e, xi, n)?.reversed(model);
    let plus = ray_truncation(e, eta, n)?;
    let mut path = minus.concat(model, &plus)?;
    let (start, end) = (path.base.clone(), path.end(model));
    if e.dist(&start, &end)? != path.len() as u64 {
        return Err(LabError::WidenWindow(format!(
            "the join of {} and {} is not geodesic at n={n}",
            xi.describe(model),
            eta.describe(model)
        )));
    }
    path.geodesic = true;
    let dag = e.geodesic_dag(&start, &end)?;
    let records = sep_cosets_of_dag(e, &dag, d)?;
    Ok(BiInfiniteWindow {
        records,
        ..empty(path)
    })
}

/// Geodesics between the depth-`n` vertices of two rays, for directions
/// whose rays do not meet only at a shared base.
pub fn pair_dag(e: &Explorer, xi: &RayScheme, eta: &RayScheme, n: usize) -> Result<GeoDag> {
    let model = e.model();
    let a = ray_truncation(e, xi, n)?.end(model);
    let b = ray_truncation(e, eta, n)?.end(model);
    e.geodesic_dag(&a, &b)
}

/// `S(x₋ₙ, xₙ; D)` for the pair, empty for identical schemes.
pub fn pair_window(
    e: &Explorer,
    xi: &RayScheme,
    eta: &RayScheme,
    n: usize,
    d: u64,
) -> Result<Vec<SepCosetRecord>> {
    if xi == eta || n == 0 {
        return Ok(Vec::new());
    }
    sep_cosets_of_dag(e, &pair_dag(e, xi, eta, n)?, d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    XiZeta,
    ZetaEta,
}

fn check_multiple(d: u64, c_hat: Option<Fraction>, k: u64) -> Result<()> {
    if let Some(c) = c_hat {
        if d * c.den < k * c.num {
            return Err(LabError::Precondition(format!("D={d} is below {k}*C with C={c}")));
        }
    }
    Ok(())
}

/// Which of the windows `(ξ,ζ)` and `(ζ,η)` has every geodesic through `b`.
pub fn dichotomy_check(
    e: &Explorer,
    xi: &RayScheme,
    eta: &RayScheme,
    zeta: &RayScheme,
    b: &CosetRef,
    n: usize,
    d: u64,
    c_hat: Option<Fraction>,
) -> Result<Side> {
    check_multiple(d, c_hat, 6)?;
    for (side, (p, q)) in [(Side::XiZeta, (xi, zeta)), (Side::ZetaEta, (zeta, eta))] {
        if p == q {
            continue;
        }
        let dag = pair_dag(e, p, q, n)?;
        if all_geodesics_penetrate(e, &dag, b) {
            return Ok(side);
        }
    }
    Err(LabError::TheoremViolation(format!(
        "coset {} is avoided on both sides: xi {}, eta {}, zeta {}, n={n}, D={d}",
        e.model().format_element(&b.rep),
        xi.describe(e.model()),
        eta.describe(e.model()),
        zeta.describe(e.model())
    )))
}

/// `β` up to its entrance into `b`, one `H`-edge to the exit of `α` from
/// `b`, then `α` onwards.
pub fn splice(
    e: &Explorer,
    beta: &PathRec,
    alpha: &PathRec,
    b: &CosetRef,
    c_hat: Fraction,
) -> Result<PathRec> {
    let model = e.model();
    let find = |p: &PathRec, name: &str| {
        p.components(model)
            .into_iter()
            .find(|c| &c.coset == b)
            .ok_or_else(|| {
                LabError::Precondition(format!(
                    "{name} does not penetrate {}",
                    model.format_element(&b.rep)
                ))
            })
    };
    let cb = find(beta, "beta")?;
    let ca = find(alpha, "alpha")?;
    let gap = e.relative_metric(b.family, &cb.entrance, &cb.exit);
    if let Some(v) = gap.finite() {
        if c_hat.bounds(v, 3) {
            return Err(LabError::Precondition(format!(
                "gap {v} of beta in {} is at most 3*C with C={c_hat}",
                model.format_element(&b.rep)
            )));
        }
    }
    let mut labels = beta.labels[..cb.start].to_vec();
    if cb.entrance != ca.exit {
        let (family, elem) = model
            .family_of(&model.left_quotient(&cb.entrance, &ca.exit))
            .expect("entrance and exit share a coset");
        labels.push(Letter::H { family, elem });
    }
    labels.extend_from_slice(&alpha.labels[ca.end..]);
    let mut out = PathRec::new(beta.base.clone(), labels);
    if e.dist(&out.base, &out.end(model))? != out.len() as u64 {
        return Err(LabError::TheoremViolation(format!(
            "spliced path {} from {} is not geodesic",
            model.format_labels(&out.labels).join(" "),
            model.format_element(&out.base)
        )));
    }
    out.geodesic = true;
    Ok(out)
}

/// `S(ξ,η) = S′ ⊔ S″ ⊔ F` on depth-`n` windows, with `D ≥ 11·Ĉ` enforced
/// when `c_hat` is given.
pub fn f4_split(
    e: &Explorer,
    xi: &RayScheme,
    eta: &RayScheme,
    zeta: &RayScheme,
    n: usize,
    d: u64,
    c_hat: Option<Fraction>,
) -> Result<TripleSplit> {
    check_multiple(d, c_hat, 11)?;
    let all = pair_window(e, xi, eta, n, d)?;
    let left = cosets(&pair_window(e, xi, zeta, n, d)?);
    let right = cosets(&pair_window(e, zeta, eta, n, d)?);
    partition(e.model(), all, &left, &right)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::group_model::GroupElement;
    use crate::group_model::{builtin_free_cyclic, builtin_free_product};
    use crate::relative_graph::ExplorationBudget;

    fn fc(l: usize) -> Explorer {
        Explorer::new(Arc::new(builtin_free_cyclic()), ExplorationBudget::tube(3, l))
    }

    fn fp() -> Explorer {
        Explorer::new(Arc::new(builtin_free_product()), ExplorationBudget::tube(3, 3))
    }

    fn scheme(e: &Explorer, s: &str) -> RayScheme {
        RayScheme::parse(e.model(), s).unwrap()
    }

    fn reps(e: &Explorer, c: &[CosetRef]) -> Vec<String> {
        c.iter().map(|c| e.model().format_element(&c.rep)).collect()
    }

    #[test]
    fn central_windows() {
        let e = fc(8);
        let xi = scheme(&e, "period=[h:ab^3, x:a]");
        let eta = scheme(&e, "period=[x:a^-1, h:ab^-3]");
        let w = central_window(&e, &xi, &eta, 4, 5).unwrap();
        assert_eq!(w.path.len(), 8);
        assert_eq!(w.records.len(), 4);
        let mut back = central_window(&e, &eta, &xi, 4, 5).unwrap().cosets();
        back.reverse();
        assert_eq!(back, w.cosets());
        let w6 = central_window(&e, &xi, &eta, 6, 5).unwrap();
        let c6 = w6.cosets();
        assert!(w.cosets().iter().all(|c| c6.contains(c)));
        assert!(central_window(&e, &xi, &eta, 0, 5).unwrap().path.is_empty());
        // Two H-edges of one coset meet at the base. Below L=12 the merged
        // edge is not a letter, so the budget check fires instead.
        let bad = scheme(&e, "period=[h:ab^-3, x:a^-1]");
        assert!(matches!(
            central_window(&e, &xi, &bad, 4, 5),
            Err(LabError::Partiality(_))
        ));
        assert!(matches!(
            central_window(&fc(12), &xi, &bad, 4, 5),
            Err(LabError::WidenWindow(_))
        ));
    }

    #[test]
    fn free_product_windows() {
        let e = fp();
        let xi = scheme(&e, "period=[a, b]");
        let eta = scheme(&e, "period=[b^4, a^2]");
        let w = central_window(&e, &xi, &eta, 3, 1).unwrap();
        assert_eq!(w.records.len(), 6);
        let pw = pair_window(&e, &xi, &eta, 3, 1).unwrap();
        assert_eq!(cosets(&pw), w.cosets());
    }

    #[test]
    fn dichotomy() {
        let e = fp();
        let xi = scheme(&e, "period=[a, b]");
        let eta = scheme(&e, "period=[b^4, a^2]");
        let zeta = scheme(&e, "period=[a^2, b^3]");
        let w = central_window(&e, &xi, &eta, 3, 1).unwrap();
        let cs = w.cosets();
        let deep_xi = &cs[0];
        let deep_eta = cs.last().unwrap();
        assert_eq!(
            dichotomy_check(&e, &xi, &eta, &zeta, deep_xi, 3, 1, None).unwrap(),
            Side::XiZeta
        );
        assert_eq!(
            dichotomy_check(&e, &xi, &eta, &zeta, deep_eta, 3, 1, None).unwrap(),
            Side::ZetaEta
        );
    }

    #[test]
    fn splicing() {
        let e = fc(16);
        let c = Fraction::new(1, 1);
        let beta = ray_truncation(&e, &scheme(&e, "period=[h:ab^7, x:a]"), 6).unwrap();
        let alpha = ray_truncation(
            &e,
            &scheme(&e, "prefix=[h:ab^8, x:b^-1] period=[h:ab^7, x:a]"),
            6,
        )
        .unwrap();
        let h = CosetRef {
            family: 0,
            rep: GroupElement::identity(),
        };
        let s = splice(&e, &beta, &alpha, &h, c).unwrap();
        assert_eq!(s.labels, alpha.labels);
        let same = splice(&e, &beta, &beta, &h, c).unwrap();
        assert_eq!(same.labels, beta.labels);
        let short = PathRec::new(GroupElement::identity(), vec![Letter::power(1), Letter::x(0)]);
        assert!(matches!(
            splice(&e, &short, &short, &h, c),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn three_way_splits() {
        let e = fp();
        let xi = scheme(&e, "period=[a, b]");
        let eta = scheme(&e, "period=[b^4, a^2]");
        let zeta = scheme(&e, "period=[a^2, b^3]");
        let s = f4_split(&e, &xi, &eta, &zeta, 6, 1, Some(Fraction::ZERO)).unwrap();
        assert!(s.rest.is_empty());
        assert_eq!(s.first.len() + s.second.len(), 12);
        let same = f4_split(&e, &xi, &eta, &xi, 6, 1, None).unwrap();
        assert!(same.first.is_empty() && same.rest.is_empty());
        assert_eq!(reps(&e, &cosets(&same.second)).len(), 12);
        assert!(matches!(
            f4_split(&e, &xi, &eta, &zeta, 6, 5, Some(Fraction::new(1, 2))),
            Err(LabError::Precondition(_))
        ));
    }
}
