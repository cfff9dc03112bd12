//! Tail equivalence on eventually periodic sequences, and a window check
//! comparing lex-min labels of `ξ` and `g·ξ`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::group_model::GroupElement;
use crate::rays::{phi_prefix_scheme, tail_meet, RayScheme};
use crate::relative_graph::{Explorer, PathRec};

/// `pre · per · per · …` over opaque tokens, kept in canonical form: the
/// period is primitive and no suffix of the preperiod can be rolled into it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EvPeriodicSeq {
    pre: Vec<u64>,
    per: Vec<u64>,
}

impl EvPeriodicSeq {
    pub fn new(pre: Vec<u64>, per: Vec<u64>) -> Result<EvPeriodicSeq> {
        if per.is_empty() {
            return Err(LabError::Input("the period must be nonempty".into()));
        }
        let mut pre = pre;
        let mut per = primitive_root(per);
        while let Some(&last) = pre.last() {
            if last != *per.last().unwrap() {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Ok(EvPeriodicSeq { pre, per })
    }

    pub fn preperiod(&self) -> &[u64] {
        &self.pre
    }

    pub fn period(&self) -> &[u64] {
        &self.per
    }

    pub fn at(&self, i: usize) -> u64 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.per[(i - self.pre.len()) % self.per.len()]
        }
    }

    /// Drops the first `k` tokens.
    pub fn shift(&self, k: usize) -> EvPeriodicSeq {
        let pre = self.pre.iter().skip(k).copied().collect();
        let off = k.saturating_sub(self.pre.len()) % self.per.len();
        let mut per = self.per.clone();
        per.rotate_left(off);
        EvPeriodicSeq::new(pre, per).expect("period stays nonempty")
    }
}

fn primitive_root(per: Vec<u64>) -> Vec<u64> {
    let n = per.len();
    for p in 1..n {
        if n % p == 0 && (p..n).all(|i| per[i] == per[i - p]) {
            return per[..p].to_vec();
        }
    }
    per
}

impl fmt::Display for EvPeriodicSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "pre=[{}];per=[{}]", list(&self.pre), list(&self.per))
    }
}

impl FromStr for EvPeriodicSeq {
    type Err = LabError;

    /// Reads `pre=[2,3];per=[0,1]`; `pre` may be omitted.
    fn from_str(s: &str) -> Result<EvPeriodicSeq> {
        let mut pre = Vec::new();
        let mut per = None;
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| LabError::Input(format!("expected key=[...] in '{part}'")))?;
            let body = value
                .trim()
                .strip_prefix('[')
                .and_then(|v| v.strip_suffix(']'))
                .ok_or_else(|| LabError::Input(format!("expected a bracketed list in '{part}'")))?;
            let items = body
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<u64>()
                        .map_err(|_| LabError::Input(format!("bad token '{t}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            match key.trim() {
                "pre" => pre = items,
                "per" => per = Some(items),
                other => return Err(LabError::Input(format!("unknown key '{other}'"))),
            }
        }
        let per = per.ok_or_else(|| LabError::Input(format!("no period in '{s}'")))?;
        EvPeriodicSeq::new(pre, per)
    }
}

/// A pair `(n, m)` such that `w0` without its first `n` tokens equals `w1`
/// without its first `m`, if one exists.
pub fn tail_equivalent(w0: &EvPeriodicSeq, w1: &EvPeriodicSeq) -> Option<(usize, usize)> {
    let p = w0.per.len();
    if w1.per.len() != p {
        return None;
    }
    // w1.per[j] = w0.per[(j + r) % p]
    let r = (0..p).find(|&r| (0..p).all(|j| w1.per[j] == w0.per[(j + r) % p]))?;
    let mut n = w0.pre.len();
    let mut m = w1.pre.len() + (p - r) % p;
    while n > 0 && m > 0 && w0.at(n - 1) == w1.at(m - 1) {
        n -= 1;
        m -= 1;
    }
    Some((n, m))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TailVerdict {
    /// Certified lex-min labels agree from `witness` on, for `overlap` steps.
    TailAgree { witness: (usize, usize), overlap: usize },
    TailDisagree { reason: String },
    Inconclusive { reason: String },
}

/// Compares the certified lex-min prefixes for `ξ` (given by `s1`) and
/// `g·ξ` (given by `s2`) after aligning them at a common vertex.
///
/// The verdict is about the compared window only.
pub fn phi_pair_tailcheck(
    e: &Explorer,
    s1: &RayScheme,
    s2: &RayScheme,
    g: &GroupElement,
    depth: usize,
    d: u64,
) -> Result<TailVerdict> {
    let model = e.model();
    let moved = s1.translate(model, g);
    let run = s1.period_len().max(s2.period_len());
    if tail_meet(model, &moved, s2, depth, run).is_none() {
        return Ok(TailVerdict::TailDisagree {
            reason: format!(
                "tails are not g-translates within depth {depth} (g = {})",
                model.format_element(g)
            ),
        });
    }
    let p1 = phi_prefix_scheme(e, s1, depth, d)?;
    let p2 = phi_prefix_scheme(e, s2, depth, d)?;
    let one = GroupElement::identity();
    let v1 = PathRec::new(one.clone(), p1.certified().to_vec()).vertices(model);
    let v2 = PathRec::new(one, p2.certified().to_vec()).vertices(model);
    let meet = v1.iter().enumerate().find_map(|(i, a)| {
        let ga = model.mul(g, a);
        v2.iter().position(|b| *b == ga).map(|j| (i, j))
    });
    let Some((m1, m2)) = meet else {
        return Ok(TailVerdict::Inconclusive {
            reason: "certified prefixes share no aligned vertex".into(),
        });
    };
    let overlap = (p1.certified_len - m1).min(p2.certified_len - m2);
    if overlap < 2 * run {
        return Ok(TailVerdict::Inconclusive {
            reason: format!("aligned overlap {overlap} is shorter than two periods"),
        });
    }
    let a = &p1.labels[m1..m1 + overlap];
    let b = &p2.labels[m2..m2 + overlap];
    if a.iter().map(|l| model.letter_token(l)).eq(b.iter().map(|l| model.letter_token(l))) {
        Ok(TailVerdict::TailAgree {
            witness: (m1, m2),
            overlap,
        })
    } else {
        Ok(TailVerdict::TailDisagree {
            reason: format!("labels differ within {overlap} aligned steps"),
        })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::group_model::builtin_free_cyclic;
    use crate::relative_graph::ExplorationBudget;

    fn seq(s: &str) -> EvPeriodicSeq {
        s.parse().unwrap()
    }

    /// Tails agree iff they agree on a window past both preperiods that is
    /// longer than the sum of the periods.
    fn brute(w0: &EvPeriodicSeq, w1: &EvPeriodicSeq) -> bool {
        let len = w0.pre.len() + w1.pre.len() + w0.per.len() + w1.per.len();
        (0..=w0.pre.len() + w0.per.len()).any(|n| {
            (0..=w1.pre.len() + w1.per.len())
                .any(|m| (0..len).all(|i| w0.at(n + i) == w1.at(m + i)))
        })
    }

    #[test]
    fn canonical_forms() {
        let s = EvPeriodicSeq::new(vec![5, 0, 1], vec![0, 1, 0, 1]).unwrap();
        assert_eq!(s.preperiod(), &[5]);
        assert_eq!(s.period(), &[0, 1]);
        assert_eq!(seq("pre=[1];per=[0,1]").period(), &[1, 0]);
        assert_eq!(seq("per=[7]").to_string(), "pre=[];per=[7]");
        assert!("pre=[1]".parse::<EvPeriodicSeq>().is_err());
        assert!("per=[]".parse::<EvPeriodicSeq>().is_err());
        assert!("per=[x]".parse::<EvPeriodicSeq>().is_err());
    }

    #[test]
    fn decisions() {
        assert_eq!(tail_equivalent(&seq("per=[0,1]"), &seq("per=[1,0]")), Some((0, 1)));
        assert_eq!(tail_equivalent(&seq("per=[0]"), &seq("per=[1]")), None);
        let (a, b) = (seq("pre=[2,3];per=[0,1]"), seq("pre=[9];per=[1,0]"));
        let (n, m) = tail_equivalent(&a, &b).unwrap();
        assert!((0..20).all(|i| a.at(n + i) == b.at(m + i)));
        assert!(brute(&a, &b));
    }

    fn arb_seq() -> impl Strategy<Value = EvPeriodicSeq> {
        (
            prop::collection::vec(0u64..3, 0..5),
            prop::collection::vec(0u64..3, 1..5),
        )
            .prop_map(|(pre, per)| EvPeriodicSeq::new(pre, per).unwrap())
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(a in arb_seq(), b in arb_seq()) {
            let got = tail_equivalent(&a, &b);
            prop_assert_eq!(got.is_some(), brute(&a, &b));
            if let Some((n, m)) = got {
                let len = a.pre.len() + b.pre.len() + 2 * a.per.len();
                prop_assert!((0..len).all(|i| a.at(n + i) == b.at(m + i)));
            }
        }

        #[test]
        fn shifts_stay_in_class(a in arb_seq(), k in 0usize..8) {
            prop_assert!(tail_equivalent(&a, &a.shift(k)).is_some());
            prop_assert!(tail_equivalent(&a.shift(k), &a).is_some());
        }

        #[test]
        fn equivalence_laws(a in arb_seq(), b in arb_seq(), c in arb_seq()) {
            prop_assert!(tail_equivalent(&a, &a).is_some());
            prop_assert_eq!(tail_equivalent(&a, &b).is_some(), tail_equivalent(&b, &a).is_some());
            if tail_equivalent(&a, &b).is_some() && tail_equivalent(&b, &c).is_some() {
                prop_assert!(tail_equivalent(&a, &c).is_some());
            }
        }
    }

    #[test]
    fn phi_pairs() {
        let e = Explorer::new(Arc::new(builtin_free_cyclic()), ExplorationBudget::tube(3, 8));
        let model = e.model();
        let s1 = RayScheme::parse(model, "period=[h:ab^3, x:a]").unwrap();
        let one = GroupElement::identity();
        assert!(matches!(
            phi_pair_tailcheck(&e, &s1, &s1, &one, 10, 5).unwrap(),
            TailVerdict::TailAgree { witness: (0, 0), .. }
        ));
        let g = model.parse_element("(ab)^3a").unwrap();
        let s2 = s1.translate(model, &g);
        assert!(matches!(
            phi_pair_tailcheck(&e, &s1, &s2, &g, 10, 5).unwrap(),
            TailVerdict::TailAgree { witness: (0, 2), .. }
        ));
        let other = RayScheme::parse(model, "period=[h:ab^3, x:b^-1]").unwrap();
        assert!(matches!(
            phi_pair_tailcheck(&e, &s1, &other, &one, 10, 5).unwrap(),
            TailVerdict::TailDisagree { .. }
        ));
    }
}
