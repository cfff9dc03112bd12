//! Finite factor groups given by multiplication tables.

use crate::error::{LabError, Result};

/// A finite group stored as a Cayley table with the identity at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    pub name: String,
    /// True for `Zn` factors; their elements print as powers of the generator.
    pub cyclic: bool,
    table: Vec<Vec<u16>>,
    inverses: Vec<u16>,
}

impl FiniteGroup {
    pub fn cyclic(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(LabError::Load(format!("Z{n} has no nontrivial elements")));
        }
        if n > u16::MAX as usize {
            return Err(LabError::Load(format!("Z{n} is too large")));
        }
        let table = (0..n)
            .map(|i| (0..n).map(|j| ((i + j) % n) as u16).collect())
            .collect();
        let inverses = (0..n).map(|i| ((n - i) % n) as u16).collect();
        Ok(FiniteGroup {
            name: format!("Z{n}"),
            cyclic: true,
            table,
            inverses,
        })
    }

    /// Builds a factor from an arbitrary table, validating the group axioms
    /// and relabelling so that the identity sits at index 0.
    pub fn from_table(name: &str, rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        let bad = |msg: String| Err(LabError::Load(format!("table {name}: {msg}")));
        if n < 2 {
            return bad("needs at least two elements".into());
        }
        if n > u16::MAX as usize {
            return bad("too large".into());
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return bad(format!("row {i} has {} entries, expected {n}", r.len()));
            }
            if let Some(&v) = r.iter().find(|&&v| v >= n) {
                return bad(format!("entry {v} in row {i} is out of range"));
            }
        }
        let identity = (0..n).find(|&e| (0..n).all(|x| rows[e][x] == x && rows[x][e] == x));
        let Some(e) = identity else {
            return bad("no identity element".into());
        };
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if rows[rows[a][b]][c] != rows[a][rows[b][c]] {
                        return bad(format!("not associative at ({a},{b},{c})"));
                    }
                }
            }
        }
        for a in 0..n {
            if !(0..n).any(|b| rows[a][b] == e && rows[b][a] == e) {
                return bad(format!("element {a} has no inverse"));
            }
        }
        // Swap labels 0 and e.
        let relabel = |x: usize| {
            if x == e {
                0
            } else if x == 0 {
                e
            } else {
                x
            }
        };
        let mut table = vec![vec![0u16; n]; n];
        for (a, row) in rows.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                table[relabel(a)][relabel(b)] = relabel(v) as u16;
            }
        }
        let inverses = (0..n)
            .map(|a| (0..n).find(|&b| table[a][b] == 0).unwrap() as u16)
            .collect();
        Ok(FiniteGroup {
            name: name.to_string(),
            cyclic: false,
            table,
            inverses,
        })
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.table[a as usize][b as usize]
    }

    pub fn inv(&self, a: u16) -> u16 {
        self.inverses[a as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_table_is_addition() {
        let z5 = FiniteGroup::cyclic(5).unwrap();
        assert_eq!(z5.mul(3, 4), 2);
        assert_eq!(z5.inv(2), 3);
    }

    #[test]
    fn identity_is_relabelled_to_zero() {
        // Z2 with the identity stored at index 1.
        let g = FiniteGroup::from_table("T", vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(g.mul(0, 1), 1);
        assert_eq!(g.mul(1, 1), 0);
    }

    #[test]
    fn corrupted_tables_are_rejected() {
        assert!(FiniteGroup::from_table("T", vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(FiniteGroup::from_table("T", vec![vec![0, 1, 2], vec![1, 2, 0]]).is_err());
        // Latin square with identity that is not associative.
        let rows = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(FiniteGroup::from_table("L", rows).is_err());
    }

    #[test]
    fn s3_table_loads() {
        // S3 as permutations of {0,1,2}; composition computed on the fly.
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let rows = perms
            .iter()
            .map(|p| {
                perms
                    .iter()
                    .map(|q| idx([p[q[0]], p[q[1]], p[q[2]]]))
                    .collect()
            })
            .collect();
        let g = FiniteGroup::from_table("S3", rows).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.mul(1, 1), 0);
        assert_ne!(g.mul(1, 2), g.mul(2, 1));
    }
}
