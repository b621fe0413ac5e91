use crate::subst::SubstitutionRule;
use serde::Serialize;
use std::fmt;

/// Substitution matrix: entry `(i, j)` counts children of type `i` in the
/// dissection of tile `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubstMatrix {
    n: usize,
    entries: Vec<u64>,
}

impl SubstMatrix {
    /// From row-major rows. Panics on ragged or non-square input.
    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let n = rows.len();
        assert!(n > 0, "empty matrix");
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        SubstMatrix {
            n,
            entries: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SubstMatrix {
            n,
            entries: vec![0; n * n],
        };
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.n).map(<[u64]>::to_vec).collect()
    }

    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.n)
            .map(|r| r.iter().map(|&x| x as f64).collect())
            .collect()
    }

    /// `A · u` in exact integer arithmetic; `None` on overflow.
    pub fn mul_vec(&self, u: &[u128]) -> Option<Vec<u128>> {
        assert_eq!(u.len(), self.n);
        (0..self.n)
            .map(|i| {
                (0..self.n).try_fold(0u128, |acc, j| {
                    acc.checked_add((self.get(i, j) as u128).checked_mul(u[j])?)
                })
            })
            .collect()
    }

    /// `A^m · u`; `None` on overflow.
    pub fn pow_vec(&self, u: &[u128], m: u32) -> Option<Vec<u128>> {
        let mut v = u.to_vec();
        for _ in 0..m {
            v = self.mul_vec(&v)?;
        }
        Some(v)
    }

    /// `A^m e_i`.
    pub fn column_of_power(&self, i: usize, m: u32) -> Option<Vec<u128>> {
        let mut e = vec![0u128; self.n];
        e[i] = 1;
        self.pow_vec(&e, m)
    }

    /// `P A P⁻¹` for the relabeling `i ↦ perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> SubstMatrix {
        let n = self.n;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[perm[i] * n + perm[j]] = self.get(i, j);
            }
        }
        SubstMatrix { n, entries }
    }
}

impl fmt::Display for SubstMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

pub fn substitution_matrix(rule: &SubstitutionRule) -> SubstMatrix {
    let n = rule.n();
    let mut entries = vec![0u64; n * n];
    for j in 0..n {
        for c in rule.children(j) {
            entries[c.tile * n + j] += 1;
        }
    }
    SubstMatrix { n, entries }
}

/// Least `m ≤ n² - 2n + 2` with `A^m > 0`, if any.
pub fn is_primitive(a: &SubstMatrix) -> (bool, Option<u32>) {
    let n = a.n;
    let bound = (n * n).saturating_sub(2 * n) + 2;
    let base: Vec<bool> = a.entries.iter().map(|&x| x > 0).collect();
    let mut power = base.clone();
    for m in 1..=bound {
        if power.iter().all(|&b| b) {
            return (true, Some(m as u32));
        }
        let mut next = vec![false; n * n];
        for i in 0..n {
            for k in 0..n {
                if !power[i * n + k] {
                    continue;
                }
                for j in 0..n {
                    if base[k * n + j] {
                        next[i * n + j] = true;
                    }
                }
            }
        }
        power = next;
    }
    (false, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subst::{chair, penrose};

    #[test]
    fn builtin_matrices() {
        let p = substitution_matrix(&penrose());
        assert_eq!(p.rows(), vec![vec![2, 1], vec![1, 1]]);
        assert_eq!(p.column_sums(), vec![3, 2]);
        assert_eq!(substitution_matrix(&chair()).rows(), vec![vec![4]]);
        assert_eq!(p.to_string(), "2 1\n1 1\n");
    }

    #[test]
    fn primitivity() {
        let a = SubstMatrix::from_rows(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(is_primitive(&a), (true, Some(1)));
        let b = SubstMatrix::from_rows(&[vec![0, 1], vec![1, 1]]);
        assert_eq!(is_primitive(&b), (true, Some(2)));
        assert_eq!(is_primitive(&SubstMatrix::identity(2)), (false, None));
        // Wielandt's extremal matrix attains the bound n² - 2n + 2
        let w = SubstMatrix::from_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]);
        assert_eq!(is_primitive(&w), (true, Some(5)));
    }

    #[test]
    fn relabeling_conjugates() {
        let rule = penrose();
        let swapped = rule.relabeled(&[1, 0]).unwrap();
        let a = substitution_matrix(&rule);
        assert_eq!(substitution_matrix(&swapped), a.permuted(&[1, 0]));
        assert_eq!(a.permuted(&[1, 0]).rows(), vec![vec![1, 1], vec![1, 2]]);
    }

    #[test]
    fn integer_powers() {
        let a = SubstMatrix::from_rows(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(a.column_of_power(0, 5).unwrap(), vec![89, 55]);
        assert_eq!(a.pow_vec(&[2, 1], 1).unwrap(), vec![5, 3]);
    }
}
