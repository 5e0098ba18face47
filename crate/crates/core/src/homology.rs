//! Finitely presented abelian groups via Smith normal form.

use serde::{Deserialize, Serialize};

use crate::error::{EchError, Result};

pub type Matrix = Vec<Vec<i128>>;

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal with
/// `d_1 | d_2 | ...`, all `d_i ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: Matrix,
    pub v: Matrix,
    pub d: Matrix,
    pub diagonal: Vec<i128>,
    pub rank: usize,
}

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

fn swap_rows(m: &mut Matrix, i: usize, j: usize) {
    m.swap(i, j);
}

fn swap_cols(m: &mut Matrix, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

/// row_i += k * row_j
fn add_row(m: &mut Matrix, i: usize, j: usize, k: i128) {
    if k == 0 {
        return;
    }
    let src = m[j].clone();
    for (a, b) in m[i].iter_mut().zip(src) {
        *a += k * b;
    }
}

/// col_i += k * col_j
fn add_col(m: &mut Matrix, i: usize, j: usize, k: i128) {
    if k == 0 {
        return;
    }
    for row in m.iter_mut() {
        row[i] += k * row[j];
    }
}

fn negate_row(m: &mut Matrix, i: usize) {
    for a in m[i].iter_mut() {
        *a = -*a;
    }
}

pub fn smith_normal_form(a: &Matrix) -> SmithForm {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut d = a.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // Pivot: smallest nonzero absolute value in the remaining block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if d[i][j] != 0 && best.map_or(true, |(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        swap_rows(&mut d, t, pi);
        swap_rows(&mut u, t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                let q = d[i][t].div_euclid(d[t][t]);
                add_row(&mut d, i, t, -q);
                add_row(&mut u, i, t, -q);
                if d[i][t] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                let q = d[t][j].div_euclid(d[t][t]);
                add_col(&mut d, j, t, -q);
                add_col(&mut v, j, t, -q);
                if d[t][j] != 0 {
                    dirty = true;
                }
            }
            if !dirty {
                // Enforce divisibility of the remaining block by the pivot.
                let mut offender = None;
                'scan: for i in t + 1..rows {
                    for j in t + 1..cols {
                        if d[i][j] % d[t][t] != 0 {
                            offender = Some(i);
                            break 'scan;
                        }
                    }
                }
                match offender {
                    Some(i) => {
                        add_row(&mut d, t, i, 1);
                        add_row(&mut u, t, i, 1);
                        dirty = true;
                    }
                    None => break,
                }
            }
            if dirty {
                // Move the smallest entry of row/column t into the pivot.
                let mut best = (t, t);
                for i in t..rows {
                    if d[i][t] != 0 && (d[best.0][best.1] == 0 || d[i][t].abs() < d[best.0][best.1].abs()) {
                        best = (i, t);
                    }
                }
                for j in t..cols {
                    if d[t][j] != 0 && (d[best.0][best.1] == 0 || d[t][j].abs() < d[best.0][best.1].abs()) {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    swap_rows(&mut d, t, best.0);
                    swap_rows(&mut u, t, best.0);
                }
                if best.1 != t {
                    swap_cols(&mut d, t, best.1);
                    swap_cols(&mut v, t, best.1);
                }
            }
        }
        if d[t][t] < 0 {
            negate_row(&mut d, t);
            negate_row(&mut u, t);
        }
        t += 1;
    }
    let diagonal: Vec<i128> = (0..rows.min(cols)).map(|i| d[i][i]).collect();
    let rank = diagonal.iter().filter(|x| **x != 0).count();
    SmithForm {
        u,
        v,
        d,
        diagonal,
        rank,
    }
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![0i128; m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l] == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

/// Row-style Hermite normal form; returns the nonzero rows, a basis of the
/// row lattice.
pub fn hermite_rows(rows: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let mut m: Matrix = rows.to_vec();
    if m.is_empty() {
        return m;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        loop {
            let mut piv = None;
            for i in r..m.len() {
                if m[i][c] != 0 && piv.map_or(true, |p: usize| m[i][c].abs() < m[p][c].abs()) {
                    piv = Some(i);
                }
            }
            let Some(p) = piv else { break };
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..m.len() {
                let q = m[i][c].div_euclid(m[r][c]);
                add_row(&mut m, i, r, -q);
                if m[i][c] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if m[r][c] != 0 {
            if m[r][c] < 0 {
                negate_row(&mut m, r);
            }
            for i in 0..r {
                let q = m[i][c].div_euclid(m[r][c]);
                add_row(&mut m, i, r, -q);
            }
            r += 1;
        }
    }
    m.truncate(r);
    m
}

/// `ℤ^generators / ⟨relations⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub generators: usize,
    #[serde(default)]
    pub relations: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupInvariants {
    pub rank: usize,
    pub torsion: Vec<i128>,
}

/// Result of analysing `(m_1..m_n) ↦ Σ m_i c_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelReport {
    pub rank: usize,
    pub basis: Vec<Vec<i64>>,
}

impl HomologyGroup {
    pub fn new(generators: usize, relations: Vec<Vec<i64>>) -> Result<Self> {
        let g = HomologyGroup {
            generators,
            relations,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn free(generators: usize) -> Self {
        HomologyGroup {
            generators,
            relations: vec![],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.relations {
            if r.len() != self.generators {
                return Err(EchError::DimensionMismatch(format!(
                    "relation has {} entries, group has {} generators",
                    r.len(),
                    self.generators
                )));
            }
        }
        Ok(())
    }

    fn relation_matrix(&self) -> Matrix {
        self.relations
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect()
    }

    fn smith(&self) -> SmithForm {
        let mut a = self.relation_matrix();
        if a.is_empty() {
            a = vec![vec![0; self.generators]];
        }
        smith_normal_form(&a)
    }

    pub fn invariants(&self) -> GroupInvariants {
        let s = self.smith();
        GroupInvariants {
            rank: self.generators - s.rank,
            torsion: s.diagonal.iter().copied().filter(|&d| d > 1).collect(),
        }
    }

    fn check_element(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.generators {
            return Err(EchError::DimensionMismatch(format!(
                "element has {} entries, group has {} generators",
                x.len(),
                self.generators
            )));
        }
        Ok(())
    }

    /// Canonical coordinates: `y = x·V` with torsion coordinates reduced mod
    /// their invariant factor and coordinates killed by a unit factor set to
    /// zero. Two elements are equal in the group iff their canonical forms
    /// coincide.
    pub fn canonical(&self, x: &[i64]) -> Result<Vec<i128>> {
        self.check_element(x)?;
        let s = self.smith();
        let row: Matrix = vec![x.iter().map(|&v| v as i128).collect()];
        let mut y = mat_mul(&row, &s.v).remove(0);
        for (i, d) in s.diagonal.iter().enumerate() {
            if *d != 0 {
                y[i] = y[i].rem_euclid(*d);
            }
        }
        Ok(y)
    }

    pub fn equal(&self, x: &[i64], y: &[i64]) -> Result<bool> {
        Ok(self.canonical(x)? == self.canonical(y)?)
    }

    pub fn is_zero(&self, x: &[i64]) -> Result<bool> {
        Ok(self.canonical(x)?.iter().all(|v| *v == 0))
    }

    /// Whether some positive multiple of `x` vanishes.
    pub fn is_torsion(&self, x: &[i64]) -> Result<bool> {
        let y = self.canonical(x)?;
        let s = self.smith();
        Ok(y.iter().enumerate().all(|(i, v)| {
            *v == 0 || s.diagonal.get(i).is_some_and(|d| *d != 0)
        }))
    }

    /// Kernel of `ℤ^n → H`, `(m_i) ↦ Σ m_i·classes[i]`, as a lattice with a
    /// Hermite-reduced basis.
    pub fn kernel(&self, classes: &[Vec<i64>]) -> Result<KernelReport> {
        for c in classes {
            self.check_element(c)?;
        }
        let n = classes.len();
        if n == 0 {
            return Ok(KernelReport {
                rank: 0,
                basis: vec![],
            });
        }
        // Left kernel of the stacked matrix [classes; relations].
        let mut stacked: Matrix = classes
            .iter()
            .map(|c| c.iter().map(|&x| x as i128).collect())
            .collect();
        stacked.extend(self.relation_matrix());
        let cols = self.generators.max(1);
        for row in stacked.iter_mut() {
            row.resize(cols, 0);
        }
        let s = smith_normal_form(&stacked);
        let projected: Vec<Vec<i128>> = s.u[s.rank..]
            .iter()
            .map(|row| row[..n].to_vec())
            .collect();
        let basis = hermite_rows(&projected);
        Ok(KernelReport {
            rank: basis.len(),
            basis: basis
                .into_iter()
                .map(|r| r.into_iter().map(|x| x as i64).collect())
                .collect(),
        })
    }
}

/// Rank of the kernel of `(m_1..m_n) ↦ Σ m_i·classes[i]` in `group`.
pub fn kernel_rank(classes: &[Vec<i64>], group: &HomologyGroup) -> Result<KernelReport> {
    group.kernel(classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_reconstructs() {
        let a: Matrix = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let s = smith_normal_form(&a);
        assert_eq!(mat_mul(&mat_mul(&s.u, &a), &s.v), s.d);
        assert_eq!(s.diagonal, vec![2, 6, 12]);
    }

    #[test]
    fn invariants_of_z_plus_z2() {
        let g = HomologyGroup::new(2, vec![vec![0, 2]]).unwrap();
        assert_eq!(
            g.invariants(),
            GroupInvariants {
                rank: 1,
                torsion: vec![2]
            }
        );
        assert!(g.is_zero(&[0, 4]).unwrap());
        assert!(!g.is_zero(&[0, 3]).unwrap());
        assert!(g.is_torsion(&[0, 1]).unwrap());
        assert!(!g.is_torsion(&[1, 1]).unwrap());
    }

    #[test]
    fn kernel_examples() {
        let g = HomologyGroup::new(2, vec![vec![0, 2]]).unwrap();
        let k = g.kernel(&[vec![1, 0], vec![-1, 1]]).unwrap();
        assert_eq!(k.rank, 1);
        assert_eq!(k.basis, vec![vec![2, 2]]);

        let z2 = HomologyGroup::free(2);
        assert_eq!(z2.kernel(&[vec![1, 0], vec![0, 1]]).unwrap().rank, 0);

        let torsion = HomologyGroup::new(1, vec![vec![3]]).unwrap();
        let k = torsion.kernel(&[vec![1], vec![2]]).unwrap();
        assert_eq!(k.rank, 2);
    }

    #[test]
    fn dimension_mismatch() {
        let g = HomologyGroup::free(2);
        assert!(matches!(
            g.kernel(&[vec![1, 0, 0]]),
            Err(EchError::DimensionMismatch(_))
        ));
        assert!(HomologyGroup::new(2, vec![vec![1]]).is_err());
    }
}
