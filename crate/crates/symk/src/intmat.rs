//! Integer matrices with arbitrary-precision entries: Smith normal form,
//! incremental Hermite-style row reduction, and lattice membership.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> IntMatrix {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = IntMatrix::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = BigInt::from(v);
            }
        }
        m
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut m = IntMatrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)].clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows);
        let mut m = IntMatrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self[(r, k)].is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let add = &self[(r, k)] * &other[(k, c)];
                    m[(r, c)] += add;
                }
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[a] -= f * row[b]
    fn row_sub(&mut self, a: usize, b: usize, f: &BigInt) {
        if f.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let sub = f * &self[(b, c)];
            self[(a, c)] -= sub;
        }
    }

    fn col_sub(&mut self, a: usize, b: usize, f: &BigInt) {
        if f.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let sub = f * &self[(r, b)];
            self[(r, a)] -= sub;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -self[(r, c)].clone();
            self[(r, c)] = v;
        }
    }

    pub fn is_diagonal(&self) -> bool {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c && !self[(r, c)].is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// Result of a Smith normal form computation: diagonal entries
/// d_1 | d_2 | ... (nonnegative, zeros trailing), with optional unimodular
/// U, V such that U * M * V is the diagonal matrix.
pub struct Snf {
    pub diag: Vec<BigInt>,
    pub u: Option<IntMatrix>,
    pub v: Option<IntMatrix>,
}

/// Smith normal form by elementary row/column reduction; pivot chosen as the
/// minimal nonzero absolute value in the remaining block.
pub fn smith_normal_form(m: &IntMatrix, transforms: bool) -> Snf {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut u = if transforms {
        Some(IntMatrix::identity(rows))
    } else {
        None
    };
    let mut v = if transforms {
        Some(IntMatrix::identity(cols))
    } else {
        None
    };
    let n = rows.min(cols);
    let mut k = 0usize;
    while k < n {
        // locate minimal-absolute-value nonzero pivot in the block
        let mut pivot: Option<(usize, usize)> = None;
        for r in k..rows {
            for c in k..cols {
                if !a[(r, c)].is_zero()
                    && pivot
                        .map(|(pr, pc)| a[(r, c)].abs() < a[(pr, pc)].abs())
                        .unwrap_or(true)
                {
                    pivot = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = pivot else {
            break;
        };
        a.swap_rows(k, pr);
        if let Some(u) = u.as_mut() {
            u.swap_rows(k, pr);
        }
        a.swap_cols(k, pc);
        if let Some(v) = v.as_mut() {
            v.swap_cols(k, pc);
        }
        if a[(k, k)].is_negative() {
            a.negate_row(k);
            if let Some(u) = u.as_mut() {
                u.negate_row(k);
            }
        }
        // clear column and row below/right of the pivot
        let mut dirty = false;
        for r in k + 1..rows {
            if !a[(r, k)].is_zero() {
                let f = a[(r, k)].div_floor(&a[(k, k)]);
                a.row_sub(r, k, &f);
                if let Some(u) = u.as_mut() {
                    u.row_sub(r, k, &f);
                }
                if !a[(r, k)].is_zero() {
                    dirty = true;
                }
            }
        }
        for c in k + 1..cols {
            if !a[(k, c)].is_zero() {
                let f = a[(k, c)].div_floor(&a[(k, k)]);
                a.col_sub(c, k, &f);
                if let Some(v) = v.as_mut() {
                    v.col_sub(c, k, &f);
                }
                if !a[(k, c)].is_zero() {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue; // remainder became a smaller pivot candidate
        }
        // enforce divisibility of the rest of the block by the pivot
        let mut offender: Option<(usize, usize)> = None;
        'scan: for r in k + 1..rows {
            for c in k + 1..cols {
                if !(&a[(r, c)] % &a[(k, k)]).is_zero() {
                    offender = Some((r, c));
                    break 'scan;
                }
            }
        }
        if let Some((r, _)) = offender {
            // add the offending row to the pivot row and redo the step
            let minus_one = -BigInt::one();
            a.row_sub(k, r, &minus_one);
            if let Some(u) = u.as_mut() {
                u.row_sub(k, r, &minus_one);
            }
            continue;
        }
        k += 1;
    }
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        diag.push(a[(i, i)].abs());
    }
    Snf { diag, u, v }
}

/// Incremental integer row-lattice: rows inserted one at a time are kept in
/// Hermite-style echelon form (unimodular row operations only), so the
/// stored rows are always a basis of the lattice generated by everything
/// inserted so far.
#[derive(Clone)]
pub struct RowLattice {
    pub cols: usize,
    /// rows sorted by pivot column; pivots positive
    rows: Vec<Vec<BigInt>>,
}

fn leading(row: &[BigInt]) -> Option<usize> {
    row.iter().position(|x| !x.is_zero())
}

impl RowLattice {
    pub fn new(cols: usize) -> RowLattice {
        RowLattice {
            cols,
            rows: Vec::new(),
        }
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn from_rows<I: IntoIterator<Item = Vec<BigInt>>>(cols: usize, it: I) -> RowLattice {
        let mut l = RowLattice::new(cols);
        for r in it {
            l.insert(r);
        }
        l
    }

    /// Insert a row; returns true when it enlarged the lattice.
    pub fn insert(&mut self, mut row: Vec<BigInt>) -> bool {
        assert_eq!(row.len(), self.cols);
        let mut changed = false;
        let mut idx = 0usize;
        while let Some(j) = leading(&row) {
            // find the stored row with pivot at column j, if any
            while idx < self.rows.len() {
                let pj = leading(&self.rows[idx]).unwrap();
                if pj >= j {
                    break;
                }
                idx += 1;
            }
            let here = idx < self.rows.len() && leading(&self.rows[idx]) == Some(j);
            if !here {
                // new pivot column
                if row[j].is_negative() {
                    for x in row.iter_mut() {
                        *x = -std::mem::take(x);
                    }
                }
                self.rows.insert(idx, row);
                self.reduce_above(idx);
                return true;
            }
            let h = self.rows[idx].clone();
            if (&row[j] % &h[j]).is_zero() {
                // stored pivot divides: plain elimination
                let f = &row[j] / &h[j];
                for (r, hv) in row.iter_mut().zip(h.iter()) {
                    *r -= &f * hv;
                }
                continue;
            }
            let (g, x, y) = extended_gcd(&h[j], &row[j]);
            // replace stored pivot row by the gcd combination, reduce ours
            let mut new_h = vec![BigInt::zero(); self.cols];
            for c in 0..self.cols {
                new_h[c] = &x * &h[c] + &y * &row[c];
            }
            let hj_g = &h[j] / &g;
            let rj_g = &row[j] / &g;
            let mut new_r = vec![BigInt::zero(); self.cols];
            for c in 0..self.cols {
                new_r[c] = &hj_g * &row[c] - &rj_g * &h[c];
            }
            self.rows[idx] = new_h;
            self.reduce_above(idx);
            row = new_r;
            changed = true;
        }
        changed
    }

    /// Reduce the column entries of other rows against the pivot of rows[i]
    /// to keep entries small.
    fn reduce_above(&mut self, i: usize) {
        let j = leading(&self.rows[i]).unwrap();
        let piv = self.rows[i].clone();
        for k in 0..self.rows.len() {
            if k == i || self.rows[k][j].is_zero() {
                continue;
            }
            let f = self.rows[k][j].div_floor(&piv[j]);
            if f.is_zero() {
                continue;
            }
            for c in 0..self.cols {
                let sub = &f * &piv[c];
                self.rows[k][c] -= sub;
            }
        }
    }

    /// Membership of a vector in the row lattice.
    pub fn contains(&self, v: &[BigInt]) -> bool {
        assert_eq!(v.len(), self.cols);
        let mut w = v.to_vec();
        for row in &self.rows {
            let j = leading(row).unwrap();
            if w[j].is_zero() {
                continue;
            }
            if !(&w[j] % &row[j]).is_zero() {
                return false;
            }
            let f = &w[j] / &row[j];
            for c in 0..self.cols {
                let sub = &f * &row[c];
                w[c] -= sub;
            }
        }
        w.iter().all(|x| x.is_zero())
    }

    /// Matrix whose rows are the current basis.
    pub fn to_matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zero(self.rows.len(), self.cols);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                m[(r, c)] = v.clone();
            }
        }
        m
    }
}

/// (g, x, y) with x*a + y*b = g = gcd(a,b), g >= 0.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (BigInt::one(), BigInt::zero());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.is_negative() {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_of(m: &IntMatrix) -> Vec<i64> {
        smith_normal_form(m, false)
            .diag
            .iter()
            .map(|d| i64::try_from(d).unwrap())
            .collect()
    }

    #[test]
    fn snf_diag_2_3() {
        let m = IntMatrix::from_rows(vec![vec![2, 0], vec![0, 3]]);
        assert_eq!(diag_of(&m), vec![1, 6]);
    }

    #[test]
    fn snf_identity() {
        let m = IntMatrix::identity(3);
        assert_eq!(diag_of(&m), vec![1, 1, 1]);
    }

    #[test]
    fn snf_transforms_diagonalize() {
        let m = IntMatrix::from_rows(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let snf = smith_normal_form(&m, true);
        let u = snf.u.unwrap();
        let v = snf.v.unwrap();
        let d = u.mul(&m).mul(&v);
        assert!(d.is_diagonal());
        for (i, want) in snf.diag.iter().enumerate() {
            assert_eq!(&d[(i, i)].abs(), want);
        }
        // |det| preserved for square nonsingular input: det(diag) = prod
        let prod: BigInt = snf.diag.iter().product();
        assert_eq!(prod, BigInt::from(624)); // |det m| = 624
    }

    #[test]
    fn row_lattice_membership() {
        let mut l = RowLattice::new(3);
        l.insert(vec![BigInt::from(2), BigInt::from(0), BigInt::from(4)]);
        l.insert(vec![BigInt::from(0), BigInt::from(3), BigInt::from(0)]);
        assert!(l.contains(&[BigInt::from(2), BigInt::from(3), BigInt::from(4)]));
        assert!(!l.contains(&[BigInt::from(1), BigInt::from(0), BigInt::from(2)]));
        assert!(!l.contains(&[BigInt::from(2), BigInt::from(0), BigInt::from(2)]));
        // gcd combination appears once both rows inserted
        l.insert(vec![BigInt::from(3), BigInt::from(0), BigInt::from(6)]);
        assert!(l.contains(&[BigInt::from(1), BigInt::from(0), BigInt::from(2)]));
    }
}
