use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix with arbitrary-precision entries, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        IntMatrix { rows, cols, entries: data.iter().map(|&x| BigInt::from(x)).collect() }
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Determinant by fraction-free Gaussian elimination (Bareiss).
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = v / &prev;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * &a[(n - 1, n - 1)]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += q · row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * q;
            self[(dst, j)] += v;
        }
    }

    /// col[dst] += q · col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, src)] * q;
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -&self[(r, j)];
            self[(r, j)] = v;
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.entries[i * self.cols + j]
    }
}

/// Result of [`smith_normal_form`]: `u · m · v = s`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl Smith {
    /// Diagonal entries d1 | d2 | … (including zeros), length min(rows, cols).
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows.min(self.s.cols)).map(|i| self.s[(i, i)].clone()).collect()
    }
}

/// Smith normal form with unimodular transforms, pivoting on the entry of
/// smallest magnitude to keep intermediate coefficients small.
pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    smith_impl(m, true)
}

/// Diagonal of the Smith form without accumulating the transforms.
pub fn invariant_factors(m: &IntMatrix) -> Vec<BigInt> {
    smith_impl(m, false).diagonal()
}

fn smith_impl(m: &IntMatrix, track: bool) -> Smith {
    let (r, c) = (m.rows, m.cols);
    let mut s = m.clone();
    let (ur, vc) = if track { (r, c) } else { (0, 0) };
    let mut u = IntMatrix::identity(ur);
    let mut v = IntMatrix::identity(vc);
    for t in 0..r.min(c) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = &s[(i, j)];
                    if !x.is_zero() && best.map_or(true, |(bi, bj)| x.abs() < s[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return Smith { u, s, v };
            };
            s.swap_rows(t, pi);
            if track {
                u.swap_rows(t, pi);
            }
            s.swap_cols(t, pj);
            if track {
                v.swap_cols(t, pj);
            }

            let mut clean = true;
            let p = s[(t, t)].clone();
            for i in t + 1..r {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = -s[(i, t)].div_floor(&p);
                s.add_row(i, t, &q);
                if track {
                    u.add_row(i, t, &q);
                }
                if !s[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..c {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = -s[(t, j)].div_floor(&p);
                s.add_col(j, t, &q);
                if track {
                    v.add_col(j, t, &q);
                }
                if !s[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !s[(i, j)].is_multiple_of(&p)));
            if let Some(i) = bad {
                let one = BigInt::one();
                s.add_row(t, i, &one);
                if track {
                    u.add_row(t, i, &one);
                }
                continue;
            }
            break;
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            if track {
                u.negate_row(t);
            }
        }
    }
    Smith { u, s, v }
}
