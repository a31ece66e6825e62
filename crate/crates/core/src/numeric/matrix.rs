//! Small dense complex matrices and LU with partial pivoting.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::logcomplex::LogComplex;
use crate::error::{Error, Result};

/// Pivots with magnitude below this are treated as exact zeros.
pub const PIVOT_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        ComplexMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                m[(i, k)] = f(i, k);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Usage("matrix must be square and non-empty".into()));
        }
        Ok(ComplexMatrix { n, data: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul(&self, o: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, o.n);
        ComplexMatrix::from_fn(self.n, |i, k| (0..self.n).map(|l| self[(i, l)] * o[(l, k)]).sum())
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|i| (0..self.n).map(|k| self[(i, k)] * v[k]).sum()).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, k): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + k]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, k): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + k]
    }
}

/// `P·A = L·U`, with L unit lower triangular; both packed into `lu`.
#[derive(Clone, Debug)]
pub struct LuFactor {
    lu: ComplexMatrix,
    /// Row `i` of `P·A` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    swaps: usize,
}

pub fn lu_factor(m: &ComplexMatrix) -> Result<LuFactor> {
    let n = m.n;
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    for c in 0..n {
        let (p, mag) = (c..n)
            .map(|r| (r, a[(r, c)].norm()))
            .fold((c, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(mag >= PIVOT_FLOOR) {
            return Err(Error::Singular { pivot: c });
        }
        if p != c {
            for k in 0..n {
                a.data.swap(c * n + k, p * n + k);
            }
            perm.swap(c, p);
            swaps += 1;
        }
        let piv = a[(c, c)];
        for r in c + 1..n {
            let f = a[(r, c)] / piv;
            a[(r, c)] = f;
            for k in c + 1..n {
                let u = a[(c, k)];
                a[(r, k)] -= f * u;
            }
        }
    }
    Ok(LuFactor { lu: a, perm, swaps })
}

impl LuFactor {
    pub fn dim(&self) -> usize {
        self.lu.n
    }

    pub fn det(&self) -> LogComplex {
        let mut d = if self.swaps % 2 == 1 { -LogComplex::ONE } else { LogComplex::ONE };
        for i in 0..self.lu.n {
            d = d * LogComplex::from_complex(self.lu[(i, i)]);
        }
        d
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        assert_eq!(rhs.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                x[i] = x[i] - l * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                x[i] = x[i] - u * x[k];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.lu.n;
        let mut inv = ComplexMatrix::zeros(n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[k] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, k)] = col[i];
            }
        }
        inv
    }
}
