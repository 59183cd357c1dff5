//! Compressed sparse row matrices for spin-chain Hamiltonians.

use num_complex::Complex64;

/// CSR matrix over f64 or Complex64 entries.
#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<T>,
}

impl<T: Copy + std::ops::Mul<Output = T> + std::ops::AddAssign + num_traits::Zero> CsrMatrix<T> {
    /// y = A x. Panics if slice lengths do not match the dimension.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for row in 0..self.dim {
            let mut acc = T::zero();
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.vals[idx] * x[self.cols[idx] as usize];
            }
            y[row] = acc;
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

impl CsrMatrix<Complex64> {
    /// True when every stored entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    /// Drops imaginary parts; caller must have checked `is_real`.
    pub fn to_real(&self) -> CsrMatrix<f64> {
        CsrMatrix {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| v.re).collect(),
        }
    }
}

/// Row-by-row builder; entries within a row are sorted and merged on finish.
pub struct CsrBuilder<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<T>,
    scratch: Vec<(u32, T)>,
}

impl<T: Copy + std::ops::AddAssign> CsrBuilder<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
            scratch: Vec::new(),
        }
    }

    pub fn push(&mut self, col: usize, val: T) {
        self.scratch.push((col as u32, val));
    }

    /// Closes the current row; rows must be finished in order 0..dim.
    pub fn finish_row(&mut self) {
        self.scratch.sort_unstable_by_key(|&(c, _)| c);
        let mut iter = self.scratch.drain(..).peekable();
        while let Some((c, mut v)) = iter.next() {
            while let Some(&(c2, v2)) = iter.peek() {
                if c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            self.cols.push(c);
            self.vals.push(v);
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn build(self) -> CsrMatrix<T> {
        assert_eq!(self.row_ptr.len(), self.dim + 1, "not all rows finished");
        CsrMatrix {
            dim: self.dim,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
        }
    }
}
