//! Dense linear algebra over `F_p`, enough to treat the Frobenius of a
//! finite ring as an `F_p`-linear map.

/// Row-major matrix with entries in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<u64>>,
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

impl Matrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        Matrix {
            p,
            rows,
            cols,
            data: vec![vec![0; cols]; rows],
        }
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(p: u64, rows: usize, columns: &[Vec<u64>]) -> Self {
        let mut m = Matrix::zeros(p, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m.data[i][j] = v % p;
            }
        }
        m
    }

    /// Reduced row echelon form in place; returns pivot columns.
    fn rref_augmented(&mut self, extra: usize) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols - extra {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.data[i][c] != 0) else {
                continue;
            };
            self.data.swap(r, pr);
            let inv = inv_mod(self.data[r][c], p);
            for v in self.data[r].iter_mut() {
                *v = *v * inv % p;
            }
            for i in 0..self.rows {
                if i != r && self.data[i][c] != 0 {
                    let f = self.data[i][c];
                    for j in 0..self.cols {
                        let t = f * self.data[r][j] % p;
                        self.data[i][j] = (self.data[i][j] + p - t) % p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_augmented(0).len()
    }

    /// A basis of the null space.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        let mut m = self.clone();
        let pivots = m.rref_augmented(0);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0u64; self.cols];
                v[f] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = (self.p - m.data[r][f]) % self.p;
                }
                v
            })
            .collect()
    }

    /// Some solution of `self * x = b`, free variables set to zero.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        let mut aug = Matrix::zeros(self.p, self.rows, self.cols + 1);
        for i in 0..self.rows {
            aug.data[i][..self.cols].copy_from_slice(&self.data[i]);
            aug.data[i][self.cols] = b[i] % self.p;
        }
        let pivots = aug.rref_augmented(1);
        for i in pivots.len()..self.rows {
            if aug.data[i][self.cols] != 0 {
                return None;
            }
        }
        let mut x = vec![0u64; self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.data[r][self.cols];
        }
        Some(x)
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        self.data
            .iter()
            .map(|row| row.iter().zip(x).fold(0, |acc, (a, b)| (acc + a * b) % self.p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_and_solve() {
        // over F_3: rows (1 2 0), (0 0 1)
        let m = Matrix {
            p: 3,
            rows: 2,
            cols: 3,
            data: vec![vec![1, 2, 0], vec![0, 0, 1]],
        };
        assert_eq!(m.rank(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert_eq!(m.apply(&k[0]), vec![0, 0]);
        let x = m.solve(&[2, 1]).unwrap();
        assert_eq!(m.apply(&x), vec![2, 1]);
        let singular = Matrix {
            p: 3,
            rows: 2,
            cols: 2,
            data: vec![vec![1, 1], vec![2, 2]],
        };
        assert!(singular.solve(&[1, 0]).is_none());
    }
}
