//! Weighted sparse linear least squares via normal equations and
//! Jacobi-preconditioned conjugate gradients.

/// Accumulates rows `w · (a·x − b)²` and solves for the minimiser.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    n: usize,
    triplets: Vec<(u32, u32, f64)>,
    rhs: Vec<f64>,
}

impl LeastSquares {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            triplets: Vec::new(),
            rhs: vec![0.0; n],
        }
    }

    pub fn unknowns(&self) -> usize {
        self.n
    }

    /// Adds the row `w · (Σ coef·x[idx] − b)²`.
    pub fn row(&mut self, w: f64, entries: &[(usize, f64)], b: f64) {
        if w == 0.0 {
            return;
        }
        for &(i, ci) in entries {
            self.rhs[i] += w * ci * b;
            for &(j, cj) in entries {
                self.triplets.push((i as u32, j as u32, w * ci * cj));
            }
        }
    }

    /// Solves the normal equations starting from `x0`.
    pub fn solve(self, x0: &[f64], tol: f64) -> Vec<f64> {
        let m = Csr::from_triplets(self.n, self.triplets);
        m.pcg(&self.rhs, x0, tol, 10 * self.n + 50)
    }
}

struct Csr {
    n: usize,
    start: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut t: Vec<(u32, u32, f64)>) -> Self {
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut start = vec![0; n + 1];
        let mut col = Vec::with_capacity(t.len());
        let mut val: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(c);
                val.push(v);
                start[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            start[i + 1] += start[i];
        }
        Self { n, start, col, val }
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.start[r]..self.start[r + 1] {
                s += self.val[k] * x[self.col[k] as usize];
            }
            *o = s;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.start[r]..self.start[r + 1])
                    .find(|&k| self.col[k] as usize == r)
                    .map_or(0.0, |k| self.val[k])
            })
            .collect()
    }

    fn pcg(&self, b: &[f64], x0: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
        let n = self.n;
        let inv_diag: Vec<f64> = self
            .diagonal()
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        let mut x = x0.to_vec();
        let mut r = vec![0.0; n];
        self.mul(&x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut ap = vec![0.0; n];
        for _ in 0..max_iter {
            let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rnorm <= tol * bnorm {
                break;
            }
            self.mul(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        x
    }
}
