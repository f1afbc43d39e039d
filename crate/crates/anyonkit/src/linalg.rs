//! Small dense complex linear algebra over `ComplexValue`.

use crate::qarith::ComplexValue;

pub type Mat = Vec<Vec<ComplexValue>>;

pub fn zeros(prec: u32, rows: usize, cols: usize) -> Mat {
    vec![vec![ComplexValue::zero(prec); cols]; rows]
}

pub fn identity(prec: u32, n: usize) -> Mat {
    let mut m = zeros(prec, n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ComplexValue::one(prec);
    }
    m
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let prec = a
        .first()
        .and_then(|r| r.first())
        .map(|x| x.prec())
        .unwrap_or(64);
    let n = a.len();
    let k = b.len();
    let m = b.first().map(|r| r.len()).unwrap_or(0);
    let mut out = zeros(prec, n, m);
    for i in 0..n {
        for l in 0..k {
            if a[i][l].re.is_zero() && a[i][l].im.is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j].add_mul(&a[i][l], &b[l][j]);
            }
        }
    }
    out
}

pub fn transpose(a: &Mat) -> Mat {
    let n = a.len();
    let m = a.first().map(|r| r.len()).unwrap_or(0);
    (0..m)
        .map(|j| (0..n).map(|i| a[i][j].clone()).collect())
        .collect()
}

/// Largest entrywise deviation between two equally shaped matrices.
pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    let mut worst = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).abs_f64());
        }
    }
    worst
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Mat, ncols: usize, tol: f64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= m.len() {
            break;
        }
        let (best, mag) = (r..m.len())
            .map(|i| (i, m[i][c].abs_f64()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= tol {
            continue;
        }
        m.swap(r, best);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = m[r].clone();
        for i in 0..m.len() {
            if i == r || m[i][c].abs_f64() == 0.0 {
                continue;
            }
            let f = m[i][c].clone();
            for (x, p) in m[i].iter_mut().zip(&pivot_row) {
                let t = &f * p;
                *x -= &t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{x : M x = 0}`, one vector per free column.
pub fn null_space(rows: &Mat, ncols: usize, prec: u32, tol: f64) -> Vec<Vec<ComplexValue>> {
    let mut m = rows.clone();
    let pivots = rref(&mut m, ncols, tol);
    let mut out = Vec::new();
    for f in 0..ncols {
        if pivots.contains(&f) {
            continue;
        }
        let mut v = vec![ComplexValue::zero(prec); ncols];
        v[f] = ComplexValue::one(prec);
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&m[r][f];
        }
        out.push(v);
    }
    out
}

/// Inverse of a square matrix, or `None` if singular within `tol`.
pub fn invert(a: &Mat, tol: f64) -> Option<Mat> {
    let n = a.len();
    let prec = a
        .first()
        .and_then(|r| r.first())
        .map(|x| x.prec())
        .unwrap_or(64);
    let id = identity(prec, n);
    let mut aug: Mat = a
        .iter()
        .zip(&id)
        .map(|(r, e)| r.iter().chain(e.iter()).cloned().collect())
        .collect();
    let piv = rref(&mut aug, n, tol);
    if piv.len() < n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Least-squares-free solve of an overdetermined consistent system `A X = B`
/// (A: r×n with full column rank). Returns `X` and the residual of all rows.
pub fn solve_consistent(a: &Mat, b: &Mat, tol: f64) -> Option<(Mat, f64)> {
    let n = a.first().map(|r| r.len()).unwrap_or(0);
    let w = b.first().map(|r| r.len()).unwrap_or(0);
    let mut aug: Mat = a
        .iter()
        .zip(b)
        .map(|(r, e)| r.iter().chain(e.iter()).cloned().collect())
        .collect();
    let piv = rref(&mut aug, n, tol);
    if piv.len() < n {
        return None;
    }
    let x: Mat = aug[..n].iter().map(|r| r[n..n + w].to_vec()).collect();
    let ax = matmul(a, &x);
    Some((x, max_diff(&ax, b)))
}

/// Eigen-decomposition of a 2×2 matrix: returns eigenvalues and left
/// eigenvectors (rows `u` with `u R = λ u`).
pub fn eigen2_left(r: &Mat) -> Option<([ComplexValue; 2], [Vec<ComplexValue>; 2])> {
    let prec = r[0][0].prec();
    let tr = &r[0][0] + &r[1][1];
    let det = &(&r[0][0] * &r[1][1]) - &(&r[0][1] * &r[1][0]);
    let four = ComplexValue::from_int(prec, 4);
    let disc = (&(&tr * &tr) - &(&four * &det)).sqrt();
    let two = ComplexValue::from_int(prec, 2);
    let l1 = &(&tr + &disc) / &two;
    let l2 = &(&tr - &disc) / &two;
    if disc.abs_f64() < 1e-12 {
        return None;
    }
    let vec_for = |l: &ComplexValue| -> Vec<ComplexValue> {
        // u (R - l) = 0: u0 (r00 - l) + u1 r10 = 0, u0 r01 + u1 (r11 - l) = 0
        let a = &r[0][0] - l;
        let b = r[1][0].clone();
        let c = r[0][1].clone();
        let d = &r[1][1] - l;
        if b.abs_f64() + a.abs_f64() >= c.abs_f64() + d.abs_f64() {
            vec![b, -a]
        } else {
            vec![d, -c]
        }
    };
    let u1 = vec_for(&l1);
    let u2 = vec_for(&l2);
    Some(([l1, l2], [u1, u2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> ComplexValue {
        ComplexValue::from_f64(128, x, 0.0)
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = vec![vec![c(1.0), c(2.0), c(3.0)]];
        let ns = null_space(&m, 3, 128, 1e-20);
        assert_eq!(ns.len(), 2);
        for v in ns {
            let s = ComplexValue::dot(128, m[0].iter().zip(&v));
            assert!(s.abs_f64() < 1e-30);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let a = vec![vec![c(2.0), c(1.0)], vec![c(1.0), c(3.0)]];
        let inv = invert(&a, 1e-20).unwrap();
        assert!(max_diff(&matmul(&a, &inv), &identity(128, 2)) < 1e-30);
    }

    #[test]
    fn left_eigenvectors() {
        let r = vec![vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]];
        let (l, u) = eigen2_left(&r).unwrap();
        for k in 0..2 {
            let ur = matmul(&vec![u[k].clone()], &r);
            let lu: Vec<_> = u[k].iter().map(|x| x * &l[k]).collect();
            assert!(max_diff(&ur, &vec![lu]) < 1e-30);
        }
    }
}
