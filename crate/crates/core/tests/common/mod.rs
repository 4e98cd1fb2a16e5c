//! Reference implementations that share no code with the library.
#![allow(dead_code)]

use gml::spectral::SymMat;

/// Rank by Gaussian elimination with partial pivoting; pivots at or below
/// `tol` count as zero.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    if a.is_empty() {
        return 0;
    }
    let cols = a[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())) else { break };
        if a[p][c].abs() <= tol {
            continue;
        }
        a.swap(r, p);
        for i in (r + 1)..a.len() {
            let f = a[i][c] / a[r][c];
            for k in c..cols {
                a[i][k] -= f * a[r][k];
            }
        }
        r += 1;
        if r == a.len() {
            break;
        }
    }
    r
}

pub fn rows(m: &SymMat) -> Vec<Vec<f64>> {
    m.to_rows()
}

/// Absolute elimination tolerance `rel * max|entry|` over the given matrices.
pub fn ge_tol(mats: &[&SymMat], rel: f64) -> f64 {
    rel * mats.iter().fold(0.0f64, |m, a| m.max(a.max_abs()))
}

/// `dim Ker(alpha + eps beta)` by elimination.
pub fn perturbed_nullity(alpha: &SymMat, beta: &SymMat, eps: f64, rel: f64) -> usize {
    let tol = ge_tol(&[alpha, beta], rel) * (1.0 + eps);
    let a = rows(alpha);
    let b = rows(beta);
    let sum: Vec<Vec<f64>> =
        a.iter().zip(&b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + eps * y).collect()).collect();
    a.len() - rank(&sum, tol)
}

/// `dim (Ker alpha ∩ Ker beta)`: nullity of the stacked matrix.
pub fn joint_nullity(alpha: &SymMat, beta: &SymMat, rel: f64) -> usize {
    let mut stacked = rows(alpha);
    stacked.extend(rows(beta));
    alpha.dim() - rank(&stacked, ge_tol(&[alpha, beta], rel))
}

/// `exp(tB) x / |exp(tB) x|` evaluated directly (small `|t|` only).
pub fn closed_form_flow(levels: &[f64], t: f64, x: &[f64]) -> Vec<f64> {
    let y: Vec<f64> = x.iter().zip(levels).map(|(xi, b)| xi * (t * b).exp()).collect();
    let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    y.into_iter().map(|v| v / n).collect()
}

/// Support indices whose level tuples are lexicographically maximal.
pub fn lex_argmax(tuples: &[Vec<f64>], support: &[usize], tol: f64) -> Vec<usize> {
    let cmp = |a: &[f64], b: &[f64]| -> std::cmp::Ordering {
        for (x, y) in a.iter().zip(b) {
            if (x - y).abs() > tol {
                return x.total_cmp(y);
            }
        }
        std::cmp::Ordering::Equal
    };
    let best = support.iter().copied().max_by(|&i, &j| cmp(&tuples[i], &tuples[j])).expect("nonempty support");
    support.iter().copied().filter(|&i| cmp(&tuples[i], &tuples[best]).is_eq()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
