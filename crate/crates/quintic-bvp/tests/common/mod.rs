//! Helpers shared across the integration test targets. The dense solver is
//! the independent reference route; it must stay separate from the banded
//! code under test.

use quintic_bvp::banded::BandedMatrix;
use rand::Rng;

/// Dense Gaussian elimination with partial pivoting. Slow and simple on
/// purpose: a second route to the solution that shares nothing with the
/// banded factorization.
#[allow(clippy::needless_range_loop)]
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n);
    assert!(a.iter().all(|row| row.len() == n));
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))
            .expect("non-empty pivot range");
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        x.swap(col, piv);
        for row in col + 1..n {
            let t = m[row][col] / m[col][col];
            if t != 0.0 {
                for j in col..n {
                    m[row][j] -= t * m[col][j];
                }
                x[row] -= t * x[col];
            }
        }
    }
    for row in (0..n).rev() {
        let mut s = x[row];
        for j in row + 1..n {
            s -= m[row][j] * x[j];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

/// Random diagonally dominant banded system: n in 1..=64, bandwidths in
/// 0..=3. Dominance keeps both solve routes well conditioned so they can be
/// compared at tight tolerance.
pub fn random_dominant_banded<G: Rng>(rng: &mut G) -> (BandedMatrix<f64>, Vec<f64>) {
    let n = rng.gen_range(1..=64usize);
    let lower = rng.gen_range(0..=3usize).min(n - 1);
    let upper = rng.gen_range(0..=3usize).min(n - 1);
    let mut m = BandedMatrix::zeros(n, lower, upper);
    for i in 0..n {
        let lo = i.saturating_sub(lower);
        let hi = (i + upper).min(n - 1);
        let mut off = 0.0;
        for j in lo..=hi {
            if j != i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m.set(i, j, v);
                off += v.abs();
            }
        }
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        m.set(i, i, sign * (off + rng.gen_range(0.5..1.5)));
    }
    let rhs = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
    (m, rhs)
}

/// Max relative difference between two vectors, scaled by the larger
/// max-norm of the pair.
pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().chain(b).fold(f64::MIN_POSITIVE, |acc, &v| acc.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |acc, (&p, &q)| acc.max((p - q).abs())) / scale
}
