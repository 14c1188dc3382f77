//! Small dense least-squares fits (modified Gram–Schmidt QR).

/// Solves `min ‖A x - b‖₂` for a tall `A` given by rows. Returns `None` when
/// the columns are numerically dependent.
pub(crate) fn least_squares(rows: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = rows.len();
    let p = rows.first()?.len();
    if m < p || b.len() != m {
        return None;
    }
    let mut q: Vec<Vec<f64>> = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut r = vec![vec![0.0; p]; p];
    for j in 0..p {
        for i in 0..j {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = d;
            let qi = q[i].clone();
            q[j].iter_mut().zip(&qi).for_each(|(a, b)| *a -= d * b);
        }
        let norm = q[j].iter().map(|a| a * a).sum::<f64>().sqrt();
        let scale = rows.iter().map(|row| row[j].abs()).fold(0.0, f64::max);
        if !(norm > 1e-12 * scale) {
            return None;
        }
        r[j][j] = norm;
        q[j].iter_mut().for_each(|a| *a /= norm);
    }
    let qtb: Vec<f64> = q.iter().map(|col| col.iter().zip(b).map(|(a, c)| a * c).sum()).collect();
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = ((i + 1)..p).map(|k| r[i][k] * x[k]).sum();
        x[i] = (qtb[i] - s) / r[i][i];
    }
    Some(x)
}
