use nalgebra::DMatrix;

/// Relative singular-value cutoff for numerical rank.
pub const RANK_RTOL: f64 = 1e-7;
/// Below this largest singular value a matrix counts as zero.
const RANK_ATOL: f64 = 1e-10;

/// Numerical rank of a dense row-major matrix.
pub fn numerical_rank(rows: &[Vec<f64>]) -> usize {
    numerical_rank_with(rows, RANK_RTOL)
}

/// [`numerical_rank`] with singular values above `rtol` times the largest counted.
pub fn numerical_rank_with(rows: &[Vec<f64>], rtol: f64) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let largest = sv.iter().cloned().fold(0.0_f64, f64::max);
    if largest <= RANK_ATOL {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * largest).count()
}

/// Dimension of the affine hull of a point set.
pub fn affine_rank(points: &[Vec<f64>]) -> usize {
    affine_rank_with(points, RANK_RTOL)
}

pub fn affine_rank_with(points: &[Vec<f64>], rtol: f64) -> usize {
    let Some(base) = points.first() else {
        return 0;
    };
    let diffs: Vec<Vec<f64>> = points[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    numerical_rank_with(&diffs, rtol)
}
