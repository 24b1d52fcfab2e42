//! Dense complex solves. Systems here are small (tens to low hundreds of
//! unknowns), so a full LU with partial pivoting is used everywhere.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Ratio of smallest to largest pivot below which a factorization is treated as singular.
const PIVOT_RTOL: f64 = 1e-14;

pub type CMatrix = DMatrix<Complex64>;

/// Row-equilibrated LU factorization that refuses to hand back a solution
/// for a numerically singular matrix.
pub struct Lu {
    lu: nalgebra::linalg::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    row_scale: Vec<f64>,
}

impl Lu {
    /// Returns `None` when the pivots indicate a (numerically) singular matrix.
    pub fn new(mut a: CMatrix) -> Option<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return None;
        }
        let mut row_scale = Vec::with_capacity(a.nrows());
        for mut row in a.row_iter_mut() {
            let m = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if !(m > 0.0) || !m.is_finite() {
                return None;
            }
            row /= Complex64::new(m, 0.0);
            row_scale.push(1.0 / m);
        }
        let lu = a.lu();
        let u = lu.u();
        let mut max_piv = 0.0f64;
        let mut min_piv = f64::INFINITY;
        for i in 0..u.nrows() {
            let p = u[(i, i)].norm();
            max_piv = max_piv.max(p);
            min_piv = min_piv.min(p);
        }
        if !max_piv.is_finite() || max_piv == 0.0 || min_piv <= PIVOT_RTOL * max_piv {
            return None;
        }
        Some(Self { lu, row_scale })
    }

    pub fn solve(&self, b: &CMatrix) -> Option<CMatrix> {
        let mut rhs = b.clone();
        for (mut row, s) in rhs.row_iter_mut().zip(&self.row_scale) {
            row *= Complex64::new(*s, 0.0);
        }
        self.lu.solve(&rhs)
    }

    pub fn inverse(&self) -> Option<CMatrix> {
        let n = self.row_scale.len();
        self.solve(&CMatrix::identity(n, n))
    }
}

/// Largest entry magnitude of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |(S^H S - I)_ij|`; zero for a unitary matrix.
pub fn unitarity_defect(s: &CMatrix) -> f64 {
    let n = s.nrows();
    let g = s.adjoint() * s;
    let eye = CMatrix::identity(n, n);
    max_abs_diff(&g, &eye)
}
