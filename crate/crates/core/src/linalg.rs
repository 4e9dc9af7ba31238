//! 2×2 linear algebra for planar linearisations.

use serde::{Deserialize, Serialize};

pub type Mat2 = [[f64; 2]; 2];

/// Eigenvalues of a real 2×2 matrix as `(re, im)` pairs.
///
/// Complex pairs are returned with the positive imaginary part first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigen2 {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Eigen2 {
    pub fn is_complex(&self) -> bool {
        self.im[0] != 0.0
    }

    /// Largest real part.
    pub fn max_re(&self) -> f64 {
        self.re[0].max(self.re[1])
    }
}

pub fn trace(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn eigenvalues(m: &Mat2) -> Eigen2 {
    let tr = trace(m);
    // (a-d)^2 + 4bc avoids cancellation in tr^2 - 4 det
    let disc = (m[0][0] - m[1][1]).powi(2) + 4.0 * m[0][1] * m[1][0];
    if disc < 0.0 {
        let w = 0.5 * (-disc).sqrt();
        Eigen2 { re: [0.5 * tr; 2], im: [w, -w] }
    } else {
        let s = disc.sqrt();
        let big = 0.5 * (tr + s.copysign(tr));
        let small = if big != 0.0 { det(m) / big } else { 0.0 };
        let (l1, l2) = if big >= small { (big, small) } else { (small, big) };
        Eigen2 { re: [l1, l2], im: [0.0, 0.0] }
    }
}

/// Central-difference Jacobian of a planar map, step scaled per coordinate.
pub fn numeric_jacobian<F>(f: F, x: [f64; 2], rel_step: f64) -> Option<Mat2>
where
    F: Fn([f64; 2]) -> Option<[f64; 2]>,
{
    let mut m = [[0.0; 2]; 2];
    for j in 0..2 {
        let h = rel_step * (1.0 + x[j].abs());
        let mut xp = x;
        let mut xm = x;
        xp[j] += h;
        xm[j] -= h;
        let fp = f(xp)?;
        let fm = f(xm)?;
        for i in 0..2 {
            m[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_has_imaginary_pair() {
        let e = eigenvalues(&[[0.1, -2.0], [2.0, 0.1]]);
        assert!(e.is_complex());
        assert!((e.re[0] - 0.1).abs() < 1e-15);
        assert!((e.im[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_real_pair() {
        let e = eigenvalues(&[[-3.0, 0.0], [0.0, 2.0]]);
        assert!(!e.is_complex());
        assert_eq!(e.re, [2.0, -3.0]);
    }

    #[test]
    fn numeric_jacobian_of_linear_map() {
        let j = numeric_jacobian(|v| Some([2.0 * v[0] + v[1], -v[0]]), [0.3, 0.4], 1e-6).unwrap();
        assert!((j[0][0] - 2.0).abs() < 1e-9 && (j[0][1] - 1.0).abs() < 1e-9);
        assert!((j[1][0] + 1.0).abs() < 1e-9 && j[1][1].abs() < 1e-9);
    }
}
