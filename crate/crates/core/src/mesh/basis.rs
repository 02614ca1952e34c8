//! Continuous piecewise linear (triangles) and bilinear (quadrilaterals)
//! basis functions.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Scalar;

/// Values and gradients of all corner basis functions at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisEval<T> {
    pub values: Vec<T>,
    pub gradients: Vec<Point<T>>,
}

/// Reference coordinates of `p` in the element with the given corners.
/// Triangles return barycentric `(xi, eta)` with `N = (1-xi-eta, xi, eta)`;
/// quadrilaterals return the bilinear reference coordinates in `[0,1]^2`.
pub fn reference_coords<T: Scalar>(corners: &[Point<T>], p: Point<T>) -> Result<(T, T)> {
    match corners.len() {
        3 => {
            let (a, b) = (corners[1] - corners[0], corners[2] - corners[0]);
            let det = a.cross(&b);
            let d = p - corners[0];
            Ok((d.cross(&b) / det, a.cross(&d) / det))
        }
        4 => {
            let mut xi = T::half();
            let mut eta = T::half();
            for _ in 0..50 {
                let (x, j) = quad_map(corners, xi, eta);
                let r = x - p;
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                let dxi = (j[1][1] * r.x - j[0][1] * r.y) / det;
                let deta = (-j[1][0] * r.x + j[0][0] * r.y) / det;
                xi -= dxi;
                eta -= deta;
                if dxi.abs() + deta.abs() < T::epsilon() * T::lit(16.0) {
                    break;
                }
            }
            Ok((xi, eta))
        }
        n => Err(Error::Mesh(format!("unsupported element with {n} corners"))),
    }
}

/// Bilinear map and its Jacobian `[[dx/dxi, dx/deta], [dy/dxi, dy/deta]]`.
fn quad_map<T: Scalar>(c: &[Point<T>], xi: T, eta: T) -> (Point<T>, [[T; 2]; 2]) {
    let one = T::one();
    let n = [(one - xi) * (one - eta), xi * (one - eta), xi * eta, (one - xi) * eta];
    let dxi = [-(one - eta), one - eta, eta, -eta];
    let deta = [-(one - xi), -xi, xi, one - xi];
    let mut x = Point::zero();
    let mut j = [[T::zero(); 2]; 2];
    for k in 0..4 {
        x = x + c[k] * n[k];
        j[0][0] += c[k].x * dxi[k];
        j[0][1] += c[k].x * deta[k];
        j[1][0] += c[k].y * dxi[k];
        j[1][1] += c[k].y * deta[k];
    }
    (x, j)
}

/// Evaluates the basis at reference coordinates without a containment check.
pub fn eval_reference<T: Scalar>(corners: &[Point<T>], xi: T, eta: T) -> BasisEval<T> {
    let one = T::one();
    match corners.len() {
        3 => {
            let (a, b) = (corners[1] - corners[0], corners[2] - corners[0]);
            let det = a.cross(&b);
            // rows of J^{-T} applied to reference gradients (-1,-1), (1,0), (0,1)
            let g1 = Point::new(b.y, -b.x) / det;
            let g2 = Point::new(-a.y, a.x) / det;
            BasisEval {
                values: vec![one - xi - eta, xi, eta],
                gradients: vec![-(g1 + g2), g1, g2],
            }
        }
        _ => {
            let (_, j) = quad_map(corners, xi, eta);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let dxi = [-(one - eta), one - eta, eta, -eta];
            let deta = [-(one - xi), -xi, xi, one - xi];
            let gradients = (0..4)
                .map(|k| {
                    Point::new(
                        (j[1][1] * dxi[k] - j[1][0] * deta[k]) / det,
                        (-j[0][1] * dxi[k] + j[0][0] * deta[k]) / det,
                    )
                })
                .collect();
            BasisEval {
                values: vec![(one - xi) * (one - eta), xi * (one - eta), xi * eta, (one - xi) * eta],
                gradients,
            }
        }
    }
}

/// Evaluates all corner basis functions of an element at a physical point.
/// Points outside the element (reference tolerance `1e-10`) are rejected.
pub fn eval_basis<T: Scalar>(corners: &[Point<T>], p: Point<T>) -> Result<BasisEval<T>> {
    let (xi, eta) = reference_coords(corners, p)?;
    let tol = T::lit(1e-10);
    let inside = match corners.len() {
        3 => xi >= -tol && eta >= -tol && xi + eta <= T::one() + tol,
        _ => xi >= -tol && eta >= -tol && xi <= T::one() + tol && eta <= T::one() + tol,
    };
    if !inside || !xi.is_finite() || !eta.is_finite() {
        return Err(Error::Domain(format!(
            "point ({}, {}) lies outside the element",
            p.x, p.y
        )));
    }
    Ok(eval_reference(corners, xi, eta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> Vec<Point<f64>> {
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]
    }

    fn quad() -> Vec<Point<f64>> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.2),
            Point::new(2.5, 1.5),
            Point::new(-0.3, 1.0),
        ]
    }

    #[test]
    fn corner_indicator() {
        for c in [tri(), quad()] {
            for (w, &x) in c.iter().enumerate() {
                let b = eval_basis(&c, x).unwrap();
                for (v, &val) in b.values.iter().enumerate() {
                    let expect = if v == w { 1.0 } else { 0.0 };
                    assert!((val - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn triangle_barycenter() {
        let b = eval_basis(&tri(), Point::new(1.0 / 3.0, 1.0 / 3.0)).unwrap();
        for v in b.values {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_reproduction() {
        for c in [tri(), quad()] {
            let p = vertex_mean(&c);
            let b = eval_basis(&c, p).unwrap();
            let f = |q: Point<f64>| 2.0 * q.x - 3.0 * q.y + 0.5;
            let mut val = 0.0;
            let mut g = Point::zero();
            for k in 0..c.len() {
                val += b.values[k] * f(c[k]);
                g = g + b.gradients[k] * f(c[k]);
            }
            assert!((val - f(p)).abs() < 1e-12);
            assert!((g.x - 2.0).abs() < 1e-12 && (g.y + 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn p_equals_x_gradient() {
        let c = tri();
        let b = eval_basis(&c, Point::new(0.2, 0.3)).unwrap();
        let g = b.gradients[0] * 0.0 + b.gradients[1] * 1.0 + b.gradients[2] * 0.0;
        assert!((g.x - 1.0).abs() < 1e-15 && g.y.abs() < 1e-15);
    }

    #[test]
    fn outside_point_is_error() {
        assert!(matches!(eval_basis(&tri(), Point::new(0.8, 0.8)), Err(Error::Domain(_))));
        assert!(eval_basis(&quad(), Point::new(3.0, 0.0)).is_err());
    }

    fn vertex_mean(c: &[Point<f64>]) -> Point<f64> {
        crate::geometry::vertex_average(c)
    }
}
