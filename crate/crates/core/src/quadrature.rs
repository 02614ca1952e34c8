//! Quadrature rules used for source integration.
//!
//! Rectangles use the tensor-product 3-point Gauss-Legendre rule and
//! triangles the 7-point symmetric rule; both integrate polynomials of total
//! degree five exactly. Convex polygons are fanned into triangles.

use crate::geometry::{Point, Rect};
use crate::scalar::Scalar;

/// Gauss-Legendre points and weights on `[0, 1]`.
pub fn gauss_legendre_unit<T: Scalar>(n: usize) -> Vec<(T, T)> {
    let raw: &[(f64, f64)] = match n {
        1 => &[(0.0, 2.0)],
        2 => &[(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)],
        3 => &[
            (-0.774_596_669_241_483_4, 5.0 / 9.0),
            (0.0, 8.0 / 9.0),
            (0.774_596_669_241_483_4, 5.0 / 9.0),
        ],
        4 => &[
            (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
            (-0.339_981_043_584_856_26, 0.652_145_154_862_546_2),
            (0.339_981_043_584_856_26, 0.652_145_154_862_546_2),
            (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
        ],
        _ => panic!("Gauss-Legendre rule with {n} points is not tabulated"),
    };
    raw.iter()
        .map(|&(x, w)| (T::lit(0.5 * (x + 1.0)), T::lit(0.5 * w)))
        .collect()
}

/// Integrates `f` over an axis-aligned rectangle with the 3x3 Gauss rule.
pub fn integrate_rect<T: Scalar, F: Fn(Point<T>) -> T>(rect: &Rect<T>, f: F) -> T {
    let gl = gauss_legendre_unit::<T>(3);
    let (w, h) = (rect.width(), rect.height());
    let mut acc = T::zero();
    for &(sx, wx) in &gl {
        for &(sy, wy) in &gl {
            let p = Point::new(rect.x0 + sx * w, rect.y0 + sy * h);
            acc += wx * wy * f(p);
        }
    }
    acc * w * h
}

/// Barycentric points and area-normalised weights of the degree-5
/// symmetric triangle rule.
pub fn triangle_rule_deg5<T: Scalar>() -> [([T; 3], T); 7] {
    let s15 = 15f64.sqrt();
    let a = (6.0 - s15) / 21.0;
    let b = (6.0 + s15) / 21.0;
    let wa = (155.0 - s15) / 1200.0;
    let wb = (155.0 + s15) / 1200.0;
    let l = |x: f64, y: f64, z: f64| [T::lit(x), T::lit(y), T::lit(z)];
    [
        (l(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), T::lit(9.0 / 40.0)),
        (l(1.0 - 2.0 * a, a, a), T::lit(wa)),
        (l(a, 1.0 - 2.0 * a, a), T::lit(wa)),
        (l(a, a, 1.0 - 2.0 * a), T::lit(wa)),
        (l(1.0 - 2.0 * b, b, b), T::lit(wb)),
        (l(b, 1.0 - 2.0 * b, b), T::lit(wb)),
        (l(b, b, 1.0 - 2.0 * b), T::lit(wb)),
    ]
}

/// Integrates `f` over a triangle with the degree-5 rule.
pub fn integrate_triangle<T: Scalar, F: Fn(Point<T>) -> T>(tri: [Point<T>; 3], f: F) -> T {
    let area = ((tri[1] - tri[0]).cross(&(tri[2] - tri[0])) * T::half()).abs();
    let mut acc = T::zero();
    for (l, w) in triangle_rule_deg5::<T>() {
        let p = tri[0] * l[0] + tri[1] * l[1] + tri[2] * l[2];
        acc += w * f(p);
    }
    acc * area
}

/// Integrates `f` over a convex polygon by fanning from the first corner.
pub fn integrate_polygon<T: Scalar, F: Fn(Point<T>) -> T>(poly: &[Point<T>], f: F) -> T {
    let mut acc = T::zero();
    for k in 1..poly.len() - 1 {
        acc += integrate_triangle([poly[0], poly[k], poly[k + 1]], &f);
    }
    acc
}
