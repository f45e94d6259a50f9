//! Four-point cubic Lagrange interpolation on periodic grids.

use crate::grid::Axis;

/// Weights for nodes at offsets -1, 0, 1, 2 given fractional position `t`.
pub fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Base node index (wrapped later) and weights for coordinate `x`.
pub fn stencil(axis: &Axis, x: f64) -> (i64, [f64; 4]) {
    let s = (x - axis.origin()) / axis.dx();
    let base = s.floor();
    (base as i64, cubic_weights(s - base))
}

fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

pub fn interpolate_1d(values: &[f64], axis: &Axis, x: f64) -> f64 {
    let (base, w) = stencil(axis, x);
    let n = axis.len();
    (0..4).map(|k| w[k] * values[wrap(base - 1 + k as i64, n)]).sum()
}

/// Bicubic interpolation of row-major `values` on `axes`.
pub fn interpolate_2d(values: &[f64], axes: &[Axis; 2], x: f64, y: f64) -> f64 {
    let (bx, wx) = stencil(&axes[0], x);
    let (by, wy) = stencil(&axes[1], y);
    let (nx, ny) = (axes[0].len(), axes[1].len());
    let mut sum = 0.0;
    for a in 0..4 {
        let row = wrap(bx - 1 + a as i64, nx) * ny;
        let mut inner = 0.0;
        for b in 0..4 {
            inner += wy[b] * values[row + wrap(by - 1 + b as i64, ny)];
        }
        sum += wx[a] * inner;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weights_reproduce_nodes() {
        assert_eq!(cubic_weights(0.0), [0.0, 1.0, 0.0, 0.0]);
        let w = cubic_weights(1.0);
        assert!((w[2] - 1.0).abs() < 1e-15 && w[0].abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn cubics_are_exact(c in prop::array::uniform4(-2.0f64..2.0), x in 1.5f64..6.5) {
            let axis = Axis::new(16, 0.5, 0.0).unwrap();
            let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
            let values: Vec<f64> = axis.coords().into_iter().map(f).collect();
            prop_assert!((interpolate_1d(&values, &axis, x) - f(x)).abs() < 1e-10);
        }

        #[test]
        fn bicubic_products_are_exact(x in 1.0f64..5.0, y in 1.0f64..5.0) {
            let axes = [Axis::new(16, 0.5, 0.0).unwrap(), Axis::new(12, 0.6, 0.0).unwrap()];
            let f = |x: f64, y: f64| (1.0 + x * x * x) * (2.0 - y + 0.5 * y * y);
            let mut values = Vec::new();
            for i in 0..16 {
                for j in 0..12 {
                    values.push(f(axes[0].coord(i), axes[1].coord(j)));
                }
            }
            prop_assert!((interpolate_2d(&values, &axes, x, y) - f(x, y)).abs() < 1e-9);
        }
    }
}
