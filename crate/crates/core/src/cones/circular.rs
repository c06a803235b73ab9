//! Closed-form projection onto the circular cone
//! `C(α) = {x : x_1 >= ‖x‖ cos α}` with axis `e_1`.

use crate::vecops::norm;

/// Projection onto `C(α)`, `0 < α < π/2`.
///
/// With `τ = tan α` and `t = ‖x_{2:d}‖`: points with `t <= τ x_1` are
/// inside, points with `x_1 + τ t <= 0` lie in the polar cone and map to 0,
/// and everything else lands on the boundary ray through `(1, τ x̂_{2:d})`.
pub fn project_circular(alpha: f64, x: &[f64]) -> Vec<f64> {
    let tau = alpha.tan();
    let x1 = x[0];
    let t = norm(&x[1..]);
    if t <= tau * x1 {
        return x.to_vec();
    }
    let s = (x1 + tau * t) / (1.0 + tau * tau);
    if s <= 0.0 {
        return vec![0.0; x.len()];
    }
    // t > 0 here: t == 0 with x1 >= 0 is the interior branch, with x1 < 0 it gives s < 0.
    let k = s * tau / t;
    let mut out = Vec::with_capacity(x.len());
    out.push(s);
    out.extend(x[1..].iter().map(|v| k * v));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn branches() {
        assert_eq!(
            project_circular(FRAC_PI_4, &[2.0, 1.0, 0.0]),
            vec![2.0, 1.0, 0.0]
        );
        assert_eq!(
            project_circular(FRAC_PI_4, &[-2.0, 1.0, 0.0]),
            vec![0.0, 0.0, 0.0]
        );
        assert!(close(
            &project_circular(FRAC_PI_4, &[0.0, 3.0, 4.0]),
            &[2.5, 1.5, 2.0],
            1e-12
        ));
        assert!(close(
            &project_circular(FRAC_PI_4, &[0.0, 1.0, 0.0]),
            &[0.5, 0.5, 0.0],
            1e-12
        ));
    }

    #[test]
    fn axis_points() {
        assert_eq!(project_circular(0.3, &[1.5, 0.0, 0.0]), vec![1.5, 0.0, 0.0]);
        assert_eq!(
            project_circular(0.3, &[-1.5, 0.0, 0.0]),
            vec![0.0, 0.0, 0.0]
        );
        assert_eq!(project_circular(0.3, &[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn narrow_cone_polar_region() {
        // α = 0.2: polar cone is {−x_1 >= tan(α) t}, a wide cone around −e_1.
        let alpha: f64 = 0.2;
        let x = [-1.0, 2.0];
        assert!(-x[0] >= alpha.tan() * 2.0);
        assert_eq!(project_circular(alpha, &x), vec![0.0, 0.0]);
    }
}
