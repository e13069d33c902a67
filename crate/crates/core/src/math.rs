//! Small numerical helpers shared by the models.

use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximize a function on `[lo, hi]` by golden-section search.
///
/// Stops once the bracket is narrower than `tol`. Returns the abscissa and
/// value of the best point evaluated, which is never worse than either end of
/// the bracket.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let fa = f(a);
    let fb = f(b);
    let mut best = if fb > fa { (b, fb) } else { (a, fa) };

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let tol = tol.max(f64::EPSILON * (a.abs() + b.abs()));
    let mut iterations = 0;
    while (b - a) > tol && iterations < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Vertex of the parabola through three equally spaced samples
/// `(x - h, y0), (x, y1), (x + h, y2)`.
///
/// Returns the offset of the vertex from the centre sample, as a fraction of
/// the spacing (in `[-0.5, 0.5]` when `y1` is the largest sample), and the
/// interpolated extremum value.
pub fn parabolic_vertex(y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 || !denom.is_finite() {
        return (0.0, y1);
    }
    let delta = 0.5 * (y0 - y2) / denom;
    let delta = delta.clamp(-1.0, 1.0);
    let value = y1 - 0.25 * (y0 - y2) * delta;
    (delta, value)
}

/// Wrap an angle to the principal interval `(-pi, pi]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Magnitude in dB (`20 log10`), floored at `floor_db`.
pub fn to_db(magnitude: f64, floor_db: f64) -> f64 {
    if magnitude <= 0.0 {
        return floor_db;
    }
    (20.0 * magnitude.log10()).max(floor_db)
}

/// Inclusive, evenly stepped axis `start, start + step, ..., <= stop`.
///
/// The last point snaps to `stop` when it is within 1e-9 steps of it, so
/// decimal steps such as 0.1 do not lose the endpoint to rounding.
pub fn stepped_axis(start: f64, stop: f64, step: f64) -> alloc::vec::Vec<f64> {
    let mut out = alloc::vec::Vec::new();
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return out;
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    out.reserve(n + 1);
    for i in 0..=n {
        out.push(start + i as f64 * step);
    }
    if let Some(last) = out.last_mut() {
        if (stop - *last).abs() < 1e-9 * step {
            *last = stop;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn golden_respects_reversed_bracket_and_endpoints() {
        let (x, _) = golden_section_max(|x| x, 1.0, 0.0, 1e-9);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn parabola_vertex_exact_for_quadratic() {
        let f = |x: f64| 5.0 - (x - 0.2) * (x - 0.2);
        let (d, v) = parabolic_vertex(f(-1.0), f(0.0), f(1.0));
        assert!((d - 0.2).abs() < 1e-12);
        assert!((v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn wrap_is_principal() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(2.0 * PI)).abs() < 1e-15);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn axis_keeps_decimal_endpoint() {
        let a = stepped_axis(0.0, 12.0, 0.1);
        assert_eq!(a.len(), 121);
        assert_eq!(*a.last().unwrap(), 12.0);
        assert!(stepped_axis(1.0, 0.0, 0.1).is_empty());
        assert_eq!(stepped_axis(2.0, 2.0, 0.5), [2.0]);
    }

    #[test]
    fn db_floor() {
        assert_eq!(to_db(0.0, -60.0), -60.0);
        assert!((to_db(0.1, -60.0) + 20.0).abs() < 1e-12);
        assert_eq!(to_db(1e-9, -60.0), -60.0);
    }
}

/// Abscissa and value of the vertex of the parabola through three points
/// with distinct, increasing abscissae.
pub fn parabola_through(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    let (y0, y1, y2) = (y[0], y[1], y[2]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a == 0.0 || !a.is_finite() {
        return (x1, y1);
    }
    let b = d01 - a * (x0 + x1);
    let xv = (-b / (2.0 * a)).clamp(x0, x2);
    let yv = y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1);
    (xv, yv)
}
