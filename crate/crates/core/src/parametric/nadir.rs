use super::polynomial::{horner, PolynomialCurve};
use super::Curve;

/// Real roots of the polynomial `coeffs` (ascending powers) inside `[lo, hi]`.
///
/// The roots of the derivative split the interval into monotone pieces, so a
/// sign change inside a piece brackets exactly one root, which bisection then
/// pins down to floating-point resolution.
fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c[c.len() - 1] == 0.0 {
        c.pop();
    }
    match c.len() {
        0 | 1 => return Vec::new(),
        2 => {
            let r = -c[0] / c[1];
            return if r >= lo && r <= hi { vec![r] } else { Vec::new() };
        }
        _ => {}
    }
    let deriv: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    let mut knots = vec![lo];
    knots.extend(real_roots_in(&deriv, lo, hi).into_iter().filter(|&x| x > lo && x < hi));
    knots.push(hi);

    let mut roots: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (horner(&c, a), horner(&c, b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = horner(&c, m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if horner(&c, hi) == 0.0 {
        roots.push(hi);
    }
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + y.abs()));
    roots
}

/// Age of the lowest point of a (quartic) BMI curve inside `search_range`,
/// i.e. the adiposity rebound.
///
/// Returns `None` when the minimum over the range sits at a boundary, which
/// is the case for curves that only rise or only fall there.
pub fn find_bmi_nadir(curve: &PolynomialCurve, search_range: (f64, f64)) -> Option<f64> {
    let (t_lo, t_hi) = search_range;
    if !(t_hi > t_lo) {
        return None;
    }
    let (u_lo, u_hi) = (curve.scaled(t_lo), curve.scaled(t_hi));
    let slope = curve.derivative_in_u();
    let f = |u: f64| horner(&curve.coefficients, u);

    let best = real_roots_in(&slope, u_lo, u_hi)
        .into_iter()
        .filter(|&u| u > u_lo && u < u_hi)
        .map(|u| (u, f(u)))
        .min_by(|x, y| x.1.total_cmp(&y.1))?;
    let boundary = curve.eval(t_lo).min(curve.eval(t_hi));
    (best.1 < boundary).then_some(curve.age_center + curve.age_halfwidth * best.0)
}
