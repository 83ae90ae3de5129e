//! Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (k + q)^{-s}` for `s > 1`, `q > 0`.

/// `B_{2j} / (2j)!` for j = 1..=7.
const BERNOULLI_OVER_FACTORIAL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
];

/// `ζ(s, q) · q^s`, which stays near 1 when `q` is large, so that neither
/// the value nor its logarithm underflows.
fn scaled(s: f64, q: f64) -> f64 {
    debug_assert!(s > 1.0 && q > 0.0);
    // Direct terms until the Euler–Maclaurin remainder is tiny.
    let direct = 10 + s.ceil().min(60.0) as usize;
    let mut sum = 0.0;
    for k in 0..direct {
        sum += (1.0 + k as f64 / q).powf(-s);
    }
    let a = q + direct as f64;
    let r = (a / q).powf(-s);
    let mut tail = a / (s - 1.0) + 0.5;
    // Rising factorial s (s+1) ... (s+2j-2) times a^{-(2j-1)}.
    let mut factor = s / a;
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = c * factor;
        tail += term;
        if term.abs() < 1e-17 * tail.abs() {
            break;
        }
        let m = 2.0 * j as f64;
        factor *= (s + m + 1.0) * (s + m + 2.0) / (a * a);
    }
    sum + r * tail
}

pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    scaled(s, q) * q.powf(-s)
}

/// `ln ζ(s, q)`, finite for all `s > 1` and `q ≥ 1`.
pub fn ln_hurwitz_zeta(s: f64, q: f64) -> f64 {
    scaled(s, q).ln() - s * q.ln()
}
