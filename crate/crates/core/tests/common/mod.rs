#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, half_width: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half_width..half_width)).collect()
}

/// Smooth expression in `u1..un` that is defined everywhere.
///
/// Growth is tamed by damping the arguments of `exp` and `sinh` and by only
/// dividing by `1 + x^2`.
pub fn random_expression(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.7) {
            format!("u{}", rng.gen_range(1..=n))
        } else {
            format!("{:.3}", rng.gen_range(-2.0..2.0))
        };
    }
    let a = random_expression(rng, n, depth - 1);
    match rng.gen_range(0..12) {
        0 => format!("({a} + {})", random_expression(rng, n, depth - 1)),
        1 => format!("({a} - {})", random_expression(rng, n, depth - 1)),
        2 | 3 => format!("({a} * {})", random_expression(rng, n, depth - 1)),
        4 => format!("({a} / (1 + ({})^2))", random_expression(rng, n, depth - 1)),
        5 => format!("sin({a})"),
        6 => format!("cos({a})"),
        7 => format!("exp(0.3*sin({a}))"),
        8 => format!("sinh(0.3*({a}))"),
        9 => format!("asinh({a})"),
        10 => format!("sqrt(1 + ({a})^2)"),
        _ => format!("log(2 + cos({a}))"),
    }
}

/// Perturbation with `|grad| <= 0.67` on the ball of radius 2: a linear part, a
/// small quadratic form and a Gaussian bump.
pub fn gentle_perturbation(rng: &mut ChaCha8Rng, n: usize) -> String {
    let mut terms = Vec::new();
    let a = random_point(rng, n, 1.0);
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    let scale = rng.gen_range(0.0..0.3) / norm;
    for (i, ai) in a.iter().enumerate() {
        terms.push(format!("{:.6}*u{}", ai * scale, i + 1));
    }
    let q = 0.05 / n as f64;
    for i in 0..n {
        for j in i..n {
            terms.push(format!("{:.6}*u{}*u{}", rng.gen_range(-q..q), i + 1, j + 1));
        }
    }
    let center = random_point(rng, n, 1.0);
    let dist: Vec<String> = center
        .iter()
        .enumerate()
        .map(|(i, c)| format!("(u{} - {:.6})^2", i + 1, c))
        .collect();
    terms.push(format!("{:.6}*exp(-({}))", rng.gen_range(-0.2..0.2), dist.join(" + ")));
    terms.join(" + ")
}
