//! Composite Simpson quadrature.

/// Integrates `f` over `[a, b]` with `panels` Simpson panels (rounded up to
/// an even count of subintervals).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = (panels.max(1) * 2) as f64;
    let h = (b - a) / n;
    let mut odd = 0.0;
    let mut even = 0.0;
    let steps = n as usize;
    for i in 1..steps {
        let x = a + h * i as f64;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1);
        assert!((v - (15.0 / 4.0 - 3.0 + 3.0)).abs() < 1e-14);
    }

    #[test]
    fn gaussian_mass() {
        let v = simpson(crate::normal::pdf, -12.0, 12.0, 4000);
        assert!((v - 1.0).abs() < 1e-13);
    }
}
