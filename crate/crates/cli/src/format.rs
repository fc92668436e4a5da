//! Fixed-width rendering of numbers at six significant digits.

/// `x` to six significant digits; scientific notation outside `[1e-4, 1e6)`.
pub fn sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci[sci.find('e').map_or(0, |i| i + 1)..].parse().unwrap_or(0);
    if !(-4..6).contains(&exp) {
        return sci;
    }
    let decimals = (5 - exp) as usize;
    format!("{x:.decimals$}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), sig)
}
