//! Numeric text helpers shared by the graph, assignment and report formats.

/// Format with nine significant digits and trailing zeros trimmed, so short
/// decimals render exactly (`0.137` stays `0.137`, `10.0` becomes `10`).
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (8 - exponent).clamp(0, 330) as usize;
    let mut s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}
