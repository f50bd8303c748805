//! Number formatting for CSV output.

/// Shortest decimal string that parses back to exactly `x`: the shorter of
/// the positional and exponent forms.
pub fn number(x: f64) -> String {
    let plain = format!("{x}");
    let sci = format!("{x:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}
