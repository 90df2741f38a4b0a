//! Presentation-layer number formatting. Metrics are computed at full
//! precision and rounded only here.

/// Round half away from zero at `decimals` places and render fixed-width.
pub fn round_half_up(value: f64, decimals: u32) -> String {
    let scale = 10f64.powi(decimals as i32);
    let scaled = value * scale;
    let rounded = if scaled >= 0.0 {
        (scaled + 0.5).floor()
    } else {
        (scaled - 0.5).ceil()
    };
    format!("{:.*}", decimals as usize, rounded / scale)
}

/// Integer with thousands separators: 28171 -> "28,171".
pub fn thousands(value: u64) -> String {
    let digits = value.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    let offset = digits.len() % 3;
    for (i, ch) in digits.chars().enumerate() {
        if i != 0 && (i + digits.len() - offset) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_half_up_at_four_places() {
        assert_eq!(round_half_up(0.8381833333, 4), "0.8382");
        assert_eq!(round_half_up(0.8356802308, 4), "0.8357");
        assert_eq!(round_half_up(0.83333, 4), "0.8333");
        assert_eq!(round_half_up(1.0, 4), "1.0000");
        assert_eq!(round_half_up(0.0, 4), "0.0000");
    }

    #[test]
    fn rounds_negative_away_from_zero() {
        assert_eq!(round_half_up(-0.2233333, 4), "-0.2233");
        assert_eq!(round_half_up(-0.2433333, 4), "-0.2433");
    }

    #[test]
    fn thousands_separators() {
        assert_eq!(thousands(0), "0");
        assert_eq!(thousands(674), "674");
        assert_eq!(thousands(1473), "1,473");
        assert_eq!(thousands(28171), "28,171");
        assert_eq!(thousands(76308), "76,308");
        assert_eq!(thousands(1234567), "1,234,567");
    }
}
