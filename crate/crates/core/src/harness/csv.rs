//! CSV rendering shared by sweeps and bound tables.

/// Float with 17 significant digits; infinities as `+inf` / `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Like [`fmt_f64`], with `None` rendered as an empty field.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 16.0 * 5f64.sqrt() - 35.0, 1e-300, -2.5, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "+inf");
        assert_eq!(fmt_opt(None), "");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }
}
