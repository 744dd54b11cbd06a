// SPDX-License-Identifier: Apache-2.0

//! CSV writers for curves and sweeps.
//!
//! Every file starts with `#`-prefixed metadata lines, then a header row.
//! Floats are printed with 12 significant digits in the style of C's `%.12g`.

use std::io::Write;

use crate::error::Result;
use crate::sim::SweepResult;
use crate::theory::ThresholdCurve;

pub const SIG_DIGITS: usize = 12;

pub const CURVE_HEADER: &str = "lambda_a,lambda_b";
pub const THEORY_SWEEP_HEADER: &str = "lambda_a,lambda_b,s_theory";
pub const SWEEP_HEADER: &str = "lambda_a,lambda_b,s_theory,s_sim,stderr,outbreak_prob,realizations";

/// `%.12g` formatting: shortest of fixed or exponent notation, trailing
/// zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_metadata<W: Write>(w: &mut W, metadata: &[String]) -> Result<()> {
    for m in metadata {
        writeln!(w, "#{m}")?;
    }
    Ok(())
}

pub fn write_curve<W: Write>(mut w: W, curve: &ThresholdCurve, metadata: &[String]) -> Result<()> {
    write_metadata(&mut w, metadata)?;
    writeln!(w, "{CURVE_HEADER}")?;
    for &(a, b) in &curve.points {
        writeln!(w, "{},{}", fmt_sig(a), fmt_sig(b))?;
    }
    w.flush()?;
    Ok(())
}

/// Rows are `(lambda_a, lambda_b, s_theory)`.
pub fn write_theory_sweep<W: Write>(
    mut w: W,
    rows: &[(f64, f64, f64)],
    metadata: &[String],
) -> Result<()> {
    write_metadata(&mut w, metadata)?;
    writeln!(w, "{THEORY_SWEEP_HEADER}")?;
    for &(a, b, s) in rows {
        writeln!(w, "{},{},{}", fmt_sig(a), fmt_sig(b), fmt_sig(s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(mut w: W, sweep: &SweepResult, metadata: &[String]) -> Result<()> {
    write_metadata(&mut w, metadata)?;
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in &sweep.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_sig(r.lambda_a),
            fmt_sig(r.lambda_b),
            fmt_sig(r.s_theory),
            fmt_sig(r.s_sim),
            fmt_sig(r.stderr),
            fmt_sig(r.outbreak_prob),
            sweep.realizations
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (1.0, "1"),
            (0.5, "0.5"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (123456.789, "123456.789"),
            (1e-5, "1e-05"),
            (1.5e-7, "1.5e-07"),
            (0.0001, "0.0001"),
            (1e12, "1e+12"),
            (999999999999.0, "999999999999"),
            (-0.25, "-0.25"),
            (0.0, "0"),
            (0.1 + 0.2, "0.3"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_sig(x), want, "{x:e}");
        }
    }

    #[test]
    fn rounding_carries_into_exponent() {
        assert_eq!(fmt_sig(9.9999999999999e-5), "0.0001");
        assert_eq!(fmt_sig(0.99999999999999), "1");
    }

    #[test]
    fn curve_layout() {
        let curve = ThresholdCurve {
            points: vec![(0.0, 0.5), (0.25, 1.0 / 3.0)],
            grid_resolution: 0.25,
        };
        let mut buf = Vec::new();
        write_curve(&mut buf, &curve, &["rng chacha8 seed=1".into()]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "#rng chacha8 seed=1\nlambda_a,lambda_b\n0,0.5\n0.25,0.333333333333\n"
        );
    }
}
