//! Config files, CSV output, and SVG plots.

pub mod config_file;
pub mod csv_out;
pub mod plot;

pub use config_file::{parse_config, render_config};
pub use csv_out::{
    sweep_csv, timeseries_csv, write_sweep, write_timeseries, SWEEP_HEADER, TIMESERIES_HEADER,
};
pub use plot::{render_plot, render_svg};

/// Formats a real with 6 significant digits the way C's `%.6g` does:
/// trailing zeros dropped, scientific notation outside `1e-4 <= |x| < 1e6`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
