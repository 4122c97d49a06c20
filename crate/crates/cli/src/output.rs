//! CSV rendering.

use std::io::Write;

use crate::sweep::Row;

pub const HEADER: [&str; 14] = [
    "N",
    "kappa_over_g",
    "gamma_over_g",
    "px_over_g",
    "gstar_over_g",
    "method_used",
    "n_max_used",
    "n_a",
    "n_J",
    "total_nx",
    "g2_cavity",
    "g2_collective",
    "g2_err",
    "error",
];

/// C's `%.12g`.
pub fn format_g(v: f64) -> String {
    if v.is_nan() {
        return String::new();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let strip = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip(mantissa), exp.abs())
    } else {
        strip(&format!("{v:.*}", (11 - exp) as usize))
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_g).unwrap_or_default()
}

fn record(row: &Row) -> Vec<String> {
    let p = &row.params;
    // rates are reported in units of g
    let g = p.coupling_g;
    let mut out = vec![
        p.n_emitters.to_string(),
        format_g(p.kappa / g),
        format_g(p.gamma / g),
        format_g(p.pump_px / g),
        format_g(p.dephasing / g),
        row.method_used.name().to_string(),
    ];
    match &row.result {
        Ok(v) => {
            out.push(v.n_max_used.map(|n| n.to_string()).unwrap_or_default());
            for x in [v.n_a, v.n_j, v.total_nx, v.g2_cavity, v.g2_collective, v.g2_err] {
                out.push(cell(x));
            }
            out.push(String::new());
        }
        Err(e) => {
            out.extend(std::iter::repeat_n(String::new(), 7));
            out.push(e.clone());
        }
    }
    out
}

pub fn write_csv<W: Write>(rows: &[Row], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(record(row))?;
    }
    w.flush()?;
    Ok(())
}
