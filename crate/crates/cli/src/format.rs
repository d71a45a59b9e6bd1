//! Number formatting and the commented CSV header.

/// Twelve significant digits, `%g` style: plain notation for exponents in
/// `-5..12`, scientific otherwise. Non-finite values are spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), num)
}

pub fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

pub const FORMAT_LINE: &str = concat!("# tlsync ", env!("CARGO_PKG_VERSION"), " csv");

/// Full header: format line, configuration echo, units, results and the
/// column line, each terminated by a newline.
pub fn header(config: &[String], units: &[(&str, &str)], results: &[(String, String)], columns: &[String]) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_LINE);
    out.push('\n');
    for line in config {
        out.push_str(&format!("# {line}\n"));
    }
    for (k, v) in units {
        out.push_str(&format!("# units.{k} = {v}\n"));
    }
    for (k, v) in results {
        out.push_str(&format!("# result.{k} = {v}\n"));
    }
    out.push_str(&columns.join(","));
    out.push('\n');
    out
}

pub fn row(cells: &[String]) -> String {
    let mut line = cells.join(",");
    line.push('\n');
    line
}
