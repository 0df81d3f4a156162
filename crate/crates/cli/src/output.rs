use std::fmt::Write as _;

use nmeans::geometry::Point2;

pub const CSV_HEADER: &str = "support,n,value,method,conjecture_conditional,sites";

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= p as i32 {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (p as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn sites_2d(sites: &[Point2]) -> String {
    sites
        .iter()
        .map(|p| format!("{}:{}", sig12(p.x), sig12(p.y)))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn sites_1d(sites: &[f64]) -> String {
    sites.iter().map(|&x| sig12(x)).collect::<Vec<_>>().join(";")
}

/// One solved `n`, ready for CSV and the summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub support: String,
    pub n: usize,
    pub value: f64,
    pub method: String,
    pub conjecture_conditional: bool,
    pub sites: String,
    pub candidates: Vec<(String, f64)>,
    pub unverified: bool,
    pub oracle_delta: Option<f64>,
}

impl Row {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.support, self.n, self.value, self.method, self.conjecture_conditional, self.sites
        )
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} n={}: V = {}  via {}",
            self.support,
            self.n,
            sig12(self.value),
            self.method
        );
        if self.conjecture_conditional {
            s.push_str("  [conjecture-conditional]");
        }
        if self.unverified {
            s.push_str("  [unverified]");
        }
        s.push('\n');
        if let Some(d) = self.oracle_delta {
            let _ = writeln!(s, "  cross-check delta: {}", sig(d, 3));
        }
        let _ = writeln!(s, "  sites: {}", self.sites);
        for (label, v) in &self.candidates {
            let _ = writeln!(s, "  candidate {label}: {}", sig12(*v));
        }
        s
    }
}

pub fn csv_table(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

/// Parses the `sites` column of a CSV written by [`csv_table`].
pub fn parse_sites(field: &str) -> Result<Vec<Vec<f64>>, String> {
    field
        .split(';')
        .filter(|s| !s.is_empty())
        .map(|site| {
            site.split(':')
                .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad coordinate {t:?}")))
                .collect()
        })
        .collect()
}

/// Sites of the row for `n` (or the first row when `n` is `None`).
pub fn sites_from_csv(text: &str, n: Option<usize>) -> Result<(usize, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(format!("expected CSV header {CSV_HEADER:?}")),
    }
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(format!("malformed row {line:?}"));
        }
        let row_n: usize = fields[1].parse().map_err(|_| format!("bad n in {line:?}"))?;
        if n.is_none_or(|want| want == row_n) {
            return Ok((row_n, parse_sites(fields[5])?));
        }
    }
    Err(match n {
        Some(n) => format!("no row with n = {n}"),
        None => "no rows".into(),
    })
}
