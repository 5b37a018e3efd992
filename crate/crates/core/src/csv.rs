//! Comma-separated output: header row, 17-significant-digit floats.

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// 17 significant digits, `NaN`/`inf`/`-inf` for non-finite values.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn render_cell(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => fmt_float(*x),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

/// Renders header plus rows, `\n` line endings, RFC-4180 quoting.
pub fn render(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut w = ::csv::WriterBuilder::new().terminator(::csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        debug_assert_eq!(r.len(), header.len(), "row width differs from header");
        w.write_record(r.iter().map(render_cell)).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("cells are UTF-8")
}

pub const RADII_HEADER: &[&str] = &["beta", "R_C", "R_C_bar", "M_IS", "M_LG", "R_V", "a_star_RC", "a_star_RCbar"];
pub const SERIES_HEADER: &[&str] = &["n", "b_n", "beta_n", "B_Lambda_n", "F_coeff"];
pub const ORACLE_HEADER: &[&str] = &["N", "logZ"];
pub const GRAND_CANONICAL_HEADER: &[&str] = &["N", "prob"];
pub const CORRELATION_HEADER: &[&str] = &["q1", "q2", "dist", "u2_exact", "rhs", "feasible"];
pub const DEVIATION_HEADER: &[&str] = &[
    "L", "mu0", "alpha", "u", "N_bar", "N_star", "N_tilde", "mu_tilde", "I_GC", "D", "D_alpha", "D_alpha_plus", "m_alpha", "E", "p_exact",
    "p_formula", "gap",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn quoting() {
        let s = render(&["a", "b"], &[vec![Cell::from("x,y"), Cell::from(3usize)]]);
        assert_eq!(s, "a,b\n\"x,y\",3\n");
    }
}
