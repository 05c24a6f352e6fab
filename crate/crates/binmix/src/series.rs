//! CSV time series of per-step diagnostics.

use std::io::Write;

use binmix_core::DiagnosticsRecord;

pub const HEADER: &str =
    "t,mass,energy,dissipation,budget_residual,div_max,l2_v,h1_phi,h2_phi,l2_grad_mu,acc62,acc63,acc64";

/// Writes the header before the first row.
pub struct SeriesWriter<W: Write> {
    out: W,
    header_done: bool,
}

impl<W: Write> SeriesWriter<W> {
    pub fn new(out: W) -> Self {
        SeriesWriter {
            out,
            header_done: false,
        }
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> std::io::Result<()> {
        if !self.header_done {
            writeln!(self.out, "{HEADER}")?;
            self.header_done = true;
        }
        writeln!(self.out, "{}", format_row(r))
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// One CSV row, 17 significant digits per value.
pub fn format_row(r: &DiagnosticsRecord) -> String {
    let cols = [
        r.t,
        r.mass,
        r.energy,
        r.dissipation,
        r.budget_residual,
        r.div_max,
        r.l2_v,
        r.h1_phi,
        r.h2_phi,
        r.l2_grad_mu,
        r.acc62(),
        r.acc63(),
        r.acc64(),
    ];
    cols.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",")
}

/// Parses rows written by [`SeriesWriter`], skipping the header.
pub fn parse_series(text: &str) -> Result<Vec<[f64; 13]>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err("missing or wrong header".into());
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let vals: Vec<f64> = l
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("row {}: {e}", i + 1))?;
            vals.try_into()
                .map_err(|_| format!("row {}: expected 13 columns", i + 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_once_and_exact_round_trip() {
        let mut w = SeriesWriter::new(Vec::new());
        let r = DiagnosticsRecord {
            t: 0.1,
            mass: 1.0 / 3.0,
            energy: -2.5e-17,
            ..Default::default()
        };
        w.write(&r).unwrap();
        w.write(&r).unwrap();
        let text = String::from_utf8(w.into_inner()).unwrap();
        assert_eq!(text.matches("t,mass").count(), 1);
        let rows = parse_series(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0][1].to_bits(), (1.0f64 / 3.0).to_bits());
        assert_eq!(rows[0][2], -2.5e-17);
        assert!(text.lines().nth(1).unwrap().starts_with("1.0000000000000001e-1,"));
    }
}
