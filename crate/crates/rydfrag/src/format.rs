//! Output file formats. Floats are written in scientific notation with 17
//! significant digits, so equal results give byte-identical files.

use std::io::{self, BufRead, Write};

use num_rational::Ratio;
use rydfrag_core::counting::CountingResult;
use rydfrag_core::fragmentation::EquivalenceClass;
use rydfrag_core::{SpectrumResult, TimeSeries};
use serde::{Deserialize, Serialize};

pub const TIMESERIES_HEADER: &str = "t,M,purity,cdea";
pub const SPECTRUM_HEADER: &str = "re,im";
pub const SUMMARY_HEADER: &str = "zero_mode_count,slow_mode_count,gap";
pub const COUNT_HEADER: &str = "L,f,fib,asymptotic,rel_error";
pub const MEANFIELD_HEADER: &str = "gamma,gamma_mf,tau";

pub fn float(x: f64) -> String {
    // -0 and 0 print identically
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn write_timeseries<W: Write>(mut w: W, series: &TimeSeries) -> io::Result<()> {
    writeln!(w, "{TIMESERIES_HEADER}")?;
    for i in 0..series.len() {
        writeln!(
            w,
            "{},{},{},{}",
            float(series.times[i]),
            float(series.magnetization[i]),
            float(series.purity[i]),
            float(series.cdea[i])
        )?;
    }
    Ok(())
}

pub fn write_spectrum<W: Write>(mut w: W, spectrum: &SpectrumResult) -> io::Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for z in spectrum.eigenvalues() {
        writeln!(w, "{},{}", float(z.re), float(z.im))?;
    }
    Ok(())
}

/// Zero modes, slow modes below `0.1 γ` and the gap of one spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumSummary {
    pub zero_mode_count: usize,
    pub slow_mode_count: usize,
    /// `None` when nothing decays.
    pub gap: Option<f64>,
}

impl SpectrumSummary {
    pub fn new(spectrum: &SpectrumResult, gamma: f64) -> Self {
        Self {
            zero_mode_count: spectrum.zero_mode_count(),
            slow_mode_count: spectrum.slow_mode_count(0.1 * gamma),
            gap: spectrum.gap().ok(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "zero_mode_count={} slow_mode_count={} gap={}",
            self.zero_mode_count,
            self.slow_mode_count,
            self.gap.map_or_else(|| "undefined".into(), float)
        )
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{SUMMARY_HEADER}")?;
        writeln!(
            w,
            "{},{},{}",
            self.zero_mode_count,
            self.slow_mode_count,
            self.gap.map_or_else(|| "nan".into(), float)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub representative: String,
    pub dimension: usize,
    /// Exact fractions such as `"1/21"`.
    pub purity: String,
    pub magnetization: String,
    pub cdea: u64,
    pub frozen: bool,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassesDocument {
    pub length: usize,
    pub class_count: usize,
    pub classes: Vec<ClassRecord>,
}

fn fraction(r: Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl ClassesDocument {
    pub fn new(length: usize, classes: &[EquivalenceClass]) -> Self {
        let classes: Vec<ClassRecord> = classes
            .iter()
            .map(|c| ClassRecord {
                representative: c.representative().to_string(),
                dimension: c.dimension(),
                purity: fraction(c.p_stationary()),
                magnetization: fraction(c.m_stationary()),
                cdea: c.cdea(),
                frozen: c.is_frozen(),
                members: c.members().iter().map(|m| m.to_string()).collect(),
            })
            .collect();
        Self { length, class_count: classes.len(), classes }
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)
    }
}

pub fn write_counts<W: Write>(mut w: W, rows: &[CountingResult]) -> io::Result<()> {
    writeln!(w, "{COUNT_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.length, r.f, r.fib, float(r.asymptotic), float(r.rel_error))?;
    }
    Ok(())
}

/// One row of the mean-field sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldRow {
    pub gamma: f64,
    pub gamma_mf: f64,
    pub tau: f64,
}

pub fn write_meanfield<W: Write>(mut w: W, rows: &[MeanFieldRow]) -> io::Result<()> {
    writeln!(w, "{MEANFIELD_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{}", float(r.gamma), float(r.gamma_mf), float(r.tau))?;
    }
    Ok(())
}

/// Reads a numeric CSV with the given header back into rows.
pub fn read_numeric_csv<R: BufRead>(r: R, header: &str) -> io::Result<Vec<Vec<f64>>> {
    let invalid = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = r.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first != header {
        return Err(invalid(format!("expected header {header:?}, found {first:?}")));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let row = line
            .split(',')
            .map(|field| field.parse::<f64>().map_err(|e| invalid(format!("line {}: {e}", n + 2))))
            .collect::<io::Result<Vec<f64>>>()?;
        if row.len() != width {
            return Err(invalid(format!("line {}: expected {width} fields, found {}", n + 2, row.len())));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rydfrag_core::fragmentation::enumerate_classes;
    use rydfrag_core::C64;

    #[test]
    fn float_format_is_fixed_width_precision() {
        assert_eq!(float(1.0), "1.0000000000000000e0");
        assert_eq!(float(-0.0), "0.0000000000000000e0");
        assert_eq!(float(-50.0 / 21.0), "-2.3809523809523809e0");
    }

    #[test]
    fn timeseries_roundtrip() {
        let series = TimeSeries {
            times: vec![0.0, 0.5],
            magnetization: vec![-6.0, -2.25],
            purity: vec![1.0, 0.125],
            cdea: vec![0.0, 1.0 / 3.0],
            snapshots: Vec::new(),
        };
        let mut buf = Vec::new();
        write_timeseries(&mut buf, &series).unwrap();
        let rows = read_numeric_csv(buf.as_slice(), TIMESERIES_HEADER).unwrap();
        assert_eq!(rows, vec![vec![0.0, -6.0, 1.0, 0.0], vec![0.5, -2.25, 0.125, 1.0 / 3.0]]);
    }

    #[test]
    fn reader_rejects_bad_input() {
        assert!(read_numeric_csv("a,b\n1,2\n".as_bytes(), SPECTRUM_HEADER).is_err());
        assert!(read_numeric_csv("re,im\n1\n".as_bytes(), SPECTRUM_HEADER).is_err());
        assert!(read_numeric_csv("re,im\n1,x\n".as_bytes(), SPECTRUM_HEADER).is_err());
    }

    #[test]
    fn spectrum_summary_line() {
        let s = SpectrumResult::from_eigenvalues(vec![C64::new(0.0, 0.0), C64::new(-1e-3, 0.0), C64::new(-3.0, 1.0)]);
        let summary = SpectrumSummary::new(&s, 2.0);
        assert_eq!(summary.line(), "zero_mode_count=1 slow_mode_count=2 gap=1.0000000000000000e-3");
        let unitary = SpectrumResult::from_eigenvalues(vec![C64::new(0.0, 1.0)]);
        assert_eq!(SpectrumSummary::new(&unitary, 0.0).gap, None);
    }

    #[test]
    fn classes_document_fields() {
        let doc = ClassesDocument::new(6, &enumerate_classes(6).unwrap());
        assert_eq!(doc.class_count, 21);
        let ground = &doc.classes[0];
        assert_eq!((ground.purity.as_str(), ground.magnetization.as_str(), ground.cdea), ("1/21", "-50/21", 0));
        let last = doc.classes.iter().find(|c| c.representative == "111111").unwrap();
        assert_eq!((last.purity.as_str(), last.magnetization.as_str(), last.frozen), ("1", "6", true));
        let mut buf = Vec::new();
        doc.write(&mut buf).unwrap();
        let back: ClassesDocument = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, doc);
    }

    proptest! {
        #[test]
        fn float_roundtrips_exactly(x in proptest::num::f64::NORMAL) {
            prop_assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }
}
