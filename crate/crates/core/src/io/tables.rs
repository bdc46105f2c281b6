//! CSV tables: sweep results and raw jitter draws.
//!
//! Numbers are written in Rust's shortest round-trip form, so reading a
//! table back yields the exact values that were written.

use std::io::{Read, Write};

use super::IoError;
use crate::experiment::{EvaluationMode, SweepResult};
use crate::pointing::JitterSampleSet;

pub const SWEEP_HEADER: [&str; 8] = [
    "range_km",
    "divergence_urad",
    "tx_aperture_m",
    "p_t_w",
    "mode",
    "p_h_w",
    "l_t",
    "l_r",
];

pub const SAMPLES_HEADER: [&str; 3] = ["index", "psi_t_rad", "psi_r_rad"];

/// One row of a sweep CSV. Empty cells (failed points) read as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCsvRow {
    pub range_km: f64,
    pub divergence_urad: Option<f64>,
    pub tx_aperture_m: Option<f64>,
    pub p_t_w: f64,
    pub mode: EvaluationMode,
    pub p_h_w: Option<f64>,
    pub l_t: Option<f64>,
    pub l_r: Option<f64>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> IoError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::File {
            path: "<csv>".into(),
            source,
        },
        other => IoError::Syntax(format!("{other:?}")),
    }
}

pub fn write_sweep_csv<W: Write>(out: W, result: &SweepResult) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    let mode = result.mode.as_str();
    for row in &result.rows {
        let point = row.outcome.as_ref().ok();
        w.write_record([
            (row.range_m / 1e3).to_string(),
            cell(row.divergence_rad.map(|d| d * 1e6)),
            cell(row.tx_aperture_m),
            row.p_t_w.to_string(),
            mode.to_string(),
            cell(point.map(|p| p.p_h_w)),
            cell(point.map(|p| p.l_t)),
            cell(point.map(|p| p.l_r)),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| IoError::File {
        path: "<csv>".into(),
        source,
    })
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepCsvRow>, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(SWEEP_HEADER) {
        return Err(IoError::field("header", format!("expected {}", SWEEP_HEADER.join(","))));
    }
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(csv_err)?;
            let line = i + 2;
            let opt = |k: usize| -> Result<Option<f64>, IoError> {
                if rec[k].is_empty() {
                    return Ok(None);
                }
                rec[k]
                    .parse()
                    .map(Some)
                    .map_err(|_| IoError::field(format!("line {line}: {}", SWEEP_HEADER[k]), "not a number"))
            };
            let req = |k: usize| {
                opt(k)?.ok_or_else(|| IoError::field(format!("line {line}: {}", SWEEP_HEADER[k]), "missing"))
            };
            Ok(SweepCsvRow {
                range_km: req(0)?,
                divergence_urad: opt(1)?,
                tx_aperture_m: opt(2)?,
                p_t_w: req(3)?,
                mode: rec[4]
                    .parse()
                    .map_err(|e| IoError::field(format!("line {line}: mode"), e))?,
                p_h_w: opt(5)?,
                l_t: opt(6)?,
                l_r: opt(7)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleCsvRow {
    pub index: u64,
    pub psi_t_rad: f64,
    pub psi_r_rad: f64,
}

pub fn write_samples_csv<W: Write>(out: W, samples: &JitterSampleSet) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SAMPLES_HEADER).map_err(csv_err)?;
    for (i, (t, r)) in samples
        .radial_angles_t
        .iter()
        .zip(&samples.radial_angles_r)
        .enumerate()
    {
        w.write_record([i.to_string(), t.to_string(), r.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|source| IoError::File {
        path: "<csv>".into(),
        source,
    })
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<SampleCsvRow>, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(SAMPLES_HEADER) {
        return Err(IoError::field("header", format!("expected {}", SAMPLES_HEADER.join(","))));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let num = |k: usize| {
                rec[k]
                    .parse::<f64>()
                    .map_err(|_| IoError::field(SAMPLES_HEADER[k], format!("{:?} is not a number", &rec[k])))
            };
            Ok(SampleCsvRow {
                index: rec[0]
                    .parse()
                    .map_err(|_| IoError::field("index", format!("{:?} is not an index", &rec[0])))?,
                psi_t_rad: num(1)?,
                psi_r_rad: num(2)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{sweep, Scenario};
    use crate::pointing::PointingJitter;
    use proptest::prelude::*;

    fn sweep_bytes(s: &Scenario, ranges: &[f64], powers: &[f64]) -> Vec<u8> {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &sweep(s, ranges, powers).unwrap()).unwrap();
        buf
    }

    #[test]
    fn header_and_failed_rows() {
        let s = Scenario::reference("1u", 0.1, PointingJitter::new(1e-8, 1e-8, false).unwrap());
        let bytes = sweep_bytes(&s, &[10e3, 900e3], &[27.0]);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("range_km,divergence_urad,tx_aperture_m,p_t_w,mode,p_h_w,l_t,l_r\n"));
        let rows = read_sweep_csv(bytes.as_slice()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].divergence_urad, Some(10.0));
        assert!(rows[0].p_h_w.is_some());
        assert_eq!(rows[1].p_h_w, None);
        assert!(rows[1].tx_aperture_m.unwrap() > 8.0);
        assert_eq!(rows[1].mode, EvaluationMode::MeanAngle);
    }

    #[test]
    fn rejects_foreign_tables() {
        assert!(read_sweep_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_samples_csv("index,psi\n".as_bytes()).is_err());
    }

    #[test]
    fn samples_round_trip() {
        let jitter = PointingJitter::new(5e-6, 0.5e-6, false).unwrap();
        let set = JitterSampleSet::draw(&jitter, 500, 3).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &set).unwrap();
        assert!(buf.starts_with(b"index,psi_t_rad,psi_r_rad\n"));
        let rows = read_samples_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 500);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.index, i as u64);
            assert_eq!(row.psi_t_rad, set.radial_angles_t[i]);
            assert_eq!(row.psi_r_rad, set.radial_angles_r[i]);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn sweep_csv_numeric_columns_round_trip(
            psi in 0.0f64..2e-7,
            ranges in prop::collection::vec(10e3f64..1.2e6, 1..6),
            powers in prop::collection::vec(0.5f64..2e3, 1..4),
        ) {
            let s = Scenario::reference("1u", 0.1, PointingJitter::from_mean_radial(psi, psi, false).unwrap());
            let result = sweep(&s, &ranges, &powers).unwrap();
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &result).unwrap();
            let rows = read_sweep_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(rows.len(), result.rows.len());
            for (row, orig) in rows.iter().zip(&result.rows) {
                prop_assert_eq!(row.range_km, orig.range_m / 1e3);
                prop_assert_eq!(row.divergence_urad, orig.divergence_rad.map(|d| d * 1e6));
                prop_assert_eq!(row.tx_aperture_m, orig.tx_aperture_m);
                prop_assert_eq!(row.p_t_w, orig.p_t_w);
                prop_assert_eq!(row.p_h_w, orig.outcome.as_ref().ok().map(|p| p.p_h_w));
                prop_assert_eq!(row.l_t, orig.outcome.as_ref().ok().map(|p| p.l_t));
            }
        }
    }
}
