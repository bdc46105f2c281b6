//! Wavelength-dependent photovoltaic conversion efficiency.
//!
//! Curves are piecewise linear in wavelength and are never extrapolated.
//! Knots keep the file units (nm, percent) so a catalog written by
//! [`CellCatalog::to_csv`] reloads bit for bit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Catalog shipped with the crate.
pub const BUNDLED_CELLS_CSV: &str = include_str!("../data/cells.csv");

/// Path of the bundled catalog relative to the crate root.
pub const BUNDLED_CELLS_PATH: &str = "data/cells.csv";

const HEADER: [&str; 4] = ["material", "wavelength_nm", "efficiency_percent", "provenance"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub wavelength_nm: f64,
    pub efficiency_percent: f64,
    pub provenance: String,
}

impl Knot {
    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_nm * 1e-9
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency_percent / 100.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyCurve {
    pub material: String,
    pub knots: Vec<Knot>,
}

impl EfficiencyCurve {
    pub fn new(material: impl Into<String>, knots: Vec<Knot>) -> Result<Self> {
        let material = material.into();
        if knots.len() < 2 {
            return Err(Error::Catalog {
                line: 0,
                message: format!("curve {material} needs at least two points"),
            });
        }
        for (i, k) in knots.iter().enumerate() {
            check_knot(k).map_err(|message| Error::Catalog { line: 0, message })?;
            if i > 0 && k.wavelength_nm <= knots[i - 1].wavelength_nm {
                return Err(Error::Catalog {
                    line: 0,
                    message: format!("curve {material}: wavelengths must be strictly increasing"),
                });
            }
        }
        Ok(Self { material, knots })
    }

    pub fn span_nm(&self) -> (f64, f64) {
        (self.knots[0].wavelength_nm, self.knots[self.knots.len() - 1].wavelength_nm)
    }

    pub fn covers(&self, wavelength_m: f64) -> bool {
        let (lo, hi) = self.span_nm();
        let nm = to_nm(wavelength_m);
        nm >= lo && nm <= hi
    }

    /// Efficiency fraction at `wavelength_m`.
    pub fn ehce_at(&self, wavelength_m: f64) -> Result<f64> {
        let nm = to_nm(wavelength_m);
        let (lo, hi) = self.span_nm();
        if !(nm >= lo && nm <= hi) {
            return Err(Error::OutOfCurveRange {
                material: self.material.clone(),
                wavelength_nm: nm,
                min_nm: lo,
                max_nm: hi,
            });
        }
        let upper = self.knots.partition_point(|k| k.wavelength_nm < nm);
        let b = &self.knots[upper];
        if b.wavelength_nm == nm {
            return Ok(b.efficiency());
        }
        let a = &self.knots[upper - 1];
        let t = (nm - a.wavelength_nm) / (b.wavelength_nm - a.wavelength_nm);
        Ok(a.efficiency() + t * (b.efficiency() - a.efficiency()))
    }
}

fn check_knot(k: &Knot) -> std::result::Result<(), String> {
    if !(k.wavelength_nm.is_finite() && k.wavelength_nm > 0.0) {
        return Err(format!("wavelength {} nm must be positive", k.wavelength_nm));
    }
    if !(0.0..=100.0).contains(&k.efficiency_percent) {
        return Err(format!(
            "efficiency {} % is outside [0, 100]",
            k.efficiency_percent
        ));
    }
    Ok(())
}

// Rounded to 1e-6 nm so metre-valued queries such as 1064e-9 land on knots.
fn to_nm(wavelength_m: f64) -> f64 {
    (wavelength_m * 1e9 * 1e6).round() / 1e6
}

/// Cell curves keyed by material name.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CellCatalog {
    curves: BTreeMap<String, EfficiencyCurve>,
}

impl CellCatalog {
    pub fn from_curves(curves: impl IntoIterator<Item = EfficiencyCurve>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for c in curves {
            if map.contains_key(&c.material) {
                return Err(Error::Catalog {
                    line: 0,
                    message: format!("duplicate material {}", c.material),
                });
            }
            map.insert(c.material.clone(), c);
        }
        Ok(Self { curves: map })
    }

    pub fn bundled() -> Self {
        Self::from_csv_str(BUNDLED_CELLS_CSV).expect("bundled cell catalog is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Catalog {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::from_csv_str(&text)
    }

    /// Parses `material,wavelength_nm,efficiency_percent,provenance` rows.
    /// Rows of one material must be contiguous and increasing in wavelength.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::Catalog {
            line: 1,
            message: e.to_string(),
        })?;
        if header.iter().ne(HEADER) {
            return Err(Error::Catalog {
                line: 1,
                message: format!("expected header {}", HEADER.join(",")),
            });
        }

        let mut curves: Vec<(String, Vec<Knot>)> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let bad = |message: String| Error::Catalog { line, message };
            let record = record.map_err(|e| bad(e.to_string()))?;
            if record.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", record.len())));
            }
            let number = |idx: usize| {
                record[idx]
                    .parse::<f64>()
                    .map_err(|_| bad(format!("{} is not a number: {:?}", HEADER[idx], &record[idx])))
            };
            let knot = Knot {
                wavelength_nm: number(1)?,
                efficiency_percent: number(2)?,
                provenance: record[3].to_string(),
            };
            check_knot(&knot).map_err(bad)?;
            let material = record[0].to_string();
            if material.is_empty() {
                return Err(bad("empty material name".into()));
            }
            match curves.last_mut() {
                Some((m, knots)) if *m == material => {
                    let prev = knots.last().map(|k| k.wavelength_nm).unwrap_or(f64::NEG_INFINITY);
                    if knot.wavelength_nm <= prev {
                        return Err(bad(format!(
                            "{material}: wavelength {} nm does not increase",
                            knot.wavelength_nm
                        )));
                    }
                    knots.push(knot);
                }
                _ => {
                    if curves.iter().any(|(m, _)| *m == material) {
                        return Err(bad(format!("rows for {material} are not contiguous")));
                    }
                    curves.push((material, vec![knot]));
                }
            }
        }
        if curves.is_empty() {
            return Err(Error::Catalog {
                line: 1,
                message: "catalog has no curves".into(),
            });
        }
        let curves = curves
            .into_iter()
            .map(|(m, knots)| EfficiencyCurve::new(m, knots))
            .collect::<Result<Vec<_>>>()?;
        Self::from_curves(curves)
    }

    /// Serializes in the same format [`CellCatalog::from_csv_str`] reads,
    /// materials in name order.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER).expect("in-memory write");
        for curve in self.curves.values() {
            for k in &curve.knots {
                w.write_record([
                    curve.material.as_str(),
                    &k.wavelength_nm.to_string(),
                    &k.efficiency_percent.to_string(),
                    &k.provenance,
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn get(&self, material: &str) -> Result<&EfficiencyCurve> {
        self.curves
            .get(material)
            .ok_or_else(|| Error::UnknownMaterial(material.to_string()))
    }

    pub fn curves(&self) -> impl Iterator<Item = &EfficiencyCurve> {
        self.curves.values()
    }

    /// Material with the highest efficiency at `wavelength_m`; ties go to
    /// the lexicographically first name.
    pub fn best_cell_for(&self, wavelength_m: f64) -> Result<(String, f64)> {
        let mut best: Option<(&str, f64)> = None;
        // BTreeMap iterates in name order, so strict > keeps the first on ties.
        for curve in self.curves.values().filter(|c| c.covers(wavelength_m)) {
            let e = curve.ehce_at(wavelength_m)?;
            if best.map_or(true, |(_, b)| e > b) {
                best = Some((&curve.material, e));
            }
        }
        best.map(|(m, e)| (m.to_string(), e))
            .ok_or(Error::NoCellCovers {
                wavelength_nm: to_nm(wavelength_m),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn knot(nm: f64, pct: f64) -> Knot {
        Knot {
            wavelength_nm: nm,
            efficiency_percent: pct,
            provenance: "test".into(),
        }
    }

    fn curve(name: &str, pts: &[(f64, f64)]) -> EfficiencyCurve {
        EfficiencyCurve::new(name, pts.iter().map(|&(w, e)| knot(w, e)).collect()).unwrap()
    }

    #[test]
    fn bundled_anchors() {
        let cat = CellCatalog::bundled();
        let e = cat.get("InGaAsP").unwrap().ehce_at(1064e-9).unwrap();
        assert!((e - 0.264).abs() < 1e-12);
        let (m, e) = cat.best_cell_for(1064e-9).unwrap();
        assert_eq!(m, "InGaAsP");
        assert!((e - 0.264).abs() < 1e-12);
        assert!(cat.get("InGaAs").unwrap().ehce_at(1064e-9).unwrap() < 0.264);
        let gaas = cat.get("GaAs").unwrap().ehce_at(800e-9).unwrap();
        assert!((gaas - 0.60).abs() < 1e-12);
    }

    #[test]
    fn knot_and_midpoint() {
        let c = curve("X", &[(900.0, 10.0), (1000.0, 30.0), (1100.0, 20.0)]);
        assert_eq!(c.ehce_at(1000e-9).unwrap(), 0.30);
        assert!((c.ehce_at(950e-9).unwrap() - 0.20).abs() < 1e-15);
        assert!((c.ehce_at(1050e-9).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(c.ehce_at(900e-9).unwrap(), 0.10);
        assert_eq!(c.ehce_at(1100e-9).unwrap(), 0.20);
    }

    #[test]
    fn no_extrapolation() {
        let c = curve("X", &[(900.0, 10.0), (1000.0, 30.0)]);
        assert!(matches!(c.ehce_at(899e-9), Err(Error::OutOfCurveRange { .. })));
        assert!(matches!(c.ehce_at(1001e-9), Err(Error::OutOfCurveRange { .. })));
    }

    #[test]
    fn selection_rules() {
        let single = CellCatalog::from_curves([curve("Only", &[(800.0, 5.0), (900.0, 6.0)])]).unwrap();
        assert_eq!(single.best_cell_for(850e-9).unwrap().0, "Only");

        let tie = CellCatalog::from_curves([
            curve("Zeta", &[(800.0, 20.0), (900.0, 20.0)]),
            curve("Alpha", &[(800.0, 20.0), (900.0, 20.0)]),
        ])
        .unwrap();
        assert_eq!(tie.best_cell_for(850e-9).unwrap().0, "Alpha");

        assert!(matches!(
            single.best_cell_for(1500e-9),
            Err(Error::NoCellCovers { .. })
        ));
    }

    #[test]
    fn malformed_files() {
        assert!(CellCatalog::from_csv_str("").is_err());
        assert!(CellCatalog::from_csv_str("material,wavelength_nm,efficiency_percent,provenance\n").is_err());

        let over = "material,wavelength_nm,efficiency_percent,provenance\nA,800,10,x\nA,900,120,x\n";
        match CellCatalog::from_csv_str(over) {
            Err(Error::Catalog { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("120"), "{message}");
            }
            other => panic!("{other:?}"),
        }

        let backwards = "material,wavelength_nm,efficiency_percent,provenance\nA,900,10,x\nA,800,12,x\n";
        assert!(matches!(
            CellCatalog::from_csv_str(backwards),
            Err(Error::Catalog { line: 3, .. })
        ));

        let single = "material,wavelength_nm,efficiency_percent,provenance\nA,900,10,x\n";
        assert!(CellCatalog::from_csv_str(single).is_err());

        let nan = "material,wavelength_nm,efficiency_percent,provenance\nA,nine,10,x\nA,950,10,x\n";
        assert!(matches!(
            CellCatalog::from_csv_str(nan),
            Err(Error::Catalog { line: 2, .. })
        ));

        let split = "material,wavelength_nm,efficiency_percent,provenance\nA,800,1,x\nA,900,1,x\nB,800,1,x\nB,900,1,x\nA,950,1,x\n";
        assert!(matches!(
            CellCatalog::from_csv_str(split),
            Err(Error::Catalog { line: 6, .. })
        ));
    }

    #[test]
    fn load_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cells.csv");
        std::fs::write(&path, BUNDLED_CELLS_CSV).unwrap();
        assert_eq!(CellCatalog::load(&path).unwrap(), CellCatalog::bundled());
        assert!(CellCatalog::load(dir.path().join("missing.csv")).is_err());
    }

    #[test]
    fn bundled_round_trips() {
        let cat = CellCatalog::bundled();
        let text = cat.to_csv();
        assert_eq!(CellCatalog::from_csv_str(&text).unwrap(), cat);
        assert_eq!(CellCatalog::from_csv_str(&text).unwrap().to_csv(), text);
    }

    fn arb_curve() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((1.0f64..200.0, 0.0f64..=100.0), 2..12).prop_map(|v| {
            let mut w = 300.0;
            v.into_iter()
                .map(|(step, e)| {
                    w += step;
                    (w, e)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn interpolation_stays_within_bracket(pts in arb_curve(), t in 0.0f64..1.0) {
            let c = curve("P", &pts);
            let (lo, hi) = c.span_nm();
            let nm = ((lo + t * (hi - lo)) * 1e6).round() / 1e6;
            let e = c.ehce_at(nm * 1e-9).unwrap();
            let i = pts.iter().position(|p| p.0 >= nm).unwrap();
            let j = i.saturating_sub(1);
            let (a, b) = (pts[j].1 / 100.0, pts[i].1 / 100.0);
            prop_assert!(e >= a.min(b) - 1e-15 && e <= a.max(b) + 1e-15);
        }

        #[test]
        fn save_load_is_bit_identical(a in arb_curve(), b in arb_curve()) {
            let cat = CellCatalog::from_curves([curve("A", &a), curve("B", &b)]).unwrap();
            let reloaded = CellCatalog::from_csv_str(&cat.to_csv()).unwrap();
            prop_assert_eq!(&reloaded, &cat);
            prop_assert_eq!(reloaded.to_csv(), cat.to_csv());
        }
    }
}
