//! TOML scenario documents.
//!
//! Every physical quantity is a string carrying its unit. Unknown keys are
//! rejected. A document also carries the sweep grids.
//!
//! ```toml
//! name = "1u-noatp"
//! mode = "mean-angle"
//! spot_diameter = "0.1 m"
//!
//! [transmitter]
//! wavelength = "1064 nm"
//! pce = "51 %"
//! aperture_cap = "8 m"
//!
//! [receiver]
//! aperture = "0.1 m"
//! material = "InGaAsP"      # or: ehce = "26.4 %"
//!
//! [jitter]
//! atp = false
//! mean_radial_t = "0.0903525 urad"   # or sigma_* / resolution_*
//! mean_radial_r = "0.0903525 urad"
//! ```

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::units::{parse_quantity, Dimension};
use super::IoError;
use crate::efficiency::CellCatalog;
use crate::experiment::{self, EvaluationMode, Scenario};
use crate::geometry::DEFAULT_RANGE_FLOOR_M;
use crate::linkbudget::{FarFieldPolicy, LinkLossOverrides, OpticalReceiver, OpticalTransmitter};
use crate::pointing::PointingJitter;

/// Directory searched for `<name>.toml` before the bundled presets.
pub const SCENARIO_DIR_ENV: &str = "FSO_HARVEST_SCENARIO_DIR";

pub const PRESET_NAMES: [&str; 4] = ["1u-atp", "1u-noatp", "12u-atp", "12u-noatp"];

pub fn bundled_preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "1u-atp" => include_str!("../../scenarios/1u-atp.toml"),
        "1u-noatp" => include_str!("../../scenarios/1u-noatp.toml"),
        "12u-atp" => include_str!("../../scenarios/12u-atp.toml"),
        "12u-noatp" => include_str!("../../scenarios/12u-noatp.toml"),
        _ => return None,
    })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Value {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    description: Option<String>,
    mode: Option<String>,
    spot_diameter: Value,
    p_required: Option<Value>,
    range_floor: Option<Value>,
    transmitter: RawTransmitter,
    receiver: RawReceiver,
    jitter: RawJitter,
    sampling: Option<RawSampling>,
    losses: Option<RawLosses>,
    grid: Option<RawGrid>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransmitter {
    wavelength: Value,
    pce: Value,
    aperture_cap: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReceiver {
    aperture: Value,
    ehce: Option<Value>,
    material: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJitter {
    atp: bool,
    provenance: Option<String>,
    sigma_t: Option<Value>,
    sigma_r: Option<Value>,
    resolution_t: Option<Value>,
    resolution_r: Option<Value>,
    resolution_to_sigma_factor: Option<f64>,
    mean_radial_t: Option<Value>,
    mean_radial_r: Option<Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    samples: Option<u64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLosses {
    l_e: Option<Value>,
    l_s: Option<Value>,
    l_c: Option<Value>,
    far_field: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    ranges: Option<Vec<Value>>,
    range_start: Option<Value>,
    range_stop: Option<Value>,
    range_step: Option<Value>,
    powers: Option<Vec<Value>>,
}

fn quantity(field: &str, value: &Value, dim: Dimension) -> Result<f64, IoError> {
    match value {
        Value::Text(s) => parse_quantity(s, dim).map_err(|m| IoError::field(field, m)),
        Value::Number(x) if dim == Dimension::Fraction => Ok(*x),
        Value::Number(x) => Err(IoError::field(
            field,
            format!("{x} has no unit; write it as a string such as \"{x} <unit>\""),
        )),
    }
}

fn opt_quantity(field: &str, value: Option<&Value>, dim: Dimension) -> Result<Option<f64>, IoError> {
    value.map(|v| quantity(field, v, dim)).transpose()
}

/// Ranges of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum RangeSpec {
    Explicit(Vec<f64>),
    /// `stop = None` runs to the scenario's maximum range.
    Stepped {
        start_m: f64,
        stop_m: Option<f64>,
        step_m: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub ranges: RangeSpec,
    pub powers_w: Vec<f64>,
}

impl GridSpec {
    pub fn default_for(scenario: &Scenario) -> Self {
        Self {
            ranges: RangeSpec::Stepped {
                start_m: scenario.range_floor_m,
                stop_m: None,
                step_m: experiment::DEFAULT_RANGE_STEP_M,
            },
            powers_w: experiment::DEFAULT_POWER_GRID_W.to_vec(),
        }
    }

    pub fn ranges_m(&self, scenario: &Scenario) -> crate::Result<Vec<f64>> {
        match &self.ranges {
            RangeSpec::Explicit(v) => Ok(v.clone()),
            RangeSpec::Stepped {
                start_m,
                stop_m,
                step_m,
            } => {
                let stop = match stop_m {
                    Some(s) => *s,
                    None => scenario.max_range_m()?,
                };
                experiment::range_grid(*start_m, stop, *step_m)
            }
        }
    }
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDocument {
    pub scenario: Scenario,
    pub grid: GridSpec,
    pub description: Option<String>,
    pub jitter_provenance: Option<String>,
    /// SHA-256 of the key-sorted document, independent of comments and layout.
    pub digest: String,
}

impl ScenarioDocument {
    pub fn parse(text: &str, catalog: &CellCatalog) -> Result<Self, IoError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| IoError::Syntax(e.to_string()))?;
        let digest = digest_of(&table)?;
        let raw: RawScenario = table
            .try_into()
            .map_err(|e: toml::de::Error| IoError::Syntax(e.message().to_string()))?;
        raw.resolve(catalog, digest)
    }

    pub fn load(path: impl AsRef<Path>, catalog: &CellCatalog) -> Result<Self, IoError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, catalog)
    }
}

fn digest_of(table: &toml::Table) -> Result<String, IoError> {
    // serde_json maps are ordered by key, which canonicalizes the document.
    let canonical = serde_json::to_value(table)
        .and_then(|v| serde_json::to_string(&v))
        .map_err(|e| IoError::Syntax(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

/// Resolves `source` as a file path, then as `<name>.toml` in
/// `$FSO_HARVEST_SCENARIO_DIR`, then as a bundled preset name.
pub fn load_scenario(source: &str, catalog: &CellCatalog) -> Result<ScenarioDocument, IoError> {
    let path = Path::new(source);
    if path.is_file() {
        return ScenarioDocument::load(path, catalog);
    }
    if let Ok(dir) = std::env::var(SCENARIO_DIR_ENV) {
        let candidate = Path::new(&dir).join(format!("{source}.toml"));
        if candidate.is_file() {
            return ScenarioDocument::load(candidate, catalog);
        }
    }
    match bundled_preset(source) {
        Some(text) => ScenarioDocument::parse(text, catalog),
        None => Err(IoError::field(
            "scenario",
            format!(
                "{source:?} is neither a file nor a preset ({})",
                PRESET_NAMES.join(", ")
            ),
        )),
    }
}

impl RawScenario {
    fn resolve(self, catalog: &CellCatalog, digest: String) -> Result<ScenarioDocument, IoError> {
        use Dimension::*;

        let tx = OpticalTransmitter::new(
            quantity("transmitter.wavelength", &self.transmitter.wavelength, Length)?,
            quantity("transmitter.pce", &self.transmitter.pce, Fraction)?,
            quantity("transmitter.aperture_cap", &self.transmitter.aperture_cap, Length)?,
        )?;

        let rx_aperture = quantity("receiver.aperture", &self.receiver.aperture, Length)?;
        let ehce = match (&self.receiver.ehce, &self.receiver.material) {
            (Some(v), None) => quantity("receiver.ehce", v, Fraction)?,
            (None, Some(material)) => catalog
                .get(material)
                .and_then(|c| c.ehce_at(tx.wavelength_m))
                .map_err(|e| IoError::field("receiver.material", e.to_string()))?,
            _ => {
                return Err(IoError::field(
                    "receiver",
                    "give exactly one of `ehce` or `material`",
                ))
            }
        };
        let rx = OpticalReceiver::new(rx_aperture, ehce)?;

        let jitter = self.jitter.resolve()?;
        let mode = match &self.mode {
            Some(m) => m.parse::<EvaluationMode>().map_err(|e| IoError::field("mode", e))?,
            None => EvaluationMode::default(),
        };
        let sampling = self.sampling.unwrap_or(RawSampling {
            samples: None,
            seed: None,
        });
        let mc_samples = sampling.samples.unwrap_or(experiment::DEFAULT_MC_SAMPLES as u64);
        if mc_samples == 0 {
            return Err(IoError::field("sampling.samples", "must be at least 1"));
        }

        let mut overrides = LinkLossOverrides::default();
        if let Some(l) = &self.losses {
            overrides.l_e = opt_quantity("losses.l_e", l.l_e.as_ref(), Fraction)?.unwrap_or(1.0);
            overrides.l_s = opt_quantity("losses.l_s", l.l_s.as_ref(), Fraction)?.unwrap_or(1.0);
            overrides.l_c = opt_quantity("losses.l_c", l.l_c.as_ref(), Fraction)?.unwrap_or(1.0);
            overrides.far_field = match l.far_field.as_deref() {
                None | Some("warn") => FarFieldPolicy::Warn,
                Some("clamp") => FarFieldPolicy::Clamp,
                Some(other) => {
                    return Err(IoError::field(
                        "losses.far_field",
                        format!("{other:?} is not one of warn, clamp"),
                    ))
                }
            };
        }

        let scenario = Scenario {
            name: self.name.unwrap_or_else(|| "unnamed".into()),
            tx,
            rx,
            jitter,
            spot_diameter_m: quantity("spot_diameter", &self.spot_diameter, Length)?,
            p_required_w: opt_quantity("p_required", self.p_required.as_ref(), Power)?
                .unwrap_or(experiment::DEFAULT_REQUIRED_POWER_W),
            mode,
            mc_samples: usize::try_from(mc_samples)
                .map_err(|_| IoError::field("sampling.samples", "too large"))?,
            seed: sampling.seed.unwrap_or(0),
            range_floor_m: opt_quantity("range_floor", self.range_floor.as_ref(), Length)?
                .unwrap_or(DEFAULT_RANGE_FLOOR_M),
            overrides,
        };
        scenario.validate()?;

        let grid = match self.grid {
            Some(g) => g.resolve(&scenario)?,
            None => GridSpec::default_for(&scenario),
        };

        Ok(ScenarioDocument {
            scenario,
            grid,
            description: self.description,
            jitter_provenance: self.jitter.provenance,
            digest,
        })
    }
}

impl RawJitter {
    fn resolve(&self) -> Result<PointingJitter, IoError> {
        use Dimension::Angle;

        let pair = |t: &Option<Value>, r: &Option<Value>, tn: &str, rn: &str| -> Result<Option<(f64, f64)>, IoError> {
            match (t, r) {
                (None, None) => Ok(None),
                (Some(t), Some(r)) => Ok(Some((quantity(tn, t, Angle)?, quantity(rn, r, Angle)?))),
                _ => Err(IoError::field(
                    format!("{tn}/{rn}"),
                    "both sides must be given",
                )),
            }
        };
        let sigma = pair(&self.sigma_t, &self.sigma_r, "jitter.sigma_t", "jitter.sigma_r")?;
        let resolution = pair(
            &self.resolution_t,
            &self.resolution_r,
            "jitter.resolution_t",
            "jitter.resolution_r",
        )?;
        let mean = pair(
            &self.mean_radial_t,
            &self.mean_radial_r,
            "jitter.mean_radial_t",
            "jitter.mean_radial_r",
        )?;
        if self.resolution_to_sigma_factor.is_some() && resolution.is_none() {
            return Err(IoError::field(
                "jitter.resolution_to_sigma_factor",
                "only applies with resolution_t/resolution_r",
            ));
        }
        let jitter = match (sigma, resolution, mean) {
            (Some((t, r)), None, None) => PointingJitter::new(t, r, self.atp)?,
            (None, Some((t, r)), None) => PointingJitter::from_resolution(
                t,
                r,
                self.resolution_to_sigma_factor.unwrap_or(1.0),
                self.atp,
            )?,
            (None, None, Some((t, r))) => PointingJitter::from_mean_radial(t, r, self.atp)?,
            _ => {
                return Err(IoError::field(
                    "jitter",
                    "give exactly one of sigma_*, resolution_* or mean_radial_*",
                ))
            }
        };
        Ok(jitter)
    }
}

impl RawGrid {
    fn resolve(self, scenario: &Scenario) -> Result<GridSpec, IoError> {
        use Dimension::*;

        let stepped = self.range_start.is_some() || self.range_stop.is_some() || self.range_step.is_some();
        let ranges = match (self.ranges, stepped) {
            (Some(list), false) => {
                if list.is_empty() {
                    return Err(IoError::field("grid.ranges", "grid is empty"));
                }
                RangeSpec::Explicit(
                    list.iter()
                        .map(|v| quantity("grid.ranges", v, Length))
                        .collect::<Result<_, _>>()?,
                )
            }
            (None, _) => {
                let stop_m = match &self.range_stop {
                    None => None,
                    Some(Value::Text(s)) if s.trim() == "max" => None,
                    Some(v) => Some(quantity("grid.range_stop", v, Length)?),
                };
                RangeSpec::Stepped {
                    start_m: opt_quantity("grid.range_start", self.range_start.as_ref(), Length)?
                        .unwrap_or(scenario.range_floor_m),
                    stop_m,
                    step_m: opt_quantity("grid.range_step", self.range_step.as_ref(), Length)?
                        .unwrap_or(experiment::DEFAULT_RANGE_STEP_M),
                }
            }
            (Some(_), true) => {
                return Err(IoError::field(
                    "grid",
                    "use either `ranges` or range_start/range_stop/range_step",
                ))
            }
        };
        let powers_w = match self.powers {
            None => experiment::DEFAULT_POWER_GRID_W.to_vec(),
            Some(list) if list.is_empty() => {
                return Err(IoError::field("grid.powers", "grid is empty"))
            }
            Some(list) => list
                .iter()
                .map(|v| quantity("grid.powers", v, Power))
                .collect::<Result<_, _>>()?,
        };
        let grid = GridSpec { ranges, powers_w };
        let ranges = grid.ranges_m(scenario)?;
        if ranges.is_empty() {
            return Err(IoError::field("grid.ranges", "grid is empty"));
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
spot_diameter = "0.1 m"
[transmitter]
wavelength = "1064 nm"
pce = "51 %"
aperture_cap = "8 m"
[receiver]
aperture = "0.1 m"
ehce = 0.264
[jitter]
atp = true
sigma_t = "0.5 urad"
sigma_r = "0 urad"
"#;

    fn parse(text: &str) -> Result<ScenarioDocument, IoError> {
        ScenarioDocument::parse(text, &CellCatalog::bundled())
    }

    fn field_of(err: IoError) -> String {
        match err {
            IoError::Field { field, .. } => field,
            other => panic!("expected a field error, got {other}"),
        }
    }

    #[test]
    fn minimal_document_defaults() {
        let doc = parse(MINIMAL).unwrap();
        let s = &doc.scenario;
        assert_eq!(s.tx, OpticalTransmitter::reference());
        assert_eq!(s.jitter.sigma_t_rad, 0.5e-6);
        assert_eq!(s.mode, EvaluationMode::MeanAngle);
        assert_eq!(s.mc_samples, 1_000_000);
        assert_eq!(s.p_required_w, 2.0);
        assert_eq!(s.range_floor_m, 10e3);
        assert_eq!(doc.grid, GridSpec::default_for(s));
    }

    #[test]
    fn presets_parse() {
        for name in PRESET_NAMES {
            let doc = parse(bundled_preset(name).unwrap()).unwrap();
            assert_eq!(doc.scenario.name, name);
            assert!(doc.jitter_provenance.is_some());
            assert_eq!(doc.scenario.jitter.atp_enabled, name.ends_with("-atp") && !name.ends_with("noatp"));
            assert!((doc.scenario.rx.ehce - 0.264).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("[receiver]", "colour = \"red\"\n[receiver]");
        assert!(matches!(parse(&text), Err(IoError::Syntax(m)) if m.contains("colour")));
        let text = MINIMAL.replace("ehce = 0.264", "ehce = 0.264\ngain = 3");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn units_required() {
        let text = MINIMAL.replace("\"0.1 m\"\n[transmitter]", "0.1\n[transmitter]");
        assert_eq!(field_of(parse(&text).unwrap_err()), "spot_diameter");
        let text = MINIMAL.replace("\"0.5 urad\"", "\"0.5\"");
        assert_eq!(field_of(parse(&text).unwrap_err()), "jitter.sigma_t");
    }

    #[test]
    fn receiver_efficiency_sources() {
        let text = MINIMAL.replace("ehce = 0.264", "material = \"InGaAsP\"");
        assert!((parse(&text).unwrap().scenario.rx.ehce - 0.264).abs() < 1e-12);
        let text = MINIMAL.replace("ehce = 0.264", "material = \"Unobtainium\"");
        assert_eq!(field_of(parse(&text).unwrap_err()), "receiver.material");
        let text = MINIMAL.replace("ehce = 0.264", "ehce = 0.2\nmaterial = \"InGaAsP\"");
        assert_eq!(field_of(parse(&text).unwrap_err()), "receiver");
    }

    #[test]
    fn jitter_forms() {
        let res = MINIMAL.replace(
            "sigma_t = \"0.5 urad\"\nsigma_r = \"0 urad\"",
            "resolution_t = \"5 urad\"\nresolution_r = \"5 urad\"\nresolution_to_sigma_factor = 0.5",
        );
        assert!((parse(&res).unwrap().scenario.jitter.sigma_t_rad - 2.5e-6).abs() < 1e-20);
        let both = MINIMAL.replace("sigma_r = \"0 urad\"", "sigma_r = \"0 urad\"\nmean_radial_t = \"1 urad\"\nmean_radial_r = \"1 urad\"");
        assert_eq!(field_of(parse(&both).unwrap_err()), "jitter");
        let half = MINIMAL.replace("sigma_r = \"0 urad\"\n", "");
        assert_eq!(field_of(parse(&half).unwrap_err()), "jitter.sigma_t/jitter.sigma_r");
    }

    #[test]
    fn grids() {
        let text = format!("{MINIMAL}\n[grid]\nranges = [\"100 km\", \"200 km\"]\npowers = [\"1 kW\"]\n");
        let doc = parse(&text).unwrap();
        assert_eq!(doc.grid.ranges_m(&doc.scenario).unwrap(), vec![100e3, 200e3]);
        assert_eq!(doc.grid.powers_w, vec![1000.0]);

        let text = format!("{MINIMAL}\n[grid]\nrange_start = \"100 km\"\nrange_stop = \"max\"\nrange_step = \"100 km\"\n");
        let doc = parse(&text).unwrap();
        let r = doc.grid.ranges_m(&doc.scenario).unwrap();
        assert_eq!(r.len(), 8);
        assert_eq!(r[6], 700e3);

        for bad in ["ranges = []", "powers = []"] {
            let text = format!("{MINIMAL}\n[grid]\n{bad}\n");
            assert!(field_of(parse(&text).unwrap_err()).starts_with("grid."));
        }
    }

    #[test]
    fn digest_ignores_comments_and_key_order() {
        let a = parse(MINIMAL).unwrap().digest;
        let reordered = r#"
# same content, different layout
[jitter]
sigma_r = "0 urad"   # receiver
sigma_t = "0.5 urad"
atp = true

[receiver]
ehce = 0.264
aperture = "0.1 m"

[transmitter]
aperture_cap = "8 m"
pce = "51 %"
wavelength = "1064 nm"
"#;
        let reordered = format!("spot_diameter = \"0.1 m\"\nname = \"t\"\n{reordered}");
        assert_eq!(parse(&reordered).unwrap().digest, a);
        let changed = MINIMAL.replace("51 %", "50 %");
        assert_ne!(parse(&changed).unwrap().digest, a);
    }

    #[test]
    fn scenario_sources() {
        let cat = CellCatalog::bundled();
        assert_eq!(load_scenario("1u-atp", &cat).unwrap().scenario.name, "1u-atp");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("custom.toml");
        std::fs::write(&path, MINIMAL).unwrap();
        assert_eq!(load_scenario(path.to_str().unwrap(), &cat).unwrap().scenario.name, "t");
        assert_eq!(field_of(load_scenario("nope", &cat).unwrap_err()), "scenario");
    }
}
