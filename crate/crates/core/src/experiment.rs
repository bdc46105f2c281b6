//! Range studies: average harvested power under pointing jitter, sweeps over
//! range and transmit power, requirement crossings and jitter calibration.
//!
//! Three evaluation modes are offered because the order of averaging matters
//! for a convex loss:
//!
//! * [`EvaluationMode::MeanAngle`] evaluates the budget once at the mean
//!   radial error `σ√(π/2)` on each side.
//! * [`EvaluationMode::Expectation`] multiplies the aligned power by the
//!   closed-form mean loss `1 / (1 + 2Gσ²)` of each side.
//! * [`EvaluationMode::MonteCarlo`] averages the budget over seeded radial
//!   draws. The draws are shared by every grid point of a run.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::geometry::{self, plan_geometry, LinkGeometry};
use crate::linkbudget::{
    harvested_power, LinkLossOverrides, OpticalReceiver, OpticalTransmitter,
};
use crate::pointing::{
    expected_misalignment_loss, mean_radial_angle, JitterSampleSet, PointingJitter,
};

/// Harvested power a small satellite needs.
pub const DEFAULT_REQUIRED_POWER_W: f64 = 2.0;
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;
pub const DEFAULT_RANGE_STEP_M: f64 = 1_000.0;
pub const DEFAULT_POWER_GRID_W: [f64; 4] = [1.0, 27.0, 100.0, 1000.0];

/// Relative agreement of the crossing power with the requirement.
pub const CROSSING_POWER_TOLERANCE: f64 = 1e-6;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluationMode {
    #[default]
    MeanAngle,
    Expectation,
    MonteCarlo,
}

impl EvaluationMode {
    pub const ALL: [EvaluationMode; 3] = [Self::MeanAngle, Self::Expectation, Self::MonteCarlo];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::MeanAngle => "mean-angle",
            Self::Expectation => "expectation",
            Self::MonteCarlo => "monte-carlo",
        }
    }
}

impl fmt::Display for EvaluationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvaluationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode {s:?}; expected mean-angle, expectation or monte-carlo"))
    }
}

/// Everything needed to evaluate one transmitter/receiver pairing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub tx: OpticalTransmitter,
    pub rx: OpticalReceiver,
    pub jitter: PointingJitter,
    pub spot_diameter_m: f64,
    pub p_required_w: f64,
    pub mode: EvaluationMode,
    pub mc_samples: usize,
    pub seed: u64,
    pub range_floor_m: f64,
    pub overrides: LinkLossOverrides,
}

impl Scenario {
    /// Reference laser and InGaAsP collector, spot equal to the collector.
    pub fn reference(name: impl Into<String>, rx_aperture_m: f64, jitter: PointingJitter) -> Self {
        Self {
            name: name.into(),
            tx: OpticalTransmitter::reference(),
            rx: OpticalReceiver::ingaasp(rx_aperture_m),
            jitter,
            spot_diameter_m: rx_aperture_m,
            p_required_w: DEFAULT_REQUIRED_POWER_W,
            mode: EvaluationMode::MeanAngle,
            mc_samples: DEFAULT_MC_SAMPLES,
            seed: 0,
            range_floor_m: geometry::DEFAULT_RANGE_FLOOR_M,
            overrides: LinkLossOverrides::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("spot_diameter_m", self.spot_diameter_m)?;
        positive("p_required_w", self.p_required_w)?;
        positive("range_floor_m", self.range_floor_m)?;
        if self.mc_samples == 0 {
            return Err(Error::Domain {
                name: "mc_samples",
                reason: "at least one sample is required",
                value: 0.0,
            });
        }
        OpticalTransmitter::new(self.tx.wavelength_m, self.tx.pce, self.tx.aperture_cap_m)?;
        OpticalReceiver::new(self.rx.aperture_m, self.rx.ehce)?;
        PointingJitter::new(self.jitter.sigma_t_rad, self.jitter.sigma_r_rad, self.jitter.atp_enabled)?;
        self.overrides.validate()
    }

    pub fn max_range_m(&self) -> Result<f64> {
        geometry::max_range(self.tx.wavelength_m, self.spot_diameter_m, self.tx.aperture_cap_m)
    }

    pub fn geometry(&self, range_m: f64) -> Result<LinkGeometry> {
        plan_geometry(
            self.tx.wavelength_m,
            self.spot_diameter_m,
            range_m,
            self.tx.aperture_cap_m,
        )
    }
}

/// Mode-dependent link behaviour at one range, per transmitted watt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeEvaluation {
    pub geometry: LinkGeometry,
    pub g_t: f64,
    pub g_r: f64,
    /// Harvested watts per transmitted watt at perfect alignment.
    pub aligned_fraction: f64,
    /// Effective transmitter and receiver loss factors for the mode.
    pub l_t: f64,
    pub l_r: f64,
    /// Average harvested watts per transmitted watt.
    pub fraction: f64,
}

impl RangeEvaluation {
    pub fn harvested_w(&self, p_t_w: f64) -> Result<f64> {
        Ok(positive("p_t_w", p_t_w)? * self.fraction)
    }
}

/// A scenario ready for repeated evaluation; Monte Carlo draws are taken once.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    scenario: &'a Scenario,
    samples: Option<JitterSampleSet>,
}

impl<'a> Evaluator<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        scenario.validate()?;
        let samples = match scenario.mode {
            EvaluationMode::MonteCarlo => Some(JitterSampleSet::draw(
                &scenario.jitter,
                scenario.mc_samples,
                scenario.seed,
            )?),
            _ => None,
        };
        Ok(Self { scenario, samples })
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn samples(&self) -> Option<&JitterSampleSet> {
        self.samples.as_ref()
    }

    pub fn at_range(&self, range_m: f64) -> Result<RangeEvaluation> {
        let s = self.scenario;
        let geometry = s.geometry(range_m)?;
        if geometry.is_below_floor(s.range_floor_m) {
            log::warn!(
                "range {} m is below the {} m floor; near-field effects are not modelled",
                range_m,
                s.range_floor_m
            );
        }
        let aligned = harvested_power(&s.tx, &s.rx, &geometry, 1.0, 0.0, 0.0, &s.overrides)?;
        let (g_t, g_r) = (aligned.g_t, aligned.g_r);
        let aligned_fraction = aligned.harvested_w;
        let (sigma_t, sigma_r) = (s.jitter.sigma_t_rad, s.jitter.sigma_r_rad);

        let (l_t, l_r, fraction) = match s.mode {
            EvaluationMode::MeanAngle => {
                let b = harvested_power(
                    &s.tx,
                    &s.rx,
                    &geometry,
                    1.0,
                    mean_radial_angle(sigma_t),
                    mean_radial_angle(sigma_r),
                    &s.overrides,
                )?;
                (b.l_t, b.l_r, b.harvested_w)
            }
            EvaluationMode::Expectation => {
                let l_t = expected_misalignment_loss(g_t, sigma_t);
                let l_r = expected_misalignment_loss(g_r, sigma_r);
                (l_t, l_r, aligned_fraction * l_t * l_r)
            }
            EvaluationMode::MonteCarlo => {
                let samples = self.samples.as_ref().expect("drawn for monte-carlo mode");
                let (joint, l_t, l_r) = samples.mean_losses_split(g_t, g_r);
                (l_t, l_r, aligned_fraction * joint)
            }
        };
        Ok(RangeEvaluation {
            geometry,
            g_t,
            g_r,
            aligned_fraction,
            l_t,
            l_r,
            fraction,
        })
    }

    pub fn average_harvested_power(&self, range_m: f64, p_t_w: f64) -> Result<f64> {
        self.at_range(range_m)?.harvested_w(p_t_w)
    }
}

/// Average harvested power at one range and transmit power.
pub fn average_harvested_power(scenario: &Scenario, range_m: f64, p_t_w: f64) -> Result<f64> {
    Evaluator::new(scenario)?.average_harvested_power(range_m, p_t_w)
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub range_m: f64,
    /// `None` only when the range itself is invalid.
    pub divergence_rad: Option<f64>,
    pub tx_aperture_m: Option<f64>,
    pub p_t_w: f64,
    pub outcome: Result<SweepPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub p_h_w: f64,
    pub l_t: f64,
    pub l_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub mode: EvaluationMode,
    pub ranges_m: Vec<f64>,
    pub powers_w: Vec<f64>,
    /// Range-major: all powers of the first range, then the next range.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// `harvested[i][j]` for range `i` and power `j`; `None` where the point failed.
    pub fn harvested_matrix(&self) -> Vec<Vec<Option<f64>>> {
        self.rows
            .chunks(self.powers_w.len())
            .map(|row| row.iter().map(|r| r.outcome.as_ref().ok().map(|p| p.p_h_w)).collect())
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }
}

/// Evaluates every `(range, power)` pair. Point failures are kept in their
/// rows; only invalid scenarios and empty grids fail the sweep.
pub fn sweep(scenario: &Scenario, range_grid: &[f64], power_grid: &[f64]) -> Result<SweepResult> {
    if range_grid.is_empty() || power_grid.is_empty() {
        return Err(Error::Domain {
            name: if range_grid.is_empty() { "range_grid" } else { "power_grid" },
            reason: "grid must not be empty",
            value: 0.0,
        });
    }
    let evaluator = Evaluator::new(scenario)?;
    let per_range: Vec<Vec<SweepRow>> = range_grid
        .par_iter()
        .map(|&range_m| {
            let divergence_rad = geometry::divergence_for(scenario.spot_diameter_m, range_m).ok();
            let tx_aperture_m =
                divergence_rad.and_then(|d| geometry::tx_aperture_for(scenario.tx.wavelength_m, d).ok());
            let eval = evaluator.at_range(range_m);
            power_grid
                .iter()
                .map(|&p_t_w| SweepRow {
                    range_m,
                    divergence_rad,
                    tx_aperture_m,
                    p_t_w,
                    outcome: eval.as_ref().map_err(Clone::clone).and_then(|e| {
                        Ok(SweepPoint {
                            p_h_w: e.harvested_w(p_t_w)?,
                            l_t: e.l_t,
                            l_r: e.l_r,
                        })
                    }),
                })
                .collect()
        })
        .collect();
    Ok(SweepResult {
        mode: scenario.mode,
        ranges_m: range_grid.to_vec(),
        powers_w: power_grid.to_vec(),
        rows: per_range.into_iter().flatten().collect(),
    })
}

/// `floor, floor + step, ...` up to and including `max_range_m`.
pub fn range_grid(floor_m: f64, max_range_m: f64, step_m: f64) -> Result<Vec<f64>> {
    let floor = positive("range_floor_m", floor_m)?;
    let max = positive("max_range_m", max_range_m)?;
    let step = positive("range_step_m", step_m)?;
    let mut grid = Vec::new();
    let mut k = 0u64;
    loop {
        let r = floor + k as f64 * step;
        if r >= max * (1.0 - 1e-12) {
            break;
        }
        grid.push(r);
        k += 1;
    }
    grid.push(max);
    Ok(grid)
}

/// Ranges from the scenario floor to its maximum range in 1 km steps.
pub fn default_range_grid(scenario: &Scenario) -> Result<Vec<f64>> {
    range_grid(scenario.range_floor_m, scenario.max_range_m()?, DEFAULT_RANGE_STEP_M)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Crossing {
    /// Average harvested power meets the requirement at `range_m`.
    At {
        range_m: f64,
        power_w: f64,
        iterations: usize,
    },
    /// The requirement is still met at the maximum range.
    NoCrossing { max_range_m: f64, power_w: f64 },
}

/// Range at which average harvested power falls to the scenario requirement.
pub fn crossing_range(scenario: &Scenario, p_t_w: f64) -> Result<Crossing> {
    let p_t_w = positive("p_t_w", p_t_w)?;
    let evaluator = Evaluator::new(scenario)?;
    let required = scenario.p_required_w;
    let power = |r: f64| evaluator.average_harvested_power(r, p_t_w);

    let floor_m = scenario.range_floor_m;
    let max_range_m = scenario.max_range_m()?;
    let at_floor = power(floor_m)?;
    if at_floor < required {
        return Err(Error::BelowRequirementEverywhere {
            floor_m,
            power_w: at_floor,
            required_w: required,
        });
    }
    let at_max = power(max_range_m)?;
    if at_max >= required {
        return Ok(Crossing::NoCrossing {
            max_range_m,
            power_w: at_max,
        });
    }

    // Power decays over many decades, so bracket on the sign of ln(P / P_req).
    let excess = |p: f64| p.ln() - required.ln();
    let log_tol = CROSSING_POWER_TOLERANCE.ln_1p() * 1e-3;
    let (mut lo, mut hi) = (floor_m, max_range_m);
    let mut mid = 0.5 * (lo + hi);
    let mut p_mid = power(mid)?;
    let mut iterations = 1;
    while iterations < MAX_BISECTIONS {
        let f = excess(p_mid);
        if f.abs() <= log_tol || hi - lo <= 1e-13 * hi {
            break;
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        p_mid = power(mid)?;
        iterations += 1;
    }
    Ok(Crossing::At {
        range_m: mid,
        power_w: p_mid,
        iterations,
    })
}

/// Radial error that, applied to both ends, brings the aligned harvested
/// power at `r_cross` down to `p_required_w`. The scenario's own jitter and
/// mode are ignored.
pub fn calibrate_effective_jitter(
    scenario: &Scenario,
    r_cross: f64,
    p_t_w: f64,
    p_required_w: f64,
) -> Result<f64> {
    let required = positive("p_required_w", p_required_w)?;
    let geometry = scenario.geometry(r_cross)?;
    let aligned = harvested_power(
        &scenario.tx,
        &scenario.rx,
        &geometry,
        p_t_w,
        0.0,
        0.0,
        &scenario.overrides,
    )?;
    if aligned.harvested_w < required {
        return Err(Error::InfeasibleCalibration {
            available_w: aligned.harvested_w,
            required_w: required,
        });
    }
    Ok(((aligned.harvested_w / required).ln() / (aligned.g_t + aligned.g_r)).sqrt())
}
