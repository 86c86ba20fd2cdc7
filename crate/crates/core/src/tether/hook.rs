use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TetherError;

pub const BIN_WIDTH_DEG: f64 = 20.0;
pub const BIN_COUNT: usize = 18;

/// Success probability of the trailing hook catching, binned by revolution
/// angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HookModel {
    pub probabilities: Vec<f64>,
    /// Number of trials behind each bin. Informational only.
    pub trials: Vec<u32>,
}

impl Default for HookModel {
    /// Synthetic calibration: `0.1 + 0.8 cos²(bin start)`, which peaks at
    /// the 0° and 180° bins with a floor of 0.1.
    fn default() -> Self {
        let probabilities = (0..BIN_COUNT)
            .map(|i| {
                let a = (i as f64 * BIN_WIDTH_DEG).to_radians();
                0.1 + 0.8 * a.cos().powi(2)
            })
            .collect();
        Self {
            probabilities,
            trials: vec![0; BIN_COUNT],
        }
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    bin_start_deg: f64,
    probability: f64,
    trials: u32,
}

impl HookModel {
    pub fn validate(&self) -> Result<(), TetherError> {
        if self.probabilities.len() != BIN_COUNT || self.trials.len() != BIN_COUNT {
            return Err(TetherError::Hook(format!("expected {BIN_COUNT} bins")));
        }
        if let Some(p) = self.probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(TetherError::Hook(format!("probability {p} outside [0, 1]")));
        }
        Ok(())
    }

    /// Reads `bin_start_deg,probability,trials` rows with a header line.
    /// Every 20° bin must appear exactly once; row order does not matter.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self, TetherError> {
        let mut probabilities = vec![f64::NAN; BIN_COUNT];
        let mut trials = vec![0; BIN_COUNT];
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        for row in rdr.deserialize() {
            let row: CsvRow = row.map_err(|e| TetherError::Hook(e.to_string()))?;
            let k = row.bin_start_deg / BIN_WIDTH_DEG;
            if k.fract() != 0.0 || !(0.0..BIN_COUNT as f64).contains(&k) {
                return Err(TetherError::Hook(format!("bad bin start {}", row.bin_start_deg)));
            }
            let k = k as usize;
            if !probabilities[k].is_nan() {
                return Err(TetherError::Hook(format!("duplicate bin {}", row.bin_start_deg)));
            }
            probabilities[k] = row.probability;
            trials[k] = row.trials;
        }
        if let Some(k) = probabilities.iter().position(|p| p.is_nan()) {
            return Err(TetherError::Hook(format!("missing bin {}", k as f64 * BIN_WIDTH_DEG)));
        }
        let model = Self { probabilities, trials };
        model.validate()?;
        Ok(model)
    }

    pub fn from_csv(path: &Path) -> Result<Self, TetherError> {
        let f = std::fs::File::open(path).map_err(|e| TetherError::Hook(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(f)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["bin_start_deg", "probability", "trials"]).unwrap();
        for (i, (p, t)) in self.probabilities.iter().zip(&self.trials).enumerate() {
            w.write_record([
                format!("{}", i as f64 * BIN_WIDTH_DEG),
                format!("{p}"),
                t.to_string(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn bin(revolution_deg: f64) -> usize {
        ((revolution_deg.rem_euclid(360.0) / BIN_WIDTH_DEG) as usize).min(BIN_COUNT - 1)
    }

    pub fn probability(&self, revolution_deg: f64) -> f64 {
        self.probabilities[Self::bin(revolution_deg)]
    }

    /// Start angle of the most likely bin; ties go to the lower angle.
    pub fn best_bin_deg(&self) -> f64 {
        let mut best = 0;
        for (i, p) in self.probabilities.iter().enumerate() {
            if *p > self.probabilities[best] {
                best = i;
            }
        }
        best as f64 * BIN_WIDTH_DEG
    }
}

/// One Bernoulli draw with the probability of the bin holding `revolution_deg`.
pub fn sample_hook_catch<R: Rng + ?Sized>(model: &HookModel, revolution_deg: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < model.probability(revolution_deg)
}
