use anyhow::{bail, Context, Result};
use quasiriesz::avdonin::Precision;
use quasiriesz::riesz::Perturbation;
use quasiriesz::schema::SpectrumFile;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Construct,
    Verify,
    Certify,
    Reconstruct,
    Duality,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Construct => "construct",
            Command::Verify => "verify",
            Command::Certify => "certify",
            Command::Reconstruct => "reconstruct",
            Command::Duality => "duality",
        }
    }
}

/// Everything a run depends on. Every field is explicit so that the
/// provenance block alone reproduces the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// The input file as given, before normalisation.
    pub spectrum: SpectrumFile,
    /// Block range for construction and the block identities.
    pub n_range: (i64, i64),
    /// Outer block range of the boundedness witness.
    pub bound_range: (i64, i64),
    pub a_range: (i64, i64),
    pub n_max: usize,
    pub required_margin: f64,
    pub radii: Vec<f64>,
    pub perturb: Perturbation,
    pub seed: u64,
    pub kernels: usize,
    pub signal_radius: f64,
    pub sample_radius: f64,
    pub eval_radius: f64,
    pub grid_step: f64,
    pub tol: f64,
    /// Lower end of the window `I`, a rational.
    pub anchor: String,
    pub precision: Precision,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_range.0 > self.n_range.1 || self.bound_range.0 > self.n_range.0 || self.bound_range.1 < self.n_range.1
        {
            bail!("n-range {:?} must lie inside bound-range {:?}", self.n_range, self.bound_range);
        }
        if self.a_range.0 > self.a_range.1 {
            bail!("empty a-range {:?}", self.a_range);
        }
        if self.n_max == 0 || self.kernels == 0 {
            bail!("n-max and K must be positive");
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            bail!("radii must be positive and finite");
        }
        for (name, v) in [
            ("signal-radius", self.signal_radius),
            ("sample-radius", self.sample_radius),
            ("eval-radius", self.eval_radius),
            ("grid-step", self.grid_step),
            ("tol", self.tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bail!("{name} must be positive and finite, got {v}");
            }
        }
        quasiriesz::parse::rational(&self.anchor).context("anchor")?;
        Ok(())
    }

    /// Compact JSON, the hashed form.
    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn sha256(&self) -> Result<String> {
        Ok(format!("{:x}", Sha256::digest(self.canonical_json()?.as_bytes())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub precision: Precision,
    pub config: RunConfig,
}

impl Provenance {
    pub fn new(config: &RunConfig) -> Result<Provenance> {
        Ok(Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: config.sha256()?,
            precision: config.precision,
            config: config.clone(),
        })
    }

    /// CSV comment lines: a single-line JSON block.
    pub fn csv_header(&self) -> Result<Vec<String>> {
        Ok(vec![format!("provenance: {}", serde_json::to_string(self)?)])
    }

    /// Re-reads a provenance block and checks its hash.
    pub fn verify(&self) -> Result<()> {
        let actual = self.config.sha256()?;
        if actual != self.config_sha256 {
            bail!("provenance hash mismatch: recorded {}, recomputed {actual}", self.config_sha256);
        }
        Ok(())
    }
}

/// Finds the run configuration in a bare config, a JSON artifact or a CSV
/// artifact's provenance comment.
pub fn config_from_text(text: &str) -> Result<RunConfig> {
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix("# provenance: ")) {
        let p: Provenance = serde_json::from_str(line).context("provenance comment")?;
        p.verify()?;
        return Ok(p.config);
    }
    let value: serde_json::Value = serde_json::from_str(text).context("config is neither JSON nor a CSV artifact")?;
    if let Some(p) = value.get("provenance") {
        let p: Provenance = serde_json::from_value(p.clone()).context("provenance block")?;
        p.verify()?;
        return Ok(p.config);
    }
    serde_json::from_value(value).context("run configuration")
}
