//! Run manifests.  A manifest with every field present is written before
//! the first CSV row of its run, then rewritten with final progress and
//! result numbers once the run completes; the CSV stays the byte-stable
//! artifact, the manifest carries wall-clock timing.

use serde::Serialize;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct SoftwareInfo {
    pub name: String,
    pub version: String,
    /// FNV-1a hash of the resolved configuration echo, so runs can be
    /// matched to the exact settings that produced them.
    pub config_digest: String,
}

impl SoftwareInfo {
    pub fn current(config_echo: &str) -> Self {
        SoftwareInfo {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: format!("{:016x}", fnv1a(config_echo.as_bytes())),
        }
    }
}

/// Norms of the vertically averaged initial data.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DataNorms {
    pub avg_density_l1: f64,
    pub avg_density_l2: f64,
    pub avg_density_sup: f64,
    pub avg_velocity_l1: f64,
    pub avg_velocity_l2: f64,
    pub avg_velocity_sup: f64,
}

impl From<slabflow::cns3d::DataReport> for DataNorms {
    fn from(r: slabflow::cns3d::DataReport) -> Self {
        DataNorms {
            avg_density_l1: r.avg_density_l1,
            avg_density_l2: r.avg_density_l2,
            avg_density_sup: r.avg_density_sup,
            avg_velocity_l1: r.avg_velocity_l1,
            avg_velocity_l2: r.avg_velocity_l2,
            avg_velocity_sup: r.avg_velocity_sup,
        }
    }
}

/// File names relative to the run directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunFiles {
    pub manifest: String,
    pub series: String,
    pub initial_state: String,
    pub final_state: String,
}

impl Default for RunFiles {
    fn default() -> Self {
        RunFiles {
            manifest: "manifest.toml".into(),
            series: "series.csv".into(),
            initial_state: "initial_state.bin".into(),
            final_state: "final_state.bin".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Progress {
    pub completed: bool,
    pub steps: u64,
    pub wall_seconds: f64,
}

/// Aggregated diagnostics of a completed run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResultSummary {
    pub sup_rel_energy: f64,
    pub sol_metric: f64,
    pub sqrho_metric: f64,
    pub density_sup: f64,
    pub grad_metric: f64,
    pub rho_res_mass_sup: f64,
    pub res_measure_sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub eps: f64,
    pub delta: f64,
    pub mu: f64,
    pub software: SoftwareInfo,
    pub progress: Progress,
    pub data_norms: DataNorms,
    pub files: RunFiles,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub results: Option<ResultSummary>,
    pub config: toml::Table,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = toml::to_string_pretty(self)?;
        fs::write(path, text)?;
        Ok(())
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
