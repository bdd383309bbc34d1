//! JSON configuration schemas for the experiment runner. Unknown fields are
//! rejected so a typo fails fast instead of silently running defaults.

use cwl_core::geometry::{Domain, Polygon};
use cwl_core::scatter::{DtnRing, IncidentWave};
use cwl_core::teig::{ConductiveMedium, EtaSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub type ConfigError = String;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "snake_case")]
pub enum DomainCfg {
    Polygon { vertices: Vec<[f64; 2]> },
    Disk { center: [f64; 2], radius: f64 },
    Square { center: [f64; 2], side: f64 },
    ChamferedSquare { center: [f64; 2], side: f64, chamfer: f64 },
}

impl DomainCfg {
    pub fn build(&self) -> Result<Domain<f64>, ConfigError> {
        Ok(match self {
            DomainCfg::Polygon { vertices } => {
                Domain::Polygon(Polygon::new(vertices.clone()).map_err(|e| e.to_string())?)
            }
            DomainCfg::Disk { center, radius } => Domain::Disk {
                center: *center,
                radius: *radius,
            },
            DomainCfg::Square { center, side } => {
                Domain::Polygon(Polygon::centered_square(*center, *side))
            }
            DomainCfg::ChamferedSquare {
                center,
                side,
                chamfer,
            } => Domain::Polygon(Polygon::chamfered_square(*center, *side, *chamfer)),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum EtaCfg {
    Uniform([f64; 2]),
    /// `[[tag, re, im], ...]`
    Edges(Vec<[f64; 3]>),
}

impl EtaCfg {
    pub fn build(&self) -> EtaSpec<f64> {
        match self {
            EtaCfg::Uniform(c) => EtaSpec::Uniform(Complex64::new(c[0], c[1])),
            EtaCfg::Edges(rows) => {
                let mut map = BTreeMap::new();
                for row in rows {
                    map.insert(row[0] as usize, Complex64::new(row[1], row[2]));
                }
                EtaSpec::PerTag(map)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumCfg {
    pub domain: DomainCfg,
    /// piecewise-constant contrast regions `[[re, im], ...]`; exactly one
    /// region is supported
    pub q: Vec<[f64; 2]>,
    pub eta: EtaCfg,
}

impl MediumCfg {
    pub fn build(&self) -> Result<ConductiveMedium<f64>, ConfigError> {
        if self.q.len() != 1 {
            return Err(format!(
                "q must list exactly one piecewise region, got {}",
                self.q.len()
            ));
        }
        ConductiveMedium::new(
            self.domain.build()?,
            Complex64::new(self.q[0][0], self.q[0][1]),
            self.eta.build(),
        )
        .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentCfg {
    pub k: f64,
    pub angle: f64,
}

impl IncidentCfg {
    pub fn build(&self) -> Result<IncidentWave<f64>, ConfigError> {
        IncidentWave::from_angle(self.k, self.angle).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingCfg {
    pub radius: f64,
    /// Fourier truncation; `None` picks `ceil(kR) + 12`
    #[serde(default)]
    pub order: Option<usize>,
}

impl RingCfg {
    pub fn build(&self, k: f64) -> DtnRing<f64> {
        match self.order {
            Some(order) => DtnRing {
                radius: self.radius,
                order,
            },
            None => DtnRing::new(self.radius, k),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorCfg {
    pub theta_m: f64,
    pub theta_max: f64,
    #[serde(default = "one")]
    pub h: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GeometricGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n)
            .map(|i| {
                self.min * (self.max / self.min).powf(i as f64 / (n - 1) as f64)
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Per-command configs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCgoCfg {
    pub sectors: Vec<SectorCfg>,
    pub s_grid: GeometricGrid,
    pub alphas: Vec<f64>,
    pub zeta: f64,
    pub omega: f64,
    /// s values for the closed-form sector integral comparison
    pub u0w_s: Vec<f64>,
}

impl Default for VerifyCgoCfg {
    fn default() -> Self {
        Self {
            sectors: vec![
                SectorCfg {
                    theta_m: -std::f64::consts::FRAC_PI_3,
                    theta_max: std::f64::consts::FRAC_PI_3,
                    h: 1.0,
                },
                SectorCfg {
                    theta_m: 0.2,
                    theta_max: 1.9,
                    h: 1.0,
                },
            ],
            s_grid: GeometricGrid {
                min: 1e2,
                max: 1e6,
                points: 9,
            },
            alphas: vec![0.25, 0.5, 0.75],
            zeta: 1.0,
            omega: 0.9,
            u0w_s: vec![1.0, 10.0, 100.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "snake_case")]
pub enum FitTargetCfg {
    /// evaluate a planted kernel (consistency run)
    Planted { coeffs: Vec<[f64; 2]> },
    /// singular-free Helmholtz solution J0(k|x - x0|)
    ShiftedBessel { x0: [f64; 2] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitHerglotzCfg {
    pub k: f64,
    pub sector: SectorCfg,
    pub mesh_h: f64,
    pub target: FitTargetCfg,
    pub p_values: Vec<usize>,
    #[serde(default)]
    pub reg_lambda: Option<f64>,
}

impl Default for FitHerglotzCfg {
    fn default() -> Self {
        Self {
            k: 2.0,
            sector: SectorCfg {
                theta_m: -0.9,
                theta_max: 1.0,
                h: 1.0,
            },
            mesh_h: 0.14,
            target: FitTargetCfg::ShiftedBessel { x0: [1.8, 1.2] },
            p_values: vec![2, 4, 8, 12],
            reg_lambda: Some(1e-12),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum EigSolverCfg {
    /// dense full-window solve; `k_max = None` applies the resolution rule
    /// `k · h_mesh < 0.5`
    Dense { k_max: Option<f64>, budget: usize },
    /// banded shift-invert near `sigma` (in the k² plane)
    Banded { sigma: [f64; 2], block: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigCfg {
    pub medium: MediumCfg,
    pub mesh_h: f64,
    pub solver: EigSolverCfg,
    /// keep at most this many pairs (sorted by |k|)
    pub count: usize,
}

impl Default for EigCfg {
    fn default() -> Self {
        Self {
            medium: MediumCfg {
                domain: DomainCfg::Disk {
                    center: [0.0, 0.0],
                    radius: 1.0,
                },
                q: vec![[4.0, 0.0]],
                eta: EtaCfg::Uniform([0.0, 0.0]),
            },
            mesh_h: 0.25,
            solver: EigSolverCfg::Dense {
                k_max: Some(4.0),
                budget: 4000,
            },
            count: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCfg {
    pub vertex: [f64; 2],
    pub rho0: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradingCfg {
    pub h_local: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerProfileCfg {
    pub medium: MediumCfg,
    pub mesh_h: f64,
    #[serde(default)]
    pub grading: Option<GradingCfg>,
    pub probe: ProbeCfg,
    /// control probe on a flat boundary point; `None` auto-selects the
    /// max-|v| boundary node away from all corners
    #[serde(default)]
    pub flat_point: Option<[f64; 2]>,
    /// shift for the banded eigensolve (k² plane); `None` runs a coarse
    /// dense sweep first
    #[serde(default)]
    pub sigma: Option<[f64; 2]>,
    pub coarse_k_max: f64,
    /// also emit the interior-indicator profile (η must vanish)
    #[serde(default)]
    pub interior_indicator: bool,
}

impl Default for CornerProfileCfg {
    fn default() -> Self {
        // The default experiment probes the first (numerically) real
        // eigenvalue of the q=2, η=1 unit square, which sits near k ≈ 13.1;
        // the shift below targets it directly. Clearing `sigma` falls back
        // to a coarse dense sweep up to `coarse_k_max` (which favors the
        // lowest modes, including complex ones).
        Self {
            medium: MediumCfg {
                domain: DomainCfg::Square {
                    center: [0.5, 0.5],
                    side: 1.0,
                },
                q: vec![[2.0, 0.0]],
                eta: EtaCfg::Uniform([1.0, 0.0]),
            },
            mesh_h: 0.04,
            grading: Some(GradingCfg {
                h_local: 0.006,
                radius: 0.5,
            }),
            probe: ProbeCfg {
                vertex: [0.0, 0.0],
                rho0: 0.4,
                count: 5,
            },
            flat_point: None,
            sigma: Some([172.0, 1.0]),
            coarse_k_max: 7.0,
            interior_indicator: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardCfg {
    pub medium: MediumCfg,
    pub inc: IncidentCfg,
    pub ring: RingCfg,
    pub mesh_h: f64,
    pub samples: usize,
}

impl Default for ForwardCfg {
    fn default() -> Self {
        Self {
            medium: MediumCfg {
                domain: DomainCfg::Disk {
                    center: [0.0, 0.0],
                    radius: 1.0,
                },
                q: vec![[2.0, 0.0]],
                eta: EtaCfg::Uniform([0.0, 0.5]),
            },
            inc: IncidentCfg { k: 1.0, angle: 0.0 },
            ring: RingCfg {
                radius: 1.6,
                order: None,
            },
            mesh_h: 0.05,
            samples: 256,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarfieldCfg {
    /// CSV with `theta,re,im` rows of the scattered trace on the ring
    pub trace_file: String,
    pub ring: RingCfg,
    pub k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererCfgJson {
    pub medium: MediumCfg,
    pub inc: IncidentCfg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistinguishCfg {
    pub config1: ScattererCfgJson,
    pub config2: ScattererCfgJson,
    pub ring: RingCfg,
    pub mesh_h: f64,
    pub samples: usize,
}

impl Default for DistinguishCfg {
    fn default() -> Self {
        let inc = IncidentCfg { k: 1.0, angle: 0.4 };
        Self {
            config1: ScattererCfgJson {
                medium: MediumCfg {
                    domain: DomainCfg::Square {
                        center: [0.0, 0.0],
                        side: 1.0,
                    },
                    q: vec![[2.0, 0.0]],
                    eta: EtaCfg::Uniform([0.5, 0.0]),
                },
                inc,
            },
            config2: ScattererCfgJson {
                medium: MediumCfg {
                    domain: DomainCfg::ChamferedSquare {
                        center: [0.0, 0.0],
                        side: 1.0,
                        chamfer: 0.3,
                    },
                    q: vec![[2.0, 0.0]],
                    eta: EtaCfg::Uniform([0.5, 0.0]),
                },
                inc,
            },
            ring: RingCfg {
                radius: 1.3,
                order: None,
            },
            mesh_h: 0.06,
            samples: 256,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum EtaSearchCfg {
    Real([f64; 2]),
    Complex {
        re: [f64; 2],
        im: [f64; 2],
        grid: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverEtaCfg {
    pub domain: DomainCfg,
    pub q: [f64; 2],
    pub inc: IncidentCfg,
    pub ring: RingCfg,
    pub mesh_h: f64,
    pub samples: usize,
    /// synthesize the observation with this η (inverse-crime style)
    pub eta_true: [f64; 2],
    /// relative RMS noise added to the observation
    pub noise_level: f64,
    pub search: EtaSearchCfg,
}

impl Default for RecoverEtaCfg {
    fn default() -> Self {
        Self {
            domain: DomainCfg::Square {
                center: [0.0, 0.0],
                side: 1.0,
            },
            q: [2.0, 0.0],
            inc: IncidentCfg { k: 1.0, angle: 0.0 },
            ring: RingCfg {
                radius: 1.3,
                order: None,
            },
            mesh_h: 0.08,
            samples: 256,
            eta_true: [0.7, 0.0],
            noise_level: 0.0,
            search: EtaSearchCfg::Real([0.05, 1.6]),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimredVerifyCfg {
    pub psi_half_width: f64,
    pub k: f64,
    pub h: f64,
    pub s_grid: Vec<f64>,
    pub x_norms: Vec<f64>,
    pub beta: f64,
    pub trials: usize,
}

impl Default for DimredVerifyCfg {
    fn default() -> Self {
        Self {
            psi_half_width: 0.2,
            k: 1.0,
            h: 0.5,
            s_grid: vec![1e3, 1e4],
            x_norms: vec![0.5, 1.0, 2.0],
            beta: 0.9,
            trials: 10_000,
        }
    }
}

/// Load a config from a path, or the default when absent.
pub fn load_config<C>(path: Option<&str>) -> Result<C, ConfigError>
where
    C: Default + for<'de> Deserialize<'de>,
{
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {p}: {e}"))?;
            serde_json::from_str(&text).map_err(|e| format!("config {p} is invalid: {e}"))
        }
    }
}
