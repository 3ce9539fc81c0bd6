//! Experiment configuration, read from TOML and overridden by CLI flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LayoutKind;
use crate::rate_sim::DrawCounts;

pub const DEFAULT_SEED: u64 = 1;

/// Figures the harness can regenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5a,
    Fig5b,
    Fig6,
    Fig8,
    Fig9,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5a,
        FigureId::Fig5b,
        FigureId::Fig6,
        FigureId::Fig8,
        FigureId::Fig9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
            FigureId::Fig6 => "fig6",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        FigureId::ALL.into_iter().find(|f| f.name() == key).ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

/// Quantities a free-form sweep can evaluate at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Monte Carlo average per-antenna rate for the point's layout.
    #[default]
    AverageRate,
    CaSuAvg,
    CaSuAvgApprox,
    DaSuAvgLb,
    CaMuAvg,
    CaMuAvgExact,
    DaMuAvgLb,
    ScAvgLb,
    ScAvgLbExact,
    PsiC,
    PsiD,
    Upsilon,
}

impl Quantity {
    pub const ALL: [Quantity; 12] = [
        Quantity::AverageRate,
        Quantity::CaSuAvg,
        Quantity::CaSuAvgApprox,
        Quantity::DaSuAvgLb,
        Quantity::CaMuAvg,
        Quantity::CaMuAvgExact,
        Quantity::DaMuAvgLb,
        Quantity::ScAvgLb,
        Quantity::ScAvgLbExact,
        Quantity::PsiC,
        Quantity::PsiD,
        Quantity::Upsilon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::AverageRate => "average_rate",
            Quantity::CaSuAvg => "ca_su_avg",
            Quantity::CaSuAvgApprox => "ca_su_avg_approx",
            Quantity::DaSuAvgLb => "da_su_avg_lb",
            Quantity::CaMuAvg => "ca_mu_avg",
            Quantity::CaMuAvgExact => "ca_mu_avg_exact",
            Quantity::DaMuAvgLb => "da_mu_avg_lb",
            Quantity::ScAvgLb => "sc_avg_lb",
            Quantity::ScAvgLbExact => "sc_avg_lb_exact",
            Quantity::PsiC => "psi_c",
            Quantity::PsiD => "psi_d",
            Quantity::Upsilon => "upsilon",
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown sweep quantity `{s}`")))
    }
}

/// Shard `index` of `count`: grid point `i` belongs to it when
/// `i % count == index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shard {
    pub index: usize,
    pub count: usize,
}

impl Shard {
    pub fn new(index: usize, count: usize) -> Result<Self> {
        if count == 0 || index >= count {
            return Err(Error::Config(format!("shard {index}/{count} is out of range")));
        }
        Ok(Self { index, count })
    }

    pub fn contains(&self, point: usize) -> bool {
        point % self.count == self.index
    }
}

impl FromStr for Shard {
    type Err = Error;

    /// Parses `index/count`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("shard must look like `index/count`, got `{s}`"));
        let (i, n) = s.split_once('/').ok_or_else(bad)?;
        Shard::new(i.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?)
    }
}

/// Parameter axes. `None` means "use the figure's default" (or a single
/// default value in a sweep); an empty list is an empty sweep.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub alpha: Option<Vec<f64>>,
    pub snr_db: Option<Vec<f64>>,
    pub users: Option<Vec<usize>>,
    pub clusters: Option<Vec<usize>>,
    pub user_antennas: Option<Vec<usize>>,
    pub layout: Option<Vec<LayoutKind>>,
}

/// Draw-count overrides; unset counts fall back to per-figure defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrawOverrides {
    pub positions: Option<usize>,
    pub layouts: Option<usize>,
    pub channels: Option<usize>,
}

impl DrawOverrides {
    pub fn resolve(&self, defaults: DrawCounts) -> Result<DrawCounts> {
        DrawCounts::new(
            self.positions.unwrap_or(defaults.positions),
            self.layouts.unwrap_or(defaults.layouts),
            self.channels.unwrap_or(defaults.channels),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub shard: Option<Shard>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Full-scale instead of desk-scale figure parameters.
    pub full: bool,
    pub out: Option<PathBuf>,
    pub figure: Option<FigureId>,
    pub grid: Grid,
    pub draws: DrawOverrides,
    pub sweep: SweepSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            full: false,
            out: None,
            figure: None,
            grid: Grid::default(),
            draws: DrawOverrides::default(),
            sweep: SweepSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks values that are invalid regardless of the run: shard range
    /// and nonpositive draw counts.
    pub fn check(&self) -> Result<()> {
        if let Some(s) = self.sweep.shard {
            Shard::new(s.index, s.count)?;
        }
        for (name, v) in [
            ("positions", self.draws.positions),
            ("layouts", self.draws.layouts),
            ("channels", self.draws.channels),
        ] {
            if v == Some(0) {
                return Err(Error::Config(format!("draw count `{name}` must be at least 1")));
            }
        }
        Ok(())
    }

    /// First value of an axis, or `default` when the axis is unset or empty.
    pub(crate) fn scalar<T: Copy>(axis: &Option<Vec<T>>, default: T) -> T {
        axis.as_ref().and_then(|v| v.first().copied()).unwrap_or(default)
    }
}
