//! Validated run configuration shared by all subcommands.

use std::path::PathBuf;

use anyhow::{bail, ensure, Result};
use tesslab_core::{DirectionLaw, Model, RectWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Plt,
    Stit,
    Both,
}

impl ModelChoice {
    pub fn models(self) -> Vec<Model> {
        match self {
            ModelChoice::Plt => vec![Model::Plt],
            ModelChoice::Stit => vec![Model::Stit],
            ModelChoice::Both => vec![Model::Plt, Model::Stit],
        }
    }
}

impl std::str::FromStr for ModelChoice {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "plt" => ModelChoice::Plt,
            "stit" => ModelChoice::Stit,
            "both" => ModelChoice::Both,
            _ => bail!("unknown model {s:?}, expected plt, stit or both"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelChoice,
    /// Edge length density `L_A`, equal to `γ` (PLT) and `t` (STIT).
    pub la: f64,
    pub law: DirectionLaw,
    pub window: RectWindow,
    pub sub_window: Option<RectWindow>,
    pub reps: usize,
    pub seed: u64,
    /// `None` uses every available core.
    pub threads: Option<usize>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.la > 0.0 && self.la.is_finite(),
            "--la must be positive and finite, got {}",
            self.la
        );
        ensure!(self.reps >= 1, "--reps must be at least 1");
        if let Some(t) = self.threads {
            ensure!(t >= 1, "--threads must be at least 1");
        }
        if let Some(sub) = &self.sub_window {
            ensure!(
                self.window.contains_window(sub),
                "sub-window {sub:?} is not inside the window {:?}",
                self.window
            );
        }
        Ok(())
    }

    /// Smallest distance between the sub-window and the window boundary.
    pub fn margin(&self) -> Option<f64> {
        self.sub_window.map(|s| {
            let w = &self.window;
            (s.x0 - w.x0)
                .min(s.y0 - w.y0)
                .min(w.x1 - s.x1)
                .min(w.y1 - s.y1)
        })
    }
}

/// `[lo, hi]²` from two values or `x0 y0 x1 y1` from four.
pub fn parse_window(v: &[f64]) -> Result<RectWindow> {
    let w = match v {
        [lo, hi] => RectWindow::square(*lo, *hi),
        [x0, y0, x1, y1] => RectWindow::new(*x0, *y0, *x1, *y1),
        _ => bail!(
            "a window takes 2 values (lo hi) or 4 (x0 y0 x1 y1), got {}",
            v.len()
        ),
    };
    Ok(w?)
}
