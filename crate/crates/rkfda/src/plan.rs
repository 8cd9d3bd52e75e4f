//! Experiment plans read from TOML.
//!
//! ```toml
//! models = ["G2", "G4"]
//! sample_sizes = [50, 100]
//! runs = 50
//! test_size = 1000
//! validation_size = 200
//! grid_count = 100
//! methods = ["RK-C", "RK_B-C", "kNN", "Centroid"]
//! d_max = 10
//! seed = 1
//! histogram_d = 5
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(try_from = "String")]
pub enum Method {
    /// Greedy selection and Fisher rule with the pooled covariance.
    RkC,
    /// Same with the Brownian covariance `min(s, t)` assumed known.
    RkBC,
    Knn,
    Centroid,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::RkC, Method::RkBC, Method::Knn, Method::Centroid];

    pub fn name(self) -> &'static str {
        match self {
            Method::RkC => "RK-C",
            Method::RkBC => "RK_B-C",
            Method::Knn => "kNN",
            Method::Centroid => "Centroid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::parse(None, format!("unknown method {s:?}")))
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn default_runs() -> usize {
    50
}
fn default_test() -> usize {
    1000
}
fn default_validation() -> usize {
    200
}
fn default_grid() -> usize {
    100
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_d_max() -> usize {
    10
}
fn default_r_max() -> usize {
    20
}
fn default_ks() -> Vec<usize> {
    (1..=21).step_by(2).collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub models: Vec<String>,
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_test")]
    pub test_size: usize,
    #[serde(default = "default_validation")]
    pub validation_size: usize,
    #[serde(default = "default_grid")]
    pub grid_count: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Largest number of selected points tried by the RK methods.
    #[serde(default = "default_d_max")]
    pub d_max: usize,
    /// Largest truncation order tried by the centroid rule.
    #[serde(default = "default_r_max")]
    pub r_max: usize,
    /// Neighbourhood sizes tried by kNN.
    #[serde(default = "default_ks")]
    pub knn_ks: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    /// When set, selection histograms of this many points are produced.
    #[serde(default)]
    pub histogram_d: Option<usize>,
}

impl ExperimentPlan {
    pub fn new(models: Vec<String>, sample_sizes: Vec<usize>) -> Self {
        ExperimentPlan {
            models,
            sample_sizes,
            runs: default_runs(),
            test_size: default_test(),
            validation_size: default_validation(),
            grid_count: default_grid(),
            methods: default_methods(),
            d_max: default_d_max(),
            r_max: default_r_max(),
            knn_ks: default_ks(),
            seed: 0,
            histogram_d: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let plan: ExperimentPlan = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1));
            Error::parse(line, e.message().to_string())
        })?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Usage(m.to_string()));
        if self.models.is_empty() || self.sample_sizes.is_empty() || self.methods.is_empty() {
            return bad("plan needs at least one model, sample size and method");
        }
        if self.runs == 0 || self.test_size == 0 || self.validation_size == 0 {
            return bad("runs, test_size and validation_size must be at least 1");
        }
        if self.sample_sizes.iter().any(|&n| n < 4) {
            return bad("sample sizes must be at least 4");
        }
        if self.grid_count < 3 {
            return bad("grid_count must be at least 3");
        }
        if self.d_max == 0 || self.d_max >= self.grid_count || self.r_max == 0 {
            return bad("d_max must lie in 1..grid_count and r_max must be positive");
        }
        if self.knn_ks.is_empty() || self.knn_ks.contains(&0) {
            return bad("knn_ks must be a nonempty list of positive sizes");
        }
        if self.histogram_d.is_some_and(|d| d == 0 || d >= self.grid_count) {
            return bad("histogram_d must lie in 1..grid_count");
        }
        Ok(())
    }
}
