use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Information available to a user when choosing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Users rely on their own prior and consumption history.
    NoRecommendation,
    /// The common-value vector is revealed and folded into the prior.
    Recommendation,
    /// Realized values are known exactly.
    Oracle,
}

impl Regime {
    pub const ALL: [Regime; 3] = [
        Regime::NoRecommendation,
        Regime::Recommendation,
        Regime::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::NoRecommendation => "no_recommendation",
            Regime::Recommendation => "recommendation",
            Regime::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "no_recommendation" => Ok(Regime::NoRecommendation),
            "recommendation" => Ok(Regime::Recommendation),
            "oracle" => Ok(Regime::Oracle),
            other => Err(SimError::Input(format!("unknown regime tag `{other}`"))),
        }
    }
}
