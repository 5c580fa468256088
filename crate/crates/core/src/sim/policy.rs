use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::config::Config;
use crate::matching::CsChoice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GuidanceMode {
    None,
    /// Single scenario at the rounded forecast mean.
    Deterministic,
    /// Sample-average over sampled demand scenarios.
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatchObjective {
    RiderWaitOnly,
    ChargeWaitOnly,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Policy {
    pub guidance: GuidanceMode,
    pub matching: MatchObjective,
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown policy `{0}`; valid names: BMCSS-NG, BMCSS-DG, BMRWT-SG, BMCWT-SG, BMCSS-SG, all")]
pub struct UnknownPolicy(pub String);

impl Policy {
    pub const BMCSS_NG: Policy = Policy { guidance: GuidanceMode::None, matching: MatchObjective::Combined };
    pub const BMCSS_DG: Policy = Policy { guidance: GuidanceMode::Deterministic, matching: MatchObjective::Combined };
    pub const BMRWT_SG: Policy = Policy { guidance: GuidanceMode::Stochastic, matching: MatchObjective::RiderWaitOnly };
    pub const BMCWT_SG: Policy = Policy { guidance: GuidanceMode::Stochastic, matching: MatchObjective::ChargeWaitOnly };
    pub const BMCSS_SG: Policy = Policy { guidance: GuidanceMode::Stochastic, matching: MatchObjective::Combined };

    pub const ALL: [Policy; 5] = [Self::BMCSS_NG, Self::BMCSS_DG, Self::BMRWT_SG, Self::BMCWT_SG, Self::BMCSS_SG];

    pub fn name(&self) -> &'static str {
        use GuidanceMode as G;
        use MatchObjective as M;
        match (self.guidance, self.matching) {
            (G::None, M::Combined) => "BMCSS-NG",
            (G::Deterministic, M::Combined) => "BMCSS-DG",
            (G::Stochastic, M::RiderWaitOnly) => "BMRWT-SG",
            (G::Stochastic, M::ChargeWaitOnly) => "BMCWT-SG",
            (G::Stochastic, M::Combined) => "BMCSS-SG",
            (G::None, M::RiderWaitOnly) => "BMRWT-NG",
            (G::None, M::ChargeWaitOnly) => "BMCWT-NG",
            (G::Deterministic, M::RiderWaitOnly) => "BMRWT-DG",
            (G::Deterministic, M::ChargeWaitOnly) => "BMCWT-DG",
        }
    }

    /// `(theta1, theta2, station choice)` used by the matching model.
    pub fn match_weights(&self, cfg: &Config) -> (f64, f64, CsChoice) {
        match self.matching {
            MatchObjective::RiderWaitOnly => (0.0, cfg.theta2, CsChoice::Nearest),
            MatchObjective::ChargeWaitOnly => (cfg.theta1, 0.0, CsChoice::MinCost),
            MatchObjective::Combined => (cfg.theta1, cfg.theta2, CsChoice::MinCost),
        }
    }

    /// Parses a comma separated list of names, or `all`.
    pub fn parse_list(s: &str) -> Result<Vec<Policy>, UnknownPolicy> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::ALL.to_vec());
        }
        let mut out: Vec<Policy> = Vec::new();
        for name in s.split(',') {
            let p: Policy = name.parse()?;
            if !out.contains(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }
}

impl FromStr for Policy {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownPolicy(s.trim().to_string()))
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
