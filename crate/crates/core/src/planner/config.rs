use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmetry::GroupSpec;

/// Which symmetries the planner is built to respect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Dense layers, absolute positions.
    NoSym,
    /// Equivariant layers over `G`, absolute positions (symmetric about the origin only).
    GroupOnly,
    /// Dense layers, relative positions (translation invariant).
    R2,
    /// Equivariant layers over `G` and relative positions.
    R2Group,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::NoSym, Variant::GroupOnly, Variant::R2, Variant::R2Group];

    pub fn uses_group(self) -> bool {
        matches!(self, Variant::GroupOnly | Variant::R2Group)
    }

    pub fn relative(self) -> bool {
        matches!(self, Variant::R2 | Variant::R2Group)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::NoSym => "no_sym",
            Variant::GroupOnly => "group_only",
            Variant::R2 => "r2",
            Variant::R2Group => "r2_group",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| Error::Config(format!("unknown variant '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    /// Value-iteration steps.
    pub iterations: usize,
    /// Reward fields.
    pub r_dim: usize,
    /// Q fields pooled by the Bellman max.
    pub q_size: usize,
    /// Total hidden width; split into `hidden_dim / |G|` regular copies.
    pub hidden_dim: usize,
}

impl PlannerConfig {
    pub fn grid(variant: Variant, group: Option<GroupSpec>) -> Self {
        Self { variant, group, iterations: 20, r_dim: 1, q_size: 4, hidden_dim: 64 }
    }

    pub fn graph(variant: Variant, group: Option<GroupSpec>) -> Self {
        Self { variant, group, iterations: 20, r_dim: 1, q_size: 8, hidden_dim: 64 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.r_dim == 0 || self.q_size == 0 || self.hidden_dim == 0 {
            return Err(Error::Config("iterations, r_dim, q_size and hidden_dim must be positive".into()));
        }
        match (self.variant.uses_group(), self.group) {
            (true, None) => return Err(Error::Config(format!("variant {} needs a group", self.variant))),
            (false, Some(g)) => return Err(Error::Config(format!("variant {} takes no group, got {g}", self.variant))),
            _ => {}
        }
        let order = self.symmetry().order();
        if !self.hidden_dim.is_multiple_of(order) {
            return Err(Error::Config(format!(
                "hidden_dim {} is not a multiple of |{}| = {order}",
                self.hidden_dim,
                self.symmetry()
            )));
        }
        Ok(())
    }

    /// The group the layers are built over; trivial for the dense variants.
    pub fn symmetry(&self) -> GroupSpec {
        self.group.unwrap_or_else(GroupSpec::trivial)
    }
}
