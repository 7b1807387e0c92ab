//! Enumeration caps shared by every exact computation.
//!
//! A single knob: the number of work units (vertices, regrowth paths,
//! enumerated snakes, ...) an exact routine may touch. `LSLAB_BUDGET`
//! overrides the default.

use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 22;
pub const DEFAULT_WALK_STEPS: u64 = 1_000_000_000;
pub const BUDGET_ENV: &str = "LSLAB_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub enumeration_cap: u64,
    pub walk_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            walk_steps: DEFAULT_WALK_STEPS,
        }
    }
}

impl Budget {
    /// Default caps, with the enumeration cap replaced by `LSLAB_BUDGET` when set.
    pub fn from_env() -> Result<Self> {
        Self::from_value(std::env::var(BUDGET_ENV).ok().as_deref())
    }

    /// Like [`Budget::from_env`] with the variable's value passed in.
    pub fn from_value(value: Option<&str>) -> Result<Self> {
        let mut b = Self::default();
        if let Some(s) = value {
            b.enumeration_cap = s
                .trim()
                .parse()
                .ok()
                .filter(|&c: &u64| c > 0)
                .ok_or_else(|| Error::Config(format!("{BUDGET_ENV} must be a positive integer, got {s:?}")))?;
        }
        Ok(b)
    }

    pub fn with_cap(cap: u64) -> Self {
        Self {
            enumeration_cap: cap,
            ..Self::default()
        }
    }

    pub fn check(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.enumeration_cap as u128 {
            Err(Error::BudgetExceeded {
                what,
                needed,
                cap: self.enumeration_cap,
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_override() {
        assert_eq!(Budget::from_value(None).unwrap(), Budget::default());
        assert_eq!(Budget::from_value(Some(" 1000 ")).unwrap().enumeration_cap, 1000);
        assert!(matches!(Budget::from_value(Some("lots")), Err(Error::Config(_))));
        assert!(Budget::from_value(Some("0")).is_err());
    }

    #[test]
    fn check_against_cap() {
        let b = Budget::with_cap(10);
        assert!(b.check("x", 10).is_ok());
        assert!(matches!(b.check("x", 11), Err(Error::BudgetExceeded { needed: 11, cap: 10, .. })));
    }
}
