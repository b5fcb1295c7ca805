use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scalar::Real;

/// Per-particle combustion lifecycle. Ordered: `O < TB < B < D`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum BurnState {
    /// Original, unburnt material.
    #[default]
    Original = 0,
    /// Scheduled to ignite at its time to burn.
    AboutToBurn = 1,
    Burning = 2,
    Burnt = 3,
}

impl BurnState {
    /// Byte code used in frame files.
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Original),
            1 => Some(Self::AboutToBurn),
            2 => Some(Self::Burning),
            3 => Some(Self::Burnt),
            _ => None,
        }
    }
}

/// Combustion constants of one material.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IgnitionParams<T: Real> {
    pub f0: T,
    pub f_min: T,
    /// Fuel decay rate (1/s).
    pub gamma: T,
    /// Heating coefficient (K/s per unit fuel).
    pub beta: T,
    pub t_ignition: T,
    pub t_max: T,
    /// Flame-front propagation speed (length/s).
    pub c_flame: T,
}

impl<T: Real> IgnitionParams<T> {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(SimError::config(format!("ignition.{field}"), msg))
            }
        };
        check(self.f_min > T::zero(), "f_min", "must be positive")?;
        check(self.f0 > self.f_min, "f0", "must exceed f_min")?;
        check(self.gamma > T::zero(), "gamma", "must be positive")?;
        check(self.beta > T::zero(), "beta", "must be positive")?;
        check(self.c_flame > T::zero(), "c_flame", "must be positive")?;
        check(self.t_ignition >= T::zero(), "t_ignition", "must be non-negative")?;
        check(
            self.t_max > self.t_ignition,
            "t_max",
            "must exceed t_ignition",
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip_and_order() {
        for s in [
            BurnState::Original,
            BurnState::AboutToBurn,
            BurnState::Burning,
            BurnState::Burnt,
        ] {
            assert_eq!(BurnState::from_code(s.code()), Some(s));
        }
        assert_eq!(BurnState::Burnt.code(), 3);
        assert!(BurnState::Original < BurnState::AboutToBurn);
        assert!(BurnState::Burning < BurnState::Burnt);
        assert_eq!(BurnState::from_code(4), None);
    }
}
