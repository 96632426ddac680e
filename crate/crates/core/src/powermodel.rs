//! Transmitter power consumption.

use crate::{Error, Result};

/// HPA efficiency plus static consumption of the tuning hardware.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsumptionProfile {
    pub hpa_efficiency: f64,
    /// W.
    pub control_board: f64,
    /// W per tunable element.
    pub per_element_drive: f64,
}

impl ConsumptionProfile {
    /// 35% HPA, 1 W control board, 5 mW per RIS element.
    pub const RIS_DEFAULT: ConsumptionProfile = ConsumptionProfile {
        hpa_efficiency: 0.35,
        control_board: 1.0,
        per_element_drive: 5e-3,
    };

    /// Same figures as the RIS profile, applied per metamaterial element.
    pub const DMA_DEFAULT: ConsumptionProfile = Self::RIS_DEFAULT;

    pub fn new(hpa_efficiency: f64, control_board: f64, per_element_drive: f64) -> Result<Self> {
        let p = Self {
            hpa_efficiency,
            control_board,
            per_element_drive,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hpa_efficiency > 0.0 && self.hpa_efficiency <= 1.0) {
            return Err(Error::invalid(
                "hpa_efficiency",
                format!("{} is outside (0, 1]", self.hpa_efficiency),
            ));
        }
        if !(self.control_board >= 0.0) {
            return Err(Error::invalid("control_board", "must be >= 0"));
        }
        if !(self.per_element_drive >= 0.0) {
            return Err(Error::invalid("per_element_drive", "must be >= 0"));
        }
        Ok(())
    }

    /// Fixed consumption for `element_count` elements, W.
    pub fn static_power(&self, element_count: usize) -> f64 {
        self.control_board + self.per_element_drive * element_count as f64
    }
}

/// `P_t/η + P_board + P_drive·N`.
pub fn et_consumed_power(
    transmit_power: f64,
    element_count: usize,
    profile: &ConsumptionProfile,
) -> Result<f64> {
    if !(transmit_power >= 0.0) {
        return Err(Error::invalid("transmit_power", "must be >= 0"));
    }
    profile.validate()?;
    Ok(transmit_power / profile.hpa_efficiency + profile.static_power(element_count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let ris = ConsumptionProfile::RIS_DEFAULT;
        assert_relative_eq!(
            et_consumed_power(1.0, 676, &ris).unwrap(),
            1.0 / 0.35 + 1.0 + 3.38,
            max_relative = 1e-12
        );
        assert_relative_eq!(et_consumed_power(1.0, 676, &ris).unwrap(), 7.237, epsilon = 1e-3);
        let bare = ConsumptionProfile::new(0.35, 0.0, 0.0).unwrap();
        assert_eq!(et_consumed_power(0.0, 0, &bare).unwrap(), 0.0);
        assert_relative_eq!(et_consumed_power(0.35, 0, &bare).unwrap(), 1.0, max_relative = 1e-12);
        assert!(ConsumptionProfile::new(0.0, 1.0, 0.0).is_err());
        assert!(ConsumptionProfile::new(1.2, 1.0, 0.0).is_err());
        assert!(et_consumed_power(-1.0, 0, &ris).is_err());
    }

    proptest! {
        #[test]
        fn linear_and_above_transmit_power(
            p in 0.0f64..1e4,
            c in 0.0f64..10.0,
            n in 0usize..100_000,
            eta in 0.01f64..=1.0,
        ) {
            let prof = ConsumptionProfile::new(eta, 1.0, 5e-3).unwrap();
            let a = et_consumed_power(p, n, &prof).unwrap();
            let b = et_consumed_power(c * p, n, &prof).unwrap();
            let s = prof.static_power(n);
            prop_assert!(((b - s) - c * (a - s)).abs() <= 1e-9 * (1.0 + b.abs()));
            prop_assert!(a >= p);
        }
    }
}
