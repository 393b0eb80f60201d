//! Named initial data on (-1, 1).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{Grid1D, GridFunction};
use crate::error::HjError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialDatum {
    /// `cos(pi x / 2)`, the first Dirichlet eigenfunction.
    E1,
    /// Smooth bump supported in `|x| < 0.8`, peak 1/2.
    Bump,
    /// Profiled, flat top on `|x| <= 0.3`, smoothstep down to 0 at `|x| = 1`.
    Plateau,
    /// Non-profiled: two humps of different height.
    Asym,
}

impl InitialDatum {
    pub const ALL: [InitialDatum; 4] = [Self::E1, Self::Bump, Self::Plateau, Self::Asym];

    pub fn name(self) -> &'static str {
        match self {
            Self::E1 => "e1",
            Self::Bump => "bump",
            Self::Plateau => "plateau",
            Self::Asym => "asym",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::E1 => (PI * x / 2.0).cos(),
            Self::Bump => {
                let r = x / 0.8;
                if r.abs() < 1.0 {
                    0.5 * (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            Self::Plateau => {
                let s = ((x.abs() - 0.3) / 0.7).clamp(0.0, 1.0);
                1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
            }
            Self::Asym => (1.0 - x * x) * (0.6 + 0.4 * (1.5 * PI * (x + 1.0)).sin()),
        }
    }

    /// Samples on `grid` with exact Dirichlet zeros at the ends.
    pub fn sample(self, grid: Grid1D) -> GridFunction {
        GridFunction::dirichlet_from_fn(grid, |x| self.eval(x))
    }

    pub fn is_profiled(self) -> bool {
        !matches!(self, Self::Asym)
    }
}

impl fmt::Display for InitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialDatum {
    type Err = HjError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| HjError::InvalidParameter(format!("unknown initial datum {s:?} (e1, bump, plateau, asym)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Interval;

    #[test]
    fn data_are_nonnegative_dirichlet() {
        let g = Grid1D::new(Interval::symmetric(), 200).unwrap();
        for d in InitialDatum::ALL {
            let f = d.sample(g);
            assert!(f.is_dirichlet(), "{d}");
            assert!(f.min_value() >= 0.0, "{d}");
            assert!(f.max_value() > 0.0, "{d}");
            assert_eq!(d.name().parse::<InitialDatum>().unwrap(), d);
        }
        assert!("nope".parse::<InitialDatum>().is_err());
    }

    #[test]
    fn profiled_flags_match_shape() {
        let g = Grid1D::new(Interval::symmetric(), 200).unwrap();
        for d in InitialDatum::ALL {
            let v = d.sample(g).into_values();
            let mono = (100..200).all(|i| v[i + 1] <= v[i]) && (0..100).all(|i| v[i + 1] >= v[i]);
            assert_eq!(mono, d.is_profiled(), "{d}");
        }
    }
}
