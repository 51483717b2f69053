use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::GEOMETRIC_SHEET_INDUCTANCE_PH;

/// Thin superconducting wire: sheet inductances in pH per square, sizes in µm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireGeometry {
    pub sheet_inductance: f64,
    pub length: f64,
    pub width: f64,
    #[serde(default = "default_geometric")]
    pub geometric_sheet_inductance: f64,
}

fn default_geometric() -> f64 {
    GEOMETRIC_SHEET_INDUCTANCE_PH
}

impl WireGeometry {
    pub fn new(sheet_inductance: f64, length: f64, width: f64) -> Self {
        Self { sheet_inductance, length, width, geometric_sheet_inductance: GEOMETRIC_SHEET_INDUCTANCE_PH }
    }

    pub fn squares(&self) -> f64 {
        self.length / self.width
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sheet_inductance", self.sheet_inductance),
            ("length", self.length),
            ("width", self.width),
            ("geometric_sheet_inductance", self.geometric_sheet_inductance),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ParameterDomain(format!("{name} must be positive, got {v}")));
            }
        }
        if self.width > self.length {
            return Err(Error::ParameterDomain(format!("width {} µm exceeds length {} µm", self.width, self.length)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireInductance {
    /// Kinetic plus geometric, nH.
    pub total_inductance: f64,
    /// Kinetic part only, nH.
    pub kinetic_inductance: f64,
    /// Kinetic-inductance fraction α.
    pub kinetic_fraction: f64,
}

pub fn wire_inductance(geom: &WireGeometry) -> Result<WireInductance> {
    geom.validate()?;
    let per_square = geom.sheet_inductance + geom.geometric_sheet_inductance;
    let pico_to_nano = 1e-3;
    Ok(WireInductance {
        total_inductance: per_square * geom.squares() * pico_to_nano,
        kinetic_inductance: geom.sheet_inductance * geom.squares() * pico_to_nano,
        kinetic_fraction: geom.sheet_inductance / per_square,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_wires_hit_the_nominal_inductance() {
        let wide = wire_inductance(&WireGeometry::new(300.0, 1960.0, 2.0)).unwrap();
        assert!((wide.kinetic_inductance - 294.0).abs() < 1e-9);
        let narrow = wire_inductance(&WireGeometry::new(100.0, 1960.0, 0.66)).unwrap();
        assert!((narrow.kinetic_inductance - 296.97).abs() < 0.01);
        assert!((wide.kinetic_fraction - 300.0 / 302.5).abs() < 1e-15);
        assert!((wide.kinetic_fraction - 0.9917).abs() < 1e-4);
        let thin_film = wire_inductance(&WireGeometry::new(100.0, 100.0, 1.0)).unwrap();
        assert!((thin_film.kinetic_fraction - 0.9756).abs() < 1e-4);
    }

    #[test]
    fn total_inductance_is_linear_in_length() {
        let a = wire_inductance(&WireGeometry::new(300.0, 980.0, 2.0)).unwrap();
        let b = wire_inductance(&WireGeometry::new(300.0, 1960.0, 2.0)).unwrap();
        assert_eq!(b.total_inductance, 2.0 * a.total_inductance);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(wire_inductance(&WireGeometry::new(300.0, 1.0, 2.0)).is_err());
        assert!(wire_inductance(&WireGeometry::new(-1.0, 10.0, 2.0)).is_err());
        let mut g = WireGeometry::new(300.0, 10.0, 2.0);
        g.geometric_sheet_inductance = 0.0;
        assert!(wire_inductance(&g).is_err());
    }
}
