//! Coefficient and forcing fields.

use crate::expr::{parse_expr, EvalError, Expr, ParseError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    A1,
    A2,
    Alpha,
    Source,
    GravityX,
    GravityZ,
    InterfaceSource,
    DrainedPressure,
    FissureEndFlux,
}

impl Field {
    pub const ALL: [Field; 9] = [
        Field::A1,
        Field::A2,
        Field::Alpha,
        Field::Source,
        Field::GravityX,
        Field::GravityZ,
        Field::InterfaceSource,
        Field::DrainedPressure,
        Field::FissureEndFlux,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::A1 => "a1",
            Field::A2 => "a2",
            Field::Alpha => "alpha",
            Field::Source => "source",
            Field::GravityX => "gravity_x",
            Field::GravityZ => "gravity_z",
            Field::InterfaceSource => "interface_source",
            Field::DrainedPressure => "drained_pressure",
            Field::FissureEndFlux => "fissure_end_flux",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("data field `{field}`: {source}")]
    Parse { field: &'static str, source: ParseError },
    #[error("coefficient `{field}` cannot be evaluated: {source}")]
    Evaluation { field: &'static str, source: EvalError },
    #[error("coefficient `{field}` = {value} at ({x}, {z}) violates {requirement}")]
    Hypothesis { field: &'static str, value: f64, x: f64, z: f64, requirement: &'static str },
}

/// Textual form of the data, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub a1: String,
    pub a2: String,
    pub alpha: String,
    pub source: String,
    #[serde(default = "zero")]
    pub gravity_x: String,
    #[serde(default = "zero")]
    pub gravity_z: String,
    #[serde(default = "zero")]
    pub interface_source: String,
    /// Pressure imposed on the drained boundary.
    #[serde(default = "zero")]
    pub drained_pressure: String,
    /// Outward normal flux of the scaled fissure velocity on the strip ends.
    #[serde(default = "zero")]
    pub fissure_end_flux: String,
}

fn zero() -> String {
    "0".into()
}

/// Coefficients `a₁, a₂, α`, volumetric source `F`, gravity-like field `g`,
/// interface source `f_Γ`, drained-boundary pressure and fissure end flux.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub a1: Expr,
    pub a2: Expr,
    pub alpha: Expr,
    pub source: Expr,
    pub gravity: [Expr; 2],
    pub interface_source: Expr,
    pub drained_pressure: Expr,
    pub fissure_end_flux: Expr,
}

impl ProblemData {
    pub fn from_spec(spec: &DataSpec) -> Result<ProblemData, DataError> {
        let p = |field: Field, s: &str| parse_expr(s).map_err(|source| DataError::Parse { field: field.name(), source });
        Ok(ProblemData {
            a1: p(Field::A1, &spec.a1)?,
            a2: p(Field::A2, &spec.a2)?,
            alpha: p(Field::Alpha, &spec.alpha)?,
            source: p(Field::Source, &spec.source)?,
            gravity: [p(Field::GravityX, &spec.gravity_x)?, p(Field::GravityZ, &spec.gravity_z)?],
            interface_source: p(Field::InterfaceSource, &spec.interface_source)?,
            drained_pressure: p(Field::DrainedPressure, &spec.drained_pressure)?,
            fissure_end_flux: p(Field::FissureEndFlux, &spec.fissure_end_flux)?,
        })
    }

    /// Unit resistances, no entry resistance and no forcing.
    pub fn zero_forcing() -> ProblemData {
        ProblemData {
            a1: Expr::Num(1.0),
            a2: Expr::Num(1.0),
            alpha: Expr::Num(0.0),
            source: Expr::Num(0.0),
            gravity: [Expr::Num(0.0), Expr::Num(0.0)],
            interface_source: Expr::Num(0.0),
            drained_pressure: Expr::Num(0.0),
            fissure_end_flux: Expr::Num(0.0),
        }
    }

    pub fn expr(&self, field: Field) -> &Expr {
        match field {
            Field::A1 => &self.a1,
            Field::A2 => &self.a2,
            Field::Alpha => &self.alpha,
            Field::Source => &self.source,
            Field::GravityX => &self.gravity[0],
            Field::GravityZ => &self.gravity[1],
            Field::InterfaceSource => &self.interface_source,
            Field::DrainedPressure => &self.drained_pressure,
            Field::FissureEndFlux => &self.fissure_end_flux,
        }
    }

    pub fn eval(&self, field: Field, p: [f64; 2]) -> Result<f64, DataError> {
        self.expr(field).eval(p[0], p[1]).map_err(|source| DataError::Evaluation { field: field.name(), source })
    }

    pub fn gravity_at(&self, p: [f64; 2]) -> Result<[f64; 2], DataError> {
        Ok([self.eval(Field::GravityX, p)?, self.eval(Field::GravityZ, p)?])
    }

    /// Checks `a₁ > 0`, `a₂ > 0` and `α ≥ 0` at the given sample points.
    pub fn check_hypotheses(
        &self,
        rock_points: &[[f64; 2]],
        strip_points: &[[f64; 2]],
        interface_points: &[[f64; 2]],
    ) -> Result<(), DataError> {
        let check = |field: Field, pts: &[[f64; 2]], ok: fn(f64) -> bool, requirement: &'static str| {
            for &p in pts {
                let value = self.eval(field, p)?;
                if !ok(value) {
                    return Err(DataError::Hypothesis { field: field.name(), value, x: p[0], z: p[1], requirement });
                }
            }
            Ok(())
        };
        check(Field::A1, rock_points, |v| v > 0.0, "a1 > 0")?;
        check(Field::A2, strip_points, |v| v > 0.0, "a2 > 0")?;
        check(Field::Alpha, interface_points, |v| v >= 0.0, "alpha >= 0")
    }
}

impl DataSpec {
    pub fn to_data(&self) -> Result<ProblemData, DataError> {
        ProblemData::from_spec(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_name_the_field() {
        let spec = DataSpec {
            a1: "1".into(),
            a2: "1 +".into(),
            alpha: "0".into(),
            source: "1".into(),
            gravity_x: "0".into(),
            gravity_z: "0".into(),
            interface_source: "0".into(),
            drained_pressure: "0".into(),
            fissure_end_flux: "0".into(),
        };
        let e = ProblemData::from_spec(&spec).unwrap_err();
        assert!(matches!(e, DataError::Parse { field: "a2", .. }));
    }

    #[test]
    fn hypotheses() {
        let mut d = ProblemData::zero_forcing();
        assert!(d.check_hypotheses(&[[0.0, 0.0]], &[[0.0, 0.0]], &[[0.0, 0.0]]).is_ok());
        d.a1 = Expr::Num(0.0);
        assert!(matches!(
            d.check_hypotheses(&[[0.0, 0.0]], &[], &[]),
            Err(DataError::Hypothesis { field: "a1", .. })
        ));
    }
}
