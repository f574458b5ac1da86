//! Published bandwidth quadratics, kept as a diagnostic fixture.
//!
//! These constants do not reproduce the published optimum table through the
//! closed-form predictor (at bw = 10 and S_i = 28.6 they give a width near
//! 18.7, not 1.23), so nothing in the pipeline consumes them.

use serde::{Deserialize, Serialize};

use super::{BwModel, Quadratic, Quadratics};

/// A quadratic as printed: three mantissas sharing a power-of-ten factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrintedQuadratic {
    pub name: char,
    pub mantissas: [f64; 3],
    pub exponent: i32,
}

impl PrintedQuadratic {
    /// Each coefficient is the decimal `mantissa e exponent`, correctly rounded.
    pub fn quadratic(&self) -> Quadratic {
        Quadratic(self.mantissas.map(|m| {
            format!("{m}e{}", self.exponent)
                .parse()
                .expect("printed constant parses")
        }))
    }
}

pub fn printed_constants() -> [PrintedQuadratic; 6] {
    let q = |name, mantissas, exponent| PrintedQuadratic {
        name,
        mantissas,
        exponent,
    };
    [
        q('a', [0.8364, -1.504, 4.017], -1),
        q('b', [-0.1790, -2.572, -4.164], -1),
        q('c', [-0.4596, 3.313, -7.653], -2),
        q('d', [0.7983, -8.658, 1.575], -2),
        q('f', [0.7481, -6.817, 17.04], -4),
        q('g', [0.5562, -2.510, 6.352], -3),
    ]
}

pub fn published_coefficients() -> BwModel {
    let [a, b, c, d, f, g] = printed_constants().map(|p| p.quadratic());
    BwModel {
        quadratics: Quadratics { a, b, c, d, f, g },
        surfaces: Vec::new(),
    }
}
