use serde::{Deserialize, Serialize};

use super::gram::GramFactorization;
use crate::error::{Error, Result};
use crate::limits::{self, Limits};
use crate::matrix::QMatrix;
use crate::rational::parse_rational;

/// Sign of the action in the weight `e^{±S}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentSign {
    #[default]
    Plus,
    Minus,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrassmannModel {
    sites: usize,
    colors: usize,
    propagator: QMatrix,
    order: usize,
    sign: ExponentSign,
    factorization: Option<GramFactorization>,
}

/// JSON form: `{"sites": L, "covariance": [[…]], "order": p,
/// "factorization": {"D": [[…]], "E": [[…]]}}`; colors come separately.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrassmannModelFile {
    pub sites: usize,
    pub covariance: Vec<Vec<String>>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub factorization: Option<FactorizationFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorizationFile {
    #[serde(rename = "D")]
    pub d: Vec<Vec<String>>,
    #[serde(rename = "E")]
    pub e: Vec<Vec<String>>,
}

fn parse_matrix(rows: &[Vec<String>]) -> Result<QMatrix> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    QMatrix::from_rows(rows)
}

impl GrassmannModelFile {
    pub fn into_model(self, colors: usize, order: Option<usize>, sign: ExponentSign) -> Result<GrassmannModel> {
        let order = order
            .or(self.order)
            .ok_or_else(|| Error::validation("no order given"))?;
        let c = parse_matrix(&self.covariance)?;
        if c.rows() != self.sites {
            return Err(Error::validation(format!(
                "covariance has {} rows for {} sites",
                c.rows(),
                self.sites
            )));
        }
        let mut model = GrassmannModel::new(c, colors, order)?.with_sign(sign);
        if let Some(f) = self.factorization {
            model = model.with_factorization(parse_matrix(&f.d)?, parse_matrix(&f.e)?)?;
        }
        Ok(model)
    }
}

impl GrassmannModel {
    /// `propagator[x][y] = C(x, y)` on the ring `Z_L`, site 0 the origin.
    pub fn new(propagator: QMatrix, colors: usize, order: usize) -> Result<Self> {
        let sites = propagator.rows();
        if sites == 0 || !propagator.is_square() {
            return Err(Error::validation("propagator must be a nonempty square matrix"));
        }
        if colors == 0 {
            return Err(Error::validation("at least one color"));
        }
        for x in 0..sites {
            for y in 0..sites {
                if propagator[((x + 1) % sites, (y + 1) % sites)] != propagator[(x, y)] {
                    return Err(Error::validation(format!(
                        "propagator is not translation invariant at ({x}, {y})"
                    )));
                }
            }
        }
        Limits::check("fermion order", order, limits::current().max_fermion_order)?;
        Ok(GrassmannModel {
            sites,
            colors,
            propagator,
            order,
            sign: ExponentSign::Plus,
            factorization: None,
        })
    }

    pub fn with_sign(mut self, sign: ExponentSign) -> Self {
        self.sign = sign;
        self
    }

    /// Attaches `C = D Eᵀ`, checked exactly.
    pub fn with_factorization(mut self, d: QMatrix, e: QMatrix) -> Result<Self> {
        let f = GramFactorization::from_matrices(&d, &e)?;
        if d.rows() != self.sites || e.rows() != self.sites {
            return Err(Error::validation("factorization must have one row per site"));
        }
        if d.mul(&e.transpose())? != self.propagator {
            return Err(Error::validation(
                "factorization D Eᵀ does not reproduce the propagator",
            ));
        }
        self.factorization = Some(f);
        Ok(self)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    pub fn propagator(&self) -> &QMatrix {
        &self.propagator
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sign(&self) -> ExponentSign {
        self.sign
    }

    pub fn factorization(&self) -> Option<&GramFactorization> {
        self.factorization.as_ref()
    }

    /// The exact factorization if attached, else `D = C`, `E = I`.
    pub fn factorization_or_trivial(&self) -> GramFactorization {
        self.factorization.clone().unwrap_or_else(|| {
            GramFactorization::from_matrices(&self.propagator, &QMatrix::identity(self.sites))
                .expect("square propagator")
        })
    }

    pub(crate) fn c(&self, x: usize, y: usize) -> &crate::rational::Rational {
        &self.propagator[(x, y)]
    }

    /// `(-1)^k` under `e^{-S}`.
    pub(crate) fn order_sign(&self, k: usize) -> bool {
        self.sign == ExponentSign::Minus && k % 2 == 1
    }
}
