//! Built-in test densities.

use std::f64::consts::PI;
use std::fmt;

use crate::{Error, Pdf, Result};

/// Names accepted by [`BuiltinPdf::from_name`].
pub const NAMES: [&str; 5] = ["gmm1d", "doughnut2d", "powerlaw1d", "gauss_kd", "uniform_kd"];

#[derive(Clone, Debug, PartialEq)]
pub enum BuiltinPdf {
    /// Weighted sum of 1D normals; weights are normalized.
    Gmm1d {
        mu: Vec<f64>,
        sigma: Vec<f64>,
        weight: Vec<f64>,
    },
    /// Two Gaussian-profile rings of radius `radius` centred at `(±separation, 0)`.
    Doughnut2d {
        radius: f64,
        width: f64,
        separation: f64,
    },
    /// `1 / ((r/rs + softening)^gamma (1 + r/rs)^(3 - gamma))` for `r > 0`, zero elsewhere.
    /// The defaults give the NFW profile.
    Powerlaw1d { rs: f64, gamma: f64, softening: f64 },
    /// Isotropic normal in `dim` dimensions.
    GaussKd { dim: usize, mu: Vec<f64>, sigma: f64 },
    /// Constant density.
    UniformKd { dim: usize },
}

impl BuiltinPdf {
    /// The three-component mixture used throughout the examples.
    pub fn gmm1d() -> Self {
        BuiltinPdf::Gmm1d {
            mu: vec![-3.0, 0.5, 2.5],
            sigma: vec![1.0, 0.25, 0.75],
            weight: vec![0.4, 0.25, 0.35],
        }
    }

    pub fn doughnut2d() -> Self {
        BuiltinPdf::Doughnut2d {
            radius: 1.5,
            width: 0.3,
            separation: 2.5,
        }
    }

    pub fn powerlaw1d() -> Self {
        BuiltinPdf::Powerlaw1d {
            rs: 1.0,
            gamma: 1.0,
            softening: 0.0,
        }
    }

    pub fn gauss_kd(dim: usize) -> Self {
        BuiltinPdf::GaussKd {
            dim,
            mu: vec![0.0; dim],
            sigma: 1.0,
        }
    }

    pub fn uniform_kd(dim: usize) -> Self {
        BuiltinPdf::UniformKd { dim }
    }

    /// Looks up a density by name and applies `key = values` overrides.
    ///
    /// `dim` is required to be 1 (or absent) for the 1D densities and 2 for
    /// `doughnut2d`; the `_kd` densities default to one dimension.
    pub fn from_name(name: &str, dim: Option<usize>, params: &[(String, Vec<f64>)]) -> Result<Self> {
        let fixed = |want: usize| match dim {
            Some(d) if d != want => Err(Error::InvalidParameter(format!(
                "{name} is {want}-dimensional, --dim {d} given"
            ))),
            _ => Ok(()),
        };
        let kd = dim.unwrap_or(1);
        if kd == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let mut pdf = match name {
            "gmm1d" => {
                fixed(1)?;
                Self::gmm1d()
            }
            "doughnut2d" => {
                fixed(2)?;
                Self::doughnut2d()
            }
            "powerlaw1d" => {
                fixed(1)?;
                Self::powerlaw1d()
            }
            "gauss_kd" => Self::gauss_kd(kd),
            "uniform_kd" => Self::uniform_kd(kd),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown pdf {other:?} (expected one of {})",
                    NAMES.join(", ")
                )))
            }
        };
        for (key, values) in params {
            pdf.set(key, values)?;
        }
        pdf.validate()?;
        Ok(pdf)
    }

    fn set(&mut self, key: &str, values: &[f64]) -> Result<()> {
        let scalar = || match values {
            [v] => Ok(*v),
            _ => Err(Error::InvalidParameter(format!("{key} takes a single value"))),
        };
        match (self, key) {
            (BuiltinPdf::Gmm1d { mu, .. }, "mu") => *mu = values.to_vec(),
            (BuiltinPdf::Gmm1d { sigma, .. }, "sigma") => *sigma = values.to_vec(),
            (BuiltinPdf::Gmm1d { weight, .. }, "weight") => *weight = values.to_vec(),
            (BuiltinPdf::Doughnut2d { radius, .. }, "radius") => *radius = scalar()?,
            (BuiltinPdf::Doughnut2d { width, .. }, "width") => *width = scalar()?,
            (BuiltinPdf::Doughnut2d { separation, .. }, "separation") => *separation = scalar()?,
            (BuiltinPdf::Powerlaw1d { rs, .. }, "rs") => *rs = scalar()?,
            (BuiltinPdf::Powerlaw1d { gamma, .. }, "gamma") => *gamma = scalar()?,
            (BuiltinPdf::Powerlaw1d { softening, .. }, "softening") => *softening = scalar()?,
            (BuiltinPdf::GaussKd { dim, mu, .. }, "mu") => {
                *mu = match values {
                    [v] => vec![*v; *dim],
                    _ => values.to_vec(),
                }
            }
            (BuiltinPdf::GaussKd { sigma, .. }, "sigma") => *sigma = scalar()?,
            (pdf, _) => {
                return Err(Error::InvalidParameter(format!(
                    "{} has no parameter {key:?}",
                    pdf.name()
                )))
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if let Some(v) = self.parameters().iter().find(|v| !v.is_finite()) {
            return bad(format!("non-finite parameter {v}"));
        }
        match self {
            BuiltinPdf::Gmm1d { mu, sigma, weight } => {
                if mu.is_empty() || mu.len() != sigma.len() || mu.len() != weight.len() {
                    return bad("gmm1d needs mu, sigma and weight of equal non-zero length".into());
                }
                if sigma.iter().any(|s| *s <= 0.0) {
                    return bad("gmm1d sigma must be positive".into());
                }
                if weight.iter().any(|w| *w < 0.0) || weight.iter().sum::<f64>() <= 0.0 {
                    return bad("gmm1d weights must be non-negative with a positive sum".into());
                }
            }
            BuiltinPdf::Doughnut2d { radius, width, .. } => {
                if *radius < 0.0 || *width <= 0.0 {
                    return bad("doughnut2d needs radius >= 0 and width > 0".into());
                }
            }
            BuiltinPdf::Powerlaw1d { rs, gamma, softening } => {
                if *rs <= 0.0 || !(0.0..=3.0).contains(gamma) || *softening < 0.0 {
                    return bad("powerlaw1d needs rs > 0, 0 <= gamma <= 3, softening >= 0".into());
                }
            }
            BuiltinPdf::GaussKd { dim, mu, sigma } => {
                if mu.len() != *dim {
                    return bad(format!("gauss_kd mu has {} values for dimension {dim}", mu.len()));
                }
                if *sigma <= 0.0 {
                    return bad("gauss_kd sigma must be positive".into());
                }
            }
            BuiltinPdf::UniformKd { .. } => {}
        }
        Ok(())
    }

    fn parameters(&self) -> Vec<f64> {
        match self {
            BuiltinPdf::Gmm1d { mu, sigma, weight } => [mu.as_slice(), sigma, weight].concat(),
            BuiltinPdf::Doughnut2d {
                radius,
                width,
                separation,
            } => vec![*radius, *width, *separation],
            BuiltinPdf::Powerlaw1d { rs, gamma, softening } => vec![*rs, *gamma, *softening],
            BuiltinPdf::GaussKd { mu, sigma, .. } => [mu.as_slice(), &[*sigma]].concat(),
            BuiltinPdf::UniformKd { .. } => Vec::new(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BuiltinPdf::Gmm1d { .. } => "gmm1d",
            BuiltinPdf::Doughnut2d { .. } => "doughnut2d",
            BuiltinPdf::Powerlaw1d { .. } => "powerlaw1d",
            BuiltinPdf::GaussKd { .. } => "gauss_kd",
            BuiltinPdf::UniformKd { .. } => "uniform_kd",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BuiltinPdf::Gmm1d { .. } | BuiltinPdf::Powerlaw1d { .. } => 1,
            BuiltinPdf::Doughnut2d { .. } => 2,
            BuiltinPdf::GaussKd { dim, .. } | BuiltinPdf::UniformKd { dim } => *dim,
        }
    }

    /// Density at one point.
    pub fn density(&self, x: &[f64]) -> f64 {
        match self {
            BuiltinPdf::Gmm1d { mu, sigma, weight } => {
                let total: f64 = weight.iter().sum();
                mu.iter()
                    .zip(sigma)
                    .zip(weight)
                    .map(|((m, s), w)| w / total * normal(x[0], *m, *s))
                    .sum()
            }
            BuiltinPdf::Doughnut2d {
                radius,
                width,
                separation,
            } => [-separation, *separation]
                .iter()
                .map(|cx| {
                    let r = (x[0] - cx).hypot(x[1]);
                    let z = (r - radius) / width;
                    (-0.5 * z * z).exp()
                })
                .sum(),
            BuiltinPdf::Powerlaw1d { rs, gamma, softening } => {
                let r = x[0] / rs;
                if r <= 0.0 && *softening == 0.0 {
                    return 0.0;
                }
                let r = r.max(0.0);
                1.0 / ((r + softening).powf(*gamma) * (1.0 + r).powf(3.0 - gamma))
            }
            BuiltinPdf::GaussKd { mu, sigma, .. } => {
                x.iter().zip(mu).map(|(xi, m)| normal(*xi, *m, *sigma)).product()
            }
            BuiltinPdf::UniformKd { .. } => 1.0,
        }
    }

    /// Mean of the density itself, where it has a closed form.
    pub fn analytic_mean(&self) -> Option<Vec<f64>> {
        match self {
            BuiltinPdf::Gmm1d { mu, weight, .. } => {
                let total: f64 = weight.iter().sum();
                Some(vec![mu.iter().zip(weight).map(|(m, w)| m * w).sum::<f64>() / total])
            }
            BuiltinPdf::GaussKd { mu, .. } => Some(mu.clone()),
            _ => None,
        }
    }
}

impl fmt::Display for BuiltinPdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Pdf for BuiltinPdf {
    fn evaluate(&self, points: &[f64], dim: usize, out: &mut [f64]) {
        for (p, o) in points.chunks_exact(dim).zip(out.iter_mut()) {
            *o = self.density(p);
        }
    }
}

fn normal(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Parses `key=v1,v2,...`.
pub fn parse_param(text: &str) -> Result<(String, Vec<f64>)> {
    let (key, values) = text
        .split_once('=')
        .ok_or_else(|| Error::InvalidParameter(format!("parameter {text:?} is not key=values")))?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad value {v:?} for {key}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((key.trim().to_string(), values))
}
