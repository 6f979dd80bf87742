//! Stochastic block model parameters.
//!
//! Strata are 0-based inside the crate and 1-based in every file format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(lambda) == 1`.
pub const LAMBDA_SUM_TOL: f64 = 1e-12;

/// Symmetric `G x G` matrix stored as its upper triangle, row-major.
///
/// `get(k, l)` and `get(l, k)` read the same cell, so the matrix cannot
/// become asymmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    dim: usize,
    upper: Vec<T>,
}

impl<T: Copy> SymMatrix<T> {
    pub fn filled(dim: usize, value: T) -> Self {
        Self {
            dim,
            upper: vec![value; dim * (dim + 1) / 2],
        }
    }

    /// Builds from the upper triangle in row-major order:
    /// `(0,0), (0,1), .., (0,G-1), (1,1), ..`.
    pub fn from_upper(dim: usize, upper: Vec<T>) -> Option<Self> {
        (upper.len() == dim * (dim + 1) / 2).then_some(Self { dim, upper })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for k in 0..dim {
            for l in k..dim {
                upper.push(f(k, l));
            }
        }
        Self { dim, upper }
    }

    #[inline]
    fn offset(&self, k: usize, l: usize) -> usize {
        let (a, b) = if k <= l { (k, l) } else { (l, k) };
        debug_assert!(b < self.dim);
        a * (2 * self.dim - a + 1) / 2 + (b - a)
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> T {
        self.upper[self.offset(k, l)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, l: usize, value: T) {
        let i = self.offset(k, l);
        self.upper[i] = value;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    /// `(k, l, value)` for every `k <= l`, in storage order.
    pub fn iter_upper(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let dim = self.dim;
        (0..dim)
            .flat_map(move |k| (k..dim).map(move |l| (k, l)))
            .zip(self.upper.iter().copied())
            .map(|((k, l), v)| (k, l, v))
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> SymMatrix<U> {
        SymMatrix {
            dim: self.dim,
            upper: self.upper.iter().copied().map(f).collect(),
        }
    }
}

impl SymMatrix<u64> {
    pub fn add(&mut self, k: usize, l: usize, by: u64) {
        let i = self.offset(k, l);
        self.upper[i] += by;
    }
}

/// Stratum probabilities `lambda` and link probabilities `beta` of a
/// stochastic block model with `G` strata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsFile", into = "ParamsFile")]
pub struct SbmParams {
    lambda: Vec<f64>,
    beta: SymMatrix<f64>,
}

impl SbmParams {
    /// Validates and builds. Reports the first violated invariant.
    pub fn new(lambda: Vec<f64>, beta: SymMatrix<f64>) -> Result<Self> {
        let params = Self { lambda, beta };
        params.validate()?;
        Ok(params)
    }

    /// Convenience constructor from the upper triangle of `beta`.
    pub fn from_upper(lambda: Vec<f64>, beta_upper: Vec<f64>) -> Result<Self> {
        let g = lambda.len();
        let expected = g * (g + 1) / 2;
        let beta = SymMatrix::from_upper(g, beta_upper.clone()).ok_or_else(|| {
            Error::InvalidParams(format!(
                "beta has {} upper-triangular entries, expected {expected} for G={g}",
                beta_upper.len()
            ))
        })?;
        Self::new(lambda, beta)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.lambda.len();
        if g == 0 {
            return Err(Error::InvalidParams("G must be at least 1".into()));
        }
        if self.beta.dim() != g {
            return Err(Error::InvalidParams(format!(
                "beta is {0}x{0} but lambda has {g} entries",
                self.beta.dim()
            )));
        }
        if let Some((k, v)) = self
            .lambda
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidParams(format!(
                "lambda_{} = {v} is negative or not finite",
                k + 1
            )));
        }
        let sum: f64 = self.lambda.iter().sum();
        if (sum - 1.0).abs() > LAMBDA_SUM_TOL {
            return Err(Error::InvalidParams(format!(
                "lambda does not sum to 1 (sum = {sum})"
            )));
        }
        if let Some((k, l, v)) = self
            .beta
            .iter_upper()
            .find(|(_, _, v)| !(0.0..=1.0).contains(v))
        {
            return Err(Error::InvalidParams(format!(
                "beta out of range: beta_{},{} = {v}",
                k + 1,
                l + 1
            )));
        }
        Ok(())
    }

    pub fn strata(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn beta(&self) -> &SymMatrix<f64> {
        &self.beta
    }

    #[inline]
    pub fn beta_at(&self, k: usize, l: usize) -> f64 {
        self.beta.get(k, l)
    }
}

/// On-disk form: `{"G": 2, "lambda": [..], "beta": [b11, b12, b22]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ParamsFile {
    #[serde(rename = "G")]
    g: usize,
    lambda: Vec<f64>,
    beta: Vec<f64>,
}

impl TryFrom<ParamsFile> for SbmParams {
    type Error = Error;

    fn try_from(file: ParamsFile) -> Result<Self> {
        if file.g != file.lambda.len() {
            return Err(Error::InvalidParams(format!(
                "G = {} but lambda has {} entries",
                file.g,
                file.lambda.len()
            )));
        }
        SbmParams::from_upper(file.lambda, file.beta)
    }
}

impl From<SbmParams> for ParamsFile {
    fn from(p: SbmParams) -> Self {
        ParamsFile {
            g: p.strata(),
            lambda: p.lambda,
            beta: p.beta.upper,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_strata() -> SbmParams {
        SbmParams::from_upper(vec![0.5, 0.5], vec![0.1, 0.05, 0.1]).unwrap()
    }

    #[test]
    fn sym_matrix_offsets_cover_storage() {
        for dim in 1..6 {
            let m = SymMatrix::from_fn(dim, |k, l| (k, l));
            for k in 0..dim {
                for l in 0..dim {
                    let (a, b) = m.get(k, l);
                    assert_eq!((a, b), (k.min(l), k.max(l)));
                }
            }
        }
    }

    #[test]
    fn well_formed_params_are_valid() {
        let p = two_strata();
        assert_eq!(p.strata(), 2);
        assert_eq!(p.beta_at(0, 1), 0.05);
        assert_eq!(p.beta_at(1, 0), 0.05);
    }

    #[test]
    fn lambda_sum_violation() {
        let err = SbmParams::from_upper(vec![0.7, 0.4], vec![0.1, 0.05, 0.1]).unwrap_err();
        assert!(
            err.to_string().contains("lambda does not sum to 1"),
            "{err}"
        );
    }

    #[test]
    fn beta_range_violation() {
        let err = SbmParams::from_upper(vec![0.5, 0.5], vec![0.1, 1.2, 0.1]).unwrap_err();
        assert!(err.to_string().contains("beta out of range"), "{err}");
    }

    #[test]
    fn negative_lambda_and_empty_strata() {
        let err = SbmParams::from_upper(vec![1.5, -0.5], vec![0.1, 0.1, 0.1]).unwrap_err();
        assert!(err.to_string().contains("negative"), "{err}");
        let err = SbmParams::from_upper(vec![], vec![]).unwrap_err();
        assert!(err.to_string().contains("G must be at least 1"), "{err}");
    }

    #[test]
    fn json_round_trip_and_validation_on_load() {
        let p = two_strata();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"G":2,"lambda":[0.5,0.5],"beta":[0.1,0.05,0.1]}"#);
        let back: SbmParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);

        let bad = r#"{"G":2,"lambda":[0.7,0.4],"beta":[0.1,0.05,0.1]}"#;
        assert!(serde_json::from_str::<SbmParams>(bad).is_err());
        let bad_g = r#"{"G":3,"lambda":[0.5,0.5],"beta":[0.1,0.05,0.1]}"#;
        assert!(serde_json::from_str::<SbmParams>(bad_g).is_err());
    }
}
