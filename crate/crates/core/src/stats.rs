//! Pearson correlation between flattened matrices (with Student-t
//! p-values) and the pairwise correlation table over term weight vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::LabeledMatrix;
use crate::text::WeightVector;

/// Which matrix cells enter the flattened sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlattenMode {
    /// Every cell including the diagonal (n = rows * cols).
    Full,
    /// Every off-diagonal cell (n = rows * (rows - 1)); square only.
    OffDiagonal,
    /// Cells above the diagonal (n = rows * (rows - 1) / 2); square only.
    UpperTriangle,
}

impl FlattenMode {
    pub fn name(&self) -> &'static str {
        match self {
            FlattenMode::Full => "full",
            FlattenMode::OffDiagonal => "off-diagonal",
            FlattenMode::UpperTriangle => "upper-triangle",
        }
    }
}

impl std::str::FromStr for FlattenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(FlattenMode::Full),
            "off-diagonal" => Ok(FlattenMode::OffDiagonal),
            "upper-triangle" => Ok(FlattenMode::UpperTriangle),
            other => Err(Error::InvalidConfig {
                detail: format!(
                    "unknown flatten mode '{other}' (expected full|off-diagonal|upper-triangle)"
                ),
            }),
        }
    }
}

/// Pearson correlation with its degrees of freedom and two-sided p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub df: usize,
    pub p_value: f64,
    pub n: usize,
    pub flatten_mode: FlattenMode,
}

fn flatten(m: &LabeledMatrix, mode: FlattenMode) -> Result<Vec<f64>> {
    match mode {
        FlattenMode::Full => Ok(m.values.iter().flatten().copied().collect()),
        FlattenMode::OffDiagonal | FlattenMode::UpperTriangle => {
            if m.n_rows() != m.n_cols() {
                return Err(Error::ShapeMismatch {
                    detail: format!(
                        "{} mode needs a square matrix, got {}x{}",
                        mode.name(),
                        m.n_rows(),
                        m.n_cols()
                    ),
                });
            }
            let mut out = Vec::new();
            for i in 0..m.n_rows() {
                for j in 0..m.n_cols() {
                    let keep = match mode {
                        FlattenMode::OffDiagonal => i != j,
                        FlattenMode::UpperTriangle => i < j,
                        FlattenMode::Full => unreachable!(),
                    };
                    if keep {
                        out.push(m.values[i][j]);
                    }
                }
            }
            Ok(out)
        }
    }
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::UndefinedCorrelation {
            detail: "zero variance in a flattened input".into(),
        });
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Correlate two equally-labeled matrices cell by cell.
pub fn correlate_matrices(
    a: &LabeledMatrix,
    b: &LabeledMatrix,
    mode: FlattenMode,
) -> Result<CorrelationResult> {
    if a.row_labels != b.row_labels || a.col_labels != b.col_labels {
        return Err(Error::LabelMismatch {
            detail: format!(
                "left is {}x{} ({:?}...), right is {}x{} ({:?}...)",
                a.n_rows(),
                a.n_cols(),
                a.row_labels.first(),
                b.n_rows(),
                b.n_cols(),
                b.row_labels.first()
            ),
        });
    }
    let x = flatten(a, mode)?;
    let y = flatten(b, mode)?;
    let n = x.len();
    if n < 3 {
        return Err(Error::UndefinedCorrelation {
            detail: format!("need at least 3 samples, got {n}"),
        });
    }
    let r = pearson(&x, &y)?;
    let df = n - 2;
    let p_value = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df as f64 / (1.0 - r * r)).sqrt();
        student_t_sf(t.abs(), df)
    };
    Ok(CorrelationResult { r, df, p_value, n, flatten_mode: mode })
}

/// Pairwise correlation table over full-dictionary weight vectors; entries
/// for constant vectors are undefined (NaN) and listed separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub undefined_pairs: Vec<(String, String)>,
}

pub fn correlate_term_vectors(weights: &[WeightVector]) -> Result<CorrelationTable> {
    let dim = weights.first().map(|w| w.weights.len()).unwrap_or(0);
    for w in weights {
        if w.weights.len() != dim {
            return Err(Error::ShapeMismatch {
                detail: format!(
                    "weight vector '{}' has {} entries, expected {dim}",
                    w.owner,
                    w.weights.len()
                ),
            });
        }
    }
    let k = weights.len();
    let mut values = vec![vec![1.0; k]; k];
    let mut undefined = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            match pearson(&weights[i].weights, &weights[j].weights) {
                Ok(r) => {
                    values[i][j] = r;
                    values[j][i] = r;
                }
                Err(_) => {
                    values[i][j] = f64::NAN;
                    values[j][i] = f64::NAN;
                    undefined.push((weights[i].owner.clone(), weights[j].owner.clone()));
                }
            }
        }
    }
    Ok(CorrelationTable {
        labels: weights.iter().map(|w| w.owner.clone()).collect(),
        values,
        undefined_pairs: undefined,
    })
}

/// Two-sided tail probability P(|T| >= t) of Student's t with `df` degrees
/// of freedom, via the regularized incomplete beta function.
pub fn student_t_sf(t: f64, df: usize) -> f64 {
    assert!(df >= 1, "degrees of freedom must be at least 1");
    if t == 0.0 {
        return 1.0;
    }
    let v = df as f64;
    let x = v / (v + t * t);
    incomplete_beta_regularized(x, v / 2.0, 0.5)
}

/// ln Gamma(x) for x > 0 (Lanczos approximation).
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut sum = 1.000000000190015;
    for (i, &c) in COEFFS.iter().enumerate() {
        sum += c / (x + i as f64 + 1.0);
    }
    let tmp = x + 5.5;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    tmp + (2.5066282746310005 * sum / x).ln()
}

/// Regularized incomplete beta I_x(a, b) via the continued-fraction
/// expansion (modified Lentz), accurate to well below 1e-12.
fn incomplete_beta_regularized(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 400;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
