//! Kernel SHAP attributions for any fitted model.
//!
//! Absent features are replaced by reference values (training means).
//! Coalitions are weighted by the Shapley kernel; the weighted least-squares
//! problem is solved with the local-accuracy constraint
//! `φ_0 + Σ φ_j = f(query)` eliminated analytically, so the empty and full
//! coalitions never need their infinite weights.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::learners::{solve_least_squares, Dataset, Regressor};

/// Default number of sampled coalitions per explanation.
pub const DEFAULT_SAMPLES: usize = 1000;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Shapley kernel weight `(M − 1) / (C(M, s) · s · (M − s))` of a coalition
/// with `size` members out of `m`.
pub fn shap_kernel_weight(m: usize, size: usize) -> Result<f64> {
    if size == 0 || size >= m {
        return Err(Error::Domain(format!(
            "coalition size {size} of {m} has infinite kernel weight"
        )));
    }
    Ok((m - 1) as f64 / (binomial(m, size) * size as f64 * (m - size) as f64))
}

/// One coalition: `mask[j]` is true when feature `j` takes its query value.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionSample {
    pub mask: Vec<bool>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapExplanation {
    /// Model output at the reference point.
    pub phi_0: f64,
    pub phi: Vec<f64>,
    /// Model output at the query point.
    pub prediction: f64,
    pub query: Vec<f64>,
    pub references: Vec<f64>,
    pub n_samples: usize,
}

/// Every proper nonempty coalition with its exact kernel weight.
fn enumerate_coalitions(m: usize) -> Vec<CoalitionSample> {
    (1u64..(1u64 << m) - 1)
        .map(|bits| {
            let mask: Vec<bool> = (0..m).map(|j| bits >> j & 1 == 1).collect();
            let size = mask.iter().filter(|b| **b).count();
            CoalitionSample {
                weight: shap_kernel_weight(m, size).expect("proper coalition"),
                mask,
            }
        })
        .collect()
}

/// `n` coalitions with sizes drawn in proportion to their total kernel
/// weight, members uniform within a size, and each draw followed by its
/// complement. Weights are uniform because the sampler already follows the
/// kernel.
fn sample_coalitions(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<CoalitionSample> {
    let size_weights: Vec<f64> = (1..m).map(|s| 1.0 / (s * (m - s)) as f64).collect();
    let sizes = WeightedIndex::new(&size_weights).expect("positive weights");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let s = sizes.sample(rng) + 1;
        let mut mask = vec![false; m];
        for j in rand::seq::index::sample(rng, m, s) {
            mask[j] = true;
        }
        let complement: Vec<bool> = mask.iter().map(|b| !b).collect();
        out.push(CoalitionSample { mask, weight: 1.0 });
        if out.len() < n {
            out.push(CoalitionSample {
                mask: complement,
                weight: 1.0,
            });
        }
    }
    out
}

fn explain_with_rng(
    model: &(impl Regressor + ?Sized),
    query: &[f64],
    references: &[f64],
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ShapExplanation> {
    let m = query.len();
    if references.len() != m {
        return Err(Error::Alignment(format!(
            "query has {m} features, references {}",
            references.len()
        )));
    }
    if m == 0 {
        return Err(Error::InsufficientData {
            what: "features to explain".into(),
            needed: 1,
            got: 0,
        });
    }
    let f_ref = model.predict(references);
    let f_x = model.predict(query);
    let delta = f_x - f_ref;
    let done = |phi: Vec<f64>| ShapExplanation {
        phi_0: f_ref,
        phi,
        prediction: f_x,
        query: query.to_vec(),
        references: references.to_vec(),
        n_samples: samples,
    };
    if m == 1 {
        return Ok(done(vec![delta]));
    }
    if samples < m + 2 {
        return Err(Error::Config(format!(
            "{samples} coalition samples is fewer than M + 2 = {}",
            m + 2
        )));
    }

    let exhaustive = m < 63 && samples as u64 >= (1u64 << m) - 2;
    let coalitions = if exhaustive {
        enumerate_coalitions(m)
    } else {
        sample_coalitions(m, samples, rng)
    };

    // y_z − z_M Δ ≈ Σ_{j<M} (z_j − z_M) φ_j, weighted by the kernel.
    let rows = coalitions.len();
    let mut design = DMatrix::zeros(rows, m - 1);
    let mut target = DVector::zeros(rows);
    let mut point = vec![0.0; m];
    for (r, c) in coalitions.iter().enumerate() {
        for j in 0..m {
            point[j] = if c.mask[j] { query[j] } else { references[j] };
        }
        let y = model.predict(&point) - f_ref;
        let z_last = c.mask[m - 1] as u8 as f64;
        let sw = c.weight.sqrt();
        target[r] = sw * (y - z_last * delta);
        for j in 0..m - 1 {
            design[(r, j)] = sw * (c.mask[j] as u8 as f64 - z_last);
        }
    }
    let head = solve_least_squares(&design, &target).map_err(|e| match e {
        Error::Singular(msg) => Error::Singular(format!("coalition system is degenerate: {msg}")),
        other => other,
    })?;
    let mut phi: Vec<f64> = head.iter().copied().collect();
    phi.push(delta - phi.iter().sum::<f64>());
    Ok(done(phi))
}

/// Kernel SHAP values of `model` at `query`.
pub fn explain(
    model: &(impl Regressor + ?Sized),
    query: &[f64],
    references: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ShapExplanation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    explain_with_rng(model, query, references, samples, &mut rng)
}

/// Column means of a dataset, the default reference point.
pub fn feature_means(data: &Dataset) -> Vec<f64> {
    let n = data.n_rows() as f64;
    (0..data.n_features())
        .map(|j| data.column(j).iter().sum::<f64>() / n)
        .collect()
}

/// Per-feature averages of SHAP values over many query rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributionSummary {
    pub features: Vec<String>,
    pub mean_phi: Vec<f64>,
    pub mean_abs_phi: Vec<f64>,
    /// Mean of `max(φ, 0)`.
    pub mean_positive: Vec<f64>,
    /// Mean of `min(φ, 0)`.
    pub mean_negative: Vec<f64>,
    pub n_rows: usize,
}

/// Explains every row of `rows` (query features only; targets unused) and
/// averages. Row `i` uses random stream `i` of `seed`, so results do not
/// depend on thread scheduling.
pub fn mean_attributions(
    model: &(impl Regressor + ?Sized),
    rows: &Dataset,
    references: &[f64],
    samples: usize,
    seed: u64,
) -> Result<AttributionSummary> {
    let n = rows.n_rows();
    let explanations: Vec<ShapExplanation> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            explain_with_rng(model, rows.row(i), references, samples, &mut rng)
        })
        .collect::<Result<_>>()?;
    let m = rows.n_features();
    let avg = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        (0..m)
            .map(|j| explanations.iter().map(|e| f(e.phi[j])).sum::<f64>() / n as f64)
            .collect()
    };
    Ok(AttributionSummary {
        features: rows.feature_names().to_vec(),
        mean_phi: avg(&|p| p),
        mean_abs_phi: avg(&f64::abs),
        mean_positive: avg(&|p| p.max(0.0)),
        mean_negative: avg(&|p| p.min(0.0)),
        n_rows: n,
    })
}

/// Writes `feature,mean_phi,mean_abs_phi,model` rows.
pub fn write_attributions_csv(
    path: impl AsRef<Path>,
    summaries: &[(String, AttributionSummary)],
) -> Result<()> {
    use std::io::Write;
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "feature,mean_phi,mean_abs_phi,model").map_err(io)?;
    for (model, s) in summaries {
        for j in 0..s.features.len() {
            writeln!(out, "{},{},{},{model}", s.features[j], s.mean_phi[j], s.mean_abs_phi[j]).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}
