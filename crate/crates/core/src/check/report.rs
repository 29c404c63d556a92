//! Corpus runs over fuzzed programs, reported as JSON lines.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::fuzz::{corpus_program, FuzzConfig};
use super::{jacobian_report, Compiled, Result, FD_STEP, FD_TOL, FWD_REV_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportRecord {
    pub seed: u64,
    #[serde(rename = "type")]
    pub ty: String,
    pub max_rel_err_fwd_rev: f64,
    #[serde(rename = "maxRelErrFwdFD")]
    pub max_rel_err_fwd_fd: f64,
    /// The source program and both primal halves agree bit for bit.
    pub primal_exact: bool,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A random point in `[-1, 1]ⁿ` determined by `seed`.
pub fn sample_point(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn bits_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Worst errors over `points` sample points, and whether every primal was
/// exact.
pub fn measure(compiled: &Compiled, seed: u64, points: usize) -> Result<(f64, f64, bool)> {
    let (mut fr, mut fd, mut exact) = (0.0f64, 0.0f64, true);
    for k in 0..points as u64 {
        let x = sample_point(seed.wrapping_add(k << 32), compiled.widths().0);
        let report = jacobian_report(compiled, &x, FD_STEP)?;
        let y = compiled.eval(&x)?;
        exact &= bits_equal(&y, &compiled.fwd_primal(&x)?) && bits_equal(&y, &compiled.rev_primal(&x)?);
        fr = fr.max(report.max_rel_err_fwd_rev);
        fd = fd.max(report.max_rel_err_fwd_fd);
    }
    Ok((fr, fd, exact))
}

/// Generates, differentiates and checks the corpus program for `seed` at
/// `points` sample points.
pub fn check_seed(cfg: &FuzzConfig, seed: u64, points: usize) -> ReportRecord {
    let mut rec = ReportRecord {
        seed,
        ty: String::new(),
        max_rel_err_fwd_rev: f64::NAN,
        max_rel_err_fwd_fd: f64::NAN,
        primal_exact: false,
        status: Status::Error,
        error: None,
    };
    let outcome = corpus_program(cfg, seed).and_then(|p| {
        rec.ty = format!("{} -> {}", p.arg_type, p.result_type()?);
        let compiled = Compiled::new(p)?;
        measure(&compiled, seed, points)
    });
    match outcome {
        Ok((fr, fd, exact)) => {
            rec.max_rel_err_fwd_rev = fr;
            rec.max_rel_err_fwd_fd = fd;
            rec.primal_exact = exact;
            rec.status = if fr <= FWD_REV_TOL && fd <= FD_TOL && exact { Status::Pass } else { Status::Fail };
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Checks `count` consecutive seeds starting at `first`, in parallel.
/// Records come back in seed order.
pub fn run_corpus(cfg: &FuzzConfig, first: u64, count: u64, points: usize) -> Vec<ReportRecord> {
    (first..first + count).into_par_iter().map(|s| check_seed(cfg, s, points)).collect()
}

pub fn write_jsonl<W: Write>(records: &[ReportRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_corpus_passes() {
        let recs = run_corpus(&FuzzConfig::with_depth(4), 0, 40, 2);
        for r in &recs {
            assert_eq!(r.status, Status::Pass, "{r:?}");
        }
        assert!(recs.windows(2).all(|w| w[0].seed + 1 == w[1].seed));
    }

    #[test]
    fn records_serialise_with_expected_keys() {
        let r = check_seed(&FuzzConfig::with_depth(3), 7, 1);
        let mut buf = Vec::new();
        write_jsonl(&[r], &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        for k in ["seed", "type", "maxRelErrFwdRev", "maxRelErrFwdFD", "status", "primalExact"] {
            assert!(v.get(k).is_some(), "missing {k} in {v}");
        }
        assert!(buf.ends_with(b"\n"));
    }
}
