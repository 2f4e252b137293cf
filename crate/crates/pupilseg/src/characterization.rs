//! Exhaustive error characterization of configured adders and relative
//! hardware-cost proxies.
//!
//! Cost is reported as cell and comparator-bit counts rather than watts or
//! area: the modeled hardware claims are relative, so relative proxies are
//! the reproducible quantity.

use serde::Serialize;

use crate::bitlevel::{ripple_add, AdderConfig, CellKind, Word};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Widest adder accepted for exhaustive enumeration (2^24 operand pairs).
pub const MAX_EXHAUSTIVE_WIDTH: usize = 12;

/// Exhaustive error statistics for one adder configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorStats {
    pub width: usize,
    pub approx_prefix: usize,
    /// Fraction of operand pairs with nonzero error distance.
    pub error_rate: f64,
    /// Mean of |approx - exact| over all pairs.
    pub mean_error_distance: f64,
    pub max_error_distance: u64,
    pub total_cases: u64,
}

/// Relative hardware-cost proxies for an adder + comparator configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub exact_cells: usize,
    pub carry_only_cells: usize,
    pub approx_cells: usize,
    pub comparator_bits_exact: usize,
    pub comparator_bits_truncated: usize,
    /// 1 - truncated / exact comparator bits.
    pub comparator_reduction: f64,
}

#[derive(Clone, Copy, Default)]
struct Partial {
    nonzero: u64,
    sum_abs: u64,
    max_abs: u64,
}

impl Partial {
    fn merge(self, other: Self) -> Self {
        Self {
            nonzero: self.nonzero + other.nonzero,
            sum_abs: self.sum_abs + other.sum_abs,
            max_abs: self.max_abs.max(other.max_abs),
        }
    }
}

fn check_width(cfg: &AdderConfig) -> Result<()> {
    if cfg.width() > MAX_EXHAUSTIVE_WIDTH {
        return Err(Error::Config(format!(
            "width {} exceeds the exhaustive-enumeration cap of {MAX_EXHAUSTIVE_WIDTH} \
             bits ({} cases); use a sampling harness for wider adders",
            cfg.width(),
            2u128.pow(2 * cfg.width() as u32),
        )));
    }
    Ok(())
}

fn scan_operand(cfg: &AdderConfig, ignore_low_bits: usize, x: u64) -> Partial {
    let width = cfg.width();
    let xw = Word::from_unsigned(x, width).unwrap();
    let mut p = Partial::default();
    for y in 0..1u64 << width {
        let yw = Word::from_unsigned(y, width).unwrap();
        let approx = ripple_add(&xw, &yw, cfg).unwrap().value() >> ignore_low_bits;
        let exact = (x + y) >> ignore_low_bits;
        let ed = approx.abs_diff(exact);
        if ed != 0 {
            p.nonzero += 1;
        }
        p.sum_abs += ed;
        p.max_abs = p.max_abs.max(ed);
    }
    p
}

fn stats_from(cfg: &AdderConfig, p: Partial) -> ErrorStats {
    let total = 1u64 << (2 * cfg.width());
    ErrorStats {
        width: cfg.width(),
        approx_prefix: cfg.prefix_len(),
        error_rate: p.nonzero as f64 / total as f64,
        mean_error_distance: p.sum_abs as f64 / total as f64,
        max_error_distance: p.max_abs,
        total_cases: total,
    }
}

/// Enumerates all 2^(2w) operand pairs and compares `ripple_add` under `cfg`
/// against exact addition, after dropping `ignore_low_bits` LSBs from both
/// results. Dropping bits models a downstream shift: a carry-only prefix of
/// length k is error-free on the bits a >>k keeps.
pub fn characterize_adder_ignoring(cfg: &AdderConfig, ignore_low_bits: usize) -> Result<ErrorStats> {
    check_width(cfg)?;
    let width = cfg.width();

    #[cfg(feature = "parallel")]
    let partial = (0..1u64 << width)
        .into_par_iter()
        .map(|x| scan_operand(cfg, ignore_low_bits, x))
        .reduce(Partial::default, Partial::merge);

    #[cfg(not(feature = "parallel"))]
    let partial = (0..1u64 << width)
        .map(|x| scan_operand(cfg, ignore_low_bits, x))
        .fold(Partial::default(), Partial::merge);

    Ok(stats_from(cfg, partial))
}

/// Exhaustive error statistics on the full-width result.
pub fn characterize_adder(cfg: &AdderConfig) -> Result<ErrorStats> {
    characterize_adder_ignoring(cfg, 0)
}

/// Single-threaded enumeration, kept available regardless of the `parallel`
/// feature so the bench suite can compare both paths in one build.
pub fn characterize_adder_serial(cfg: &AdderConfig) -> Result<ErrorStats> {
    check_width(cfg)?;
    let partial = (0..1u64 << cfg.width())
        .map(|x| scan_operand(cfg, 0, x))
        .fold(Partial::default(), Partial::merge);
    Ok(stats_from(cfg, partial))
}

/// Counts adder cells by kind and comparator bits before/after dropping the
/// k low bits.
pub fn cost_model(cfg: &AdderConfig, comparator_width: usize, k: usize) -> Result<CostReport> {
    if k >= comparator_width {
        return Err(Error::Config(format!(
            "cannot ignore {k} LSBs of a {comparator_width}-bit comparator"
        )));
    }
    let count = |kind| cfg.cells().iter().filter(|&&c| c == kind).count();
    let truncated = comparator_width - k;
    Ok(CostReport {
        exact_cells: count(CellKind::Exact),
        carry_only_cells: count(CellKind::CarryOnly),
        approx_cells: count(CellKind::ApproxLOA),
        comparator_bits_exact: comparator_width,
        comparator_bits_truncated: truncated,
        comparator_reduction: k as f64 / comparator_width as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_exact_adder_has_zero_error() {
        let stats = characterize_adder(&AdderConfig::all_exact(8)).unwrap();
        assert_eq!(stats.error_rate, 0.0);
        assert_eq!(stats.max_error_distance, 0);
        assert_eq!(stats.total_cases, 65536);
    }

    #[test]
    fn carry_only_is_exact_on_surviving_bits() {
        let cfg = AdderConfig::with_prefix(8, CellKind::CarryOnly, 4).unwrap();
        let stats = characterize_adder_ignoring(&cfg, 4).unwrap();
        assert_eq!(stats.error_rate, 0.0);
        assert_eq!(stats.max_error_distance, 0);
    }

    #[test]
    fn loa_5_prefix_max_error_under_32() {
        let cfg = AdderConfig::with_prefix(8, CellKind::ApproxLOA, 5).unwrap();
        let stats = characterize_adder(&cfg).unwrap();
        assert!(stats.max_error_distance < 32);
    }

    #[test]
    fn characterization_is_deterministic() {
        let cfg = AdderConfig::with_prefix(8, CellKind::ApproxLOA, 5).unwrap();
        let a = characterize_adder(&cfg).unwrap();
        let b = characterize_adder(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn serial_and_default_paths_agree() {
        let cfg = AdderConfig::with_prefix(6, CellKind::ApproxLOA, 3).unwrap();
        assert_eq!(
            characterize_adder(&cfg).unwrap(),
            characterize_adder_serial(&cfg).unwrap()
        );
    }

    #[test]
    fn width_cap_is_enforced() {
        let cfg = AdderConfig::all_exact(13);
        assert!(matches!(characterize_adder(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn cost_model_reductions() {
        let cfg = AdderConfig::with_prefix(8, CellKind::ApproxLOA, 5).unwrap();
        let c = cost_model(&cfg, 12, 7).unwrap();
        assert_eq!(c.exact_cells, 3);
        assert_eq!(c.approx_cells, 5);
        assert_eq!(c.comparator_bits_truncated, 5);
        assert!((c.comparator_reduction - 7.0 / 12.0).abs() < 1e-12);

        let c = cost_model(&cfg, 8, 5).unwrap();
        assert_eq!(c.comparator_bits_truncated, 3);
        assert_eq!(c.comparator_reduction, 1.0 - 3.0 / 8.0);

        let c = cost_model(&cfg, 8, 0).unwrap();
        assert_eq!(c.comparator_reduction, 0.0);
    }

    #[test]
    fn reduction_exceeds_half_when_k_beyond_half_width() {
        let cfg = AdderConfig::all_exact(8);
        for width in 2..=12usize {
            for k in width / 2 + 1..width {
                let c = cost_model(&cfg, width, k).unwrap();
                assert!(c.comparator_reduction > 0.5, "width={width} k={k}");
            }
        }
    }
}
