//! Positive-expansivity analysis on reference rules, and sensitivity /
//! divergence experiments for the counter rule.
//!
//! The expansivity depth of a rule is the smallest horizon `N` such that
//! any two configurations agreeing on the far left half-line and centrally
//! indistinguishable for `N` steps must agree on the cells just right of
//! the centre. It is found by exhaustive search over the finite dependence
//! window; when it exists, influence must grow by one radius every `N`
//! steps, pinning the exponent curves above `radius / N`.
//!
//! Sensitivity experiments resize one counter at a chosen depth left of the
//! origin and watch the central three cells of both orbits; the asymptotic
//! emission-rate gap between the two length sequences is certified with
//! exact rational arithmetic.

use crate::automaton::{DrivenWindow, EMITTER};
use crate::engine::{orbit, Rule, Sym, WindowConfig};
use crate::lyapunov::{influence_bracket, AnyRule, LyapunovError, Side};
use crate::measures::{draw_length, MeasureError, MeasureParams};
use crate::model::{rate_from_lengths, ChainedOrbit, Counter, ModelError};
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpansivityError {
    #[error("depth search cap must be positive")]
    BadCap,
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Automaton(#[from] crate::automaton::AutomatonError),
}

/// Result of the exhaustive depth search.
#[derive(Debug, Clone)]
pub struct ExpansivityReport {
    /// Smallest working horizon, when one exists below the cap.
    pub depth: Option<u32>,
    /// `(radius, depth)`: the certified exponent floor `radius / depth`.
    pub rate_bound: Option<(u32, u32)>,
    pub cap: u32,
    /// Pairs enumerated across all horizons (certificate size).
    pub pairs_checked: u64,
    pub rule_name: String,
}

/// Exhaustively searches for the expansivity depth of a symmetric-radius
/// rule: for each horizon `N`, enumerates every pair over the dependence
/// window that agrees left of `-radius` and checks that central agreement
/// through `N` steps forces agreement on `[radius, 2 radius]`.
pub fn find_depth(rule: &dyn Rule, cap: u32) -> Result<ExpansivityReport, ExpansivityError> {
    if cap == 0 {
        return Err(ExpansivityError::BadCap);
    }
    let r = rule.left_radius().max(rule.right_radius()) as i64;
    let a = rule.alphabet();
    let m = a.size() as usize;
    let mut pairs_checked = 0u64;

    'horizon: for n in 1..=cap {
        let span_lo = -r - n as i64 * r;
        let span_hi = r + n as i64 * r;
        let width = (span_hi - span_lo + 1) as usize;
        let free_lo = -r; // y may differ from x only at coordinates >= -r
        let free_base = (free_lo - span_lo) as usize;
        let y_width = (span_hi - free_lo + 1) as usize;
        let x_total = m.pow(width as u32);
        let y_total = m.pow(y_width as u32);

        for xi in 0..x_total {
            let mut rest = xi;
            let mut x_cells = vec![0 as Sym; width];
            for slot in x_cells.iter_mut() {
                *slot = (rest % m) as Sym;
                rest /= m;
            }
            let x = WindowConfig::new(span_lo, x_cells.clone());
            let x_orbit = orbit(&x, rule, n).expect("window sized for the horizon");

            'ys: for yi in 0..y_total {
                let mut rest = yi;
                let mut y_cells = x_cells.clone();
                let mut differs = false;
                for k in 0..y_width {
                    let sym = (rest % m) as Sym;
                    rest /= m;
                    if y_cells[free_base + k] != sym {
                        differs = true;
                    }
                    y_cells[free_base + k] = sym;
                }
                if !differs {
                    continue;
                }
                pairs_checked += 1;
                let y = WindowConfig::new(span_lo, y_cells);
                let mut yrow = y.clone();
                for step in 1..=n {
                    yrow = yrow.step(rule).expect("window sized for the horizon");
                    let xrow = &x_orbit.rows[step as usize];
                    for c in -r..=r {
                        if xrow.get(c) != yrow.get(c) {
                            continue 'ys;
                        }
                    }
                }
                // Central agreement held; the conclusion must too, or this
                // horizon fails.
                for c in r..=2 * r {
                    if x.get(c) != y.get(c) {
                        continue 'horizon;
                    }
                }
            }
        }
        return Ok(ExpansivityReport {
            depth: Some(n),
            rate_bound: Some((rule.left_radius() as u32, n)),
            cap,
            pairs_checked,
            rule_name: rule.name().to_owned(),
        });
    }
    Ok(ExpansivityReport {
        depth: None,
        rate_bound: None,
        cap,
        pairs_checked,
        rule_name: rule.name().to_owned(),
    })
}

#[derive(Debug, Clone)]
pub enum GrowthOutcome {
    /// Every tested horizon met the `(t+1) * radius` floor; entries are
    /// `(t, n, certified lower)`.
    Pass { checks: Vec<(u32, u32, u32)> },
    Fail { t: u32, n: u32, lower: u32 },
    /// No depth to test against (rule not positively expansive).
    NotApplicable,
}

/// Verifies, through witness-backed lower brackets, that influence grows by
/// at least one radius per depth period: `I_(t N) >= (t+1) radius` on the
/// minus side for `t = 1..=t_max`.
pub fn growth_check(
    rule: &AnyRule,
    report: &ExpansivityReport,
    x: &WindowConfig,
    t_max: u32,
) -> Result<GrowthOutcome, ExpansivityError> {
    let Some(depth) = report.depth else {
        return Ok(GrowthOutcome::NotApplicable);
    };
    let radius = rule.as_rule().left_radius() as u32;
    let mut checks = Vec::new();
    for t in 1..=t_max {
        let n = t * depth;
        let b = influence_bracket(x, rule, n, Side::Minus, 2)?;
        if b.lower < (t + 1) * radius {
            return Ok(GrowthOutcome::Fail {
                t,
                n,
                lower: b.lower,
            });
        }
        checks.push((t, n, b.lower));
    }
    Ok(GrowthOutcome::Pass { checks })
}

/// A digit block: length and the value its digits encode (LSB leftmost).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitBlock {
    pub len: u8,
    pub value: u64,
}

impl DigitBlock {
    pub fn cells(&self) -> Vec<Sym> {
        (0..self.len).map(|k| ((self.value >> k) & 1) as Sym).collect()
    }
}

fn draw_block(params: &MeasureParams, rng: &mut impl Rng) -> DigitBlock {
    let len = draw_length(params, rng);
    DigitBlock {
        len,
        value: rng.gen_range(0..(1u64 << len)),
    }
}

fn draw_chain(
    params: &MeasureParams,
    rng: &mut impl Rng,
    chain_len: usize,
) -> Result<Vec<Counter>, ModelError> {
    (0..chain_len)
        .map(|_| {
            let l = draw_length(params, rng);
            let state = rng.gen_range(0..(1u64 << l));
            Counter::new(l, state, 0)
        })
        .collect()
}

fn assemble(
    chain: &[Counter],
    left_blocks: &[DigitBlock],
    right_blocks: &[DigitBlock],
) -> Result<ChainedOrbit, ExpansivityError> {
    let mut cells = Vec::new();
    for b in left_blocks {
        cells.push(EMITTER);
        cells.extend(b.cells());
    }
    let anchor_to_origin = cells.len() as i64; // origin emitter position
    cells.push(EMITTER);
    for b in right_blocks {
        cells.extend(b.cells());
        cells.push(EMITTER);
    }
    let window = DrivenWindow::new(-anchor_to_origin, cells)?;
    Ok(ChainedOrbit::new(chain.to_vec(), window))
}

/// A resize experiment: hidden chain counters, window blocks left of the
/// origin emitter (which sits at coordinate 0), and blocks right of it.
/// The perturbed copy resizes the window block `depth` places left of the
/// origin emitter, preserving its digit value modulo the new capacity.
#[derive(Debug, Clone)]
pub struct ResizeExperiment {
    pub chain: Vec<Counter>,
    pub left_blocks: Vec<DigitBlock>,
    pub right_blocks: Vec<DigitBlock>,
    /// 1 = the block directly left of the origin emitter.
    pub depth: usize,
    pub new_length: u8,
}

impl ResizeExperiment {
    pub fn sample(
        params: &MeasureParams,
        rng: &mut impl Rng,
        chain_len: usize,
        left: usize,
        right: usize,
        depth: usize,
        delta: i8,
    ) -> Result<Self, ExpansivityError> {
        assert!(depth >= 1 && depth <= left, "depth must address a window block");
        let chain = draw_chain(params, rng, chain_len)?;
        let left_blocks: Vec<DigitBlock> = (0..left).map(|_| draw_block(params, rng)).collect();
        let right_blocks: Vec<DigitBlock> = (0..right).map(|_| draw_block(params, rng)).collect();
        let old = left_blocks[left - depth].len;
        let new_length = (old as i16 + delta as i16).clamp(3, 60) as u8;
        Ok(ResizeExperiment {
            chain,
            left_blocks,
            right_blocks,
            depth,
            new_length,
        })
    }

    fn resized_blocks(&self) -> Vec<DigitBlock> {
        let mut blocks = self.left_blocks.clone();
        let idx = blocks.len() - self.depth;
        let old = blocks[idx];
        let cap = 1u64 << self.new_length.min(62);
        blocks[idx] = DigitBlock {
            len: self.new_length,
            value: old.value % cap,
        };
        blocks
    }

    /// Length sequences leftward from the counter right of the origin
    /// emitter (`[l_0, l_-1, ...]`), base and resized.
    pub fn length_sequences(&self) -> (Vec<u8>, Vec<u8>) {
        let leftward = |blocks: &[DigitBlock]| -> Vec<u8> {
            let mut lens: Vec<u8> = vec![self.right_blocks[0].len];
            lens.extend(blocks.iter().rev().map(|b| b.len));
            lens.extend(self.chain.iter().rev().map(|c| c.len()));
            lens
        };
        (
            leftward(&self.left_blocks),
            leftward(&self.resized_blocks()),
        )
    }
}

#[derive(Debug, Clone)]
pub struct DivergenceRecord {
    /// Model index of the resized counter, relative to the counter right of
    /// the origin emitter (always negative).
    pub depth_index: i64,
    pub old_length: u8,
    pub new_length: u8,
    /// Cells at coordinates >= this agree between the pair.
    pub agreement_from: i64,
    /// First step with a difference in the central cells `(-1, 0, 1)`.
    pub diverged_at: Option<u32>,
    pub horizon: u32,
    /// Exact-rational certificate that the asymptotic emission rates
    /// differ.
    pub gap_certified_positive: bool,
    pub gap_lower_bound: f64,
}

/// Certified lower bound for the difference of two emission-rate series,
/// from exact partial sums and tail bounds; zero when the certified
/// intervals overlap.
pub fn rate_gap_lower(lengths_a: &[u8], lengths_b: &[u8]) -> Result<BigRational, ModelError> {
    let a = rate_from_lengths(lengths_a)?;
    let b = rate_from_lengths(lengths_b)?;
    let (hi, lo) = if a.value >= b.value { (a, b) } else { (b, a) };
    let gap = &hi.value - (&lo.value + &lo.truncation_error);
    if gap > BigRational::zero() {
        Ok(gap)
    } else {
        Ok(BigRational::zero())
    }
}

/// Runs the resized pair and reports the first central divergence together
/// with the exact rate-gap certificate.
pub fn divergence_after_resize(
    exp: &ResizeExperiment,
    t_max: u32,
) -> Result<DivergenceRecord, ExpansivityError> {
    let mut base = assemble(&exp.chain, &exp.left_blocks, &exp.right_blocks)?;
    let resized_blocks = exp.resized_blocks();
    let mut resized = assemble(&exp.chain, &resized_blocks, &exp.right_blocks)?;

    // Cells right of the resized block's digits coincide; the first
    // disagreement sits at the resized block's left emitter or beyond.
    let suffix_len: i64 = exp.left_blocks[exp.left_blocks.len() - exp.depth..]
        .iter()
        .map(|b| b.len as i64 + 1)
        .sum();
    let agreement_from = -suffix_len + 1;

    let mut diverged_at = None;
    for step in 1..=t_max {
        base.step()?;
        resized.step()?;
        if (-1..=1).any(|c| base.window().get(c) != resized.window().get(c)) {
            diverged_at = Some(step);
            break;
        }
    }

    let (lens_a, lens_b) = exp.length_sequences();
    let gap = rate_gap_lower(&lens_a, &lens_b)?;
    let old_length = exp.left_blocks[exp.left_blocks.len() - exp.depth].len;
    Ok(DivergenceRecord {
        depth_index: -(exp.depth as i64),
        old_length,
        new_length: exp.new_length,
        agreement_from,
        diverged_at,
        horizon: t_max,
        gap_certified_positive: gap > BigRational::zero(),
        gap_lower_bound: crate::model::rational_to_f64(&gap),
    })
}

/// Fraction of sampled pairs whose central cells diverge within the
/// horizon, the perturbed copy freshly resampling everything strictly left
/// of `depth` blocks (lengths, digits and the hidden chain).
#[derive(Debug, Clone)]
pub struct DivergenceStat {
    pub depth: usize,
    pub pairs: usize,
    pub diverged: usize,
    pub horizon: u32,
    pub divergence_steps: Vec<Option<u32>>,
}

impl DivergenceStat {
    pub fn fraction(&self) -> f64 {
        self.diverged as f64 / self.pairs as f64
    }
}

pub fn divergence_fraction(
    params: &MeasureParams,
    pairs: usize,
    depth: usize,
    t_max: u32,
    chain_len: usize,
    left: usize,
    right: usize,
) -> Result<DivergenceStat, ExpansivityError> {
    assert!(depth >= 1 && depth <= left);
    let mut diverged = 0usize;
    let mut steps = Vec::with_capacity(pairs);
    for i in 0..pairs {
        let mut rng = params.rng(40_000 + i as u64);
        let chain = draw_chain(params, &mut rng, chain_len)?;
        let left_blocks: Vec<DigitBlock> =
            (0..left).map(|_| draw_block(params, &mut rng)).collect();
        let right_blocks: Vec<DigitBlock> =
            (0..right).map(|_| draw_block(params, &mut rng)).collect();

        let fresh_chain = draw_chain(params, &mut rng, chain_len)?;
        let mut other_left = left_blocks.clone();
        for slot in other_left.iter_mut().take(left - depth + 1) {
            *slot = draw_block(params, &mut rng);
        }

        let mut a = assemble(&chain, &left_blocks, &right_blocks)?;
        let mut b = assemble(&fresh_chain, &other_left, &right_blocks)?;
        let mut hit = None;
        for step in 1..=t_max {
            a.step()?;
            b.step()?;
            if (-1..=1).any(|c| a.window().get(c) != b.window().get(c)) {
                hit = Some(step);
                break;
            }
        }
        if hit.is_some() {
            diverged += 1;
        }
        steps.push(hit);
    }
    Ok(DivergenceStat {
        depth,
        pairs,
        diverged,
        horizon: t_max,
        divergence_steps: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{rules, Alphabet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn additive_depth_is_two() {
        let report = find_depth(&rules::additive_binary(), 4).unwrap();
        assert_eq!(report.depth, Some(2));
        assert_eq!(report.rate_bound, Some((1, 2)));
        assert!(report.pairs_checked > 0);
    }

    #[test]
    fn identity_has_no_depth() {
        let report = find_depth(&rules::identity(Alphabet::binary(), 1), 4).unwrap();
        assert_eq!(report.depth, None);
    }

    #[test]
    fn shift_has_no_depth() {
        let report = find_depth(&rules::shift_right(Alphabet::binary()), 6).unwrap();
        assert_eq!(report.depth, None);
    }

    #[test]
    fn growth_check_additive_passes() {
        let rule = AnyRule::Table(rules::additive_binary());
        let report = find_depth(&rules::additive_binary(), 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = crate::measures::sample_bernoulli(8 * 16 + 9, -(4 * 16 + 4), &mut rng);
        match growth_check(&rule, &report, &x, 6).unwrap() {
            GrowthOutcome::Pass { checks } => {
                for (t, n, lower) in checks {
                    assert!(lower >= t + 1, "t={t} n={n} lower={lower}");
                }
            }
            other => panic!("expected pass, got {other:?}"),
        }
    }

    #[test]
    fn growth_check_all_zero_configuration() {
        let rule = AnyRule::Table(rules::additive_binary());
        let report = find_depth(&rules::additive_binary(), 4).unwrap();
        let x = WindowConfig::new(-(4 * 8 + 4), vec![0; 8 * 8 + 9]);
        assert!(matches!(
            growth_check(&rule, &report, &x, 4).unwrap(),
            GrowthOutcome::Pass { .. }
        ));
    }

    #[test]
    fn growth_check_identity_not_applicable() {
        let rule = AnyRule::Table(rules::identity(Alphabet::binary(), 1));
        let report = find_depth(&rules::identity(Alphabet::binary(), 1), 3).unwrap();
        let x = WindowConfig::new(-20, vec![0; 41]);
        assert!(matches!(
            growth_check(&rule, &report, &x, 3).unwrap(),
            GrowthOutcome::NotApplicable
        ));
    }

    #[test]
    fn resize_divergence_found_with_positive_gap() {
        let params = MeasureParams {
            seed: 5,
            ..Default::default()
        };
        let mut rng = params.rng(1);
        let exp = ResizeExperiment::sample(&params, &mut rng, 40, 6, 3, 1, 1).unwrap();
        let record = divergence_after_resize(&exp, 200_000).unwrap();
        assert!(record.gap_certified_positive);
        assert!(record.diverged_at.is_some(), "no divergence: {record:?}");

        // The certified gap respects the analytic margin: the common prefix
        // weight times 2^-len times 3/7.
        let (lens_a, _) = exp.length_sequences();
        let j = exp.depth; // position of the resized length in the sequence
        let prefix_exp: u64 = lens_a[..=j].iter().map(|&l| l as u64).sum();
        let k2 = 0.5f64.powi(prefix_exp as i32);
        assert!(
            record.gap_lower_bound >= k2 * (3.0 / 7.0) * 0.999,
            "gap {} below margin {}",
            record.gap_lower_bound,
            k2 * 3.0 / 7.0
        );
    }

    #[test]
    fn no_resize_means_no_divergence_and_zero_gap() {
        let params = MeasureParams {
            seed: 6,
            ..Default::default()
        };
        let mut rng = params.rng(2);
        let mut exp = ResizeExperiment::sample(&params, &mut rng, 20, 5, 3, 1, 0).unwrap();
        exp.new_length = exp.left_blocks[exp.left_blocks.len() - 1].len;
        let record = divergence_after_resize(&exp, 3000).unwrap();
        assert!(record.diverged_at.is_none());
        assert!(!record.gap_certified_positive);
        assert_eq!(record.gap_lower_bound, 0.0);
    }

    #[test]
    fn far_resize_with_short_horizon_is_censored() {
        let params = MeasureParams {
            seed: 7,
            ..Default::default()
        };
        let mut rng = params.rng(3);
        let exp = ResizeExperiment::sample(&params, &mut rng, 30, 20, 3, 20, 1).unwrap();
        let record = divergence_after_resize(&exp, 10).unwrap();
        // Twenty counters of blocking cannot be crossed in ten steps.
        assert!(record.diverged_at.is_none());
        assert_eq!(record.horizon, 10);
        assert!(record.gap_certified_positive);
    }

    #[test]
    fn divergence_records_replay_deterministically() {
        let params = MeasureParams {
            seed: 8,
            ..Default::default()
        };
        let mut rng = params.rng(4);
        let exp = ResizeExperiment::sample(&params, &mut rng, 30, 6, 3, 1, 1).unwrap();
        let a = divergence_after_resize(&exp, 50_000).unwrap();
        let b = divergence_after_resize(&exp, 50_000).unwrap();
        assert_eq!(a.diverged_at, b.diverged_at);
        assert_eq!(a.gap_lower_bound, b.gap_lower_bound);
    }

    #[test]
    fn divergence_fraction_monotone_in_horizon() {
        let params = MeasureParams {
            seed: 9,
            half_width: 20,
            ..Default::default()
        };
        let short = divergence_fraction(&params, 12, 1, 500, 20, 5, 3).unwrap();
        let long = divergence_fraction(&params, 12, 1, 5_000, 20, 5, 3).unwrap();
        assert!(long.diverged >= short.diverged);
    }
}
