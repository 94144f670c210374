//! Seeded synthetic designs with blocky predictors and a block of true
//! nonzero coefficients.
//!
//! Randomness comes from ChaCha8 seeded with the configured seed. Row `i`
//! of the design draws from stream `i + 1`; the response noise draws from
//! stream 0. Instances are therefore reproducible across platforms and a
//! row's content does not depend on how many other rows are generated.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::PenaltyGraph;

/// Size of the block (1D) or square side (2D) of ones in the true
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignalBlock {
    /// `min(100, ⌈p/10⌉)` in 1D; side 10 for grids of side ≥ 20, else
    /// `⌈side/3⌉`.
    #[default]
    Auto,
    Length(usize),
    /// All-zero true coefficients.
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    /// Coefficient count in 1D; grid side in 2D (`p²` coefficients).
    pub p: usize,
    pub sigma: f64,
    pub seed: u64,
    pub block: SignalBlock,
}

impl SimConfig {
    pub fn new(n: usize, p: usize, seed: u64) -> Self {
        SimConfig {
            n,
            p,
            sigma: 10.0,
            seed,
            block: SignalBlock::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "must be at least 1",
            });
        }
        if self.p < 2 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: "must be at least 2",
            });
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: "must be finite and non-negative",
            });
        }
        Ok(())
    }
}

/// A painted rectangle of one design row: rows `r0..r1` and columns
/// `c0..c1` of the coefficient layout (a single row in 1D), 0-based and
/// half-open after clipping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    pub r0: usize,
    pub r1: usize,
    pub c0: usize,
    pub c1: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimMetadata {
    pub seed: u64,
    pub n: usize,
    /// 1 or 2.
    pub dims: u8,
    /// Grid side in 2D, coefficient count in 1D.
    pub side: usize,
    pub sigma: f64,
    /// Length (1D) or side (2D) of the block of ones; 0 when off.
    pub block: usize,
    /// Patches painted into each design row, in drawing order.
    pub patches: Vec<Vec<Patch>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimInstance {
    pub x: Matrix,
    pub beta_true: Vec<f64>,
    pub y: Vec<f64>,
    pub graph: PenaltyGraph,
    pub metadata: SimMetadata,
}

/// Writes `patches` into a row laid out as `width` columns per layout row;
/// later patches overwrite earlier ones.
pub fn paint_patches(row: &mut [f64], width: usize, patches: &[Patch]) {
    for patch in patches {
        for r in patch.r0..patch.r1 {
            for c in patch.c0..patch.c1 {
                row[r * width + c] = patch.value;
            }
        }
    }
}

fn row_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    // the mean is finite and positive, so construction cannot fail
    let d = Poisson::new(mean).unwrap_or_else(|_| unreachable!());
    d.sample(rng) as usize
}

/// Draws a length ~ Poisson(mean) and a 1-based start uniform on
/// `{2 − len, …, side}`; returns the clipped 0-based half-open range.
fn draw_range(rng: &mut ChaCha8Rng, mean: f64, side: usize) -> (usize, usize) {
    let len = poisson(rng, mean) as i64;
    let start = rng.random_range((2 - len)..=side as i64);
    let lo = start.max(1) - 1;
    let hi = (start + len - 1).min(side as i64);
    let lo = lo as usize;
    let hi = (hi.max(lo as i64)) as usize;
    (lo, hi)
}

fn draw_value(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-3i32..=3) as f64
}

fn finish(
    config: &SimConfig,
    dims: u8,
    side: usize,
    rows: Vec<Vec<f64>>,
    patches: Vec<Vec<Patch>>,
    beta_true: Vec<f64>,
    block: usize,
    graph: PenaltyGraph,
) -> Result<SimInstance> {
    let x = Matrix::from_rows(&rows)?;
    let mut y = x.mul_vec(&beta_true);
    let mut noise = row_rng(config.seed, 0);
    for yi in y.iter_mut() {
        let e: f64 = StandardNormal.sample(&mut noise);
        *yi += config.sigma * e;
    }
    Ok(SimInstance {
        x,
        beta_true,
        y,
        graph,
        metadata: SimMetadata {
            seed: config.seed,
            n: config.n,
            dims,
            side,
            sigma: config.sigma,
            block,
            patches,
        },
    })
}

/// One-dimensional design over a chain graph.
pub fn gen_1d(config: &SimConfig) -> Result<SimInstance> {
    config.validate()?;
    let p = config.p;
    let root = libm::sqrt(p as f64);
    let mut rows = Vec::with_capacity(config.n);
    let mut all_patches = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let mut rng = row_rng(config.seed, i as u64 + 1);
        let count = poisson(&mut rng, root / 2.0);
        let mut patches = Vec::with_capacity(count);
        for _ in 0..count {
            let (c0, c1) = draw_range(&mut rng, root, p);
            let value = draw_value(&mut rng);
            patches.push(Patch {
                r0: 0,
                r1: 1,
                c0,
                c1,
                value,
            });
        }
        let mut row = vec![0.0; p];
        paint_patches(&mut row, p, &patches);
        for v in row.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *v += g;
        }
        rows.push(row);
        all_patches.push(patches);
    }
    let block = match config.block {
        SignalBlock::Auto => p.div_ceil(10).min(100),
        SignalBlock::Length(l) => l.min(p),
        SignalBlock::Off => 0,
    };
    let mut beta_true = vec![0.0; p];
    let start = (p - block) / 2;
    for b in &mut beta_true[start..start + block] {
        *b = 1.0;
    }
    finish(config, 1, p, rows, all_patches, beta_true, block, PenaltyGraph::chain(p))
}

/// Two-dimensional design over a `p × p` four-neighbour grid, coefficients
/// in row-major order.
pub fn gen_2d(config: &SimConfig) -> Result<SimInstance> {
    config.validate()?;
    let side = config.p;
    let q = side * side;
    let root = libm::sqrt(side as f64);
    let mut rows = Vec::with_capacity(config.n);
    let mut all_patches = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let mut rng = row_rng(config.seed, i as u64 + 1);
        let count = poisson(&mut rng, root);
        let mut patches = Vec::with_capacity(count);
        for _ in 0..count {
            let (r0, r1) = draw_range(&mut rng, root, side);
            let (c0, c1) = draw_range(&mut rng, root, side);
            let value = draw_value(&mut rng);
            patches.push(Patch {
                r0,
                r1,
                c0,
                c1,
                value,
            });
        }
        let mut row = vec![0.0; q];
        paint_patches(&mut row, side, &patches);
        for v in row.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *v += g;
        }
        rows.push(row);
        all_patches.push(patches);
    }
    let block = match config.block {
        SignalBlock::Auto if side >= 20 => 10,
        SignalBlock::Auto => side.div_ceil(3),
        SignalBlock::Length(l) => l.min(side),
        SignalBlock::Off => 0,
    };
    let mut beta_true = vec![0.0; q];
    let start = (side / 2).saturating_sub(block / 2).min(side - block);
    for r in start..start + block {
        for c in start..start + block {
            beta_true[r * side + c] = 1.0;
        }
    }
    finish(config, 2, side, rows, all_patches, beta_true, block, PenaltyGraph::grid(side))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_signal_zero_noise() {
        let cfg = SimConfig {
            sigma: 0.0,
            block: SignalBlock::Off,
            ..SimConfig::new(5, 30, 3)
        };
        let sim = gen_1d(&cfg).unwrap();
        assert!(sim.y.iter().all(|v| *v == 0.0));
        assert!(sim.beta_true.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn deterministic() {
        let cfg = SimConfig::new(7, 40, 11);
        assert_eq!(gen_1d(&cfg).unwrap(), gen_1d(&cfg).unwrap());
        let cfg = SimConfig::new(4, 6, 11);
        assert_eq!(gen_2d(&cfg).unwrap(), gen_2d(&cfg).unwrap());
        let other = SimConfig::new(7, 40, 12);
        assert_ne!(gen_1d(&SimConfig::new(7, 40, 11)).unwrap().x, gen_1d(&other).unwrap().x);
    }

    #[test]
    fn rows_are_independent_streams() {
        let a = gen_1d(&SimConfig::new(3, 50, 5)).unwrap();
        let b = gen_1d(&SimConfig::new(6, 50, 5)).unwrap();
        for i in 0..3 {
            assert_eq!(a.x.row(i), b.x.row(i));
        }
    }

    #[test]
    fn block_sizes() {
        let sim = gen_1d(&SimConfig::new(2, 100, 1)).unwrap();
        assert_eq!(sim.beta_true.iter().filter(|b| **b == 1.0).count(), 10);
        assert_eq!(&sim.beta_true[45..55], &[1.0; 10]);
        let sim = gen_2d(&SimConfig::new(2, 20, 1)).unwrap();
        assert_eq!(sim.beta_true.iter().filter(|b| **b == 1.0).count(), 100);
        // 1-based p/2−4 ..= p/2+5
        for r in 0..20 {
            for c in 0..20 {
                let inside = (5..15).contains(&r) && (5..15).contains(&c);
                assert_eq!(sim.beta_true[r * 20 + c] == 1.0, inside);
            }
        }
        assert_eq!(gen_2d(&SimConfig::new(1, 3, 1)).unwrap().graph.edges().len(), 12);
    }

    #[test]
    fn later_patch_wins() {
        let mut row = vec![0.0; 6];
        let patches = [
            Patch { r0: 0, r1: 1, c0: 0, c1: 4, value: 2.0 },
            Patch { r0: 0, r1: 1, c0: 2, c1: 6, value: -3.0 },
        ];
        paint_patches(&mut row, 6, &patches);
        assert_eq!(row, vec![2.0, 2.0, -3.0, -3.0, -3.0, -3.0]);
    }

    #[test]
    fn patches_clipped() {
        let sim = gen_1d(&SimConfig::new(50, 30, 2)).unwrap();
        for row in &sim.metadata.patches {
            for p in row {
                assert!(p.c0 <= p.c1 && p.c1 <= 30);
                assert!((-3.0..=3.0).contains(&p.value) && p.value.fract() == 0.0);
            }
        }
    }
}
