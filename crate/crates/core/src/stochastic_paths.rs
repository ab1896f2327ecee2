//! Seeded ensembles of independent standard Brownian motions on uniform
//! time grids.
//!
//! Paths are stored as values at the grid points and built level by level:
//! level 0 draws the increments of the requested grid directly, and each
//! refinement halves the step by inserting Brownian-bridge midpoints,
//!
//! ```text
//! B((t_j + t_{j+1})/2) = (B(t_j) + B(t_{j+1}))/2 + xi,   xi ~ N(0, h/4).
//! ```
//!
//! Values at existing grid points are copied verbatim, so a refined ensemble
//! agrees with its parent bit for bit on the coarse grid. Every
//! (path, dimension, level) triple owns its own counter-derived RNG stream,
//! which makes generation order irrelevant: paths can be produced in
//! parallel, and regenerating with the same seed reproduces the same values.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid t_j = j * h on [0, t_end] with h = t_end / n_steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 || !t_end.is_finite() || t_end <= 0.0 {
            return Err(Error::EmptyGrid { t_end, n_steps });
        }
        Ok(Self { t_end, n_steps })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Step size h = t_end / n_steps.
    pub fn step(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    /// Grid point t_j = j * h.
    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.step()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|j| self.time(j))
    }

    /// Same horizon with twice as many steps.
    pub fn refined(&self) -> Self {
        Self {
            t_end: self.t_end,
            n_steps: self.n_steps * 2,
        }
    }
}

/// splitmix64 finalizer, used to derive independent stream seeds.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for the stream identified by (path, dim, level)
/// under a master seed. Distinct tags land in distinct streams, so the order
/// in which streams are consumed cannot matter.
pub(crate) fn stream_seed(master: u64, path: u64, dim: u64, level: u64) -> u64 {
    let mut x = master ^ 0x6C62_272E_07BB_0142;
    for tag in [path, dim, level] {
        x = mix64(
            x.rotate_left(23) ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
    }
    x
}

/// A seeded collection of `n_paths` independent n-dimensional Brownian
/// motions sampled on a uniform grid.
///
/// Immutable after construction; all read access is safe to share across
/// threads. `refine` returns a new ensemble on the halved grid whose values
/// at the coarse grid points are bit-identical to this one's.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianEnsemble {
    n_dims: usize,
    n_paths: usize,
    grid: TimeGrid,
    seed: u64,
    level: u32,
    /// Path values in (path, dim, grid point) order; `n_steps + 1` points
    /// per (path, dim) row, starting at B(0) = 0.
    values: Vec<f64>,
}

impl BrownianEnsemble {
    /// Draws a fresh ensemble. Increment (path, dim, j) is Normal(0, h).
    pub fn generate(n_dims: usize, grid: TimeGrid, n_paths: usize, seed: u64) -> Result<Self> {
        if n_dims == 0 {
            return Err(Error::InvalidCount {
                what: "n_dims",
                min: 1,
                got: n_dims,
            });
        }
        if n_paths == 0 {
            return Err(Error::InvalidCount {
                what: "n_paths",
                min: 1,
                got: n_paths,
            });
        }
        let points = grid.n_steps() + 1;
        let sd = grid.step().sqrt();
        let mut values = vec![0.0_f64; n_paths * n_dims * points];
        values
            .par_chunks_mut(n_dims * points)
            .enumerate()
            .for_each(|(path, chunk)| {
                for dim in 0..n_dims {
                    let row = &mut chunk[dim * points..(dim + 1) * points];
                    let mut rng =
                        ChaCha12Rng::seed_from_u64(stream_seed(seed, path as u64, dim as u64, 0));
                    let mut acc = 0.0;
                    row[0] = 0.0;
                    for value in row.iter_mut().skip(1) {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        acc += sd * g;
                        *value = acc;
                    }
                }
            });
        Ok(Self {
            n_dims,
            n_paths,
            grid,
            seed,
            level: 0,
            values,
        })
    }

    /// Rebuilds an ensemble from dumped increments (see [`dump_increments`]),
    /// in (path, dim, step) order. Values are the prefix sums of the data.
    ///
    /// [`dump_increments`]: BrownianEnsemble::dump_increments
    pub fn from_increments(
        n_dims: usize,
        grid: TimeGrid,
        n_paths: usize,
        increments: &[f64],
    ) -> Result<Self> {
        if n_dims == 0 || n_paths == 0 {
            return Err(Error::InvalidCount {
                what: "n_dims and n_paths",
                min: 1,
                got: 0,
            });
        }
        let expected = n_paths * n_dims * grid.n_steps();
        if increments.len() != expected {
            return Err(Error::ReplayLength {
                expected,
                actual: increments.len(),
            });
        }
        let points = grid.n_steps() + 1;
        let mut values = vec![0.0_f64; n_paths * n_dims * points];
        for path in 0..n_paths {
            for dim in 0..n_dims {
                let src = (path * n_dims + dim) * grid.n_steps();
                let dst = (path * n_dims + dim) * points;
                let mut acc = 0.0;
                for j in 0..grid.n_steps() {
                    acc += increments[src + j];
                    values[dst + j + 1] = acc;
                }
            }
        }
        Ok(Self {
            n_dims,
            n_paths,
            grid,
            seed: 0,
            level: 0,
            values,
        })
    }

    /// Halves the step by Brownian-bridge midpoint insertion. Values at the
    /// coarse grid points carry over bit-identically.
    pub fn refine(&self) -> Self {
        let fine = self.grid.refined();
        let coarse_points = self.grid.n_steps() + 1;
        let fine_points = fine.n_steps() + 1;
        // Bridge midpoint over a step of length h has deviation N(0, h/4).
        let sd = (self.grid.step() / 4.0).sqrt();
        let mut values = vec![0.0_f64; self.n_paths * self.n_dims * fine_points];
        values
            .par_chunks_mut(self.n_dims * fine_points)
            .enumerate()
            .for_each(|(path, chunk)| {
                for dim in 0..self.n_dims {
                    let src = (path * self.n_dims + dim) * coarse_points;
                    let old = &self.values[src..src + coarse_points];
                    let row = &mut chunk[dim * fine_points..(dim + 1) * fine_points];
                    let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(
                        self.seed,
                        path as u64,
                        dim as u64,
                        u64::from(self.level) + 1,
                    ));
                    for j in 0..self.grid.n_steps() {
                        let xi: f64 = StandardNormal.sample(&mut rng);
                        row[2 * j] = old[j];
                        row[2 * j + 1] = 0.5 * (old[j] + old[j + 1]) + sd * xi;
                    }
                    row[fine.n_steps()] = old[self.grid.n_steps()];
                }
            });
        Self {
            n_dims: self.n_dims,
            n_paths: self.n_paths,
            grid: fine,
            seed: self.seed,
            level: self.level + 1,
            values,
        }
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of refinements applied since generation.
    pub fn refinement_level(&self) -> u32 {
        self.level
    }

    /// B^dim_{t_j} on the given path.
    pub fn value(&self, path: usize, dim: usize, point: usize) -> f64 {
        debug_assert!(path < self.n_paths && dim < self.n_dims && point <= self.grid.n_steps());
        let points = self.grid.n_steps() + 1;
        self.values[(path * self.n_dims + dim) * points + point]
    }

    /// Increment over [t_j, t_{j+1}].
    pub fn increment(&self, path: usize, dim: usize, step: usize) -> f64 {
        self.value(path, dim, step + 1) - self.value(path, dim, step)
    }

    pub fn path(&self, index: usize) -> BrownianPath<'_> {
        assert!(index < self.n_paths, "path index out of range");
        BrownianPath {
            ensemble: self,
            index,
        }
    }

    pub fn paths(&self) -> impl Iterator<Item = BrownianPath<'_>> {
        (0..self.n_paths).map(move |index| self.path(index))
    }

    /// Writes all increments as little-endian f64 in (path, dim, step) order.
    pub fn dump_increments<W: std::io::Write>(&self, writer: &mut W) -> std::io::Result<()> {
        for path in 0..self.n_paths {
            for dim in 0..self.n_dims {
                for step in 0..self.grid.n_steps() {
                    writer.write_all(&self.increment(path, dim, step).to_le_bytes())?;
                }
            }
        }
        Ok(())
    }
}

/// Read-only view of one path of an ensemble.
#[derive(Debug, Clone, Copy)]
pub struct BrownianPath<'a> {
    ensemble: &'a BrownianEnsemble,
    index: usize,
}

impl<'a> BrownianPath<'a> {
    pub fn grid(&self) -> TimeGrid {
        self.ensemble.grid()
    }

    pub fn n_dims(&self) -> usize {
        self.ensemble.n_dims()
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn value(&self, dim: usize, point: usize) -> f64 {
        self.ensemble.value(self.index, dim, point)
    }

    pub fn increment(&self, dim: usize, step: usize) -> f64 {
        self.ensemble.increment(self.index, dim, step)
    }

    /// Copies the state vector (B^1_{t_j}, ..., B^n_{t_j}) into `out`.
    pub fn write_state(&self, point: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_dims());
        for (dim, slot) in out.iter_mut().enumerate() {
            *slot = self.value(dim, point);
        }
    }
}
