use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block sizes of the stacked state `(w1, w2, w3, w4, w5)`: plate displacement
/// and velocity and temperature on the annulus, membrane displacement and
/// velocity on the disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n_annulus: usize,
    pub n_disk: usize,
}

impl Layout {
    pub fn new(n_annulus: usize, n_disk: usize) -> Self {
        Self { n_annulus, n_disk }
    }

    pub fn offsets(&self) -> [usize; 6] {
        let (a, d) = (self.n_annulus, self.n_disk);
        [0, a, 2 * a, 2 * a + d, 2 * a + 2 * d, 3 * a + 2 * d]
    }

    pub fn total(&self) -> usize {
        self.offsets()[5]
    }

    /// Index range of block `b` in `1..=5`.
    pub fn block(&self, b: usize) -> Range<usize> {
        assert!((1..=5).contains(&b), "blocks are numbered 1..=5");
        let o = self.offsets();
        o[b - 1]..o[b]
    }
}

/// One angular mode of the state, sampled at the radial nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub layout: Layout,
    pub data: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(layout: Layout) -> Self {
        Self {
            layout,
            data: vec![Complex64::new(0.0, 0.0); layout.total()],
        }
    }

    pub fn from_real(layout: Layout, data: &[f64]) -> Result<Self> {
        Self::from_complex(
            layout,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_complex(layout: Layout, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != layout.total() {
            return Err(Error::Usage(format!(
                "state has {} entries, layout expects {}",
                data.len(),
                layout.total()
            )));
        }
        Ok(Self { layout, data })
    }

    pub fn block(&self, b: usize) -> &[Complex64] {
        &self.data[self.layout.block(b)]
    }

    pub fn block_mut(&mut self, b: usize) -> &mut [Complex64] {
        let r = self.layout.block(b);
        &mut self.data[r]
    }

    pub fn re(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.im).collect()
    }
}
