//! Periodic orthogonal discrete wavelet transform (pyramidal algorithm).
//!
//! A decomposition of a length `n = 2^J` signal over `L` levels stores the
//! scaling block (`2^(J-L)` coefficients) and detail blocks for resolution
//! levels `j = J-L..J-1`, block `j` holding `2^j` coefficients. The flat
//! layout used by [`WaveletDecomposition::to_flat`] and [`dwt_matrix`] is
//! coarsest first: scaling block, then detail blocks by increasing `j`.

mod filters;

use std::io::{self, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use filters::WaveletFilter;

use crate::error::{Error, Result};
use crate::series::is_power_of_two;

/// Largest size accepted by [`dwt_matrix`].
pub const MAX_MATRIX_SIZE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDecomposition {
    n: usize,
    coarsest_level: usize,
    scaling: Vec<f64>,
    details: Vec<Vec<f64>>,
    filter: WaveletFilter,
}

impl WaveletDecomposition {
    /// Builds a decomposition from its blocks, checking the dyadic sizes.
    /// `details[i]` is the block of resolution level `coarsest_level + i`.
    pub fn from_parts(
        scaling: Vec<f64>,
        details: Vec<Vec<f64>>,
        filter: WaveletFilter,
    ) -> Result<Self> {
        let coarse = scaling.len();
        if !is_power_of_two(coarse) {
            return Err(Error::length(coarse, "scaling block must have 2^k entries"));
        }
        let coarsest_level = coarse.trailing_zeros() as usize;
        for (i, block) in details.iter().enumerate() {
            let expected = 1usize << (coarsest_level + i);
            if block.len() != expected {
                return Err(Error::length(
                    block.len(),
                    format!(
                        "detail block for level {} must have {expected} entries",
                        coarsest_level + i
                    ),
                ));
            }
        }
        let n = coarse << details.len();
        Ok(WaveletDecomposition {
            n,
            coarsest_level,
            scaling,
            details,
            filter,
        })
    }

    /// Length of the transformed signal.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `J` with `n = 2^J`.
    pub fn max_level(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn coarsest_level(&self) -> usize {
        self.coarsest_level
    }

    pub fn filter(&self) -> &WaveletFilter {
        &self.filter
    }

    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    pub fn scaling_mut(&mut self) -> &mut [f64] {
        &mut self.scaling
    }

    /// Detail block of resolution level `j`, if present.
    pub fn detail(&self, j: usize) -> Option<&[f64]> {
        j.checked_sub(self.coarsest_level)
            .and_then(|i| self.details.get(i))
            .map(Vec::as_slice)
    }

    pub fn detail_mut(&mut self, j: usize) -> Option<&mut [f64]> {
        j.checked_sub(self.coarsest_level)
            .and_then(|i| self.details.get_mut(i))
            .map(Vec::as_mut_slice)
    }

    /// `(j, block)` pairs from coarsest to finest.
    pub fn details(&self) -> impl Iterator<Item = (usize, &[f64])> {
        let base = self.coarsest_level;
        self.details
            .iter()
            .enumerate()
            .map(move |(i, b)| (base + i, b.as_slice()))
    }

    pub fn details_mut(&mut self) -> impl Iterator<Item = (usize, &mut Vec<f64>)> {
        let base = self.coarsest_level;
        self.details
            .iter_mut()
            .enumerate()
            .map(move |(i, b)| (base + i, b))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n);
        out.extend_from_slice(&self.scaling);
        for block in &self.details {
            out.extend_from_slice(block);
        }
        out
    }

    /// Inverse of [`to_flat`](Self::to_flat) for a given level count.
    pub fn from_flat(flat: &[f64], levels: usize, filter: WaveletFilter) -> Result<Self> {
        check_levels(flat.len(), levels)?;
        let coarse = flat.len() >> levels;
        let scaling = flat[..coarse].to_vec();
        let mut details = Vec::with_capacity(levels);
        let mut start = coarse;
        for i in 0..levels {
            let len = coarse << i;
            details.push(flat[start..start + len].to_vec());
            start += len;
        }
        Self::from_parts(scaling, details, filter)
    }

    pub fn energy(&self) -> f64 {
        self.scaling
            .iter()
            .chain(self.details.iter().flatten())
            .map(|v| v * v)
            .sum()
    }

    /// Writes `level,index,value` rows. The scaling block comes first with
    /// `level` set to `scaling`; detail rows follow by increasing level and
    /// index. Values use the shortest round-trip decimal form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "level,index,value")?;
        for (k, v) in self.scaling.iter().enumerate() {
            writeln!(w, "scaling,{k},{v:?}")?;
        }
        for (j, block) in self.details() {
            for (k, v) in block.iter().enumerate() {
                writeln!(w, "{j},{k},{v:?}")?;
            }
        }
        Ok(())
    }
}

fn check_levels(n: usize, levels: usize) -> Result<()> {
    if !is_power_of_two(n) || n < 2 {
        return Err(Error::NotPowerOfTwo { len: n });
    }
    let max = n.trailing_zeros() as usize;
    if levels == 0 || levels > max {
        return Err(Error::Invalid(format!(
            "level count {levels} out of range 1..={max} for length {n}"
        )));
    }
    Ok(())
}

/// Full-depth transform: `log2(n)` levels, one scaling coefficient.
pub fn dwt_full(signal: &[f64], filter: &WaveletFilter) -> Result<WaveletDecomposition> {
    if !is_power_of_two(signal.len()) || signal.len() < 2 {
        return Err(Error::NotPowerOfTwo { len: signal.len() });
    }
    dwt(signal, filter, signal.len().trailing_zeros() as usize)
}

/// Forward transform over `levels` levels with periodic boundaries.
pub fn dwt(signal: &[f64], filter: &WaveletFilter, levels: usize) -> Result<WaveletDecomposition> {
    check_levels(signal.len(), levels)?;
    let h = filter.lowpass();
    let g = filter.highpass();
    let mut approx = signal.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let m = approx.len();
        let half = m / 2;
        let mut a = vec![0.0; half];
        let mut d = vec![0.0; half];
        for k in 0..half {
            let (mut s, mut t) = (0.0, 0.0);
            for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
                let x = approx[(2 * k + i) % m];
                s += hi * x;
                t += gi * x;
            }
            a[k] = s;
            d[k] = t;
        }
        details.push(d);
        approx = a;
    }
    details.reverse();
    WaveletDecomposition::from_parts(approx, details, filter.clone())
}

/// Inverse transform (synthesis), the transpose of [`dwt`].
pub fn idwt(decomp: &WaveletDecomposition) -> Result<Vec<f64>> {
    let h = decomp.filter.lowpass();
    let g = decomp.filter.highpass();
    let mut approx = decomp.scaling.clone();
    for d in &decomp.details {
        if d.len() != approx.len() {
            return Err(Error::length(d.len(), "inconsistent detail block size"));
        }
        let m = 2 * approx.len();
        let mut out = vec![0.0; m];
        for (k, (&a, &dk)) in approx.iter().zip(d).enumerate() {
            for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
                out[(2 * k + i) % m] += hi * a + gi * dk;
            }
        }
        approx = out;
    }
    Ok(approx)
}

/// Dense `n x n` transform matrix `W` with `dwt(x).to_flat() == W x`.
///
/// Built row by row from the basis vectors: the approximation rows of a stage
/// are filtered by the periodized, downsampled lowpass and highpass operators.
/// Intended as a test oracle.
pub fn dwt_matrix(n: usize, filter: &WaveletFilter, levels: usize) -> Result<DMatrix<f64>> {
    if n > MAX_MATRIX_SIZE {
        return Err(Error::length(
            n,
            format!("dense transform matrix limited to n <= {MAX_MATRIX_SIZE}"),
        ));
    }
    check_levels(n, levels)?;
    // Work with transposes so that every row operation touches a contiguous
    // column of column-major storage.
    let mut approx_t = DMatrix::<f64>::identity(n, n);
    // finest first; reversed at the end
    let mut detail_t: Vec<DMatrix<f64>> = Vec::with_capacity(levels);
    for _ in 0..levels {
        detail_t.push(stage_t(&approx_t, filter.highpass()));
        approx_t = stage_t(&approx_t, filter.lowpass());
    }
    let mut w_t = DMatrix::<f64>::zeros(n, n);
    let mut col = 0;
    for block in std::iter::once(&approx_t).chain(detail_t.iter().rev()) {
        w_t.columns_mut(col, block.ncols()).copy_from(block);
        col += block.ncols();
    }
    Ok(w_t.transpose())
}

/// Transpose of the `(m/2) x m` periodized filter-and-downsample operator
/// applied to `A`, given `A^T` (with `m` columns). Row `k` of the operator
/// holds `taps[i]` in column `(2k + i) mod m`.
fn stage_t(a_t: &DMatrix<f64>, taps: &[f64]) -> DMatrix<f64> {
    let m = a_t.ncols();
    let rows = a_t.nrows();
    let src = a_t.as_slice();
    let mut out = DMatrix::<f64>::zeros(rows, m / 2);
    for (k, dst) in out.as_mut_slice().chunks_exact_mut(rows).enumerate() {
        for (i, &t) in taps.iter().enumerate() {
            let c = (2 * k + i) % m;
            for (d, s) in dst.iter_mut().zip(&src[c * rows..(c + 1) * rows]) {
                *d += t * s;
            }
        }
    }
    out
}
