use crate::error::{Error, Result};
use crate::geo::{from_complex, segment, to_complex, Trajectory};
use crate::spectral::{fft_forward, ifft_inverse};

use super::WatermarkSpec;

/// Embeds `spec` into `trajectory`.
///
/// Each full block is mapped to the complex plane and transformed; the
/// amplitudes are shifted by `strength * w` and the block is rebuilt from the
/// shifted amplitudes and the original phases. Tail points and all
/// timestamps are copied unchanged.
pub fn embed(trajectory: &Trajectory, spec: &WatermarkSpec) -> Result<Trajectory> {
    spec.validate()?;
    let segments = segment(trajectory.points(), spec.block_size)?;
    if segments.block_count() != spec.block_count() {
        return Err(Error::domain(format!(
            "trajectory {:?} has {} blocks but the watermark has {}",
            trajectory.id(),
            segments.block_count(),
            spec.block_count()
        )));
    }

    let mut out = Vec::with_capacity(trajectory.len());
    for (block, w) in segments.iter().zip(&spec.per_block) {
        let mut spectrum = fft_forward(&to_complex(block))?;
        for (a, &wk) in spectrum.amplitude.iter_mut().zip(w) {
            *a += spec.strength * f64::from(wk);
        }
        let values = ifft_inverse(&spectrum)?;
        let ts: Vec<i64> = block.iter().map(|p| p.t).collect();
        out.extend(from_complex(&values, &ts)?);
    }
    out.extend_from_slice(segments.tail);
    trajectory.with_points(out)
}
