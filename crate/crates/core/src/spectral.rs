//! Discrete Fourier transforms in amplitude/phase form.
//!
//! Convention: the forward transform is unnormalized,
//! `X[k] = sum_j c[j] exp(-2 pi i jk / n)`, and the inverse carries `1/n`.
//! The quadratic-time [`naive_dft`]/[`naive_idft`] pair evaluates the same
//! sums directly and serves as the reference for the fast path.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Polar form of a spectrum.
///
/// Transform outputs always have non-negative amplitude. A perturbed spectrum
/// handed to [`ifft_inverse`] may carry negative entries, which act as signed
/// magnitudes along the stored phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
}

impl Spectrum {
    /// Polar decomposition of complex bins. The phase of an exactly-zero bin is 0.
    pub fn from_bins(bins: &[Complex64]) -> Self {
        let (amplitude, phase) = bins
            .iter()
            .map(|b| {
                let a = b.norm();
                let p = if a == 0.0 { 0.0 } else { b.arg() };
                (a, p)
            })
            .unzip();
        Spectrum { amplitude, phase }
    }

    pub fn to_bins(&self) -> Vec<Complex64> {
        self.amplitude
            .iter()
            .zip(&self.phase)
            .map(|(&a, &p)| Complex64::from_polar(1.0, p) * a)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("transform of an empty sequence"))
    } else {
        Ok(())
    }
}

/// Fast forward transform of `c`.
pub fn fft_forward(c: &[Complex64]) -> Result<Spectrum> {
    check_len(c.len())?;
    let mut buf = c.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(&mut buf));
    Ok(Spectrum::from_bins(&buf))
}

/// Fast inverse transform, including the `1/n` factor.
pub fn ifft_inverse(s: &Spectrum) -> Result<Vec<Complex64>> {
    if s.amplitude.len() != s.phase.len() {
        return Err(Error::domain(format!(
            "spectrum has {} amplitudes but {} phases",
            s.amplitude.len(),
            s.phase.len()
        )));
    }
    check_len(s.len())?;
    let mut buf = s.to_bins();
    let n = buf.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok(buf)
}

/// Direct O(n^2) forward transform.
pub fn naive_dft(c: &[Complex64]) -> Result<Spectrum> {
    check_len(c.len())?;
    Ok(Spectrum::from_bins(&direct_sum(c, -1.0)))
}

/// Direct O(n^2) inverse transform, including the `1/n` factor.
pub fn naive_idft(s: &Spectrum) -> Result<Vec<Complex64>> {
    check_len(s.len())?;
    let n = s.len() as f64;
    Ok(direct_sum(&s.to_bins(), 1.0)
        .into_iter()
        .map(|v| v / n)
        .collect())
}

fn direct_sum(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, v)| {
                    // reduce jk mod n before scaling to keep the angle small
                    let angle = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    v * Complex64::from_polar(1.0, angle)
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dc_only_signal() {
        let s = fft_forward(&[c(1.0, 0.0); 4]).unwrap();
        for (a, e) in s.amplitude.iter().zip([4.0, 0.0, 0.0, 0.0]) {
            assert!((a - e).abs() < 1e-12);
        }
        let back = ifft_inverse(&Spectrum {
            amplitude: vec![4.0, 0.0, 0.0, 0.0],
            phase: vec![0.0; 4],
        })
        .unwrap();
        for v in back {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn impulse_is_flat() {
        let x = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        for s in [fft_forward(&x).unwrap(), naive_dft(&x).unwrap()] {
            for (a, p) in s.amplitude.iter().zip(&s.phase) {
                assert!((a - 1.0).abs() < 1e-12);
                assert!(p.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_bin_has_zero_phase() {
        let s = Spectrum::from_bins(&[c(0.0, 0.0), c(-0.0, 0.0)]);
        assert_eq!(s.phase, vec![0.0, 0.0]);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(fft_forward(&[]).is_err());
        assert!(naive_dft(&[]).is_err());
        let empty = Spectrum {
            amplitude: vec![],
            phase: vec![],
        };
        assert!(ifft_inverse(&empty).is_err());
        assert!(naive_idft(&empty).is_err());
    }

    #[test]
    fn negative_amplitude_is_a_signed_magnitude() {
        let s = Spectrum {
            amplitude: vec![-2.0],
            phase: vec![0.5],
        };
        let v = ifft_inverse(&s).unwrap()[0];
        assert!((v - Complex64::from_polar(2.0, 0.5 + PI)).norm() < 1e-12);
    }

    #[test]
    fn non_power_of_two_lengths_work() {
        let x: Vec<_> = (0..12).map(|i| c(i as f64, (i * i) as f64 * 0.1)).collect();
        let fast = fft_forward(&x).unwrap().to_bins();
        let slow = naive_dft(&x).unwrap().to_bins();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
