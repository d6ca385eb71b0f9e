use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

fn transform(buf: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    // contiguous axis
    buf.par_chunks_mut(n).for_each(|line| fft.process(line));
    // the two strided axes: gather lines, transform, scatter
    for stride in [n, n * n] {
        let mut lines = vec![Complex64::new(0.0, 0.0); n * n * n];
        lines.par_chunks_mut(n).enumerate().for_each(|(l, line)| {
            let (o, r) = (l / stride, l % stride);
            let base = o * n * stride + r;
            for (t, v) in line.iter_mut().enumerate() {
                *v = buf[base + t * stride];
            }
        });
        lines.par_chunks_mut(n).for_each(|line| fft.process(line));
        for (l, line) in lines.chunks(n).enumerate() {
            let (o, r) = (l / stride, l % stride);
            let base = o * n * stride + r;
            for (t, v) in line.iter().enumerate() {
                buf[base + t * stride] = *v;
            }
        }
    }
}

/// In-place forward 3-D DFT of an `n³` row-major array.
pub fn fft3(buf: &mut [Complex64], n: usize) {
    assert_eq!(buf.len(), n * n * n);
    transform(buf, n, false);
}

/// In-place inverse 3-D DFT, normalized by `1/n³`.
pub fn ifft3(buf: &mut [Complex64], n: usize) {
    assert_eq!(buf.len(), n * n * n);
    transform(buf, n, true);
    let s = 1.0 / (n * n * n) as f64;
    buf.par_iter_mut().for_each(|z| *z *= s);
}
